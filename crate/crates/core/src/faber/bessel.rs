//! Bessel functions of the first kind, integer order.

const SERIES_LIMIT: f64 = 12.0;
const BIG: f64 = 1e250;

/// `J_n(x)`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        series(n, ax)
    } else {
        bessel_j_all(n, ax)[n]
    };
    sign * v
}

fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    let h2 = h * h;
    let mut sum = term;
    for k in 1..200 {
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J_0(x) … J_n(x)` for `x > 0` by Miller's backward recurrence,
/// normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_all(n: usize, x: f64) -> Vec<f64> {
    let top = n.max(x.ceil() as usize);
    let m = 2 * ((top + 20 + (40.0 * top as f64).sqrt() as usize) / 2);
    let mut out = vec![0.0; n + 1];
    let two_over_x = 2.0 / x;
    let (mut jp, mut j) = (0.0, 1.0);
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let jm = k as f64 * two_over_x * j - jp;
        jp = j;
        j = jm;
        if jm.abs() > BIG {
            j /= BIG;
            jp /= BIG;
            norm /= BIG;
            for o in out.iter_mut() {
                *o /= BIG;
            }
        }
        // j now holds the unnormalized J_{k-1}
        let order = k - 1;
        if order <= n {
            out[order] = j;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    for o in out.iter_mut() {
        *o /= norm;
    }
    out
}
