//! Matrix exponential by scaling and squaring with a diagonal Padé core
//! (degrees 3, 5, 7, 9 or 13 chosen from the 1-norm, Higham's thresholds).

use super::scalar::{matmul, norm_one, Lu, Scalar};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn axpy_into<T: Scalar>(acc: &mut [T], alpha: f64, x: &[T]) {
    if alpha == 0.0 {
        return;
    }
    let a = T::from_f64(alpha);
    for (o, &v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

fn add_identity<T: Scalar>(acc: &mut [T], n: usize, alpha: f64) {
    for i in 0..n {
        acc[i * n + i] += T::from_f64(alpha);
    }
}

/// `exp(a)` for a row-major n×n matrix.
pub fn expm<T: Scalar>(a: &[T], n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let norm = norm_one(a, n, n);
    if !norm.is_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }

    let (u, v, squarings) = match THETA.iter().find(|(_, th)| norm <= *th) {
        Some(&(m, _)) if m < 13 => {
            let (u, v) = pade_low(a, n, m);
            (u, v, 0)
        }
        _ => {
            let s = if norm > THETA[4].1 {
                (norm / THETA[4].1).log2().ceil().max(0.0) as u32
            } else {
                0
            };
            let scale = T::from_f64(0.5f64.powi(s as i32));
            let scaled: Vec<T> = a.iter().map(|&x| x * scale).collect();
            let (u, v) = pade13(&scaled, n);
            (u, v, s)
        }
    };

    // (V - U) X = (V + U)
    let q: Vec<T> = v.iter().zip(&u).map(|(&vv, &uu)| vv - uu).collect();
    let p: Vec<T> = v.iter().zip(&u).map(|(&vv, &uu)| vv + uu).collect();
    let lu = Lu::factor(q, n)?;
    let mut x = lu.solve(&p, n);
    for _ in 0..squarings {
        x = matmul(&x, &x, n, n, n);
    }
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::ExpmOverflow { scaled_norm: norm });
    }
    Ok(x)
}

fn pade_low<T: Scalar>(a: &[T], n: usize, m: usize) -> (Vec<T>, Vec<T>) {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let a2 = matmul(a, a, n, n, n);
    let mut powers = vec![a2];
    for _ in 1..m / 2 {
        let last = powers.last().unwrap();
        let next = matmul(last, &powers[0], n, n, n);
        powers.push(next);
    }
    // powers[k] = A^{2(k+1)}
    let mut uacc = vec![T::zero(); n * n];
    let mut v = vec![T::zero(); n * n];
    add_identity(&mut uacc, n, b[1]);
    add_identity(&mut v, n, b[0]);
    for (k, pw) in powers.iter().enumerate() {
        axpy_into(&mut uacc, b[2 * k + 3], pw);
        axpy_into(&mut v, b[2 * k + 2], pw);
    }
    let u = matmul(a, &uacc, n, n, n);
    (u, v)
}

fn pade13<T: Scalar>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let b = &B13;
    let a2 = matmul(a, a, n, n, n);
    let a4 = matmul(&a2, &a2, n, n, n);
    let a6 = matmul(&a4, &a2, n, n, n);

    let mut inner = vec![T::zero(); n * n];
    axpy_into(&mut inner, b[13], &a6);
    axpy_into(&mut inner, b[11], &a4);
    axpy_into(&mut inner, b[9], &a2);
    let mut uacc = matmul(&a6, &inner, n, n, n);
    axpy_into(&mut uacc, b[7], &a6);
    axpy_into(&mut uacc, b[5], &a4);
    axpy_into(&mut uacc, b[3], &a2);
    add_identity(&mut uacc, n, b[1]);
    let u = matmul(a, &uacc, n, n, n);

    let mut inner = vec![T::zero(); n * n];
    axpy_into(&mut inner, b[12], &a6);
    axpy_into(&mut inner, b[10], &a4);
    axpy_into(&mut inner, b[8], &a2);
    let mut v = matmul(&a6, &inner, n, n, n);
    axpy_into(&mut v, b[6], &a6);
    axpy_into(&mut v, b[4], &a4);
    axpy_into(&mut v, b[2], &a2);
    add_identity(&mut v, n, b[0]);
    (u, v)
}
