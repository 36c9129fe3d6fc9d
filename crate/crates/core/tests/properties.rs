use mzfaber::faber::{
    bessel_j, expm_faber, faber_modes, faber_polys, faber_recurrence_apply, fit_faber_map, EllipseMap, DEFAULT_PADDING,
};
use mzfaber::gle::{solve_gle, GleProblem, SolverConfig};
use mzfaber::io::Table;
use mzfaber::kernels::{
    dyson_coeffs, faber_coeffs, kernel_eval, laplace_g, reduce, Family, KernelExpansion, StatsKind, SystemSpec,
};
use mzfaber::linalg::{eigenvalues, expm_apply, mat_vec, poly_apply, spectral_hull, DenseMatrix};
use mzfaber::models::{
    bethe_node_count, build_bethe, build_chain_system, build_erdos_renyi, build_path, Boundary, GraphSpec,
};
use mzfaber::oracles::{collapsed_integral, nested_integral, operator_oracle, vacf_matrix_exp, Op};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(n: usize, scale: f64) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-1.0..1.0f64, n * n)
        .prop_map(move |d| DenseMatrix::new(n, n, d.into_iter().map(|x| x * scale).collect()).unwrap())
}

fn square(max: usize, scale: f64) -> impl Strategy<Value = DenseMatrix> {
    (1..=max).prop_flat_map(move |n| matrix(n, scale))
}

fn matrix_and_vec(max: usize, scale: f64) -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
    (1..=max).prop_flat_map(move |n| (matrix(n, scale), proptest::collection::vec(-1.0..1.0f64, n)))
}

fn system(min: usize, max: usize) -> impl Strategy<Value = SystemSpec> {
    (min..=max).prop_flat_map(|n| {
        (matrix(n, 1.0 / (n as f64).sqrt()), proptest::collection::vec(-1.0..1.0f64, n)).prop_map(|(a, mean)| {
            SystemSpec::new(a, mean, StatsKind::ChorinInitial).unwrap()
        })
    })
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|x| x.abs()).fold(1e-300, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn monomial_poly_apply_is_iterated_mat_vec((m, v) in matrix_and_vec(8, 0.35), j in 0usize..12) {
        let mut coeffs = vec![0.0; j + 1];
        coeffs[j] = 1.0;
        let p = poly_apply(&m, &coeffs, &v).unwrap();
        let mut w = v.clone();
        for _ in 0..j {
            w = mat_vec(&m, &w).unwrap();
        }
        let scale = w.iter().chain(&v).map(|x| x.abs()).fold(0.0, f64::max);
        let err = p.iter().zip(&w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * scale.max(1e-300), "err {err:e}");
    }

    #[test]
    fn exponential_semigroup((m, v) in matrix_and_vec(7, 1.0), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let joint = expm_apply(&m, t1 + t2, &v).unwrap();
        let split = expm_apply(&m, t1, &expm_apply(&m, t2, &v).unwrap()).unwrap();
        prop_assert!(rel(&split, &joint) < 1e-9);
    }

    #[test]
    fn trace_is_eigenvalue_sum(m in square(12, 1.0)) {
        let s = eigenvalues(&m).unwrap();
        prop_assert_eq!(s.len(), m.rows());
        let sum = s.sum();
        let scale = m.trace().abs().max(m.norm_fro()).max(1.0);
        prop_assert!((sum.re - m.trace()).abs() <= 1e-8 * scale);
        prop_assert!(sum.im.abs() <= 1e-8 * scale);
        prop_assert!(s.is_conjugate_closed(1e-8 * scale));
    }

    #[test]
    fn hull_contains_spectrum(m in square(12, 2.0)) {
        let s = eigenvalues(&m).unwrap();
        let h = spectral_hull(&m).unwrap();
        prop_assert_eq!(h.im_min, -h.im_max);
        for z in s.iter() {
            prop_assert!(h.contains(*z, 1e-10));
        }
    }

    #[test]
    fn scalar_recurrence_matches_polynomial_values(
        mu in -3.0..3.0f64,
        c0 in -1.0..1.0f64,
        alpha in 0.0..2.0f64,
        beta in 0.05..2.0f64,
    ) {
        let map = EllipseMap::from_axes(c0, alpha, beta).unwrap();
        let m = DenseMatrix::new(1, 1, vec![mu]).unwrap();
        let vecs = faber_recurrence_apply(&map, &m, &[1.0], 40).unwrap();
        let scalar = faber_polys(&map, Complex64::new(mu, 0.0), 40);
        for (v, s) in vecs.iter().zip(&scalar) {
            prop_assert!((v[0] - s.re).abs() <= 1e-12 * s.norm().max(1.0));
        }
    }

    #[test]
    fn faber_series_reproduces_scalar_exponential(
        c0 in -1.0..1.0f64,
        alpha in 0.0..1.2f64,
        beta in 0.1..1.2f64,
        radius in 0.0..0.95f64,
        angle in 0.0..std::f64::consts::TAU,
        t in 0.0..10.0f64,
    ) {
        let map = EllipseMap::from_axes(c0, alpha.min(beta), beta).unwrap();
        let lambda = Complex64::new(c0 + radius * map.semi_real * angle.cos(), radius * map.semi_imag * angle.sin());
        let modes = faber_modes(&map, t, 60).unwrap().values;
        let polys = faber_polys(&map, lambda, 60);
        let sum: Complex64 = modes.iter().zip(&polys).map(|(a, f)| *a * *f).sum();
        let exact = (t * lambda).exp();
        prop_assert!((sum - exact).norm() <= 1e-8 * exact.norm().max(1.0), "{sum} vs {exact}");
    }

    #[test]
    fn taylor_limit_identity(c0 in -1.0..1.0f64, c1 in -1e-8..0.0f64) {
        let map = EllipseMap { c0, c1, capacity: 1.0, semi_real: 1.0, semi_imag: 1.0 };
        for k in 0..=40 {
            let t = 2.0 * k as f64 / 40.0;
            let a = faber_modes(&map, t, 10).unwrap().values;
            let mut term = (t * c0).exp();
            for (j, aj) in a.iter().enumerate() {
                if j > 0 {
                    term *= t / j as f64;
                }
                prop_assert!((aj - term).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bessel_normalization(x in 0.0..20.0f64) {
        let s: f64 = bessel_j(0, x) + 2.0 * (1..=30).map(|k| bessel_j(2 * k, x)).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn faber_and_dyson_agree_on_scalar_coefficients(
        mu in -2.0..2.0f64,
        a in -1.0..1.0f64,
        b in -1.0..1.0f64,
        c0 in -1.0..1.0f64,
        beta in 0.1..2.0f64,
    ) {
        let sys = SystemSpec::new(
            DenseMatrix::from_rows(&[vec![0.0, a], vec![b, mu]]).unwrap(),
            vec![0.0, 0.5],
            StatsKind::ChorinInitial,
        ).unwrap();
        let r = reduce(&sys, 1).unwrap();
        let map = EllipseMap::from_axes(c0, 0.0, beta).unwrap();
        let d = dyson_coeffs(&r, 4).unwrap();
        let f = faber_coeffs(&r, &map, 4).unwrap();
        let polys = faber_polys(&map, Complex64::new(mu, 0.0), 4);
        for j in 0..=4 {
            prop_assert!((f.g[j] - d.g[0] * polys[j].re).abs() < 1e-12 * (1.0 + f.g[j].abs()));
            prop_assert!((f.f[j] - d.f[0] * polys[j].re).abs() < 1e-12 * (1.0 + f.f[j].abs()));
        }
    }

    #[test]
    fn dyson_laplace_leading_term(sys in system(2, 6), mag in 1e3..1e5f64, phase in -1.2..1.2f64) {
        let r = reduce(&sys, 1).unwrap();
        let k = dyson_coeffs(&r, 8).unwrap();
        let s = Complex64::from_polar(mag, phase);
        let g = laplace_g(&k, s).unwrap();
        let lead = k.g[0] / s;
        let scale = k.g.iter().map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!((g - lead).norm() <= 2.0 * scale / (mag * mag));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn families_agree_and_match_exact_kernel(sys in system(3, 8)) {
        let r = reduce(&sys, 1).unwrap();
        let map = fit_faber_map(&eigenvalues(&r.m11t).unwrap(), DEFAULT_PADDING).unwrap();
        let mut kernels = vec![
            KernelExpansion::build(Family::Dyson, &r, 40, None).unwrap(),
            KernelExpansion::build(Family::Faber, &r, 40, Some(&map)).unwrap(),
            KernelExpansion::build(Family::Newton, &r, r.dim(), None).unwrap(),
        ];
        if let Ok(k) = KernelExpansion::build(Family::Lagrange, &r, r.dim(), None) {
            kernels.push(k);
        }
        for i in 0..=30 {
            let t = 0.1 * i as f64;
            let (ge, fe) = r.exact_kernel(t).unwrap();
            for k in &kernels {
                let (g, f) = kernel_eval(k, t).unwrap();
                prop_assert!((g - ge).abs() < 5e-7, "{:?} g at t={t}: {g} vs {ge}", k.family);
                prop_assert!((f - fe).abs() < 5e-7, "{:?} f at t={t}: {f} vs {fe}", k.family);
            }
        }
    }

    #[test]
    fn projection_algebra(sys in system(2, 8), idx in 0usize..8) {
        let idx = 1 + idx % sys.dim();
        let p = operator_oracle(&sys, idx, &[Op::P]).unwrap();
        let q = operator_oracle(&sys, idx, &[Op::Q]).unwrap();
        let pp = p.matmul(&p).unwrap();
        prop_assert!(pp.sub(&p).unwrap().norm_fro() <= 1e-12 * p.norm_fro().max(1.0));
        let sum = p.add(&q).unwrap();
        prop_assert!(sum.sub(&DenseMatrix::identity(sum.rows())).unwrap().norm_fro() == 0.0);
    }

    #[test]
    fn gle_is_deterministic_and_linear(
        a in -1.0..0.5f64,
        rate in 0.1..2.0f64,
        weight in -2.0..2.0f64,
        u0 in -2.0..2.0f64,
        scale in -5.0..5.0f64,
    ) {
        let p = GleProblem { a, b: 0.0, kernel: move |t: f64| (weight * (-rate * t).exp(), 0.0) };
        let cfg = SolverConfig::new(1e-2, 4.0).unwrap();
        let base = solve_gle(&p, u0, &cfg).unwrap();
        let again = solve_gle(&p, u0, &cfg).unwrap();
        prop_assert!(base.values.iter().zip(&again.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        let scaled = solve_gle(&p, scale * u0, &cfg).unwrap();
        let expected: Vec<f64> = base.values.iter().map(|v| scale * v).collect();
        prop_assert!(rel(&scaled.values, &expected) <= 1e-12);
    }

    #[test]
    fn builders_have_degree_row_sums(n in 1usize..40, p in 0.0..1.0f64, seed in any::<u64>(), l in 2usize..5, s in 1usize..4) {
        let graphs: Vec<GraphSpec> = vec![
            build_erdos_renyi(n, p, seed).unwrap(),
            build_bethe(l, s).unwrap(),
            build_path(n).unwrap(),
        ];
        for g in &graphs {
            for i in 0..g.n_nodes {
                let row: f64 = g.adjacency.row(i).iter().sum();
                prop_assert_eq!(row, g.degree[(i, i)]);
                prop_assert_eq!(g.adjacency[(i, i)], 0.0);
                for j in 0..g.n_nodes {
                    prop_assert_eq!(g.adjacency[(i, j)], g.adjacency[(j, i)]);
                }
            }
        }
    }

    #[test]
    fn edge_lists_round_trip(n in 1usize..30, p in 0.0..1.0f64, seed in any::<u64>()) {
        let g = build_erdos_renyi(n, p, seed).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = GraphSpec::read_edge_list(&buf[..]).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.n_nodes, g.n_nodes);
    }

    #[test]
    fn path_chain_spectrum_is_imaginary_pairs(n in 1usize..=10, pinned in any::<bool>(), k in 0.5..2.0f64, m in 0.5..2.0f64) {
        let g = build_path(n).unwrap();
        let boundary = if pinned { Boundary::Pinned { coordination: 2 } } else { Boundary::Free };
        let sys = build_chain_system(&g, k, m, Some(2), boundary).unwrap();
        let s = eigenvalues(&sys.a).unwrap();
        prop_assert_eq!(s.len(), 2 * n);
        let scale = s.radius().max(1.0);
        let mut zeros = 0;
        for z in s.iter() {
            prop_assert!(z.re.abs() < 1e-6 * scale, "{z}");
            if z.norm() < 1e-6 * scale {
                zeros += 1;
            }
        }
        prop_assert!(s.is_conjugate_closed(1e-6 * scale));
        prop_assert_eq!(zeros, if pinned { 0 } else { 2 });
    }

    #[test]
    fn vacf_starts_at_one(n in 1usize..=12, l in 2usize..4, seed in any::<u64>(), idx in 0usize..12) {
        let g = build_erdos_renyi(n, 0.4, seed).unwrap();
        let sys = build_chain_system(&g, 1.0, 1.0, Some(l), Boundary::Free).unwrap();
        let c = vacf_matrix_exp(&sys, 1 + idx % n, &[0.0, 0.5]).unwrap();
        prop_assert_eq!(c.values[0], 1.0);
    }

    #[test]
    fn nested_and_collapsed_integrals_agree(n in 1usize..=3, w in 0.1..3.0f64, t in 0.1..3.0f64) {
        let h = move |s: f64| (w * s).cos() * (-0.3 * s).exp();
        let a = nested_integral(&h, n, t, 24);
        let b = collapsed_integral(&h, n, t, 24);
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn csv_round_trip_is_lossless(
        cols in (1usize..4, 0usize..20).prop_flat_map(|(c, r)| {
            proptest::collection::vec(proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, r), c)
        })
    ) {
        let headers = (0..cols.len()).map(|i| format!("c{i}")).collect();
        let t = Table::new(headers, cols).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Table::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(&back.headers, &t.headers);
        prop_assert_eq!(back.rows(), t.rows());
        for (c, d) in t.columns.iter().zip(&back.columns) {
            for (x, y) in c.iter().zip(d) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}

#[test]
fn bethe_counts_follow_shell_formula() {
    for l in 2..=4 {
        for s in 1..=8 {
            let mut expected = 1;
            let mut shell = l;
            for _ in 0..s {
                expected += shell;
                shell *= l - 1;
            }
            assert_eq!(bethe_node_count(l, s), expected, "l={l} S={s}");
            if expected <= 2000 {
                assert_eq!(build_bethe(l, s).unwrap().n_nodes, expected);
            }
        }
    }
}

#[test]
fn expm_faber_converges_on_random_stable_matrix() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 12;
    let m = DenseMatrix::from_fn(n, n, |i, j| {
        rng.random_range(-0.3..0.3) - if i == j { 0.5 } else { 0.0 }
    })
    .unwrap();
    let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let map = fit_faber_map(&eigenvalues(&m).unwrap(), DEFAULT_PADDING).unwrap();
    let exact = expm_apply(&m, 2.0, &v).unwrap();
    let err = |order| rel(&expm_faber(&map, &m, 2.0, &v, order).unwrap(), &exact);
    assert!(err(30) < 1e-10 && err(30) < err(10) && err(10) < err(4));
}
