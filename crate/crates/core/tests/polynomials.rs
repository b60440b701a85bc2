use fermi_rmt::jacobi::*;
use fermi_rmt::kernel::KernelContext;
use fermi_rmt::quadrature::{integrate_1d_pair, integrate_2d_pair, QuadratureConfig};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn representations_agree_to_degree_40() {
    let xs = [-1.0, -0.83, -0.4, 0.0, 0.17, 0.5, 0.91, 1.0];
    for degree in [0, 1, 2, 7, 16, 25, 33, 40] {
        for (alpha, beta) in [(0.0, 0.0), (2.0, 2.0), (0.5, 3.0), (4.0, 1.25)] {
            let p = JacobiParams::new(alpha, beta, degree).unwrap();
            for &x in &xs {
                let reference = jacobi_eval(&p, x, Representation::Ascending).unwrap();
                let scale = reference.abs().max(1.0);
                for rep in [Representation::Descending, Representation::Product, Representation::Recurrence] {
                    let other = jacobi_eval(&p, x, rep).unwrap();
                    assert!(
                        (other - reference).abs() <= 1e-11 * scale,
                        "{rep:?} J_{degree}^({alpha},{beta})({x}) = {other}, expected {reference}"
                    );
                }
            }
        }
    }
}

#[test]
fn even_polynomials_are_orthogonal() {
    for a in 0..=4 {
        let e = EnsembleParams::with_difference(10, a).unwrap();
        let w = |x: f64, c: f64| (c * (1.0 + x)).powi(a as i32);
        for k in 0..10 {
            for l in k..10 {
                let r = integrate_1d_pair(|x, c| w(x, c) * p_eval(&e, k, x).unwrap() * p_eval(&e, l, x).unwrap(), &cfg())
                    .unwrap();
                let expected = if k == l { norm_h(&e, k).unwrap() } else { 0.0 };
                assert!((r.value - expected).abs() <= 1e-10 * expected.max(1.0), "a={a} k={k} l={l}: {}", r.value);
            }
        }
    }
}


#[test]
fn endpoint_weighted_integrals_match_quadrature() {
    let cases = [(0.0, 0.0, 0.0, 0u32), (1.0, 1.0, 0.5, 3), (2.0, 0.5, 2.0, 4), (0.0, 2.0, 1.0, 5), (3.0, 3.0, 3.0, 6)];
    for &(a, b, c, k) in &cases {
        let closed = integral_ac(a, b, c, k).unwrap();
        let j = |x: f64| jacobi_recurrence(a, b, k, x)[k as usize];
        let quad = 2.0
            * integrate_1d_pair(|t, comp| comp.powf(a) * t.powf(c) * j(2.0 * t - 1.0), &cfg())
                .unwrap()
                .value;
        assert!((closed - quad).abs() < 1e-11 * closed.abs().max(1.0), "ac {a} {b} {c} {k}: {closed} vs {quad}");
        for d in [0.0, 1.5, a] {
            let closed = integral_cd(a, b, c, d, k).unwrap();
            let quad = 2.0
                * integrate_1d_pair(|t, comp| comp.powf(d) * t.powf(c) * j(2.0 * t - 1.0), &cfg())
                    .unwrap()
                    .value;
            assert!((closed - quad).abs() < 1e-11 * closed.abs().max(1.0), "cd {a} {b} {c} {d} {k}: {closed} vs {quad}");
        }
    }
}

#[test]
fn kernel_normalisation_and_reproduction() {
    for (m, n) in [(1, 1), (3, 3), (4, 7), (10, 14)] {
        let ctx = KernelContext::new(EnsembleParams::new(m, n).unwrap());
        let trace = integrate_1d_pair(|x, c| ctx.diag_pair(x, c), &cfg()).unwrap().value;
        assert!((trace - m as f64).abs() < 1e-9);
        // ∫ K(x,z) K(z,y) dz = K(x,y)
        for &(x, y) in &[(0.1, 0.7), (0.45, 0.45), (0.9, 0.2)] {
            let r = integrate_1d_pair(
                |z, _| ctx.kernel_eval(x, z).unwrap() * ctx.kernel_eval(z, y).unwrap(),
                &cfg(),
            )
            .unwrap()
            .value;
            let k = ctx.kernel_eval(x, y).unwrap();
            assert!((r - k).abs() < 1e-10 * k.abs().max(1.0), "({m},{n}) at ({x},{y}): {r} vs {k}");
        }
    }
}

#[test]
fn two_point_density_is_normalised() {
    for (m, n) in [(2, 2), (3, 5)] {
        let ctx = KernelContext::new(EnsembleParams::new(m, n).unwrap());
        let total = integrate_2d_pair(|x, _, y, _| ctx.density_two(x, y).unwrap(), &QuadratureConfig { two_d_nodes: 32, ..cfg() })
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-10, "({m},{n}): {total}");
        // the marginal of g₂ is g₁
        let x = 0.3;
        let marginal = integrate_1d_pair(|y, _| ctx.density_two(x, y).unwrap(), &cfg()).unwrap().value;
        assert!((marginal - ctx.density_one(x).unwrap()).abs() < 1e-10);
    }
}
