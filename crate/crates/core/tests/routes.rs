use fermi_rmt::appendix_sums::assemble;
use fermi_rmt::closed_forms::{mean_capacity_for, mean_entropy, variance_entropy, Status};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::kernel::KernelContext;
use fermi_rmt::observables::v_pair;
use fermi_rmt::quadrature::*;

#[test]
fn three_routes_agree() {
    let cfg = QuadratureConfig::default();
    for m in 1..=5 {
        for a in 0..=3 {
            let e = EnsembleParams::with_difference(m, a).unwrap();
            let sums = assemble(&e);
            let (var, status) = variance_entropy(&e);
            assert_eq!(status == Status::Proven, a == 0);
            let var = var.evaluate();
            let var_q = variance_quad(&e, &cfg).unwrap().value;
            assert!((var - sums.variance).abs() < 1e-10, "{e}: {var} vs sums {}", sums.variance);
            assert!((var - var_q).abs() < 1e-10, "{e}: {var} vs quad {var_q}");
            let cap = mean_capacity_for(&e).unwrap().evaluate();
            let cap_q = capacity_quad(&e, &cfg).unwrap().value;
            assert!((cap - sums.capacity).abs() < 1e-10 && (cap - cap_q).abs() < 1e-10, "{e}");
            let s = mean_entropy(&e).evaluate();
            assert!((s - mean_entropy_quad(&e, &cfg).unwrap().value).abs() < 1e-11, "{e}");
        }
    }
}

#[test]
fn factorised_cross_term_is_honest() {
    // the separable rule must equal the literal double integral
    let c = QuadratureConfig { target_abs_tol: 1e-11, two_d_nodes: 32, ..QuadratureConfig::default() };
    for (m, n) in [(1, 3), (3, 4), (4, 4)] {
        let e = EnsembleParams::new(m, n).unwrap();
        let ctx = KernelContext::new(e);
        let full = integrate_2d_pair(
            |x, cx, y, cy| {
                let kxy: f64 = ctx.basis_pair(x, cx).iter().zip(ctx.basis_pair(y, cy)).map(|(p, q)| p * q).sum();
                v_pair(x, cx) * v_pair(y, cy) * kxy * kxy
            },
            &c,
        )
        .unwrap();
        let fact = ib_quad(&e, &c).unwrap();
        assert!((full.value - fact.value).abs() < 1e-11, "({m},{n}): {} vs {}", full.value, fact.value);
        assert!((fact.value - assemble(&e).ib).abs() < 1e-10);
    }
}
