use fermi_rmt::closed_forms::{mean_entropy, variance_entropy};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::kernel::KernelContext;
use fermi_rmt::sampling::*;
use fermi_rmt::stats::ks_one_sample;

fn ep(m: u32, n: u32) -> EnsembleParams {
    EnsembleParams::new(m, n).unwrap()
}

fn pooled(samples: &[Spectrum]) -> Vec<f64> {
    samples.iter().flat_map(|s| s.values().iter().copied()).collect()
}

#[test]
fn single_mode_chain_is_uniform() {
    let e = ep(1, 1);
    let run = sample_loggas(&e, &ChainConfig::for_params(&e, 1), 100_000).unwrap();
    assert!(ks_one_sample(&pooled(&run.samples), |x| x).pass);
}

#[test]
fn both_samplers_match_the_marginal() {
    let e = ep(1, 2);
    let ctx = KernelContext::new(e);
    let cdf = |x: f64| ctx.cdf_one(x).unwrap();
    let run = sample_loggas(&e, &ChainConfig::for_params(&e, 2), 100_000).unwrap();
    let ks = ks_one_sample(&pooled(&run.samples), cdf);
    assert!(ks.pass, "log-gas {ks:?}");
    let phys = sample_physical_many(&e, 3, 100_000).unwrap();
    let ks = ks_one_sample(&pooled(&phys), cdf);
    assert!(ks.pass, "physical {ks:?}");
}

#[test]
fn entropy_moments_at_two_two() {
    let e = ep(2, 2);
    let s = estimate(&e, &ChainConfig::for_params(&e, 4), Statistic::Entropy, 100_000).unwrap();
    let mean = mean_entropy(&e).evaluate();
    let var = variance_entropy(&e).0.evaluate();
    assert!((s.mean - mean).abs() < 4.0 * s.stderr_mean, "{s:?} vs {mean}");
    assert!((s.variance - var).abs() < 5.0 * s.stderr_variance, "{s:?} vs {var}");
    let rate = s.acceptance_rate.unwrap();
    assert!((0.0..=1.0).contains(&rate));
}

#[test]
fn every_sample_is_in_range() {
    for (m, n) in [(3, 3), (4, 6)] {
        let e = ep(m, n);
        let run = sample_loggas(&e, &ChainConfig::for_params(&e, 5), 2000).unwrap();
        let phys = sample_physical_many(&e, 5, 2000).unwrap();
        let top = m as f64 * std::f64::consts::LN_2;
        for s in run.samples.iter().chain(&phys) {
            assert_eq!(s.len(), m as usize);
            let ent = entropy_of(s);
            assert!((0.0..=top).contains(&ent) && capacity_of(s) >= 0.0);
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let e = ep(3, 4);
    let cfg = ChainConfig::for_params(&e, 6);
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                estimate(&e, &cfg, Statistic::StandardizedEntropy, 4000).unwrap(),
                sample_physical_many(&e, 6, 3000).unwrap(),
            )
        })
    };
    let (one, phys_one) = run_with(1);
    let (again, _) = run_with(1);
    let (four, phys_four) = run_with(4);
    assert_eq!(one, again);
    assert!((one.mean - four.mean).abs() <= 1e-12 && (one.variance - four.variance).abs() <= 1e-12);
    assert_eq!(phys_one, phys_four);
}
