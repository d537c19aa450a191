use std::time::Instant;

use hmt::montecarlo::Executor;
use hmt::pulse::GaussianPulse;
use hmt::selftest::{run_selftest, SelftestHooks};

#[test]
fn fresh_checkout_passes_within_budget() {
    let start = Instant::now();
    let report = run_selftest(&SelftestHooks::default(), &Executor::default());
    let secs = start.elapsed().as_secs_f64();
    println!("{report}");
    assert!(report.passed(), "failed: {:?}", report.failed_ids());
    assert!(secs < 300.0, "selftest took {secs} s");
    for c in &report.checks {
        assert!(c.measured.is_finite() && c.tolerance > 0.0, "{c}");
    }
}

#[test]
fn corrupted_ambiguity_sign_is_named() {
    let hooks = SelftestHooks {
        ambiguity: Some(Box::new(|sigma, tau, nu| {
            GaussianPulse::new(sigma).unwrap().ambiguity(tau, nu).conj()
        })),
    };
    let report = run_selftest(&hooks, &Executor::default());
    let failed = report.failed_ids();
    assert!(failed.contains(&"ambiguity-oracle"), "{failed:?}");
    let c = report.get("ambiguity-oracle").unwrap();
    assert!(c.measured > c.tolerance);
    assert!(report.to_string().contains("FAIL ambiguity-oracle"));
}
