use hmt::analysis::{AnalysisOptions, NoiseMode, SinrModel};
use hmt::cli::ExperimentConfig;
use hmt::montecarlo::{
    estimate_sinr_with, sweep, DelayMode, Executor, Receiver, SweepAxis, TrialConfig,
};
use hmt::selftest::{
    captured_energy_error, ci_scaling_spread, reference_channel, reference_lattice,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn upper_bound_dominates_max_sinr_dominates_tpr(
        vartheta in 0.02f64..0.5,
        snr_db in 0.0f64..30.0,
        physical in any::<bool>(),
    ) {
        let options = AnalysisOptions {
            noise_mode: if physical { NoiseMode::Physical } else { NoiseMode::Paper },
            ..AnalysisOptions::default()
        };
        let m = SinrModel::new(reference_lattice(), reference_channel(vartheta), options);
        let n = 1.0 / 10f64.powf(snr_db / 10.0);
        let tpr = m.sinr_db(1.0, n, 0.0);
        let dt = m.max_sinr_dt(m.scattering().tau_rms).dt;
        let max = m.sinr_db(1.0, n, dt);
        let ub = m.upper_bound(1.0, n).sinr_db;
        prop_assert!(ub >= max - 1e-9, "ub {} max {}", ub, max);
        prop_assert!(max >= tpr - 1e-9, "max {} tpr {}", max, tpr);
    }
}

#[test]
fn empirical_receivers_keep_their_order() {
    let cfg = ExperimentConfig::default();
    let template = cfg.trial_config(0.2, 20.0).unwrap();
    let rows = sweep(
        &template,
        &SweepAxis::SnrDb(vec![0.0, 15.0, 30.0]),
        &[Receiver::Tpr, Receiver::MaxSinr, Receiver::UpperBound],
        &Executor::default(),
    )
    .unwrap();
    for snr in [0.0, 15.0, 30.0] {
        let get = |r: Receiver| {
            rows.iter()
                .find(|x| x.receiver == r && x.axis_value == snr)
                .unwrap()
                .report
                .empirical_sinr_db
        };
        let (t, m) = (get(Receiver::Tpr), get(Receiver::MaxSinr));
        assert!(m > t + 0.5, "snr {snr}: {m} vs {t}");
    }
    assert!(rows.iter().all(|r| r.report.flags.status() == "ok"));
}

#[test]
fn captured_energy_matches_theory() {
    let err = captured_energy_error(100_000, &Executor::default());
    assert!(err < 0.01, "{err}");
}

#[test]
fn ci_shrinks_as_inverse_square_root() {
    let spread = ci_scaling_spread(&Executor::default());
    assert!(spread < 0.2, "{spread}");
}

#[test]
fn single_trial_has_infinite_ci() {
    let mut cfg = TrialConfig::new(reference_lattice(), reference_channel(0.1));
    cfg.trials = 1;
    cfg.dt_mode = DelayMode::Tpr;
    let r = estimate_sinr_with(&cfg, &Executor::default()).unwrap();
    assert!(r.ci_halfwidth_db.is_infinite());
    assert!(r.empirical_sinr_db.is_finite());
}

#[test]
fn seeds_change_the_estimate_but_not_the_theory() {
    let mut a = TrialConfig::new(reference_lattice(), reference_channel(0.1));
    a.trials = 500;
    let mut b = a;
    b.master_seed = a.master_seed + 1;
    let exec = Executor::default();
    let ra = estimate_sinr_with(&a, &exec).unwrap();
    let rb = estimate_sinr_with(&b, &exec).unwrap();
    assert_ne!(ra.empirical_sinr_db, rb.empirical_sinr_db);
    assert_eq!(ra.theoretical_sinr_db, rb.theoretical_sinr_db);
}
