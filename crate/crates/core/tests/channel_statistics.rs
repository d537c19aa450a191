use hmt::channel::{ChannelPaths, ExpUScattering};
use hmt::montecarlo::trial_rng;
use hmt::selftest::channel_statistics;
use proptest::prelude::*;

#[test]
fn moments_and_doppler_law_at_1e5_samples() {
    for seed in [1, 2, 3] {
        let (mean, second, ks) = channel_statistics(100_000, seed);
        assert!(mean < 0.02, "seed {seed}: mean error {mean}");
        assert!(second < 0.02, "seed {seed}: second moment error {second}");
        assert!(ks < 0.01, "seed {seed}: KS {ks}");
    }
}

#[test]
fn average_power_is_unity() {
    let s = ExpUScattering::from_spread_factor(0.2, 2e-5, 10.0).unwrap();
    let n = 4000;
    let mean: f64 = (0..n)
        .map(|i| {
            let mut rng = trial_rng(9, i);
            ChannelPaths::draw(&s, 64, &mut rng).unwrap().total_power()
        })
        .sum::<f64>()
        / n as f64;
    // std of the mean is about 1/sqrt(64 n)
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_stay_inside_the_scattering_support(
        vartheta in 0.01f64..0.9,
        tau_rms in 1e-6f64..1e-4,
        ratio in 5.0f64..20.0,
        seed in any::<u64>(),
        count in 1usize..200,
    ) {
        let s = ExpUScattering::from_spread_factor(vartheta, tau_rms, ratio).unwrap();
        let mut rng = trial_rng(seed, 0);
        let p = ChannelPaths::draw(&s, count, &mut rng).unwrap();
        prop_assert_eq!(p.paths.len(), count);
        for path in &p.paths {
            prop_assert!(path.delay >= 0.0 && path.delay <= s.tau_max);
            prop_assert!(path.doppler.abs() <= s.doppler_max);
            prop_assert!(path.gain.norm().is_finite());
        }
    }

    #[test]
    fn same_seed_same_realization(seed in any::<u64>(), index in any::<u64>()) {
        let s = ExpUScattering::from_spread_factor(0.1, 2e-5, 10.0).unwrap();
        let a = ChannelPaths::draw(&s, 16, &mut trial_rng(seed, index)).unwrap();
        let b = ChannelPaths::draw(&s, 16, &mut trial_rng(seed, index)).unwrap();
        prop_assert_eq!(a, b);
    }
}
