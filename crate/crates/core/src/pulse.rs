//! Gaussian prototype pulse, its closed-form ambiguity function and a
//! sampled cross-ambiguity used as a numeric oracle.
//!
//! The pulse is `g(t) = (2/σ)^{1/4} exp(-(π/σ) t²)` with unit energy. Its
//! ambiguity function is
//!
//! ```text
//! A_g(τ, ν) = ∫ g(t) g*(t - τ) e^{-j2πνt} dt
//!           = exp(-(π/2)(τ²/σ + σ ν²)) · exp(-jπτν)
//! ```
//!
//! Note the `σ ν²` term: it is required for the exponent to be
//! dimensionless and is confirmed by the sampled oracle in the tests.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{require_positive, HmtError, Result};

/// Half-width of every sampled pulse support, in units of `σ^{1/2}`.
pub const SUPPORT_HALF_WIDTH: f64 = 8.0;

/// Upper bound on the pulse energy outside `±SUPPORT_HALF_WIDTH·σ^{1/2}`.
/// The exact value is `erfc(8·√(2π)) ≈ 1e-176`.
pub const TRUNCATED_TAIL_ENERGY: f64 = 1e-28;

/// Unit-energy Gaussian prototype pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    sigma: f64,
    amplitude: f64,
}

/// A time-frequency displacement `(t₀, f₀)` of a pulse: `g(t - t₀) e^{j2πf₀t}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TfShift {
    pub time: f64,
    pub freq: f64,
}

impl TfShift {
    pub fn new(time: f64, freq: f64) -> Self {
        Self { time, freq }
    }
}

impl GaussianPulse {
    pub fn new(sigma: f64) -> Result<Self> {
        let sigma = require_positive("sigma", sigma)?;
        Ok(Self {
            sigma,
            amplitude: (2.0 / sigma).powf(0.25),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Half-width of the sampled support in seconds.
    pub fn support_half_width(&self) -> f64 {
        SUPPORT_HALF_WIDTH * self.sigma.sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-(PI / self.sigma) * t * t).exp()
    }

    /// Value of `g(t - shift.time)·e^{j2π shift.freq t}`.
    pub fn eval_shifted(&self, t: f64, shift: TfShift) -> Complex64 {
        let phase = 2.0 * PI * shift.freq * t;
        Complex64::from_polar(self.eval(t - shift.time), phase)
    }

    /// Closed-form ambiguity function.
    pub fn ambiguity(&self, tau: f64, nu: f64) -> Complex64 {
        let mag = (-(PI / 2.0) * (tau * tau / self.sigma + self.sigma * nu * nu)).exp();
        Complex64::from_polar(mag, -PI * tau * nu)
    }

    /// Closed-form inner product `⟨g_a, g_b⟩ = ∫ g_a(t) g_b*(t) dt` of two
    /// time-frequency shifted copies of the pulse.
    pub fn shifted_inner_product(&self, a: TfShift, b: TfShift) -> Complex64 {
        let dt = a.time - b.time;
        let df = a.freq - b.freq;
        let mag = (-(PI / 2.0) * (dt * dt / self.sigma + self.sigma * df * df)).exp();
        Complex64::from_polar(mag, PI * df * (a.time + b.time))
    }

    /// Samples `g(t - dt)` on `grid`. Fractional `dt` is exact because the
    /// pulse is re-evaluated analytically.
    pub fn shifted_samples(&self, dt: f64, grid: &SamplingGrid) -> SampledWaveform {
        let samples = grid
            .times()
            .map(|t| Complex64::new(self.eval(t - dt), 0.0))
            .collect();
        SampledWaveform {
            samples,
            sample_interval: grid.interval,
            start_time: grid.start,
        }
    }

    /// Grid covering the pulse centred at `center` over its full support.
    pub fn support_grid(&self, center: f64, interval: f64) -> Result<SamplingGrid> {
        let hw = self.support_half_width();
        SamplingGrid::covering(center - hw, center + hw, interval)
    }
}

/// Uniform sampling instants `start + k·interval`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub start: f64,
    pub interval: f64,
    pub len: usize,
}

impl SamplingGrid {
    pub fn new(start: f64, interval: f64, len: usize) -> Result<Self> {
        require_positive("sample_interval", interval)?;
        if len == 0 {
            return Err(HmtError::ParameterDomain {
                name: "len",
                value: 0.0,
                reason: "grid must hold at least one sample",
            });
        }
        Ok(Self {
            start,
            interval,
            len,
        })
    }

    /// Smallest grid anchored on a multiple of `interval` that spans `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, interval: f64) -> Result<Self> {
        require_positive("sample_interval", interval)?;
        let first = (lo / interval).floor() as i64;
        let last = (hi / interval).ceil() as i64;
        Self::new(
            first as f64 * interval,
            interval,
            (last - first + 1).max(1) as usize,
        )
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.interval
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.time(k))
    }

    /// True when `[lo, hi]` lies inside the grid span.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-9 * self.interval;
        lo >= self.start - slack && hi <= self.end() + slack
    }
}

/// Complex samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<Complex64>,
    pub sample_interval: f64,
    pub start_time: f64,
}

impl SampledWaveform {
    pub fn new(samples: Vec<Complex64>, sample_interval: f64, start_time: f64) -> Result<Self> {
        require_positive("sample_interval", sample_interval)?;
        if samples.is_empty() {
            return Err(HmtError::ParameterDomain {
                name: "samples",
                value: 0.0,
                reason: "waveform must hold at least one sample",
            });
        }
        Ok(Self {
            samples,
            sample_interval,
            start_time,
        })
    }

    pub fn grid(&self) -> SamplingGrid {
        SamplingGrid {
            start: self.start_time,
            interval: self.sample_interval,
            len: self.samples.len(),
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_time + k as f64 * self.sample_interval
    }

    /// Riemann-sum energy `Σ|x[k]|²·T_s`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.sample_interval
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.samples.iter_mut().for_each(|s| *s *= factor);
    }

    /// Sample-wise `self + other` on an identical grid.
    pub fn add(&self, other: &SampledWaveform) -> Result<SampledWaveform> {
        if self.grid() != other.grid() {
            return Err(HmtError::Incompatible(
                "waveforms must share the same sampling grid".into(),
            ));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SampledWaveform { samples, ..*self })
    }
}

/// Discrete cross-ambiguity `Σ_k a[k]·b*(t_k - τ)·e^{-j2πνt_k}·T_s`.
///
/// `τ` must place `t_k - τ` on the sample grid of `b`; samples of `b` that
/// fall outside its span count as zero.
pub fn cross_ambiguity_numeric(
    a: &SampledWaveform,
    b: &SampledWaveform,
    tau: f64,
    nu: f64,
) -> Result<Complex64> {
    let ts = a.sample_interval;
    if (ts - b.sample_interval).abs() > 1e-12 * ts {
        return Err(HmtError::Incompatible(format!(
            "sample intervals differ: {} vs {}",
            a.sample_interval, b.sample_interval
        )));
    }
    let shift = (a.start_time - tau - b.start_time) / ts;
    let offset = shift.round();
    if (shift - offset).abs() > 1e-6 {
        return Err(HmtError::Incompatible(format!(
            "delay {tau} is not on the sample grid (fractional offset {})",
            shift - offset
        )));
    }
    let offset = offset as i64;
    let blen = b.samples.len() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &ak) in a.samples.iter().enumerate() {
        let j = k as i64 + offset;
        if j < 0 || j >= blen {
            continue;
        }
        let t = a.time(k);
        let rot = Complex64::from_polar(1.0, -2.0 * PI * nu * t);
        acc += ak * b.samples[j as usize].conj() * rot;
    }
    Ok(acc * ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse(sigma: f64) -> GaussianPulse {
        GaussianPulse::new(sigma).unwrap()
    }

    #[test]
    fn peak_value_and_tails() {
        assert!((pulse(1.0).eval(0.0) - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((pulse(1.0).eval(0.0) - 1.189_207).abs() < 1e-6);
        let p = pulse(1.0);
        assert!(p.eval(1.0) < p.eval(0.5) && p.eval(0.5) < p.eval(0.0));
        assert_eq!(p.eval(1e3), 0.0);
        assert_eq!(p.eval(-0.7), p.eval(0.7));

        let sigma = 1e-4 / (3f64.sqrt() * 25e3);
        assert!((sigma - 2.3094e-9).abs() < 1e-13);
        assert_eq!(pulse(sigma).eval(0.0), (2.0 / sigma).powf(0.25));
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(matches!(
            GaussianPulse::new(0.0),
            Err(HmtError::ParameterDomain { name: "sigma", .. })
        ));
        assert!(GaussianPulse::new(-1.0).is_err());
        assert!(GaussianPulse::new(f64::NAN).is_err());
    }

    #[test]
    fn sampled_pulse_has_unit_energy() {
        let p = pulse(1.0);
        let grid = p.support_grid(0.0, 1.0 / 200.0).unwrap();
        let w = p.shifted_samples(0.0, &grid);
        assert!((w.energy() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ambiguity_origin_and_example_value() {
        let p = pulse(1.0);
        assert_eq!(p.ambiguity(0.0, 0.0), Complex64::new(1.0, 0.0));
        let p = pulse(1e-7);
        let tau = 3.0 * 1e-7f64.sqrt();
        let expected = (-(PI / 2.0) * 9.0).exp();
        assert!((p.ambiguity(tau, 0.0).norm() - expected).abs() < 1e-15);
        assert!((expected - 7.2495e-7).abs() < 1e-10);
    }

    #[test]
    fn ambiguity_matches_riemann_oracle_at_example_point() {
        let sigma = 1e-7;
        let p = pulse(sigma);
        let ts = sigma.sqrt() / 200.0;
        let tau = 50.0 * ts;
        let nu = 100.0;
        let grid = p.support_grid(0.0, ts).unwrap();
        let a = p.shifted_samples(0.0, &grid);
        let numeric = cross_ambiguity_numeric(&a, &a, tau, nu).unwrap();
        assert!((numeric - p.ambiguity(tau, nu)).norm() < 1e-6);
        // a 1e-5 s delay is off-grid: shift analytically
        let b = p.shifted_samples(1e-5, &grid);
        let numeric = cross_ambiguity_numeric(&a, &b, 0.0, nu).unwrap();
        assert!((numeric - p.ambiguity(1e-5, nu)).norm() < 1e-6);
    }

    #[test]
    fn cross_ambiguity_with_shifted_receiver() {
        let sigma = 1.0;
        let p = pulse(sigma);
        let ts = 0.01;
        let dt = 0.37;
        let grid = SamplingGrid::covering(-9.0, 9.0, ts).unwrap();
        let a = p.shifted_samples(0.0, &grid);
        let b = p.shifted_samples(dt, &grid);
        for &(tau, nu) in &[(0.0, 0.0), (0.5, 0.2), (-1.0, 0.7)] {
            let num = cross_ambiguity_numeric(&a, &b, tau, nu).unwrap();
            let closed = p.ambiguity(tau + dt, nu);
            assert!((num.norm() - closed.norm()).abs() < 1e-6, "{tau} {nu}");
        }
        assert!((cross_ambiguity_numeric(&a, &a, 0.0, 0.0).unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cross_ambiguity_rejects_mismatched_grids() {
        let p = pulse(1.0);
        let a = p.shifted_samples(0.0, &SamplingGrid::new(-8.0, 0.01, 1601).unwrap());
        let b = p.shifted_samples(0.0, &SamplingGrid::new(-8.0, 0.02, 801).unwrap());
        assert!(matches!(
            cross_ambiguity_numeric(&a, &b, 0.0, 0.0),
            Err(HmtError::Incompatible(_))
        ));
        assert!(cross_ambiguity_numeric(&a, &a, 0.005, 0.0).is_err());
    }

    #[test]
    fn shifted_samples_behave() {
        let p = pulse(1.0);
        let ts = 0.01;
        let grid = SamplingGrid::new(-8.0, ts, 1601).unwrap();
        assert_eq!(p.shifted_samples(0.0, &grid).samples[800].re, p.eval(0.0));
        let half = p.shifted_samples(ts / 2.0, &grid);
        let peak = half.samples.iter().map(|s| s.re).fold(0.0, f64::max);
        assert!(peak < p.eval(0.0));
        // symmetric about t = ts/2: samples 800 and 801 straddle the centre
        assert!((half.samples[800].re - half.samples[801].re).abs() < 1e-12);

        let dt = 1.234;
        let grid = p.support_grid(dt, ts).unwrap();
        let e = p.shifted_samples(dt, &grid).energy();
        assert!((e - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shifted_inner_product_reduces_to_ambiguity() {
        let p = pulse(0.3);
        let (tau, nu) = (0.21, -0.8);
        let ip = p.shifted_inner_product(TfShift::new(0.0, -nu), TfShift::new(tau, 0.0));
        assert!((ip - p.ambiguity(tau, nu)).norm() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ambiguity_bounded_and_separable(
                sigma in 1e-3f64..10.0,
                tau in -5.0f64..5.0,
                nu in -5.0f64..5.0,
            ) {
                let p = pulse(sigma);
                let a = p.ambiguity(tau, nu).norm();
                prop_assert!(a <= 1.0);
                if tau != 0.0 || nu != 0.0 {
                    prop_assert!(a < 1.0 || (tau * tau / sigma + sigma * nu * nu) < 1e-15);
                }
                let sep = p.ambiguity(tau, 0.0).norm() * p.ambiguity(0.0, nu).norm();
                prop_assert!((a - sep).abs() <= 1e-12 * sep.max(1e-300) + 1e-300);
                prop_assert!((a - p.ambiguity(-tau, -nu).norm()).abs() < 1e-15);
            }

            #[test]
            fn pulse_is_even(sigma in 1e-3f64..10.0, t in -3.0f64..3.0) {
                let p = pulse(sigma);
                prop_assert_eq!(p.eval(t), p.eval(-t));
            }
        }
    }
}
