//! Exponential-U scattering function, random WSSUS realizations as discrete
//! path sets, and the channel operator
//! `H[x](t) = Σ_p h_p · x(t - τ_p) · e^{j2πν_p t}`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{require_positive, HmtError, Result};
use crate::hexmod::{Atom, PulseTrain};
use crate::pulse::{SampledWaveform, SamplingGrid, TfShift};

/// Default `τ_max / τ_rms`.
pub const DEFAULT_TAU_MAX_RATIO: f64 = 10.0;

/// Smallest admissible `τ_max / τ_rms`.
pub const MIN_TAU_MAX_RATIO: f64 = 5.0;

/// Scattering function `S_H(τ,ν) = e^{-τ/τ_rms} / (π τ_rms f_d √(1-(ν/f_d)²))`
/// on `τ > 0, |ν| < f_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpUScattering {
    pub tau_rms: f64,
    /// Maximum Doppler frequency f_d (Hz).
    pub doppler_max: f64,
    /// Delay truncation, used for the spread factor and for path sampling.
    pub tau_max: f64,
}

impl ExpUScattering {
    pub fn new(tau_rms: f64, doppler_max: f64, tau_max: f64) -> Result<Self> {
        let tau_rms = require_positive("tau_rms", tau_rms)?;
        let doppler_max = require_positive("f_d", doppler_max)?;
        let tau_max = require_positive("tau_max", tau_max)?;
        if tau_max < MIN_TAU_MAX_RATIO * tau_rms * (1.0 - 1e-12) {
            return Err(HmtError::ParameterDomain {
                name: "tau_max",
                value: tau_max,
                reason: "must be at least 5 tau_rms",
            });
        }
        if tau_max * doppler_max >= 1.0 {
            return Err(HmtError::ParameterDomain {
                name: "vartheta",
                value: tau_max * doppler_max,
                reason: "overspread channels (tau_max f_d >= 1) are not supported",
            });
        }
        Ok(Self {
            tau_rms,
            doppler_max,
            tau_max,
        })
    }

    /// `τ_max = 10·τ_rms`.
    pub fn with_default_truncation(tau_rms: f64, doppler_max: f64) -> Result<Self> {
        Self::new(tau_rms, doppler_max, DEFAULT_TAU_MAX_RATIO * tau_rms)
    }

    /// Fixes `τ_rms` and `τ_max = ratio·τ_rms`, then picks `f_d` so that
    /// `τ_max·f_d = vartheta`.
    pub fn from_spread_factor(vartheta: f64, tau_rms: f64, tau_max_ratio: f64) -> Result<Self> {
        require_positive("vartheta", vartheta)?;
        let tau_max = tau_max_ratio * require_positive("tau_rms", tau_rms)?;
        Self::new(tau_rms, vartheta / tau_max, tau_max)
    }

    /// Channel whose `τ_rms / f_d` satisfies the matching rule
    /// `σ = α·τ_rms/f_d` for a given pulse width, at spread factor
    /// `vartheta` with `τ_max = ratio·τ_rms`.
    pub fn matched_to_pulse(
        vartheta: f64,
        sigma: f64,
        alpha: f64,
        tau_max_ratio: f64,
    ) -> Result<Self> {
        require_positive("vartheta", vartheta)?;
        require_positive("sigma", sigma)?;
        require_positive("alpha", alpha)?;
        let tau_rms = (vartheta * sigma / (tau_max_ratio * alpha)).sqrt();
        let f_d = alpha * tau_rms / sigma;
        Self::new(tau_rms, f_d, tau_max_ratio * tau_rms)
    }

    pub fn density(&self, tau: f64, nu: f64) -> Result<f64> {
        if tau < 0.0 {
            return Err(HmtError::ParameterDomain {
                name: "tau",
                value: tau,
                reason: "delay must be non-negative",
            });
        }
        let u = nu / self.doppler_max;
        if u.abs() >= 1.0 {
            return Err(HmtError::ParameterDomain {
                name: "nu",
                value: nu,
                reason: "Doppler must satisfy |nu| < f_d",
            });
        }
        Ok((-tau / self.tau_rms).exp()
            / (PI * self.tau_rms * self.doppler_max * (1.0 - u * u).sqrt()))
    }

    pub fn spread_factor(&self) -> SpreadFactor {
        SpreadFactor {
            vartheta: self.tau_max * self.doppler_max,
        }
    }
}

/// Channel spread factor `ϑ = τ_max·f_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadFactor {
    pub vartheta: f64,
}

impl SpreadFactor {
    pub fn is_underspread(&self) -> bool {
        self.vartheta < 1.0
    }
}

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub delay: f64,
    pub doppler: f64,
    pub gain: Complex64,
}

/// One WSSUS channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPaths {
    pub paths: Vec<Path>,
}

impl ChannelPaths {
    pub fn identity() -> Self {
        Self {
            paths: vec![Path {
                delay: 0.0,
                doppler: 0.0,
                gain: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn single(delay: f64, doppler: f64, gain: Complex64) -> Self {
        Self {
            paths: vec![Path {
                delay,
                doppler,
                gain,
            }],
        }
    }

    /// Draws `count` paths: exponential delays truncated at `τ_max`,
    /// Dopplers `f_d·cos θ` with uniform θ, and circularly symmetric
    /// Gaussian gains of variance `1/count`.
    pub fn draw<R: Rng + ?Sized>(s: &ExpUScattering, count: usize, rng: &mut R) -> Result<Self> {
        if count == 0 {
            return Err(HmtError::ParameterDomain {
                name: "path_count",
                value: 0.0,
                reason: "need at least one path",
            });
        }
        let delay = Exp::new(1.0 / s.tau_rms).expect("positive rate");
        let gain = Normal::new(0.0, (0.5 / count as f64).sqrt()).expect("finite std");
        let paths = (0..count)
            .map(|_| {
                let d = loop {
                    let d: f64 = delay.sample(rng);
                    if d <= s.tau_max {
                        break d;
                    }
                };
                let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                let re = gain.sample(rng);
                let im = gain.sample(rng);
                Path {
                    delay: d,
                    doppler: s.doppler_max * theta.cos(),
                    gain: Complex64::new(re, im),
                }
            })
            .collect();
        Ok(Self { paths })
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.delay).fold(0.0, f64::max)
    }

    pub fn min_delay(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| p.delay)
            .fold(f64::INFINITY, f64::min)
    }

    /// Channel output as an analytic pulse train. Each input atom
    /// `w·g(t - t₀)e^{j2πf₀t}` becomes, per path,
    /// `h·w·e^{-j2πf₀τ} · g(t - t₀ - τ)e^{j2π(f₀+ν)t}`.
    pub fn apply_to_train(&self, x: &PulseTrain) -> PulseTrain {
        let atoms = self
            .paths
            .iter()
            .flat_map(|p| {
                x.atoms.iter().map(move |a| Atom {
                    weight: p.gain
                        * a.weight
                        * Complex64::from_polar(1.0, -2.0 * PI * a.shift.freq * p.delay),
                    shift: TfShift::new(a.shift.time + p.delay, a.shift.freq + p.doppler),
                    point: a.point,
                })
            })
            .collect();
        PulseTrain {
            pulse: x.pulse,
            atoms,
        }
    }

    /// One path per line: `delay_s,doppler_hz,gain_re,gain_im`.
    pub fn to_records(&self) -> String {
        let mut out = String::from("# delay_s,doppler_hz,gain_re,gain_im\n");
        for p in &self.paths {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                p.delay, p.doppler, p.gain.re, p.gain.im
            )
            .unwrap();
        }
        out
    }

    pub fn from_records(text: &str) -> Result<Self> {
        let mut paths = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(HmtError::Parse(format!(
                    "line {}: expected 4 fields, found {}",
                    i + 1,
                    fields.len()
                )));
            }
            let mut v = [0.0; 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|e| HmtError::Parse(format!("line {}: `{f}`: {e}", i + 1)))?;
            }
            paths.push(Path {
                delay: v[0],
                doppler: v[1],
                gain: Complex64::new(v[2], v[3]),
            });
        }
        Ok(Self { paths })
    }
}

/// Samples `y(t_k) = Σ_p h_p·x(t_k - τ_p)·e^{j2πν_p t_k}`. The input is an
/// analytic pulse train, so fractional delays are exact.
pub fn apply_channel(
    paths: &ChannelPaths,
    x: &PulseTrain,
    grid: &SamplingGrid,
) -> Result<SampledWaveform> {
    let (lo, hi) = x.support();
    let (lo, hi) = (lo + paths.min_delay(), hi + paths.max_delay());
    if !grid.covers(lo, hi) {
        return Err(HmtError::Coverage {
            what: "delayed pulse supports",
            detail: format!(
                "need [{lo:.6e}, {hi:.6e}], have [{:.6e}, {:.6e}]",
                grid.start,
                grid.end()
            ),
        });
    }
    Ok(paths.apply_to_train(x).sample(grid))
}
