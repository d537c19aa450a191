//! Closed-form SINR of the shifted-Gaussian projection receiver over an
//! exponential-U channel, its numeric maximization over the receiver delay
//! and the closed-form Max-SINR delay.
//!
//! With receiver pulse `ψ(t) = g(t - Δt)` every energy term factors into a
//! delay integral and a Doppler integral:
//!
//! ```text
//! D(c) = ∫₀^∞ e^{-τ/τ_rms} e^{-(π/σ)(τ - c)²} dτ
//! V(c) = ∫_{-f_d}^{f_d} e^{-σπ(c + ν)²} / √(1 - (ν/f_d)²) dν
//! ```
//!
//! Signal energy is `σ_c²/(π τ_rms f_d)·D(Δt)·V(0)`; interference sums the
//! same product over the lattice neighbours.

use std::f64::consts::PI;

use crate::channel::ExpUScattering;
use crate::error::{require_positive, HmtError, Result};
use crate::hexmod::LatticeParams;
use crate::numerics::{erfc, erfcx, grid_then_golden_max, to_db, GaussLegendre};
use crate::pulse::SUPPORT_HALF_WIDTH;

/// Default Gauss–Legendre order for the Doppler integral.
pub const DEFAULT_DOPPLER_ORDER: usize = 64;
/// Coarse grid size of the upper-bound search.
pub const UPPER_BOUND_GRID: usize = 64;
/// Dense grid size used when the coarse grid is not unimodal.
pub const UPPER_BOUND_DENSE_GRID: usize = 512;
/// Tolerance on the maximizing delay, in units of `σ^{1/2}`.
pub const UPPER_BOUND_XTOL: f64 = 1e-4;

/// How the projected noise power is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// `σ_w²·|A_{g,ψ}(0,0)| = σ_w²·exp(-πΔt²/(2σ))`, as printed in the
    /// original interference-plus-noise expression.
    Paper,
    /// `σ_w²·‖ψ‖² = σ_w²`, the power of white noise projected on a
    /// unit-energy pulse.
    Physical,
}

impl NoiseMode {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseMode::Paper => "paper",
            NoiseMode::Physical => "physical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(NoiseMode::Paper),
            "physical" => Some(NoiseMode::Physical),
            _ => None,
        }
    }

    /// Projected noise power for receiver delay `dt`.
    pub fn noise_power(&self, noise_var: f64, sigma: f64, dt: f64) -> f64 {
        match self {
            NoiseMode::Paper => noise_var * (-PI * dt * dt / (2.0 * sigma)).exp(),
            NoiseMode::Physical => noise_var,
        }
    }
}

/// Coefficients of the quadratic whose root gives the closed-form delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraticConstants {
    /// `(1.64² - 0.76) z² - 3.28 K z + (K² - 4) = 0`, reduced symbolically
    /// from the stationarity condition with the erfc approximation.
    Derived,
    /// The published closed form with constants 1.76 and 3.52.
    Printed,
}

impl QuadraticConstants {
    pub fn name(&self) -> &'static str {
        match self {
            QuadraticConstants::Derived => "derived",
            QuadraticConstants::Printed => "printed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "derived" => Some(QuadraticConstants::Derived),
            "printed" => Some(QuadraticConstants::Printed),
            _ => None,
        }
    }
}

/// Interference neighbourhood `|m| ≤ m, |n| ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub m: usize,
    pub n: usize,
}

impl Default for Window {
    fn default() -> Self {
        Self { m: 4, n: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub window: Window,
    pub noise_mode: NoiseMode,
    /// Drop the offset-coset point at `(T/2, F/2)` from the interference
    /// sum, as the printed summation does.
    pub exclude_coset2_origin: bool,
    pub doppler_order: usize,
    pub constants: QuadraticConstants,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window: Window::default(),
            noise_mode: NoiseMode::Paper,
            exclude_coset2_origin: false,
            doppler_order: DEFAULT_DOPPLER_ORDER,
            constants: QuadraticConstants::Derived,
        }
    }
}

/// Everything needed to evaluate the SINR at one receiver delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub params: LatticeParams,
    pub scattering: ExpUScattering,
    /// Symbol power σ_c².
    pub symbol_power: f64,
    /// Noise variance σ_w².
    pub noise_power: f64,
    /// Receiver pulse delay Δt.
    pub dt: f64,
}

impl OperatingPoint {
    pub fn new(
        params: LatticeParams,
        scattering: ExpUScattering,
        symbol_power: f64,
        noise_power: f64,
        dt: f64,
    ) -> Result<Self> {
        require_positive("symbol_power", symbol_power)?;
        if !(noise_power >= 0.0 && noise_power.is_finite()) {
            return Err(HmtError::ParameterDomain {
                name: "noise_power",
                value: noise_power,
                reason: "must be non-negative and finite",
            });
        }
        if !dt.is_finite() {
            return Err(HmtError::ParameterDomain {
                name: "dt",
                value: dt,
                reason: "must be finite",
            });
        }
        Ok(Self {
            params,
            scattering,
            symbol_power,
            noise_power,
            dt,
        })
    }

    /// Same point with the noise variance set from `σ_c²/σ_w²` in dB.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.noise_power = self.symbol_power / crate::numerics::from_db(snr_db);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
    pub sinr_linear: f64,
    pub sinr_db: f64,
}

impl EnergyBreakdown {
    pub fn new(signal: f64, interference: f64, noise: f64) -> Self {
        let sinr_linear = signal / (interference + noise);
        Self {
            signal,
            interference,
            noise,
            sinr_linear,
            sinr_db: to_db(sinr_linear),
        }
    }
}

/// `∫₀^∞ e^{-τ/τ_rms} e^{-(π/σ)(τ - center)²} dτ` in closed form,
/// `exp(σ/(4πτ_rms²) - c/τ_rms)·(√σ/2)·erfc(√(π/σ)(σ/(2πτ_rms) - c))`,
/// evaluated through the scaled erfc when the argument is positive.
pub fn delay_integral(sigma: f64, tau_rms: f64, center: f64) -> f64 {
    let x = (PI / sigma).sqrt() * (sigma / (2.0 * PI * tau_rms) - center);
    let half_root = 0.5 * sigma.sqrt();
    if x >= 0.0 {
        (-PI * center * center / sigma).exp() * half_root * erfcx(x)
    } else {
        (sigma / (4.0 * PI * tau_rms * tau_rms) - center / tau_rms).exp() * half_root * erfc(x)
    }
}

/// `∫_{-f_d}^{f_d} e^{-σπ(c + ν)²}/√(1-(ν/f_d)²) dν`, computed in
/// `ν = f_d sin θ` where the integrand is smooth.
pub fn doppler_integral(sigma: f64, f_d: f64, center: f64, rule: &GaussLegendre) -> f64 {
    f_d * rule.integrate(-PI / 2.0, PI / 2.0, |theta| {
        let nu = center + f_d * theta.sin();
        (-sigma * PI * nu * nu).exp()
    })
}

/// The factors `a(Δt) = exp(σ/(4πτ_rms²) - Δt/τ_rms)` and
/// `b(Δt) = (√σ/2)·erfc(√(π/σ)(σ/(2πτ_rms) - Δt))` whose product is
/// `delay_integral(σ, τ_rms, Δt)`.
pub fn ab_decomposition(sigma: f64, tau_rms: f64, dt: f64) -> (f64, f64) {
    let a = (sigma / (4.0 * PI * tau_rms * tau_rms) - dt / tau_rms).exp();
    let b = 0.5 * sigma.sqrt() * erfc((PI / sigma).sqrt() * (sigma / (2.0 * PI * tau_rms) - dt));
    (a, b)
}

/// Derivative of `a(Δt)·b(Δt)` using `a' = -a/τ_rms` and
/// `b' = exp(-(π/σ)(σ/(2πτ_rms) - Δt)²)`.
pub fn ab_derivative(sigma: f64, tau_rms: f64, dt: f64) -> f64 {
    let (a, b) = ab_decomposition(sigma, tau_rms, dt);
    let u = sigma / (2.0 * PI * tau_rms) - dt;
    -a * b / tau_rms + a * (-PI * u * u / sigma).exp()
}

/// Approximation `erfc(x/√2) ≈ 2e^{-x²/2} / (1.64x + √(0.76x² + 4))`, `x > 0`.
pub fn erfc_approx(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(HmtError::ParameterDomain {
            name: "x",
            value: x,
            reason: "approximation holds for x > 0 only",
        });
    }
    Ok(2.0 * (-x * x / 2.0).exp() / (1.64 * x + (0.76 * x * x + 4.0).sqrt()))
}

/// Receiver delay from the closed form, or from the numeric fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormDelay {
    pub dt: f64,
    /// Set when the quadratic had no admissible root and the delay came
    /// from the numeric maximization of `a·b`.
    pub fallback: bool,
}

/// Numeric maximizer of `a(Δt)·b(Δt)` over `[0, σ/(πτ_rms)]`.
pub fn noise_limited_argmax(sigma: f64, tau_rms: f64) -> f64 {
    let hi = (sigma / (PI * tau_rms)).min(SUPPORT_HALF_WIDTH * sigma.sqrt());
    grid_then_golden_max(
        |dt| delay_integral(sigma, tau_rms, dt),
        0.0,
        hi,
        UPPER_BOUND_GRID,
        UPPER_BOUND_DENSE_GRID,
        1e-9 * sigma.sqrt(),
    )
    .argmax
}

/// Max-SINR receiver delay.
///
/// With `K = √σ/τ_rms` and `z = √(2π/σ)(σ/(2πτ_rms) - Δt)`, the
/// stationarity condition of `a·b` under the erfc approximation becomes
/// `K = 1.64 z + √(0.76 z² + 4)`. Its admissible root is the smaller one,
/// which is positive iff `K > 2`.
pub fn closed_form_dt(sigma: f64, tau_rms: f64, constants: QuadraticConstants) -> ClosedFormDelay {
    let k = sigma.sqrt() / tau_rms;
    let z = match constants {
        QuadraticConstants::Derived => {
            let qa = 1.64 * 1.64 - 0.76;
            let disc = 3.28 * 3.28 * k * k - 4.0 * qa * (k * k - 4.0);
            (disc >= 0.0).then(|| (3.28 * k - disc.sqrt()) / (2.0 * qa))
        }
        QuadraticConstants::Printed => {
            let disc = 3.28 * 3.28 * k * k - 3.52 * (k * k - 4.0);
            (disc >= 0.0).then(|| (3.28 * k - disc.sqrt()) / 1.76)
        }
    };
    let dt = z
        .filter(|&z| z > 0.0)
        .map(|z| sigma / (2.0 * PI * tau_rms) - (sigma / (2.0 * PI)).sqrt() * z)
        .filter(|&dt| dt > 0.0);
    match dt {
        Some(dt) => ClosedFormDelay {
            dt,
            fallback: false,
        },
        None => ClosedFormDelay {
            dt: noise_limited_argmax(sigma, tau_rms),
            fallback: true,
        },
    }
}

/// SINR evaluator for a fixed lattice, channel and option set. The
/// Doppler integrals do not depend on `Δt` and are computed once.
#[derive(Debug, Clone)]
pub struct SinrModel {
    params: LatticeParams,
    scattering: ExpUScattering,
    options: AnalysisOptions,
    /// V(nF) for n = -N..=N
    doppler_rect: Vec<f64>,
    /// V(nF + F/2) for n = -N..=N
    doppler_offset: Vec<f64>,
}

impl SinrModel {
    pub fn new(
        params: LatticeParams,
        scattering: ExpUScattering,
        options: AnalysisOptions,
    ) -> Self {
        let rule = GaussLegendre::new(options.doppler_order);
        let nw = options.window.n as i64;
        let f = params.subcarrier_spacing;
        let v = |c: f64| doppler_integral(params.sigma, scattering.doppler_max, c, &rule);
        let doppler_rect = (-nw..=nw).map(|n| v(n as f64 * f)).collect();
        let doppler_offset = (-nw..=nw).map(|n| v(n as f64 * f + 0.5 * f)).collect();
        Self {
            params,
            scattering,
            options,
            doppler_rect,
            doppler_offset,
        }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn scattering(&self) -> &ExpUScattering {
        &self.scattering
    }

    pub fn options(&self) -> &AnalysisOptions {
        &self.options
    }

    fn norm(&self, symbol_power: f64) -> f64 {
        symbol_power / (PI * self.scattering.tau_rms * self.scattering.doppler_max)
    }

    pub fn signal_energy(&self, symbol_power: f64, dt: f64) -> f64 {
        let nw = self.options.window.n;
        self.norm(symbol_power)
            * delay_integral(self.params.sigma, self.scattering.tau_rms, dt)
            * self.doppler_rect[nw]
    }

    /// Interference energy (without noise) from the `(2M+1)×(2N+1)`
    /// neighbourhood of both cosets.
    pub fn interference_energy(&self, symbol_power: f64, dt: f64) -> f64 {
        let (sigma, tau) = (self.params.sigma, self.scattering.tau_rms);
        let t = self.params.symbol_period;
        let mw = self.options.window.m as i64;
        let nw = self.options.window.n as i64;
        let mut sum = 0.0;
        for m in -mw..=mw {
            let d_rect = delay_integral(sigma, tau, dt - m as f64 * t);
            let d_off = delay_integral(sigma, tau, dt - m as f64 * t - 0.5 * t);
            for n in -nw..=nw {
                let idx = (n + nw) as usize;
                if (m, n) != (0, 0) {
                    sum += d_rect * self.doppler_rect[idx];
                }
                if !(self.options.exclude_coset2_origin && (m, n) == (0, 0)) {
                    sum += d_off * self.doppler_offset[idx];
                }
            }
        }
        self.norm(symbol_power) * sum
    }

    pub fn noise_energy(&self, noise_power: f64, dt: f64) -> f64 {
        self.options
            .noise_mode
            .noise_power(noise_power, self.params.sigma, dt)
    }

    pub fn breakdown(&self, symbol_power: f64, noise_power: f64, dt: f64) -> EnergyBreakdown {
        EnergyBreakdown::new(
            self.signal_energy(symbol_power, dt),
            self.interference_energy(symbol_power, dt),
            self.noise_energy(noise_power, dt),
        )
    }

    pub fn sinr_db(&self, symbol_power: f64, noise_power: f64, dt: f64) -> f64 {
        self.breakdown(symbol_power, noise_power, dt).sinr_db
    }

    /// Closed-form Max-SINR delay for the model's channel, optionally with
    /// a mis-estimated RMS delay spread.
    pub fn max_sinr_dt(&self, tau_rms_estimate: f64) -> ClosedFormDelay {
        closed_form_dt(self.params.sigma, tau_rms_estimate, self.options.constants)
    }

    /// Right end of the delay search: `σ/(πτ_rms)`, capped at the pulse
    /// support half-width.
    pub fn search_limit(&self) -> f64 {
        let sigma = self.params.sigma;
        (sigma / (PI * self.scattering.tau_rms)).min(SUPPORT_HALF_WIDTH * sigma.sqrt())
    }

    /// Maximizes the SINR over `Δt ∈ [0, σ/(πτ_rms)]`.
    pub fn upper_bound(&self, symbol_power: f64, noise_power: f64) -> UpperBound {
        let sigma = self.params.sigma;
        let hi = self.search_limit();
        let r = grid_then_golden_max(
            |dt| self.breakdown(symbol_power, noise_power, dt).sinr_linear,
            0.0,
            hi,
            UPPER_BOUND_GRID,
            UPPER_BOUND_DENSE_GRID,
            UPPER_BOUND_XTOL * sigma.sqrt(),
        );
        UpperBound {
            dt: r.argmax,
            sinr_db: to_db(r.value),
            multimodal: r.multimodal,
        }
    }

    /// Dense-grid argmax used to validate [`SinrModel::upper_bound`].
    pub fn dense_upper_bound(
        &self,
        symbol_power: f64,
        noise_power: f64,
        points: usize,
    ) -> UpperBound {
        let hi = self.search_limit();
        let step = hi / (points - 1) as f64;
        let (dt, v) = (0..points)
            .map(|i| {
                let dt = step * i as f64;
                (
                    dt,
                    self.breakdown(symbol_power, noise_power, dt).sinr_linear,
                )
            })
            .fold(
                (0.0, f64::NEG_INFINITY),
                |b, c| if c.1 > b.1 { c } else { b },
            );
        UpperBound {
            dt,
            sinr_db: to_db(v),
            multimodal: false,
        }
    }
}

/// Best achievable SINR over the receiver delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub dt: f64,
    pub sinr_db: f64,
    /// The coarse scan found several local maxima; the value comes from
    /// the dense grid.
    pub multimodal: bool,
}

pub fn signal_energy(op: &OperatingPoint, options: &AnalysisOptions) -> f64 {
    SinrModel::new(op.params, op.scattering, *options).signal_energy(op.symbol_power, op.dt)
}

/// Interference plus noise energy at `op`.
pub fn interference_noise_energy(op: &OperatingPoint, options: &AnalysisOptions) -> f64 {
    let b = SinrModel::new(op.params, op.scattering, *options).breakdown(
        op.symbol_power,
        op.noise_power,
        op.dt,
    );
    b.interference + b.noise
}

pub fn theoretical_sinr(op: &OperatingPoint, options: &AnalysisOptions) -> EnergyBreakdown {
    SinrModel::new(op.params, op.scattering, *options).breakdown(
        op.symbol_power,
        op.noise_power,
        op.dt,
    )
}

/// SINR upper bound over `Δt` for the operating point (its `dt` is ignored).
pub fn sinr_upper_bound(op: &OperatingPoint, options: &AnalysisOptions) -> UpperBound {
    SinrModel::new(op.params, op.scattering, *options).upper_bound(op.symbol_power, op.noise_power)
}
