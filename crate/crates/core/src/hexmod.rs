//! Hexagonal lattice geometry, channel-matched parameter selection, the
//! multicarrier modulator and the projection demodulator.
//!
//! The hexagonal lattice is the union of a rectangular lattice
//! `{(mT, nF)}` and its coset shifted by `(T/2, F/2)`. Each lattice point
//! carries one symbol, so the symbol density is `ρ = 2/(T·F)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{require_positive, HmtError, Result};
use crate::pulse::{GaussianPulse, SampledWaveform, SamplingGrid, TfShift};

/// Signalling efficiencies tabulated for the matching coefficient α.
pub const ALPHA_TABLE: [(f64, f64); 4] = [(0.5, 2.25), (1.0, 2.00), (2.0, 1.90), (4.0, 1.85)];

/// Matching coefficient α for signalling efficiency `rho`.
///
/// Table values are returned exactly; other efficiencies are linearly
/// interpolated in `log2(ρ)` and clamped at the table ends.
pub fn alpha_for_rho(rho: f64) -> Result<f64> {
    let rho = require_positive("rho", rho)?;
    let x = rho.log2();
    let pts: Vec<(f64, f64)> = ALPHA_TABLE.iter().map(|&(r, a)| (r.log2(), a)).collect();
    if x <= pts[0].0 {
        return Ok(pts[0].1);
    }
    if x >= pts[pts.len() - 1].0 {
        return Ok(pts[pts.len() - 1].1);
    }
    for w in pts.windows(2) {
        let ((x0, a0), (x1, a1)) = (w[0], w[1]);
        if x <= x1 {
            if x == x1 {
                return Ok(a1);
            }
            return Ok(a0 + (a1 - a0) * (x - x0) / (x1 - x0));
        }
    }
    unreachable!("rho inside table range")
}

/// Which aspect ratio the lattice takes relative to the pulse width.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchRule {
    /// `σ = √3·T/F`
    Stretched,
    /// `σ = T/(√3·F)`
    Compressed,
}

/// Lattice and pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// Symbol period T (s).
    pub symbol_period: f64,
    /// Subcarrier separation F (Hz).
    pub subcarrier_spacing: f64,
    /// Gaussian width σ (s²).
    pub sigma: f64,
    /// Symbol density 2/(T·F).
    pub rho: f64,
}

impl LatticeParams {
    pub fn new(symbol_period: f64, subcarrier_spacing: f64, sigma: f64) -> Result<Self> {
        let t = require_positive("symbol_period", symbol_period)?;
        let f = require_positive("subcarrier_spacing", subcarrier_spacing)?;
        let sigma = require_positive("sigma", sigma)?;
        Ok(Self {
            symbol_period: t,
            subcarrier_spacing: f,
            sigma,
            rho: 2.0 / (t * f),
        })
    }

    /// Chooses `(σ, T, F)` matched to an exponential-U channel.
    ///
    /// `σ = α·τ_rms/f_d`, the rule fixes `T/F`, and `ρ = 2/(T·F)` fixes the
    /// scale.
    pub fn match_parameters(tau_rms: f64, f_d: f64, rho: f64, rule: MatchRule) -> Result<Self> {
        let tau_rms = require_positive("tau_rms", tau_rms)?;
        let f_d = require_positive("f_d", f_d)?;
        let alpha = alpha_for_rho(rho)?;
        let sigma = alpha * tau_rms / f_d;
        let sqrt3 = 3f64.sqrt();
        let ratio = match rule {
            MatchRule::Stretched => sigma / sqrt3,
            MatchRule::Compressed => sigma * sqrt3,
        };
        // T/F = ratio and T·F = 2/ρ
        let product = 2.0 / rho;
        let t = (ratio * product).sqrt();
        let f = t / ratio;
        Ok(Self {
            symbol_period: t,
            subcarrier_spacing: f,
            sigma,
            rho,
        })
    }

    pub fn pulse(&self) -> GaussianPulse {
        GaussianPulse::new(self.sigma).expect("sigma validated at construction")
    }

    /// Time-frequency position of a lattice point.
    pub fn position(&self, point: LatticePoint) -> TfShift {
        let (dt, df) = match point.coset {
            Coset::Rect => (0.0, 0.0),
            Coset::Offset => (0.5 * self.symbol_period, 0.5 * self.subcarrier_spacing),
        };
        TfShift::new(
            point.m as f64 * self.symbol_period + dt,
            point.n as f64 * self.subcarrier_spacing + df,
        )
    }
}

/// The two rectangular sublattices of the hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coset {
    /// Points `(mT, nF)`.
    Rect,
    /// Points `(mT + T/2, nF + F/2)`.
    Offset,
}

impl Coset {
    pub const BOTH: [Coset; 2] = [Coset::Rect, Coset::Offset];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub m: i64,
    pub n: i64,
    pub coset: Coset,
}

impl LatticePoint {
    pub fn new(m: i64, n: i64, coset: Coset) -> Self {
        Self { m, n, coset }
    }

    pub fn time_offset(&self, params: &LatticeParams) -> f64 {
        params.position(*self).time
    }

    pub fn freq_offset(&self, params: &LatticeParams) -> f64 {
        params.position(*self).freq
    }
}

/// Data symbols on both cosets of an `M × N` block of the lattice.
///
/// Entry `(i, j)` of either coset sits at lattice index
/// `(origin.0 + i, origin.1 + j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    m_count: usize,
    n_count: usize,
    origin: (i64, i64),
    rect: Vec<Complex64>,
    offset: Vec<Complex64>,
    symbol_power: f64,
}

impl SymbolFrame {
    pub fn zeros(m_count: usize, n_count: usize, symbol_power: f64) -> Result<Self> {
        require_positive("symbol_power", symbol_power)?;
        if m_count == 0 || n_count == 0 {
            return Err(HmtError::ParameterDomain {
                name: "frame size",
                value: 0.0,
                reason: "frame dimensions must be non-zero",
            });
        }
        let len = m_count * n_count;
        Ok(Self {
            m_count,
            n_count,
            origin: (0, 0),
            rect: vec![Complex64::new(0.0, 0.0); len],
            offset: vec![Complex64::new(0.0, 0.0); len],
            symbol_power,
        })
    }

    /// I.i.d. QPSK symbols with average power `symbol_power`.
    pub fn random_qpsk<R: Rng + ?Sized>(
        m_count: usize,
        n_count: usize,
        symbol_power: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut frame = Self::zeros(m_count, n_count, symbol_power)?;
        let amp = (symbol_power / 2.0).sqrt();
        let draw = |rng: &mut R| {
            let re = if rng.random::<bool>() { amp } else { -amp };
            let im = if rng.random::<bool>() { amp } else { -amp };
            Complex64::new(re, im)
        };
        for v in frame.rect.iter_mut() {
            *v = draw(rng);
        }
        for v in frame.offset.iter_mut() {
            *v = draw(rng);
        }
        Ok(frame)
    }

    /// Moves the frame so that entry `((M-1)/2, (N-1)/2)` sits at lattice
    /// index `(0, 0)`.
    pub fn centered(mut self) -> Self {
        self.origin = (
            -((self.m_count as i64 - 1) / 2),
            -((self.n_count as i64 - 1) / 2),
        );
        self
    }

    pub fn with_origin(mut self, origin: (i64, i64)) -> Self {
        self.origin = origin;
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m_count, self.n_count)
    }

    pub fn symbol_power(&self) -> f64 {
        self.symbol_power
    }

    fn index(&self, point: LatticePoint) -> Option<usize> {
        let i = point.m - self.origin.0;
        let j = point.n - self.origin.1;
        if i < 0 || j < 0 || i >= self.m_count as i64 || j >= self.n_count as i64 {
            return None;
        }
        Some(i as usize * self.n_count + j as usize)
    }

    pub fn get(&self, point: LatticePoint) -> Option<Complex64> {
        let idx = self.index(point)?;
        Some(match point.coset {
            Coset::Rect => self.rect[idx],
            Coset::Offset => self.offset[idx],
        })
    }

    pub fn set(&mut self, point: LatticePoint, value: Complex64) -> Result<()> {
        let idx = self.index(point).ok_or_else(|| {
            HmtError::Incompatible(format!("lattice point {point:?} outside frame"))
        })?;
        match point.coset {
            Coset::Rect => self.rect[idx] = value,
            Coset::Offset => self.offset[idx] = value,
        }
        Ok(())
    }

    /// All lattice points of the frame, coset by coset in row-major order.
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(2 * self.rect.len());
        for coset in Coset::BOTH {
            for i in 0..self.m_count as i64 {
                for j in 0..self.n_count as i64 {
                    out.push(LatticePoint::new(
                        self.origin.0 + i,
                        self.origin.1 + j,
                        coset,
                    ));
                }
            }
        }
        out
    }

    pub fn symbols(&self) -> impl Iterator<Item = (LatticePoint, Complex64)> + '_ {
        self.points()
            .into_iter()
            .map(move |p| (p, self.get(p).unwrap()))
    }

    /// Analytic description of the transmitted signal.
    pub fn pulse_train(&self, params: &LatticeParams) -> PulseTrain {
        let atoms = self
            .symbols()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(p, c)| Atom {
                weight: c,
                shift: params.position(p),
                point: Some(p),
            })
            .collect();
        PulseTrain {
            pulse: params.pulse(),
            atoms,
        }
    }
}

/// One weighted, time-frequency shifted pulse `w·g(t - t₀)e^{j2πf₀t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub weight: Complex64,
    pub shift: TfShift,
    pub point: Option<LatticePoint>,
}

/// A signal expressed as a finite sum of shifted Gaussian pulses. Delayed
/// copies can be evaluated exactly for any real delay.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub pulse: GaussianPulse,
    pub atoms: Vec<Atom>,
}

impl PulseTrain {
    pub fn single(pulse: GaussianPulse, weight: Complex64, shift: TfShift) -> Self {
        Self {
            pulse,
            atoms: vec![Atom {
                weight,
                shift,
                point: None,
            }],
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| a.weight * self.pulse.eval_shifted(t, a.shift))
            .sum()
    }

    /// Earliest and latest instants where any atom has support.
    pub fn support(&self) -> (f64, f64) {
        let hw = self.pulse.support_half_width();
        let lo = self
            .atoms
            .iter()
            .map(|a| a.shift.time)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .atoms
            .iter()
            .map(|a| a.shift.time)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo - hw, hi + hw)
    }

    /// Samples the train on `grid`; samples are independent, so the
    /// parallel evaluation is bit-identical to the serial one.
    pub fn sample(&self, grid: &SamplingGrid) -> SampledWaveform {
        let samples = (0..grid.len)
            .into_par_iter()
            .map(|k| self.eval(grid.time(k)))
            .collect();
        SampledWaveform {
            samples,
            sample_interval: grid.interval,
            start_time: grid.start,
        }
    }
}

/// Evaluates `x(t) = Σ_i Σ_{m,n} c^i_{m,n} g(t - t_{m,n}^i) e^{j2π f_{m,n}^i t}`
/// on `grid`.
pub fn modulate(
    frame: &SymbolFrame,
    params: &LatticeParams,
    grid: &SamplingGrid,
) -> Result<SampledWaveform> {
    let hw = params.pulse().support_half_width();
    let truncated: Vec<LatticePoint> = frame
        .points()
        .into_iter()
        .filter(|&p| {
            let t = p.time_offset(params);
            !grid.covers(t - hw, t + hw)
        })
        .collect();
    if !truncated.is_empty() {
        return Err(HmtError::Coverage {
            what: "lattice pulse supports",
            detail: format!("truncated points: {truncated:?}"),
        });
    }
    Ok(frame.pulse_train(params).sample(grid))
}

/// Receiver prototype `ψ(t) = g(t - dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverPulse {
    pub pulse: GaussianPulse,
    pub dt: f64,
}

impl ReceiverPulse {
    pub fn new(pulse: GaussianPulse, dt: f64) -> Self {
        Self { pulse, dt }
    }
}

/// Projection `⟨r, ψ^i_{m,n}⟩ = Σ_k r[k]·ψ*(t_k - t_off)·e^{-j2π f_off t_k}·T_s`.
pub fn demodulate(
    r: &SampledWaveform,
    point: LatticePoint,
    params: &LatticeParams,
    receiver: &ReceiverPulse,
) -> Result<Complex64> {
    let pos = params.position(point);
    let center = pos.time + receiver.dt;
    let hw = receiver.pulse.support_half_width();
    if !r.grid().covers(center - hw, center + hw) {
        return Err(HmtError::Coverage {
            what: "receiver projection support",
            detail: format!(
                "need [{:.6e}, {:.6e}], have [{:.6e}, {:.6e}]",
                center - hw,
                center + hw,
                r.start_time,
                r.grid().end()
            ),
        });
    }
    let acc: Complex64 = r
        .samples
        .iter()
        .enumerate()
        .map(|(k, &rk)| {
            let t = r.time(k);
            let psi = receiver.pulse.eval(t - center);
            rk * Complex64::from_polar(psi, -2.0 * PI * pos.freq * t)
        })
        .sum();
    Ok(acc * r.sample_interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sec4_params() -> LatticeParams {
        let t = 1e-4;
        let f = 25e3;
        LatticeParams::new(t, f, t / (3f64.sqrt() * f)).unwrap()
    }

    #[test]
    fn alpha_table_values() {
        assert_eq!(alpha_for_rho(1.0).unwrap(), 2.00);
        assert_eq!(alpha_for_rho(0.5).unwrap(), 2.25);
        assert_eq!(alpha_for_rho(2.0).unwrap(), 1.90);
        assert_eq!(alpha_for_rho(4.0).unwrap(), 1.85);
        assert_eq!(alpha_for_rho(0.1).unwrap(), 2.25);
        assert_eq!(alpha_for_rho(16.0).unwrap(), 1.85);
        let mid = alpha_for_rho(2f64.sqrt()).unwrap();
        assert!((mid - 1.95).abs() < 1e-12);
        assert!(alpha_for_rho(0.0).is_err());
    }

    #[test]
    fn matched_parameters_satisfy_both_constraints() {
        let p = LatticeParams::match_parameters(5e-6, 100.0, 1.0, MatchRule::Compressed).unwrap();
        assert!((p.sigma - 1e-7).abs() < 1e-20);
        let tf = p.symbol_period * p.subcarrier_spacing;
        assert!((tf - 2.0).abs() < 1e-12 * 2.0);
        let c = p.sigma * 3f64.sqrt() * p.subcarrier_spacing / p.symbol_period;
        assert!((c - 1.0).abs() < 1e-12);

        let p = LatticeParams::match_parameters(5e-6, 100.0, 2.0, MatchRule::Stretched).unwrap();
        let c = p.sigma * p.subcarrier_spacing / (3f64.sqrt() * p.symbol_period);
        assert!((c - 1.0).abs() < 1e-12);
        assert!((p.symbol_period * p.subcarrier_spacing - 1.0).abs() < 1e-12);
        assert!(LatticeParams::match_parameters(-1.0, 100.0, 1.0, MatchRule::Stretched).is_err());
        assert!(LatticeParams::match_parameters(1e-6, 0.0, 1.0, MatchRule::Stretched).is_err());
    }

    #[test]
    fn lattice_point_offsets() {
        let p = sec4_params();
        let z = LatticePoint::new(2, -3, Coset::Offset);
        assert!((z.time_offset(&p) - 2.5e-4).abs() < 1e-18);
        assert!((z.freq_offset(&p) - (-2.5 * 25e3)).abs() < 1e-9);
        let z = LatticePoint::new(2, -3, Coset::Rect);
        assert!((z.time_offset(&p) - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn qpsk_frame_has_requested_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frame = SymbolFrame::random_qpsk(100, 100, 2.5, &mut rng).unwrap();
        let n = 2.0 * 100.0 * 100.0;
        let power: f64 = frame.symbols().map(|(_, c)| c.norm_sqr()).sum::<f64>() / n;
        assert!((power - 2.5).abs() < 0.05 * 2.5);
        let mean: Complex64 = frame.symbols().map(|(_, c)| c).sum::<Complex64>() / n;
        assert!(mean.norm() < 0.05);
    }

    fn grid_for(p: &LatticeParams, frame: &SymbolFrame, ts: f64) -> SamplingGrid {
        let train = frame.pulse_train(p);
        let (lo, hi) = train.support();
        SamplingGrid::covering(lo - 2e-5, hi + 2e-5, ts).unwrap()
    }

    #[test]
    fn single_symbol_modulation() {
        let p = sec4_params();
        let pulse = p.pulse();
        let mut frame = SymbolFrame::zeros(1, 1, 1.0).unwrap();
        frame
            .set(
                LatticePoint::new(0, 0, Coset::Rect),
                Complex64::new(1.0, 0.0),
            )
            .unwrap();
        let grid = SamplingGrid::covering(-5e-4, 5e-4, 1e-6).unwrap();
        let x = modulate(&frame, &p, &grid).unwrap();
        for (k, s) in x.samples.iter().enumerate() {
            assert!((s - Complex64::new(pulse.eval(grid.time(k)), 0.0)).norm() < 1e-12);
        }

        let mut frame = SymbolFrame::zeros(1, 1, 1.0).unwrap();
        frame
            .set(
                LatticePoint::new(0, 0, Coset::Offset),
                Complex64::new(1.0, 0.0),
            )
            .unwrap();
        let grid = SamplingGrid::covering(-4e-4, 5e-4, 1e-6).unwrap();
        let x = modulate(&frame, &p, &grid).unwrap();
        for (k, s) in x.samples.iter().enumerate() {
            let t = grid.time(k);
            let expect =
                Complex64::from_polar(pulse.eval(t - 0.5e-4), PI * p.subcarrier_spacing * t);
            assert!((s - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn modulate_reports_truncated_points() {
        let p = sec4_params();
        let frame = SymbolFrame::zeros(3, 3, 1.0).unwrap();
        let grid = SamplingGrid::covering(-1e-4, 1e-4, 1e-6).unwrap();
        match modulate(&frame, &p, &grid) {
            Err(HmtError::Coverage { detail, .. }) => assert!(detail.contains("LatticePoint")),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn matched_filter_recovers_single_symbol() {
        let p = sec4_params();
        let pulse = p.pulse();
        let mut frame = SymbolFrame::zeros(1, 1, 1.0).unwrap();
        let z = LatticePoint::new(0, 0, Coset::Rect);
        frame.set(z, Complex64::new(1.0, 0.0)).unwrap();
        let grid = SamplingGrid::covering(-5e-4, 5e-4, 1e-6).unwrap();
        let r = modulate(&frame, &p, &grid).unwrap();
        let c = demodulate(&r, z, &p, &ReceiverPulse::new(pulse, 0.0)).unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-9);

        let dt = 7.3e-6;
        let c = demodulate(&r, z, &p, &ReceiverPulse::new(pulse, dt)).unwrap();
        let expect = (-PI * dt * dt / (2.0 * p.sigma)).exp();
        assert!((c.norm() - expect).abs() < 1e-9);
    }

    #[test]
    fn demodulate_requires_coverage() {
        let p = sec4_params();
        let grid = SamplingGrid::covering(0.0, 1e-4, 1e-6).unwrap();
        let r = SampledWaveform::new(vec![Complex64::new(0.0, 0.0); grid.len], 1e-6, 0.0).unwrap();
        let err = demodulate(
            &r,
            LatticePoint::new(0, 0, Coset::Rect),
            &p,
            &ReceiverPulse::new(p.pulse(), 0.0),
        );
        assert!(matches!(err, Err(HmtError::Coverage { .. })));
    }

    /// Gram matrix `G[z][z'] = ⟨g_{z'}, g_z⟩` from the closed-form inner product.
    fn gram(p: &LatticeParams, points: &[LatticePoint]) -> Vec<Vec<Complex64>> {
        let pulse = p.pulse();
        points
            .iter()
            .map(|&z| {
                points
                    .iter()
                    .map(|&zp| pulse.shifted_inner_product(p.position(zp), p.position(z)))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn demodulated_frame_equals_gram_times_symbols() {
        let p = sec4_params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = SymbolFrame::random_qpsk(3, 3, 1.0, &mut rng).unwrap();
        let grid = grid_for(&p, &frame, 1e-6);
        let r = modulate(&frame, &p, &grid).unwrap();
        let points = frame.points();
        assert_eq!(points.len(), 18);
        let g = gram(&p, &points);
        let rx = ReceiverPulse::new(p.pulse(), 0.0);
        for (i, &z) in points.iter().enumerate() {
            let got = demodulate(&r, z, &p, &rx).unwrap();
            let expect: Complex64 = points
                .iter()
                .enumerate()
                .map(|(j, &zp)| g[i][j] * frame.get(zp).unwrap())
                .sum();
            assert!((got - expect).norm() < 1e-9, "point {z:?}");
        }
        // frame energy equals the Gram quadratic form c^H G c
        let quad: Complex64 = points
            .iter()
            .enumerate()
            .flat_map(|(i, &z)| {
                let g = &g;
                let frame = &frame;
                points.iter().enumerate().map(move |(j, &zp)| {
                    frame.get(z).unwrap().conj() * g[i][j] * frame.get(zp).unwrap()
                })
            })
            .sum();
        assert!((r.energy() - quad.re).abs() < 1e-9 * quad.re);
        assert!(quad.im.abs() < 1e-9);
    }

    #[test]
    fn offset_coset_is_half_shifted_rect_coset() {
        // cross-ambiguity between the two origin pulses peaks at (T/2, F/2)
        let p = sec4_params();
        let pulse = p.pulse();
        let a = p.position(LatticePoint::new(0, 0, Coset::Offset));
        let b = p.position(LatticePoint::new(0, 0, Coset::Rect));
        assert!((a.time - b.time - p.symbol_period / 2.0).abs() < 1e-18);
        assert!((a.freq - b.freq - p.subcarrier_spacing / 2.0).abs() < 1e-9);
        let peak = pulse
            .shifted_inner_product(a, TfShift::new(b.time + 0.5e-4, b.freq + 12.5e3))
            .norm();
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn demodulation_is_linear() {
        let p = sec4_params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f1 = SymbolFrame::random_qpsk(2, 2, 1.0, &mut rng).unwrap();
        let f2 = SymbolFrame::random_qpsk(2, 2, 1.0, &mut rng).unwrap();
        let grid = grid_for(&p, &f1, 1e-6);
        let mut r1 = modulate(&f1, &p, &grid).unwrap();
        let mut r2 = modulate(&f2, &p, &grid).unwrap();
        let rx = ReceiverPulse::new(p.pulse(), 3e-6);
        let z = LatticePoint::new(1, 0, Coset::Offset);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let d1 = demodulate(&r1, z, &p, &rx).unwrap();
        let d2 = demodulate(&r2, z, &p, &rx).unwrap();
        r1.scale(a);
        r2.scale(b);
        let sum = r1.add(&r2).unwrap();
        let d = demodulate(&sum, z, &p, &rx).unwrap();
        assert!((d - (a * d1 + b * d2)).norm() < 1e-12);
    }
}
