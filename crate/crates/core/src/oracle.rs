//! Independent reference computations used to cross-check the closed
//! forms: brute-force sums, adaptive quadratures, a reference `erfc` and
//! goodness-of-fit statistics. Nothing here calls into the closed-form
//! code paths it is meant to validate.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Riemann sum of `∫ g(t)·g(t - τ)·e^{-j2πνt} dt` for the unit-energy
/// Gaussian of width `σ`, with `t` on multiples of `step`.
pub fn riemann_ambiguity(sigma: f64, tau: f64, nu: f64, step: f64) -> Complex64 {
    let amp = (2.0 / sigma).powf(0.25);
    let g = |t: f64| amp * (-PI * t * t / sigma).exp();
    let reach = 12.0 * sigma.sqrt() + tau.abs();
    let k_max = (reach / step).ceil() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in -k_max..=k_max {
        let t = k as f64 * step;
        let w = g(t) * g(t - tau);
        if w == 0.0 {
            continue;
        }
        acc += Complex64::from_polar(w, -2.0 * PI * nu * t);
    }
    acc * step
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * KRONROD_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on `[a, b]` to a relative
/// tolerance, bisecting the interval with the largest error estimate.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut segments = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= rel_tol * total.abs() || err == 0.0 {
            break;
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = segments.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    // sorted summation keeps the result independent of the split order
    let mut parts: Vec<(f64, f64)> = segments.iter().map(|s| (s.0, s.2)).collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    parts.iter().map(|p| p.1).sum()
}

/// `∫₀^∞ e^{-τ/τ_rms}·e^{-(π/σ)(τ - c)²} dτ` by adaptive quadrature,
/// with the domain split at the integrand's peak.
pub fn delay_integral_quadrature(sigma: f64, tau_rms: f64, center: f64) -> f64 {
    let f = |t: f64| (-t / tau_rms - PI * (t - center) * (t - center) / sigma).exp();
    let peak = (center - sigma / (2.0 * PI * tau_rms)).max(0.0);
    let width = sigma.sqrt();
    let end = peak + 12.0 * width + 60.0 * tau_rms.min(width);
    let mut total = 0.0;
    let mut edges = vec![0.0];
    for k in [-6.0, -2.0, 0.0, 2.0, 6.0] {
        let e = peak + k * width;
        if e > 0.0 && e < end {
            edges.push(e);
        }
    }
    edges.push(end);
    for w in edges.windows(2) {
        total += adaptive_gauss_kronrod(f, w[0], w[1], 1e-14);
    }
    total
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`. Tolerates
/// integrable endpoint singularities: `f` receives the abscissa and its
/// distance to the nearer endpoint in units of the half-length, so that
/// singular factors can be formed without cancellation.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, step: f64, span: f64) -> f64 {
    let h = 0.5 * (b - a);
    let k_max = (span / step).ceil() as i64;
    let mut acc = 0.0;
    for k in -k_max..=k_max {
        let t = k as f64 * step;
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        // distance to the nearer endpoint, computed without cancellation
        let gap = 1.0 / (u.abs().exp() * u.cosh());
        if gap == 0.0 || w == 0.0 {
            continue;
        }
        let xx = if x < 0.0 { a + h * gap } else { b - h * gap };
        acc += w * f(xx, gap);
    }
    acc * h * step
}

/// Doppler integral in its original form,
/// `∫_{-f_d}^{f_d} e^{-σπ(c + ν)²}/√(1 - (ν/f_d)²) dν`, by tanh-sinh.
pub fn doppler_integral_reference(sigma: f64, f_d: f64, center: f64) -> f64 {
    tanh_sinh(
        |nu, gap| (-sigma * PI * (center + nu).powi(2)).exp() / (gap * (2.0 - gap)).sqrt(),
        -f_d,
        f_d,
        1.0 / 64.0,
        4.0,
    )
}

/// Complementary error function from a positive power series
/// (`x < 3`) or a continued fraction (`x ≥ 3`), with reflection for
/// negative arguments.
pub fn reference_erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - reference_erfc(-x);
    }
    if x < 3.0 {
        // erf(x) = (2/√π) e^{-x²} Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / PI.sqrt() * (-x * x).exp() * sum
    } else {
        // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
        let mut frac = x;
        for k in (1..200).rev() {
            frac = x + (k as f64 / 2.0) / frac;
        }
        (-x * x).exp() / (PI.sqrt() * frac)
    }
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = cdf(x);
            (fx - i as f64 / n)
                .abs()
                .max(((i + 1) as f64 / n - fx).abs())
        })
        .fold(0.0, f64::max)
}

/// Arcsine CDF of `f_d·cos θ` with uniform θ.
pub fn arcsine_cdf(f_d: f64, nu: f64) -> f64 {
    let r = (nu / f_d).clamp(-1.0, 1.0);
    0.5 + r.asin() / PI
}

/// Maximizer of `f` on `[lo, hi]` by repeated uniform grids, each zoomed
/// onto the two cells around the previous best point.
pub fn dense_argmax<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    points: usize,
    levels: usize,
) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    for _ in 0..levels {
        let step = (b - a) / (points - 1) as f64;
        for i in 0..points {
            let x = a + step * i as f64;
            let v = f(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        a = (best.0 - step).max(lo);
        b = (best.0 + step).min(hi);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_erfc_known_values() {
        assert!((reference_erfc(0.0) - 1.0).abs() < 1e-16);
        assert!((reference_erfc(0.5) - 0.479_500_122_186_953_5).abs() < 1e-15);
        assert!((reference_erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((reference_erfc(2.0) / 4.677_734_981_047_266e-3 - 1.0).abs() < 1e-13);
        assert!((reference_erfc(5.0) / 1.537_459_794_428_034_8e-12 - 1.0).abs() < 1e-13);
        assert!((reference_erfc(-1.0) - 1.842_700_792_949_715).abs() < 1e-15);
        // branch join
        assert!((reference_erfc(3.0 - 1e-12) / reference_erfc(3.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let v = adaptive_gauss_kronrod(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14);
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
        let g = adaptive_gauss_kronrod(|x| (-x * x).exp(), -10.0, 10.0, 1e-14);
        assert!((g - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_arcsine_weight() {
        let v = tanh_sinh(
            |_, gap| 1.0 / (gap * (2.0 - gap)).sqrt(),
            -1.0,
            1.0,
            1.0 / 64.0,
            4.0,
        );
        assert!((v - PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_statistic(&s, |x| x) <= 0.5 / n as f64 + 1e-15);
        assert!(ks_statistic(&s, |x| x * x) > 0.2);
    }

    #[test]
    fn riemann_ambiguity_at_origin_is_unit_energy() {
        let sigma = 2.3e-9;
        let a = riemann_ambiguity(sigma, 0.0, 0.0, 1e-7);
        assert!((a.re - 1.0).abs() < 1e-12 && a.im.abs() < 1e-15);
    }

    #[test]
    fn dense_argmax_finds_parabola_peak() {
        let (x, _) = dense_argmax(|x| -(x - 0.3137).powi(2), 0.0, 1.0, 101, 6);
        assert!((x - 0.3137).abs() < 1e-9);
    }
}
