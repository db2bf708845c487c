//! First-principles Monte-Carlo checks of the perturbative eigenvalue
//! results, independent of the quadratures in [`crate::theory`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stats::mean_stderr;

/// Reduced-density eigenvalues of a two-level resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelMix {
    /// `x = 4Λw / s²`.
    pub x: f64,
    /// `(λ₁, λ₂) = ((1 + 1/√(1+x))/2, (1 - 1/√(1+x))/2)`.
    pub lambda_pair: (f64, f64),
}

impl TwoLevelMix {
    pub fn from_x(x: f64) -> Self {
        // 1 - 1/√(1+x) = x / (√(1+x) (1 + √(1+x))), stable for small x.
        let r = (1.0 + x).sqrt();
        let lambda2 = if x.is_infinite() {
            0.5
        } else {
            0.5 * x / (r * (1.0 + r))
        };
        Self {
            x,
            lambda_pair: (1.0 - lambda2, lambda2),
        }
    }

    pub fn purity(&self) -> f64 {
        let (a, b) = self.lambda_pair;
        a * a + b * b
    }
}

/// Two levels at scaled spacing `s` coupled with scaled intensity `w`.
pub fn two_level_eigenvalues(lambda: f64, w: f64, s: f64) -> Result<TwoLevelMix> {
    if !(s > 0.0) {
        return Err(Error::OutOfRange {
            value: s,
            reason: "two-level mixing needs a positive spacing".into(),
        });
    }
    if !(w >= 0.0 && lambda >= 0.0) {
        return Err(Error::OutOfRange {
            value: if w < 0.0 { w } else { lambda },
            reason: "Λ and w must be non-negative".into(),
        });
    }
    Ok(TwoLevelMix::from_x(4.0 * lambda * w / (s * s)))
}

/// Truncation of the spacing integral such that the neglected tail
/// `≈ 2Λ / S_max` is below 1e-6.
pub fn default_spacing_cutoff(lambda: f64) -> f64 {
    (2.0e6 * lambda).max(10.0)
}

/// Monte-Carlo `<λ₁> = 1 - ∫₀^{S_max}∫₀^∞ (1 - s/√(s² + 4Λw)) e^{-w} dw ds`
/// with `R₂ = 1`. Spacings are importance-sampled from
/// `q(s) ∝ c/(s + c)²` on `[0, S_max]`, `c = 2√Λ`, which tracks the integrand
/// near the resonance and its `s⁻²` tail. Returns `(mean, stderr)`.
pub fn mc_average_lambda1(lambda: f64, samples: usize, stream: &mut RandomStream) -> Result<(f64, f64)> {
    mc_average_lambda1_with_cutoff(lambda, samples, default_spacing_cutoff(lambda), stream)
}

pub fn mc_average_lambda1_with_cutoff(
    lambda: f64,
    samples: usize,
    s_max: f64,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Config("Monte-Carlo averages need at least 2 samples".into()));
    }
    if !(lambda >= 0.0) || !(s_max > 0.0) {
        return Err(Error::OutOfRange {
            value: lambda,
            reason: "need Λ >= 0 and a positive cutoff".into(),
        });
    }
    if lambda == 0.0 {
        return Ok((1.0, 0.0));
    }
    let c = 2.0 * lambda.sqrt();
    // CDF of the truncated proposal: F(s) = (s/(s + c)) / (S/(S + c)).
    let f_max = s_max / (s_max + c);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let w = stream.exponential(1.0);
        let v = stream.uniform() * f_max;
        let s = c * v / (1.0 - v);
        let q = c / ((s + c) * (s + c)) / f_max;
        values.push(1.0 - 2.0 * TwoLevelMix::from_x(4.0 * lambda * w / (s * s)).lambda_pair.1 / q);
    }
    Ok(mean_stderr(&values))
}

/// Monte-Carlo `<λ₂>` from the two-level weight with the nearest of two
/// Poissonian neighbours, spacing density `2 e^{-2s}`.
pub fn mc_average_lambda2(lambda: f64, samples: usize, stream: &mut RandomStream) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Config("Monte-Carlo averages need at least 2 samples".into()));
    }
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let w = stream.exponential(1.0);
        let s = stream.exponential(2.0);
        values.push(two_level_eigenvalues(lambda, w, s)?.lambda_pair.1);
    }
    Ok(mean_stderr(&values))
}

/// One draw of `u = √(Λ/λ₂) = s/√w`, with `w ~ e^{-w}` and `s ~ 2e^{-2s}`.
pub fn sample_u(lambda: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange {
            value: lambda,
            reason: "u is defined for Λ > 0".into(),
        });
    }
    let mut w = stream.exponential(1.0);
    while w == 0.0 {
        w = stream.exponential(1.0);
    }
    let s = stream.exponential(2.0);
    let lambda2 = lambda * w / (s * s);
    Ok((lambda / lambda2).sqrt())
}

/// Purity after a further resonance `(λ₁', λ₂')` mixes a two-level state
/// `(λ₁, λ₂)` with a third product state, computed directly and through the
/// update formula `P₂ - (1 - λ₁'² - λ₂'²) P₂ + λ₂'² (1 - P₂)`.
pub fn recursive_purity(inner: (f64, f64), outer: (f64, f64)) -> (f64, f64) {
    let (l1, l2) = inner;
    let (m1, m2) = outer;
    let p2 = l1 * l1 + l2 * l2;
    let direct = m1 * m1 * l1 * l1 + m1 * m1 * l2 * l2 + m2 * m2;
    let updated = p2 - (1.0 - m1 * m1 - m2 * m2) * p2 + m2 * m2 * (1.0 - p2);
    (direct, updated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{lambda1_mean, lambda2_series};

    #[test]
    fn two_level_values() {
        let m = two_level_eigenvalues(0.0, 1.0, 0.3).unwrap();
        assert_eq!(m.lambda_pair, (1.0, 0.0));
        let m = TwoLevelMix::from_x(3.0);
        assert!((m.lambda_pair.0 - 0.75).abs() < 1e-15 && (m.lambda_pair.1 - 0.25).abs() < 1e-15);
        let m = TwoLevelMix::from_x(1e300);
        assert!((m.lambda_pair.0 - 0.5).abs() < 1e-12 && (m.lambda_pair.1 - 0.5).abs() < 1e-12);
        assert_eq!(TwoLevelMix::from_x(f64::INFINITY).lambda_pair, (0.5, 0.5));
        assert!(two_level_eigenvalues(1e-3, 1.0, 0.0).is_err());
    }

    #[test]
    fn lambda1_at_zero_coupling() {
        let mut s = RandomStream::new(1, 0);
        assert_eq!(mc_average_lambda1(0.0, 10, &mut s).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn u_is_non_negative() {
        let mut s = RandomStream::new(2, 0);
        for _ in 0..10_000 {
            assert!(sample_u(1e-4, &mut s).unwrap() >= 0.0);
        }
        assert!(sample_u(0.0, &mut s).is_err());
    }

    #[test]
    fn lambda2_monte_carlo_tracks_series() {
        let mut s = RandomStream::new(3, 0);
        let (mean, se) = mc_average_lambda2(1e-4, 400_000, &mut s).unwrap();
        let series = lambda2_series(1e-4).unwrap();
        // The series truncation is O(Λ²) and far below the sampling error.
        assert!((mean - series).abs() < 3.0 * se + 1e-6, "{mean} ± {se} vs {series}");
    }

    #[test]
    fn lambda1_monte_carlo_small_sample() {
        let mut s = RandomStream::new(4, 0);
        let (mean, se) = mc_average_lambda1(1e-4, 100_000, &mut s).unwrap();
        let exact = lambda1_mean(1e-4).unwrap().value;
        assert!((mean - exact).abs() < 3.0 * se + 1e-6, "{mean} ± {se}");
        assert!(se < 1e-3);
    }
}
