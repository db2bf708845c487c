//! Closed-form and quadrature predictions for the entanglement transition.
//!
//! Everything here is a pure function of the entropy order `k`, the subsystem
//! dimension `N` and the transition parameter `Λ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, integrate_to_infinity_with_breaks};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Validity limit of the small-`Λ` expansion of `<λ₂>`.
pub const LAMBDA2_SERIES_LIMIT: f64 = 1e-2;
/// Validity limit of the leading-order moment expansion.
pub const PURITY_SERIES_LIMIT: f64 = 1e-3;

const QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    /// Entropy order; 1 is von Neumann.
    pub k: u32,
    pub n: usize,
    pub lambda: f64,
}

impl TheoryParams {
    pub fn new(k: u32, n: usize, lambda: f64) -> Result<Self> {
        let p = Self { k, n, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidOrder {
                k: self.k,
                reason: "entropy orders start at k = 1",
            });
        }
        if self.n < 2 {
            return Err(Error::InvalidDimension {
                got: self.n,
                reason: "subsystem dimension must be at least 2",
            });
        }
        check_lambda(self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::OutOfRange {
            value: lambda,
            reason: "transition parameter must be finite and non-negative".into(),
        });
    }
    Ok(())
}

/// A value together with a flag marking evaluation outside the range where
/// the underlying approximation was derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flagged {
    pub value: f64,
    pub extrapolated: bool,
}

/// `α(k) = π Γ(k - 1/2) / Γ(k)`, the small-`Λ` slope of `<S_k>` in `√Λ`.
///
/// # Panics
/// If `k == 0`.
pub fn alpha(k: u32) -> f64 {
    assert!(k >= 1, "alpha is defined for k >= 1");
    let k = f64::from(k);
    PI * (ln_gamma(k - 0.5) - ln_gamma(k)).exp()
}

/// Catalan number `C_k = binom(2k, k) / (k + 1)` for `1 ≤ k ≤ 30`.
pub fn catalan(k: u32) -> Result<u64> {
    if !(1..=30).contains(&k) {
        return Err(Error::InvalidOrder {
            k,
            reason: "Catalan numbers are provided for 1 <= k <= 30",
        });
    }
    // C_{j+1} = C_j * 2(2j + 1) / (j + 2), exact in integers.
    let mut c: u128 = 1;
    for j in 1..k as u128 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    Ok(c as u64)
}

/// Marcenko-Pastur moment `P_k^∞ = C_k N^{1-k}`.
pub fn asymptotic_moment(k: u32, n: usize) -> Result<f64> {
    if k == 1 {
        return Ok(1.0);
    }
    Ok(catalan(k)? as f64 * (n as f64).powi(1 - k as i32))
}

/// Fully-coupled entropy `<S_k^∞>`: `(1 - C_k N^{1-k})/(k - 1)` for `k > 1`
/// and `ln N - 1/2` for von Neumann.
pub fn asymptotic_entropy(k: u32, n: usize) -> Result<f64> {
    match k {
        0 => Err(Error::InvalidOrder {
            k,
            reason: "entropy orders start at k = 1",
        }),
        1 => Ok((n as f64).ln() - 0.5),
        _ => Ok((1.0 - asymptotic_moment(k, n)?) / f64::from(k - 1)),
    }
}

/// `<S_k(Λ)> = [1 - exp(-α(k) √Λ / <S_k^∞>)] <S_k^∞>`.
pub fn entropy_transition(params: TheoryParams) -> Result<f64> {
    params.validate()?;
    let s_inf = asymptotic_entropy(params.k, params.n)?;
    let rate = alpha(params.k) / s_inf;
    Ok(-(-rate * params.lambda.sqrt()).exp_m1() * s_inf)
}

/// Moment implied by the entropy transition, `1 - (k - 1) <S_k(Λ)>`.
pub fn moment_transition(params: TheoryParams) -> Result<f64> {
    if params.k == 1 {
        params.validate()?;
        return Ok(1.0);
    }
    Ok(1.0 - f64::from(params.k - 1) * entropy_transition(params)?)
}

/// `P_k` sampled on a uniform `√Λ` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub sqrt_lambda: Vec<f64>,
    pub moment: Vec<f64>,
}

/// Right-hand side `dP_k/d√Λ = -(k - 1) α(k) (P_k - P_k^∞)/(1 - P_k^∞)`.
pub fn moment_ode_rhs(k: u32, n: usize, p: f64) -> Result<f64> {
    let p_inf = asymptotic_moment(k, n)?;
    if k == 1 {
        return Ok(0.0);
    }
    Ok(-f64::from(k - 1) * alpha(k) * (p - p_inf) / (1.0 - p_inf))
}

/// Classical fourth-order Runge–Kutta solution of the moment equation from
/// `P_k(0) = 1` up to `√Λ_max`, with `steps` equal steps.
pub fn integrate_moment_ode(k: u32, n: usize, lambda_max: f64, steps: usize) -> Result<MomentCurve> {
    if steps == 0 {
        return Err(Error::Config("ODE integration needs a positive step count".into()));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::OutOfRange {
            value: lambda_max,
            reason: "Λ_max must be positive".into(),
        });
    }
    TheoryParams::new(k, n, lambda_max)?;
    let p_inf = asymptotic_moment(k, n)?;
    let rate = if k == 1 {
        0.0
    } else {
        f64::from(k - 1) * alpha(k) / (1.0 - p_inf)
    };
    let rhs = |p: f64| -rate * (p - p_inf);
    let x_max = lambda_max.sqrt();
    let h = x_max / steps as f64;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ps = Vec::with_capacity(steps + 1);
    let mut p = 1.0;
    xs.push(0.0);
    ps.push(p);
    for i in 1..=steps {
        let k1 = rhs(p);
        let k2 = rhs(p + 0.5 * h * k1);
        let k3 = rhs(p + 0.5 * h * k2);
        let k4 = rhs(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        xs.push(i as f64 * h);
        ps.push(p);
    }
    Ok(MomentCurve {
        sqrt_lambda: xs,
        moment: ps,
    })
}

/// `<λ₁> = 1 - √(πΛ)`, flagged beyond `Λ = 1/π` where it turns negative.
pub fn lambda1_mean(lambda: f64) -> Result<Flagged> {
    check_lambda(lambda)?;
    Ok(Flagged {
        value: 1.0 - (PI * lambda).sqrt(),
        extrapolated: lambda > 1.0 / PI,
    })
}

/// `1 - s/√(s² + a)` without cancellation for large `s`.
fn regularized_mixing(s: f64, a: f64) -> f64 {
    let r = (s * s + a).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    a / (r * (r + s))
}

/// `∫₀^∞ dw e^{-w} ∫₀^∞ ds g(s) (1 - s/√(s² + 4Λw))` by nested quadrature.
fn regularized_double_integral<G: Fn(f64) -> f64>(lambda: f64, spacing_weight: G) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let inner = |w: f64| -> f64 {
        let a = 4.0 * lambda * w;
        if a == 0.0 {
            return 0.0;
        }
        let scale = a.sqrt();
        integrate_to_infinity_with_breaks(
            |s| regularized_mixing(s, a) * spacing_weight(s),
            0.0,
            &[scale, 10.0 * scale, 100.0 * scale],
            QUAD_TOL * 1e-2,
        )
        .unwrap_or(f64::NAN)
    };
    let value = integrate_to_infinity(|w| if w > 700.0 { 0.0 } else { inner(w) * (-w).exp() }, 0.0, QUAD_TOL)?;
    if value.is_nan() {
        return Err(Error::NumericalFailure("inner quadrature failed".into()));
    }
    Ok(value)
}

/// `<λ₁>` from the regularized double integral with a Poissonian `R₂ = 1`.
pub fn lambda1_quadrature(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 - regularized_double_integral(lambda, |_| 1.0)?)
}

/// Second-largest Schmidt weight: the small-`Λ` series and the quadrature of
/// its regularized integral with nearest-neighbour density `2 e^{-2s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda2Mean {
    /// `√(πΛ) + 2Λ(γ + ln 4Λ) - 8√π Λ^{3/2}`.
    pub series: f64,
    /// `∫∫ (1 - s/√(s² + 4Λw)) e^{-2s} e^{-w} ds dw`, the factor 1/2 of the
    /// two-level weight cancelling the normalization of `2 e^{-2s}`.
    pub quadrature: f64,
    pub extrapolated: bool,
}

pub fn lambda2_series(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok((PI * lambda).sqrt() + 2.0 * lambda * (EULER_GAMMA + (4.0 * lambda).ln()) - 8.0 * PI.sqrt() * lambda.powf(1.5))
}

pub fn lambda2_mean(lambda: f64) -> Result<Lambda2Mean> {
    check_lambda(lambda)?;
    Ok(Lambda2Mean {
        series: lambda2_series(lambda)?,
        quadrature: regularized_double_integral(lambda, |s| (-2.0 * s).exp())?,
        extrapolated: lambda > LAMBDA2_SERIES_LIMIT,
    })
}

/// Leading order `<P_k> = 1 - (k - 1) α(k) √Λ`.
pub fn purity_small_lambda(k: u32, lambda: f64) -> Result<Flagged> {
    if k < 2 {
        return Err(Error::InvalidOrder {
            k,
            reason: "the moment expansion is stated for k >= 2",
        });
    }
    check_lambda(lambda)?;
    Ok(Flagged {
        value: 1.0 - f64::from(k - 1) * alpha(k) * lambda.sqrt(),
        extrapolated: lambda > PURITY_SERIES_LIMIT,
    })
}

/// Universal density of `u = √(Λ/λ₂)`, `4 ∫₀^∞ t² e^{-t²} e^{-2ut} dt`.
pub fn u_density(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::OutOfRange {
            value: u,
            reason: "u must be non-negative".into(),
        });
    }
    if u.is_infinite() {
        return Ok(0.0);
    }
    let v = integrate_to_infinity(|t| 4.0 * t * t * (-t * t - 2.0 * u * t).exp(), 0.0, 1e-12)?;
    Ok(v.max(0.0))
}

/// `∫_a^b 𝒫(u) du`, used to turn the density into histogram cell masses.
pub fn u_mass(a: f64, b: f64) -> Result<f64> {
    // Interchanging the integrals: 2 ∫ t e^{-t²} (e^{-2at} - e^{-2bt}) dt.
    let cell = |t: f64| {
        let tail_b = if b.is_infinite() { 0.0 } else { (-2.0 * b * t).exp() };
        2.0 * t * (-t * t).exp() * ((-2.0 * a * t).exp() - tail_b)
    };
    integrate_to_infinity(cell, 0.0, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_values() {
        assert_relative_eq!(alpha(1), PI.powf(1.5), max_relative = 1e-13);
        assert_relative_eq!(alpha(1), 5.568_328, epsilon = 1e-6);
        assert_relative_eq!(alpha(2), 2.784_164, epsilon = 1e-6);
        for k in 1..=10u32 {
            let ratio = alpha(k + 1) / alpha(k);
            assert_relative_eq!(ratio, (f64::from(k) - 0.5) / f64::from(k), max_relative = 1e-13);
        }
    }

    #[test]
    fn catalan_numbers() {
        assert_eq!(catalan(1).unwrap(), 1);
        assert_eq!(
            [catalan(2).unwrap(), catalan(3).unwrap(), catalan(4).unwrap()],
            [2, 5, 14]
        );
        assert_eq!(catalan(30).unwrap(), 3_814_986_502_092_304);
        let c: Vec<u64> = (1..=20).map(|k| catalan(k).unwrap()).collect();
        // With C_0 = 1: C_{k+1} = Σ_{i=0}^{k} C_i C_{k-i}.
        let full = |i: usize| if i == 0 { 1 } else { c[i - 1] };
        for k in 1..19usize {
            let sum: u64 = (0..=k).map(|i| full(i) * full(k - i)).sum();
            assert_eq!(sum, full(k + 1), "k = {k}");
        }
        assert!(catalan(0).is_err());
        assert!(catalan(31).is_err());
    }

    #[test]
    fn asymptotic_entropies() {
        assert_relative_eq!(asymptotic_entropy(2, 50).unwrap(), 0.96, epsilon = 1e-15);
        assert_relative_eq!(
            asymptotic_entropy(4, 50).unwrap(),
            (1.0 - 14.0 / 125_000.0) / 3.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(asymptotic_entropy(4, 50).unwrap(), 0.333_296, epsilon = 1e-6);
        assert_relative_eq!(asymptotic_entropy(1, 50).unwrap(), 3.412_023, epsilon = 1e-6);
    }

    #[test]
    fn entropy_transition_values() {
        for k in 1..=4 {
            let zero = entropy_transition(TheoryParams::new(k, 50, 0.0).unwrap()).unwrap();
            assert_eq!(zero, 0.0);
            let sat = entropy_transition(TheoryParams::new(k, 50, 1e6).unwrap()).unwrap();
            assert!((sat - asymptotic_entropy(k, 50).unwrap()).abs() < 1e-12);
        }
        let s2 = entropy_transition(TheoryParams::new(2, 50, 0.25).unwrap()).unwrap();
        assert_relative_eq!(s2, 0.734_83, epsilon = 1e-5);
        assert!(TheoryParams::new(2, 50, -1.0).is_err());
        assert!(TheoryParams::new(0, 50, 1.0).is_err());
        assert!(TheoryParams::new(2, 1, 1.0).is_err());
    }

    #[test]
    fn ode_matches_closed_form() {
        for k in 2..=4 {
            let curve = integrate_moment_ode(k, 50, 16.0, 4000).unwrap();
            for (&x, &p) in curve.sqrt_lambda.iter().zip(&curve.moment) {
                let exact = moment_transition(TheoryParams::new(k, 50, x * x).unwrap()).unwrap();
                assert!((p - exact).abs() < 1e-8, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn ode_fixed_point_and_order() {
        let p_inf = asymptotic_moment(3, 50).unwrap();
        assert_eq!(moment_ode_rhs(3, 50, p_inf).unwrap(), 0.0);
        let err = |steps: usize| {
            let c = integrate_moment_ode(4, 20, 4.0, steps).unwrap();
            c.sqrt_lambda
                .iter()
                .zip(&c.moment)
                .map(|(&x, &p)| (p - moment_transition(TheoryParams::new(4, 20, x * x).unwrap()).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(20) / err(40);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
        assert!(integrate_moment_ode(2, 50, 1.0, 0).is_err());
    }

    #[test]
    fn lambda1_closed_form_and_quadrature() {
        assert_eq!(lambda1_mean(0.0).unwrap().value, 1.0);
        assert_relative_eq!(lambda1_mean(1e-4).unwrap().value, 0.982_276, epsilon = 1e-6);
        assert!(lambda1_mean(0.5).unwrap().extrapolated);
        let q = lambda1_quadrature(1e-3).unwrap();
        assert!((q - lambda1_mean(1e-3).unwrap().value).abs() < 1e-6, "{q}");
    }

    #[test]
    fn lambda2_series_and_quadrature() {
        let m = lambda2_mean(0.0).unwrap();
        assert_eq!((m.series, m.quadrature), (0.0, 0.0));
        let m = lambda2_mean(1e-4).unwrap();
        // √(π 10⁻⁴) + 2·10⁻⁴ (γ + ln 4·10⁻⁴) - 8√π 10⁻⁶
        assert_relative_eq!(m.series, 0.016_261_0, epsilon = 1e-7);
        assert!((m.series - m.quadrature).abs() < 5e-4, "{m:?}");
        assert!(!m.extrapolated);
    }

    #[test]
    fn lambda_sum_is_one_to_leading_order() {
        for e in [-6.0, -5.0, -4.0, -3.0] {
            let l = 10f64.powf(e);
            let dev = (lambda1_mean(l).unwrap().value + lambda2_series(l).unwrap() - 1.0).abs();
            assert!(dev < 10.0 * l * l.ln().abs(), "Λ={l}: {dev}");
        }
    }

    #[test]
    fn purity_expansion() {
        assert_eq!(purity_small_lambda(2, 0.0).unwrap().value, 1.0);
        assert_relative_eq!(purity_small_lambda(2, 1e-4).unwrap().value, 0.972_158, epsilon = 1e-6);
        for k in 2..=6 {
            // Slope in √Λ equals the ODE right-hand side at P = 1.
            let h = 1e-6;
            let slope = (purity_small_lambda(k, h * h).unwrap().value - 1.0) / h;
            let ode = moment_ode_rhs(k, 1_000_000, 1.0).unwrap();
            assert_relative_eq!(slope, -f64::from(k - 1) * alpha(k), max_relative = 1e-9);
            assert_relative_eq!(slope, ode, max_relative = 1e-6);
        }
        assert!(purity_small_lambda(1, 1e-4).is_err());
    }

    #[test]
    fn u_density_properties() {
        assert_relative_eq!(u_density(0.0).unwrap(), PI.sqrt(), epsilon = 1e-10);
        let total = integrate_to_infinity(|u| u_density(u).unwrap(), 0.0, 1e-10).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        let grid: Vec<f64> = (0..=50).map(|i| 0.1 * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&u| u_density(u).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        assert!(values.iter().all(|&v| v >= 0.0));
        assert!(u_density(-0.1).is_err());
    }

    #[test]
    fn u_mass_matches_density_integral() {
        let direct = integrate(|u| u_density(u).unwrap(), 0.5, 1.5, 1e-12).unwrap();
        assert!((u_mass(0.5, 1.5).unwrap() - direct).abs() < 1e-10);
        assert!((u_mass(0.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn consistency_chain() {
        for k in 2..=4 {
            let s_inf = asymptotic_entropy(k, 50).unwrap();
            for l in [1e-8, 1e-6, 1e-5, 1e-4] {
                let from_entropy = moment_transition(TheoryParams::new(k, 50, l).unwrap()).unwrap();
                let series = purity_small_lambda(k, l).unwrap().value;
                let bound = 2.0 * f64::from(k - 1) * alpha(k).powi(2) * l / s_inf;
                assert!((from_entropy - series).abs() <= bound, "k={k} Λ={l}");
            }
        }
    }

    #[test]
    fn transition_is_monotone_and_bounded() {
        for k in 1..=4 {
            for n in [10, 50, 100] {
                let cap = asymptotic_entropy(k, n).unwrap();
                let mut prev = -1.0;
                for i in 0..200 {
                    let l = 10f64.powf(-6.0 + 0.05 * i as f64);
                    let s = entropy_transition(TheoryParams::new(k, n, l).unwrap()).unwrap();
                    assert!(s >= prev && s <= cap);
                    prev = s;
                }
            }
        }
    }
}
