//! Adaptive 15-point Gauss-Kronrod quadrature on finite and half-infinite
//! intervals.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the 7-point Gauss nodes. Digits as tabulated.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// `∫_a^b f`, bisecting the worst segment until the summed error estimate
/// drops below `abs_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![gauss_kronrod(&mut f, a, b)];
    loop {
        let (value, error) = segments.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::NumericalFailure("non-finite integrand".into()));
        }
        // Below ~100 ulps of the result no bisection can help.
        if error <= abs_tol || error <= 100.0 * f64::EPSILON * value.abs() {
            return Ok(value);
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::NumericalFailure(format!(
                "quadrature did not converge: error estimate {error:e} > {abs_tol:e}"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gauss_kronrod(&mut f, seg.a, mid));
        segments.push(gauss_kronrod(&mut f, mid, seg.b));
    }
}

/// `∫_a^∞ f` through the substitution `x = a + (1 - t)/t`, `t ∈ (0, 1]`.
///
/// The transformed integrand stays bounded as long as `f` decays at least like
/// `x⁻²`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64) -> Result<f64> {
    integrate(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = a + (1.0 - t) / t;
            let v = f(x) / (t * t);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
    )
}

/// `∫_a^∞ f` split at the given interior breakpoints, which helps when the
/// integrand varies on a scale much smaller than one.
pub fn integrate_to_infinity_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x.is_finite()).collect();
    points.sort_by(f64::total_cmp);
    let pieces = points.len() + 1;
    let tol = abs_tol / pieces as f64;
    let mut total = 0.0;
    let mut lo = a;
    for &hi in &points {
        total += integrate(&mut f, lo, hi, tol)?;
        lo = hi;
    }
    total += integrate_to_infinity(&mut f, lo, tol)?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14).unwrap();
        assert!((v - (64.0 - 1.0) / 6.0 + 9.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_half_line() {
        let v = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-12).unwrap();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn algebraic_tail() {
        let v = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1e-12).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let v = integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn narrow_feature_with_breaks() {
        let a = 1e-6f64;
        // ∫ (1 - x/√(x² + a)) dx = √a
        let f = |x: f64| {
            let r = (x * x + a).sqrt();
            a / (r * (r + x))
        };
        let v = integrate_to_infinity_with_breaks(f, 0.0, &[a.sqrt(), 10.0 * a.sqrt()], 1e-13).unwrap();
        assert!((v - a.sqrt()).abs() < 1e-11, "{v}");
    }
}
