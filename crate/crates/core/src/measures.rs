//! Entanglement and localization functionals of single eigenstates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{momentum_basis, BoundaryPhases, ModelKind, ModelSpec};
use crate::rng::{sample_cue, RandomStream, UnitaryMatrix};
use crate::spectral::{product_basis_transform, schmidt_spectrum, SchmidtSpectrum, NORM_TOLERANCE};

/// Entropy orders measured when nothing else is configured; `1` is von Neumann.
pub const DEFAULT_K_SET: [u32; 4] = [1, 2, 3, 4];

/// `P_k = Σ λ_j^k`.
pub fn moment(spectrum: &SchmidtSpectrum, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidOrder {
            k,
            reason: "moments start at k = 1",
        });
    }
    Ok(spectrum.weights().iter().map(|w| w.powi(k as i32)).sum())
}

/// Havrda-Charvát-Tsallis entropy `S_k = (1 - P_k)/(k - 1)`.
pub fn hct_entropy(spectrum: &SchmidtSpectrum, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidOrder {
            k,
            reason: "use von_neumann for k = 1",
        });
    }
    Ok((1.0 - moment(spectrum, k)?) / f64::from(k - 1))
}

/// `-Σ λ ln λ`; weights below 1e-16 are dropped.
pub fn von_neumann(spectrum: &SchmidtSpectrum) -> f64 {
    -spectrum
        .weights()
        .iter()
        .filter(|&&w| w >= 1e-16)
        .map(|&w| w * w.ln())
        .sum::<f64>()
}

/// Entropy of order `k`, dispatching `k = 1` to von Neumann.
pub fn entropy(spectrum: &SchmidtSpectrum, k: u32) -> Result<f64> {
    match k {
        0 => Err(Error::InvalidOrder {
            k,
            reason: "entropy orders start at k = 1",
        }),
        1 => Ok(von_neumann(spectrum)),
        _ => hct_entropy(spectrum, k),
    }
}

/// Named product bases for IPR evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisLabel {
    /// The basis the Floquet matrix is written in (position for the rotors).
    #[serde(rename = "computational-product")]
    Computational,
    /// Phase-offset DFT of each factor.
    #[serde(rename = "momentum-product")]
    Momentum,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 2] = [BasisLabel::Computational, BasisLabel::Momentum];

    pub fn as_str(&self) -> &'static str {
        match self {
            BasisLabel::Computational => "computational-product",
            BasisLabel::Momentum => "momentum-product",
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "computational-product" | "computational" | "position" => Ok(BasisLabel::Computational),
            "momentum-product" | "momentum" => Ok(BasisLabel::Momentum),
            other => Err(Error::UnknownBasis(other.to_string())),
        }
    }
}

/// A product basis `B1 ⊗ B2` whose columns are the basis vectors.
#[derive(Clone, Debug)]
pub enum ProductBasis {
    Computational,
    Custom { b1: UnitaryMatrix, b2: UnitaryMatrix },
}

impl ProductBasis {
    /// Resolves a label against a model; momentum bases use the model's Bloch
    /// phases (zero offsets for the RMT ensemble).
    pub fn resolve(label: BasisLabel, spec: &ModelSpec) -> Self {
        match label {
            BasisLabel::Computational => ProductBasis::Computational,
            BasisLabel::Momentum => {
                let [p1, p2] = match spec.kind {
                    ModelKind::KickedRotor => spec.phases(),
                    ModelKind::Rmt => [BoundaryPhases::new(0.0, 0.0); 2],
                };
                ProductBasis::Custom {
                    b1: momentum_basis(spec.n, p1),
                    b2: momentum_basis(spec.n, p2),
                }
            }
        }
    }
}

/// `Σ_n |<n|ψ>|⁴` in the given product basis.
pub fn ipr(state: &[C64], basis: &ProductBasis) -> Result<f64> {
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::NormViolation {
            norm,
            tol: NORM_TOLERANCE,
        });
    }
    Ok(match basis {
        ProductBasis::Computational => fourth_power_sum(state),
        ProductBasis::Custom { b1, b2 } => fourth_power_sum(&product_basis_transform(state, b1, b2)?),
    })
}

fn fourth_power_sum(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr().powi(2)).sum()
}

/// Product-basis Haar average of the IPR, `2 (1 + P₂) / (N + 1)²`.
pub fn purity_to_ipr(purity: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(purity >= 1.0 / nf - 1e-12 && purity <= 1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            value: purity,
            reason: format!("purity must lie in [1/{n}, 1]"),
        });
    }
    Ok(2.0 * (1.0 + purity) / ((nf + 1.0) * (nf + 1.0)))
}

/// `Ĩ = (N + 1)² I / 2`.
pub fn rescaled_ipr(ipr: f64, n: usize) -> f64 {
    let nf = n as f64;
    0.5 * (nf + 1.0) * (nf + 1.0) * ipr
}

/// Monte-Carlo average of the IPR over product bases `B1 ⊗ B2` with
/// independent CUE factors. Returns `(mean, standard error)`.
pub fn ipr_product_haar_average(state: &[C64], samples: usize, stream: &mut RandomStream) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Config("Haar basis averaging needs at least 2 samples".into()));
    }
    let n = (state.len() as f64).sqrt().round() as usize;
    if n * n != state.len() {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: state.len(),
        });
    }
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let b1 = sample_cue(n, stream)?;
        let b2 = sample_cue(n, stream)?;
        values.push(ipr(state, &ProductBasis::Custom { b1, b2 })?);
    }
    Ok(crate::stats::mean_stderr(&values))
}

/// Everything measured on one eigenstate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub state_index: usize,
    /// `P_k`, always including `k = 1`.
    pub moments: BTreeMap<u32, f64>,
    /// `S_k`; key 1 is von Neumann.
    pub entropies: BTreeMap<u32, f64>,
    pub ipr: BTreeMap<BasisLabel, f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn measure_eigenstate(
    state_index: usize,
    state: &[C64],
    n: usize,
    k_set: &[u32],
    bases: &[(BasisLabel, ProductBasis)],
) -> Result<MeasureRecord> {
    let spectrum = schmidt_spectrum(state, n)?;
    measure_spectrum(state_index, state, &spectrum, k_set, bases)
}

pub(crate) fn measure_spectrum(
    state_index: usize,
    state: &[C64],
    spectrum: &SchmidtSpectrum,
    k_set: &[u32],
    bases: &[(BasisLabel, ProductBasis)],
) -> Result<MeasureRecord> {
    let mut moments = BTreeMap::new();
    let mut entropies = BTreeMap::new();
    moments.insert(1, moment(spectrum, 1)?);
    entropies.insert(1, von_neumann(spectrum));
    for &k in k_set {
        if k >= 2 {
            let p = moment(spectrum, k)?;
            moments.insert(k, p);
            entropies.insert(k, (1.0 - p) / f64::from(k - 1));
        } else if k == 0 {
            return Err(Error::InvalidOrder {
                k,
                reason: "entropy orders start at k = 1",
            });
        }
    }
    let mut iprs = BTreeMap::new();
    for (label, basis) in bases {
        iprs.insert(*label, ipr(state, basis)?);
    }
    Ok(MeasureRecord {
        state_index,
        moments,
        entropies,
        ipr: iprs,
        lambda1: spectrum.lambda1(),
        lambda2: spectrum.lambda2(),
    })
}

/// Writes records as flat CSV rows: `state_index, lambda1, lambda2, P<k>...,
/// S<k>..., ipr_<basis>...`. All records must share the same keys.
pub fn write_records_csv<W: std::io::Write>(records: &[MeasureRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let Some(first) = records.first() else {
        writer.flush().map_err(|e| Error::io("<csv>", e))?;
        return Ok(());
    };
    let mut header = vec!["state_index".to_string(), "lambda1".into(), "lambda2".into()];
    header.extend(first.moments.keys().map(|k| format!("P{k}")));
    header.extend(first.entropies.keys().map(|k| format!("S{k}")));
    header.extend(first.ipr.keys().map(|b| format!("ipr_{b}")));
    writer.write_record(&header)?;
    for r in records {
        let mut row = vec![r.state_index.to_string(), r.lambda1.to_string(), r.lambda2.to_string()];
        row.extend(r.moments.values().map(f64::to_string));
        row.extend(r.entropies.values().map(f64::to_string));
        row.extend(r.ipr.values().map(f64::to_string));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spectrum(w: &[f64]) -> SchmidtSpectrum {
        SchmidtSpectrum::from_weights(w.to_vec()).unwrap()
    }

    fn uniform(n: usize) -> SchmidtSpectrum {
        spectrum(&vec![1.0 / n as f64; n])
    }

    fn product(n: usize) -> SchmidtSpectrum {
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        spectrum(&w)
    }

    #[test]
    fn moments() {
        let s = spectrum(&[0.5, 0.3, 0.2]);
        assert_relative_eq!(moment(&s, 1).unwrap(), 1.0, epsilon = 1e-15);
        for k in 1..6 {
            assert_eq!(moment(&product(7), k).unwrap(), 1.0);
        }
        assert_relative_eq!(moment(&uniform(50), 2).unwrap(), 0.02, epsilon = 1e-15);
        assert!(matches!(moment(&s, 0), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn hct_entropies() {
        for k in 2..6 {
            assert_eq!(hct_entropy(&product(5), k).unwrap(), 0.0);
        }
        assert_relative_eq!(hct_entropy(&uniform(50), 2).unwrap(), 1.0 - 1.0 / 50.0, epsilon = 1e-14);
        let s = spectrum(&[0.9, 0.1, 0.0, 0.0]);
        assert_relative_eq!(hct_entropy(&s, 3).unwrap(), 0.135, epsilon = 1e-15);
        assert!(hct_entropy(&s, 1).is_err());
    }

    #[test]
    fn von_neumann_values() {
        assert_eq!(von_neumann(&product(4)), 0.0);
        assert_relative_eq!(von_neumann(&uniform(50)), 50f64.ln(), epsilon = 1e-13);
        let s = spectrum(&[0.5, 0.5, 0.0]);
        assert_relative_eq!(von_neumann(&s), std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn ipr_extremes() {
        let n = 3;
        let mut basis_state = vec![C64::new(0.0, 0.0); n * n];
        basis_state[4] = C64::new(0.0, 1.0);
        assert_eq!(ipr(&basis_state, &ProductBasis::Computational).unwrap(), 1.0);
        let amp = 1.0 / n as f64;
        let flat = vec![C64::new(amp, 0.0); n * n];
        assert_relative_eq!(
            ipr(&flat, &ProductBasis::Computational).unwrap(),
            1.0 / (n * n) as f64,
            epsilon = 1e-15
        );
        assert!(ipr(&[C64::new(1.0, 0.0); 4], &ProductBasis::Computational).is_err());
    }

    #[test]
    fn basis_labels() {
        assert_eq!("momentum-product".parse::<BasisLabel>().unwrap(), BasisLabel::Momentum);
        assert_eq!(
            "computational-product".parse::<BasisLabel>().unwrap(),
            BasisLabel::Computational
        );
        assert!(matches!("energy".parse::<BasisLabel>(), Err(Error::UnknownBasis(_))));
        assert!(serde_json::from_str::<BasisLabel>("\"spin\"").is_err());
        assert_eq!(
            serde_json::to_string(&BasisLabel::Momentum).unwrap(),
            "\"momentum-product\""
        );
    }

    #[test]
    fn purity_ipr_relation() {
        let n = 7;
        let nf = n as f64;
        assert_relative_eq!(
            purity_to_ipr(1.0, n).unwrap(),
            4.0 / ((nf + 1.0) * (nf + 1.0)),
            epsilon = 1e-16
        );
        let global = 2.0 * nf / (nf * nf + 1.0);
        assert_relative_eq!(
            purity_to_ipr(global, n).unwrap(),
            2.0 / (nf * nf + 1.0),
            epsilon = 1e-16
        );
        assert_relative_eq!(purity_to_ipr(0.5, 4).unwrap(), 0.12, epsilon = 1e-16);
        assert!(purity_to_ipr(0.1, 4).is_err());
        assert!(purity_to_ipr(1.2, 4).is_err());
    }

    #[test]
    fn rescaling() {
        let n = 50;
        assert_relative_eq!(rescaled_ipr(4.0 / 51.0f64.powi(2), n), 2.0, epsilon = 1e-14);
        assert_relative_eq!(rescaled_ipr(0.001, n), 1.3005, epsilon = 1e-13);
        let big = 2000;
        let nf = big as f64;
        assert!((rescaled_ipr(2.0 / (nf * nf + 1.0), big) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn product_state_record() {
        let n = 4;
        let mut state = vec![C64::new(0.0, 0.0); n * n];
        state[5] = C64::new(1.0, 0.0);
        let r = measure_eigenstate(
            3,
            &state,
            n,
            &DEFAULT_K_SET,
            &[(BasisLabel::Computational, ProductBasis::Computational)],
        )
        .unwrap();
        assert_eq!(r.state_index, 3);
        assert_eq!(r.lambda1, 1.0);
        assert_eq!(r.lambda2, 0.0);
        assert!(r.entropies.values().all(|&s| s == 0.0));
        assert_eq!(r.ipr[&BasisLabel::Computational], 1.0);
        assert_eq!(r.entropies.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn records_write_as_csv() {
        let n = 2;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let state = vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ];
        let rec = measure_eigenstate(
            0,
            &state,
            n,
            &[2],
            &[(BasisLabel::Computational, ProductBasis::Computational)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_records_csv(&[rec.clone(), rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "state_index,lambda1,lambda2,P1,P2,S1,S2,ipr_computational-product"
        );
        assert_eq!(lines.count(), 2);
    }
}
