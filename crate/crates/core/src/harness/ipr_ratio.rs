use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::BasisLabel;
use crate::models::ModelKind;

use super::sweep::{realization_spread, Measure, SweepResult};

/// Realizations below which an envelope is considered poorly estimated.
const RECOMMENDED_REFERENCE_REALIZATIONS: usize = 10;

/// The RMT interaction is diagonal in the computational basis, so its ratio
/// fluctuations there set the envelope for every basis.
pub const ENVELOPE_BASIS: BasisLabel = BasisLabel::Computational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IprRatioPoint {
    pub lambda: f64,
    pub sqrt_lambda: f64,
    pub basis: BasisLabel,
    pub rescaled_ipr: f64,
    pub purity_term: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// Allowed `|r - 1|` from the RMT reference at this `Λ`.
    pub envelope: Option<f64>,
    /// `|r - 1|` exceeds the envelope.
    pub non_ergodic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IprRatioReport {
    pub model: ModelKind,
    pub n: usize,
    pub points: Vec<IprRatioPoint>,
}

impl IprRatioReport {
    pub fn basis_points(&self, basis: BasisLabel) -> impl Iterator<Item = &IprRatioPoint> {
        self.points.iter().filter(move |p| p.basis == basis)
    }

    /// `Λ` values flagged as non-ergodic in `basis`.
    pub fn flagged(&self, basis: BasisLabel) -> Vec<f64> {
        self.basis_points(basis)
            .filter(|p| p.non_ergodic)
            .map(|p| p.lambda)
            .collect()
    }
}

/// `3σ` of the per-realization ratio `r_i` at every grid point of an RMT sweep.
pub fn ratio_envelope(reference: &SweepResult, basis: BasisLabel) -> Result<Vec<(f64, f64)>> {
    let cfg = reference.config();
    if cfg.model.kind != ModelKind::Rmt {
        return Err(Error::Config(
            "the ratio envelope is calibrated on the RMT ensemble".into(),
        ));
    }
    if cfg.realizations < 2 {
        return Err(Error::Config(
            "the ratio envelope needs at least two RMT realizations".into(),
        ));
    }
    if cfg.realizations < RECOMMENDED_REFERENCE_REALIZATIONS {
        log::warn!(
            "ratio envelope from only {} realizations; {} or more recommended",
            cfg.realizations,
            RECOMMENDED_REFERENCE_REALIZATIONS
        );
    }
    if !cfg.bases.contains(&basis) {
        return Err(Error::Config(format!(
            "reference sweep did not measure the {basis} basis"
        )));
    }
    reference
        .points
        .iter()
        .map(|p| {
            realization_spread(p, Measure::IprRatio(basis))
                .map(|s| (p.lambda, 3.0 * s))
                .ok_or_else(|| Error::NumericalFailure(format!("too few surviving realizations at Λ = {}", p.lambda)))
        })
        .collect()
}

/// Rescaled IPR, purity term and their ratio for every basis and grid point,
/// flagged against the RMT envelope in [`ENVELOPE_BASIS`]. Without a
/// `reference` an RMT sweep is its own reference.
pub fn ipr_ratio_experiment(result: &SweepResult, reference: Option<&SweepResult>) -> Result<IprRatioReport> {
    let cfg = result.config();
    if cfg.model.kind == ModelKind::KickedRotor && !BasisLabel::ALL.iter().all(|b| cfg.bases.contains(b)) {
        return Err(Error::Config(
            "the kicked-rotor ratio experiment needs both the computational and the momentum product basis".into(),
        ));
    }
    let reference = match (reference, cfg.model.kind) {
        (Some(r), _) => Some(r),
        (None, ModelKind::Rmt) if cfg.realizations >= 2 => Some(result),
        (None, _) => None,
    };
    let envelope = match reference {
        Some(r) => Some(ratio_envelope(r, ENVELOPE_BASIS)?),
        None => None,
    };
    let mut points = Vec::new();
    for &basis in &cfg.bases {
        for p in &result.points {
            let get = |m: Measure| {
                p.stat(m)
                    .cloned()
                    .ok_or_else(|| Error::ContractViolation(format!("{m} missing at Λ = {}", p.lambda)))
            };
            let ratio = get(Measure::IprRatio(basis))?;
            let delta = envelope
                .as_ref()
                .and_then(|e| e.iter().find(|(l, _)| *l == p.lambda).map(|&(_, d)| d));
            points.push(IprRatioPoint {
                lambda: p.lambda,
                sqrt_lambda: p.sqrt_lambda,
                basis,
                rescaled_ipr: get(Measure::RescaledIpr(basis))?.mean,
                purity_term: get(Measure::PurityTerm)?.mean,
                ratio: ratio.mean,
                ratio_stderr: ratio.stderr,
                envelope: delta,
                non_ergodic: delta.is_some_and(|d| (ratio.mean - 1.0).abs() > d),
            });
        }
    }
    Ok(IprRatioReport {
        model: cfg.model.kind,
        n: cfg.model.n,
        points,
    })
}
