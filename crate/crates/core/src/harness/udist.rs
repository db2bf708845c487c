use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{chi2_homogeneity, total_variation, Histogram};
use crate::theory::{u_density, u_mass};

use super::sweep::{run_sweep, SweepConfig, SweepResult};

pub const U_BINS: usize = 60;
pub const U_MAX: f64 = 4.0;
const CURVE_POINTS: usize = 161;

/// Histogram of `u = √(Λ/λ₂)` pooled over several `Λ`, with the universal
/// density for comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UDistribution {
    pub lambdas: Vec<f64>,
    pub per_lambda: Vec<Histogram>,
    pub pooled: Histogram,
    pub edges: Vec<f64>,
    /// Normalized to unit integral over `[0, U_MAX)`.
    pub density: Vec<f64>,
    /// Cell averages of `𝒫(u)` conditioned on `u < U_MAX`, comparable to `density`.
    pub theory_density: Vec<f64>,
    /// `𝒫(u)` conditioned on `u < U_MAX`, on a fine grid.
    pub curve_u: Vec<f64>,
    pub curve_density: Vec<f64>,
    /// Total-variation distance over the bins plus the overflow cell.
    pub total_variation: f64,
    /// Smallest pairwise homogeneity p-value between the per-`Λ` histograms.
    pub min_homogeneity_p: f64,
}

/// Probability of each bin and of the tail beyond `U_MAX` under `𝒫(u)`.
pub fn theory_cells(bins: usize, hi: f64) -> Result<Vec<f64>> {
    let w = hi / bins as f64;
    let mut cells = (0..bins)
        .map(|i| u_mass(i as f64 * w, (i + 1) as f64 * w))
        .collect::<Result<Vec<f64>>>()?;
    cells.push(u_mass(hi, f64::INFINITY)?);
    Ok(cells)
}

fn cells_of(h: &Histogram) -> Vec<u64> {
    h.counts.iter().copied().chain(std::iter::once(h.overflow)).collect()
}

impl UDistribution {
    pub fn from_histograms(lambdas: Vec<f64>, per_lambda: Vec<Histogram>) -> Result<Self> {
        let mut pooled = Histogram::new(0.0, U_MAX, U_BINS);
        for h in &per_lambda {
            pooled.merge(h);
        }
        if pooled.total() == 0 {
            return Err(Error::EmptySample("no u samples at the requested Λ values"));
        }
        let theory = theory_cells(U_BINS, U_MAX)?;
        let in_range: f64 = theory[..U_BINS].iter().sum();
        let width = pooled.width();
        let theory_density = theory[..U_BINS].iter().map(|m| m / in_range / width).collect();
        let curve_u: Vec<f64> = (0..CURVE_POINTS)
            .map(|i| U_MAX * i as f64 / (CURVE_POINTS - 1) as f64)
            .collect();
        let curve_density = curve_u
            .iter()
            .map(|&u| u_density(u).map(|d| d / in_range))
            .collect::<Result<Vec<f64>>>()?;
        let total_variation = total_variation(&pooled.probabilities(), &theory);
        let mut min_p: f64 = 1.0;
        for i in 0..per_lambda.len() {
            for j in i + 1..per_lambda.len() {
                if per_lambda[i].total() > 0 && per_lambda[j].total() > 0 {
                    min_p = min_p.min(chi2_homogeneity(&cells_of(&per_lambda[i]), &cells_of(&per_lambda[j]))?);
                }
            }
        }
        Ok(Self {
            lambdas,
            per_lambda,
            edges: pooled.edges(),
            density: if pooled.in_range() > 0 {
                pooled.density()
            } else {
                vec![0.0; U_BINS]
            },
            pooled,
            theory_density,
            curve_u,
            curve_density,
            total_variation,
            min_homogeneity_p: min_p,
        })
    }

    pub fn samples(&self) -> u64 {
        self.pooled.total()
    }

    /// Total-variation distance between two pooled empirical distributions.
    pub fn distance_to(&self, other: &UDistribution) -> f64 {
        total_variation(&self.pooled.probabilities(), &other.pooled.probabilities())
    }
}

/// Pools the per-eigenstate `u` histograms of a finished sweep at `lambdas`.
pub fn u_distribution(result: &SweepResult, lambdas: &[f64]) -> Result<UDistribution> {
    let mut per_lambda = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if !(l > 0.0) {
            return Err(Error::Config(format!("u is defined for Λ > 0, got {l}")));
        }
        let p = result
            .point(l)
            .ok_or_else(|| Error::Config(format!("Λ = {l} is not on the sweep grid")))?;
        per_lambda.push(p.u_histogram.clone());
    }
    UDistribution::from_histograms(lambdas.to_vec(), per_lambda)
}

/// Sweeps `config` over `lambdas` and pools the `u` samples.
pub fn histogram_u(config: &SweepConfig, lambdas: &[f64]) -> Result<(SweepResult, UDistribution)> {
    let cfg = config.clone().with_grid(lambdas.to_vec());
    let result = run_sweep(&cfg)?;
    let dist = u_distribution(&result, lambdas)?;
    Ok((result, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::sample_u;
    use crate::rng::RandomStream;

    #[test]
    fn theory_cells_sum_to_one() {
        let cells = theory_cells(U_BINS, U_MAX).unwrap();
        assert!((cells.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(cells[U_BINS] > 0.0 && cells[U_BINS] < 0.05);
    }

    #[test]
    fn direct_samples_match_theory() {
        let mut s = RandomStream::new(11, 0);
        let mut h = Histogram::new(0.0, U_MAX, U_BINS);
        for _ in 0..200_000 {
            h.push(sample_u(1e-4, &mut s).unwrap());
        }
        let d = UDistribution::from_histograms(vec![1e-4], vec![h]).unwrap();
        assert!(d.total_variation < 0.01, "{}", d.total_variation);
        let integral: f64 = d.density.iter().sum::<f64>() * (U_MAX / U_BINS as f64);
        assert!((integral - 1.0).abs() < 1e-12);
        let theory: f64 = d.theory_density.iter().sum::<f64>() * (U_MAX / U_BINS as f64);
        assert!((theory - 1.0).abs() < 1e-10);
    }

    #[test]
    fn empty_is_an_error() {
        let h = Histogram::new(0.0, U_MAX, U_BINS);
        assert!(matches!(
            UDistribution::from_histograms(vec![1e-3], vec![h]),
            Err(Error::EmptySample(_))
        ));
    }
}
