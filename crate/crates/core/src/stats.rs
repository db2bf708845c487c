//! Small statistics helpers shared by the harness and the oracles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Sample mean and standard error of the mean (`s / √n`, with `s` the
/// unbiased standard deviation). A single value has zero standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let (_, se) = mean_stderr(values);
    se * (values.len() as f64).sqrt()
}

/// Fixed-width histogram with an overflow counter above the last edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub underflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0, "degenerate histogram range");
        Self {
            lo,
            hi,
            counts: vec![0; bins],
            overflow: 0,
            underflow: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins()).map(|i| self.lo + i as f64 * self.width()).collect()
    }

    pub fn push(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let last = self.bins() - 1;
            let i = ((x - self.lo) / self.width()) as usize;
            self.counts[i.min(last)] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.bins(), other.bins());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.underflow += other.underflow;
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.overflow + self.underflow
    }

    /// Density normalized to unit integral over the binned range.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.in_range() as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Cell probabilities over all samples: the bins, then the overflow cell.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .chain(std::iter::once(&self.overflow))
            .map(|&c| c as f64 / total)
            .collect()
    }
}

/// `½ Σ |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// p-value of the chi-square homogeneity test between two count vectors.
/// Cells empty in both samples are skipped.
pub fn chi2_homogeneity(a: &[u64], b: &[u64]) -> Result<f64> {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::EmptySample("homogeneity test needs two non-empty samples"));
    }
    let (na, nb) = (na as f64, nb as f64);
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na / (na + nb);
        let eb = col * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cells < 2 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok(dist.sf(stat))
}

/// p-value of a chi-square goodness-of-fit test of counts against cell
/// probabilities.
pub fn chi2_goodness_of_fit(counts: &[u64], probs: &[f64]) -> Result<f64> {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptySample("goodness-of-fit test needs samples"));
    }
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok(dist.sf(stat))
}
