use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{measure_spectrum, rescaled_ipr, BasisLabel, ProductBasis, DEFAULT_K_SET};
use crate::models::{coupling_for_lambda, ModelKind, ModelSpec, SeedInfo};
use crate::spectral::{eigendecompose_floquet, schmidt_spectrum};
use crate::stats::{mean_stderr, std_dev, Histogram};
use crate::theory::{
    entropy_transition, lambda1_mean, lambda2_series, moment_transition, TheoryParams, LAMBDA2_SERIES_LIMIT,
};

use super::udist::{U_BINS, U_MAX};

/// A sweep fails when more than this fraction of its realizations abort.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

const THEORY_CURVE_POINTS: usize = 201;

/// `m` logarithmically spaced values from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, m: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || m == 0 {
        return Err(Error::Config(format!(
            "logspace needs positive finite endpoints and at least one point, got ({a}, {b}, {m})"
        )));
    }
    if m == 1 {
        return Ok(vec![a]);
    }
    let (la, lb) = (a.log10(), b.log10());
    let mut v: Vec<f64> = (0..m)
        .map(|i| 10f64.powf(la + (lb - la) * i as f64 / (m - 1) as f64))
        .collect();
    v[0] = a;
    v[m - 1] = b;
    Ok(v)
}

/// Parses `0,1e-4,0.01` or `logspace:a:b:m` (endpoint values, not exponents).
pub fn parse_lambda_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("invalid Λ grid `{s}`: {what}"));
    if let Some(rest) = s.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [a, b, m] = parts.as_slice() else {
            return Err(bad("expected logspace:a:b:m"));
        };
        let a: f64 = a.trim().parse().map_err(|_| bad("start is not a number"))?;
        let b: f64 = b.trim().parse().map_err(|_| bad("end is not a number"))?;
        let m: usize = m.trim().parse().map_err(|_| bad("count is not an integer"))?;
        return logspace(a, b, m);
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{t}` is not a number")))
        })
        .collect()
}

fn default_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend(logspace(1e-4, 10.0, 24).expect("static grid"));
    grid
}

fn default_realizations() -> usize {
    20
}

fn default_k_set() -> Vec<u32> {
    DEFAULT_K_SET.to_vec()
}

fn default_bases() -> Vec<BasisLabel> {
    BasisLabel::ALL.to_vec()
}

/// Everything that determines a sweep. The model's coupling and seed are
/// ignored; both are derived per grid point and realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelSpec,
    #[serde(default = "default_grid")]
    pub lambda_grid: Vec<f64>,
    /// RMT ensemble size; the deterministic kicked rotor always runs once.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_k_set")]
    pub k_set: Vec<u32>,
    #[serde(default = "default_bases")]
    pub bases: Vec<BasisLabel>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl SweepConfig {
    /// Default grid, ensemble size, orders and bases for the given model.
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            lambda_grid: default_grid(),
            realizations: default_realizations(),
            k_set: default_k_set(),
            bases: default_bases(),
            master_seed: 0,
            output_dir: None,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.lambda_grid = grid;
        self
    }

    pub fn with_realizations(mut self, realizations: usize) -> Self {
        self.realizations = realizations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn effective_realizations(&self) -> usize {
        match self.model.kind {
            ModelKind::Rmt => self.realizations,
            ModelKind::KickedRotor => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.with_coupling(0.0).validate()?;
        if self.lambda_grid.is_empty() {
            return Err(Error::Config("Λ grid is empty".into()));
        }
        if let Some(&bad) = self.lambda_grid.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::Config(format!(
                "Λ grid value {bad} is not finite and non-negative"
            )));
        }
        let unreachable: Vec<String> = self
            .lambda_grid
            .iter()
            .filter(|&&l| coupling_for_lambda(self.model.kind, self.model.n, l).is_err())
            .map(|l| l.to_string())
            .collect();
        if !unreachable.is_empty() {
            return Err(Error::Config(format!(
                "Λ values out of reach of the coupling range at N = {}: {}",
                self.model.n,
                unreachable.join(", ")
            )));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.k_set.is_empty() {
            return Err(Error::Config("k set is empty".into()));
        }
        if self.k_set.contains(&0) {
            return Err(Error::InvalidOrder {
                k: 0,
                reason: "entropy orders start at k = 1",
            });
        }
        if self.k_set.iter().collect::<BTreeSet<_>>().len() != self.k_set.len() {
            return Err(Error::Config("k set has duplicates".into()));
        }
        if self.bases.iter().collect::<BTreeSet<_>>().len() != self.bases.len() {
            return Err(Error::Config("basis list has duplicates".into()));
        }
        Ok(())
    }

    /// Measures reported at every grid point, in output order.
    pub fn measures(&self) -> Vec<Measure> {
        let mut m: Vec<Measure> = self.k_set.iter().map(|&k| Measure::Entropy(k)).collect();
        m.extend(self.k_set.iter().filter(|&&k| k >= 2).map(|&k| Measure::Moment(k)));
        m.extend([Measure::Lambda1, Measure::Lambda2, Measure::PurityTerm]);
        for &b in &self.bases {
            m.extend([Measure::Ipr(b), Measure::RescaledIpr(b), Measure::IprRatio(b)]);
        }
        m
    }
}

/// A reported quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `S_k`, von Neumann for `k = 1`.
    Entropy(u32),
    /// `P_k = Σ λ^k`.
    Moment(u32),
    Lambda1,
    Lambda2,
    /// `1 + <P₂>`.
    PurityTerm,
    Ipr(BasisLabel),
    /// `(N + 1)² IPR / 2`.
    RescaledIpr(BasisLabel),
    /// `Ĩ / (1 + <P₂>)` from spectral averages.
    IprRatio(BasisLabel),
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Entropy(_) => "entropy",
            Measure::Moment(_) => "moment",
            Measure::Lambda1 => "lambda1",
            Measure::Lambda2 => "lambda2",
            Measure::PurityTerm => "purity_term",
            Measure::Ipr(_) => "ipr",
            Measure::RescaledIpr(_) => "rescaled_ipr",
            Measure::IprRatio(_) => "ipr_ratio",
        }
    }

    pub fn k(&self) -> Option<u32> {
        match *self {
            Measure::Entropy(k) | Measure::Moment(k) => Some(k),
            _ => None,
        }
    }

    pub fn basis(&self) -> Option<BasisLabel> {
        match *self {
            Measure::Ipr(b) | Measure::RescaledIpr(b) | Measure::IprRatio(b) => Some(b),
            _ => None,
        }
    }

    /// Inverse of `(name, k, basis)`.
    pub fn from_parts(name: &str, k: Option<u32>, basis: Option<BasisLabel>) -> Result<Self> {
        let m = match (name, k, basis) {
            ("entropy", Some(k), None) => Measure::Entropy(k),
            ("moment", Some(k), None) => Measure::Moment(k),
            ("lambda1", None, None) => Measure::Lambda1,
            ("lambda2", None, None) => Measure::Lambda2,
            ("purity_term", None, None) => Measure::PurityTerm,
            ("ipr", None, Some(b)) => Measure::Ipr(b),
            ("rescaled_ipr", None, Some(b)) => Measure::RescaledIpr(b),
            ("ipr_ratio", None, Some(b)) => Measure::IprRatio(b),
            _ => {
                return Err(Error::Config(format!(
                    "unknown measure `{name}` with k = {k:?}, basis = {basis:?}"
                )))
            }
        };
        Ok(m)
    }

    /// Closed-form expectation at `Λ`, where one is available.
    pub fn theory_value(&self, n: usize, lambda: f64) -> Option<f64> {
        let p2 = || moment_transition(TheoryParams::new(2, n, lambda).ok()?).ok();
        match *self {
            Measure::Entropy(k) => entropy_transition(TheoryParams::new(k, n, lambda).ok()?).ok(),
            Measure::Moment(k) => moment_transition(TheoryParams::new(k, n, lambda).ok()?).ok(),
            Measure::Lambda1 => lambda1_mean(lambda).ok().filter(|f| !f.extrapolated).map(|f| f.value),
            Measure::Lambda2 => (lambda <= LAMBDA2_SERIES_LIMIT)
                .then(|| lambda2_series(lambda).ok())
                .flatten(),
            Measure::PurityTerm | Measure::RescaledIpr(_) => p2().map(|p| 1.0 + p),
            Measure::Ipr(_) => p2().map(|p| 2.0 * (1.0 + p) / ((n + 1) as f64).powi(2)),
            Measure::IprRatio(_) => Some(1.0),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        if let Some(k) = self.k() {
            write!(f, "_{k}")?;
        }
        if let Some(b) = self.basis() {
            write!(f, "[{b}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureStat {
    pub measure: Measure,
    pub mean: f64,
    pub stderr: f64,
    pub theory_value: Option<f64>,
    /// Eigenstates contributing to the mean.
    pub n_samples: usize,
}

/// Spectral averages of one realization; `stderr` is over its eigenstates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationSummary {
    pub realization: usize,
    pub seed: Option<SeedInfo>,
    pub max_residual: f64,
    pub stats: Vec<MeasureStat>,
    pub u_histogram: Histogram,
}

impl RealizationSummary {
    pub fn stat(&self, measure: Measure) -> Option<&MeasureStat> {
        self.stats.iter().find(|s| s.measure == measure)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub sqrt_lambda: f64,
    pub coupling: f64,
    pub stats: Vec<MeasureStat>,
    pub realizations: Vec<RealizationSummary>,
    /// Pooled histogram of `u = √(Λ/λ₂)` over all eigenstates.
    pub u_histogram: Histogram,
}

impl SweepPoint {
    pub fn stat(&self, measure: Measure) -> Option<&MeasureStat> {
        self.stats.iter().find(|s| s.measure == measure)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSeed {
    pub lambda: f64,
    pub realization: usize,
    pub master_seed: u64,
    pub stream_index: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailedTask {
    pub lambda: f64,
    pub realization: usize,
    pub reason: String,
}

/// Provenance: the full configuration, code version and every task seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: SweepConfig,
    pub code_version: String,
    pub seeds: Vec<TaskSeed>,
    pub failed: Vec<FailedTask>,
    pub total_tasks: usize,
}

/// Dense closed-form curve against `√Λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    pub measure: Measure,
    pub sqrt_lambda: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub manifest: Manifest,
    pub points: Vec<SweepPoint>,
    pub theory_curves: Vec<TheoryCurve>,
}

impl SweepResult {
    pub fn config(&self) -> &SweepConfig {
        &self.manifest.config
    }

    pub fn point(&self, lambda: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.lambda == lambda)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream of realization `r` at `Λ`. It depends on the value of `Λ` rather
/// than its grid position, so a point reproduces across different grids.
pub fn task_stream_index(lambda: f64, realization: usize) -> u64 {
    splitmix64(splitmix64(lambda.to_bits()) ^ realization as u64)
}

struct Task {
    point: usize,
    lambda: f64,
    coupling: f64,
    realization: usize,
    seed: Option<SeedInfo>,
}

fn run_task(config: &SweepConfig, bases: &[(BasisLabel, ProductBasis)], task: &Task) -> Result<RealizationSummary> {
    // No clock on wasm32-unknown-unknown.
    let started = (!cfg!(target_family = "wasm")).then(Instant::now);
    let n = config.model.n;
    let mut spec = config.model.with_coupling(task.coupling);
    spec.seed = task.seed;
    let op = spec.build()?;
    let eig = eigendecompose_floquet(&op)?;
    drop(op);

    let mut ks: Vec<u32> = config.k_set.clone();
    if !ks.contains(&2) {
        ks.push(2);
    }
    let measures = config.measures();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(eig.dim()); measures.len()];
    let mut u_histogram = Histogram::new(0.0, U_MAX, U_BINS);
    for j in 0..eig.dim() {
        let state = eig.eigenvector(j);
        let spectrum = schmidt_spectrum(&state, n)?;
        let rec = measure_spectrum(j, &state, &spectrum, &ks, bases)?;
        let p2 = rec.moments[&2];
        for (m, slot) in measures.iter().zip(values.iter_mut()) {
            let v = match *m {
                Measure::Entropy(k) => rec.entropies[&k],
                Measure::Moment(k) => rec.moments[&k],
                Measure::Lambda1 => rec.lambda1,
                Measure::Lambda2 => rec.lambda2,
                Measure::PurityTerm => 1.0 + p2,
                Measure::Ipr(b) => rec.ipr[&b],
                Measure::RescaledIpr(b) => rescaled_ipr(rec.ipr[&b], n),
                Measure::IprRatio(_) => continue,
            };
            slot.push(v);
        }
        if task.lambda > 0.0 {
            u_histogram.push((task.lambda / rec.lambda2).sqrt());
        }
    }

    let mut stats: Vec<MeasureStat> = Vec::with_capacity(measures.len());
    for (m, vals) in measures.iter().zip(&values) {
        if matches!(m, Measure::IprRatio(_)) {
            continue;
        }
        let (mean, stderr) = mean_stderr(vals);
        stats.push(MeasureStat {
            measure: *m,
            mean,
            stderr,
            theory_value: None,
            n_samples: vals.len(),
        });
    }
    for m in &measures {
        if let Measure::IprRatio(b) = *m {
            let find = |q: Measure| stats.iter().find(|s| s.measure == q).cloned().expect("measured");
            let (ipr, purity) = (find(Measure::RescaledIpr(b)), find(Measure::PurityTerm));
            stats.push(MeasureStat {
                measure: *m,
                mean: ipr.mean / purity.mean,
                stderr: ratio_stderr(&ipr, &purity),
                theory_value: None,
                n_samples: ipr.n_samples,
            });
        }
    }
    stats.sort_by_key(|s| measures.iter().position(|m| *m == s.measure));
    log::info!(
        "Λ = {:e}, realization {}: {} states in {:.1?}, max residual {:e}",
        task.lambda,
        task.realization,
        eig.dim(),
        started.map(|t| t.elapsed()).unwrap_or_default(),
        eig.max_residual()
    );
    Ok(RealizationSummary {
        realization: task.realization,
        seed: task.seed,
        max_residual: eig.max_residual(),
        stats,
        u_histogram,
    })
}

/// First-order error propagation for `a / b`, ignoring correlations.
fn ratio_stderr(a: &MeasureStat, b: &MeasureStat) -> f64 {
    let r = a.mean / b.mean;
    r.abs() * ((a.stderr / a.mean).powi(2) + (b.stderr / b.mean).powi(2)).sqrt()
}

fn reduce_point(
    config: &SweepConfig,
    lambda: f64,
    coupling: f64,
    realizations: Vec<RealizationSummary>,
) -> Result<SweepPoint> {
    let first = realizations
        .first()
        .ok_or_else(|| Error::NumericalFailure(format!("every realization at Λ = {lambda} failed")))?;
    let n = config.model.n;
    let count = realizations.len();
    let mut u_histogram = Histogram::new(0.0, U_MAX, U_BINS);
    for r in &realizations {
        u_histogram.merge(&r.u_histogram);
    }
    let mut stats = Vec::with_capacity(first.stats.len());
    for (i, s) in first.stats.iter().enumerate() {
        let means: Vec<f64> = realizations.iter().map(|r| r.stats[i].mean).collect();
        let n_samples = realizations.iter().map(|r| r.stats[i].n_samples).sum();
        let (mean, stderr) = if count >= 2 {
            mean_stderr(&means)
        } else {
            (s.mean, s.stderr)
        };
        stats.push(MeasureStat {
            measure: s.measure,
            mean,
            stderr,
            theory_value: s.measure.theory_value(n, lambda),
            n_samples,
        });
    }
    Ok(SweepPoint {
        lambda,
        sqrt_lambda: lambda.sqrt(),
        coupling,
        stats,
        realizations,
        u_histogram,
    })
}

fn theory_curves(config: &SweepConfig) -> Vec<TheoryCurve> {
    let top = config.lambda_grid.iter().copied().fold(0.0, f64::max);
    let x_max = if top > 0.0 { top.sqrt() } else { 1.0 };
    let xs: Vec<f64> = (0..THEORY_CURVE_POINTS)
        .map(|i| x_max * i as f64 / (THEORY_CURVE_POINTS - 1) as f64)
        .collect();
    let mut measures: Vec<Measure> = config.k_set.iter().map(|&k| Measure::Entropy(k)).collect();
    measures.push(Measure::PurityTerm);
    measures
        .into_iter()
        .map(|m| TheoryCurve {
            measure: m,
            values: xs
                .iter()
                .map(|x| m.theory_value(config.model.n, x * x).unwrap_or(f64::NAN))
                .collect(),
            sqrt_lambda: xs.clone(),
        })
        .collect()
}

/// Runs every `(Λ, realization)` task, in parallel when the `parallel`
/// feature is on, and reduces the results in a fixed order, so the output is
/// independent of the worker count.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let realizations = config.effective_realizations();
    if config.model.kind == ModelKind::KickedRotor && config.realizations > 1 {
        log::info!("the kicked rotor is deterministic; running a single realization per Λ");
    }
    let bases: Vec<(BasisLabel, ProductBasis)> = config
        .bases
        .iter()
        .map(|&b| (b, ProductBasis::resolve(b, &config.model)))
        .collect();

    let mut tasks = Vec::with_capacity(config.lambda_grid.len() * realizations);
    for (point, &lambda) in config.lambda_grid.iter().enumerate() {
        let coupling = coupling_for_lambda(config.model.kind, config.model.n, lambda)?;
        for realization in 0..realizations {
            let seed = (config.model.kind == ModelKind::Rmt).then(|| SeedInfo {
                master_seed: config.master_seed,
                stream_index: task_stream_index(lambda, realization),
            });
            tasks.push(Task {
                point,
                lambda,
                coupling,
                realization,
                seed,
            });
        }
    }

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<RealizationSummary>> = {
        use rayon::prelude::*;
        tasks.par_iter().map(|t| run_task(config, &bases, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<RealizationSummary>> = tasks.iter().map(|t| run_task(config, &bases, t)).collect();

    let mut per_point: Vec<Vec<RealizationSummary>> = vec![Vec::new(); config.lambda_grid.len()];
    let mut failed = Vec::new();
    let mut seeds = Vec::new();
    for (task, outcome) in tasks.iter().zip(outcomes) {
        if let Some(seed) = task.seed {
            seeds.push(TaskSeed {
                lambda: task.lambda,
                realization: task.realization,
                master_seed: seed.master_seed,
                stream_index: seed.stream_index,
            });
        }
        match outcome {
            Ok(summary) => per_point[task.point].push(summary),
            Err(e @ (Error::NumericalFailure(_) | Error::ContractViolation(_))) => {
                log::warn!("Λ = {}, realization {} aborted: {e}", task.lambda, task.realization);
                failed.push(FailedTask {
                    lambda: task.lambda,
                    realization: task.realization,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if !failed.is_empty() {
        log::warn!("{} of {} realizations aborted", failed.len(), tasks.len());
    }
    if failed.len() as f64 > MAX_FAILURE_FRACTION * tasks.len() as f64 {
        return Err(Error::NumericalFailure(format!(
            "{} of {} realizations failed, above the {}% threshold",
            failed.len(),
            tasks.len(),
            MAX_FAILURE_FRACTION * 100.0
        )));
    }

    let mut points = Vec::with_capacity(per_point.len());
    for ((&lambda, summaries), task) in config
        .lambda_grid
        .iter()
        .zip(per_point)
        .zip(tasks.iter().step_by(realizations))
    {
        points.push(reduce_point(config, lambda, task.coupling, summaries)?);
    }
    Ok(SweepResult {
        manifest: Manifest {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            failed,
            total_tasks: tasks.len(),
        },
        points,
        theory_curves: theory_curves(config),
    })
}

/// Standard deviation of a measure's realization means at one point.
pub(crate) fn realization_spread(point: &SweepPoint, measure: Measure) -> Option<f64> {
    let means: Vec<f64> = point
        .realizations
        .iter()
        .filter_map(|r| r.stat(measure).map(|s| s.mean))
        .collect();
    (means.len() >= 2).then(|| std_dev(&means))
}
