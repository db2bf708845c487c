//! WebAssembly bindings for the static demo in `www/`.
//!
//! Every export returns a JSON string; the plain Rust functions behind them
//! are what the native tests exercise.

use entangle_core::harness::{run_sweep, theory_cells, Measure, SweepConfig, U_BINS, U_MAX};
use entangle_core::models::{ModelSpec, SeedInfo};
use entangle_core::oracle::sample_u;
use entangle_core::stats::Histogram;
use entangle_core::theory::{asymptotic_entropy, entropy_transition, TheoryParams};
use entangle_core::{RandomStream, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest subsystem dimension the in-browser simulation accepts.
pub const MAX_DEMO_N: usize = 24;
/// Cap on oracle draws per request.
pub const MAX_DRAWS: usize = 2_000_000;

#[derive(Debug, Serialize)]
pub struct EntropyCurve {
    pub k: u32,
    pub sqrt_lambda: Vec<f64>,
    pub entropy: Vec<f64>,
    pub saturation: f64,
}

/// Closed-form entropies `S_k(Λ)` for `k = 1..=k_max` on `points` values of
/// `√Λ` in `[0, sqrt_lambda_max]`.
pub fn entropy_curves(n: usize, k_max: u32, sqrt_lambda_max: f64, points: usize) -> Result<Vec<EntropyCurve>> {
    let points = points.max(2);
    let xs: Vec<f64> = (0..points)
        .map(|i| sqrt_lambda_max * i as f64 / (points - 1) as f64)
        .collect();
    (1..=k_max)
        .map(|k| {
            let entropy = xs
                .iter()
                .map(|x| entropy_transition(TheoryParams::new(k, n, x * x)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropyCurve {
                k,
                sqrt_lambda: xs.clone(),
                entropy,
                saturation: asymptotic_entropy(k, n)?,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SimulatedEntropy {
    pub k: u32,
    pub mean: f64,
    pub stderr: f64,
    pub theory: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Simulation {
    pub n: usize,
    pub lambda: f64,
    pub realizations: usize,
    pub entropies: Vec<SimulatedEntropy>,
    pub lambda1: f64,
    pub lambda1_stderr: f64,
}

/// Eigenstate entropies of the RMT ensemble at one `Λ`, averaged over
/// eigenstates and `realizations` draws.
pub fn simulate_rmt(n: usize, lambda: f64, realizations: usize, seed: u64) -> Result<Simulation> {
    if n > MAX_DEMO_N {
        return Err(entangle_core::Error::Config(format!(
            "the demo runs N ≤ {MAX_DEMO_N}, got {n}"
        )));
    }
    let mut cfg = SweepConfig::new(ModelSpec::rmt(n, 0.0, SeedInfo::default()))
        .with_grid(vec![lambda])
        .with_realizations(realizations)
        .with_seed(seed);
    cfg.bases.clear();
    let result = run_sweep(&cfg)?;
    let point = &result.points[0];
    let entropies = cfg
        .k_set
        .iter()
        .filter_map(|&k| {
            point.stat(Measure::Entropy(k)).map(|s| SimulatedEntropy {
                k,
                mean: s.mean,
                stderr: s.stderr,
                theory: s.theory_value,
            })
        })
        .collect();
    let l1 = point
        .stat(Measure::Lambda1)
        .ok_or_else(|| entangle_core::Error::ContractViolation("λ₁ missing from sweep".into()))?;
    Ok(Simulation {
        n,
        lambda,
        realizations,
        entropies,
        lambda1: l1.mean,
        lambda1_stderr: l1.stderr,
    })
}

#[derive(Debug, Serialize)]
pub struct UHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub theory: Vec<f64>,
    pub draws: usize,
}

/// Histogram of `u` drawn from the two-level perturbative model, next to the
/// universal density averaged over each bin.
pub fn u_histogram(lambda: f64, draws: usize, seed: u64) -> Result<UHistogram> {
    if draws == 0 || draws > MAX_DRAWS {
        return Err(entangle_core::Error::Config(format!(
            "draws must be in 1..={MAX_DRAWS}"
        )));
    }
    let mut stream = RandomStream::new(seed, 0);
    let mut h = Histogram::new(0.0, U_MAX, U_BINS);
    for _ in 0..draws {
        h.push(sample_u(lambda, &mut stream)?);
    }
    let width = h.width();
    let theory = theory_cells(U_BINS, U_MAX)?
        .into_iter()
        .take(U_BINS)
        .map(|p| p / width)
        .collect();
    let density = h.counts.iter().map(|&c| c as f64 / (draws as f64 * width)).collect();
    Ok(UHistogram {
        edges: h.edges(),
        density,
        theory,
        draws,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = entropyCurves)]
pub fn entropy_curves_js(n: usize, k_max: u32, sqrt_lambda_max: f64, points: usize) -> Result<String, JsError> {
    to_js(entropy_curves(n, k_max, sqrt_lambda_max, points))
}

#[wasm_bindgen(js_name = simulateRmt)]
pub fn simulate_rmt_js(n: usize, lambda: f64, realizations: usize, seed: u64) -> Result<String, JsError> {
    to_js(simulate_rmt(n, lambda, realizations, seed))
}

#[wasm_bindgen(js_name = uHistogram)]
pub fn u_histogram_js(lambda: f64, draws: usize, seed: u64) -> Result<String, JsError> {
    to_js(u_histogram(lambda, draws, seed))
}
