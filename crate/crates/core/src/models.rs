//! Bipartite Floquet operators `(U1 ⊗ U2) · U12` and the transition parameter.
//!
//! Full-space index convention: the basis state `|k>|l>` sits at `k * n + l`,
//! so reshaping a state row-major gives the coefficient matrix with rows
//! labelled by subsystem 1.

use std::f64::consts::PI;

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{sample_cue, sample_interaction_phases, RandomStream, UnitaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rmt,
    KickedRotor,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Rmt => "rmt",
            ModelKind::KickedRotor => "kicked_rotor",
        })
    }
}

/// Bloch phases `(θ_q, θ_p)` of one torus-quantized subsystem, serialized as a
/// two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct BoundaryPhases {
    pub theta_q: f64,
    pub theta_p: f64,
}

impl BoundaryPhases {
    pub const fn new(theta_q: f64, theta_p: f64) -> Self {
        Self { theta_q, theta_p }
    }

    fn is_generic(&self) -> bool {
        let bad = |t: f64| {
            let frac = t.rem_euclid(1.0);
            frac.abs() < 1e-12 || (frac - 0.5).abs() < 1e-12 || (frac - 1.0).abs() < 1e-12
        };
        self.theta_q.is_finite() && self.theta_p.is_finite() && !bad(self.theta_q) && !bad(self.theta_p)
    }
}

impl From<[f64; 2]> for BoundaryPhases {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<BoundaryPhases> for [f64; 2] {
    fn from(p: BoundaryPhases) -> Self {
        [p.theta_q, p.theta_p]
    }
}

pub const DEFAULT_KICKS: (f64, f64) = (9.0, 10.0);
pub const DEFAULT_PHASES: [BoundaryPhases; 2] =
    [BoundaryPhases::new(0.3157, 0.2021), BoundaryPhases::new(0.2743, 0.1811)];

/// Seed of the stream that draws an RMT realization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedInfo {
    pub fn stream(&self) -> RandomStream {
        RandomStream::new(self.master_seed, self.stream_index)
    }
}

/// Which model, at which coupling, on which Hilbert space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n: usize,
    /// `ε ∈ [0, 1]` for the RMT ensemble, `b ≥ 0` for the kicked rotors.
    #[serde(default)]
    pub coupling: f64,
    #[serde(default)]
    pub kick_strengths: Option<(f64, f64)>,
    #[serde(default)]
    pub boundary_phases: Option<[BoundaryPhases; 2]>,
    #[serde(default)]
    pub seed: Option<SeedInfo>,
}

impl ModelSpec {
    pub fn rmt(n: usize, epsilon: f64, seed: SeedInfo) -> Self {
        Self {
            kind: ModelKind::Rmt,
            n,
            coupling: epsilon,
            kick_strengths: None,
            boundary_phases: None,
            seed: Some(seed),
        }
    }

    /// Kicked rotors with the default kicks `K = (9, 10)` and default Bloch phases.
    pub fn kicked_rotor(n: usize, b: f64) -> Self {
        Self {
            kind: ModelKind::KickedRotor,
            n,
            coupling: b,
            kick_strengths: Some(DEFAULT_KICKS),
            boundary_phases: Some(DEFAULT_PHASES),
            seed: None,
        }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self {
            coupling,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidDimension {
                got: self.n,
                reason: "subsystem dimension must be at least 2",
            });
        }
        match self.kind {
            ModelKind::Rmt => {
                if !(0.0..=1.0).contains(&self.coupling) {
                    return Err(Error::InvalidCoupling {
                        value: self.coupling,
                        reason: "RMT coupling must lie in [0, 1]",
                    });
                }
            }
            ModelKind::KickedRotor => {
                if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
                    return Err(Error::InvalidCoupling {
                        value: self.coupling,
                        reason: "kicked-rotor coupling must be finite and non-negative",
                    });
                }
                let (k1, k2) = self.kicks();
                if !(k1 >= 0.0 && k2 >= 0.0) {
                    return Err(Error::Config(format!(
                        "kick strengths ({k1}, {k2}) must be non-negative"
                    )));
                }
                if !self.phases().iter().all(BoundaryPhases::is_generic) {
                    return Err(Error::Config(
                        "boundary phases must avoid 0 and 1/2 to break parity and time reversal".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn kicks(&self) -> (f64, f64) {
        self.kick_strengths.unwrap_or(DEFAULT_KICKS)
    }

    pub fn phases(&self) -> [BoundaryPhases; 2] {
        self.boundary_phases.unwrap_or(DEFAULT_PHASES)
    }

    /// Builds the operator; RMT specs draw from their own seed.
    pub fn build(&self) -> Result<FloquetOperator> {
        match self.kind {
            ModelKind::Rmt => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Config("RMT model spec carries no seed".into()))?;
                build_rmt_floquet(self, &mut seed.stream())
            }
            ModelKind::KickedRotor => build_kr_floquet(self),
        }
    }
}

/// Floquet operator kept both densely and in factored form.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    n: usize,
    u1: UnitaryMatrix,
    u2: UnitaryMatrix,
    /// Interaction eigenphases; the diagonal of `U12` is `exp(i θ)` at `k * n + l`.
    interaction: Vec<f64>,
    full: Mat<C64>,
}

impl FloquetOperator {
    pub fn from_factors(u1: UnitaryMatrix, u2: UnitaryMatrix, interaction: Vec<f64>) -> Result<Self> {
        let n = u1.dim();
        if u2.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u2.dim(),
            });
        }
        if interaction.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: interaction.len(),
            });
        }
        let full = assemble(&u1, &u2, &interaction);
        Ok(Self {
            n,
            u1,
            u2,
            interaction,
            full,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn u1(&self) -> &UnitaryMatrix {
        &self.u1
    }

    pub fn u2(&self) -> &UnitaryMatrix {
        &self.u2
    }

    pub fn interaction_phases(&self) -> &[f64] {
        &self.interaction
    }

    pub fn interaction_diagonal(&self) -> Vec<C64> {
        self.interaction.iter().map(|&t| C64::from_polar(1.0, t)).collect()
    }

    pub fn full_matrix(&self) -> &Mat<C64> {
        &self.full
    }

    /// Applies the operator to every column of `v` through the factors:
    /// each column, reshaped to `X[k][l]`, maps to `U1 · (D ∘ X) · U2^T`.
    pub fn apply_factored(&self, v: MatRef<'_, C64>) -> Mat<C64> {
        let n = self.n;
        assert_eq!(v.nrows(), n * n, "operand has wrong row count");
        let diag = self.interaction_diagonal();
        let u1 = self.u1.as_mat();
        let u2t = self.u2.as_mat().transpose().to_owned();
        let mut out = Mat::<C64>::zeros(n * n, v.ncols());
        let mut x = Mat::<C64>::zeros(n, n);
        for j in 0..v.ncols() {
            let col = v.col(j);
            for k in 0..n {
                for l in 0..n {
                    x[(k, l)] = diag[k * n + l] * col[k * n + l];
                }
            }
            let y = u1 * (&x * &u2t);
            for k in 0..n {
                for l in 0..n {
                    out[(k * n + l, j)] = y[(k, l)];
                }
            }
        }
        out
    }

    /// Max entrywise deviation between the stored matrix and a fresh assembly
    /// from the factors.
    pub fn factor_consistency(&self) -> f64 {
        let again = assemble(&self.u1, &self.u2, &self.interaction);
        max_abs_diff(self.full.as_ref(), again.as_ref())
    }
}

fn assemble(u1: &UnitaryMatrix, u2: &UnitaryMatrix, interaction: &[f64]) -> Mat<C64> {
    let n = u1.dim();
    let (a, b) = (u1.as_mat(), u2.as_mat());
    let diag: Vec<C64> = interaction.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    Mat::from_fn(n * n, n * n, |row, col| {
        let (k, l) = (row / n, row % n);
        let (kp, lp) = (col / n, col % n);
        a[(k, kp)] * b[(l, lp)] * diag[col]
    })
}

pub(crate) fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// RMT operator: two independent CUE factors and the diagonal interaction
/// `exp(2πi ε ξ_kl)`. The stream is consumed in the order U1, U2, ξ.
pub fn build_rmt_floquet(spec: &ModelSpec, stream: &mut RandomStream) -> Result<FloquetOperator> {
    if spec.kind != ModelKind::Rmt {
        return Err(Error::Config("build_rmt_floquet needs an RMT spec".into()));
    }
    spec.validate()?;
    let n = spec.n;
    let u1 = sample_cue(n, stream)?;
    let u2 = sample_cue(n, stream)?;
    let xi = sample_interaction_phases(n, stream)?;
    let eps = spec.coupling;
    let mut interaction = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            interaction.push(2.0 * PI * eps * xi[(k, l)]);
        }
    }
    FloquetOperator::from_factors(u1, u2, interaction)
}

/// Phase-offset DFT from position to momentum amplitudes,
/// `F[k][m] = exp(-2πi (m + θ_q)(k + θ_p) / N) / √N`.
pub fn phased_dft(n: usize, phases: BoundaryPhases) -> Mat<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n, n, |k, m| {
        let arg = -2.0 * PI * (m as f64 + phases.theta_q) * (k as f64 + phases.theta_p) / n as f64;
        C64::from_polar(scale, arg)
    })
}

/// Columns are the momentum eigenstates written in the position basis.
pub fn momentum_basis(n: usize, phases: BoundaryPhases) -> UnitaryMatrix {
    UnitaryMatrix::new_unchecked(phased_dft(n, phases).adjoint().to_owned())
}

/// One kicked rotor on the torus with `ħ = 1/(2πN)`, in the position basis:
/// `F^† · diag(exp(-i p_k²/2ħ)) · F · diag(exp(-i K cos(2π q_m) / (4π² ħ)))`.
pub fn build_kr_subsystem(n: usize, kick: f64, phases: BoundaryPhases) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            got: n,
            reason: "kicked rotor needs N >= 2",
        });
    }
    if !(kick >= 0.0) {
        return Err(Error::Config(format!("kick strength {kick} must be non-negative")));
    }
    let nf = n as f64;
    let f = phased_dft(n, phases);
    // p^2 / (2ħ) with p = (k + θ_p)/N.
    let kinetic: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, -PI * (k as f64 + phases.theta_p).powi(2) / nf))
        .collect();
    // V / ħ with V = K cos(2π q) / 4π².
    let potential: Vec<C64> = (0..n)
        .map(|m| {
            let q = (m as f64 + phases.theta_q) / nf;
            C64::from_polar(1.0, -kick * nf * (2.0 * PI * q).cos() / (2.0 * PI))
        })
        .collect();
    let kf = Mat::from_fn(n, n, |k, m| kinetic[k] * f[(k, m)] * potential[m]);
    let u = f.adjoint() * &kf;
    Ok(UnitaryMatrix::new_unchecked(u))
}

/// Coupled kicked rotors; the interaction `b cos[2π(q1 + q2)] / 4π²` is
/// diagonal on the product position grid.
pub fn build_kr_floquet(spec: &ModelSpec) -> Result<FloquetOperator> {
    if spec.kind != ModelKind::KickedRotor {
        return Err(Error::Config("build_kr_floquet needs a kicked-rotor spec".into()));
    }
    spec.validate()?;
    let n = spec.n;
    let nf = n as f64;
    let (k1, k2) = spec.kicks();
    let [p1, p2] = spec.phases();
    let u1 = build_kr_subsystem(n, k1, p1)?;
    let u2 = build_kr_subsystem(n, k2, p2)?;
    let b = spec.coupling;
    let mut interaction = Vec::with_capacity(n * n);
    for k in 0..n {
        let q1 = (k as f64 + p1.theta_q) / nf;
        for l in 0..n {
            let q2 = (l as f64 + p2.theta_q) / nf;
            interaction.push(-b * nf * (2.0 * PI * (q1 + q2)).cos() / (2.0 * PI));
        }
    }
    FloquetOperator::from_factors(u1, u2, interaction)
}

/// Mean-square interaction matrix element over the squared mean level
/// spacing: `ε² N² / 12` or `N⁴ b² / (32 π⁴)`.
pub fn transition_parameter(spec: &ModelSpec) -> Result<f64> {
    spec.validate()?;
    Ok(lambda_from_coupling(spec.kind, spec.n, spec.coupling))
}

fn lambda_from_coupling(kind: ModelKind, n: usize, coupling: f64) -> f64 {
    let nf = n as f64;
    match kind {
        ModelKind::Rmt => coupling * coupling * nf * nf / 12.0,
        ModelKind::KickedRotor => nf.powi(4) * coupling * coupling / (32.0 * PI.powi(4)),
    }
}

/// Inverse of [`transition_parameter`].
pub fn coupling_for_lambda(kind: ModelKind, n: usize, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::OutOfRange {
            value: lambda,
            reason: "transition parameter must be finite and non-negative".into(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidDimension {
            got: n,
            reason: "subsystem dimension must be at least 2",
        });
    }
    let nf = n as f64;
    match kind {
        ModelKind::Rmt => {
            let eps = (12.0 * lambda).sqrt() / nf;
            if eps > 1.0 {
                return Err(Error::OutOfRange {
                    value: lambda,
                    reason: format!("RMT coupling ε = {eps} would exceed 1 at N = {n}"),
                });
            }
            Ok(eps)
        }
        ModelKind::KickedRotor => Ok((32.0 * PI.powi(4) * lambda).sqrt() / (nf * nf)),
    }
}
