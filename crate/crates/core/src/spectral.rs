//! Spectral primitives: unitary eigendecomposition, Schmidt spectra and
//! product-basis transforms.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::models::FloquetOperator;
use crate::rng::UnitaryMatrix;

/// Residual bound every returned eigenpair satisfies.
pub const RESIDUAL_BOUND: f64 = 1e-10;
/// Residual level the pairwise refinement aims for.
const REFINE_TARGET: f64 = 1e-11;
const MAX_REFINE_SWEEPS: usize = 64;
/// Allowed deviation of a state norm from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Complete eigenbasis of a unitary, sorted by eigenphase.
#[derive(Clone, Debug)]
pub struct EigenstateSet {
    eigenphases: Vec<f64>,
    eigenvectors: Mat<C64>,
    residuals: Vec<f64>,
}

impl EigenstateSet {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    /// Subsystem dimension when the space is a square product space.
    pub fn subsystem_dim(&self) -> Option<usize> {
        let d = self.dim();
        let n = (d as f64).sqrt().round() as usize;
        (n * n == d).then_some(n)
    }

    /// Eigenphases in `(-π, π]`, ascending.
    pub fn eigenphases(&self) -> &[f64] {
        &self.eigenphases
    }

    /// Column `j` is the eigenvector of `eigenphases()[j]`.
    pub fn eigenvectors(&self) -> &Mat<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, j: usize) -> Vec<C64> {
        let col = self.eigenvectors.col(j);
        (0..col.nrows()).map(|i| col[i]).collect()
    }

    /// `‖U v_j - e^{iφ_j} v_j‖₂` for each eigenpair.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a dense unitary matrix.
pub fn eigendecompose_unitary(u: &UnitaryMatrix) -> Result<EigenstateSet> {
    let residual = u.residual();
    if !(residual <= UnitaryMatrix::TOLERANCE) {
        return Err(Error::ContractViolation(format!(
            "eigendecomposition needs a unitary input, max |U U^† - I| = {residual:e}"
        )));
    }
    let mat = u.as_mat();
    decompose(mat.as_ref(), |v| mat * v)
}

/// Eigendecomposition of a Floquet operator, applying it through its factors.
pub fn eigendecompose_floquet(op: &FloquetOperator) -> Result<EigenstateSet> {
    let residual = op.u1().residual().max(op.u2().residual());
    if !(residual <= UnitaryMatrix::TOLERANCE) {
        return Err(Error::ContractViolation(format!(
            "Floquet factors are not unitary: residual {residual:e}"
        )));
    }
    decompose(op.full_matrix().as_ref(), |v| op.apply_factored(v))
}

/// A unitary `U` is normal, so it shares its eigenvectors with the Hermitian
/// part `(U + U^†)/2`. The Hermitian solver cannot separate eigenphases `φ`
/// and `φ'` whose cosines nearly coincide, so the few eigenvectors that come
/// back mixed are untangled afterwards with 2x2 unitary rotations of the
/// Rayleigh matrix `V^† U V` until every residual is below target.
fn decompose<F>(dense: MatRef<'_, C64>, apply: F) -> Result<EigenstateSet>
where
    F: Fn(MatRef<'_, C64>) -> Mat<C64>,
{
    let dim = dense.nrows();
    if dim == 0 || dense.ncols() != dim {
        return Err(Error::InvalidDimension {
            got: dim,
            reason: "eigendecomposition needs a non-empty square matrix",
        });
    }
    let hermitian = Mat::<C64>::from_fn(dim, dim, |i, j| (dense[(i, j)] + dense[(j, i)].conj()) * 0.5);
    let evd = hermitian
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalFailure(format!("Hermitian eigensolver failed: {e:?}")))?;
    let mut v = evd.U().to_owned();
    let mut w = apply(v.as_ref());

    let mut rayleigh: Vec<C64> = (0..dim).map(|j| column_dot(&v, j, &w, j)).collect();
    let mut residuals: Vec<f64> = (0..dim).map(|j| column_residual(&v, &w, j, rayleigh[j])).collect();

    for _ in 0..MAX_REFINE_SWEEPS {
        let mut bad: Vec<usize> = (0..dim).filter(|&j| residuals[j] > REFINE_TARGET).collect();
        if bad.is_empty() {
            break;
        }
        bad.sort_by(|&a, &b| residuals[b].total_cmp(&residuals[a]));
        let mut progressed = false;
        for j in bad {
            if residuals[j] <= REFINE_TARGET {
                continue;
            }
            // Partner: the column that carries most of U v_j's leakage.
            let Some(i) = (0..dim)
                .filter(|&i| i != j)
                .map(|i| (i, column_dot(&v, i, &w, j).norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
            else {
                continue;
            };
            let block = [
                [column_dot(&v, i, &w, i), column_dot(&v, i, &w, j)],
                [column_dot(&v, j, &w, i), column_dot(&v, j, &w, j)],
            ];
            let g = diagonalize_2x2(block);
            rotate_columns(&mut v, i, j, &g);
            rotate_columns(&mut w, i, j, &g);
            for idx in [i, j] {
                rayleigh[idx] = column_dot(&v, idx, &w, idx);
                let before = residuals[idx];
                residuals[idx] = column_residual(&v, &w, idx, rayleigh[idx]);
                progressed |= residuals[idx] < before;
            }
        }
        if !progressed {
            break;
        }
    }

    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst < RESIDUAL_BOUND) {
        return Err(Error::NumericalFailure(format!(
            "eigenpair residual {worst:e} exceeds {RESIDUAL_BOUND:e} after refinement"
        )));
    }

    let phases: Vec<f64> = rayleigh.iter().map(|z| principal_phase(z.arg())).collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let eigenvectors = Mat::from_fn(dim, dim, |r, c| v[(r, order[c])]);
    Ok(EigenstateSet {
        eigenphases: order.iter().map(|&j| phases[j]).collect(),
        eigenvectors,
        residuals: order.iter().map(|&j| residuals[j]).collect(),
    })
}

fn principal_phase(phase: f64) -> f64 {
    if phase <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        phase
    }
}

fn column_dot(a: &Mat<C64>, i: usize, b: &Mat<C64>, j: usize) -> C64 {
    let (x, y) = (a.col(i), b.col(j));
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..x.nrows() {
        acc += x[r].conj() * y[r];
    }
    acc
}

fn column_residual(v: &Mat<C64>, w: &Mat<C64>, j: usize, mu: C64) -> f64 {
    let (x, y) = (v.col(j), w.col(j));
    let mut acc = 0.0;
    for r in 0..x.nrows() {
        acc += (y[r] - mu * x[r]).norm_sqr();
    }
    acc.sqrt()
}

/// Unitary `G` whose columns are the eigenvectors of a (nearly) normal 2x2
/// matrix.
fn diagonalize_2x2(b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let [[a, bb], [c, d]] = b;
    let disc = ((a - d) * (a - d) + 4.0 * bb * c).sqrt();
    let mu = (a + d + disc) * 0.5;
    let cand1 = [bb, mu - a];
    let cand2 = [mu - d, c];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (x, norm) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    if !(norm > 1e-300) {
        return [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
    }
    let s = norm.sqrt();
    let (x0, x1) = (x[0] / s, x[1] / s);
    [[x0, -x1.conj()], [x1, x0.conj()]]
}

/// `[col_i, col_j] <- [col_i, col_j] · G`.
fn rotate_columns(m: &mut Mat<C64>, i: usize, j: usize, g: &[[C64; 2]; 2]) {
    for r in 0..m.nrows() {
        let (a, b) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = a * g[0][0] + b * g[1][0];
        m[(r, j)] = a * g[0][1] + b * g[1][1];
    }
}

/// Reduced-density-matrix spectrum of a bipartite pure state, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    weights: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates and sorts externally supplied weights.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySample("Schmidt spectrum needs at least one weight"));
        }
        for w in weights.iter_mut() {
            if !(*w >= -1e-14) {
                return Err(Error::ContractViolation(format!("negative Schmidt weight {w}")));
            }
            *w = w.max(0.0);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::ContractViolation(format!("Schmidt weights sum to {total}")));
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest weight.
    pub fn lambda1(&self) -> f64 {
        self.weights[0]
    }

    /// Second largest weight (zero for a single-level spectrum).
    pub fn lambda2(&self) -> f64 {
        self.weights.get(1).copied().unwrap_or(0.0)
    }
}

fn check_state(state: &[C64], n: usize) -> Result<()> {
    if n == 0 || state.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: state.len(),
        });
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::NormViolation {
            norm,
            tol: NORM_TOLERANCE,
        });
    }
    Ok(())
}

/// Row-major `n x n` coefficient matrix of a bipartite state.
pub fn coefficient_matrix(state: &[C64], n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |k, l| state[k * n + l])
}

/// Schmidt weights from the singular values of the coefficient matrix.
pub fn schmidt_spectrum(state: &[C64], n: usize) -> Result<SchmidtSpectrum> {
    check_state(state, n)?;
    let c = coefficient_matrix(state, n);
    let sv = c
        .singular_values()
        .map_err(|e| Error::NumericalFailure(format!("SVD failed: {e:?}")))?;
    let mut weights: Vec<f64> = sv.iter().map(|s| s * s).collect();
    // Absorb the (at most 1e-10) norm defect so the weights sum to one.
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w = (*w / total).max(0.0));
    weights.sort_by(|a, b| b.total_cmp(a));
    Ok(SchmidtSpectrum { weights })
}

/// `ρ = tr₂ |ψ><ψ| = C C^†`.
pub fn reduced_density_matrix(state: &[C64], n: usize) -> Result<Mat<C64>> {
    check_state(state, n)?;
    let c = coefficient_matrix(state, n);
    Ok(&c * c.adjoint())
}

/// Amplitudes of `state` in the product basis whose vectors are the columns
/// of `b1 ⊗ b2`, i.e. `(b1 ⊗ b2)^† ψ`.
pub fn product_basis_transform(state: &[C64], b1: &UnitaryMatrix, b2: &UnitaryMatrix) -> Result<Vec<C64>> {
    let n = b1.dim();
    if b2.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b2.dim(),
        });
    }
    if state.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: state.len(),
        });
    }
    let c = coefficient_matrix(state, n);
    let out = b1.as_mat().adjoint() * (&c * b2.as_mat().conjugate());
    let mut psi = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            psi.push(out[(k, l)]);
        }
    }
    Ok(psi)
}
