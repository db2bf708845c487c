//! Deterministic random streams and Haar-distributed sampling.
//!
//! Every stream is a ChaCha20 generator keyed by `master_seed` (expanded with
//! the portable `seed_from_u64` routine of `rand_core`) and positioned on the
//! ChaCha stream `stream_index`. The keystream is fixed by the cipher, so a
//! `(master_seed, stream_index)` pair yields the same numbers on every
//! platform and in every worker thread.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reproducible random stream labelled by `(master_seed, stream_index)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "StreamState", from = "StreamState")]
pub struct RandomStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha20Rng,
}

/// Serializable position of a [`RandomStream`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamState {
    pub master_seed: u64,
    pub stream_index: u64,
    /// Position in the keystream, in 32-bit words.
    pub word_pos: u128,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn state(&self) -> StreamState {
        StreamState {
            master_seed: self.master_seed,
            stream_index: self.stream_index,
            word_pos: self.rng.get_word_pos(),
        }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly symmetric complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let re: f64 = self.standard_normal();
        let im: f64 = self.standard_normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Exponential draw with the given rate, strictly positive.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        // 1 - u lies in (0, 1], so the logarithm is finite.
        -(1.0 - self.uniform()).ln() / rate
    }
}

impl From<StreamState> for RandomStream {
    fn from(state: StreamState) -> Self {
        let mut stream = RandomStream::new(state.master_seed, state.stream_index);
        stream.rng.set_word_pos(state.word_pos);
        stream
    }
}

impl From<RandomStream> for StreamState {
    fn from(stream: RandomStream) -> Self {
        stream.state()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Square matrix with `U U^† = I` up to roundoff.
#[derive(Clone, Debug)]
pub struct UnitaryMatrix(Mat<C64>);

impl UnitaryMatrix {
    /// Default acceptance threshold for [`UnitaryMatrix::new`].
    pub const TOLERANCE: f64 = 1e-10;

    /// Wraps `mat` after checking squareness and unitarity.
    pub fn new(mat: Mat<C64>) -> Result<Self> {
        Self::with_tolerance(mat, Self::TOLERANCE)
    }

    pub fn with_tolerance(mat: Mat<C64>, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::InvalidDimension {
                got: 0,
                reason: "unitary matrices need at least one row",
            });
        }
        let residual = unitarity_residual(&mat);
        if !(residual <= tol) {
            return Err(Error::ContractViolation(format!(
                "matrix is not unitary: max |U U^† - I| = {residual:e} > {tol:e}"
            )));
        }
        Ok(Self(mat))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn new_unchecked(mat: Mat<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self(mat)
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.0
    }

    pub fn into_inner(self) -> Mat<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.0)
    }
}

/// Max absolute entry of `U U^† - I`.
pub fn unitarity_residual(mat: &Mat<C64>) -> f64 {
    let prod = mat * mat.adjoint();
    let mut worst = 0.0f64;
    for j in 0..prod.ncols() {
        for i in 0..prod.nrows() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

fn check_dim(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidDimension {
            got: n,
            reason: "need n >= 1",
        });
    }
    Ok(())
}

/// Draws an `n x n` matrix from the circular unitary ensemble.
///
/// A complex Ginibre matrix is QR-factorized and each column of `Q` is
/// multiplied by the phase of the matching diagonal entry of `R`, which makes
/// the factorization unique and the result Haar distributed.
pub fn sample_cue(n: usize, stream: &mut RandomStream) -> Result<UnitaryMatrix> {
    check_dim(n)?;
    let ginibre = Mat::<C64>::from_fn(n, n, |_, _| stream.complex_normal());
    let qr = ginibre.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..n {
        let d = r[(j, j)];
        let modulus = d.norm();
        let phase = if modulus > 0.0 { d / modulus } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix(q))
}

/// Independent uniform draws on `(-1/2, 1/2]`, entry `(k, l)` drawn in
/// row-major order.
pub fn sample_interaction_phases(n: usize, stream: &mut RandomStream) -> Result<Mat<f64>> {
    check_dim(n)?;
    let mut xi = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            // u in [0, 1) maps onto (-1/2, 1/2].
            xi[(k, l)] = 0.5 - stream.uniform();
        }
    }
    Ok(xi)
}

/// Unit vector distributed uniformly on the complex sphere in `C^n`.
pub fn sample_haar_state(n: usize, stream: &mut RandomStream) -> Result<Vec<C64>> {
    check_dim(n)?;
    let mut psi: Vec<C64> = (0..n).map(|_| stream.complex_normal()).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(psi)
}
