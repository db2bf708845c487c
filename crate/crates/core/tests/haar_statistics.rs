use entangle_core::rng::{sample_cue, sample_haar_state, unitarity_residual, RandomStream};
use entangle_core::spectral::eigendecompose_unitary;
use entangle_core::stats::{chi2_goodness_of_fit, chi2_homogeneity, mean_stderr};
use entangle_core::C64;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn trace(m: &Mat<C64>) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Independent Haar sampler: modified Gram-Schmidt on Ginibre columns drawn
/// from a different generator.
fn gram_schmidt_unitary(n: usize, rng: &mut ChaCha8Rng) -> Mat<C64> {
    let mut m = Mat::<C64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    for j in 0..n {
        for i in 0..j {
            let dot: C64 = (0..n).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
            for r in 0..n {
                let v = m[(r, i)];
                m[(r, j)] -= dot * v;
            }
        }
        let norm = (0..n).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            m[(r, j)] /= norm;
        }
    }
    m
}

/// Cell probabilities of `|U_11|²` under Haar measure, `P(x) = 1 - (1 - x)^{n-1}`.
fn beta_cells(n: usize, bins: usize) -> Vec<f64> {
    let cdf = |x: f64| 1.0 - (1.0 - x).powi(n as i32 - 1);
    (0..bins)
        .map(|i| cdf((i + 1) as f64 / bins as f64) - cdf(i as f64 / bins as f64))
        .collect()
}

fn bin(x: f64, bins: usize) -> usize {
    ((x * bins as f64) as usize).min(bins - 1)
}

#[test]
fn mean_squared_trace_is_one() {
    let mut s = RandomStream::new(101, 0);
    let vals: Vec<f64> = (0..4000)
        .map(|_| trace(sample_cue(10, &mut s).unwrap().as_mat()).norm_sqr())
        .collect();
    let (mean, se) = mean_stderr(&vals);
    assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn matches_gram_schmidt_sampler() {
    let n = 6;
    let bins = 12;
    let mut s = RandomStream::new(102, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut ours = vec![0u64; bins];
    let mut oracle = vec![0u64; bins];
    for _ in 0..5000 {
        ours[bin(sample_cue(n, &mut s).unwrap().as_mat()[(0, 0)].norm_sqr(), bins)] += 1;
        let g = gram_schmidt_unitary(n, &mut rng);
        assert!(unitarity_residual(&g) < 1e-12);
        oracle[bin(g[(0, 0)].norm_sqr(), bins)] += 1;
    }
    let p = chi2_homogeneity(&ours, &oracle).unwrap();
    assert!(p > 0.01, "p = {p}");
    let p = chi2_goodness_of_fit(&ours, &beta_cells(n, bins)).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn left_and_right_invariance() {
    let n = 5;
    let bins = 10;
    let mut s = RandomStream::new(103, 0);
    let v = sample_cue(n, &mut s).unwrap();
    let w = sample_cue(n, &mut s).unwrap();
    let mut left = vec![0u64; bins];
    let mut right = vec![0u64; bins];
    for _ in 0..5000 {
        let u = sample_cue(n, &mut s).unwrap();
        let vu = v.as_mat() * u.as_mat();
        let uw = u.as_mat() * w.as_mat();
        left[bin(vu[(2, 3)].norm_sqr(), bins)] += 1;
        right[bin(uw[(0, 4)].norm_sqr(), bins)] += 1;
    }
    let cells = beta_cells(n, bins);
    for counts in [&left, &right] {
        let p = chi2_goodness_of_fit(counts, &cells).unwrap();
        assert!(p > 0.01, "p = {p}");
    }
}

#[test]
fn eigenphases_are_uniform() {
    let n = 20;
    let bins = 20;
    let mut s = RandomStream::new(104, 0);
    let mut counts = vec![0u64; bins];
    for _ in 0..500 {
        let eig = eigendecompose_unitary(&sample_cue(n, &mut s).unwrap()).unwrap();
        for &phi in eig.eigenphases() {
            let x = (phi + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
            counts[bin(x, bins)] += 1;
        }
    }
    let p = chi2_goodness_of_fit(&counts, &vec![1.0 / bins as f64; bins]).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn haar_state_intensities_follow_beta() {
    let n = 8;
    let bins = 10;
    let mut s = RandomStream::new(105, 0);
    let mut counts = vec![0u64; bins];
    for _ in 0..5000 {
        let psi = sample_haar_state(n, &mut s).unwrap();
        counts[bin(psi[3].norm_sqr(), bins)] += 1;
    }
    let p = chi2_goodness_of_fit(&counts, &beta_cells(n, bins)).unwrap();
    assert!(p > 0.01, "p = {p}");
}
