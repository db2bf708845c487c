use entangle_core::harness::{U_BINS, U_MAX};
use entangle_core::oracle::{
    default_spacing_cutoff, mc_average_lambda1, mc_average_lambda1_with_cutoff, mc_average_lambda2, recursive_purity,
    sample_u, two_level_eigenvalues, TwoLevelMix,
};
use entangle_core::rng::{sample_cue, RandomStream};
use entangle_core::spectral::schmidt_spectrum;
use entangle_core::stats::{chi2_homogeneity, total_variation, Histogram};
use entangle_core::theory::{lambda1_mean, u_mass};
use entangle_core::C64;

fn u_histogram(lambda: f64, draws: usize, seed: u64) -> Histogram {
    let mut s = RandomStream::new(seed, 0);
    let mut h = Histogram::new(0.0, U_MAX, U_BINS);
    for _ in 0..draws {
        h.push(sample_u(lambda, &mut s).unwrap());
    }
    h
}

fn cells(h: &Histogram) -> Vec<u64> {
    h.counts.iter().copied().chain([h.overflow]).collect()
}

#[test]
fn lambda1_monte_carlo_matches_closed_form() {
    let mut s = RandomStream::new(301, 0);
    let (mean, se) = mc_average_lambda1(1e-4, 1_000_000, &mut s).unwrap();
    let exact = lambda1_mean(1e-4).unwrap().value;
    assert!((exact - 0.98228).abs() < 5e-6);
    assert!((mean - exact).abs() < 3.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn lambda1_is_insensitive_to_the_cutoff() {
    let lambda = 1e-4;
    let cut = default_spacing_cutoff(lambda);
    let (a, sa) = mc_average_lambda1_with_cutoff(lambda, 400_000, cut, &mut RandomStream::new(302, 0)).unwrap();
    let (b, sb) = mc_average_lambda1_with_cutoff(lambda, 400_000, 2.0 * cut, &mut RandomStream::new(302, 1)).unwrap();
    assert!(
        (a - b).abs() < 3.0 * (sa * sa + sb * sb).sqrt(),
        "{a} ± {sa} vs {b} ± {sb}"
    );
}

#[test]
fn lambda1_and_lambda2_nearly_sum_to_one() {
    for lambda in [1e-5, 1e-4, 1e-3] {
        let (l1, s1) = mc_average_lambda1(lambda, 400_000, &mut RandomStream::new(303, 0)).unwrap();
        let (l2, s2) = mc_average_lambda2(lambda, 400_000, &mut RandomStream::new(303, 1)).unwrap();
        let envelope = 10.0 * lambda * lambda.ln().abs() + 3.0 * (s1 * s1 + s2 * s2).sqrt();
        assert!((l1 + l2 - 1.0).abs() < envelope, "Λ={lambda}: {}", l1 + l2);
    }
}

#[test]
fn sampled_u_matches_universal_density() {
    let h = u_histogram(1e-4, 1_000_000, 304);
    let mut theory: Vec<f64> = (0..U_BINS)
        .map(|i| {
            let w = U_MAX / U_BINS as f64;
            u_mass(i as f64 * w, (i + 1) as f64 * w).unwrap()
        })
        .collect();
    theory.push(u_mass(U_MAX, f64::INFINITY).unwrap());
    let tv = total_variation(&h.probabilities(), &theory);
    assert!(tv < 0.01, "TV = {tv}");
}

#[test]
fn sampled_u_is_lambda_independent() {
    let a = u_histogram(1e-5, 200_000, 305);
    let b = u_histogram(1e-3, 200_000, 306);
    let p = chi2_homogeneity(&cells(&a), &cells(&b)).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn two_level_formula_matches_explicit_schmidt_spectrum() {
    let n = 5;
    let mut s = RandomStream::new(307, 0);
    for &(lambda, w, sp) in &[(1e-3, 0.7, 0.05), (0.1, 2.0, 0.3), (1e-5, 0.01, 1e-3), (0.5, 1.0, 1.0)] {
        let mix = two_level_eigenvalues(lambda, w, sp).unwrap();
        let (l1, l2) = mix.lambda_pair;
        // √λ₁ |a>|b> + √λ₂ |c>|d> with orthonormal factors from random unitaries.
        let u1 = sample_cue(n, &mut s).unwrap();
        let u2 = sample_cue(n, &mut s).unwrap();
        let (m1, m2) = (u1.as_mat(), u2.as_mat());
        let psi: Vec<C64> = (0..n * n)
            .map(|idx| {
                let (k, l) = (idx / n, idx % n);
                m1[(k, 0)] * m2[(l, 0)] * l1.sqrt() + m1[(k, 1)] * m2[(l, 1)] * l2.sqrt()
            })
            .collect();
        let spec = schmidt_spectrum(&psi, n).unwrap();
        assert!((spec.lambda1() - l1).abs() < 1e-14, "{} vs {l1}", spec.lambda1());
        assert!((spec.lambda2() - l2).abs() < 1e-14, "{} vs {l2}", spec.lambda2());
    }
}

#[test]
fn two_level_invariants() {
    for x in [0.0, 1e-12, 1e-3, 0.5, 3.0, 1e3, 1e12] {
        let m = TwoLevelMix::from_x(x);
        let (a, b) = m.lambda_pair;
        assert!((a + b - 1.0).abs() <= f64::EPSILON);
        assert!(a >= 0.5 && (0.0..=0.5).contains(&b));
    }
}

#[test]
fn recursion_identity_on_random_pairs() {
    let mut s = RandomStream::new(308, 0);
    for _ in 0..10_000 {
        let l2 = 0.5 * s.uniform();
        let m2 = 0.5 * s.uniform();
        let (direct, updated) = recursive_purity((1.0 - l2, l2), (1.0 - m2, m2));
        assert!((direct - updated).abs() < 1e-14, "{direct} vs {updated}");
    }
}
