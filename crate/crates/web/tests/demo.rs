use entangle_web::{entropy_curves, simulate_rmt, u_histogram, MAX_DEMO_N};

#[test]
fn curves_start_at_zero_and_approach_saturation() {
    let curves = entropy_curves(50, 4, 4.0, 81).unwrap();
    assert_eq!(curves.len(), 4);
    for c in &curves {
        assert_eq!(c.sqrt_lambda.len(), 81);
        assert_eq!(c.entropy[0], 0.0);
        assert!(c.entropy.windows(2).all(|w| w[1] >= w[0]), "k={} not monotone", c.k);
        let last = *c.entropy.last().unwrap();
        assert!(
            (last - c.saturation).abs() < 0.01 * c.saturation,
            "k={}: {last} vs {}",
            c.k,
            c.saturation
        );
    }
}

#[test]
fn small_simulation_is_reproducible_and_near_theory() {
    let a = simulate_rmt(8, 1.0, 4, 11).unwrap();
    let b = simulate_rmt(8, 1.0, 4, 11).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let s2 = a.entropies.iter().find(|e| e.k == 2).unwrap();
    let theory = s2.theory.unwrap();
    assert!((s2.mean - theory).abs() < 0.1 * theory, "{} vs {theory}", s2.mean);
    assert!(simulate_rmt(MAX_DEMO_N + 1, 1.0, 1, 0).is_err());
}

#[test]
fn u_histogram_tracks_the_universal_density() {
    let h = u_histogram(1e-4, 200_000, 3).unwrap();
    assert_eq!(h.edges.len(), h.density.len() + 1);
    let w = h.edges[1] - h.edges[0];
    let tv: f64 = 0.5
        * h.density
            .iter()
            .zip(&h.theory)
            .map(|(a, b)| (a - b).abs() * w)
            .sum::<f64>();
    assert!(tv < 0.02, "TV = {tv}");
    assert!(u_histogram(1e-4, 0, 3).is_err());
}
