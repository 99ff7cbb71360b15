use nalgebra::DMatrix;
use wishart_rd::linalg::gram_loss;
use wishart_rd::rgg::{
    bernoulli_code_length, calibrate_spectral, calibrate_threshold, generate_graph, graph_from_latents, phase_sweep,
    spectral_estimate, spectral_estimate_checked, GridPoint, SweepOptions,
};
use wishart_rd::specfun::binary_entropy;
use wishart_rd::{LatentConfig, LatentMatrix, Prior};

#[test]
fn loss_is_permutation_equivariant() {
    let (n, d, p) = (120, 4, 0.3);
    let tau = calibrate_threshold(d, p, Prior::GaussianIsotropic, 100_000, 1).unwrap();
    let cal = calibrate_spectral(&LatentConfig::new(n, d, Prior::GaussianIsotropic, 2).unwrap(), p, tau).unwrap();
    let g = generate_graph(&LatentConfig::new(n, d, Prior::GaussianIsotropic, 3).unwrap(), tau).unwrap();
    let x = g.latents.gram();
    let loss = gram_loss(&x, &spectral_estimate(&g, d, p, &cal).unwrap(), d).unwrap();

    let perm: Vec<usize> = (0..n).map(|i| (7 * i + 3) % n).collect();
    let mut z = DMatrix::zeros(n, d);
    for i in 0..n {
        z.set_row(perm[i], &g.latents.row(i));
    }
    let relabeled = graph_from_latents(LatentMatrix::new(z).unwrap(), tau).unwrap();
    assert_eq!(relabeled.adjacency, g.adjacency.permuted(&perm).unwrap());
    let est = spectral_estimate(&relabeled, d, p, &cal).unwrap();
    let loss_perm = gram_loss(&relabeled.latents.gram(), &est, d).unwrap();
    assert!((loss - loss_perm).abs() < 1e-12, "{loss} vs {loss_perm}");
}

#[test]
fn spectral_beats_trivial_with_full_information() {
    let (n, d, p) = (400, 3, 0.5);
    let tau = calibrate_threshold(d, p, Prior::GaussianIsotropic, 200_000, 5).unwrap();
    let cal = calibrate_spectral(&LatentConfig::new(n, d, Prior::GaussianIsotropic, 6).unwrap(), p, tau).unwrap();
    let g = generate_graph(&LatentConfig::new(n, d, Prior::GaussianIsotropic, 7).unwrap(), tau).unwrap();
    let x = g.latents.gram();
    let spectral = gram_loss(&x, &spectral_estimate(&g, d, p, &cal).unwrap(), d).unwrap();
    let trivial = gram_loss(&x, &DMatrix::identity(n, n), d).unwrap();
    assert!(spectral < 0.5 * trivial, "{spectral} vs {trivial}");
}

#[test]
fn spherical_estimate_is_psd_with_unit_diagonal() {
    let (n, d, p) = (150, 5, 0.2);
    let tau = calibrate_threshold(d, p, Prior::SphereUniform, 100_000, 1).unwrap();
    let cal = calibrate_spectral(&LatentConfig::new(n, d, Prior::SphereUniform, 2).unwrap(), p, tau).unwrap();
    let g = generate_graph(&LatentConfig::new(n, d, Prior::SphereUniform, 3).unwrap(), tau).unwrap();
    let est = spectral_estimate(&g, d, p, &cal).unwrap();
    assert!((0..n).all(|i| (est[(i, i)] - 1.0).abs() < 1e-12));
    assert_eq!(*est, est.transpose());
    assert!(est.clone_owned().symmetric_eigen().eigenvalues.min() > -1e-9);
    assert!(spectral_estimate_checked(&g, n + 1, p, &cal).is_err());
}

#[test]
fn graph_code_length_within_entropy_count() {
    for (seed, p) in [(1u64, 0.05), (2, 0.5)] {
        let (n, d) = (200, 8);
        let tau = calibrate_threshold(d, p, Prior::GaussianIsotropic, 100_000, seed).unwrap();
        let g = generate_graph(&LatentConfig::new(n, d, Prior::GaussianIsotropic, seed).unwrap(), tau).unwrap();
        let ph = g.realized_density;
        assert!(ph > 0.0 && ph < 1.0);
        let count_bits = g.adjacency.pair_count() as f64 * binary_entropy(ph).unwrap().value / std::f64::consts::LN_2;
        let code_bits = bernoulli_code_length(&g.adjacency, ph).unwrap() + 2.0;
        assert!(count_bits >= 0.99 * code_bits && code_bits <= 1.01 * count_bits);
    }
}

#[test]
fn trivial_estimator_has_unit_risk() {
    let opts = SweepOptions {
        trials: 40,
        seed: 3,
        threshold_samples: 100_000,
        ..SweepOptions::default()
    };
    let out = phase_sweep(&[GridPoint { n: 100, d: 10, p: 0.3 }, GridPoint { n: 100, d: 200, p: 0.3 }], &opts).unwrap();
    for s in &out.summary {
        assert!((s.mean_loss_trivial - 1.0).abs() < 3.0 * s.std_error_trivial, "{s:?}");
    }
}
