use nalgebra::DMatrix;
use wishart_rd::oracles::{moment_checks, DEFAULT_MOMENT_PARAMS};
use wishart_rd::sampling::{beta_decompose, chi_norm_variance, random_orthogonal, sample_gram, sample_latents, stream_rng};
use wishart_rd::{LatentConfig, Prior};

fn cfg(n: usize, d: usize, prior: Prior, seed: u64) -> LatentConfig {
    LatentConfig::new(n, d, prior, seed).unwrap()
}

#[test]
fn gaussian_row_norms_concentrate() {
    let (n, d) = (2000, 50);
    let z = sample_latents(&cfg(n, d, Prior::GaussianIsotropic, 11));
    let mean = z.row_norms().iter().map(|r| r * r).sum::<f64>() / n as f64;
    let tol = 3.0 * (2.0 / d as f64).sqrt() / (n as f64).sqrt();
    assert!((mean - 1.0).abs() < tol, "{mean}");
}

#[test]
fn sphere_rows_unit_and_gram_diagonal_one() {
    let c = cfg(40, 7, Prior::SphereUniform, 3);
    assert!(sample_latents(&c).row_norms().iter().all(|r| (r - 1.0).abs() < 1e-12));
    let x = sample_gram(&c);
    assert!((0..40).all(|i| (x[(i, i)] - 1.0).abs() < 1e-12));
}

#[test]
fn seeds_are_bit_reproducible() {
    let c = cfg(25, 9, Prior::GaussianIsotropic, 99);
    assert_eq!(*sample_latents(&c), *sample_latents(&c));
    let other = cfg(25, 9, Prior::GaussianIsotropic, 100);
    assert_ne!(*sample_latents(&c), *sample_latents(&other));
}

/// Kolmogorov-Smirnov statistic of `values` against the CDF `cdf`.
fn ks_statistic(mut values: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sphere_d3_coordinate_is_uniform_and_rotation_invariant() {
    // a coordinate of a uniform point on S^2 is uniform on [-1, 1]
    let z = sample_latents(&cfg(100_000, 3, Prior::SphereUniform, 21));
    let q = random_orthogonal(3, &mut stream_rng(22, 0));
    let rotated = &*z * q;
    let uniform = |t: f64| ((t + 1.0) / 2.0).clamp(0.0, 1.0);
    // 1% critical value 1.63 / sqrt(m)
    let crit = 1.63 / (100_000f64).sqrt();
    for col in [z.column(0).iter().copied().collect::<Vec<_>>(), rotated.column(2).iter().copied().collect()] {
        let ks = ks_statistic(col, uniform);
        assert!(ks < crit, "KS {ks} >= {crit}");
    }
}

#[test]
fn footnote_moments_of_gaussian_gram() {
    let (n, d, reps) = (30, 6, 2000);
    let (mut off, mut diag, mut off_count, mut diag_count) = (0.0, 0.0, 0.0, 0.0);
    let (mut off_sq, mut diag_sq) = (0.0, 0.0);
    for seed in 0..reps {
        let x = sample_gram(&cfg(n, d, Prior::GaussianIsotropic, seed));
        for i in 0..n {
            let v = (x[(i, i)] - 1.0).powi(2);
            diag += v;
            diag_sq += v * v;
            diag_count += 1.0;
            for j in (i + 1)..n {
                let v = x[(i, j)].powi(2);
                off += v;
                off_sq += v * v;
                off_count += 1.0;
            }
        }
    }
    let check = |sum: f64, sq: f64, count: f64, target: f64| {
        let mean = sum / count;
        // entries within a matrix are dependent; 5 sigma of the naive error is loose enough
        let se = ((sq / count - mean * mean) / count).sqrt();
        assert!((mean - target).abs() < 5.0 * se * (n as f64).sqrt(), "{mean} vs {target}");
    };
    check(off, off_sq, off_count, 1.0 / d as f64);
    check(diag, diag_sq, diag_count, 2.0 / d as f64);
}

#[test]
fn beta_decomposition_reconstructs() {
    let z = sample_latents(&cfg(50, 12, Prior::GaussianIsotropic, 5));
    let b = beta_decompose(&z, 0.2, 6).unwrap();
    assert!((b.reconstruct() - &*z).amax() < 1e-12);
    let x = &*z * z.transpose();
    assert!((b.gaussian_gram() - x).amax() < 1e-12);
    assert!(b.directions.row_norms().iter().all(|r| (r - 1.0).abs() < 1e-12));
    let exact = beta_decompose(&z, 0.0, 6).unwrap();
    assert_eq!(exact.norms, exact.perturbed_norms);
    assert!(beta_decompose(&z, -1.0, 6).is_err());
    let zero = wishart_rd::LatentMatrix::new(DMatrix::zeros(2, 3)).unwrap();
    assert!(beta_decompose(&zero, 0.1, 0).is_err());
}

#[test]
fn norm_variance_below_half_over_d() {
    for d in 1..=200 {
        assert!(chi_norm_variance(d) <= 1.0 / (2.0 * d as f64) + 1e-15, "d={d}");
    }
    let d = 10;
    let z = sample_latents(&cfg(200_000, d, Prior::GaussianIsotropic, 8));
    let norms = z.row_norms();
    let m = norms.len() as f64;
    let mean = norms.iter().sum::<f64>() / m;
    let var = norms.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (m - 1.0);
    assert!(var <= 0.05, "{var}");
    assert!((var - chi_norm_variance(d)).abs() < 5.0 * var * (2.0 / m).sqrt());
}

#[test]
fn moment_identities_at_moderate_sample_size() {
    let checks = moment_checks(&DEFAULT_MOMENT_PARAMS, 200_000, 4).unwrap();
    assert_eq!(checks.len(), 10);
    for c in &checks {
        assert!(c.passed(), "{c:?}");
    }
}
