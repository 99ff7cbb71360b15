//! Spectral baseline for recovering the Gram matrix from a graph.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::graph::{generate_graph, Adjacency, GraphSample};
use crate::error::{Error, Result};
use crate::linalg::{symmetrize, GramMatrix};
use crate::sampling::{LatentConfig, Prior};

/// Eigenpairs of the centered adjacency `M = A - p (J - I)`, sorted by decreasing
/// eigenvalue.
fn centered_eigen(adjacency: &Adjacency, p: f64) -> (Vec<f64>, DMatrix<f64>) {
    let n = adjacency.n();
    let mut m = adjacency.to_dense();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] -= p;
            }
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let values = order.iter().map(|&l| eig.eigenvalues[l]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    (values, vectors)
}

/// Adds `lambda v v^T` for eigenpair `l` when `lambda > 0`.
fn add_component(acc: &mut DMatrix<f64>, values: &[f64], vectors: &DMatrix<f64>, l: usize) {
    let lambda = values[l];
    if lambda > 0.0 {
        let v = vectors.column(l);
        acc.ger(lambda, &v, &v, 1.0);
    }
}

/// `P = sum_{l <= k, lambda_l > 0} lambda_l v_l v_l^T` for the centered adjacency.
pub fn spectral_projection(adjacency: &Adjacency, p: f64, k: usize) -> DMatrix<f64> {
    let (values, vectors) = centered_eigen(adjacency, p);
    let n = adjacency.n();
    let mut out = DMatrix::zeros(n, n);
    for l in 0..k.min(n) {
        add_component(&mut out, &values, &vectors, l);
    }
    symmetrize(&mut out);
    out
}

/// Coefficients mapping the projection to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum SpectralCoefficients {
    /// `X_hat = alpha P + gamma I`.
    Gaussian { alpha: f64, gamma: f64 },
    /// `X_hat = (1 - a) I + a C`, with `C` the unit-diagonal normalization of `P`.
    Sphere { a: f64 },
}

/// Rank of the projection and the coefficients applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCalibration {
    pub rank: usize,
    pub coefficients: SpectralCoefficients,
}

/// Unit-diagonal normalization `C_ij = P_ij / sqrt(P_ii P_jj)`; rows with `P_ii = 0`
/// become the identity row.
fn unit_diagonal(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let scale: Vec<f64> = (0..n)
        .map(|i| if p[(i, i)] > 0.0 { 1.0 / p[(i, i)].sqrt() } else { 0.0 })
        .collect();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { p[(i, j)] * scale[i] * scale[j] })
}

impl SpectralCoefficients {
    /// Least-squares fit against the true Gram matrix `x`, constrained so the
    /// estimate stays PSD.
    pub fn fit(prior: Prior, projection: &DMatrix<f64>, x: &DMatrix<f64>) -> Self {
        match prior {
            Prior::GaussianIsotropic => {
                let n = x.nrows() as f64;
                let pp = projection.norm_squared();
                let tp = projection.trace();
                let px = projection.dot(x);
                let tx = x.trace();
                // normal equations for min ||x - alpha P - gamma I||^2
                let det = pp * n - tp * tp;
                let (mut alpha, mut gamma) = if det > 1e-12 * pp * n {
                    ((px * n - tp * tx) / det, (pp * tx - tp * px) / det)
                } else {
                    (0.0, tx / n)
                };
                if alpha < 0.0 || gamma < 0.0 {
                    let alpha_only = if pp > 0.0 { (px / pp).max(0.0) } else { 0.0 };
                    let gamma_only = (tx / n).max(0.0);
                    let r_alpha = (x - projection * alpha_only).norm_squared();
                    let r_gamma = (x - DMatrix::identity(x.nrows(), x.nrows()) * gamma_only).norm_squared();
                    (alpha, gamma) = if r_alpha <= r_gamma { (alpha_only, 0.0) } else { (0.0, gamma_only) };
                }
                SpectralCoefficients::Gaussian { alpha, gamma }
            }
            Prior::SphereUniform => {
                let c = unit_diagonal(projection);
                let id = DMatrix::<f64>::identity(x.nrows(), x.nrows());
                let dc = &c - &id;
                let denom = dc.norm_squared();
                let a = if denom > 0.0 {
                    ((x - &id).dot(&dc) / denom).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                SpectralCoefficients::Sphere { a }
            }
        }
    }

    pub fn apply(&self, projection: &DMatrix<f64>) -> GramMatrix {
        let n = projection.nrows();
        let mut est = match *self {
            SpectralCoefficients::Gaussian { alpha, gamma } => projection * alpha + DMatrix::identity(n, n) * gamma,
            SpectralCoefficients::Sphere { a } => DMatrix::identity(n, n) * (1.0 - a) + unit_diagonal(projection) * a,
        };
        symmetrize(&mut est);
        GramMatrix::from_trusted(est, n)
    }
}

/// Candidate ranks `min(d, n) ..= min(2d + 1, n)`.
pub fn rank_candidates(d: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    d.min(n)..=(2 * d + 1).min(n)
}

/// Fits rank and coefficients on an independent simulated graph at the same
/// `(n, d, p)`, choosing the candidate rank with the smallest calibration loss.
pub fn calibrate_spectral(cfg: &LatentConfig, p: f64, tau: f64) -> Result<SpectralCalibration> {
    let g = generate_graph(cfg, tau)?;
    let x = g.latents.gram();
    let n = cfg.n;
    let (values, vectors) = centered_eigen(&g.adjacency, p);
    let ranks = rank_candidates(cfg.d, n);
    let mut proj = DMatrix::zeros(n, n);
    let mut best: Option<(f64, SpectralCalibration)> = None;
    for k in 1..=*ranks.end() {
        add_component(&mut proj, &values, &vectors, k - 1);
        if k < *ranks.start() {
            continue;
        }
        let mut sym = proj.clone();
        symmetrize(&mut sym);
        let coefficients = SpectralCoefficients::fit(cfg.prior, &sym, &x);
        let loss = (&*x - &*coefficients.apply(&sym)).norm_squared();
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, SpectralCalibration { rank: k, coefficients }));
        }
    }
    Ok(best.expect("rank range is non-empty").1)
}

/// Spectral estimate of the Gram matrix at the calibrated rank (capped at `n`).
pub fn spectral_estimate(graph: &GraphSample, d: usize, p: f64, calibration: &SpectralCalibration) -> Result<GramMatrix> {
    if d == 0 {
        return Err(Error::param("d must be >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let proj = spectral_projection(&graph.adjacency, p, calibration.rank);
    Ok(calibration.coefficients.apply(&proj))
}

/// As [`spectral_estimate`], but rejects `d > n`.
pub fn spectral_estimate_checked(
    graph: &GraphSample,
    d: usize,
    p: f64,
    calibration: &SpectralCalibration,
) -> Result<GramMatrix> {
    let n = graph.adjacency.n();
    if d > n {
        return Err(Error::domain(format!("spectral estimate needs d <= n (n={n}, d={d})")));
    }
    spectral_estimate(graph, d, p, calibration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram_loss;
    use crate::rgg::graph::{calibrate_threshold, graph_from_latents};
    use crate::sampling::{sample_latents, stream_rng};
    use rand::seq::SliceRandom;

    fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
        m.clone().symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn beats_trivial_at_small_d() {
        let (n, d, p) = (300, 3, 0.5);
        for prior in [Prior::GaussianIsotropic, Prior::SphereUniform] {
            let tau = calibrate_threshold(d, p, prior, 100_000, 1).unwrap();
            let cal = calibrate_spectral(&LatentConfig::new(n, d, prior, 100).unwrap(), p, tau).unwrap();
            assert!(rank_candidates(d, n).contains(&cal.rank));
            let cfg = LatentConfig::new(n, d, prior, 5).unwrap();
            let g = generate_graph(&cfg, tau).unwrap();
            let est = spectral_estimate(&g, d, p, &cal).unwrap();
            let x = g.latents.gram();
            let spectral = gram_loss(&x, &est, d).unwrap();
            let trivial = gram_loss(&x, &DMatrix::identity(n, n), d).unwrap();
            assert!(spectral < 0.8 * trivial, "{prior}: {spectral} vs {trivial}");
            assert!(min_eigenvalue(&est) >= -1e-9);
            if prior == Prior::SphereUniform {
                assert!(est.diagonal().iter().all(|v| (v - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn permutation_invariant_loss() {
        let (n, d, p) = (80, 2, 0.5);
        let cfg = LatentConfig::new(n, d, Prior::GaussianIsotropic, 3).unwrap();
        let z = sample_latents(&cfg);
        let g = graph_from_latents(z.clone(), 0.0).unwrap();
        let cal = SpectralCalibration {
            rank: d,
            coefficients: SpectralCoefficients::Gaussian { alpha: 0.02, gamma: 0.5 },
        };
        let est = spectral_estimate(&g, d, p, &cal).unwrap();
        let loss = gram_loss(&g.latents.gram(), &est, d).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream_rng(11, 0));
        let mut zp = DMatrix::zeros(n, d);
        for i in 0..n {
            zp.set_row(perm[i], &z.row(i));
        }
        let gp = graph_from_latents(crate::linalg::LatentMatrix::new(zp).unwrap(), 0.0).unwrap();
        assert_eq!(gp.adjacency, g.adjacency.permuted(&perm).unwrap());
        let est_p = spectral_estimate(&gp, d, p, &cal).unwrap();
        let loss_p = gram_loss(&gp.latents.gram(), &est_p, d).unwrap();
        assert!((loss - loss_p).abs() < 1e-12, "{loss} vs {loss_p}");
    }

    #[test]
    fn checked_rejects_large_d() {
        let cfg = LatentConfig::new(10, 2, Prior::GaussianIsotropic, 3).unwrap();
        let g = generate_graph(&cfg, 0.0).unwrap();
        let cal = SpectralCalibration {
            rank: 2,
            coefficients: SpectralCoefficients::Sphere { a: 0.5 },
        };
        assert!(matches!(spectral_estimate_checked(&g, 11, 0.5, &cal), Err(Error::Domain(_))));
        assert!(spectral_estimate(&g, 11, 0.5, &cal).is_ok());
    }

    #[test]
    fn gaussian_fit_recovers_exact_combination() {
        let cfg = LatentConfig::new(20, 3, Prior::GaussianIsotropic, 8).unwrap();
        let proj = sample_latents(&cfg).gram().into_inner();
        let x = &proj * 0.7 + DMatrix::identity(20, 20) * 0.2;
        match SpectralCoefficients::fit(Prior::GaussianIsotropic, &proj, &x) {
            SpectralCoefficients::Gaussian { alpha, gamma } => {
                assert!((alpha - 0.7).abs() < 1e-10 && (gamma - 0.2).abs() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }
}
