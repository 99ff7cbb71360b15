//! Reproducible sampling of latent matrices, Gram matrices and the norm/direction
//! split used to reduce the spherical prior to the Gaussian one.
//!
//! Every sampler draws from a [`ChaCha8Rng`] addressed by `(seed, stream)`, so
//! parallel workers get independent, reproducible streams without shared state.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{GramMatrix, LatentMatrix};

/// Distribution of the latent rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prior {
    /// Rows i.i.d. `N(0, I_d / d)`.
    GaussianIsotropic,
    /// Rows i.i.d. uniform on the unit sphere `S^{d-1}`.
    SphereUniform,
}

impl std::fmt::Display for Prior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Prior::GaussianIsotropic => "gaussian",
            Prior::SphereUniform => "sphere",
        })
    }
}

impl std::str::FromStr for Prior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian-isotropic" => Ok(Prior::GaussianIsotropic),
            "sphere" | "sphere-uniform" => Ok(Prior::SphereUniform),
            other => Err(Error::param(format!("unknown prior `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentConfig {
    pub n: usize,
    pub d: usize,
    pub prior: Prior,
    pub seed: u64,
}

impl LatentConfig {
    pub fn new(n: usize, d: usize, prior: Prior, seed: u64) -> Result<Self> {
        let cfg = Self { n, d, prior, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::param(format!(
                "need n >= 1 and d >= 1, got n={} d={}",
                self.n, self.d
            )));
        }
        Ok(())
    }
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packs a two-level index (e.g. grid point and trial) into one stream id.
pub fn stream_id(outer: u32, inner: u32) -> u64 {
    ((outer as u64) << 32) | inner as u64
}

/// Independent child seed for `(outer, inner)`, by SplitMix64 finalization.
pub fn derive_seed(seed: u64, outer: u32, inner: u32) -> u64 {
    let mut z = seed ^ stream_id(outer, inner).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws an `n x d` latent matrix from `rng`.
pub fn sample_latents_with<R: Rng + ?Sized>(n: usize, d: usize, prior: Prior, rng: &mut R) -> LatentMatrix {
    let scale = 1.0 / (d as f64).sqrt();
    let mut z = DMatrix::<f64>::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            let g: f64 = StandardNormal.sample(rng);
            z[(i, k)] = g;
        }
        match prior {
            Prior::GaussianIsotropic => z.row_mut(i).scale_mut(scale),
            Prior::SphereUniform => {
                let norm = z.row(i).norm();
                // a zero Gaussian row has probability zero
                let norm = if norm > 0.0 { norm } else { 1.0 };
                z.row_mut(i).unscale_mut(norm);
            }
        }
    }
    LatentMatrix::from_trusted(z)
}

/// Latents from stream 0 of `cfg.seed`.
pub fn sample_latents(cfg: &LatentConfig) -> LatentMatrix {
    sample_latents_with(cfg.n, cfg.d, cfg.prior, &mut stream_rng(cfg.seed, 0))
}

/// `X = Z Z^T` with `Z` from [`sample_latents`]. Under the Gaussian prior with
/// `d >= n` this is a `Wishart_n(d, I/d)` draw.
pub fn sample_gram(cfg: &LatentConfig) -> GramMatrix {
    sample_latents(cfg).gram()
}

/// Haar-distributed orthogonal `d x d` matrix (QR of a Gaussian matrix with sign correction).
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Norm/direction split of a Gaussian latent matrix with a noisy copy of the norms.
///
/// `w_i = beta_i * z_i` with `beta_i = ||w_i||` and `z_i` uniform on the sphere,
/// and `beta_hat_i = beta_i + g_i` with `g_i ~ N(0, delta^2)`.
#[derive(Debug, Clone)]
pub struct BetaDecomposition {
    pub norms: DVector<f64>,
    pub directions: LatentMatrix,
    pub noise_scale: f64,
    pub perturbed_norms: DVector<f64>,
}

impl BetaDecomposition {
    /// `diag(beta) * directions`, which reproduces the Gaussian latents.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut w = self.directions.clone().into_inner();
        for (i, beta) in self.norms.iter().enumerate() {
            w.row_mut(i).scale_mut(*beta);
        }
        w
    }

    /// `B X B` with `X` the spherical Gram matrix; equals the Gaussian Gram matrix.
    pub fn gaussian_gram(&self) -> DMatrix<f64> {
        let x = self.directions.gram();
        let b = DMatrix::from_diagonal(&self.norms);
        &b * &*x * &b
    }
}

pub fn beta_decompose(z_gauss: &LatentMatrix, delta: f64, seed: u64) -> Result<BetaDecomposition> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::param(format!("noise scale must be finite and >= 0, got {delta}")));
    }
    let norms = DVector::from_vec(z_gauss.row_norms());
    if let Some(i) = norms.iter().position(|b| *b <= 0.0) {
        return Err(Error::Degenerate(format!("row {i} has zero norm")));
    }
    let mut directions = (**z_gauss).clone();
    for (i, beta) in norms.iter().enumerate() {
        directions.row_mut(i).unscale_mut(*beta);
    }
    let mut perturbed_norms = norms.clone();
    if delta > 0.0 {
        let mut rng = stream_rng(seed, 0);
        let noise = Normal::new(0.0, delta).expect("delta checked above");
        for b in perturbed_norms.iter_mut() {
            *b += noise.sample(&mut rng);
        }
    }
    Ok(BetaDecomposition {
        norms,
        directions: LatentMatrix::from_trusted(directions),
        noise_scale: delta,
        perturbed_norms,
    })
}

/// Noise level tied to a target distortion: `delta = sqrt(D / d)`.
pub fn default_noise_scale(distortion: f64, d: usize) -> f64 {
    (distortion / d as f64).sqrt()
}

/// Exact `Var(||w||)` for `w ~ N(0, I_d / d)`:
/// `(1/d) (d - 2 Gamma((d+1)/2)^2 / Gamma(d/2)^2)`.
pub fn chi_norm_variance(d: usize) -> f64 {
    use crate::specfun::ln_gamma;
    let df = d as f64;
    let ratio = (2.0 * (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0))).exp();
    (df - 2.0 * ratio) / df
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_rows_are_unit() {
        let cfg = LatentConfig::new(50, 7, Prior::SphereUniform, 3).unwrap();
        let z = sample_latents(&cfg);
        for r in z.row_norms() {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let x = sample_gram(&cfg);
        for i in 0..50 {
            assert!((x[(i, i)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = LatentConfig::new(10, 4, Prior::GaussianIsotropic, 99).unwrap();
        assert_eq!(sample_latents(&cfg), sample_latents(&cfg));
        let other = LatentConfig { seed: 100, ..cfg };
        assert_ne!(sample_latents(&cfg), sample_latents(&other));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = stream_rng(1, 0).random();
        let b: u64 = stream_rng(1, 1).random();
        assert_ne!(a, b);
        assert_eq!(stream_id(2, 5), (2u64 << 32) | 5);
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_ne!(derive_seed(1, 0, 1), derive_seed(1, 1, 0));
        assert_eq!(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
    }

    #[test]
    fn gaussian_row_norms_mean() {
        let (n, d) = (2000, 50);
        let cfg = LatentConfig::new(n, d, Prior::GaussianIsotropic, 11).unwrap();
        let z = sample_latents(&cfg);
        let mean = z.row_norms().iter().map(|r| r * r).sum::<f64>() / n as f64;
        let tol = 3.0 * (2.0 / d as f64).sqrt() / (n as f64).sqrt();
        assert!((mean - 1.0).abs() < tol, "mean {mean} tol {tol}");
    }

    #[test]
    fn gram_equals_sum_of_column_outer_products() {
        let cfg = LatentConfig::new(6, 9, Prior::GaussianIsotropic, 5).unwrap();
        let z = sample_latents(&cfg);
        let x = z.gram();
        let mut acc = DMatrix::<f64>::zeros(6, 6);
        for k in 0..9 {
            let c = z.column(k);
            acc += &c * c.transpose();
        }
        assert!((&*x - acc).amax() < 1e-12);
        assert_eq!(x.rank_bound(), 6);
    }

    #[test]
    fn beta_decomposition_reconstructs() {
        let cfg = LatentConfig::new(12, 5, Prior::GaussianIsotropic, 8).unwrap();
        let w = sample_latents(&cfg);
        let dec = beta_decompose(&w, 0.0, 1).unwrap();
        assert_eq!(dec.norms, dec.perturbed_norms);
        assert!((dec.reconstruct() - &*w).amax() < 1e-12);
        assert!((dec.gaussian_gram() - &*w.gram()).amax() < 1e-12);
        for r in dec.directions.row_norms() {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let noisy = beta_decompose(&w, 0.2, 1).unwrap();
        assert_ne!(noisy.norms, noisy.perturbed_norms);
    }

    #[test]
    fn beta_decompose_rejects_zero_row() {
        let mut m = DMatrix::<f64>::from_element(3, 2, 0.5);
        m.row_mut(1).fill(0.0);
        let z = LatentMatrix::new(m).unwrap();
        assert!(matches!(beta_decompose(&z, 0.1, 0), Err(Error::Degenerate(_))));
        let ok = LatentMatrix::new(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(beta_decompose(&ok, -1.0, 0).is_err());
    }

    #[test]
    fn chi_variance_below_half_over_d() {
        for d in 1..200 {
            let v = chi_norm_variance(d);
            assert!(v > 0.0 && v <= 0.5 / d as f64 + 1e-15, "d={d} v={v}");
        }
        // d = 1: Var|g| = 1 - 2/pi
        assert_relative_eq!(chi_norm_variance(1), 1.0 - 2.0 / std::f64::consts::PI, epsilon = 1e-13);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = stream_rng(4, 0);
        let q = random_orthogonal(5, &mut rng);
        assert!((q.transpose() * &q - DMatrix::<f64>::identity(5, 5)).amax() < 1e-12);
    }
}
