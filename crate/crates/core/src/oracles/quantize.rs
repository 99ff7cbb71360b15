//! Fixed-rate entrywise quantization of the latents: an explicit achievable
//! (rate, distortion) point for the Gram matrix.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::blahut::RDCurvePoint;
use crate::error::{Error, Result};
use crate::linalg::gram_loss;
use crate::sampling::{sample_latents_with, stream_rng, LatentConfig};

/// Entries are clipped to `±CLIP_SIGMAS / sqrt(d)` before rounding.
pub const CLIP_SIGMAS: f64 = 6.0;

/// Uniform grid `{k eta : |k| <= k_max}` with `k_max = floor(clip / eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer {
    pub step: f64,
    pub k_max: i64,
}

impl UniformQuantizer {
    pub fn new(step: f64, d: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param(format!("grid step must be positive, got {step}")));
        }
        if d == 0 {
            return Err(Error::param("d must be >= 1"));
        }
        let clip = CLIP_SIGMAS / (d as f64).sqrt();
        Ok(Self {
            step,
            k_max: (clip / step).floor() as i64,
        })
    }

    pub fn levels(&self) -> u64 {
        2 * self.k_max as u64 + 1
    }

    pub fn quantize(&self, x: f64) -> f64 {
        let k = (x / self.step).round().clamp(-(self.k_max as f64), self.k_max as f64);
        k * self.step
    }

    pub fn apply(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        z.map(|v| self.quantize(v))
    }
}

/// Quantizes every entry of `Z`, reconstructs `Z_hat Z_hat^T`, and reports the rate
/// `n d log(levels)` with the Monte Carlo mean of `L(X, X_hat)` over `trials`
/// independent draws (trial `t` uses stream `t` of `cfg.seed`).
pub fn quantization_upper_bound(cfg: &LatentConfig, step: f64, trials: usize) -> Result<RDCurvePoint> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let q = UniformQuantizer::new(step, cfg.d)?;
    let losses: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t as u64);
            let z = sample_latents_with(cfg.n, cfg.d, cfg.prior, &mut rng);
            let zh = q.apply(&z);
            let x = &*z * z.transpose();
            let xh = &zh * zh.transpose();
            gram_loss(&x, &xh, cfg.d).expect("shapes agree")
        })
        .collect();
    let t = trials as f64;
    let mean = losses.iter().sum::<f64>() / t;
    let std_error = if trials > 1 {
        let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (t - 1.0);
        (var / t).sqrt()
    } else {
        f64::NAN
    };
    Ok(RDCurvePoint {
        slope: None,
        rate: (cfg.n * cfg.d) as f64 * (q.levels() as f64).ln(),
        distortion: mean,
        lower_bound: None,
        iterations: trials,
        converged: true,
        duality_gap_bound: 0.0,
        distortion_std_error: Some(std_error),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Prior;

    #[test]
    fn quantizer_grid() {
        let q = UniformQuantizer::new(0.5, 4).unwrap();
        assert_eq!(q.k_max, 6);
        assert_eq!(q.levels(), 13);
        assert_eq!(q.quantize(0.74), 0.5);
        assert_eq!(q.quantize(100.0), 3.0);
        assert_eq!(q.quantize(-100.0), -3.0);
        let coarse = UniformQuantizer::new(10.0, 4).unwrap();
        assert_eq!(coarse.levels(), 1);
        assert_eq!(coarse.quantize(2.9), 0.0);
        assert!(UniformQuantizer::new(0.0, 4).is_err());
    }

    #[test]
    fn fine_grid_small_distortion() {
        let cfg = LatentConfig::new(10, 4, Prior::GaussianIsotropic, 1).unwrap();
        let coarse = quantization_upper_bound(&cfg, 0.1, 20).unwrap();
        let fine = quantization_upper_bound(&cfg, 1e-4, 20).unwrap();
        assert!(fine.distortion < 1e-5);
        assert!(fine.distortion < coarse.distortion);
        assert!(fine.rate > coarse.rate);
    }

    #[test]
    fn zero_reconstruction_risk() {
        // E L(X, 0) = 1 + d/(n+1)
        let (n, d) = (10, 3);
        let cfg = LatentConfig::new(n, d, Prior::GaussianIsotropic, 7).unwrap();
        let p = quantization_upper_bound(&cfg, 100.0, 4000).unwrap();
        assert_eq!(p.rate, 0.0);
        let want = 1.0 + d as f64 / (n + 1) as f64;
        let se = p.distortion_std_error.unwrap();
        assert!((p.distortion - want).abs() < 5.0 * se, "{} vs {want} se {se}", p.distortion);
        assert!(p.distortion >= 0.9);
    }

    #[test]
    fn deterministic() {
        let cfg = LatentConfig::new(8, 3, Prior::SphereUniform, 5).unwrap();
        assert_eq!(
            quantization_upper_bound(&cfg, 0.05, 16).unwrap(),
            quantization_upper_bound(&cfg, 0.05, 16).unwrap()
        );
    }
}
