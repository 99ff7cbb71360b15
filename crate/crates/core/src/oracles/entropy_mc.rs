//! Monte Carlo estimate of the Wishart differential entropy from its log-density.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{sample_latents_with, stream_rng, Prior};
use crate::specfun::multivariate_log_gamma;

/// Samples per RNG stream; fixed so results do not depend on the thread count.
pub const CHUNK: usize = 10_000;

/// Smallest sample count accepted by [`mc_differential_entropy_wishart`].
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Draws whose Cholesky factorization failed and were replaced.
    pub rejected: usize,
}

/// Log-density of `Wishart_n(d, I/d)` at `x`, given `log Gamma_n(d/2)`.
/// Returns `None` when `x` is not numerically positive definite.
pub fn wishart_log_density(x: &DMatrix<f64>, d: usize, log_gamma_n: f64) -> Option<f64> {
    let n = x.nrows();
    let chol = Cholesky::new(x.clone())?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return None;
    }
    let (nf, df) = (n as f64, d as f64);
    Some((df - nf - 1.0) / 2.0 * log_det - df / 2.0 * x.trace() + nf * df / 2.0 * (df / 2.0).ln() - log_gamma_n)
}

#[derive(Default, Clone, Copy)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
    rejected: usize,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        let count = self.count + other.count;
        if count == 0 {
            return Moments {
                rejected: self.rejected + other.rejected,
                ..Moments::default()
            };
        }
        let (a, b) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * b / count as f64,
            m2: self.m2 + other.m2 + delta * delta * a * b / count as f64,
            rejected: self.rejected + other.rejected,
        }
    }
}

/// Mean and standard error of `-log f(X)` over `samples` Gaussian-prior Gram draws.
pub fn mc_differential_entropy_wishart(n: usize, d: usize, samples: usize, seed: u64) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    if d < n {
        return Err(Error::domain(format!("Wishart density needs d >= n (n={n}, d={d})")));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::param(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let lg = multivariate_log_gamma(n, d as f64 / 2.0)?.value;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = CHUNK.min(samples - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            let mut m = Moments::default();
            while m.count < size {
                let z = sample_latents_with(n, d, Prior::GaussianIsotropic, &mut rng);
                let x = &*z * z.transpose();
                match wishart_log_density(&x, d, lg) {
                    Some(lf) => m.push(-lf),
                    None => m.rejected += 1,
                }
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let k = total.count as f64;
    let var = total.m2 / (k - 1.0);
    Ok(EntropyEstimate {
        estimate: total.mean,
        std_error: (var / k).sqrt(),
        samples: total.count,
        rejected: total.rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::wishart_differential_entropy;

    #[test]
    fn exponential_case() {
        // n = 1, d = 2: X ~ Exp(1)
        let e = mc_differential_entropy_wishart(1, 2, 50_000, 3).unwrap();
        assert!((e.estimate - 1.0).abs() < 3.0 * e.std_error);
        assert_eq!(e.samples, 50_000);
        assert_eq!(e.rejected, 0);
    }

    #[test]
    fn density_matches_scalar_chi_square() {
        // n = 1: X = chi^2_d / d, density (d/2)^{d/2} x^{d/2-1} e^{-dx/2} / Gamma(d/2)
        let d = 5;
        let x = DMatrix::from_element(1, 1, 0.7);
        let lg = crate::specfun::ln_gamma(2.5);
        let got = wishart_log_density(&x, d, lg).unwrap();
        let want = 2.5 * 2.5f64.ln() + 1.5 * 0.7f64.ln() - 2.5 * 0.7 - lg;
        assert!((got - want).abs() < 1e-13);
        assert!(wishart_log_density(&DMatrix::zeros(2, 2), 3, 0.0).is_none());
    }

    #[test]
    fn closed_form_agreement_small() {
        let e = mc_differential_entropy_wishart(2, 5, 100_000, 11).unwrap();
        let exact = wishart_differential_entropy(2, 5).unwrap();
        assert!((e.estimate - exact).abs() < 4.0 * e.std_error);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(mc_differential_entropy_wishart(3, 2, 10_000, 0), Err(Error::Domain(_))));
        assert!(mc_differential_entropy_wishart(1, 2, 100, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = mc_differential_entropy_wishart(2, 3, 25_000, 9).unwrap();
        let b = mc_differential_entropy_wishart(2, 3, 25_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
