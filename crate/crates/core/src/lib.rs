//! Numerical toolkit for rate-distortion lower bounds on Wishart and spherical Gram
//! matrices, the oracles that certify them, and random geometric graph recovery
//! experiments around the `d ~ n h(p)` threshold.
//!
//! Modules:
//! - [`linalg`]: Gram and Procrustes losses, PSD square root, nuclear norm, polar decomposition.
//! - [`sampling`]: reproducible Gaussian/spherical latents, Wishart draws, norm/direction split.
//! - [`specfun`]: log-gamma, digamma, multivariate variants, binary entropy.
//! - [`bounds`]: closed-form lower bounds with itemized terms.
//! - [`oracles`]: Blahut–Arimoto, quantization achievability, Monte Carlo entropy, inequality suites.
//! - [`rgg`]: step-kernel random geometric graphs, a spectral estimator, phase sweeps.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod oracles;
pub mod rgg;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
pub use linalg::{GramMatrix, LatentMatrix};
pub use sampling::{LatentConfig, Prior};
