//! Grid sweeps of estimator loss against `d / (n h(p))`.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{calibrate_threshold, generate_graph, DEFAULT_CALIBRATION_SAMPLES};
use super::spectral::{calibrate_spectral, spectral_estimate, SpectralCalibration};
use crate::error::{Error, Result};
use crate::linalg::gram_loss;
use crate::sampling::{derive_seed, LatentConfig, Prior};
use crate::specfun::h;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Spectral,
    /// `X_hat = I_n`.
    Trivial,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Spectral => "spectral",
            Estimator::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub d: usize,
    pub p: f64,
}

impl GridPoint {
    /// `d / (n h(p))`.
    pub fn ratio(&self) -> Result<f64> {
        Ok(self.d as f64 / (self.n as f64 * h(self.p)?))
    }
}

/// Cartesian product in `n`-major, then `d`, then `p` order.
pub fn grid(ns: &[usize], ds: &[usize], ps: &[f64]) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(ns.len() * ds.len() * ps.len());
    for &n in ns {
        for &d in ds {
            for &p in ps {
                out.push(GridPoint { n, d, p });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub tau: f64,
    /// Seed of the latent draw for this trial.
    pub seed: u64,
    pub estimator: String,
    #[serde(rename = "loss_L")]
    pub loss_l: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub tau: f64,
    /// `d / (n h(p))`.
    pub ratio: f64,
    pub trials: usize,
    pub mean_loss_spectral: f64,
    pub std_error_spectral: f64,
    pub mean_loss_trivial: f64,
    pub std_error_trivial: f64,
    pub mean_realized_density: f64,
    pub calibration: SpectralCalibration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SweepSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub prior: Prior,
    pub trials: usize,
    pub seed: u64,
    pub threshold_samples: usize,
    /// Record wall-clock time per trial; otherwise `runtime_s` is 0 so output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            prior: Prior::GaussianIsotropic,
            trials: 20,
            seed: 0,
            threshold_samples: DEFAULT_CALIBRATION_SAMPLES,
            timing: false,
        }
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Stream slot reserved for the spectral calibration graph of a grid point.
const CALIBRATION_SLOT: u32 = u32::MAX;
/// Stream slot reserved for the threshold quantile of a grid point.
const THRESHOLD_SLOT: u32 = u32::MAX - 1;

struct TrialResult {
    seed: u64,
    spectral: f64,
    trivial: f64,
    density: f64,
    runtime_spectral: f64,
    runtime_trivial: f64,
}

/// Runs `trials` independent (graph, estimate, loss) evaluations per grid point.
/// Emits one spectral and one trivial record per trial and one summary row per point.
pub fn phase_sweep(points: &[GridPoint], opts: &SweepOptions) -> Result<SweepOutput> {
    if points.is_empty() {
        return Err(Error::param("grid must be non-empty"));
    }
    if opts.trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let mut records = Vec::new();
    let mut summary = Vec::new();
    for (idx, pt) in points.iter().enumerate() {
        let idx = u32::try_from(idx).map_err(|_| Error::param("grid too large"))?;
        LatentConfig::new(pt.n, pt.d, opts.prior, 0)?;
        if pt.n < 2 {
            return Err(Error::param("n must be >= 2"));
        }
        let ratio = pt.ratio()?;
        let tau = calibrate_threshold(
            pt.d,
            pt.p,
            opts.prior,
            opts.threshold_samples,
            derive_seed(opts.seed, idx, THRESHOLD_SLOT),
        )?;
        let cal_cfg = LatentConfig::new(pt.n, pt.d, opts.prior, derive_seed(opts.seed, idx, CALIBRATION_SLOT))?;
        let calibration = calibrate_spectral(&cal_cfg, pt.p, tau)?;

        let results: Vec<TrialResult> = (0..opts.trials as u32)
            .into_par_iter()
            .map(|t| -> Result<TrialResult> {
                let seed = derive_seed(opts.seed, idx, t);
                let cfg = LatentConfig::new(pt.n, pt.d, opts.prior, seed)?;
                let start = Instant::now();
                let g = generate_graph(&cfg, tau)?;
                let x = g.latents.gram();
                let build = start.elapsed().as_secs_f64();
                let start = Instant::now();
                let est = spectral_estimate(&g, pt.d, pt.p, &calibration)?;
                let spectral = gram_loss(&x, &est, pt.d)?;
                let runtime_spectral = build + start.elapsed().as_secs_f64();
                let start = Instant::now();
                let trivial = gram_loss(&x, &DMatrix::identity(pt.n, pt.n), pt.d)?;
                let runtime_trivial = build + start.elapsed().as_secs_f64();
                Ok(TrialResult {
                    seed,
                    spectral,
                    trivial,
                    density: g.realized_density,
                    runtime_spectral,
                    runtime_trivial,
                })
            })
            .collect::<Result<_>>()?;

        let time = |v: f64| if opts.timing { v } else { 0.0 };
        for r in &results {
            for (est, loss, rt) in [
                (Estimator::Spectral, r.spectral, r.runtime_spectral),
                (Estimator::Trivial, r.trivial, r.runtime_trivial),
            ] {
                records.push(ExperimentRecord {
                    n: pt.n,
                    d: pt.d,
                    p: pt.p,
                    tau,
                    seed: r.seed,
                    estimator: est.name().to_owned(),
                    loss_l: loss,
                    runtime_s: time(rt),
                });
            }
        }
        let spectral: Vec<f64> = results.iter().map(|r| r.spectral).collect();
        let trivial: Vec<f64> = results.iter().map(|r| r.trivial).collect();
        let (ms, ses) = mean_and_se(&spectral);
        let (mt, set) = mean_and_se(&trivial);
        summary.push(SweepSummary {
            n: pt.n,
            d: pt.d,
            p: pt.p,
            tau,
            ratio,
            trials: opts.trials,
            mean_loss_spectral: ms,
            std_error_spectral: ses,
            mean_loss_trivial: mt,
            std_error_trivial: set,
            mean_realized_density: results.iter().map(|r| r.density).sum::<f64>() / results.len() as f64,
            calibration,
        });
    }
    Ok(SweepOutput { records, summary })
}
