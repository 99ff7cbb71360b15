//! Step-kernel random geometric graphs with bit-packed storage.

use nalgebra::DMatrix;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::LatentMatrix;
use crate::sampling::{sample_latents, stream_rng, LatentConfig, Prior};

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 4096;

/// Default number of inner-product draws for threshold calibration.
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 1_000_000;

const CALIBRATION_CHUNK: usize = 50_000;

/// Symmetric 0/1 matrix with zero diagonal, one bit per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::param(format!("n = {n} exceeds the {MAX_VERTICES}-vertex limit")));
        }
        let words = n.div_ceil(64);
        Ok(Self {
            n,
            words,
            bits: vec![0; n * words],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sets `A_ij = A_ji = 1`; the diagonal is ignored.
    pub fn insert(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.bits[i * self.words..(i + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// `C(n, 2)`.
    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn density(&self) -> f64 {
        match self.pair_count() {
            0 => 0.0,
            pairs => self.edge_count() as f64 / pairs as f64,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.contains(i, j) { 1.0 } else { 0.0 })
    }

    /// Relabels vertex `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut out = Self::empty(self.n)?;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.contains(i, j) {
                    out.insert(perm[i], perm[j]);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct GraphSample {
    pub adjacency: Adjacency,
    pub latents: LatentMatrix,
    pub tau: f64,
    /// Density the threshold was calibrated for, when known.
    pub target_density: Option<f64>,
    pub realized_density: f64,
}

fn check_probability_open(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// One draw of `<z, z'>` for independent latent rows, using exact reductions:
/// Gaussian rows give `sqrt(chi2_d / d) * N(0, 1/d)`, sphere rows give
/// `g / sqrt(g^2 + chi2_{d-1})`.
fn inner_product_draw<R: rand::Rng + ?Sized>(d: usize, prior: Prior, rest: Option<&ChiSquared<f64>>, rng: &mut R) -> f64 {
    let df = d as f64;
    match prior {
        Prior::GaussianIsotropic => {
            let chi: f64 = rest.expect("chi-square for gaussian").sample(rng);
            let g: f64 = StandardNormal.sample(rng);
            (chi / df).sqrt() * g / df.sqrt()
        }
        Prior::SphereUniform => {
            let g: f64 = StandardNormal.sample(rng);
            let tail = rest.map_or(0.0, |c| c.sample(rng));
            g / (g * g + tail).sqrt()
        }
    }
}

/// Empirical `(1 - p)`-quantile of `<z_i, z_j>` over `samples` independent pairs, so
/// that `P(<z_i, z_j> >= tau) ~ p`.
pub fn calibrate_threshold(d: usize, p: f64, prior: Prior, samples: usize, seed: u64) -> Result<f64> {
    check_probability_open(p)?;
    if d == 0 {
        return Err(Error::param("d must be >= 1"));
    }
    if samples == 0 {
        return Err(Error::param("samples must be >= 1"));
    }
    let rest = match prior {
        Prior::GaussianIsotropic => Some(ChiSquared::new(d as f64).expect("d >= 1")),
        Prior::SphereUniform if d > 1 => Some(ChiSquared::new((d - 1) as f64).expect("d >= 2")),
        Prior::SphereUniform => None,
    };
    let chunks = samples.div_ceil(CALIBRATION_CHUNK);
    let mut values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let size = CALIBRATION_CHUNK.min(samples - c * CALIBRATION_CHUNK);
            (0..size)
                .map(|_| inner_product_draw(d, prior, rest.as_ref(), &mut rng))
                .collect::<Vec<_>>()
        })
        .collect();
    values.sort_unstable_by(f64::total_cmp);
    Ok(quantile_sorted(&values, 1.0 - p))
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Thresholds the Gram matrix of the latents: `A_ij = 1{<z_i, z_j> >= tau}`, `i != j`.
pub fn graph_from_latents(latents: LatentMatrix, tau: f64) -> Result<GraphSample> {
    let n = latents.n();
    let mut adjacency = Adjacency::empty(n)?;
    let x = latents.gram();
    for i in 0..n {
        for j in (i + 1)..n {
            if x[(i, j)] >= tau {
                adjacency.insert(i, j);
            }
        }
    }
    let realized_density = adjacency.density();
    Ok(GraphSample {
        adjacency,
        latents,
        tau,
        target_density: None,
        realized_density,
    })
}

/// Samples latents from `cfg` and thresholds them at `tau`.
pub fn generate_graph(cfg: &LatentConfig, tau: f64) -> Result<GraphSample> {
    cfg.validate()?;
    if tau.is_nan() {
        return Err(Error::param("tau must not be NaN"));
    }
    graph_from_latents(sample_latents(cfg), tau)
}

/// Ideal code length in bits of the graph's `C(n, 2)` pair indicators under an
/// i.i.d. Bernoulli(`p`) model; arithmetic coding attains it within 2 bits.
pub fn bernoulli_code_length(adjacency: &Adjacency, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
    }
    let ones = adjacency.edge_count() as f64;
    let zeros = adjacency.pair_count() as f64 - ones;
    let term = |count: f64, prob: f64| if count == 0.0 { 0.0 } else { -count * prob.log2() };
    Ok(term(ones, p) + term(zeros, 1.0 - p))
}
