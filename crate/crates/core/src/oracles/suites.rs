//! Randomized and grid verification suites for the inequalities and moment identities
//! the bounds rely on.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::entropy_mc::CHUNK;
use crate::error::{Error, Result};
use crate::linalg::{LatentMatrix, LossChain};
use crate::sampling::{random_orthogonal, stream_id, stream_rng};
use crate::specfun::{digamma, ln_gamma, multivariate_digamma, multivariate_log_gamma, stirling_lower_bound};

/// Absolute tolerance for inequality checks.
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;

/// Moment identities must hold within this many standard errors.
pub const MOMENT_SIGMAS: f64 = 5.0;

/// Largest `n` and `d` drawn by the Procrustes chain suite.
pub const LEMMA31_MAX_DIM: usize = 20;

pub const SUITE_NAMES: [&str; 4] = ["lemma31", "moments_spherical", "specfun", "all"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub evaluations: usize,
    pub violations: usize,
    /// Smallest `rhs - lhs` observed (negative on violation).
    pub worst_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl SuiteCheck {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            evaluations: 0,
            violations: 0,
            worst_slack: f64::INFINITY,
            observed: None,
            expected: None,
            std_error: None,
        }
    }

    /// Records `lhs <= rhs` up to `tol`.
    fn record_le(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let slack = rhs - lhs;
        self.evaluations += 1;
        if !(slack >= -tol) {
            self.violations += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }

    /// Records the strict `lhs < rhs`.
    fn record_lt(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        self.evaluations += 1;
        if !(slack > 0.0) {
            self.violations += 1;
        }
        self.worst_slack = self.worst_slack.min(slack);
    }

    fn absorb(&mut self, other: &SuiteCheck) {
        self.evaluations += other.evaluations;
        self.violations += other.violations;
        self.worst_slack = self.worst_slack.min(other.worst_slack);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<SuiteCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(SuiteCheck::passed)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs a named suite. `trials` is the number of random pairs (`lemma31`), samples per
/// parameter pair (`moments_spherical`), or grid points (`specfun`).
pub fn verify_inequality_suite(suite_name: &str, trials: usize, seed: u64) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let checks = match suite_name {
        "lemma31" => lemma31_checks(trials, seed),
        "moments_spherical" => moment_checks(&DEFAULT_MOMENT_PARAMS, trials, seed)?,
        "specfun" => specfun_checks(trials),
        "all" => {
            let mut all = lemma31_checks(trials, seed);
            all.extend(moment_checks(&DEFAULT_MOMENT_PARAMS, trials, seed)?);
            all.extend(specfun_checks(trials));
            all
        }
        other => return Err(Error::UnknownSuite(other.to_owned())),
    };
    Ok(SuiteReport {
        suite: suite_name.to_owned(),
        trials,
        seed,
        checks,
    })
}

const LEMMA31_NAMES: [&str; 6] = [
    "lemma31_stated",
    "lemma31_corrected",
    "procrustes_le_sqrt_difference",
    "powers_stormer",
    "rank_bound_sqrt_d",
    "rank_bound_sqrt_2d",
];

/// A random pair for trial `t`: independent draws or a rotated noisy copy.
pub fn lemma31_pair(seed: u64, trial: u64) -> (LatentMatrix, LatentMatrix) {
    let mut rng = stream_rng(seed, trial);
    let n = rng.random_range(1..=LEMMA31_MAX_DIM);
    let d = rng.random_range(1..=LEMMA31_MAX_DIM);
    let scale = 1.0 / (d as f64).sqrt();
    let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
        nalgebra::DMatrix::<f64>::from_fn(n, d, |_, _| {
            let g: f64 = StandardNormal.sample(rng);
            g * scale
        })
    };
    let a = gauss(&mut rng);
    let b = if rng.random_bool(0.5) {
        gauss(&mut rng)
    } else {
        let o = random_orthogonal(d, &mut rng);
        let sigma = 10f64.powf(rng.random_range(-3.0..0.0));
        &a * o + gauss(&mut rng) * sigma
    };
    (
        LatentMatrix::new(a).expect("finite draw"),
        LatentMatrix::new(b).expect("finite draw"),
    )
}

fn lemma31_checks(trials: usize, seed: u64) -> Vec<SuiteCheck> {
    let per_trial: Vec<[SuiteCheck; 6]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (a, b) = lemma31_pair(seed, t);
            let (n, d) = (a.n() as f64, a.d() as f64);
            let chain = LossChain::evaluate(&a, &b).expect("valid pair");
            let mut c = LEMMA31_NAMES.map(SuiteCheck::new);
            let tol = INEQUALITY_TOLERANCE;
            let l = chain.procrustes;
            c[0].record_le(l, ((n + 1.0) / n * chain.gram_loss).sqrt(), tol);
            c[1].record_le(l, (2.0 * (n + 1.0) / n * chain.gram_loss).sqrt(), tol);
            c[2].record_le(l, chain.sqrt_difference, tol);
            c[3].record_le(chain.sqrt_difference, chain.nuclear, tol);
            c[4].record_le(chain.nuclear, d.sqrt() * chain.frobenius / n, tol);
            c[5].record_le(chain.nuclear, (2.0 * d).sqrt() * chain.frobenius / n, tol);
            c
        })
        .collect();
    let mut out = LEMMA31_NAMES.map(SuiteCheck::new).to_vec();
    for c in &per_trial {
        for (acc, x) in out.iter_mut().zip(c) {
            acc.absorb(x);
        }
    }
    out
}

/// `(d, delta)` pairs checked by default.
pub const DEFAULT_MOMENT_PARAMS: [(usize, f64); 2] = [(8, 0.3), (50, 0.1)];

#[derive(Default, Clone, Copy)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        let count = self.count + o.count;
        if count == 0 {
            return Welford::default();
        }
        let delta = o.mean - self.mean;
        Welford {
            count,
            mean: self.mean + delta * o.count as f64 / count as f64,
            m2: self.m2 + o.m2 + delta * delta * self.count as f64 * o.count as f64 / count as f64,
        }
    }

    fn std_error(&self) -> f64 {
        (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
    }
}

const MOMENT_LABELS: [&str; 5] = [
    "E[beta_hat^2] = 1 + delta^2",
    "E[(beta_hat^2 - beta^2)^2] = 4 delta^2 + 3 delta^4",
    "E[(beta_hat_i beta_hat_j - beta_i beta_j)^2] = 2 delta^2 + delta^4",
    "E[X_ij^2] = 1/d",
    "E[(X_ii - 1)^2] = 2/d",
];

/// Exact values of the five moments at `(d, delta)`.
pub fn moment_targets(d: usize, delta: f64) -> [f64; 5] {
    let s2 = delta * delta;
    [
        1.0 + s2,
        4.0 * s2 + 3.0 * s2 * s2,
        2.0 * s2 + s2 * s2,
        1.0 / d as f64,
        2.0 / d as f64,
    ]
}

/// Monte Carlo check of the norm/direction moment identities, `samples` pairs of
/// Gaussian rows per `(d, delta)`.
pub fn moment_checks(params: &[(usize, f64)], samples: usize, seed: u64) -> Result<Vec<SuiteCheck>> {
    if samples < 2 {
        return Err(Error::param("need at least 2 samples"));
    }
    let mut out = Vec::new();
    for (idx, &(d, delta)) in params.iter().enumerate() {
        if d == 0 || !(delta > 0.0) {
            return Err(Error::param(format!("need d >= 1 and delta > 0, got d={d} delta={delta}")));
        }
        let noise = Normal::new(0.0, delta).expect("delta > 0");
        let scale = 1.0 / (d as f64).sqrt();
        let chunks = samples.div_ceil(CHUNK);
        let parts: Vec<[Welford; 5]> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(seed, stream_id(idx as u32, c as u32));
                let mut acc = [Welford::default(); 5];
                let mut wi = vec![0.0; d];
                let mut wj = vec![0.0; d];
                for _ in 0..CHUNK.min(samples - c * CHUNK) {
                    for v in wi.iter_mut().chain(wj.iter_mut()) {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        *v = g * scale;
                    }
                    let bi2: f64 = wi.iter().map(|v| v * v).sum();
                    let bj2: f64 = wj.iter().map(|v| v * v).sum();
                    let (bi, bj) = (bi2.sqrt(), bj2.sqrt());
                    let hi = bi + noise.sample(&mut rng);
                    let hj = bj + noise.sample(&mut rng);
                    let dot: f64 = wi.iter().zip(&wj).map(|(a, b)| a * b).sum();
                    let zij = dot / (bi * bj);
                    acc[0].push(hi * hi);
                    acc[1].push((hi * hi - bi2).powi(2));
                    acc[2].push((hi * hj - bi * bj).powi(2));
                    acc[3].push(zij * zij);
                    acc[4].push((bi2 - 1.0).powi(2));
                }
                acc
            })
            .collect();
        let mut total = [Welford::default(); 5];
        for p in parts {
            for (t, x) in total.iter_mut().zip(p) {
                *t = t.merge(x);
            }
        }
        for ((label, w), target) in MOMENT_LABELS.iter().zip(total).zip(moment_targets(d, delta)) {
            let se = w.std_error();
            let mut check = SuiteCheck::new(format!("{label} (d={d}, delta={delta})"));
            check.record_le((w.mean - target).abs(), MOMENT_SIGMAS * se, 0.0);
            check.evaluations = w.count;
            check.observed = Some(w.mean);
            check.expected = Some(target);
            check.std_error = Some(se);
            out.push(check);
        }
    }
    Ok(out)
}

/// Log-spaced grid of `points` values over `[lo, hi]`.
fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = (points.max(2) - 1) as f64;
    (0..points).map(move |i| (a + (b - a) * i as f64 / last).exp())
}

/// Grid range of the scalar sandwiches.
pub const SPECFUN_GRID: (f64, f64) = (1e-3, 1e5);

/// Absolute tolerance for the multivariate gamma recursion.
pub const RECURSION_TOLERANCE: f64 = 1e-10;

fn specfun_checks(points: usize) -> Vec<SuiteCheck> {
    let mut lower = SuiteCheck::new("digamma_lower: log x - 1/x < psi(x)");
    let mut upper = SuiteCheck::new("digamma_upper: psi(x) < log x");
    let mut stirling = SuiteCheck::new("stirling: log Gamma(x + 1/2) >= x log(x + 1/2) - x - 1/2 + log(2 pi)/2");
    for x in log_grid(SPECFUN_GRID.0, SPECFUN_GRID.1, points) {
        let psi = digamma(x);
        lower.record_lt(x.ln() - 1.0 / x, psi);
        upper.record_lt(psi, x.ln());
        stirling.record_le(stirling_lower_bound(x), ln_gamma(x + 0.5), 0.0);
    }
    let mut gamma_rec = SuiteCheck::new("multivariate_log_gamma_recursion (n <= 10)");
    let mut digamma_rec = SuiteCheck::new("multivariate_digamma_recursion (n <= 10)");
    let per_n = (points / 10).max(10);
    let ln_pi = std::f64::consts::PI.ln();
    for n in 2..=10usize {
        let pole = (n as f64 - 1.0) / 2.0;
        for off in log_grid(1e-2, 1e2, per_n) {
            let a = pole + off;
            let full = multivariate_log_gamma(n, a).expect("a above pole").value;
            let rec = (n as f64 - 1.0) / 2.0 * ln_pi
                + ln_gamma(a)
                + multivariate_log_gamma(n - 1, a - 0.5).expect("a above pole").value;
            gamma_rec.record_le((full - rec).abs(), RECURSION_TOLERANCE, 0.0);
            let full = multivariate_digamma(n, a).expect("a above pole").value;
            let rec = digamma(a) + multivariate_digamma(n - 1, a - 0.5).expect("a above pole").value;
            digamma_rec.record_le((full - rec).abs(), RECURSION_TOLERANCE, 0.0);
        }
    }
    vec![lower, upper, stirling, gamma_rec, digamma_rec]
}
