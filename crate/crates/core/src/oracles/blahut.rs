//! Blahut–Arimoto solver for discrete rate-distortion problems.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Source distribution, distortion measure, and a target distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRDProblem {
    source_pmf: Vec<f64>,
    /// `M x K` distortion between source symbol `j` and reproduction symbol `k`.
    distortion: DMatrix<f64>,
    target_distortion: f64,
}

impl DiscreteRDProblem {
    pub fn new(source_pmf: Vec<f64>, distortion: DMatrix<f64>, target_distortion: f64) -> Result<Self> {
        if source_pmf.is_empty() || distortion.ncols() == 0 {
            return Err(Error::param("alphabets must be non-empty"));
        }
        if distortion.nrows() != source_pmf.len() {
            return Err(Error::dims((source_pmf.len(), distortion.ncols()), distortion.shape()));
        }
        if source_pmf.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("source probabilities must be finite and >= 0"));
        }
        let total: f64 = source_pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("source pmf sums to {total}, not 1")));
        }
        if distortion.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("distortion entries must be finite and >= 0"));
        }
        if !(target_distortion > 0.0) || !target_distortion.is_finite() {
            return Err(Error::domain(format!("target distortion must be positive, got {target_distortion}")));
        }
        Ok(Self {
            source_pmf,
            distortion,
            target_distortion,
        })
    }

    /// Bernoulli(`p`) source with Hamming distortion.
    pub fn binary_hamming(p: f64, target_distortion: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
        }
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        Self::new(vec![1.0 - p, p], d, target_distortion)
    }

    /// `N(0, sigma^2)` on `points` equally spaced cells over `[-width*sigma, width*sigma]`,
    /// probabilities by density times cell width renormalized, squared-error distortion,
    /// reproduction alphabet equal to the source grid.
    pub fn discretized_gaussian(sigma: f64, points: usize, width: f64, target_distortion: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(width > 0.0) || points < 2 {
            return Err(Error::param("need sigma > 0, width > 0 and at least 2 grid points"));
        }
        let grid = gaussian_grid(sigma, points, width);
        let mut pmf: Vec<f64> = grid.iter().map(|x| (-0.5 * (x / sigma).powi(2)).exp()).collect();
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        let d = DMatrix::from_fn(points, points, |j, k| (grid[j] - grid[k]).powi(2));
        Self::new(pmf, d, target_distortion)
    }

    pub fn source_pmf(&self) -> &[f64] {
        &self.source_pmf
    }

    pub fn distortion_matrix(&self) -> &DMatrix<f64> {
        &self.distortion
    }

    pub fn target_distortion(&self) -> f64 {
        self.target_distortion
    }

    pub fn with_target(&self, target_distortion: f64) -> Result<Self> {
        Self::new(self.source_pmf.clone(), self.distortion.clone(), target_distortion)
    }

    /// `min_k sum_j p_j d(j, k)`: the smallest distortion reachable at zero rate.
    pub fn max_distortion(&self) -> f64 {
        (0..self.distortion.ncols())
            .map(|k| {
                self.source_pmf
                    .iter()
                    .enumerate()
                    .map(|(j, p)| p * self.distortion[(j, k)])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Variance of the source when the alphabet is the real grid `points`.
    pub fn variance_on(&self, points: &[f64]) -> f64 {
        let mean: f64 = self.source_pmf.iter().zip(points).map(|(p, x)| p * x).sum();
        self.source_pmf.iter().zip(points).map(|(p, x)| p * (x - mean).powi(2)).sum()
    }
}

/// Cell centers used by [`DiscreteRDProblem::discretized_gaussian`].
pub fn gaussian_grid(sigma: f64, points: usize, width: f64) -> Vec<f64> {
    let step = 2.0 * width * sigma / (points - 1) as f64;
    (0..points).map(|i| -width * sigma + i as f64 * step).collect()
}

/// A point on (or certified near) the rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RDCurvePoint {
    /// Lagrange slope; absent for points not produced by a slope iteration.
    pub slope: Option<f64>,
    /// Achievable rate at `distortion` (nats).
    pub rate: f64,
    pub distortion: f64,
    /// Certified lower bound on `R(distortion)`, when available.
    pub lower_bound: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `rate - lower_bound`, or 0 when no dual certificate exists.
    pub duality_gap_bound: f64,
    /// Monte Carlo standard error of `distortion`, when estimated.
    pub distortion_std_error: Option<f64>,
}

/// Iteration state of the alternating minimization, with row-major copies of the
/// kernel `exp(s d_jk)` and of `d_jk exp(s d_jk)`.
struct Solver<'a> {
    pmf: &'a [f64],
    k: usize,
    kernel: Vec<f64>,
    weighted: Vec<f64>,
}

struct Sweep {
    /// `-sum_j p_j log Z_j`: the Lagrangian after the channel update.
    objective: f64,
    log_c: Vec<f64>,
    distortion: f64,
    sum_p_log_z: f64,
}

/// Reproduction masses below this are set to zero to keep the iteration out of
/// subnormal arithmetic.
const MASS_FLOOR: f64 = 1e-280;

impl<'a> Solver<'a> {
    fn new(problem: &'a DiscreteRDProblem, slope: f64) -> Self {
        let (m, k) = problem.distortion.shape();
        let mut kernel = Vec::with_capacity(m * k);
        let mut weighted = Vec::with_capacity(m * k);
        for j in 0..m {
            for kk in 0..k {
                let dist = problem.distortion[(j, kk)];
                let e = (slope * dist).exp();
                kernel.push(e);
                weighted.push(e * dist);
            }
        }
        Self {
            pmf: &problem.source_pmf,
            k,
            kernel,
            weighted,
        }
    }

    fn sweep(&self, q: &[f64]) -> Sweep {
        let k = self.k;
        let mut c = vec![0.0; k];
        let mut sum_p_log_z = 0.0;
        let mut distortion = 0.0;
        for (j, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = &self.kernel[j * k..(j + 1) * k];
            let wrow = &self.weighted[j * k..(j + 1) * k];
            let z: f64 = row.iter().zip(q).map(|(e, qk)| e * qk).sum::<f64>().max(f64::MIN_POSITIVE);
            sum_p_log_z += p * z.ln();
            let w = p / z;
            let mut dj = 0.0;
            for ((ck, e), (qk, we)) in c.iter_mut().zip(row).zip(q.iter().zip(wrow)) {
                *ck += w * e;
                dj += qk * we;
            }
            distortion += w * dj;
        }
        let log_c = c.iter().map(|v| v.ln()).collect();
        Sweep {
            objective: -sum_p_log_z,
            log_c,
            distortion,
            sum_p_log_z,
        }
    }
}

/// Blahut–Arimoto at Lagrange slope `slope < 0`, recording the Lagrangian after
/// every iteration. Returns the point, the trace, and the final reproduction pmf.
///
/// Each iteration first tries the over-relaxed update `q_k c_k^mu`; if that raises
/// the Lagrangian the plain update is taken instead, so the trace never increases.
pub fn blahut_arimoto_traced(
    problem: &DiscreteRDProblem,
    slope: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&[f64]>,
) -> Result<(RDCurvePoint, Vec<f64>, Vec<f64>)> {
    if !(slope < 0.0) || !slope.is_finite() {
        return Err(Error::param(format!("slope must be negative and finite, got {slope}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let k = problem.distortion.ncols();
    let mut q = match init {
        Some(q0) if q0.len() == k => q0.to_vec(),
        Some(q0) => return Err(Error::dims((1, k), (1, q0.len()))),
        None => vec![1.0 / k as f64; k],
    };
    let solver = Solver::new(problem, slope);
    let mut s = solver.sweep(&q);
    let mut trace = vec![s.objective];
    let mut iterations = 0;
    let mut mu = 1.0;
    loop {
        let max_log_c = s.log_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg_log_c: f64 = q
            .iter()
            .zip(&s.log_c)
            .filter(|(qk, _)| **qk > 0.0)
            .map(|(qk, lc)| qk * lc.exp() * lc)
            .sum();
        let gap = (max_log_c - avg_log_c).max(0.0);
        // rate of the current channel and the dual certificate at its distortion
        let base = slope * s.distortion - s.sum_p_log_z;
        let rate = (base - avg_log_c).max(0.0);
        let lower = base - max_log_c;
        let converged = gap < tol;
        if converged || iterations >= max_iter {
            let point = RDCurvePoint {
                slope: Some(slope),
                rate,
                distortion: s.distortion,
                lower_bound: Some(lower),
                iterations,
                converged,
                duality_gap_bound: gap,
                distortion_std_error: None,
            };
            return Ok((point, trace, q));
        }
        // over-relaxed step, kept only if the Lagrangian does not increase
        let mut accepted = false;
        if mu > 1.0 {
            let q_acc = relaxed_update(&q, &s.log_c, max_log_c, mu);
            let s_acc = solver.sweep(&q_acc);
            if s_acc.objective <= s.objective {
                q = q_acc;
                s = s_acc;
                mu = (mu * MU_GROWTH).min(MU_MAX);
                accepted = true;
            } else {
                mu = (mu / MU_SHRINK).max(1.0);
            }
        } else {
            mu = MU_GROWTH;
        }
        if !accepted {
            q = relaxed_update(&q, &s.log_c, max_log_c, 1.0);
            s = solver.sweep(&q);
        }
        trace.push(s.objective);
        iterations += 1;
    }
}

const MU_GROWTH: f64 = 1.25;
const MU_SHRINK: f64 = 4.0;
const MU_MAX: f64 = 64.0;

/// `q_k c_k^mu`, renormalized; `mu = 1` is the plain Blahut–Arimoto step.
fn relaxed_update(q: &[f64], log_c: &[f64], max_log_c: f64, mu: f64) -> Vec<f64> {
    let mut out: Vec<f64> = q
        .iter()
        .zip(log_c)
        .map(|(qk, lc)| if *qk > 0.0 { qk * (mu * (lc - max_log_c)).exp() } else { 0.0 })
        .collect();
    let total: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= total;
        if *v < MASS_FLOOR {
            *v = 0.0;
        }
    }
    out
}

/// Blahut–Arimoto at a fixed Lagrange slope.
pub fn blahut_arimoto(problem: &DiscreteRDProblem, slope: f64, tol: f64, max_iter: usize) -> Result<RDCurvePoint> {
    blahut_arimoto_traced(problem, slope, tol, max_iter, None).map(|(p, _, _)| p)
}

/// Solves for the curve point nearest `problem.target_distortion()` by a safeguarded
/// secant search on the slope, warm-starting each solve from the previous
/// reproduction distribution. The returned rate and lower bound refer to the
/// achieved `distortion`, which matches the target to relative accuracy
/// [`TARGET_LOG_TOLERANCE`] or to within `tol / |s|`.
/// Targets at or above [`DiscreteRDProblem::max_distortion`] return rate 0.
pub fn blahut_arimoto_at_distortion(problem: &DiscreteRDProblem, tol: f64, max_iter: usize) -> Result<RDCurvePoint> {
    let target = problem.target_distortion;
    let d_max = problem.max_distortion();
    if target >= d_max {
        return Ok(RDCurvePoint {
            slope: Some(0.0),
            rate: 0.0,
            distortion: d_max,
            lower_bound: Some(0.0),
            iterations: 0,
            converged: true,
            duality_gap_bound: 0.0,
            distortion_std_error: None,
        });
    }
    // Root of g(u) = log D(-e^u) - log target. g decreases in u and is close to
    // linear with slope -1 for smooth sources; safeguarded secant with bisection.
    let g_of = |p: &RDCurvePoint| {
        if p.distortion > 0.0 {
            (p.distortion / target).ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let (mut lo, mut hi) = (U_RANGE.0, U_RANGE.1);
    let mut warm: Option<Vec<f64>> = None;
    let mut best: Option<(f64, RDCurvePoint)> = None;
    let mut total_iter = 0;
    let mut prev: Option<(f64, f64)> = None;
    let mut u = 0.0_f64;
    for _ in 0..TARGET_MAX_STEPS {
        let (point, _, q) = blahut_arimoto_traced(problem, -u.exp(), tol, max_iter, warm.as_deref())?;
        total_iter += point.iterations;
        warm = Some(q);
        let g = g_of(&point);
        if best.as_ref().is_none_or(|(bg, _)| bg.abs() > g.abs()) {
            best = Some((g, point));
        }
        // close enough once the distortion mismatch costs less than `tol` in rate
        if g.abs() <= TARGET_LOG_TOLERANCE || u.exp() * (point.distortion - target).abs() <= tol {
            break;
        }
        if g > 0.0 {
            lo = lo.max(u);
        } else {
            hi = hi.min(u);
        }
        let mut next = match prev {
            Some((pu, pg)) if g.is_finite() && pg.is_finite() && pg != g => u - g * (u - pu) / (g - pg),
            _ if g.is_finite() => u + g,
            _ => 0.5 * (lo + hi),
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if hi - lo < 1e-12 {
            break;
        }
        prev = Some((u, g));
        u = next;
    }
    let (_, mut point) = best.expect("at least one step");
    point.iterations = total_iter;
    Ok(point)
}

/// Search range for `log |s|`.
const U_RANGE: (f64, f64) = (-16.0, 16.0);
const TARGET_MAX_STEPS: usize = 60;
/// Relative distortion accuracy of the slope search.
pub const TARGET_LOG_TOLERANCE: f64 = 1e-6;

/// Independent solves over a set of slopes, in input order.
pub fn rd_curve(problem: &DiscreteRDProblem, slopes: &[f64], tol: f64, max_iter: usize) -> Result<Vec<RDCurvePoint>> {
    slopes
        .par_iter()
        .map(|s| blahut_arimoto(problem, *s, tol, max_iter))
        .collect()
}
