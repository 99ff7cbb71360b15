//! Closed-form lower bounds on the rate-distortion function of `X = Z Z^T`.
//!
//! Every bound is returned as a [`BoundReport`] whose `terms` sum to `value_nats`.
//! Related quantities that are not summands (simplified forms, exact intermediates,
//! remainders) go in `auxiliary`. Absolute constants that the theory leaves
//! unspecified are taken from [`BoundConstants`] and echoed in every report.

use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{h, multivariate_digamma, multivariate_log_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SmallD,
    LargeD,
    MiddleD,
    Spherical,
    EntropyCount,
}

/// Named absolute constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Leading constant `c` in `c n min(n, d) log(1/D)`.
    pub c: f64,
    /// Regime split `c*`: small-d is `d <= c* n`.
    pub c_star: f64,
    /// Covering constant: `|N(O(d), eps)| <= (sqrt(C0 d) / eps)^{d^2}`.
    pub c0: f64,
    /// Lower constant in `eps >= c1 sqrt(d D)`.
    pub c1: f64,
    /// Quadratic slack `K` in `(n(n+1)/4) log(1/D) - K n^2`.
    pub k_slack: f64,
    /// Distortion factor `f` in `R_X(D) >= R_Z(sqrt(f D))`.
    pub comparison_factor: f64,
}

/// Slack constant covering the Stirling, digamma and case-analysis remainders of the
/// large-d chain for every `d >= n >= 1`: `ln2/2 + (1 - ln2)/2 + 1`.
pub const DEFAULT_K_SLACK: f64 = 1.5;

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            c: 0.125,
            c_star: 0.01,
            c0: 16.0,
            c1: 0.5,
            k_slack: DEFAULT_K_SLACK,
            comparison_factor: 8.0,
        }
    }
}

impl BoundConstants {
    /// `C = C0 / c1^2`.
    pub fn net_constant(&self) -> f64 {
        self.c0 / (self.c1 * self.c1)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("c_star", self.c_star),
            ("c0", self.c0),
            ("c1", self.c1),
            ("comparison_factor", self.comparison_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("constant {name} must be positive, got {v}")));
            }
        }
        if !(self.k_slack >= 0.0) {
            return Err(Error::param(format!("k_slack must be >= 0, got {}", self.k_slack)));
        }
        if self.c_star > 1.0 {
            return Err(Error::param("c_star must be <= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value_nats: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub regime: Regime,
    pub inputs: BTreeMap<String, f64>,
    pub constants: BoundConstants,
    /// Raw value; may be negative where the bound is vacuous.
    pub value_nats: f64,
    /// `max(value, 0)` when every validity check passes.
    pub usable_value: Option<f64>,
    pub terms: Vec<Term>,
    pub auxiliary: Vec<Term>,
    pub validity: Vec<ValidityCheck>,
}

impl BoundReport {
    pub fn is_valid(&self) -> bool {
        self.validity.iter().all(|c| c.passed)
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms
            .iter()
            .chain(&self.auxiliary)
            .find(|t| t.label == label)
            .map(|t| t.value_nats)
    }
}

struct Draft {
    name: &'static str,
    regime: Regime,
    inputs: BTreeMap<String, f64>,
    terms: Vec<Term>,
    auxiliary: Vec<Term>,
    validity: Vec<ValidityCheck>,
}

impl Draft {
    fn new(name: &'static str, regime: Regime) -> Self {
        Self {
            name,
            regime,
            inputs: BTreeMap::new(),
            terms: Vec::new(),
            auxiliary: Vec::new(),
            validity: Vec::new(),
        }
    }

    fn input(mut self, key: &str, v: f64) -> Self {
        self.inputs.insert(key.to_owned(), v);
        self
    }

    fn term(&mut self, label: &str, v: f64) {
        self.terms.push(Term {
            label: label.to_owned(),
            value_nats: v,
        });
    }

    fn aux(&mut self, label: &str, v: f64) {
        self.auxiliary.push(Term {
            label: label.to_owned(),
            value_nats: v,
        });
    }

    fn check(&mut self, name: &str, passed: bool) {
        self.validity.push(ValidityCheck {
            name: name.to_owned(),
            passed,
        });
    }

    fn finish(self, constants: &BoundConstants) -> BoundReport {
        let value_nats: f64 = self.terms.iter().map(|t| t.value_nats).sum();
        let valid = self.validity.iter().all(|c| c.passed);
        BoundReport {
            bound_name: self.name.to_owned(),
            regime: self.regime,
            inputs: self.inputs,
            constants: *constants,
            value_nats,
            usable_value: valid.then(|| value_nats.max(0.0)),
            terms: self.terms,
            auxiliary: self.auxiliary,
            validity: self.validity,
        }
    }
}

fn check_dims(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::param(format!("need n >= 1 and d >= 1, got n={n} d={d}")));
    }
    Ok(())
}

fn check_distortion(distortion: f64) -> Result<()> {
    if !(distortion > 0.0) || !distortion.is_finite() {
        return Err(Error::domain(format!("distortion must be positive and finite, got {distortion}")));
    }
    Ok(())
}

/// Rate-distortion function of an entrywise `N(0, 1/d)` `n x d` matrix under total
/// squared error: `(nd/2) log(n / D)`, clamped to zero for `D >= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianRd {
    pub value_nats: f64,
    pub clamped: bool,
}

pub fn gaussian_matrix_rd(n: usize, d: usize, distortion: f64) -> Result<GaussianRd> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let nf = n as f64;
    if distortion >= nf {
        return Ok(GaussianRd {
            value_nats: 0.0,
            clamped: true,
        });
    }
    Ok(GaussianRd {
        value_nats: (nf * d as f64 / 2.0) * (nf / distortion).ln(),
        clamped: false,
    })
}

/// Shannon lower bound for the same Gaussian matrix, computed from its differential
/// entropy `(nd/2) log(2 pi e / d)`. Coincides with [`gaussian_matrix_rd`] for `D < n`.
pub fn gaussian_matrix_slb(n: usize, d: usize, distortion: f64) -> Result<f64> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let dim = (n * d) as f64;
    let entropy = dim / 2.0 * (2.0 * PI * E / d as f64).ln();
    Ok(entropy - dim / 2.0 * (2.0 * PI * E * distortion / dim).ln())
}

/// Differential entropy of `X ~ Wishart_n(d, I/d)` in nats:
/// `(n(n+1)/2) log(2/d) + log Gamma_n(d/2) - ((d-n-1)/2) psi_n(d/2) + nd/2`.
pub fn wishart_differential_entropy(n: usize, d: usize) -> Result<f64> {
    check_dims(n, d)?;
    if d < n {
        return Err(Error::domain(format!("Wishart matrix has no density for d < n (n={n}, d={d})")));
    }
    let (nf, df) = (n as f64, d as f64);
    let half = df / 2.0;
    let lg = multivariate_log_gamma(n, half)?.value;
    let psi = multivariate_digamma(n, half)?.value;
    Ok(nf * (nf + 1.0) / 2.0 * (2.0 / df).ln() + lg - (df - nf - 1.0) / 2.0 * psi + nf * df / 2.0)
}

/// `h(X) - (n(n+1)/4) log(4 pi e D / d)`.
pub fn shannon_lower_bound_gram(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_distortion(distortion)?;
    let entropy = wishart_differential_entropy(n, d)?;
    let (nf, df) = (n as f64, d as f64);
    let mut r = Draft::new("shannon_lower_bound_gram", Regime::LargeD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("differential_entropy", entropy);
    r.term("noise_ball", -nf * (nf + 1.0) / 4.0 * (4.0 * PI * E * distortion / df).ln());
    r.check("d >= n", d >= n);
    Ok(r.finish(constants))
}

/// Expanded form of the Shannon lower bound:
/// `nd/2 + (n(n+1)/4) log(1/(pi e D d)) + log Gamma_n(d/2) - ((d-n-1)/2) psi_n(d/2)`.
pub fn slb_expanded(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    if d < n {
        return Err(Error::domain(format!("expanded SLB needs d >= n (n={n}, d={d})")));
    }
    let (nf, df) = (n as f64, d as f64);
    let lg = multivariate_log_gamma(n, df / 2.0)?.value;
    let psi = multivariate_digamma(n, df / 2.0)?.value;
    let mut r = Draft::new("slb_expanded", Regime::LargeD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("nd_over_2", nf * df / 2.0);
    r.term("distortion_log", nf * (nf + 1.0) / 4.0 * (1.0 / (PI * E * distortion * df)).ln());
    r.term("log_multivariate_gamma", lg);
    r.term("multivariate_digamma", -(df - nf - 1.0) / 2.0 * psi);
    r.check("d >= n", true);
    Ok(r.finish(constants))
}

/// `d^2 log(sqrt(C0 d) / eps)`: log of the covering-number bound for `O(d)` in Frobenius norm.
pub fn orthogonal_group_covering_log(d: usize, eps: f64, c0: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::param("d must be >= 1"));
    }
    let df = d as f64;
    if !(eps > 0.0) || eps >= df.sqrt() {
        return Err(Error::domain(format!("covering radius must lie in (0, sqrt(d)), got {eps}")));
    }
    if !(c0 >= 1.0) {
        return Err(Error::domain(format!("covering constant C0 must be >= 1, got {c0}")));
    }
    Ok(df * df * ((c0 * df).sqrt() / eps).ln())
}

/// Lower bound on the rate-distortion function of `Z` under the Procrustes loss:
/// `(nd/2) log(1/(4D)) - (d^2/2) log(C/D)`.
pub fn lemma33_bound(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let (nf, df) = (n as f64, d as f64);
    let net = constants.net_constant();
    let mut r = Draft::new("lemma33_bound", Regime::SmallD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("gaussian_rd", nf * df / 2.0 * (1.0 / (4.0 * distortion)).ln());
    r.term("net_entropy", -df * df / 2.0 * (net / distortion).ln());

    // E||Z||^2 at its concentration order (sqrt(n) + sqrt(d))^2 / d
    let spectral_sq = (nf.sqrt() + df.sqrt()).powi(2) / df;
    let eps_sq = (nf * distortion / spectral_sq).min(df);
    let net_actual = df * df / 2.0 * (constants.c0 * df / eps_sq).ln();
    r.aux("expected_spectral_norm_sq", spectral_sq);
    r.aux("epsilon_sq", eps_sq);
    r.aux("net_entropy_actual", net_actual);
    r.aux("net_entropy_bound", df * df / 2.0 * (net / distortion).ln());

    r.check("d <= n", d <= n);
    r.check("0 < D < 1/4", distortion < 0.25);
    r.check("epsilon_sq >= c1^2 d D", eps_sq >= constants.c1 * constants.c1 * df * distortion * (1.0 - 1e-12));
    Ok(r.finish(constants))
}

/// Small-d chain: the Procrustes bound evaluated at `sqrt(f D)`, next to the
/// simplified `(nd/8) log(1/D)`.
pub fn theorem2_smalld_bound(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let (nf, df) = (n as f64, d as f64);
    let comparison = (constants.comparison_factor * distortion).sqrt();
    let net = constants.net_constant();
    let mut r = Draft::new("theorem2_smalld_bound", Regime::SmallD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("gaussian_rd_at_comparison", nf * df / 2.0 * (1.0 / (4.0 * comparison)).ln());
    r.term("net_entropy_at_comparison", -df * df / 2.0 * (net / comparison).ln());
    let simplified = nf * df / 8.0 * (1.0 / distortion).ln();
    r.aux("comparison_distortion", comparison);
    r.aux("simplified_nd_over_8", simplified);

    let chain: f64 = r.terms.iter().map(|t| t.value_nats).sum();
    r.check("d <= c_star n", df <= constants.c_star * nf);
    r.check("0 < D < c_star", distortion < constants.c_star);
    r.check("comparison_distortion < 1/4", comparison < 0.25);
    r.check("chain_dominates_simplified", chain >= simplified);
    Ok(r.finish(constants))
}

/// Summands `((n+1-i)/2) log((d+1-i)/2)`, `i = 1..=n`.
pub fn rxl_sum_terms(n: usize, d: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let k = (n + 1 - i) as f64;
            k / 2.0 * ((d + 1 - i) as f64 / 2.0).ln()
        })
        .collect()
}

/// Exact remainders of the large-d chain at `(n, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeDRemainders {
    /// `n (1 - ln 2) / 2`, from the Stirling bound on `log Gamma_n`.
    pub stirling: f64,
    /// `sum_i 1/(d+1-i)` when `d = n` (negative digamma coefficient), else 0.
    pub digamma: f64,
    /// `(n(n+1)/4) log d - sum_i ((n+1-i)/2) log((d+1-i)/2)`.
    pub case_analysis: f64,
}

impl LargeDRemainders {
    pub fn new(n: usize, d: usize) -> Self {
        let (nf, df) = (n as f64, d as f64);
        let stirling = nf * (1.0 - LN_2) / 2.0;
        let digamma = if d == n {
            (1..=n).map(|i| 1.0 / (d + 1 - i) as f64).sum()
        } else {
            0.0
        };
        let sum: f64 = rxl_sum_terms(n, d).iter().sum();
        let case_analysis = nf * (nf + 1.0) / 4.0 * df.ln() - sum;
        Self {
            stirling,
            digamma,
            case_analysis,
        }
    }

    pub fn total(&self) -> f64 {
        self.stirling + self.digamma + self.case_analysis
    }
}

/// Large-d bound `(n(n+1)/4) log(1/D) - K n^2`, with the exact intermediate
/// `(n(n+1)/4) log(1/(Dd)) + sum_i ((n+1-i)/2) log((d+1-i)/2) - remainders` reported.
pub fn theorem2_larged_bound(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    if d < n {
        return Err(Error::domain(format!("large-d regime needs d >= n (n={n}, d={d})")));
    }
    let (nf, df) = (n as f64, d as f64);
    let mut r = Draft::new("theorem2_larged_bound", Regime::LargeD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    let leading = nf * (nf + 1.0) / 4.0 * (1.0 / distortion).ln();
    let slack = constants.k_slack * nf * nf;
    r.term("leading", leading);
    r.term("quadratic_slack", -slack);

    let rem = LargeDRemainders::new(n, d);
    let sum: f64 = rxl_sum_terms(n, d).iter().sum();
    let rxl_leading = nf * (nf + 1.0) / 4.0 * (1.0 / (distortion * df)).ln();
    let rxl = rxl_leading + sum - rem.stirling - rem.digamma;
    let slb = slb_expanded(n, d, distortion, constants)?.value_nats;
    r.aux("rxl_leading", rxl_leading);
    r.aux("rxl_sum", sum);
    r.aux("stirling_remainder", rem.stirling);
    r.aux("digamma_remainder", rem.digamma);
    r.aux("case_remainder", rem.case_analysis);
    r.aux("rxl_step_exact", rxl);
    r.aux("slb_expanded", slb);

    let value = leading - slack;
    r.check("d >= n", true);
    r.check("slb_expanded >= rxl_step", slb >= rxl - 1e-9 * slb.abs().max(1.0));
    r.check("rxl_step >= final", rxl >= value - 1e-9 * rxl.abs().max(1.0));
    Ok(r.finish(constants))
}

/// Middle regime `c* n < d < n`: the large-d bound on the top-left `d x d` minor at
/// distortion `D / c*^2`, reported as `(c* n d / 4) log(c*^2 / D) - K n d`.
pub fn theorem2_middled_bound(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let (nf, df) = (n as f64, d as f64);
    let cs = constants.c_star;
    let mut r = Draft::new("theorem2_middled_bound", Regime::MiddleD)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("leading", cs * nf * df / 4.0 * (cs * cs / distortion).ln());
    r.term("linear_slack", -constants.k_slack * nf * df);

    let reduced_distortion = distortion / (cs * cs);
    let reduced = theorem2_larged_bound(d, d, reduced_distortion, constants)?.value_nats;
    r.aux("loss_inflation_factor", 1.0 / (cs * cs));
    r.aux("reduced_distortion", reduced_distortion);
    r.aux("reduced_large_d_value", reduced);

    let value: f64 = r.terms.iter().map(|t| t.value_nats).sum();
    r.check("c_star n < d < n", cs * nf < df && d < n);
    r.check("D < c_star^2", distortion < cs * cs);
    r.check("reduced_dominates_reported", reduced >= value);
    Ok(r.finish(constants))
}

/// Spherical prior: `c n min(n,d) log(1/(28 D)) - (n/2) log(1 + 1/(2 d delta^2))` with
/// `delta^2 = D / d`.
pub fn spherical_bound(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<BoundReport> {
    check_dims(n, d)?;
    check_distortion(distortion)?;
    let (nf, df) = (n as f64, d as f64);
    let m = n.min(d) as f64;
    let delta_sq = distortion / df;
    let mut r = Draft::new("spherical_bound", Regime::Spherical)
        .input("n", nf)
        .input("d", df)
        .input("D", distortion);
    r.term("gaussian_case_at_28D", constants.c * nf * m * (1.0 / (28.0 * distortion)).ln());
    r.term("norm_channel_penalty", -nf / 2.0 * (1.0 + 1.0 / (2.0 * df * delta_sq)).ln());
    let inflation = 8.0 + 14.0 / (nf + 1.0) + 6.0 * (nf - 1.0) / ((nf + 1.0) * df);
    r.aux("delta_sq", delta_sq);
    r.aux("distortion_inflation", inflation);
    r.aux("norm_channel_penalty_closed", nf / 2.0 * (1.0 + 1.0 / (2.0 * distortion)).ln());

    r.check("0 < D < c", distortion < constants.c);
    r.check("delta_sq < 1", delta_sq < 1.0);
    r.check("distortion_inflation <= 28", inflation <= 28.0);
    Ok(r.finish(constants))
}

/// Observation model for the entropy-counting argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationModel {
    /// Undirected graph with average edge density `p`.
    Graph,
    /// One-bit observations of each entry with average probability `p`.
    Completion,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// `C(n, 2) h(p)`: entropy ceiling of a graph with average edge density `p`.
pub fn entropy_count_graph(n: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if n < 2 {
        return Err(Error::param("graph entropy count needs n >= 2"));
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(pairs * h(p)?)
}

/// `n^2 (h(p) + p log 2)`: entropy ceiling of partial one-bit observations.
pub fn entropy_count_completion(n: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if n == 0 {
        return Err(Error::param("completion entropy count needs n >= 1"));
    }
    let nf = n as f64;
    Ok(nf * nf * (h(p)? + p * LN_2))
}

/// Dimension above which recovery at a constant distortion is impossible:
/// `c n h(p)` for graphs, `c n (h(p) + p)` for one-bit completion.
pub fn impossibility_threshold(n: usize, p: f64, c: f64, model: ObservationModel) -> Result<f64> {
    check_probability(p)?;
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("c must be positive, got {c}")));
    }
    let nf = n as f64;
    let entropy = h(p)?;
    Ok(match model {
        ObservationModel::Graph => c * nf * entropy,
        ObservationModel::Completion => c * nf * (entropy + p),
    })
}

/// Entropy ceiling as a report, with the distortion floor it implies through
/// `c n min(n,d) log(1/D) <= H(A)`.
pub fn entropy_count_report(
    n: usize,
    d: usize,
    p: f64,
    model: ObservationModel,
    constants: &BoundConstants,
) -> Result<BoundReport> {
    check_dims(n, d)?;
    let (name, ceiling) = match model {
        ObservationModel::Graph => ("entropy_count_graph", entropy_count_graph(n, p)?),
        ObservationModel::Completion => ("entropy_count_completion", entropy_count_completion(n, p)?),
    };
    let mut r = Draft::new(name, Regime::EntropyCount)
        .input("n", n as f64)
        .input("d", d as f64)
        .input("p", p);
    r.term("entropy_ceiling", ceiling);
    let rank = (n * n.min(d)) as f64;
    r.aux("implied_distortion_floor", (-ceiling / (constants.c * rank)).exp());
    r.aux("impossibility_threshold", impossibility_threshold(n, p, constants.c, model)?);
    r.check("p in [0, 1]", true);
    Ok(r.finish(constants))
}

/// Every lower bound on `R_X^L(D)` whose `(n, d)` regime applies, for the Gaussian prior.
pub fn regime_bounds(n: usize, d: usize, distortion: f64, constants: &BoundConstants) -> Result<Vec<BoundReport>> {
    constants.validate()?;
    check_dims(n, d)?;
    let (nf, df) = (n as f64, d as f64);
    if df <= constants.c_star * nf {
        Ok(vec![theorem2_smalld_bound(n, d, distortion, constants)?])
    } else if d < n {
        Ok(vec![theorem2_middled_bound(n, d, distortion, constants)?])
    } else {
        Ok(vec![
            theorem2_larged_bound(n, d, distortion, constants)?,
            shannon_lower_bound_gram(n, d, distortion, constants)?,
        ])
    }
}

/// Regime bounds, the spherical bound, and entropy counts when `p` is given.
pub fn all_reports(
    n: usize,
    d: usize,
    distortion: f64,
    p: Option<f64>,
    constants: &BoundConstants,
) -> Result<Vec<BoundReport>> {
    let mut out = regime_bounds(n, d, distortion, constants)?;
    out.push(spherical_bound(n, d, distortion, constants)?);
    if let Some(p) = p {
        if n >= 2 {
            out.push(entropy_count_report(n, d, p, ObservationModel::Graph, constants)?);
        }
        out.push(entropy_count_report(n, d, p, ObservationModel::Completion, constants)?);
    }
    Ok(out)
}

/// Largest valid lower bound on `R_X^L(D)` among `reports` (entropy counts excluded).
pub fn tightest(reports: &[BoundReport]) -> Option<&BoundReport> {
    reports
        .iter()
        .filter(|r| r.regime != Regime::EntropyCount && r.is_valid())
        .max_by(|a, b| a.value_nats.total_cmp(&b.value_nats))
}
