//! Special functions: log-gamma, digamma, their multivariate forms, and binary entropy.
//!
//! All logarithms are natural; entropies are in nats.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// A value together with a conservative absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecFunResult {
    pub value: f64,
    pub abs_error_bound: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Relative accuracy assumed per elementary evaluation when accumulating error bounds.
const ELEMENTARY_REL_ERROR: f64 = 1e-14;

/// `log Gamma(x)` for `x > 0`; `NaN` otherwise.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    libm::lgamma(x)
}

/// Digamma `psi(x)`; `NaN` at the poles `x = 0, -1, -2, ...`.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || (x <= 0.0 && x == x.floor()) {
        return f64::NAN;
    }
    if x < 0.0 {
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number asymptotic series
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32_760.0))))));
    acc + x.ln() - 0.5 * inv - series
}

/// Binary entropy `h(p) = -p log p - (1-p) log(1-p)` in nats, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<SpecFunResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binary entropy needs p in [0, 1], got {p}")));
    }
    let value = xlogx_neg(p) + xlogx_neg_complement(p);
    Ok(SpecFunResult {
        value,
        abs_error_bound: 4.0 * f64::EPSILON * value.max(f64::MIN_POSITIVE),
    })
}

/// Shorthand for `binary_entropy(p).value` when `p` is already known to be in range.
pub(crate) fn h(p: f64) -> Result<f64> {
    binary_entropy(p).map(|r| r.value)
}

fn xlogx_neg(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

fn xlogx_neg_complement(p: f64) -> f64 {
    if p == 1.0 {
        0.0
    } else {
        -(1.0 - p) * (-p).ln_1p()
    }
}

fn check_multivariate_domain(n: usize, a: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("multivariate order n must be >= 1"));
    }
    let pole = (n as f64 - 1.0) / 2.0;
    if !(a > pole) || !a.is_finite() {
        return Err(Error::domain(format!(
            "multivariate gamma of order {n} needs a > {pole}, got {a}"
        )));
    }
    Ok(())
}

/// `log Gamma_n(a) = n(n-1)/4 log(pi) + sum_{i=1}^n log Gamma(a + (1-i)/2)`.
pub fn multivariate_log_gamma(n: usize, a: f64) -> Result<SpecFunResult> {
    check_multivariate_domain(n, a)?;
    let mut value = (n * (n - 1)) as f64 / 4.0 * PI.ln();
    let mut err = ELEMENTARY_REL_ERROR * value.abs();
    for i in 1..=n {
        let term = ln_gamma(a + (1.0 - i as f64) / 2.0);
        value += term;
        err += ELEMENTARY_REL_ERROR * term.abs().max(1.0);
    }
    err += n as f64 * f64::EPSILON * value.abs();
    Ok(SpecFunResult {
        value,
        abs_error_bound: err,
    })
}

/// `psi_n(a) = sum_{i=1}^n psi(a + (1-i)/2)`.
pub fn multivariate_digamma(n: usize, a: f64) -> Result<SpecFunResult> {
    check_multivariate_domain(n, a)?;
    let mut value = 0.0;
    let mut err = 0.0;
    for i in 1..=n {
        let term = digamma(a + (1.0 - i as f64) / 2.0);
        value += term;
        err += ELEMENTARY_REL_ERROR * term.abs().max(1.0);
    }
    err += n as f64 * f64::EPSILON * value.abs();
    Ok(SpecFunResult {
        value,
        abs_error_bound: err,
    })
}

/// The Stirling-type lower bound `x log(x + 1/2) - x - 1/2 + log(2 pi)/2` on
/// `log Gamma(x + 1/2)`, valid for `x >= 0`.
pub fn stirling_lower_bound(x: f64) -> f64 {
    x * (x + 0.5).ln() - x - 0.5 + LN_SQRT_2PI
}
