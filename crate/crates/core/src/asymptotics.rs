//! Counts in the limit `d_Z -> infinity` with `d_Y = d` fixed.
//!
//! When the `Z` part is huge, observations almost never share a cell, and the
//! number of instances divided by `d_Z^n / n!` tends to the coefficient of an
//! exponential generating function: `n! [x^n] (2 e^x - 1)^d` for the ungrouped
//! count. Functions here carry an `egf_` prefix so that these normalized counts
//! are not mixed up with the exact counts of [`crate::model_m1`].

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{binomial, factorial, into_count, DomainSpec, ExactInt, ExactRatio};
use crate::model_m1::rho_total;

/// An exponential-regime count and its leading-order approximation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    pub exact_egf_value: ExactInt,
    pub leading_term: ExactInt,
    /// `|exact - leading| / leading`.
    pub relative_gap: ExactRatio,
}

fn pow(base: u64, e: u64) -> BigUint {
    BigUint::from(base).pow(e as u32)
}

/// `sum_i (-1)^i C(d, i) 2^(d-i) (d-i)^n` (with `0^0 = 1`) and its leading term `2^d d^n`.
pub fn egf_rho(d: u64, n: u64) -> Result<AsymptoticResult> {
    if d == 0 {
        return Err(Error::Domain("d must be at least 1".into()));
    }
    let mut acc = BigInt::zero();
    for i in 0..=d {
        let term = BigInt::from(binomial(d, i) * pow(2, d - i) * pow(d - i, n));
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let exact = into_count(acc, "egf_rho");
    let leading = pow(2, d) * pow(d, n);
    let diff = (BigInt::from(exact.clone()) - BigInt::from(leading.clone())).abs();
    Ok(AsymptoticResult {
        relative_gap: Ratio::new(diff.magnitude().clone(), leading.clone()),
        exact_egf_value: exact,
        leading_term: leading,
    })
}

/// Number of surjections from an `n`-set onto an `a`-set.
fn surjections(n: u64, a: u64) -> BigUint {
    let mut acc = BigInt::zero();
    for j in 0..=a {
        let term = BigInt::from(binomial(a, j) * pow(a - j, n));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    into_count(acc, "surjections")
}

/// Exponential-regime count with both group sizes known, for any `d`:
/// `sum_{a,b>=1} C(d; a, b) surj(n1, a) surj(n2, b)`.
pub fn egf_rho_groups(d: u64, n1: u64, n2: u64) -> ExactInt {
    let mut total = BigUint::zero();
    for a in 1..=d {
        for b in 1..=d - a {
            let multi = binomial(d, a) * binomial(d - a, b);
            total += multi * surjections(n1, a) * surjections(n2, b);
        }
    }
    total
}

/// Closed forms of [`egf_rho_groups`] for `d` in `{2, 3, 4}`.
pub fn egf_rho_groups_closed(d: u64, n1: u64, n2: u64) -> Result<ExactInt> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("group sizes must be at least 1".into()));
    }
    let signed = |x: BigUint| BigInt::from(x);
    let value = match d {
        // one value per group; only the choice of which goes to group 1 remains
        2 => BigInt::from(2),
        3 => BigInt::from(3) * (signed(pow(2, n1)) + signed(pow(2, n2))) - 6,
        4 => {
            BigInt::from(4) * (signed(pow(3, n1)) + signed(pow(3, n2))) + BigInt::from(6) * signed(pow(2, n1 + n2))
                - BigInt::from(12) * (signed(pow(2, n1)) + signed(pow(2, n2)) - 1)
        }
        _ => return Err(Error::Domain(format!("no closed form for d = {d}; supported: 2, 3, 4"))),
    };
    Ok(into_count(value, "closed form"))
}

/// Decay rate of `rho(n1, n2) / rho(n)` for `d = 3` when `n1 = a n`:
/// the ratio behaves like `exp(-beta n)` with `beta = ln 3 - max(a, 1 - a) ln 2`.
pub fn egf_ratio_exponent_d3(a: f64) -> f64 {
    3f64.ln() - a.max(1.0 - a) * 2f64.ln()
}

/// The exact ungrouped count rescaled to the exponential regime, `rho(n) n! / d_Z^n`.
pub fn egf_scaled_rho_total(n: u64, spec: DomainSpec) -> Result<ExactRatio> {
    let rho = rho_total(n, spec)?;
    let d_z_n = spec.d_z().pow(n as u32);
    Ok(Ratio::new(rho * factorial(n), d_z_n))
}

/// Relative difference between [`egf_scaled_rho_total`] and [`egf_rho`] for `d = d_Y`.
pub fn egf_bridge_gap(n: u64, spec: DomainSpec) -> Result<ExactRatio> {
    let d = spec
        .d_y_u64()
        .ok_or_else(|| Error::Domain("d_Y too large for the exponential regime".into()))?;
    let scaled = egf_scaled_rho_total(n, spec)?;
    let limit = Ratio::from_integer(egf_rho(d, n)?.exact_egf_value);
    let diff = if scaled > limit { &scaled - &limit } else { &limit - &scaled };
    if limit.is_zero() {
        return Ok(diff);
    }
    Ok(diff / limit)
}
