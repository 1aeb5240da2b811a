//! Model M2: disjoint groups whose projections on `Y` may intersect.
//!
//! An instance is an ordered pair of disjoint cell sets of sizes `n1` and `n2`.
//! The size of `pi_Y(G1) ∩ pi_Y(G2)` is obtained by inclusion-exclusion over the
//! counts `A_v`: for a fixed set `V` of `v` values, `A_v` counts the instances
//! whose intersection lies inside `V`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{alpha_row, big_binomial, big_multinomial, binomial, binomial_row, into_count, DomainSpec, ExactInt, ExactProb};

/// Number of M2 instances: ordered disjoint pairs of cell sets, `C(d_Y d_Z; n1, n2)`.
pub fn rho_groups_m2(n1: u64, n2: u64, spec: DomainSpec) -> ExactInt {
    big_multinomial(&spec.d_x(), n1, n2)
}

fn check_groups(n1: u64, n2: u64) -> Result<()> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("group sizes must be at least 1".into()));
    }
    Ok(())
}

fn check_v(v: u64, spec: &DomainSpec) -> Result<()> {
    if BigUint::from(v) > spec.d_y() {
        return Err(Error::Domain(format!("v = {v} exceeds d_Y")));
    }
    Ok(())
}

/// `A_v`: instances whose projection intersection lies inside a fixed set of `v` values.
///
/// `sum_{k,l} C(d_Y - v, k) C(v d_Z, l) C(d_Z (d_Y - k) - l, n2) alpha(k, n1 - l)`,
/// where group 1 occupies `k` values outside the set and `l` cells inside it, and
/// group 2 avoids every value used by group 1 outside the set.
pub fn coefficient_a(n1: u64, n2: u64, v: u64, spec: DomainSpec) -> Result<ExactInt> {
    check_groups(n1, n2)?;
    check_v(v, &spec)?;
    Ok(M2Analysis::new(n1, n2, spec)?.coefficient_a(v))
}

/// Slow version of [`coefficient_a`] that runs `k` and `l` over their full
/// ranges and lets vanishing binomials drop the extra terms. Needs a small domain.
pub fn coefficient_a_unclamped(n1: u64, n2: u64, v: u64, spec: DomainSpec) -> Result<ExactInt> {
    check_groups(n1, n2)?;
    check_v(v, &spec)?;
    let (d_y, d_z) = match (spec.d_y_u64(), spec.d_z_u64()) {
        (Some(a), Some(b)) if a.saturating_mul(b) <= 1 << 20 => (a, b),
        _ => {
            return Err(Error::CapExceeded {
                what: "unclamped coefficient".into(),
                required: format!("a domain of {} cells", spec.d_x()),
            })
        }
    };
    let mut total = BigUint::zero();
    for k in 0..=d_y - v {
        for l in 0..=v * d_z {
            let cells = d_z * (d_y - k);
            if cells < l || n1 < l {
                continue;
            }
            let a = crate::exactmath::alpha(k, n1 - l, spec.z_attrs);
            total += binomial(d_y - v, k) * binomial(v * d_z, l) * binomial(cells - l, n2) * a;
        }
    }
    Ok(total)
}

/// `sum_{u=v}^{t} (-1)^(u-v) C(d, u) C(u, v)` in closed form,
/// `(-1)^(t-v) C(d, v) C(d - v - 1, t - v)`, returned with its sign.
///
/// At `t = d` the closed form needs `C(-1, 0) = 1`, which is what it returns.
pub fn bracket_coefficient(d: &ExactInt, v: u64, t: u64) -> BigInt {
    assert!(v <= t, "bracket needs v <= t");
    let dv = BigUint::from(v);
    let magnitude = if *d == dv {
        // C(-1, t - v) = (-1)^(t - v); only t = v is reachable since t <= d.
        if t == v {
            BigUint::from(1u32)
        } else {
            BigUint::zero()
        }
    } else {
        big_binomial(d, v) * big_binomial(&(d - &dv - 1u32), t - v)
    };
    let value = BigInt::from(magnitude);
    if (t - v).is_multiple_of(2) {
        value
    } else {
        -value
    }
}

/// Which intersection sizes a query asks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntersectionBound {
    Exactly(u64),
    AtMost(u64),
}

/// A question about `|pi_Y(G1) ∩ pi_Y(G2)|` in model M2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionQuery {
    pub n1: u64,
    pub n2: u64,
    pub spec: DomainSpec,
    pub bound: IntersectionBound,
}

impl IntersectionQuery {
    pub fn exactly(n1: u64, n2: u64, spec: DomainSpec, u: u64) -> Self {
        IntersectionQuery { n1, n2, spec, bound: IntersectionBound::Exactly(u) }
    }

    pub fn at_most(n1: u64, n2: u64, spec: DomainSpec, t: u64) -> Self {
        IntersectionQuery { n1, n2, spec, bound: IntersectionBound::AtMost(t) }
    }

    pub fn probability(&self) -> Result<ExactProb> {
        let analysis = M2Analysis::new(self.n1, self.n2, self.spec)?;
        match self.bound {
            IntersectionBound::Exactly(u) => analysis.prob_eq(u),
            IntersectionBound::AtMost(t) => analysis.prob_at_most(t),
        }
    }
}

/// `Pr(|intersection| = u / n1, n2)`.
pub fn prob_intersection_eq(n1: u64, n2: u64, spec: DomainSpec, u: u64) -> Result<ExactProb> {
    IntersectionQuery::exactly(n1, n2, spec, u).probability()
}

/// `Pr(|intersection| <= t / n1, n2)`.
pub fn prob_intersection_at_most(n1: u64, n2: u64, spec: DomainSpec, t: u64) -> Result<ExactProb> {
    IntersectionQuery::at_most(n1, n2, spec, t).probability()
}

/// Intersection-size analysis for one `(n1, n2, spec)`, memoizing `A_v` across queries.
///
/// Thread-safe; concurrent queries share the memo.
pub struct M2Analysis {
    n1: u64,
    n2: u64,
    spec: DomainSpec,
    rho: ExactInt,
    a_values: Mutex<HashMap<u64, ExactInt>>,
    /// `C(d_Z (d_Y - k) - l, n2)` keyed by `(k, l)`; independent of `v`.
    group2: Mutex<HashMap<(u64, u64), ExactInt>>,
}

impl M2Analysis {
    pub fn new(n1: u64, n2: u64, spec: DomainSpec) -> Result<Self> {
        check_groups(n1, n2)?;
        Ok(M2Analysis {
            n1,
            n2,
            spec,
            rho: rho_groups_m2(n1, n2, spec),
            a_values: Mutex::new(HashMap::new()),
            group2: Mutex::new(HashMap::new()),
        })
    }

    pub fn rho(&self) -> &ExactInt {
        &self.rho
    }

    /// Largest possible intersection size, `min(n1, n2, d_Y)`.
    pub fn max_intersection(&self) -> u64 {
        self.spec.cap_by_d_y(self.n1.min(self.n2))
    }

    fn group2_cells(&self, k: u64, l: u64, cells: &ExactInt) -> ExactInt {
        if let Some(v) = self.group2.lock().unwrap().get(&(k, l)) {
            return v.clone();
        }
        let value = big_binomial(&(cells - BigUint::from(l)), self.n2);
        self.group2.lock().unwrap().insert((k, l), value.clone());
        value
    }

    /// `A_v` with the loop bounds `k <= min(d_Y - v, n1)` and
    /// `l <= min(v d_Z, n1 - k, d_Z (d_Y - k) - n2)`.
    pub fn coefficient_a(&self, v: u64) -> ExactInt {
        if let Some(a) = self.a_values.lock().unwrap().get(&v) {
            return a.clone();
        }
        let spec = &self.spec;
        let (n1, n2) = (self.n1, self.n2);
        let d_y = spec.d_y();
        let d_z = spec.d_z();
        let outside = &d_y - BigUint::from(v);
        let inside_cells = &d_z * v;
        let k_max = outside.to_u64().map_or(n1, |o| o.min(n1));
        let l_cap = inside_cells.to_u64().map_or(n1, |c| c.min(n1));
        let choose_outside = binomial_row(&outside, k_max);
        let choose_inside = binomial_row(&inside_cells, l_cap);
        // alphas[m][k] = alpha(k, m) for k <= min(m, k_max)
        let alphas: Vec<Vec<ExactInt>> = (0..=n1).map(|m| alpha_row(k_max.min(m), m, spec.z_attrs)).collect();
        let mut total = BigUint::zero();
        for k in 0..=k_max {
            let cells = &d_z * (&d_y - BigUint::from(k));
            let n2_big = BigUint::from(n2);
            if cells < n2_big {
                continue;
            }
            let spare = (&cells - n2_big).to_u64().unwrap_or(u64::MAX);
            let l_max = l_cap.min(n1 - k).min(spare);
            let mut partial = BigUint::zero();
            for l in 0..=l_max {
                let Some(a) = alphas[(n1 - l) as usize].get(k as usize) else {
                    continue;
                };
                if a.is_zero() || choose_inside[l as usize].is_zero() {
                    continue;
                }
                partial += &choose_inside[l as usize] * self.group2_cells(k, l, &cells) * a;
            }
            total += &choose_outside[k as usize] * partial;
        }
        self.a_values.lock().unwrap().insert(v, total.clone());
        total
    }

    fn normalize(&self, numerator: BigInt, what: &str) -> Result<ExactProb> {
        let count = into_count(numerator, what);
        ExactProb::from_counts(count, self.rho.clone(), "no instance with these group sizes")
    }

    /// Numerator of `Pr(|intersection| = u)`: `C(d_Y, u) sum_{v<=u} (-1)^(u-v) C(u, v) A_v`.
    pub fn count_eq(&self, u: u64) -> Result<ExactInt> {
        let max = self.max_intersection();
        if u > max {
            return Err(Error::Domain(format!("u = {u} outside 0..={max}")));
        }
        let mut acc = BigInt::zero();
        for v in 0..=u {
            let term = BigInt::from(binomial(u, v) * self.coefficient_a(v));
            if (u - v).is_multiple_of(2) {
                acc += term;
            } else {
                acc -= term;
            }
        }
        Ok(big_binomial(&self.spec.d_y(), u) * into_count(acc, "intersection count"))
    }

    pub fn prob_eq(&self, u: u64) -> Result<ExactProb> {
        let count = self.count_eq(u)?;
        ExactProb::from_counts(count, self.rho.clone(), "no instance with these group sizes")
    }

    /// `Pr(|intersection| <= t)`, with the inner alternating sum over `u` in closed form.
    pub fn prob_at_most(&self, t: u64) -> Result<ExactProb> {
        let d_y = self.spec.d_y();
        if BigUint::from(t) > d_y {
            return Err(Error::Domain(format!("t = {t} exceeds d_Y")));
        }
        if self.rho.is_zero() {
            return Err(Error::ImpossibleCondition("no instance with these group sizes".into()));
        }
        if BigUint::from(t) == d_y {
            return Ok(ExactProb::one());
        }
        let mut acc = BigInt::zero();
        for v in 0..=t {
            acc += bracket_coefficient(&d_y, v, t) * BigInt::from(self.coefficient_a(v));
        }
        self.normalize(acc, "cumulative intersection count")
    }
}
