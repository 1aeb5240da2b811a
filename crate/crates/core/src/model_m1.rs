//! Model M1: disjoint groups whose projections on `Y` are also disjoint.
//!
//! Every admissible instance is a set of `n` distinct observations in which each
//! occupied `Y`-value is assigned wholly to group 1 or group 2. The counts below
//! correspond to the six states of knowledge about sizes:
//!
//! | case | known sizes       | count                |
//! |------|-------------------|----------------------|
//! | A    | `n`               | [`rho_total`]        |
//! | B    | `n1, n2`          | [`rho_groups`]       |
//! | C    | `n, k`            | [`beta`]             |
//! | D    | `n, k1, k2`       | [`lambda_coeff`]     |
//! | E    | `n1, n2, k`       | [`gamma_coeff`]      |
//! | F    | `n1, n2, k1, k2`  | [`delta_coeff`]      |

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{alpha, alpha_row, big_binomial, binomial_row, DomainSpec, ExactInt, ExactProb};

/// Sizes of an instance, as far as they are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeProfile {
    pub n: u64,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub k: Option<u64>,
    pub k1: Option<u64>,
    pub k2: Option<u64>,
    pub spec: DomainSpec,
}

impl SizeProfile {
    pub fn new(n: u64, spec: DomainSpec) -> Self {
        SizeProfile {
            n,
            n1: None,
            n2: None,
            k: None,
            k1: None,
            k2: None,
            spec,
        }
    }

    pub fn with_groups(n1: u64, n2: u64, spec: DomainSpec) -> Self {
        SizeProfile {
            n1: Some(n1),
            n2: Some(n2),
            ..SizeProfile::new(n1 + n2, spec)
        }
    }

    pub fn k(mut self, k: u64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn k_groups(mut self, k1: u64, k2: u64) -> Self {
        self.k1 = Some(k1);
        self.k2 = Some(k2);
        self
    }

    /// Both group sizes, or the name of the first one missing.
    pub fn groups(&self) -> Result<(u64, u64)> {
        let n1 = self.n1.ok_or(Error::MissingField("n1"))?;
        let n2 = self.n2.ok_or(Error::MissingField("n2"))?;
        Ok((n1, n2))
    }

    /// Checks the size constraints that hold for every M1 instance.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        match (self.n1, self.n2) {
            (Some(n1), Some(n2)) => {
                if n1 == 0 || n2 == 0 {
                    return Err(Error::Domain("group sizes must be at least 1".into()));
                }
                if n1 + n2 != self.n {
                    return Err(Error::Domain(format!("n1 + n2 = {} differs from n = {}", n1 + n2, self.n)));
                }
            }
            (None, None) => {}
            (Some(_), None) => return Err(Error::MissingField("n2")),
            (None, Some(_)) => return Err(Error::MissingField("n1")),
        }
        if let Some(k) = self.k {
            check_range("k", k, self.spec.cap_by_d_y(self.n))?;
        }
        if let Some(k1) = self.k1 {
            check_range("k1", k1, self.spec.cap_by_d_y(self.n1.unwrap_or(self.n)))?;
        }
        if let Some(k2) = self.k2 {
            check_range("k2", k2, self.spec.cap_by_d_y(self.n2.unwrap_or(self.n)))?;
        }
        if let (Some(k), Some(k1), Some(k2)) = (self.k, self.k1, self.k2) {
            if k1 + k2 != k {
                return Err(Error::Domain(format!("k1 + k2 = {} differs from k = {k}", k1 + k2)));
            }
        }
        Ok(())
    }
}

fn check_range(name: &str, value: u64, max: u64) -> Result<()> {
    if value == 0 || value > max {
        return Err(Error::Domain(format!("{name} = {value} outside 1..={max}")));
    }
    Ok(())
}

impl fmt::Display for SizeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        for (name, v) in [("n1", self.n1), ("n2", self.n2), ("k", self.k), ("k1", self.k1), ("k2", self.k2)] {
            if let Some(v) = v {
                write!(f, ", {name}={v}")?;
            }
        }
        write!(f, ", {}", self.spec)
    }
}

/// How a non-integer average size is turned into a count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    /// Nearest integer, halves away from zero.
    #[default]
    Nearest,
    Down,
    Up,
}

impl Rounding {
    pub fn apply(self, x: f64) -> u64 {
        let r = match self {
            Rounding::Nearest => x.round(),
            Rounding::Down => x.floor(),
            Rounding::Up => x.ceil(),
        };
        r.max(0.0) as u64
    }
}

/// Which sizes are known when asking a question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum M1Case {
    /// Only `n`.
    A,
    /// `n1, n2`: probability of this group split given `n`.
    B,
    /// `k`: probability of a projection of size `k` given `n`.
    C,
    /// `k1, k2` given `n`.
    D,
    /// `k` given `n1, n2`.
    E,
    /// `k1, k2` given `n1, n2`.
    F,
}

impl M1Case {
    pub const ALL: [M1Case; 6] = [M1Case::A, M1Case::B, M1Case::C, M1Case::D, M1Case::E, M1Case::F];

    /// Fields of [`SizeProfile`] this case reads, besides `n`.
    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            M1Case::A => &[],
            M1Case::B => &["n1", "n2"],
            M1Case::C => &["k"],
            M1Case::D => &["k1", "k2"],
            M1Case::E => &["n1", "n2", "k"],
            M1Case::F => &["n1", "n2", "k1", "k2"],
        }
    }
}

impl std::str::FromStr for M1Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(M1Case::A),
            "B" => Ok(M1Case::B),
            "C" => Ok(M1Case::C),
            "D" => Ok(M1Case::D),
            "E" => Ok(M1Case::E),
            "F" => Ok(M1Case::F),
            _ => Err(Error::Domain(format!("unknown case `{s}`"))),
        }
    }
}

/// `C(d_Y; k1, k2)` for all `k1 <= max1`, `k2 <= max2`, as rows indexed `[k1][k2]`.
fn multinomial_table(spec: &DomainSpec, max1: u64, max2: u64) -> Vec<Vec<ExactInt>> {
    let d_y = spec.d_y();
    let first = binomial_row(&d_y, max1);
    first
        .iter()
        .enumerate()
        .map(|(k1, c1)| {
            if c1.is_zero() {
                return vec![BigUint::zero(); max2 as usize + 1];
            }
            let rest = &d_y - BigUint::from(k1 as u64);
            binomial_row(&rest, max2).into_iter().map(|c2| c1 * c2).collect()
        })
        .collect()
}

/// Number of M1 instances with `n` observations.
///
/// `sum_{k>=1} 2^k C(d_Y, k) alpha(k, n)`: choose the `k` occupied `Y`-values,
/// a group for each, and the cells. Zero when `n > d_Y d_Z`.
pub fn rho_total(n: u64, spec: DomainSpec) -> Result<ExactInt> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let kmax = spec.cap_by_d_y(n);
    let alphas = alpha_row(kmax, n, spec.z_attrs);
    let choose = binomial_row(&spec.d_y(), kmax);
    let mut total = BigUint::zero();
    for k in 1..=kmax as usize {
        if !alphas[k].is_zero() {
            total += (&choose[k] * &alphas[k]) << k;
        }
    }
    Ok(total)
}

/// Number of M1 instances with group sizes `n1` and `n2`.
pub fn rho_groups(n1: u64, n2: u64, spec: DomainSpec) -> ExactInt {
    let max1 = spec.cap_by_d_y(n1);
    let max2 = spec.cap_by_d_y(n2);
    let a1 = alpha_row(max1, n1, spec.z_attrs);
    let a2 = alpha_row(max2, n2, spec.z_attrs);
    let multi = multinomial_table(&spec, max1, max2);
    let mut total = BigUint::zero();
    for k1 in 1..=max1 as usize {
        if a1[k1].is_zero() {
            continue;
        }
        let mut inner = BigUint::zero();
        for k2 in 1..=max2 as usize {
            if !a2[k2].is_zero() && !multi[k1][k2].is_zero() {
                inner += &multi[k1][k2] * &a2[k2];
            }
        }
        total += inner * &a1[k1];
    }
    total
}

/// Instances with `n` observations whose projection has size `k`: `2^k C(d_Y, k) alpha(k, n)`.
pub fn beta(k: u64, n: u64, spec: DomainSpec) -> ExactInt {
    let a = alpha(k, n, spec.z_attrs);
    if a.is_zero() {
        return a;
    }
    (big_binomial(&spec.d_y(), k) * a) << k
}

/// Instances with `n` observations and group projections of sizes `k1`, `k2`:
/// `C(d_Y; k1, k2) alpha(k1 + k2, n)`.
pub fn lambda_coeff(k1: u64, k2: u64, n: u64, spec: DomainSpec) -> ExactInt {
    if k1 == 0 || k2 == 0 {
        return BigUint::zero();
    }
    let a = alpha(k1 + k2, n, spec.z_attrs);
    if a.is_zero() {
        return a;
    }
    crate::exactmath::big_multinomial(&spec.d_y(), k1, k2) * a
}

/// Instances with group sizes `n1`, `n2` whose projection has size `k`.
///
/// Zero for `k = 1`, since both groups occupy at least one `Y`-value.
pub fn gamma_coeff(k: u64, n1: u64, n2: u64, spec: DomainSpec) -> ExactInt {
    let mut total = BigUint::zero();
    for k1 in 1..k {
        total += delta_coeff(k1, k - k1, n1, n2, spec);
    }
    total
}

/// Instances with group sizes `n1`, `n2` and group projection sizes `k1`, `k2`.
pub fn delta_coeff(k1: u64, k2: u64, n1: u64, n2: u64, spec: DomainSpec) -> ExactInt {
    if k1 == 0 || k2 == 0 {
        return BigUint::zero();
    }
    let a1 = alpha(k1, n1, spec.z_attrs);
    if a1.is_zero() {
        return a1;
    }
    let a2 = alpha(k2, n2, spec.z_attrs);
    if a2.is_zero() {
        return a2;
    }
    crate::exactmath::big_multinomial(&spec.d_y(), k1, k2) * a1 * a2
}

/// Conditional probability of the sizes in `profile` under the knowledge of `case`.
///
/// Case A is the normalizing case and always yields 1 for a feasible `n`.
pub fn m1_probability(case: M1Case, profile: &SizeProfile) -> Result<ExactProb> {
    profile.validate()?;
    let spec = profile.spec;
    let need = |v: Option<u64>, name: &'static str| v.ok_or(Error::MissingField(name));
    let cond = |what: &str| format!("{what} under {profile}");
    match case {
        M1Case::A => {
            let rho = rho_total(profile.n, spec)?;
            ExactProb::from_counts(rho.clone(), rho, &cond("no instance"))
        }
        M1Case::B => {
            let (n1, n2) = profile.groups()?;
            ExactProb::from_counts(rho_groups(n1, n2, spec), rho_total(profile.n, spec)?, &cond("no instance"))
        }
        M1Case::C => {
            let k = need(profile.k, "k")?;
            ExactProb::from_counts(beta(k, profile.n, spec), rho_total(profile.n, spec)?, &cond("no instance"))
        }
        M1Case::D => {
            let k1 = need(profile.k1, "k1")?;
            let k2 = need(profile.k2, "k2")?;
            ExactProb::from_counts(
                lambda_coeff(k1, k2, profile.n, spec),
                rho_total(profile.n, spec)?,
                &cond("no instance"),
            )
        }
        M1Case::E => {
            let (n1, n2) = profile.groups()?;
            let k = need(profile.k, "k")?;
            ExactProb::from_counts(gamma_coeff(k, n1, n2, spec), rho_groups(n1, n2, spec), &cond("no instance"))
        }
        M1Case::F => {
            let (n1, n2) = profile.groups()?;
            let k1 = need(profile.k1, "k1")?;
            let k2 = need(profile.k2, "k2")?;
            ExactProb::from_counts(
                delta_coeff(k1, k2, n1, n2, spec),
                rho_groups(n1, n2, spec),
                &cond("no instance"),
            )
        }
    }
}

/// `Pr(k / n1, n2)` for every feasible `k`, sharing one normalizer.
pub fn projection_size_distribution(n1: u64, n2: u64, spec: DomainSpec) -> Result<Vec<(u64, ExactProb)>> {
    let rho = rho_groups(n1, n2, spec);
    let kmax = spec.cap_by_d_y(n1 + n2);
    (2..=kmax)
        .map(|k| {
            let p = ExactProb::from_counts(gamma_coeff(k, n1, n2, spec), rho.clone(), "no instance with these group sizes")?;
            Ok((k, p))
        })
        .collect()
}

/// `sum_{k2>=1} delta(r, k2; n1, n2)`: instances whose first group projects onto exactly `r` values.
fn first_projection_count(r: u64, n1: u64, n2: u64, spec: &DomainSpec) -> ExactInt {
    let a1 = alpha(r, n1, spec.z_attrs);
    if a1.is_zero() {
        return a1;
    }
    let d_y = spec.d_y();
    let rest = &d_y - BigUint::from(r);
    let max2 = spec.cap_by_d_y(n2);
    let a2 = alpha_row(max2, n2, spec.z_attrs);
    let c2 = binomial_row(&rest, max2);
    let mut inner = BigUint::zero();
    for k2 in 1..=max2 as usize {
        if !a2[k2].is_zero() {
            inner += &c2[k2] * &a2[k2];
        }
    }
    big_binomial(&d_y, r) * a1 * inner
}

/// `Pr(k1 = r / n1, n2)`: the first group projects onto exactly `r` values of `Y`.
///
/// With `r = 1` this is the probability that `Y` supports a single pattern
/// covering the whole first group.
pub fn pattern_probability(n1: u64, n2: u64, spec: DomainSpec, r: u64) -> Result<ExactProb> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("group sizes must be at least 1".into()));
    }
    check_range("r", r, spec.cap_by_d_y(n1))?;
    ExactProb::from_counts(
        first_projection_count(r, n1, n2, &spec),
        rho_groups(n1, n2, spec),
        "no instance with these group sizes",
    )
}

/// `Pr(k1 = r / n1, n2)` for all `r`, sharing one normalizer.
pub fn pattern_distribution(n1: u64, n2: u64, spec: DomainSpec) -> Result<Vec<(u64, ExactProb)>> {
    let rho = rho_groups(n1, n2, spec);
    (1..=spec.cap_by_d_y(n1))
        .map(|r| {
            let p = ExactProb::from_counts(
                first_projection_count(r, n1, n2, &spec),
                rho.clone(),
                "no instance with these group sizes",
            )?;
            Ok((r, p))
        })
        .collect()
}

/// Probability that every `Y`-value occurs, i.e. the projection has size `d_Y`.
///
/// Ungrouped: `n` distinct observations drawn uniformly from the whole domain,
/// `alpha(d_Y, n) / C(d_Y d_Z, n)`. Grouped: M1 instances with the profile's
/// group sizes, `gamma(d_Y; n1, n2) / rho(n1, n2)`. Both are 0 when `d_Y > n`.
pub fn robustness_probability(profile: &SizeProfile, grouped: bool) -> Result<ExactProb> {
    let spec = profile.spec;
    if grouped {
        let (n1, n2) = profile.groups()?;
        if n1 == 0 || n2 == 0 {
            return Err(Error::Domain("group sizes must be at least 1".into()));
        }
        let rho = rho_groups(n1, n2, spec);
        let favourable = match spec.d_y_u64() {
            Some(d) if d <= n1 + n2 => gamma_coeff(d, n1, n2, spec),
            _ => BigUint::zero(),
        };
        ExactProb::from_counts(favourable, rho, "no instance with these group sizes")
    } else {
        let n = profile.n;
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let total = big_binomial(&spec.d_x(), n);
        let favourable = match spec.d_y_u64() {
            Some(d) if d <= n => alpha(d, n, spec.z_attrs),
            _ => BigUint::zero(),
        };
        ExactProb::from_counts(favourable, total, "more observations than domain cells")
    }
}

/// One point of an attribute-count scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub y_attrs: u32,
    pub ratio: ExactProb,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    /// `|Y|` with the largest ratio; ties go to the smallest `|Y|`.
    pub argmax: Option<u32>,
    /// False when the curve rises again after falling.
    pub unimodal: bool,
}

/// `rho(n1, n2) / rho(n)` as `|Y|` runs over `y_range`, with `|Z| = total_attrs - |Y|`.
///
/// The ratio is the probability that a random M1 instance with `n1 + n2`
/// observations splits into groups of the observed sizes.
pub fn scan_attribute_count(n1: u64, n2: u64, total_attrs: u32, y_range: RangeInclusive<u32>) -> Result<ScanResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("group sizes must be at least 1".into()));
    }
    if *y_range.start() == 0 || *y_range.end() > total_attrs || y_range.is_empty() {
        return Err(Error::Domain(format!(
            "attribute range {}..={} outside 1..={total_attrs}",
            y_range.start(),
            y_range.end()
        )));
    }
    let ys: Vec<u32> = y_range.collect();
    let points = ys
        .par_iter()
        .map(|&y| {
            let spec = DomainSpec::new(y, total_attrs - y);
            let ratio = ExactProb::from_counts(
                rho_groups(n1, n2, spec),
                rho_total(n1 + n2, spec)?,
                &format!("no instance for {spec}"),
            )?;
            Ok(ScanPoint { y_attrs: y, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmax: Option<&ScanPoint> = None;
    for p in &points {
        if argmax.is_none_or(|best| p.ratio > best.ratio) {
            argmax = Some(p);
        }
    }
    let argmax = argmax.map(|p| p.y_attrs);
    let unimodal = is_unimodal(points.iter().map(|p| &p.ratio));
    Ok(ScanResult { points, argmax, unimodal })
}

fn is_unimodal<'a>(values: impl Iterator<Item = &'a ExactProb>) -> bool {
    let mut falling = false;
    let mut prev: Option<&ExactProb> = None;
    for v in values {
        if let Some(p) = prev {
            if v < p {
                falling = true;
            } else if v > p && falling {
                return false;
            }
        }
        prev = Some(v);
    }
    true
}
