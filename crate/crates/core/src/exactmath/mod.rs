//! Exact integer and rational arithmetic for instance counting.
//!
//! Every count in this crate is an arbitrary-precision integer. Domain sizes
//! such as `2^143` make floating point useless inside the alternating sums, so
//! decimals only appear when a probability is rendered for display.

mod alpha;
mod decimal;

pub use alpha::{alpha, alpha_row, AlphaCache, AlphaMethod, DEFAULT_ALPHA_CACHE_CAPACITY, ALPHA_CACHE_ENV};
pub use decimal::{parse_rendered, scientific_digits, to_decimal, ParsedDecimal};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative count.
pub type ExactInt = BigUint;

/// Nonnegative exact rational without an upper bound (ratios, relative gaps).
pub type ExactRatio = Ratio<BigUint>;

/// Sizes of the two aggregated attributes: the candidate subset `Y` and its complement `Z`.
///
/// The domain sizes `d_Y = 2^|Y|` and `d_Z = 2^|Z|` are always derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainSpec {
    pub y_attrs: u32,
    pub z_attrs: u32,
}

impl DomainSpec {
    pub fn new(y_attrs: u32, z_attrs: u32) -> Self {
        DomainSpec { y_attrs, z_attrs }
    }

    pub fn d_y(&self) -> ExactInt {
        BigUint::one() << self.y_attrs
    }

    pub fn d_z(&self) -> ExactInt {
        BigUint::one() << self.z_attrs
    }

    /// Size of the full observation domain, `d_Y * d_Z`.
    pub fn d_x(&self) -> ExactInt {
        BigUint::one() << (self.y_attrs + self.z_attrs)
    }

    /// `d_Y` as a machine integer when it fits.
    pub fn d_y_u64(&self) -> Option<u64> {
        pow2_u64(self.y_attrs)
    }

    pub fn d_z_u64(&self) -> Option<u64> {
        pow2_u64(self.z_attrs)
    }

    /// `min(bound, d_Y)`, the largest projection size reachable with `bound` observations.
    pub fn cap_by_d_y(&self, bound: u64) -> u64 {
        match self.d_y_u64() {
            Some(d) => d.min(bound),
            None => bound,
        }
    }

    /// True when `count <= d_Y * d_Z`.
    pub fn fits(&self, count: u64) -> bool {
        match pow2_u64(self.y_attrs + self.z_attrs) {
            Some(d) => count <= d,
            None => true,
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|Y|={}, |Z|={}", self.y_attrs, self.z_attrs)
    }
}

fn pow2_u64(e: u32) -> Option<u64> {
    if e < 64 {
        Some(1u64 << e)
    } else {
        None
    }
}

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> ExactInt {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `C(m, n)` for a possibly huge `m` and a small `n`, via the falling factorial
/// `m (m-1) ... (m-n+1) / n!`.
pub fn big_binomial(m: &ExactInt, n: u64) -> ExactInt {
    if n == 0 {
        return BigUint::one();
    }
    let n_big = BigUint::from(n);
    if *m < n_big {
        return BigUint::zero();
    }
    // Symmetry keeps the product short when both arguments are small.
    let rest = m - &n_big;
    let n = match rest.to_u64() {
        Some(r) if r < n => r,
        _ => n,
    };
    let mut num = BigUint::one();
    let mut term = m.clone();
    for _ in 0..n {
        num *= &term;
        term -= 1u32;
    }
    num / factorial(n)
}

/// `[C(m, 0), C(m, 1), ..., C(m, max)]`, built incrementally.
pub fn binomial_row(m: &ExactInt, max: u64) -> Vec<ExactInt> {
    let mut row = Vec::with_capacity(max as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..max {
        let j_big = BigUint::from(j);
        if *m <= j_big {
            c = BigUint::zero();
        } else {
            c = c * (m - &j_big) / (j + 1);
        }
        row.push(c.clone());
    }
    row
}

/// `C(m, n)` for machine-sized arguments.
pub fn binomial(m: u64, n: u64) -> ExactInt {
    big_binomial(&BigUint::from(m), n)
}

/// Multinomial `d! / (k1! k2! (d-k1-k2)!)`; zero when `k1 + k2 > d`.
pub fn big_multinomial(d: &ExactInt, k1: u64, k2: u64) -> ExactInt {
    let first = big_binomial(d, k1);
    if first.is_zero() {
        return first;
    }
    let rest = d - BigUint::from(k1);
    first * big_binomial(&rest, k2)
}

/// Converts a signed accumulator that must be nonnegative.
///
/// A negative value here means an alternating sum was assembled incorrectly.
pub(crate) fn into_count(value: BigInt, what: &str) -> ExactInt {
    match value.sign() {
        Sign::Minus => panic!("{what}: alternating sum is negative ({value})"),
        _ => value.magnitude().clone(),
    }
}

/// An exact probability: a reduced fraction in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactProb {
    value: Ratio<BigUint>,
}

impl ExactProb {
    /// Builds `favourable / total`.
    ///
    /// A zero `total` means the conditioning event is impossible, which is
    /// reported as [`Error::ImpossibleCondition`] with `what` as context.
    pub fn from_counts(favourable: ExactInt, total: ExactInt, what: &str) -> Result<Self> {
        if total.is_zero() {
            return Err(Error::ImpossibleCondition(what.to_string()));
        }
        if favourable > total {
            return Err(Error::Domain(format!(
                "{what}: favourable count exceeds the total"
            )));
        }
        Ok(ExactProb {
            value: Ratio::new(favourable, total),
        })
    }

    pub fn from_ratio(value: ExactRatio) -> Result<Self> {
        if value > Ratio::one() {
            return Err(Error::Domain("probability above one".into()));
        }
        Ok(ExactProb { value })
    }

    pub fn zero() -> Self {
        ExactProb {
            value: Ratio::zero(),
        }
    }

    pub fn one() -> Self {
        ExactProb {
            value: Ratio::one(),
        }
    }

    pub fn numerator(&self) -> &ExactInt {
        self.value.numer()
    }

    pub fn denominator(&self) -> &ExactInt {
        self.value.denom()
    }

    pub fn as_ratio(&self) -> &ExactRatio {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    /// `1 - p`.
    pub fn complement(&self) -> ExactProb {
        ExactProb {
            value: Ratio::one() - &self.value,
        }
    }

    /// Nearest `f64`; underflows to `0.0` below about `1e-308`.
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }

    /// Base-10 logarithm, accurate even when the value underflows `f64`.
    pub fn log10(&self) -> f64 {
        ratio_log10(&self.value)
    }
}

impl PartialOrd for ExactProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProb {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.cmp(&other.value)
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_decimal(self, 4))
    }
}

#[derive(Serialize, Deserialize)]
struct ProbRepr {
    numerator: String,
    denominator: String,
}

impl Serialize for ExactProb {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ProbRepr {
            numerator: self.numerator().to_string(),
            denominator: self.denominator().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactProb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ProbRepr::deserialize(deserializer)?;
        let num: BigUint = repr.numerator.parse().map_err(D::Error::custom)?;
        let den: BigUint = repr.denominator.parse().map_err(D::Error::custom)?;
        ExactProb::from_counts(num, den, "deserialized probability").map_err(D::Error::custom)
    }
}

/// Nearest `f64` of a nonnegative rational (may underflow or overflow).
pub fn ratio_to_f64(r: &ExactRatio) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let l = ratio_log10(r);
    if l < -330.0 {
        return 0.0;
    }
    10f64.powf(l)
}

/// `log10` of a positive rational; `-inf` for zero.
pub fn ratio_log10(r: &ExactRatio) -> f64 {
    if r.numer().is_zero() {
        return f64::NEG_INFINITY;
    }
    big_log10(r.numer()) - big_log10(r.denom())
}

fn big_log10(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).log10();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(0.0);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}
