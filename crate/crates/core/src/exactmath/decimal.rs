//! Decimal rendering of exact probabilities.
//!
//! Values within `1e-3` of one are written as `1 - eps` so that the distance to
//! certainty stays visible; small values use scientific notation.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use super::{ratio_log10, ExactProb, ExactRatio};

/// Significant digits used for the `eps` of a `1 - eps` rendering.
const EPS_DIGITS: usize = 2;

fn pow10(e: u32) -> BigUint {
    BigUint::from(10u32).pow(e)
}

/// Compares `r` with `10^e`.
fn cmp_pow10(r: &ExactRatio, e: i64) -> Ordering {
    if e >= 0 {
        r.numer().cmp(&(r.denom() * pow10(e as u32)))
    } else {
        (r.numer() * pow10((-e) as u32)).cmp(r.denom())
    }
}

/// Rounds a positive rational to `sig` significant digits (half up).
///
/// Returns `(m, e)` with `10^(sig-1) <= m < 10^sig` and `r ~ m * 10^(e - sig + 1)`.
pub fn scientific_digits(r: &ExactRatio, sig: usize) -> (BigUint, i64) {
    assert!(!r.numer().is_zero(), "scientific_digits of zero");
    let sig = sig.max(1);
    let mut e = ratio_log10(r).floor() as i64;
    while cmp_pow10(r, e) == Ordering::Less {
        e -= 1;
    }
    while cmp_pow10(r, e + 1) != Ordering::Less {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let (num, den) = if shift >= 0 {
        (r.numer() * pow10(shift as u32), r.denom().clone())
    } else {
        (r.numer().clone(), r.denom() * pow10((-shift) as u32))
    };
    let two = BigUint::from(2u32);
    let mut m = (&two * num + &den) / (two * den);
    if m == pow10(sig as u32) {
        m = pow10(sig as u32 - 1);
        e += 1;
    }
    (m, e)
}

fn render_scientific(r: &ExactRatio, sig: usize) -> String {
    let (m, e) = scientific_digits(r, sig);
    let digits = m.to_string();
    let (head, tail) = digits.split_at(1);
    if tail.is_empty() {
        format!("{head}e{e}")
    } else {
        format!("{head}.{tail}e{e}")
    }
}

/// Renders `p` with `sig` significant digits.
///
/// `"0"` and `"1"` are exact. Values above `1 - 1e-3` print as `"1 - 4.3e-7"`,
/// values below `1e-3` as `"2.279e-11"`, everything else in fixed notation (`"0.5000"`).
pub fn to_decimal(p: &ExactProb, sig: usize) -> String {
    let sig = sig.max(1);
    let r = p.as_ratio();
    if r.is_zero() {
        return "0".into();
    }
    if r.is_one() {
        return "1".into();
    }
    let eps = Ratio::one() - r;
    if cmp_pow10(&eps, -3) == Ordering::Less {
        return format!("1 - {}", render_scientific(&eps, sig.min(EPS_DIGITS)));
    }
    if cmp_pow10(r, -3) == Ordering::Less {
        return render_scientific(r, sig);
    }
    let (m, e) = scientific_digits(r, sig);
    if e >= 0 {
        // Rounded up to 1 at this precision; keep the distance visible instead.
        return format!("1 - {}", render_scientific(&eps, sig.min(EPS_DIGITS)));
    }
    let zeros = "0".repeat((-e - 1) as usize);
    format!("0.{zeros}{m}")
}

/// A parsed rendering: the printed value and the size of one unit in its last digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedDecimal {
    pub value: ExactRatio,
    pub ulp: ExactRatio,
}

impl ParsedDecimal {
    /// True when `exact` is within one unit of the last printed digit.
    pub fn within_one_ulp(&self, exact: &ExactRatio) -> bool {
        let gap = if exact > &self.value {
            exact - &self.value
        } else {
            &self.value - exact
        };
        gap <= self.ulp
    }
}

/// Parses the output of [`to_decimal`] (also plain decimals such as `"0.50"`).
pub fn parse_rendered(s: &str) -> Option<ParsedDecimal> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("1 - ") {
        let eps = parse_plain(rest)?;
        if eps.value > Ratio::one() {
            return None;
        }
        return Some(ParsedDecimal {
            value: Ratio::one() - eps.value,
            ulp: eps.ulp,
        });
    }
    parse_plain(s)
}

fn parse_plain(s: &str) -> Option<ParsedDecimal> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigUint = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let unit = if scale >= 0 {
        Ratio::from_integer(pow10(scale as u32))
    } else {
        Ratio::new(BigUint::one(), pow10((-scale) as u32))
    };
    let exact_literal = (s == "0" || s == "1") && exp == 0;
    Some(ParsedDecimal {
        value: &unit * Ratio::from_integer(digits),
        ulp: if exact_literal { Ratio::zero() } else { unit },
    })
}
