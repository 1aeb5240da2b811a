//! The coefficient `alpha(k, n)`: the number of ways to place `n` distinct
//! observations on `k` fixed `Y`-values so that every one of them is used.
//!
//! Each `Y`-value offers `d_Z` cells, and a value is used when at least one of
//! its cells is occupied, so `alpha(k, n) = [z^n] ((1+z)^{d_Z} - 1)^k`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::{big_binomial, binomial, into_count, ExactInt};

/// Environment variable that overrides the capacity of the global cache.
pub const ALPHA_CACHE_ENV: &str = "LADPROB_ALPHA_CACHE";

pub const DEFAULT_ALPHA_CACHE_CAPACITY: usize = 1 << 16;

/// How to evaluate `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaMethod {
    /// Convolution when `d_Z <= n`, alternating sum otherwise.
    Auto,
    /// Inclusion-exclusion: `sum_r (-1)^(k-r) C(k,r) C(r d_Z, n)`.
    Direct,
    /// `alpha(j, m) = sum_{t>=1} C(d_Z, t) alpha(j-1, m-t)`, filled row by row.
    Convolution,
}

/// Memo table for `alpha`, keyed on `(k, n, |Z|)`.
///
/// Safe to share between threads. When the table reaches its capacity it is
/// cleared; entries are cheap to recompute and the workloads revisit a small
/// working set.
pub struct AlphaCache {
    capacity: usize,
    values: RwLock<HashMap<(u64, u64, u32), ExactInt>>,
}

impl AlphaCache {
    pub fn new(capacity: usize) -> Self {
        AlphaCache {
            capacity: capacity.max(1),
            values: RwLock::new(HashMap::new()),
        }
    }

    /// The process-wide cache. Capacity comes from [`ALPHA_CACHE_ENV`] when set.
    pub fn global() -> &'static AlphaCache {
        static GLOBAL: OnceLock<AlphaCache> = OnceLock::new();
        GLOBAL.get_or_init(|| {
            let capacity = std::env::var(ALPHA_CACHE_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .unwrap_or(DEFAULT_ALPHA_CACHE_CAPACITY);
            AlphaCache::new(capacity)
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.values.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        if let Ok(mut m) = self.values.write() {
            m.clear();
        }
    }

    /// `alpha(k, n)` for `d_Z = 2^z_attrs`, memoized.
    pub fn alpha(&self, k: u64, n: u64, z_attrs: u32) -> ExactInt {
        if let Some(v) = trivial_alpha(k, n, z_attrs) {
            return v;
        }
        if let Some(v) = self.values.read().ok().and_then(|m| m.get(&(k, n, z_attrs)).cloned()) {
            return v;
        }
        if uses_convolution(n, z_attrs) {
            // One table fill yields every alpha(j, m) with j <= k, m <= n.
            let table = convolution_table(k, n, z_attrs);
            let value = table[k as usize][n as usize].clone();
            self.store_many(table, z_attrs);
            value
        } else {
            let value = alpha_direct(k, n, z_attrs);
            self.store(k, n, z_attrs, value.clone());
            value
        }
    }

    /// `[alpha(0, n), ..., alpha(kmax, n)]`, sharing the binomials `C(r d_Z, n)` across `k`.
    pub fn alpha_row(&self, kmax: u64, n: u64, z_attrs: u32) -> Vec<ExactInt> {
        let cached: Option<Vec<ExactInt>> = self.values.read().ok().and_then(|m| {
            (0..=kmax)
                .map(|k| trivial_alpha(k, n, z_attrs).or_else(|| m.get(&(k, n, z_attrs)).cloned()))
                .collect()
        });
        if let Some(row) = cached {
            return row;
        }
        if uses_convolution(n, z_attrs) {
            let table = convolution_table(kmax, n, z_attrs);
            let row: Vec<ExactInt> = table.iter().map(|r| r[n as usize].clone()).collect();
            self.store_many(table, z_attrs);
            return row;
        }
        let row = direct_row(kmax, n, z_attrs);
        for (k, value) in row.iter().enumerate() {
            if !value.is_zero() {
                self.store(k as u64, n, z_attrs, value.clone());
            }
        }
        row
    }

    fn store(&self, k: u64, n: u64, z_attrs: u32, value: ExactInt) {
        if let Ok(mut m) = self.values.write() {
            if m.len() >= self.capacity {
                m.clear();
            }
            m.insert((k, n, z_attrs), value);
        }
    }

    fn store_many(&self, table: Vec<Vec<ExactInt>>, z_attrs: u32) {
        if let Ok(mut m) = self.values.write() {
            for (j, row) in table.into_iter().enumerate() {
                for (mm, value) in row.into_iter().enumerate() {
                    if value.is_zero() {
                        continue;
                    }
                    if m.len() >= self.capacity {
                        m.clear();
                    }
                    m.insert((j as u64, mm as u64, z_attrs), value);
                }
            }
        }
    }
}

/// `alpha(k, n)` through the global cache.
pub fn alpha(k: u64, n: u64, z_attrs: u32) -> ExactInt {
    AlphaCache::global().alpha(k, n, z_attrs)
}

/// `[alpha(0, n), ..., alpha(kmax, n)]` through the global cache.
pub fn alpha_row(kmax: u64, n: u64, z_attrs: u32) -> Vec<ExactInt> {
    AlphaCache::global().alpha_row(kmax, n, z_attrs)
}

impl AlphaMethod {
    /// Evaluates `alpha(k, n)` with this method, bypassing any cache.
    pub fn eval(self, k: u64, n: u64, z_attrs: u32) -> ExactInt {
        if let Some(v) = trivial_alpha(k, n, z_attrs) {
            return v;
        }
        match self {
            AlphaMethod::Direct => alpha_direct(k, n, z_attrs),
            AlphaMethod::Convolution => convolution_table(k, n, z_attrs)[k as usize][n as usize].clone(),
            AlphaMethod::Auto => {
                if uses_convolution(n, z_attrs) {
                    AlphaMethod::Convolution.eval(k, n, z_attrs)
                } else {
                    alpha_direct(k, n, z_attrs)
                }
            }
        }
    }
}

/// Values fixed by the support: zero unless `k = n = 0` or `1 <= k <= n <= k d_Z`.
fn trivial_alpha(k: u64, n: u64, z_attrs: u32) -> Option<ExactInt> {
    if k == 0 {
        return Some(if n == 0 { BigUint::one() } else { BigUint::zero() });
    }
    if n < k {
        return Some(BigUint::zero());
    }
    if z_attrs < 64 {
        let max = (k as u128) << z_attrs;
        if (n as u128) > max {
            return Some(BigUint::zero());
        }
        if (n as u128) == max {
            return Some(BigUint::one());
        }
    }
    if n == k {
        // One cell per value: d_Z^k choices.
        return Some(BigUint::one() << (z_attrs as u64 * k));
    }
    None
}

fn uses_convolution(n: u64, z_attrs: u32) -> bool {
    z_attrs < 64 && (1u64 << z_attrs) <= n
}

fn alpha_direct(k: u64, n: u64, z_attrs: u32) -> ExactInt {
    let d_z = BigUint::one() << z_attrs;
    let mut acc = BigInt::zero();
    for r in 1..=k {
        let term = binomial(k, r) * big_binomial(&(&d_z * r), n);
        if (k - r).is_multiple_of(2) {
            acc += BigInt::from(term);
        } else {
            acc -= BigInt::from(term);
        }
    }
    into_count(acc, "alpha")
}

fn direct_row(kmax: u64, n: u64, z_attrs: u32) -> Vec<ExactInt> {
    let d_z = BigUint::one() << z_attrs;
    // C(r d_Z, n) for r = 0..=kmax
    let cells: Vec<ExactInt> = (0..=kmax).map(|r| big_binomial(&(&d_z * r), n)).collect();
    (0..=kmax)
        .map(|k| {
            if let Some(v) = trivial_alpha(k, n, z_attrs) {
                return v;
            }
            let mut acc = BigInt::zero();
            let mut c = BigUint::one();
            // c runs through C(k, r)
            for r in 1..=k {
                c = c * (k - r + 1) / r;
                let term = BigInt::from(&c * &cells[r as usize]);
                if (k - r) % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            into_count(acc, "alpha")
        })
        .collect()
}

/// Table `t[j][m] = alpha(j, m)` for `j <= k`, `m <= n`. Requires `d_Z` to fit `u64`.
fn convolution_table(k: u64, n: u64, z_attrs: u32) -> Vec<Vec<ExactInt>> {
    let d_z = 1u64 << z_attrs;
    let width = n as usize + 1;
    let max_t = d_z.min(n) as usize;
    let weights: Vec<ExactInt> = (0..=max_t as u64).map(|t| binomial(d_z, t)).collect();
    let mut table = Vec::with_capacity(k as usize + 1);
    let mut first = vec![BigUint::zero(); width];
    first[0] = BigUint::one();
    table.push(first);
    for j in 1..=k as usize {
        let prev = &table[j - 1];
        let mut row = vec![BigUint::zero(); width];
        for m in j..width {
            let mut acc = BigUint::zero();
            for t in 1..=max_t.min(m) {
                let p = &prev[m - t];
                if !p.is_zero() {
                    acc += &weights[t] * p;
                }
            }
            row[m] = acc;
        }
        table.push(row);
    }
    table
}
