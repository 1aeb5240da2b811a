//! Patterns over a subset of attributes and minimum covers of the positive group.
//!
//! A term is a conjunction of literals. It is a pattern when at least one
//! group-1 observation satisfies it and no group-2 observation does; it is prime
//! when dropping any literal breaks that property.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AttributeSubset, Group, GroupedInstance};
use crate::error::{Error, Result};

/// Largest `|Y|` accepted by the enumeration; there are `3^|Y|` terms.
pub const MAX_PATTERN_ATTRS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    /// Attributes required to be 1.
    pub positive: Vec<usize>,
    /// Attributes required to be 0.
    pub negative: Vec<usize>,
    /// Group-1 observations satisfying the term.
    pub cover: Vec<usize>,
}

impl Pattern {
    pub fn degree(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    /// Literals as `(attribute, value)` in attribute order.
    pub fn literals(&self) -> Vec<(usize, bool)> {
        let mut lits: Vec<(usize, bool)> = self
            .positive
            .iter()
            .map(|&a| (a, true))
            .chain(self.negative.iter().map(|&a| (a, false)))
            .collect();
        lits.sort_unstable();
        lits
    }

    pub fn satisfied_by(&self, row: &[bool]) -> bool {
        self.positive.iter().all(|&a| row[a]) && self.negative.iter().all(|&a| !row[a])
    }

    /// Renders the term as `¬a∧b`.
    pub fn render(&self, inst: &GroupedInstance) -> String {
        let parts: Vec<String> = self
            .literals()
            .into_iter()
            .map(|(a, v)| {
                let name = &inst.attributes()[a];
                if v {
                    name.clone()
                } else {
                    format!("¬{name}")
                }
            })
            .collect();
        parts.join("∧")
    }

    fn sort_key(&self) -> (usize, Vec<(usize, bool)>) {
        (self.degree(), self.literals())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PatternOptions {
    pub prime_only: bool,
}

/// Bit `i` is the value of attribute `y[i]`.
fn packed(inst: &GroupedInstance, y: &AttributeSubset, o: usize) -> u32 {
    y.indices()
        .iter()
        .enumerate()
        .fold(0u32, |acc, (i, &a)| if inst.rows()[o][a] { acc | 1 << i } else { acc })
}

fn satisfies(x: u32, pos: u32, neg: u32) -> bool {
    x & pos == pos && x & neg == 0
}

/// Every pattern whose attributes lie in `y`, ordered by degree then literals.
///
/// Each pattern is satisfied by some group-1 observation, so it is a subterm of
/// that observation's restriction to `y`; only those subterms are generated.
pub fn enumerate_patterns(inst: &GroupedInstance, y: &AttributeSubset, options: PatternOptions) -> Result<Vec<Pattern>> {
    y.check_for(inst)?;
    if y.len() > MAX_PATTERN_ATTRS {
        return Err(Error::CapExceeded {
            what: "pattern enumeration".into(),
            required: format!("3^{} terms (limit |Y| <= {MAX_PATTERN_ATTRS})", y.len()),
        });
    }
    let full: u32 = if y.is_empty() { 0 } else { u32::MAX >> (32 - y.len()) };
    let positives: Vec<(usize, u32)> = inst.members(Group::One).map(|o| (o, packed(inst, y, o))).collect();
    let negatives: HashSet<u32> = inst.members(Group::Two).map(|o| packed(inst, y, o)).collect();
    let is_pattern = |pos: u32, neg: u32| (pos | neg) != 0 && !negatives.iter().any(|&x| satisfies(x, pos, neg));

    let distinct: HashSet<u32> = positives.iter().map(|&(_, x)| x).collect();
    let mut terms: HashSet<(u32, u32)> = HashSet::new();
    for &x in &distinct {
        if negatives.contains(&x) {
            continue;
        }
        // all non-empty submasks of `full`
        let mut mask = full;
        while mask != 0 {
            let pos = x & mask;
            let neg = !x & mask;
            if is_pattern(pos, neg) {
                terms.insert((pos, neg));
            }
            mask = (mask - 1) & full;
        }
    }
    let mut out = Vec::new();
    for (pos, neg) in terms {
        if options.prime_only {
            let lits = pos | neg;
            let reducible = (0..y.len()).any(|i| lits >> i & 1 == 1 && is_pattern(pos & !(1 << i), neg & !(1 << i)));
            if reducible {
                continue;
            }
        }
        let pick = |m: u32| -> Vec<usize> { (0..y.len()).filter(|i| m >> i & 1 == 1).map(|i| y.indices()[i]).collect() };
        let cover = positives.iter().filter(|&&(_, x)| satisfies(x, pos, neg)).map(|&(o, _)| o).collect();
        out.push(Pattern {
            positive: pick(pos),
            negative: pick(neg),
            cover,
        });
    }
    out.sort_by_key(Pattern::sort_key);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverOptions {
    /// Exact search is used when at most this many candidate patterns remain.
    pub exact_threshold: usize,
    /// Node limit for the exact search; beyond it the best cover so far is kept.
    pub max_nodes: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            exact_threshold: 4096,
            max_nodes: 5_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCover {
    pub patterns: Vec<Pattern>,
    /// True when `patterns` is proven to be of minimum size.
    pub exact: bool,
    /// Group-1 observations that agree with a group-2 observation on `y`;
    /// no pattern over `y` can cover them.
    pub uncoverable: Vec<usize>,
}

impl PatternCover {
    /// True when every group-1 observation is covered.
    pub fn complete(&self) -> bool {
        self.uncoverable.is_empty()
    }
}

/// A smallest set of patterns over `y` whose covers together contain every
/// coverable group-1 observation.
///
/// Candidates are the prime patterns (any pattern can be replaced by a prime
/// subterm with a larger cover), reduced to those with inclusion-maximal covers.
/// Above `exact_threshold` candidates a greedy cover is returned: most newly
/// covered observations, then fewest literals, then literal order.
pub fn min_pattern_cover(inst: &GroupedInstance, y: &AttributeSubset, options: &CoverOptions) -> Result<PatternCover> {
    let primes = enumerate_patterns(inst, y, PatternOptions { prime_only: true })?;
    let negatives: HashSet<Vec<bool>> = inst.members(Group::Two).map(|o| inst.restrict_row(o, y)).collect();
    let (uncoverable, coverable): (Vec<usize>, Vec<usize>) =
        inst.members(Group::One).partition(|&o| negatives.contains(&inst.restrict_row(o, y)));
    if coverable.is_empty() {
        return Ok(PatternCover {
            patterns: Vec::new(),
            exact: true,
            uncoverable,
        });
    }
    let position: HashMap<usize, usize> = coverable.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let words = coverable.len().div_ceil(64);
    let to_bits = |p: &Pattern| {
        let mut b = vec![0u64; words];
        for o in &p.cover {
            let i = position[o];
            b[i / 64] |= 1 << (i % 64);
        }
        b
    };
    // Keep one pattern per inclusion-maximal cover; `primes` is already in preference order.
    let all: Vec<(Vec<u64>, &Pattern)> = primes.iter().map(|p| (to_bits(p), p)).collect();
    let subset_of = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & y == *x);
    let mut candidates: Vec<(Vec<u64>, &Pattern)> = Vec::new();
    for (i, (bits, p)) in all.iter().enumerate() {
        let dominated = all.iter().enumerate().any(|(j, (other, _))| {
            j != i && subset_of(bits, other) && (bits != other || j < i)
        });
        if !dominated {
            candidates.push((bits.clone(), p));
        }
    }
    let covers: Vec<Vec<u64>> = candidates.iter().map(|(b, _)| b.clone()).collect();
    let greedy = greedy_cover(&covers, coverable.len());
    let (chosen, exact) = if covers.len() <= options.exact_threshold {
        exact_cover(&covers, coverable.len(), greedy, options.max_nodes)
    } else {
        (greedy, false)
    };
    let mut patterns: Vec<Pattern> = chosen.into_iter().map(|i| candidates[i].1.clone()).collect();
    patterns.sort_by_key(Pattern::sort_key);
    Ok(PatternCover {
        patterns,
        exact,
        uncoverable,
    })
}

fn count(bits: &[u64]) -> u32 {
    bits.iter().map(|w| w.count_ones()).sum()
}

fn greedy_cover(covers: &[Vec<u64>], universe: usize) -> Vec<usize> {
    let words = universe.div_ceil(64);
    let mut covered = vec![0u64; words];
    let mut chosen = Vec::new();
    while (count(&covered) as usize) < universe {
        let mut best: Option<(u32, usize)> = None;
        for (i, c) in covers.iter().enumerate() {
            let gain: u32 = c.iter().zip(&covered).map(|(x, y)| (x & !y).count_ones()).sum();
            if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, i));
            }
        }
        let (_, i) = best.expect("every coverable observation has a pattern");
        for (w, x) in covered.iter_mut().zip(&covers[i]) {
            *w |= x;
        }
        chosen.push(i);
    }
    chosen
}

struct CoverSearch<'a> {
    covers: &'a [Vec<u64>],
    universe: usize,
    /// Candidates covering each element.
    by_element: Vec<Vec<usize>>,
    max_size: u32,
    best: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
}

impl CoverSearch<'_> {
    fn run(&mut self, covered: &mut Vec<u64>, chosen: &mut Vec<usize>) {
        if self.nodes >= self.max_nodes {
            return;
        }
        self.nodes += 1;
        let remaining = self.universe - count(covered) as usize;
        if remaining == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let lower = remaining.div_ceil(self.max_size as usize);
        if chosen.len() + lower >= self.best.len() {
            return;
        }
        // Branch on the uncovered element with the fewest candidates.
        let e = (0..self.universe)
            .filter(|&e| covered[e / 64] >> (e % 64) & 1 == 0)
            .min_by_key(|&e| self.by_element[e].len())
            .expect("some element is uncovered");
        for ci in self.by_element[e].clone() {
            let saved = covered.clone();
            for (w, x) in covered.iter_mut().zip(&self.covers[ci]) {
                *w |= x;
            }
            chosen.push(ci);
            self.run(covered, chosen);
            chosen.pop();
            *covered = saved;
        }
    }
}

/// Branch and bound seeded with the greedy cover. Returns the cover and whether
/// the search finished within the node limit.
fn exact_cover(covers: &[Vec<u64>], universe: usize, greedy: Vec<usize>, max_nodes: u64) -> (Vec<usize>, bool) {
    let mut by_element = vec![Vec::new(); universe];
    for (i, c) in covers.iter().enumerate() {
        for (e, list) in by_element.iter_mut().enumerate() {
            if c[e / 64] >> (e % 64) & 1 == 1 {
                list.push(i);
            }
        }
    }
    let mut search = CoverSearch {
        covers,
        universe,
        by_element,
        max_size: covers.iter().map(|c| count(c)).max().unwrap_or(1).max(1),
        best: greedy,
        nodes: 0,
        max_nodes,
    };
    let mut covered = vec![0u64; universe.div_ceil(64)];
    search.run(&mut covered, &mut Vec::new());
    let finished = search.nodes < search.max_nodes;
    (search.best, finished)
}
