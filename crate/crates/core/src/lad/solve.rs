//! Minimum-cardinality separating subsets.
//!
//! A subset `Y` separates the groups iff it contains, for every pair of
//! observations from different groups, an attribute on which they differ. The
//! search walks subsets level by level in lexicographic order and prunes a branch
//! as soon as some pair can no longer be separated by the attributes left.

use serde::{Deserialize, Serialize};

use super::{require_satisfiable, AttributeSubset, Group, GroupedInstance};
use crate::error::Result;

/// Limits for [`find_minimal_solutions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Largest cardinality tried.
    pub max_size: usize,
    /// Search nodes visited before giving up.
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_size: usize::MAX,
            max_nodes: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSearch {
    /// Every separating subset of the smallest cardinality reached, in lexicographic order.
    pub solutions: Vec<AttributeSubset>,
    pub size: Option<usize>,
    /// True when the level holding `solutions` was searched completely.
    pub optimal: bool,
    pub nodes: u64,
}

type Bits = Vec<u64>;

fn bit(bits: &Bits, i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

/// Attribute sets on which a group-1 and a group-2 observation differ,
/// keeping only the inclusion-minimal ones.
fn difference_sets(inst: &GroupedInstance) -> Vec<Bits> {
    let m = inst.attributes().len();
    let words = m.div_ceil(64).max(1);
    let pack = |row: &[bool]| {
        let mut b = vec![0u64; words];
        for (i, &v) in row.iter().enumerate() {
            if v {
                b[i / 64] |= 1 << (i % 64);
            }
        }
        b
    };
    let g1: Vec<Bits> = inst.members(Group::One).map(|o| pack(&inst.rows()[o])).collect();
    let g2: Vec<Bits> = inst.members(Group::Two).map(|o| pack(&inst.rows()[o])).collect();
    let mut sets: Vec<Bits> = Vec::with_capacity(g1.len() * g2.len());
    for a in &g1 {
        for b in &g2 {
            sets.push(a.iter().zip(b).map(|(x, y)| x ^ y).collect());
        }
    }
    let ones = |s: &Bits| s.iter().map(|w| w.count_ones()).sum::<u32>();
    sets.sort_by_key(|s| (ones(s), s.clone()));
    sets.dedup();
    let mut minimal: Vec<Bits> = Vec::new();
    for s in sets {
        let dominated = minimal
            .iter()
            .any(|t| t.iter().zip(&s).all(|(tw, sw)| tw & sw == *tw));
        if !dominated {
            minimal.push(s);
        }
    }
    minimal
}

struct Search<'a> {
    sets: &'a [Bits],
    /// Largest attribute index in each set.
    last: Vec<usize>,
    /// For each attribute, the sets containing it.
    containing: Vec<Vec<usize>>,
    m: usize,
    nodes: u64,
    max_nodes: u64,
    exhausted: bool,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    /// Extends `chosen` to `size` attributes, all at least `start`.
    /// `hits[s]` counts chosen attributes in set `s`.
    fn extend(&mut self, chosen: &mut Vec<usize>, start: usize, size: usize, hits: &mut [u32], uncovered: usize) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.exhausted = true;
            return;
        }
        let slots = size - chosen.len();
        if uncovered == 0 {
            if slots == 0 {
                self.found.push(chosen.clone());
            }
            return;
        }
        if slots == 0 || start >= self.m {
            return;
        }
        // Every uncovered set must still contain an attribute >= start.
        for (s, &h) in hits.iter().enumerate() {
            if h == 0 && self.last[s] < start {
                return;
            }
        }
        if self.disjoint_uncovered(hits, start) > slots {
            return;
        }
        for a in start..self.m {
            if self.m - a < slots {
                break;
            }
            let mut newly = 0;
            for &s in &self.containing[a] {
                if hits[s] == 0 {
                    newly += 1;
                }
                hits[s] += 1;
            }
            chosen.push(a);
            self.extend(chosen, a + 1, size, hits, uncovered - newly);
            chosen.pop();
            for &s in &self.containing[a] {
                hits[s] -= 1;
            }
            if self.exhausted {
                return;
            }
        }
    }

    /// Size of a greedy family of pairwise disjoint uncovered sets, restricted
    /// to attributes `>= start`; a lower bound on the attributes still needed.
    fn disjoint_uncovered(&self, hits: &[u32], start: usize) -> usize {
        let words = self.sets.first().map_or(1, |s| s.len());
        let mut used = vec![0u64; words];
        let mut count = 0;
        for (s, set) in self.sets.iter().enumerate() {
            if hits[s] != 0 {
                continue;
            }
            let mut overlap = false;
            for (w, (&x, &u)) in set.iter().zip(&used).enumerate() {
                let mask = mask_from(start, w);
                if x & mask & u != 0 {
                    overlap = true;
                    break;
                }
            }
            if !overlap {
                for (w, (&x, u)) in set.iter().zip(used.iter_mut()).enumerate() {
                    *u |= x & mask_from(start, w);
                }
                count += 1;
            }
        }
        count
    }
}

/// Bits of word `w` whose attribute index is `>= start`.
fn mask_from(start: usize, w: usize) -> u64 {
    let lo = w * 64;
    if start <= lo {
        u64::MAX
    } else if start >= lo + 64 {
        0
    } else {
        u64::MAX << (start - lo)
    }
}

/// All separating subsets of minimum cardinality.
///
/// Levels `1, 2, ...` are searched in order; the first level with a solution is
/// enumerated completely unless the node budget runs out, in which case the
/// solutions found so far are returned with `optimal = false`.
pub fn find_minimal_solutions(inst: &GroupedInstance, budget: &SearchBudget) -> Result<SolutionSearch> {
    require_satisfiable(inst)?;
    let m = inst.attributes().len();
    let sets = difference_sets(inst);
    let last = sets
        .iter()
        .map(|s| (0..m).rev().find(|&i| bit(s, i)).unwrap_or(0))
        .collect();
    let mut containing = vec![Vec::new(); m];
    for (si, s) in sets.iter().enumerate() {
        for (a, c) in containing.iter_mut().enumerate() {
            if bit(s, a) {
                c.push(si);
            }
        }
    }
    let mut search = Search {
        sets: &sets,
        last,
        containing,
        m,
        nodes: 0,
        max_nodes: budget.max_nodes,
        exhausted: false,
        found: Vec::new(),
    };
    let top = budget.max_size.min(m);
    for size in 1..=top {
        let mut hits = vec![0u32; sets.len()];
        search.extend(&mut Vec::new(), 0, size, &mut hits, sets.len());
        if !search.found.is_empty() || search.exhausted {
            let solutions = search
                .found
                .iter()
                .map(|idx| AttributeSubset::new(idx.clone(), m).expect("search yields valid subsets"))
                .collect::<Vec<_>>();
            return Ok(SolutionSearch {
                size: (!solutions.is_empty()).then_some(size),
                optimal: !search.exhausted,
                solutions,
                nodes: search.nodes,
            });
        }
    }
    // With no attribute left to try, only an empty budget is inconclusive.
    Ok(SolutionSearch {
        solutions: Vec::new(),
        size: None,
        optimal: top == m && m > 0,
        nodes: search.nodes,
    })
}
