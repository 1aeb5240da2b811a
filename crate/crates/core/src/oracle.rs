//! Ground truth for the counting formulas: exhaustive enumeration over tiny
//! domains and seeded Monte Carlo sampling over larger ones.
//!
//! Cells of the domain are numbered `c = y * d_Z + z`, so the `Y`-value of a
//! cell is `c / d_Z`.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{DomainSpec, ExactInt};
use crate::model_m1::{self, SizeProfile};
use crate::model_m2;

/// Largest domain `d_Y d_Z` accepted by [`enumerate_exhaustive`].
pub const MAX_EXHAUSTIVE_CELLS: u64 = 16;
/// Largest number of observations accepted by [`enumerate_exhaustive`].
pub const MAX_EXHAUSTIVE_OBSERVATIONS: u64 = 8;

/// Name of the pseudo-random generator used by [`monte_carlo_estimate`].
pub const GENERATOR: &str = "ChaCha8 (rand_chacha), seeded with seed_from_u64";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    /// Disjoint groups with disjoint projections on `Y`.
    M1,
    /// Disjoint groups only.
    M2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeConstraint {
    /// `n` observations, any split. In M1 this includes the two labelings that
    /// put every observation in one group; in M2 both groups are non-empty.
    Total(u64),
    Groups(u64, u64),
}

/// Statistics recorded for each instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statistic {
    /// `(k)`: projection size of the whole instance.
    K,
    /// `(k1, k2)`.
    K1K2,
    /// `(n1, n2)`.
    GroupSizes,
    /// `(u)`: size of the intersection of the group projections.
    Intersection,
    /// `(k1)`.
    K1,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::K,
        Statistic::K1K2,
        Statistic::GroupSizes,
        Statistic::Intersection,
        Statistic::K1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::K => "k",
            Statistic::K1K2 => "k1,k2",
            Statistic::GroupSizes => "n1,n2",
            Statistic::Intersection => "u",
            Statistic::K1 => "k1",
        }
    }
}

/// Observed values of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Observation {
    n1: u64,
    n2: u64,
    k1: u64,
    k2: u64,
    u: u64,
}

impl Observation {
    fn key(&self, s: Statistic) -> Vec<u64> {
        match s {
            Statistic::K => vec![self.k1 + self.k2 - self.u],
            Statistic::K1K2 => vec![self.k1, self.k2],
            Statistic::GroupSizes => vec![self.n1, self.n2],
            Statistic::Intersection => vec![self.u],
            Statistic::K1 => vec![self.k1],
        }
    }
}

/// Instance counts per statistic value.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OracleTally {
    pub total: ExactInt,
    pub counts: BTreeMap<Statistic, BTreeMap<Vec<u64>, ExactInt>>,
}

impl OracleTally {
    /// Instances whose `stat` equals `key` (zero when never observed).
    pub fn count(&self, stat: Statistic, key: &[u64]) -> ExactInt {
        self.counts
            .get(&stat)
            .and_then(|m| m.get(key))
            .cloned()
            .unwrap_or_default()
    }

    fn from_raw(total: u64, raw: BTreeMap<Statistic, BTreeMap<Vec<u64>, u64>>) -> Self {
        OracleTally {
            total: BigUint::from(total),
            counts: raw
                .into_iter()
                .map(|(s, m)| (s, m.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect()))
                .collect(),
        }
    }
}

#[derive(Default)]
struct RawTally {
    total: u64,
    counts: BTreeMap<Statistic, BTreeMap<Vec<u64>, u64>>,
}

impl RawTally {
    fn add(&mut self, obs: &Observation) {
        self.total += 1;
        for s in Statistic::ALL {
            *self.counts.entry(s).or_default().entry(obs.key(s)).or_default() += 1;
        }
    }

    fn finish(self) -> OracleTally {
        OracleTally::from_raw(self.total, self.counts)
    }
}

fn observe(g1: &[u64], g2: &[u64], z_attrs: u32) -> Observation {
    let v1: HashSet<u64> = g1.iter().map(|c| c >> z_attrs).collect();
    let v2: HashSet<u64> = g2.iter().map(|c| c >> z_attrs).collect();
    Observation {
        n1: g1.len() as u64,
        n2: g2.len() as u64,
        k1: v1.len() as u64,
        k2: v2.len() as u64,
        u: v1.intersection(&v2).count() as u64,
    }
}

/// Calls `f` with every `size`-subset of `0..cells` in lexicographic order.
fn for_each_subset(cells: u64, size: u64, f: &mut dyn FnMut(&[u64])) {
    fn rec(start: u64, cells: u64, size: u64, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if cur.len() as u64 == size {
            f(cur);
            return;
        }
        let need = size - cur.len() as u64;
        for c in start..cells {
            if cells - c < need {
                break;
            }
            cur.push(c);
            rec(c + 1, cells, size, cur, f);
            cur.pop();
        }
    }
    rec(0, cells, size, &mut Vec::new(), f);
}

fn check_caps(spec: &DomainSpec, n: u64) -> Result<u64> {
    let cells = spec.d_y_u64().zip(spec.d_z_u64()).and_then(|(a, b)| a.checked_mul(b));
    match cells {
        Some(c) if c <= MAX_EXHAUSTIVE_CELLS && n <= MAX_EXHAUSTIVE_OBSERVATIONS => Ok(c),
        _ => Err(Error::CapExceeded {
            what: "exhaustive enumeration".into(),
            required: format!(
                "a domain of {} cells and {n} observations (limits {MAX_EXHAUSTIVE_CELLS} and {MAX_EXHAUSTIVE_OBSERVATIONS})",
                spec.d_x()
            ),
        }),
    }
}

/// Tallies every instance of `model` on `spec` that satisfies `constraint`.
///
/// M1 is enumerated without rejection: for each set of cells, every occupied
/// `Y`-value is given wholly to one group.
pub fn enumerate_exhaustive(spec: DomainSpec, constraint: SizeConstraint, model: Model) -> Result<OracleTally> {
    let n = match constraint {
        SizeConstraint::Total(n) => n,
        SizeConstraint::Groups(n1, n2) => n1 + n2,
    };
    let cells = check_caps(&spec, n)?;
    let z = spec.z_attrs;
    let mut tally = RawTally::default();
    match model {
        Model::M1 => for_each_subset(cells, n, &mut |set| {
            let mut values: Vec<u64> = set.iter().map(|c| c >> z).collect();
            values.dedup();
            let k = values.len();
            for labels in 0u32..(1 << k) {
                let (mut g1, mut g2) = (Vec::new(), Vec::new());
                for &c in set {
                    let pos = values.binary_search(&(c >> z)).expect("value occupied");
                    if labels >> pos & 1 == 1 {
                        g1.push(c);
                    } else {
                        g2.push(c);
                    }
                }
                if let SizeConstraint::Groups(n1, _) = constraint {
                    if g1.len() as u64 != n1 {
                        continue;
                    }
                }
                tally.add(&observe(&g1, &g2, z));
            }
        }),
        Model::M2 => {
            let splits: Vec<(u64, u64)> = match constraint {
                SizeConstraint::Total(n) => (1..n).map(|n1| (n1, n - n1)).collect(),
                SizeConstraint::Groups(n1, n2) => vec![(n1, n2)],
            };
            for (n1, n2) in splits {
                for_each_ordered_pair(cells, n1, n2, &mut |g1, g2| tally.add(&observe(g1, g2, z)));
            }
        }
    }
    Ok(tally.finish())
}

/// Every ordered pair of disjoint cell sets of sizes `n1` and `n2`.
fn for_each_ordered_pair(cells: u64, n1: u64, n2: u64, f: &mut dyn FnMut(&[u64], &[u64])) {
    for_each_subset(cells, n1, &mut |g1| {
        let rest: Vec<u64> = (0..cells).filter(|c| !g1.contains(c)).collect();
        for_each_subset(rest.len() as u64, n2, &mut |idx| {
            let g2: Vec<u64> = idx.iter().map(|&i| rest[i as usize]).collect();
            f(g1, &g2);
        });
    });
}

/// M1 tally obtained by filtering the M2 enumeration down to disjoint projections.
pub fn enumerate_m1_by_filtering(spec: DomainSpec, n1: u64, n2: u64) -> Result<OracleTally> {
    let cells = check_caps(&spec, n1 + n2)?;
    let mut tally = RawTally::default();
    for_each_ordered_pair(cells, n1, n2, &mut |g1, g2| {
        let obs = observe(g1, g2, spec.z_attrs);
        if obs.u == 0 {
            tally.add(&obs);
        }
    });
    Ok(tally.finish())
}

/// One formula compared against its enumerated count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub formula: String,
    pub formula_value: ExactInt,
    pub enumerated: ExactInt,
}

impl FormulaCheck {
    pub fn agrees(&self) -> bool {
        self.formula_value == self.enumerated
    }
}

/// Enumerates `model` exhaustively and compares every applicable counting
/// formula with the tally.
pub fn check_formulas(spec: DomainSpec, constraint: SizeConstraint, model: Model) -> Result<Vec<FormulaCheck>> {
    let tally = enumerate_exhaustive(spec, constraint, model)?;
    let mut checks = Vec::new();
    let mut push = |formula: String, formula_value: ExactInt, enumerated: ExactInt| {
        checks.push(FormulaCheck {
            formula,
            formula_value,
            enumerated,
        })
    };
    match (model, constraint) {
        (Model::M1, SizeConstraint::Total(n)) => {
            push(format!("rho({n})"), model_m1::rho_total(n, spec)?, tally.total.clone());
            for k in 0..=n {
                push(format!("beta({k}; {n})"), model_m1::beta(k, n, spec), tally.count(Statistic::K, &[k]));
                for k1 in 1..k {
                    let k2 = k - k1;
                    push(
                        format!("lambda({k1}, {k2}; {n})"),
                        model_m1::lambda_coeff(k1, k2, n, spec),
                        tally.count(Statistic::K1K2, &[k1, k2]),
                    );
                }
            }
            for n1 in 1..n {
                let n2 = n - n1;
                push(
                    format!("rho({n1}, {n2})"),
                    model_m1::rho_groups(n1, n2, spec),
                    tally.count(Statistic::GroupSizes, &[n1, n2]),
                );
            }
        }
        (Model::M1, SizeConstraint::Groups(n1, n2)) => {
            push(format!("rho({n1}, {n2})"), model_m1::rho_groups(n1, n2, spec), tally.total.clone());
            for k in 0..=n1 + n2 {
                push(
                    format!("gamma({k}; {n1}, {n2})"),
                    model_m1::gamma_coeff(k, n1, n2, spec),
                    tally.count(Statistic::K, &[k]),
                );
            }
            for k1 in 0..=n1 {
                for k2 in 0..=n2 {
                    push(
                        format!("delta({k1}, {k2}; {n1}, {n2})"),
                        model_m1::delta_coeff(k1, k2, n1, n2, spec),
                        tally.count(Statistic::K1K2, &[k1, k2]),
                    );
                }
            }
        }
        (Model::M2, SizeConstraint::Total(n)) => {
            let mut sum = ExactInt::default();
            for n1 in 1..n {
                let n2 = n - n1;
                let rho = model_m2::rho_groups_m2(n1, n2, spec);
                sum += &rho;
                push(format!("rho_M2({n1}, {n2})"), rho, tally.count(Statistic::GroupSizes, &[n1, n2]));
            }
            push(format!("sum of rho_M2 over splits of {n}"), sum, tally.total.clone());
        }
        (Model::M2, SizeConstraint::Groups(n1, n2)) => {
            push(format!("rho_M2({n1}, {n2})"), model_m2::rho_groups_m2(n1, n2, spec), tally.total.clone());
            let analysis = model_m2::M2Analysis::new(n1, n2, spec)?;
            for u in 0..=analysis.max_intersection() {
                push(
                    format!("M2 count |I|={u} ({n1}, {n2})"),
                    analysis.count_eq(u)?,
                    tally.count(Statistic::Intersection, &[u]),
                );
            }
        }
    }
    Ok(checks)
}

/// Sampling options for [`monte_carlo_estimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Draws allowed per requested trial before the M1 sampler gives up.
    pub attempts_per_trial: u64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            attempts_per_trial: 1000,
        }
    }
}

/// Empirical frequency of one statistic value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub statistic: Statistic,
    pub value: Vec<u64>,
    pub count: u64,
    pub frequency: f64,
    /// Binomial standard error `sqrt(f (1 - f) / trials)`.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub generator: String,
    pub seed: u64,
    pub model: Model,
    pub trials: u64,
    /// Draws made, including those rejected by the M1 condition.
    pub attempts: u64,
    pub estimates: Vec<Estimate>,
}

impl MonteCarloReport {
    /// Frequency of `value` for `stat`; zero when never observed.
    pub fn frequency(&self, stat: Statistic, value: &[u64]) -> f64 {
        self.estimates
            .iter()
            .find(|e| e.statistic == stat && e.value == value)
            .map_or(0.0, |e| e.frequency)
    }
}

/// Draws `n` distinct cells uniformly from `0..cells`.
fn draw_cells(rng: &mut ChaCha8Rng, cells: u128, n: u64, out: &mut Vec<u128>) {
    out.clear();
    if cells <= 1 << 20 {
        out.extend(index::sample(rng, cells as usize, n as usize).into_iter().map(|c| c as u128));
        return;
    }
    let mut seen = HashSet::with_capacity(n as usize);
    while (out.len() as u64) < n {
        let c = rng.gen_range(0..cells);
        if seen.insert(c) {
            out.push(c);
        }
    }
}

/// Estimates the distribution of every [`Statistic`] by sampling `trials`
/// instances with the group sizes of `profile`.
///
/// M2 instances are `n1 + n2` distinct uniform cells, the first `n1` forming
/// group 1. M1 instances are M2 draws kept only when the projections are disjoint,
/// which is uniform over M1 instances. Fixed `seed` gives identical output.
pub fn monte_carlo_estimate(
    profile: &SizeProfile,
    model: Model,
    trials: u64,
    seed: u64,
    options: &SamplerOptions,
) -> Result<MonteCarloReport> {
    let (n1, n2) = profile.groups()?;
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::Domain("group sizes must be at least 1".into()));
    }
    let spec = profile.spec;
    let bits = spec.y_attrs + spec.z_attrs;
    if bits > 120 {
        return Err(Error::CapExceeded {
            what: "sampling".into(),
            required: format!("cells indexed by {bits} bits (limit 120)"),
        });
    }
    let cells: u128 = 1 << bits;
    if (n1 + n2) as u128 > cells {
        return Err(Error::Domain(format!("{} observations do not fit in {cells} cells", n1 + n2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = trials.saturating_mul(options.attempts_per_trial.max(1));
    let mut raw: BTreeMap<Statistic, BTreeMap<Vec<u64>, u64>> = BTreeMap::new();
    let mut accepted = 0u64;
    let mut attempts = 0u64;
    let mut draw = Vec::new();
    let z = spec.z_attrs;
    while accepted < trials {
        if attempts >= max_attempts {
            return Err(Error::SamplerStalled {
                accepted,
                wanted: trials,
                attempts,
            });
        }
        attempts += 1;
        draw_cells(&mut rng, cells, n1 + n2, &mut draw);
        let v1: HashSet<u128> = draw[..n1 as usize].iter().map(|c| c >> z).collect();
        let v2: HashSet<u128> = draw[n1 as usize..].iter().map(|c| c >> z).collect();
        let u = v1.intersection(&v2).count() as u64;
        if model == Model::M1 && u != 0 {
            continue;
        }
        accepted += 1;
        let obs = Observation {
            n1,
            n2,
            k1: v1.len() as u64,
            k2: v2.len() as u64,
            u,
        };
        for s in Statistic::ALL {
            *raw.entry(s).or_default().entry(obs.key(s)).or_default() += 1;
        }
    }
    let estimates = raw
        .into_iter()
        .flat_map(|(s, m)| {
            m.into_iter().map(move |(value, count)| {
                let f = count as f64 / trials as f64;
                Estimate {
                    statistic: s,
                    value,
                    count,
                    frequency: f,
                    std_error: (f * (1.0 - f) / trials as f64).sqrt(),
                }
            })
        })
        .collect();
    Ok(MonteCarloReport {
        generator: GENERATOR.into(),
        seed,
        model,
        trials,
        attempts,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_m1::{rho_groups, rho_total};

    #[test]
    fn formula_checks_agree_on_a_small_domain() {
        let spec = DomainSpec::new(1, 1);
        for constraint in [SizeConstraint::Total(4), SizeConstraint::Groups(2, 2)] {
            for model in [Model::M1, Model::M2] {
                let checks = check_formulas(spec, constraint, model).unwrap();
                assert!(!checks.is_empty());
                for c in checks {
                    assert!(c.agrees(), "{c:?}");
                }
            }
        }
    }
    use crate::model_m2::rho_groups_m2;

    #[test]
    fn documented_totals() {
        let t = enumerate_exhaustive(DomainSpec::new(1, 0), SizeConstraint::Total(1), Model::M1).unwrap();
        assert_eq!(t.total, BigUint::from(4u32));
        let t = enumerate_exhaustive(DomainSpec::new(1, 1), SizeConstraint::Groups(1, 1), Model::M2).unwrap();
        assert_eq!(t.total, BigUint::from(12u32));
        let by_u: BigUint = (0..=1).map(|u| t.count(Statistic::Intersection, &[u])).sum();
        assert_eq!(by_u, t.total);
        assert_eq!(t.count(Statistic::Intersection, &[1]), BigUint::from(4u32));
    }

    #[test]
    fn caps() {
        assert!(matches!(
            enumerate_exhaustive(DomainSpec::new(3, 2), SizeConstraint::Total(2), Model::M1),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            enumerate_exhaustive(DomainSpec::new(2, 2), SizeConstraint::Total(9), Model::M2),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn totals_match_closed_forms() {
        for (y, z) in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)] {
            let spec = DomainSpec::new(y, z);
            for n in 1..=5 {
                let t = enumerate_exhaustive(spec, SizeConstraint::Total(n), Model::M1).unwrap();
                assert_eq!(t.total, rho_total(n, spec).unwrap());
                for n1 in 1..n {
                    let g = SizeConstraint::Groups(n1, n - n1);
                    assert_eq!(enumerate_exhaustive(spec, g, Model::M1).unwrap().total, rho_groups(n1, n - n1, spec));
                    assert_eq!(enumerate_exhaustive(spec, g, Model::M2).unwrap().total, rho_groups_m2(n1, n - n1, spec));
                }
            }
        }
    }

    #[test]
    fn filtering_path_agrees() {
        for (y, z) in [(1, 1), (2, 1), (2, 2)] {
            let spec = DomainSpec::new(y, z);
            for (n1, n2) in [(1, 1), (2, 1), (2, 3), (3, 3)] {
                let direct = enumerate_exhaustive(spec, SizeConstraint::Groups(n1, n2), Model::M1).unwrap();
                let filtered = enumerate_m1_by_filtering(spec, n1, n2).unwrap();
                assert_eq!(direct, filtered, "{spec} {n1} {n2}");
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = SizeProfile::with_groups(3, 4, DomainSpec::new(2, 3));
        let a = monte_carlo_estimate(&p, Model::M2, 500, 7, &SamplerOptions::default()).unwrap();
        let b = monte_carlo_estimate(&p, Model::M2, 500, 7, &SamplerOptions::default()).unwrap();
        assert_eq!(a, b);
        let one = monte_carlo_estimate(&p, Model::M1, 1, 3, &SamplerOptions::default()).unwrap();
        for e in &one.estimates {
            assert!(e.frequency == 0.0 || e.frequency == 1.0);
        }
        assert!(one.generator.contains("ChaCha8"));
    }

    #[test]
    fn sampler_errors() {
        let p = SizeProfile::with_groups(3, 3, DomainSpec::new(1, 1));
        assert!(matches!(
            monte_carlo_estimate(&p, Model::M2, 10, 1, &SamplerOptions::default()),
            Err(Error::Domain(_))
        ));
        // every value is shared almost surely: M1 acceptance is negligible
        let p = SizeProfile::with_groups(40, 40, DomainSpec::new(2, 20));
        assert!(matches!(
            monte_carlo_estimate(&p, Model::M1, 10, 1, &SamplerOptions { attempts_per_trial: 5 }),
            Err(Error::SamplerStalled { .. })
        ));
        let p = SizeProfile::new(5, DomainSpec::new(2, 2));
        assert_eq!(
            monte_carlo_estimate(&p, Model::M2, 10, 1, &SamplerOptions::default()),
            Err(Error::MissingField("n1"))
        );
    }
}
