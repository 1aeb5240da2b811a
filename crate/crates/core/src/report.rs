//! Collecting probabilities into reports and rendering them as text, JSON or CSV.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{to_decimal, DomainSpec, ExactProb};
use crate::lad::{
    find_minimal_solutions, is_solution, min_pattern_cover, require_satisfiable, size_profile, AttributeSubset,
    CoverOptions, GroupedInstance, SearchBudget, MAX_PATTERN_ATTRS,
};
use crate::model_m1::{
    m1_probability, pattern_distribution, pattern_probability, projection_size_distribution, robustness_probability,
    scan_attribute_count, M1Case, Rounding, SizeProfile,
};
use crate::model_m2::M2Analysis;

pub const DEFAULT_DIGITS: usize = 4;

/// The question a probability answers about a candidate attribute subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionTag {
    /// How much `Y` shrinks the data: `Pr(k / n1, n2)`.
    Reduction,
    /// Sizes of both group projections: `Pr(k1, k2 / n1, n2)`.
    Structure,
    /// Plausibility of `|Y|` itself: `Pr(n1, n2 / n)` and the intersection sizes.
    Bound,
    /// All `Y`-values present.
    Reliability,
    /// Number of patterns needed for the first group: `Pr(k1 = r / n1, n2)`.
    Covering,
}

impl QuestionTag {
    pub fn name(self) -> &'static str {
        match self {
            QuestionTag::Reduction => "reduction",
            QuestionTag::Structure => "structure",
            QuestionTag::Bound => "bound",
            QuestionTag::Reliability => "reliability",
            QuestionTag::Covering => "covering",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbabilityEntry {
    pub tag: QuestionTag,
    pub label: String,
    /// The profile the probability is conditioned on.
    pub condition: String,
    pub probability: ExactProb,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: u64,
    pub probability: ExactProb,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub tag: QuestionTag,
    pub name: String,
    /// What `x` stands for, e.g. `|Y|`.
    pub x_name: String,
    pub condition: String,
    pub points: Vec<CurvePoint>,
}

/// Sums behind an averaged profile, kept exact so the raw averages can be shown.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AverageSums {
    pub count: u64,
    pub k: u64,
    pub k1: u64,
    pub k2: u64,
}

impl AverageSums {
    pub fn means(&self) -> (f64, f64, f64) {
        let c = self.count.max(1) as f64;
        (self.k as f64 / c, self.k1 as f64 / c, self.k2 as f64 / c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub label: String,
    pub profile: SizeProfile,
    /// Present when `profile` is a rounded average over several solutions.
    pub averaged_over: Option<AverageSums>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub instance: String,
    pub profiles: Vec<ProfileRecord>,
    pub entries: Vec<ProbabilityEntry>,
    pub curves: Vec<Curve>,
    /// Non-probability facts: solution sizes, pattern covers, scan maxima.
    pub details: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn new(instance: impl Into<String>) -> Self {
        AnalysisReport {
            instance: instance.into(),
            ..Default::default()
        }
    }

    pub fn push_entry(&mut self, tag: QuestionTag, label: impl Into<String>, condition: impl Into<String>, p: ExactProb, digits: usize) {
        self.entries.push(ProbabilityEntry {
            tag,
            label: label.into(),
            condition: condition.into(),
            rendered: to_decimal(&p, digits),
            probability: p,
        });
    }

    pub fn detail(&mut self, key: impl Into<String>, value: impl ToString) {
        self.details.push((key.into(), value.to_string()));
    }

    pub fn entry(&self, label: &str) -> Option<&ProbabilityEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn detail_value(&self, key: &str) -> Option<&str> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn curve(tag: QuestionTag, name: &str, x_name: &str, condition: String, points: Vec<(u64, ExactProb)>, digits: usize) -> Curve {
    Curve {
        tag,
        name: name.into(),
        x_name: x_name.into(),
        condition,
        points: points
            .into_iter()
            .map(|(x, p)| CurvePoint {
                x,
                rendered: to_decimal(&p, digits),
                probability: p,
            })
            .collect(),
    }
}

/// Appends every question that `profile` has enough sizes for.
///
/// Needs both group sizes; the projection sizes are optional.
pub fn add_profile_entries(report: &mut AnalysisReport, profile: &SizeProfile, digits: usize) -> Result<()> {
    profile.validate()?;
    let (n1, n2) = profile.groups()?;
    let spec = profile.spec;
    let given = profile.to_string();

    if let Some(k) = profile.k {
        report.push_entry(QuestionTag::Reduction, format!("Pr(k={k} | n1, n2)"), &given, m1_probability(M1Case::E, profile)?, digits);
    }
    if let (Some(k1), Some(k2)) = (profile.k1, profile.k2) {
        report.push_entry(
            QuestionTag::Structure,
            format!("Pr(k1={k1}, k2={k2} | n1, n2)"),
            &given,
            m1_probability(M1Case::F, profile)?,
            digits,
        );
    }
    report.push_entry(QuestionTag::Bound, "Pr(n1, n2 | n)", &given, m1_probability(M1Case::B, profile)?, digits);
    report.push_entry(QuestionTag::Reliability, "Pr(k=d_Y | n)", &given, robustness_probability(profile, false)?, digits);
    report.push_entry(QuestionTag::Reliability, "Pr(k=d_Y | n1, n2)", &given, robustness_probability(profile, true)?, digits);
    for r in 1..=spec.cap_by_d_y(n1).min(3) {
        report.push_entry(QuestionTag::Covering, format!("Pr(k1={r} | n1, n2)"), &given, pattern_probability(n1, n2, spec, r)?, digits);
    }

    let m2 = M2Analysis::new(n1, n2, spec)?;
    for u in 0..=m2.max_intersection().min(2) {
        report.push_entry(QuestionTag::Bound, format!("Pr(|I|={u} | n1, n2)"), &given, m2.prob_eq(u)?, digits);
    }
    // Beyond d_Y the bound holds trivially.
    let t = spec.cap_by_d_y(4);
    report.push_entry(QuestionTag::Bound, "Pr(|I|<=4 | n1, n2)", &given, m2.prob_at_most(t)?, digits);
    Ok(())
}

/// All questions for a bare size profile.
pub fn profile_report(instance: &str, profile: &SizeProfile, digits: usize) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new(instance);
    report.profiles.push(ProfileRecord {
        label: "given".into(),
        profile: *profile,
        averaged_over: None,
    });
    add_profile_entries(&mut report, profile, digits)?;
    Ok(report)
}

/// `rho(n1, n2) / rho(n)` for each `|Y|` in `y_range`, as a single curve.
pub fn scan_report(
    instance: &str,
    n1: u64,
    n2: u64,
    total_attrs: u32,
    y_range: RangeInclusive<u32>,
    digits: usize,
) -> Result<AnalysisReport> {
    let scan = scan_attribute_count(n1, n2, total_attrs, y_range)?;
    let mut report = AnalysisReport::new(instance);
    let points = scan.points.iter().map(|p| (p.y_attrs as u64, p.ratio.clone())).collect();
    let condition = format!("n1={n1}, n2={n2}, |Y|+|Z|={total_attrs}");
    report.curves.push(curve(QuestionTag::Bound, "Pr(n1, n2 | n)", "|Y|", condition, points, digits));
    if let Some(a) = scan.argmax {
        report.detail("argmax |Y|", a);
    }
    report.detail("unimodal", scan.unimodal);
    Ok(report)
}

/// `Pr(k / n1, n2)` over all feasible `k`.
pub fn projection_size_report(instance: &str, n1: u64, n2: u64, spec: DomainSpec, digits: usize) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new(instance);
    let condition = SizeProfile::with_groups(n1, n2, spec).to_string();
    let points = projection_size_distribution(n1, n2, spec)?;
    report.curves.push(curve(QuestionTag::Reduction, "Pr(k | n1, n2)", "k", condition, points, digits));
    Ok(report)
}

/// `Pr(k1 = r / n1, n2)` over all feasible `r`.
pub fn pattern_report(instance: &str, n1: u64, n2: u64, spec: DomainSpec, digits: usize) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new(instance);
    let condition = SizeProfile::with_groups(n1, n2, spec).to_string();
    let points = pattern_distribution(n1, n2, spec)?;
    report.curves.push(curve(QuestionTag::Covering, "Pr(k1=r | n1, n2)", "r", condition, points, digits));
    Ok(report)
}

/// Which attribute subset an instance is analysed through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalysisTarget {
    Candidate(AttributeSubset),
    Search(SearchBudget),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub digits: usize,
    pub cover: CoverOptions,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            digits: DEFAULT_DIGITS,
            cover: CoverOptions::default(),
        }
    }
}

/// Computes the size profile of `inst` through a candidate subset, or through
/// the minimum solutions found by search, and reports every question on it.
///
/// With several solutions, each one's profile is listed and the probabilities
/// are computed on the average, with `k` and `k1` rounded to the nearest integer
/// and `k2 = k - k1`.
pub fn analyze_instance(inst: &GroupedInstance, instance: &str, target: &AnalysisTarget, options: &AnalyzeOptions) -> Result<AnalysisReport> {
    require_satisfiable(inst)?;
    let mut report = AnalysisReport::new(instance);
    report.warnings.extend(inst.warnings().iter().cloned());
    let digits = options.digits;

    let (profile, cover_subset) = match target {
        AnalysisTarget::Candidate(y) => {
            let mut profile = size_profile(inst, y)?;
            report.detail("candidate", y.names(inst).join(","));
            if !is_solution(inst, y)?.is_solution {
                report
                    .warnings
                    .push(format!("{y} does not separate the groups; projection sizes are left out"));
                profile.k = None;
                profile.k1 = None;
                profile.k2 = None;
            }
            report.profiles.push(ProfileRecord {
                label: "candidate".into(),
                profile,
                averaged_over: None,
            });
            (profile, y.clone())
        }
        AnalysisTarget::Search(budget) => {
            let search = find_minimal_solutions(inst, budget)?;
            report.detail("search nodes", search.nodes);
            report.detail("search complete", search.optimal);
            let Some(size) = search.size else {
                report.warnings.push("no separating subset found within the search budget".into());
                return Ok(report);
            };
            report.detail("minimum solution size", size);
            report.detail("solutions", search.solutions.len());
            let mut sums = AverageSums { count: 0, k: 0, k1: 0, k2: 0 };
            let mut base = None;
            for y in &search.solutions {
                let p = size_profile(inst, y)?;
                sums.count += 1;
                sums.k += p.k.unwrap_or(0);
                sums.k1 += p.k1.unwrap_or(0);
                sums.k2 += p.k2.unwrap_or(0);
                base.get_or_insert(p);
                report.profiles.push(ProfileRecord {
                    label: format!("solution {}", y.names(inst).join(",")),
                    profile: p,
                    averaged_over: None,
                });
            }
            let mut profile = base.expect("at least one solution");
            if sums.count > 1 {
                let (mk, mk1, mk2) = sums.means();
                let k = Rounding::Nearest.apply(mk);
                let k1 = Rounding::Nearest.apply(mk1);
                profile.k = Some(k);
                profile.k1 = Some(k1);
                profile.k2 = Some(k.saturating_sub(k1));
                report.detail("average k, k1, k2", format!("{mk:.3}, {mk1:.3}, {mk2:.3}"));
                report.profiles.push(ProfileRecord {
                    label: "average".into(),
                    profile,
                    averaged_over: Some(sums),
                });
            }
            (profile, search.solutions[0].clone())
        }
    };

    if let Some(k) = profile.k {
        report.detail("k, k1, k2", format!("{k}, {}, {}", profile.k1.unwrap_or(0), profile.k2.unwrap_or(0)));
    }
    add_profile_entries(&mut report, &profile, digits)?;

    if cover_subset.len() <= MAX_PATTERN_ATTRS {
        let cover = min_pattern_cover(inst, &cover_subset, &options.cover)?;
        let rendered: Vec<String> = cover.patterns.iter().map(|p| p.render(inst)).collect();
        report.detail("pattern cover size", cover.patterns.len());
        report.detail("pattern cover", rendered.join(" | "));
        if !cover.exact {
            report.warnings.push("pattern cover is greedy, not proven minimum".into());
        }
        if !cover.uncoverable.is_empty() {
            report
                .warnings
                .push(format!("{} first-group observations have no pattern over {cover_subset}", cover.uncoverable.len()));
        }
    } else {
        report
            .warnings
            .push(format!("pattern cover skipped: more than {MAX_PATTERN_ATTRS} attributes"));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Domain(format!("unknown format {other:?}; expected text, json or csv"))),
        }
    }
}

pub const CSV_HEADER: [&str; 9] = ["kind", "tag", "label", "x", "value", "numerator", "denominator", "condition", "instance"];

pub fn render_report(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Format::Csv => render_csv(report),
        Format::Text => render_text(report),
    }
}

fn render_csv(report: &AnalysisReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, row: [&str; 9]| w.write_record(row).expect("writing to memory");
    write(&mut w, CSV_HEADER);
    for e in &report.entries {
        let (num, den) = (e.probability.numerator().to_string(), e.probability.denominator().to_string());
        write(&mut w, ["entry", e.tag.name(), &e.label, "", &e.rendered, &num, &den, &e.condition, &report.instance]);
    }
    for c in &report.curves {
        for p in &c.points {
            let (num, den) = (p.probability.numerator().to_string(), p.probability.denominator().to_string());
            let x = p.x.to_string();
            write(&mut w, ["curve", c.tag.name(), &c.name, &x, &p.rendered, &num, &den, &c.condition, &report.instance]);
        }
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv is utf-8")
}

fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    writeln!(out, "instance: {}", report.instance).unwrap();
    for p in &report.profiles {
        writeln!(out, "profile {}: {}", p.label, p.profile).unwrap();
    }
    for (k, v) in &report.details {
        writeln!(out, "{k}: {v}").unwrap();
    }
    let mut rows: Vec<[String; 4]> = report
        .entries
        .iter()
        .map(|e| [e.tag.name().to_string(), e.label.clone(), e.rendered.clone(), e.condition.clone()])
        .collect();
    for c in &report.curves {
        for p in &c.points {
            rows.push([
                c.tag.name().to_string(),
                format!("{} at {}={}", c.name, c.x_name, p.x),
                p.rendered.clone(),
                c.condition.clone(),
            ]);
        }
    }
    if !rows.is_empty() {
        let header = ["question", "probability", "value", "given"].map(String::from);
        let width = |i: usize| rows.iter().chain([&header]).map(|r| r[i].chars().count()).max().unwrap_or(0);
        let (w0, w1, w2) = (width(0), width(1), width(2));
        for r in [&header].into_iter().chain(&rows) {
            writeln!(out, "{:<w0$}  {:<w1$}  {:<w2$}  {}", r[0], r[1], r[2], r[3]).unwrap();
        }
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    out
}
