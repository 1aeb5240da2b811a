//! Two-group Boolean data sets: loading, projections and separation checks.
//!
//! Observation and attribute indices are 0-based throughout the API.

mod patterns;
mod solve;

pub use patterns::{
    enumerate_patterns, min_pattern_cover, CoverOptions, Pattern, PatternCover, PatternOptions, MAX_PATTERN_ATTRS,
};
pub use solve::{find_minimal_solutions, SearchBudget, SolutionSearch};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::DomainSpec;
use crate::model_m1::SizeProfile;

/// Reserved column holding the group label.
pub const GROUP_COLUMN: &str = "group";

/// Group membership. Files label them `1`/`2` or `P`/`N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    /// The positive group, `G1`.
    One,
    /// The negative group, `G2`.
    Two,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::One => "1",
            Group::Two => "2",
        }
    }

    fn parse(label: &str) -> Option<Group> {
        match label {
            "1" | "P" | "p" => Some(Group::One),
            "2" | "N" | "n" => Some(Group::Two),
            _ => None,
        }
    }
}

/// Options for [`load_instance`].
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// Treat this label as group 1 and every other label as group 2,
    /// which admits files with more than two groups.
    pub one_vs_rest: Option<String>,
}

/// Boolean observations with a group label each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupedInstance {
    attributes: Vec<String>,
    rows: Vec<Vec<bool>>,
    groups: Vec<Group>,
    dropped_duplicates: usize,
    warnings: Vec<String>,
}

impl GroupedInstance {
    /// Builds an instance, dropping rows that repeat an earlier row of the same group.
    pub fn new(attributes: Vec<String>, rows: Vec<Vec<bool>>, groups: Vec<Group>) -> Result<Self> {
        if rows.len() != groups.len() {
            return Err(Error::Domain(format!("{} rows but {} group labels", rows.len(), groups.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(Error::Parse {
                    row: i + 1,
                    column: row.len().min(attributes.len()) + 1,
                    message: format!("expected {} cells, found {}", attributes.len(), row.len()),
                });
            }
        }
        let mut seen = HashSet::new();
        let mut inst = GroupedInstance {
            attributes,
            rows: Vec::new(),
            groups: Vec::new(),
            dropped_duplicates: 0,
            warnings: Vec::new(),
        };
        for (i, (row, group)) in rows.into_iter().zip(groups).enumerate() {
            if !seen.insert((row.clone(), group)) {
                inst.dropped_duplicates += 1;
                inst.warnings.push(format!("row {} repeats an earlier row of group {}; dropped", i + 1, group.label()));
                continue;
            }
            inst.rows.push(row);
            inst.groups.push(group);
        }
        Ok(inst)
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn group_size(&self, g: Group) -> usize {
        self.groups.iter().filter(|&&x| x == g).count()
    }

    pub fn dropped_duplicates(&self) -> usize {
        self.dropped_duplicates
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Indices of the observations in group `g`.
    pub fn members(&self, g: Group) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().enumerate().filter(move |(_, &x)| x == g).map(|(i, _)| i)
    }

    /// The restriction of observation `o` to `y`.
    pub fn restrict_row(&self, o: usize, y: &AttributeSubset) -> Vec<bool> {
        y.indices().iter().map(|&a| self.rows[o][a]).collect()
    }

    /// The instance projected on `y`, with repeated rows inside a group removed.
    pub fn restrict(&self, y: &AttributeSubset) -> GroupedInstance {
        let attributes = y.indices().iter().map(|&a| self.attributes[a].clone()).collect();
        let rows = (0..self.n()).map(|o| self.restrict_row(o, y)).collect();
        GroupedInstance::new(attributes, rows, self.groups.clone()).expect("restricted rows have matching widths")
    }
}

/// Reads an instance from comma- or tab-separated text.
///
/// The header names the attributes and contains the column `group`; cells are
/// `0` or `1`. Rows repeated within a group are dropped with a warning.
pub fn load_instance<R: Read>(mut source: R, options: &LoadOptions) -> Result<GroupedInstance> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let first_line = text.lines().next().unwrap_or("");
    let delimiter = if first_line.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse { row: 1, column: 1, message: e.to_string() })?
        .clone();
    let group_col = header.iter().position(|h| h == GROUP_COLUMN).ok_or_else(|| Error::Parse {
        row: 1,
        column: header.len() + 1,
        message: format!("missing `{GROUP_COLUMN}` column"),
    })?;
    let attributes: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != group_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse { row: line, column: 1, message: e.to_string() })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(header.len()) + 1,
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(attributes.len());
        for (j, cell) in record.iter().enumerate() {
            if j == group_col {
                continue;
            }
            row.push(match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        row: line,
                        column: j + 1,
                        message: format!("expected 0 or 1, found `{other}`"),
                    })
                }
            });
        }
        rows.push(row);
        labels.push((line, record[group_col].to_string()));
    }
    let groups = assign_groups(&labels, group_col + 1, options)?;
    GroupedInstance::new(attributes, rows, groups)
}

fn assign_groups(labels: &[(usize, String)], column: usize, options: &LoadOptions) -> Result<Vec<Group>> {
    if let Some(positive) = &options.one_vs_rest {
        return Ok(labels
            .iter()
            .map(|(_, l)| if l == positive { Group::One } else { Group::Two })
            .collect());
    }
    let distinct: HashSet<&str> = labels.iter().map(|(_, l)| l.as_str()).collect();
    if distinct.len() != 2 {
        return Err(Error::GroupCount(distinct.len()));
    }
    let mut groups = Vec::with_capacity(labels.len());
    let mut used: HashMap<Group, &str> = HashMap::new();
    for (line, label) in labels {
        let g = Group::parse(label).ok_or_else(|| Error::Parse {
            row: *line,
            column,
            message: format!("group label `{label}` is not one of 1, 2, P, N"),
        })?;
        if let Some(prev) = used.insert(g, label) {
            if prev != label {
                return Err(Error::Parse {
                    row: *line,
                    column,
                    message: format!("labels `{prev}` and `{label}` name the same group"),
                });
            }
        }
        groups.push(g);
    }
    Ok(groups)
}

/// Writes `inst` in the format read by [`load_instance`].
pub fn write_instance<W: Write>(inst: &GroupedInstance, sink: W, delimiter: u8) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header: Vec<&str> = inst.attributes.iter().map(String::as_str).collect();
    header.push(GROUP_COLUMN);
    writer.write_record(&header).map_err(io)?;
    for (row, g) in inst.rows.iter().zip(&inst.groups) {
        let mut cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        cells.push(g.label());
        writer.write_record(&cells).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

/// A candidate set of attributes `Y`; its complement is `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttributeSubset {
    indices: Vec<usize>,
}

impl AttributeSubset {
    /// Sorted, distinct indices below `n_attrs`.
    pub fn new(mut indices: Vec<usize>, n_attrs: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset(format!("attribute {} listed twice", w[0])));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_attrs) {
            return Err(Error::InvalidSubset(format!("attribute index {bad} out of range (have {n_attrs})")));
        }
        Ok(AttributeSubset { indices })
    }

    pub fn from_names<S: AsRef<str>>(inst: &GroupedInstance, names: &[S]) -> Result<Self> {
        let indices = names
            .iter()
            .map(|n| {
                inst.attribute_index(n.as_ref())
                    .ok_or_else(|| Error::InvalidSubset(format!("unknown attribute `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        AttributeSubset::new(indices, inst.attributes().len())
    }

    pub fn all(inst: &GroupedInstance) -> Self {
        AttributeSubset {
            indices: (0..inst.attributes().len()).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn names<'a>(&self, inst: &'a GroupedInstance) -> Vec<&'a str> {
        self.indices.iter().map(|&i| inst.attributes()[i].as_str()).collect()
    }

    /// The subset without its `pos`-th element.
    pub fn without(&self, pos: usize) -> Self {
        let mut indices = self.indices.clone();
        indices.remove(pos);
        AttributeSubset { indices }
    }

    fn check_for(&self, inst: &GroupedInstance) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i >= inst.attributes().len() => Err(Error::InvalidSubset(format!(
                "attribute index {i} out of range (have {})",
                inst.attributes().len()
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AttributeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Outcome of [`check_satisfiable`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Satisfiability {
    pub satisfiable: bool,
    /// Two identical observations in different groups.
    pub witness: Option<(usize, usize)>,
    /// Set when a group has no observation; the probability models need both.
    pub empty_group: bool,
}

/// An instance can be separated iff no observation appears in both groups.
pub fn check_satisfiable(inst: &GroupedInstance) -> Satisfiability {
    let mut first_seen: HashMap<&[bool], (usize, Group)> = HashMap::new();
    let mut witness = None;
    for (o, (row, &g)) in inst.rows.iter().zip(&inst.groups).enumerate() {
        match first_seen.get(row.as_slice()) {
            Some(&(prev, pg)) if pg != g => {
                witness = Some((prev, o));
                break;
            }
            Some(_) => {}
            None => {
                first_seen.insert(row, (o, g));
            }
        }
    }
    Satisfiability {
        satisfiable: witness.is_none(),
        witness,
        empty_group: inst.group_size(Group::One) == 0 || inst.group_size(Group::Two) == 0,
    }
}

pub(crate) fn require_satisfiable(inst: &GroupedInstance) -> Result<()> {
    match check_satisfiable(inst).witness {
        Some((a, b)) => Err(Error::Unsatisfiable(a, b)),
        None => Ok(()),
    }
}

/// Projection sizes of the whole instance and of each group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub k: usize,
    pub k1: usize,
    pub k2: usize,
    /// `|pi_Y(G1) ∩ pi_Y(G2)| = k1 + k2 - k`.
    pub intersection_size: usize,
}

pub fn project(inst: &GroupedInstance, y: &AttributeSubset) -> Result<ProjectionSummary> {
    y.check_for(inst)?;
    let mut g1 = HashSet::new();
    let mut g2 = HashSet::new();
    for o in 0..inst.n() {
        let r = inst.restrict_row(o, y);
        match inst.groups[o] {
            Group::One => g1.insert(r),
            Group::Two => g2.insert(r),
        };
    }
    let intersection_size = g1.intersection(&g2).count();
    Ok(ProjectionSummary {
        k: g1.len() + g2.len() - intersection_size,
        k1: g1.len(),
        k2: g2.len(),
        intersection_size,
    })
}

/// Outcome of [`is_solution`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCheck {
    pub is_solution: bool,
    /// An observation of group 1 and one of group 2 that agree on every attribute of `Y`.
    pub witness: Option<(usize, usize)>,
}

/// `Y` separates the groups iff no two observations from different groups agree on all of `Y`.
pub fn is_solution(inst: &GroupedInstance, y: &AttributeSubset) -> Result<SolutionCheck> {
    y.check_for(inst)?;
    let mut first_of_group1: HashMap<Vec<bool>, usize> = HashMap::new();
    for o in inst.members(Group::One) {
        first_of_group1.entry(inst.restrict_row(o, y)).or_insert(o);
    }
    for o in inst.members(Group::Two) {
        if let Some(&p) = first_of_group1.get(&inst.restrict_row(o, y)) {
            return Ok(SolutionCheck {
                is_solution: false,
                witness: Some((p, o)),
            });
        }
    }
    Ok(SolutionCheck {
        is_solution: true,
        witness: None,
    })
}

/// A solution is non-dominated when dropping any one attribute breaks it.
pub fn is_non_dominated(inst: &GroupedInstance, y: &AttributeSubset) -> Result<bool> {
    if !is_solution(inst, y)?.is_solution {
        return Err(Error::NotASolution);
    }
    for pos in 0..y.len() {
        if is_solution(inst, &y.without(pos))?.is_solution {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sizes of `inst` seen through `y`, ready for the probability models.
pub fn size_profile(inst: &GroupedInstance, y: &AttributeSubset) -> Result<SizeProfile> {
    let p = project(inst, y)?;
    let spec = DomainSpec::new(y.len() as u32, (inst.attributes().len() - y.len()) as u32);
    Ok(SizeProfile {
        n: inst.n() as u64,
        n1: Some(inst.group_size(Group::One) as u64),
        n2: Some(inst.group_size(Group::Two) as u64),
        k: Some(p.k as u64),
        k1: Some(p.k1 as u64),
        k2: Some(p.k2 as u64),
        spec,
    })
}
