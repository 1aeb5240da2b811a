//! Command-line front end: argument parsing, dispatch and error reporting.
//!
//! [`run`] takes the argument list and two sinks so it can be driven from tests.
//! Exit status is 0 on success, 1 for bad input and 2 when the computation
//! itself fails (caps, impossible conditions, unsatisfiable instances).
//! Errors are printed as a single `error[code]: message` line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ladprob::asymptotics::{egf_bridge_gap, egf_rho, egf_rho_groups_closed};
use ladprob::exactmath::{alpha, ratio_to_f64};
use ladprob::lad::{load_instance, AttributeSubset, LoadOptions, SearchBudget};
use ladprob::model_m1::{
    beta, delta_coeff, gamma_coeff, lambda_coeff, m1_probability, pattern_probability, rho_groups, rho_total,
    robustness_probability,
};
use ladprob::model_m2::{coefficient_a, rho_groups_m2, M2Analysis};
use ladprob::oracle::{check_formulas, monte_carlo_estimate, Model, SamplerOptions, SizeConstraint};
use ladprob::report::{
    analyze_instance, pattern_report, profile_report, projection_size_report, render_report, scan_report, AnalysisReport,
    AnalysisTarget, AnalyzeOptions, Format, QuestionTag,
};
use ladprob::{DomainSpec, Error, ExactInt, M1Case, SizeProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ladprob", version, about = "Exact a-priori probabilities for two-group Boolean data")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Significant digits for decimal renderings.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..=60))]
    digits: u16,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Raw counting coefficients.
    #[command(subcommand)]
    Coeff(CoeffCmd),
    /// Probabilities under disjoint projections.
    #[command(subcommand)]
    M1(M1Cmd),
    /// Probabilities on the intersection of the group projections.
    #[command(subcommand)]
    M2(M2Cmd),
    /// Group-split probability as |Y| varies with |Y| + |Z| fixed.
    Scan(ScanArgs),
    /// Analyse an instance file through a candidate subset or the minimum solutions.
    Instance(InstanceArgs),
    /// Check formulas against brute force or sampling.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Counts in the regime |Z| -> infinity.
    #[command(subcommand)]
    Asympt(AsymptCmd),
}

#[derive(Args, Debug, Clone, Copy)]
struct Domain {
    /// Attributes in Y.
    #[arg(long)]
    y: u32,
    /// Attributes in Z.
    #[arg(long)]
    z: u32,
}

impl Domain {
    fn spec(self) -> DomainSpec {
        DomainSpec::new(self.y, self.z)
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct GroupSizes {
    #[arg(long)]
    n1: u64,
    #[arg(long)]
    n2: u64,
}

#[derive(Subcommand, Debug)]
enum CoeffCmd {
    /// Surjection-like count alpha(k; n) for a given |Z|.
    Alpha {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        z: u32,
    },
    Rho {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        domain: Domain,
    },
    RhoGroups {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    Beta {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        domain: Domain,
    },
    Lambda {
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        domain: Domain,
    },
    Gamma {
        #[arg(long)]
        k: u64,
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    Delta {
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    RhoM2 {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    /// Inclusion-exclusion term A_v behind the intersection-size distribution.
    AM2 {
        #[arg(long)]
        v: u64,
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    n1: Option<u64>,
    #[arg(long)]
    n2: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    k1: Option<u64>,
    #[arg(long)]
    k2: Option<u64>,
    #[command(flatten)]
    domain: Domain,
}

impl ProfileArgs {
    fn profile(&self) -> Result<SizeProfile, Error> {
        let n = match (self.n, self.n1, self.n2) {
            (Some(n), Some(a), Some(b)) if n != a + b => {
                return Err(Error::Domain(format!("n={n} differs from n1 + n2 = {}", a + b)))
            }
            (Some(n), _, _) => n,
            (None, Some(a), Some(b)) => a + b,
            _ => return Err(Error::MissingField("n")),
        };
        Ok(SizeProfile {
            n,
            n1: self.n1,
            n2: self.n2,
            k: self.k,
            k1: self.k1,
            k2: self.k2,
            spec: self.domain.spec(),
        })
    }
}

#[derive(Subcommand, Debug)]
enum M1Cmd {
    /// Conditional probability for one of the cases A..F.
    Prob {
        #[arg(long)]
        case: M1Case,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Pr(k1 = r | n1, n2): the first group needs exactly r patterns.
    PatternProb {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
        #[arg(long)]
        r: u64,
    },
    /// Probability that every Y-value occurs.
    Robustness {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Condition on the group sizes.
        #[arg(long)]
        grouped: bool,
    },
    /// Pr(k | n1, n2) for every k.
    KDist {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    /// Pr(k1 = r | n1, n2) for every r.
    PatternDist {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
    },
    /// Every question for one profile.
    Report {
        #[command(flatten)]
        profile: ProfileArgs,
    },
}

#[derive(Subcommand, Debug)]
enum M2Cmd {
    /// Probability on the size of the projection intersection.
    Inter {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
        /// Intersection size exactly u.
        #[arg(long, conflicts_with = "at_most", required_unless_present = "at_most")]
        eq: Option<u64>,
        /// Intersection size at most t.
        #[arg(long)]
        at_most: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    groups: GroupSizes,
    /// |Y| + |Z|.
    #[arg(long)]
    total: u32,
    #[arg(long, default_value_t = 1)]
    from: u32,
    /// Defaults to --total.
    #[arg(long)]
    to: Option<u32>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// CSV or TSV file with 0/1 attributes and a `group` column.
    path: PathBuf,
    /// Candidate subset as comma-separated attribute names; searched for when absent.
    #[arg(long)]
    y: Option<String>,
    /// Treat this label as group 1 and every other label as group 2.
    #[arg(long)]
    one_vs_rest: Option<String>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    M1,
    M2,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::M1 => Model::M1,
            ModelArg::M2 => Model::M2,
        }
    }
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Enumerate a tiny domain and compare every formula with the counts.
    Exhaustive {
        #[command(flatten)]
        domain: Domain,
        #[arg(long, required_unless_present_all = ["n1", "n2"], conflicts_with_all = ["n1", "n2"])]
        n: Option<u64>,
        #[arg(long, requires = "n2")]
        n1: Option<u64>,
        #[arg(long, requires = "n1")]
        n2: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModelArg::M1)]
        model: ModelArg,
    },
    /// Seeded Monte Carlo frequencies of the instance statistics.
    Sample {
        #[command(flatten)]
        groups: GroupSizes,
        #[command(flatten)]
        domain: Domain,
        #[arg(long, value_enum, default_value_t = ModelArg::M1)]
        model: ModelArg,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = SamplerOptions::default().attempts_per_trial)]
        attempts_per_trial: u64,
    },
}

#[derive(Subcommand, Debug)]
enum AsymptCmd {
    /// Normalized ungrouped count and its leading term.
    Rho {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        n: u64,
    },
    /// Closed form with both group sizes, for d in {2, 3, 4}.
    Groups {
        #[arg(long)]
        d: u64,
        #[command(flatten)]
        groups: GroupSizes,
    },
    /// Relative distance between the rescaled exact count and its limit.
    Bridge {
        #[command(flatten)]
        domain: Domain,
        #[arg(long)]
        n: u64,
    },
}

/// Parses `argv` (including the program name), runs the command and returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK };
            }
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "error[usage]: {}", line.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            if e.is_input_error() {
                EXIT_USAGE
            } else {
                EXIT_COMPUTATION
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<String, Error> {
    let format = Format::from(cli.format);
    let digits = cli.digits as usize;
    let report = match &cli.command {
        Command::Coeff(c) => return coefficient(c).map(|(name, v)| render_coefficient(&name, &v, format)),
        Command::M1(c) => m1(c, digits)?,
        Command::M2(M2Cmd::Inter { groups, domain, eq, at_most }) => {
            let profile = SizeProfile::with_groups(groups.n1, groups.n2, domain.spec());
            let analysis = M2Analysis::new(groups.n1, groups.n2, domain.spec())?;
            let (label, p) = match (eq, at_most) {
                (Some(u), _) => (format!("Pr(|I|={u} | n1, n2)"), analysis.prob_eq(*u)?),
                (None, Some(t)) => (format!("Pr(|I|<={t} | n1, n2)"), analysis.prob_at_most(*t)?),
                (None, None) => return Err(Error::MissingField("eq")),
            };
            single(QuestionTag::Bound, label, &profile, p, digits)
        }
        Command::Scan(s) => {
            let to = s.to.unwrap_or(s.total);
            scan_report("scan", s.groups.n1, s.groups.n2, s.total, s.from..=to, digits)?
        }
        Command::Instance(a) => instance(a, digits)?,
        Command::Oracle(c) => return oracle(c, format),
        Command::Asympt(c) => return asympt(c, format),
    };
    Ok(render_report(&report, format))
}

fn single(tag: QuestionTag, label: String, profile: &SizeProfile, p: ladprob::ExactProb, digits: usize) -> AnalysisReport {
    let mut report = AnalysisReport::new("query");
    report.push_entry(tag, label, profile.to_string(), p, digits);
    report
}

fn coefficient(c: &CoeffCmd) -> Result<(String, ExactInt), Error> {
    Ok(match *c {
        CoeffCmd::Alpha { k, n, z } => (format!("alpha({k}; {n}) for |Z|={z}"), alpha(k, n, z)),
        CoeffCmd::Rho { n, domain } => (format!("rho({n}) for {}", domain.spec()), rho_total(n, domain.spec())?),
        CoeffCmd::RhoGroups { groups: g, domain } => {
            (format!("rho({}, {}) for {}", g.n1, g.n2, domain.spec()), rho_groups(g.n1, g.n2, domain.spec()))
        }
        CoeffCmd::Beta { k, n, domain } => (format!("beta({k}; {n}) for {}", domain.spec()), beta(k, n, domain.spec())),
        CoeffCmd::Lambda { k1, k2, n, domain } => (
            format!("lambda({k1}, {k2}; {n}) for {}", domain.spec()),
            lambda_coeff(k1, k2, n, domain.spec()),
        ),
        CoeffCmd::Gamma { k, groups: g, domain } => (
            format!("gamma({k}; {}, {}) for {}", g.n1, g.n2, domain.spec()),
            gamma_coeff(k, g.n1, g.n2, domain.spec()),
        ),
        CoeffCmd::Delta { k1, k2, groups: g, domain } => (
            format!("delta({k1}, {k2}; {}, {}) for {}", g.n1, g.n2, domain.spec()),
            delta_coeff(k1, k2, g.n1, g.n2, domain.spec()),
        ),
        CoeffCmd::RhoM2 { groups: g, domain } => (
            format!("rho_M2({}, {}) for {}", g.n1, g.n2, domain.spec()),
            rho_groups_m2(g.n1, g.n2, domain.spec()),
        ),
        CoeffCmd::AM2 { v, groups: g, domain } => (
            format!("A({v}; {}, {}) for {}", g.n1, g.n2, domain.spec()),
            coefficient_a(g.n1, g.n2, v, domain.spec())?,
        ),
    })
}

fn render_coefficient(name: &str, value: &ExactInt, format: Format) -> String {
    match format {
        Format::Text => format!("{value}\n"),
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({ "coefficient": name, "value": value.to_string() })).unwrap() + "\n"
        }
        Format::Csv => format!("coefficient,value\n\"{name}\",{value}\n"),
    }
}

fn case_tag(case: M1Case) -> QuestionTag {
    match case {
        M1Case::A | M1Case::B => QuestionTag::Bound,
        M1Case::C | M1Case::E => QuestionTag::Reduction,
        M1Case::D | M1Case::F => QuestionTag::Structure,
    }
}

fn case_label(case: M1Case, p: &SizeProfile) -> String {
    let v = |x: Option<u64>| x.map_or("?".to_string(), |x| x.to_string());
    match case {
        M1Case::A => format!("Pr(n={})", p.n),
        M1Case::B => format!("Pr(n1={}, n2={} | n)", v(p.n1), v(p.n2)),
        M1Case::C => format!("Pr(k={} | n)", v(p.k)),
        M1Case::D => format!("Pr(k1={}, k2={} | n)", v(p.k1), v(p.k2)),
        M1Case::E => format!("Pr(k={} | n1, n2)", v(p.k)),
        M1Case::F => format!("Pr(k1={}, k2={} | n1, n2)", v(p.k1), v(p.k2)),
    }
}

fn m1(c: &M1Cmd, digits: usize) -> Result<AnalysisReport, Error> {
    Ok(match c {
        M1Cmd::Prob { case, profile } => {
            let p = profile.profile()?;
            single(case_tag(*case), case_label(*case, &p), &p, m1_probability(*case, &p)?, digits)
        }
        M1Cmd::PatternProb { groups: g, domain, r } => {
            let p = SizeProfile::with_groups(g.n1, g.n2, domain.spec());
            let prob = pattern_probability(g.n1, g.n2, domain.spec(), *r)?;
            single(QuestionTag::Covering, format!("Pr(k1={r} | n1, n2)"), &p, prob, digits)
        }
        M1Cmd::Robustness { profile, grouped } => {
            let p = profile.profile()?;
            let label = if *grouped { "Pr(k=d_Y | n1, n2)" } else { "Pr(k=d_Y | n)" };
            single(QuestionTag::Reliability, label.into(), &p, robustness_probability(&p, *grouped)?, digits)
        }
        M1Cmd::KDist { groups: g, domain } => projection_size_report("query", g.n1, g.n2, domain.spec(), digits)?,
        M1Cmd::PatternDist { groups: g, domain } => pattern_report("query", g.n1, g.n2, domain.spec(), digits)?,
        M1Cmd::Report { profile } => profile_report("query", &profile.profile()?, digits)?,
    })
}

fn instance(a: &InstanceArgs, digits: usize) -> Result<AnalysisReport, Error> {
    let file = File::open(&a.path).map_err(|e| Error::Io(format!("{}: {e}", a.path.display())))?;
    let options = LoadOptions {
        one_vs_rest: a.one_vs_rest.clone(),
    };
    let inst = load_instance(BufReader::new(file), &options)?;
    let name = a
        .path
        .file_stem()
        .map_or_else(|| a.path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let target = match &a.y {
        Some(list) => {
            let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            AnalysisTarget::Candidate(AttributeSubset::from_names(&inst, &names)?)
        }
        None => {
            let mut budget = SearchBudget::default();
            if let Some(m) = a.max_size {
                budget.max_size = m;
            }
            if let Some(m) = a.max_nodes {
                budget.max_nodes = m;
            }
            AnalysisTarget::Search(budget)
        }
    };
    let options = AnalyzeOptions {
        digits,
        ..Default::default()
    };
    analyze_instance(&inst, &name, &target, &options)
}

fn oracle(c: &OracleCmd, format: Format) -> Result<String, Error> {
    match *c {
        OracleCmd::Exhaustive { domain, n, n1, n2, model } => {
            let constraint = match (n, n1, n2) {
                (Some(n), _, _) => SizeConstraint::Total(n),
                (None, Some(a), Some(b)) => SizeConstraint::Groups(a, b),
                _ => return Err(Error::MissingField("n")),
            };
            let checks = check_formulas(domain.spec(), constraint, model.into())?;
            let failed = checks.iter().filter(|c| !c.agrees()).count();
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&checks).unwrap() + "\n",
                Format::Csv => {
                    let mut s = String::from("formula,formula_value,enumerated,agrees\n");
                    for c in &checks {
                        s += &format!("\"{}\",{},{},{}\n", c.formula, c.formula_value, c.enumerated, c.agrees());
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("exhaustive check on {}\n", domain.spec());
                    for c in &checks {
                        let mark = if c.agrees() { "ok" } else { "MISMATCH" };
                        s += &format!("{mark:8}  {} = {} (enumerated {})\n", c.formula, c.formula_value, c.enumerated);
                    }
                    s += &format!("{} checks, {failed} mismatches\n", checks.len());
                    s
                }
            };
            if failed > 0 {
                return Err(Error::ImpossibleCondition(format!("{failed} formulas disagree with enumeration:\n{text}")));
            }
            Ok(text)
        }
        OracleCmd::Sample { groups: g, domain, model, trials, seed, attempts_per_trial } => {
            let profile = SizeProfile::with_groups(g.n1, g.n2, domain.spec());
            let options = SamplerOptions { attempts_per_trial };
            let mc = monte_carlo_estimate(&profile, model.into(), trials, seed, &options)?;
            Ok(match format {
                Format::Json => serde_json::to_string_pretty(&mc).unwrap() + "\n",
                Format::Csv => {
                    let mut s = String::from("statistic,value,count,frequency,std_error\n");
                    for e in &mc.estimates {
                        s += &format!("{},\"{}\",{},{},{}\n", e.statistic.name(), join(&e.value), e.count, e.frequency, e.std_error);
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!(
                        "{:?} sample of {profile}: {} trials, {} draws, seed {}, {}\n",
                        mc.model, mc.trials, mc.attempts, mc.seed, mc.generator
                    );
                    for e in &mc.estimates {
                        s += &format!(
                            "{:6} {:>10}  {:.6} ± {:.6}\n",
                            e.statistic.name(),
                            join(&e.value),
                            e.frequency,
                            e.std_error
                        );
                    }
                    s
                }
            })
        }
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn asympt(c: &AsymptCmd, format: Format) -> Result<String, Error> {
    let rows: Vec<(String, String)> = match *c {
        AsymptCmd::Rho { d, n } => {
            let r = egf_rho(d, n)?;
            vec![
                ("exact".into(), r.exact_egf_value.to_string()),
                ("leading".into(), r.leading_term.to_string()),
                ("relative gap".into(), format!("{:.6e}", ratio_to_f64(&r.relative_gap))),
            ]
        }
        AsymptCmd::Groups { d, groups: g } => vec![("closed form".into(), egf_rho_groups_closed(d, g.n1, g.n2)?.to_string())],
        AsymptCmd::Bridge { domain, n } => {
            vec![("relative gap".into(), format!("{:.6e}", ratio_to_f64(&egf_bridge_gap(n, domain.spec())?)))]
        }
    };
    Ok(match format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = rows.into_iter().map(|(k, v)| (k, v.into())).collect();
            serde_json::to_string_pretty(&map).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            for (k, v) in rows {
                s += &format!("{k},{v}\n");
            }
            s
        }
        Format::Text => rows.into_iter().map(|(k, v)| format!("{k}: {v}\n")).collect(),
    })
}
