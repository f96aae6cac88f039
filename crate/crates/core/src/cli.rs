//! Command-line front end. Each verb renders to a string so the binary stays
//! a thin wrapper and the output can be tested byte for byte.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hypotheses::{holds_numeric, Hypothesis};
use crate::joint::{Model, ModelParams, Param};
use crate::measures::{classify_covariate, ClassificationReport, DEFAULT_TOL};
use crate::scalar::{Rational, Scalar};
use crate::strata_tables::{analyze_counts, coarsen, load_counts_path, CoarseningMap};
use crate::theorems::{clauses, find_clause, verify_clause, Theorem, TheoremClause};

/// Environment variable capping campaign worker threads.
pub const THREADS_ENV: &str = "CONFOUND_KIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "confound-kit", version, about = "Confounding and irrelevant-factor analysis for binary counterfactual models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the covariate of a stratified count table.
    Analyze {
        table: PathBuf,
        /// Binary regrouping of strata, e.g. "0=1,2,3;1=4".
        #[arg(long)]
        coarsen: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Classify the covariate of a parameterized model.
    Classify(ClassifyArgs),
    /// Run a sampling campaign for one theorem clause.
    Verify {
        #[arg(long)]
        theorem: String,
        #[arg(long)]
        clause: char,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Defaults to 1e-10, or 0 with --exact.
        #[arg(long)]
        tol: Option<f64>,
        /// Rational arithmetic; requires tolerance 0.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// List the hypotheses and the theorem clause table.
    Hypotheses {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub model: u8,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub a0: Option<String>,
    #[arg(long)]
    pub a1: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub c0: Option<String>,
    #[arg(long)]
    pub c1: Option<String>,
    #[arg(long)]
    pub b0: Option<String>,
    #[arg(long)]
    pub b1: Option<String>,
    #[arg(long)]
    pub u0: Option<String>,
    #[arg(long)]
    pub u1: Option<String>,
    /// Defaults to 1e-9, or 0 with --exact.
    #[arg(long)]
    pub tol: Option<String>,
    /// Parse parameters as exact decimals or fractions.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl ClassifyArgs {
    fn raw(&self, p: Param) -> Option<&str> {
        match p {
            Param::T => self.t.as_deref(),
            Param::A0 => self.a0.as_deref(),
            Param::A1 => self.a1.as_deref(),
            Param::A => self.a.as_deref(),
            Param::C0 => self.c0.as_deref(),
            Param::C1 => self.c1.as_deref(),
            Param::B0 => self.b0.as_deref(),
            Param::B1 => self.b1.as_deref(),
            Param::U0 => self.u0.as_deref(),
            Param::U1 => self.u1.as_deref(),
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags or flag values; exit code 2.
    Usage(String),
    /// Input could not be processed; exit code 1.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

fn ok(stdout: String) -> Outcome {
    Outcome { code: 0, stdout }
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Analyze { table, coarsen, format } => run_analyze(&table, coarsen.as_deref(), format),
        Command::Classify(args) => run_classify(&args),
        Command::Verify { theorem, clause, samples, seed, tol, exact, format } => {
            run_verify(&theorem, clause, samples, seed, tol, exact, format)
        }
        Command::Hypotheses { format } => Ok(run_hypotheses(format)),
    }
}

pub fn run_analyze(table: &std::path::Path, coarsening: Option<&str>, format: Format) -> Result<Outcome, CliError> {
    let mut counts = load_counts_path(table)?;
    if let Some(spec) = coarsening {
        let map: CoarseningMap = spec.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
        counts = coarsen(&counts, &map)?;
    }
    let report = analyze_counts(&counts)?;
    Ok(ok(match format {
        Format::Json => to_json(&report),
        Format::Text => format!("{}\n{}", counts.render_table(), report.render_table()),
    }))
}

/// Hypothesis status line in a classify report; `holds` is `None` when a
/// conditioning event has zero probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisStatus {
    pub id: Hypothesis,
    pub statement: String,
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct ClassifyOutput<T: Scalar> {
    pub params: ModelParams<T>,
    pub report: ClassificationReport<T>,
    pub hypotheses: Vec<HypothesisStatus>,
}

pub fn run_classify(args: &ClassifyArgs) -> Result<Outcome, CliError> {
    if args.exact {
        classify_with::<Rational>(args, Rational::from_ratio(0, 1))
    } else {
        classify_with::<f64>(args, DEFAULT_TOL)
    }
}

fn classify_with<T: Scalar>(args: &ClassifyArgs, default_tol: T) -> Result<Outcome, CliError> {
    let model = Model::from_number(args.model).expect("clap restricts the range");
    let wanted = model.params();
    for p in [Param::T, Param::A0, Param::A1, Param::A, Param::C0, Param::C1] {
        if !wanted.contains(&p) && args.raw(p).is_some() {
            return Err(CliError::Usage(format!("--{p} is not a parameter of {model}")));
        }
    }
    let mut parse_error = None;
    let params = ModelParams::<T>::from_lookup(model, |p| {
        let raw = args.raw(p)?;
        match T::parse_literal(raw) {
            Some(v) => Some(v),
            None => {
                parse_error.get_or_insert(format!("--{p}: cannot parse `{raw}`"));
                None
            }
        }
    });
    if let Some(msg) = parse_error {
        return Err(CliError::Usage(msg));
    }
    let params = params.map_err(|p| CliError::Usage(format!("{model} requires --{p}")))?;
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let tol = match &args.tol {
        Some(raw) => T::parse_literal(raw).ok_or_else(|| CliError::Usage(format!("--tol: cannot parse `{raw}`")))?,
        None => default_tol,
    };
    let joint = params.to_joint()?;
    let report = classify_covariate(&joint, &tol).map_err(|e| match e {
        Error::InexactTolerance | Error::InvalidTolerance(_) => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;
    let hypotheses = Hypothesis::ALL
        .iter()
        .map(|h| HypothesisStatus {
            id: *h,
            statement: h.describe().to_string(),
            holds: holds_numeric(&joint, *h, &tol).ok(),
        })
        .collect();
    let out = ClassifyOutput { params, report, hypotheses };
    Ok(ok(match args.format {
        Format::Json => to_json(&out),
        Format::Text => {
            let mut s = format!("{model}\n{}\nhypotheses\n", out.report.render_table());
            for h in &out.hypotheses {
                let state = match h.holds {
                    Some(true) => "holds",
                    Some(false) => "fails",
                    None => "undefined",
                };
                s.push_str(&format!("  {:<4}{:<24}{state}\n", h.id.id(), h.statement));
            }
            s
        }
    }))
}

pub fn run_verify(
    theorem: &str,
    clause: char,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    exact: bool,
    format: Format,
) -> Result<Outcome, CliError> {
    let theorem: Theorem = theorem.parse().map_err(CliError::Usage)?;
    let clause = find_clause(theorem, clause).map_err(|e| CliError::Usage(e.to_string()))?;
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let report = if exact {
        match tol {
            Some(t) if t != 0.0 => return Err(CliError::Usage(Error::InexactTolerance.to_string())),
            _ => verify_clause(&clause, samples, seed, &Rational::from_ratio(0, 1))?,
        }
    } else {
        let tol = tol.unwrap_or(1e-10);
        if !(tol >= 0.0) {
            return Err(CliError::Usage(format!("--tol {tol} must be nonnegative")));
        }
        verify_clause(&clause, samples, seed, &tol)?
    };
    let stdout = match format {
        Format::Json => to_json(&report),
        Format::Text => report.render_text(),
    };
    Ok(Outcome {
        code: if report.passed() { 0 } else { 1 },
        stdout,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisListing {
    pub hypotheses: Vec<HypothesisEntry>,
    pub clauses: Vec<TheoremClause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisEntry {
    pub id: Hypothesis,
    pub statement: String,
}

pub fn run_hypotheses(format: Format) -> Outcome {
    let listing = HypothesisListing {
        hypotheses: Hypothesis::ALL
            .iter()
            .map(|h| HypothesisEntry { id: *h, statement: h.describe().to_string() })
            .collect(),
        clauses: clauses(),
    };
    ok(match format {
        Format::Json => to_json(&listing),
        Format::Text => {
            let mut s = String::new();
            for h in &listing.hypotheses {
                s.push_str(&format!("{:<4}{}\n", h.id.id(), h.statement));
            }
            s.push('\n');
            for c in &listing.clauses {
                s.push_str(&format!("{c}\n"));
            }
            s
        }
    })
}

/// Worker count requested through [`THREADS_ENV`], if any.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}
