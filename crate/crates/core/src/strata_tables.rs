//! Response-type population tables stratified by a covariate.
//!
//! Counts are kept per (response type, exposure, stratum). Stratum labels
//! are free text; a label of the form `1+2+3` denotes an already merged
//! group of original levels, which lets a coarse table be re-coarsened by a
//! map written against the original levels.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{Exposure, JointDistribution};
use crate::measures::{report_from_proportions, ClassificationReport};
use crate::scalar::{Rational, Scalar};

/// Latent individual class fixing both potential outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseType {
    Doomed,
    Causative,
    Preventive,
    Immune,
}

impl ResponseType {
    pub const ALL: [ResponseType; 4] = [
        ResponseType::Doomed,
        ResponseType::Causative,
        ResponseType::Preventive,
        ResponseType::Immune,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Outcome if unexposed.
    pub fn d_unexposed(self) -> u8 {
        matches!(self, ResponseType::Doomed | ResponseType::Preventive) as u8
    }

    /// Outcome if exposed.
    pub fn d_exposed(self) -> u8 {
        matches!(self, ResponseType::Doomed | ResponseType::Causative) as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            ResponseType::Doomed => "doomed",
            ResponseType::Causative => "causative",
            ResponseType::Preventive => "preventive",
            ResponseType::Immune => "immune",
        }
    }
}

impl FromStr for ResponseType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ResponseType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown response type `{s}`"))
    }
}

fn exposure_slot(x: Exposure) -> usize {
    match x {
        Exposure::Exposed => 0,
        Exposure::Unexposed => 1,
    }
}

/// Integer counts by response type, exposure and covariate stratum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedCounts {
    strata: Vec<String>,
    /// `counts[stratum][type][exposure]`
    counts: Vec<[[u64; 2]; 4]>,
}

impl StratifiedCounts {
    pub fn new<S: Into<String>>(strata: impl IntoIterator<Item = S>) -> Self {
        let strata: Vec<String> = strata.into_iter().map(Into::into).collect();
        let counts = vec![[[0; 2]; 4]; strata.len()];
        Self { strata, counts }
    }

    /// Builder-style setter; panics on an out-of-range stratum index.
    pub fn with(mut self, t: ResponseType, x: Exposure, stratum: usize, n: u64) -> Self {
        self.set(t, x, stratum, n);
        self
    }

    pub fn set(&mut self, t: ResponseType, x: Exposure, stratum: usize, n: u64) {
        self.counts[stratum][t.index()][exposure_slot(x)] = n;
    }

    pub fn get(&self, t: ResponseType, x: Exposure, stratum: usize) -> u64 {
        self.counts[stratum][t.index()][exposure_slot(x)]
    }

    pub fn strata(&self) -> &[String] {
        &self.strata
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    /// Individuals with exposure `x` in `stratum`.
    pub fn cell_total(&self, x: Exposure, stratum: usize) -> u64 {
        ResponseType::ALL.iter().map(|t| self.get(*t, x, stratum)).sum()
    }

    pub fn arm_total(&self, x: Exposure) -> u64 {
        (0..self.strata.len()).map(|k| self.cell_total(x, k)).sum()
    }

    /// Individuals with exposure `x` in `stratum` whose unexposed outcome is 1.
    pub fn sick_if_unexposed(&self, x: Exposure, stratum: usize) -> u64 {
        ResponseType::ALL
            .iter()
            .filter(|t| t.d_unexposed() == 1)
            .map(|t| self.get(*t, x, stratum))
            .sum()
    }

    /// Individuals with exposure `x` in `stratum` whose exposed outcome is 1.
    pub fn sick_if_exposed(&self, x: Exposure, stratum: usize) -> u64 {
        ResponseType::ALL
            .iter()
            .filter(|t| t.d_exposed() == 1)
            .map(|t| self.get(*t, x, stratum))
            .sum()
    }

    /// True when every individual is doomed or immune.
    pub fn has_no_exposure_effect(&self) -> bool {
        (0..self.strata.len()).all(|k| {
            Exposure::BOTH.iter().all(|x| {
                self.get(ResponseType::Causative, *x, k) == 0
                    && self.get(ResponseType::Preventive, *x, k) == 0
            })
        })
    }

    fn require_arms(&self) -> Result<()> {
        for x in Exposure::BOTH {
            if self.arm_total(x) == 0 {
                return Err(Error::EmptyArm { arm: x.label() });
            }
        }
        Ok(())
    }

    /// Fixed-width rendering in the layout of a two-arm stratified table.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<12}", "type");
        for s in &self.strata {
            out.push_str(&format!("{:>12}{:>12}", format!("C={s} e"), "ebar"));
        }
        out.push('\n');
        for t in ResponseType::ALL {
            if (0..self.strata.len()).all(|k| self.get(t, Exposure::Exposed, k) + self.get(t, Exposure::Unexposed, k) == 0) {
                continue;
            }
            out.push_str(&format!("{:<12}", t.name()));
            for k in 0..self.strata.len() {
                out.push_str(&format!(
                    "{:>12}{:>12}",
                    self.get(t, Exposure::Exposed, k),
                    self.get(t, Exposure::Unexposed, k)
                ));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<12}", "total"));
        for k in 0..self.strata.len() {
            out.push_str(&format!(
                "{:>12}{:>12}",
                self.cell_total(Exposure::Exposed, k),
                self.cell_total(Exposure::Unexposed, k)
            ));
        }
        out.push('\n');
        out
    }
}

/// Assignment of original covariate levels to binary groups.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoarseningMap {
    groups: [Vec<String>; 2],
}

impl CoarseningMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(mut self, level: impl Into<String>, group: u8) -> Result<Self> {
        let level = level.into();
        if group > 1 {
            return Err(Error::InvalidCoarsening(format!(
                "group {group}: only groups 0 and 1 are supported"
            )));
        }
        if self.group_of(&level).is_some() {
            return Err(Error::InvalidCoarsening(format!("level `{level}` assigned twice")));
        }
        self.groups[group as usize].push(level);
        Ok(self)
    }

    pub fn group_of(&self, level: &str) -> Option<u8> {
        (0..2u8).find(|g| self.groups[*g as usize].iter().any(|l| l == level))
    }

    fn group_label(&self, group: u8) -> String {
        self.groups[group as usize].join("+")
    }
}

impl FromStr for CoarseningMap {
    type Err = Error;

    /// Parses `0=1,2,3;1=4`.
    fn from_str(s: &str) -> Result<Self> {
        let mut map = CoarseningMap::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (group, levels) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidCoarsening(format!("`{part}` lacks `=`")))?;
            let group: u8 = group
                .trim()
                .parse()
                .map_err(|_| Error::InvalidCoarsening(format!("bad group id `{group}`")))?;
            for level in levels.split(',').map(str::trim) {
                if level.is_empty() {
                    return Err(Error::InvalidCoarsening(format!("empty level in `{part}`")));
                }
                map = map.assign(level, group)?;
            }
        }
        if map.groups.iter().all(Vec::is_empty) {
            return Err(Error::InvalidCoarsening("no levels assigned".into()));
        }
        Ok(map)
    }
}

impl fmt::Display for CoarseningMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0={};1={}", self.groups[0].join(","), self.groups[1].join(","))
    }
}

/// Merges strata into the two groups of `map`. A merged label `a+b` is
/// accepted when all of its parts fall in the same group.
pub fn coarsen(counts: &StratifiedCounts, map: &CoarseningMap) -> Result<StratifiedCounts> {
    let mut out = StratifiedCounts::new([map.group_label(0), map.group_label(1)]);
    for (k, label) in counts.strata.iter().enumerate() {
        let mut group = map.group_of(label);
        let parts: Vec<&str> = if group.is_some() {
            Vec::new()
        } else {
            label.split('+').map(str::trim).collect()
        };
        for part in parts {
            let g = map
                .group_of(part)
                .ok_or_else(|| Error::UnmappedStratum(label.clone()))?;
            if group.is_some_and(|prev| prev != g) {
                return Err(Error::InvalidCoarsening(format!(
                    "stratum `{label}` straddles both groups"
                )));
            }
            group = Some(g);
        }
        let g = group.expect("split yields at least one part") as usize;
        for t in 0..4 {
            for x in 0..2 {
                out.counts[g][t][x] += counts.counts[k][t][x];
            }
        }
    }
    Ok(out)
}

fn frac(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact classification straight from the counts.
pub fn analyze_counts(counts: &StratifiedCounts) -> Result<ClassificationReport<Rational>> {
    if counts.strata.len() != 2 {
        return Err(Error::NotBinary(counts.strata.len()));
    }
    counts.require_arms()?;
    let n_exposed = counts.arm_total(Exposure::Exposed);
    let n_unexposed = counts.arm_total(Exposure::Unexposed);
    let sick = |x| (0..2).map(|k| counts.sick_if_unexposed(x, k)).sum::<u64>();

    let hypothetical = frac(sick(Exposure::Exposed), n_exposed);
    let observed = frac(sick(Exposure::Unexposed), n_unexposed);

    let mut standardized = Rational::from_ratio(0, 1);
    for k in 0..2 {
        let exposed_here = counts.cell_total(Exposure::Exposed, k);
        if exposed_here == 0 {
            continue;
        }
        let unexposed_here = counts.cell_total(Exposure::Unexposed, k);
        if unexposed_here == 0 {
            return Err(Error::EmptyStratumCell {
                label: counts.strata[k].clone(),
            });
        }
        standardized += frac(counts.sick_if_unexposed(Exposure::Unexposed, k), unexposed_here)
            * frac(exposed_here, n_exposed);
    }
    report_from_proportions(hypothetical, observed, standardized, &Rational::from_ratio(0, 1))
}

/// Empirical joint with weights `n / N`; stratum 0 becomes `C=0`.
pub fn counts_to_joint(counts: &StratifiedCounts) -> Result<JointDistribution<Rational>> {
    if counts.strata.len() != 2 {
        return Err(Error::NotBinary(counts.strata.len()));
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyTable);
    }
    let mut cells: [Rational; 8] = std::array::from_fn(|_| Rational::from_ratio(0, 1));
    for k in 0..2 {
        for x in Exposure::BOTH {
            for t in ResponseType::ALL {
                let idx = JointDistribution::<Rational>::index(x, k as u8, t.d_unexposed());
                cells[idx] += frac(counts.get(t, x, k), total);
            }
        }
    }
    JointDistribution::new(cells)
}

const HEADER: [&str; 4] = ["type", "exposure", "stratum", "count"];

/// Reads the `type,exposure,stratum,count` CSV format.
pub fn load_counts<R: Read>(source: R) -> Result<StratifiedCounts> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::EmptyTable);
    }
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut strata: Vec<String> = Vec::new();
    let mut seen = BTreeMap::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Csv { line, message };
        let t: ResponseType = record[0].parse().map_err(bad)?;
        let x = match &record[1] {
            "e" => Exposure::Exposed,
            "ebar" => Exposure::Unexposed,
            other => return Err(bad(format!("unknown exposure `{other}` (expected e or ebar)"))),
        };
        let label = record[2].to_string();
        if label.is_empty() {
            return Err(bad("empty stratum label".into()));
        }
        let raw = &record[3];
        let n: u64 = if raw.starts_with('-') {
            return Err(bad(format!("negative count {raw}")));
        } else {
            raw.parse().map_err(|_| bad(format!("invalid count `{raw}`")))?
        };
        let k = match strata.iter().position(|s| *s == label) {
            Some(k) => k,
            None => {
                strata.push(label.clone());
                strata.len() - 1
            }
        };
        if let Some(first) = seen.insert((t, x, k), line) {
            return Err(bad(format!(
                "duplicate row for ({}, {x}, {label}); first seen on line {first}",
                t.name()
            )));
        }
        rows.push((t, x, k, n));
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut counts = StratifiedCounts::new(strata);
    for (t, x, k, n) in rows {
        counts.set(t, x, k, n);
    }
    counts.require_arms()?;
    Ok(counts)
}

pub fn load_counts_path(path: impl AsRef<Path>) -> Result<StratifiedCounts> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_counts(file)
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

/// Table 1 counts: strata `{1,2,3}` and `{4}`, doomed and immune only.
pub fn table1() -> StratifiedCounts {
    binary_fixture(["1+2+3", "4"], [(133, 122), (23, 52)], [(117, 78), (27, 48)])
}

/// Table 2 counts: strata `{1,3,4}` and `{2}`, doomed and immune only.
pub fn table2() -> StratifiedCounts {
    binary_fixture(["1+3+4", "2"], [(46, 26), (110, 148)], [(54, 24), (90, 102)])
}

fn binary_fixture(
    labels: [&str; 2],
    doomed: [(u64, u64); 2],
    immune: [(u64, u64); 2],
) -> StratifiedCounts {
    let mut c = StratifiedCounts::new(labels);
    for k in 0..2 {
        c.set(ResponseType::Doomed, Exposure::Exposed, k, doomed[k].0);
        c.set(ResponseType::Doomed, Exposure::Unexposed, k, doomed[k].1);
        c.set(ResponseType::Immune, Exposure::Exposed, k, immune[k].0);
        c.set(ResponseType::Immune, Exposure::Unexposed, k, immune[k].1);
    }
    c
}
