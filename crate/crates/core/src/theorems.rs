//! Sufficient conditions for irrelevance and for absence of confounding,
//! encoded as data and checked by constrained sampling.
//!
//! Every draw is built into a joint and the conclusion is evaluated on the
//! joint itself, so the check is independent of the parameter algebra used
//! to impose the conditions.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{holds_numeric, impose, Hypothesis, HypothesisSet};
use crate::joint::{JointDistribution, Model, ModelParams, Param};
use crate::measures::{confounding_bias, observed_proportion, standardized_proportion};
use crate::scalar::{one, zero, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [Theorem::T1, Theorem::T2, Theorem::T3, Theorem::T4, Theorem::T5];

    pub fn model(self) -> Model {
        match self {
            Theorem::T1 | Theorem::T2 => Model::CovariateDrivesExposure,
            Theorem::T3 | Theorem::T4 => Model::ExposureDrivesCovariate,
            Theorem::T5 => Model::Independent,
        }
    }

    pub fn conclusion(self) -> Conclusion {
        match self {
            Theorem::T1 | Theorem::T3 => Conclusion::IrrelevantFactor,
            _ => Conclusion::NoConfounding,
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown theorem `{s}` (expected T1..T5)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conclusion {
    /// Standardized proportion equals the observed unexposed risk.
    IrrelevantFactor,
    /// Bias is zero.
    NoConfounding,
}

impl Conclusion {
    /// The quantity that must vanish, evaluated on the joint.
    pub fn violation<T: Scalar>(self, joint: &JointDistribution<T>) -> Result<T> {
        Ok(match self {
            Conclusion::IrrelevantFactor => {
                (standardized_proportion(joint)? - observed_proportion(joint)?).abs()
            }
            Conclusion::NoConfounding => confounding_bias(joint)?.abs(),
        })
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::IrrelevantFactor => "C is an irrelevant factor",
            Conclusion::NoConfounding => "no confounding",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremClause {
    pub theorem: Theorem,
    pub clause: char,
    pub model: Model,
    pub conditions: HypothesisSet,
    pub conclusion: Conclusion,
}

impl fmt::Display for TheoremClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) [{}]: {} => {}",
            self.theorem, self.clause, self.model, self.conditions, self.conclusion
        )
    }
}

use Hypothesis::*;

const TABLE: [(Theorem, char, &[Hypothesis]); 19] = [
    (Theorem::T1, 'a', &[H4]),
    (Theorem::T1, 'b', &[H6]),
    (Theorem::T1, 'c', &[H7, H2, H3]),
    (Theorem::T2, 'a', &[H1]),
    (Theorem::T2, 'b', &[H6, H2, H3]),
    (Theorem::T2, 'c', &[H2, H6, H7]),
    (Theorem::T2, 'd', &[H3, H6, H7]),
    (Theorem::T2, 'e', &[H2, H3, H4]),
    (Theorem::T3, 'a', &[H4]),
    (Theorem::T3, 'b', &[H6]),
    (Theorem::T3, 'c', &[H7, H2, H3]),
    (Theorem::T4, 'a', &[H1]),
    (Theorem::T4, 'b', &[H2, H6, H7]),
    (Theorem::T4, 'c', &[H3, H6, H7]),
    (Theorem::T4, 'd', &[H2, H3, H4]),
    (Theorem::T5, 'a', &[H1]),
    (Theorem::T5, 'b', &[H2, H3]),
    (Theorem::T5, 'c', &[H6, H7, H2]),
    (Theorem::T5, 'd', &[H6, H7, H3]),
];

/// All 19 clauses, in theorem then clause order.
pub fn clauses() -> Vec<TheoremClause> {
    TABLE
        .iter()
        .map(|(theorem, clause, hs)| TheoremClause {
            theorem: *theorem,
            clause: *clause,
            model: theorem.model(),
            conditions: hs.iter().copied().collect(),
            conclusion: theorem.conclusion(),
        })
        .collect()
}

pub fn find_clause(theorem: Theorem, clause: char) -> Result<TheoremClause> {
    clauses()
        .into_iter()
        .find(|c| c.theorem == theorem && c.clause == clause.to_ascii_lowercase())
        .ok_or_else(|| Error::UnknownClause(format!("{theorem}({clause})")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub clause: TheoremClause,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub exact: bool,
    /// Largest conclusion violation over all draws.
    pub max_violation: f64,
    /// Draws whose violation exceeded `tol`.
    pub failures: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn render_text(&self) -> String {
        format!(
            "{}\n  mode          {}\n  samples       {}\n  seed          {}\n  tol           {:e}\n  max violation {:e}\n  failures      {}\n  result        {}\n",
            self.clause,
            if self.exact { "exact" } else { "float" },
            self.samples,
            self.seed,
            self.tol,
            self.max_violation,
            self.failures,
            if self.passed() { "PASS" } else { "FAIL" },
        )
    }
}

/// Random source for draw `index` of a campaign seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one constrained parameter set for `clause`.
pub fn draw<T: Scalar>(clause: &TheoremClause, seed: u64, index: u64) -> Result<ModelParams<T>> {
    let mut rng = sample_rng(seed, index);
    let base = ModelParams::<T>::sample(clause.model, &mut rng);
    impose(&base, &clause.conditions, &mut rng)
}

/// Runs a campaign. Conclusion violations are counted, never raised;
/// only imposition failures abort.
pub fn verify_clause<T: Scalar>(
    clause: &TheoremClause,
    samples: usize,
    seed: u64,
    tol: &T,
) -> Result<VerificationReport> {
    if *tol < zero() {
        return Err(Error::InvalidTolerance(format!("{tol:?} is negative")));
    }
    if T::EXACT && !tol.is_zero() {
        return Err(Error::InexactTolerance);
    }
    let violations: Vec<T> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let params = draw::<T>(clause, seed, i)?;
            clause.conclusion.violation(&params.to_joint()?)
        })
        .collect::<Result<_>>()?;

    let failures = violations.iter().filter(|v| *v > tol).count();
    let max = violations.into_iter().fold(zero::<T>(), T::max_of);
    Ok(VerificationReport {
        clause: clause.clone(),
        samples,
        seed,
        tol: tol.to_f64(),
        exact: T::EXACT,
        max_violation: max.to_f64(),
        failures,
    })
}

/// A parameter set where the conclusion holds but no non-trivial clause's
/// conditions do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConverseWitness<T: Scalar> {
    pub params: ModelParams<T>,
    pub draw: u64,
}

/// Tolerance used by [`falsify_converse`] when testing conditions.
pub const CONVERSE_TOL: f64 = 1e-10;

/// Searches for parameters showing the clause conditions for `conclusion`
/// in `model` are sufficient but not necessary.
///
/// Each draw is projected onto the conclusion's surface (bias solved to zero
/// through `u1`, or irrelevance solved through `b1`). Clauses whose
/// conditions include `H1` are skipped for `NoConfounding`, since `H1` is
/// equivalent to zero bias.
pub fn falsify_converse(
    model: Model,
    conclusion: Conclusion,
    samples: usize,
    seed: u64,
) -> Result<Option<ConverseWitness<f64>>> {
    let relevant: Vec<TheoremClause> = clauses()
        .into_iter()
        .filter(|c| c.model == model && c.conclusion == conclusion)
        .filter(|c| !(conclusion == Conclusion::NoConfounding && c.conditions.contains(H1)))
        .collect();

    for i in 0..samples as u64 {
        let mut rng = sample_rng(seed, i);
        let base = ModelParams::<f64>::sample(model, &mut rng);
        let Some(params) = project(&base, conclusion)? else {
            continue;
        };
        let joint = params.to_joint()?;
        if conclusion.violation(&joint)? > CONVERSE_TOL {
            continue;
        }
        let covered = relevant.iter().any(|c| {
            c.conditions
                .iter()
                .all(|h| holds_numeric(&joint, h, &CONVERSE_TOL).unwrap_or(false))
        });
        if !covered {
            return Ok(Some(ConverseWitness { params, draw: i }));
        }
    }
    Ok(None)
}

fn project<T: Scalar>(base: &ModelParams<T>, conclusion: Conclusion) -> Result<Option<ModelParams<T>>> {
    let free = match conclusion {
        Conclusion::NoConfounding => Param::U1,
        Conclusion::IrrelevantFactor => Param::B1,
    };
    let residual = |p: &ModelParams<T>| -> Result<T> {
        let j = p.to_joint()?;
        Ok(match conclusion {
            Conclusion::NoConfounding => confounding_bias(&j)?,
            Conclusion::IrrelevantFactor => standardized_proportion(&j)? - observed_proportion(&j)?,
        })
    };
    let mut lo = base.clone();
    *lo.get_mut(free).unwrap() = zero();
    let mut hi = base.clone();
    *hi.get_mut(free).unwrap() = one();
    let alpha = residual(&lo)?;
    let beta = residual(&hi)? - alpha.clone();
    if beta.is_zero() {
        return Ok(Some(base.clone()));
    }
    let value = -alpha / beta;
    if value < zero() || value > one() {
        return Ok(None);
    }
    *lo.get_mut(free).unwrap() = value;
    Ok(Some(lo))
}
