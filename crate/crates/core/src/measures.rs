//! Confounding bias, standardized proportion and covariate classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::{Event, Exposure, JointDistribution};
use crate::scalar::{repr, zero, Scalar};

/// Default tolerance for float-mode classification.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// Adjustment leaves the unexposed risk unchanged.
    Irrelevant,
    /// Adjustment strictly shrinks the gap to the hypothetical risk.
    Confounder,
    Neither,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Irrelevant => "Irrelevant",
            Verdict::Confounder => "Confounder",
            Verdict::Neither => "Neither",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct ClassificationReport<T: Scalar> {
    /// `P(D_ebar=1 | E=e)`.
    #[serde(with = "repr")]
    pub hypothetical: T,
    /// `P(D_ebar=1 | E=ebar)`.
    #[serde(with = "repr")]
    pub observed: T,
    #[serde(with = "repr")]
    pub standardized: T,
    /// Signed: `hypothetical - observed`.
    #[serde(with = "repr")]
    pub bias: T,
    /// `|hypothetical - standardized|`.
    #[serde(with = "repr")]
    pub adjusted_gap: T,
    pub verdict: Verdict,
}

impl<T: Scalar> ClassificationReport<T> {
    /// Fixed-width text table.
    pub fn render_table(&self) -> String {
        let rows = [
            ("hypothetical P(D_ebar=1|E=e)", self.hypothetical.render()),
            ("observed P(D_ebar=1|E=ebar)", self.observed.render()),
            ("standardized P_adj(D_ebar=1|E=ebar)", self.standardized.render()),
            ("bias B", self.bias.render()),
            ("|B|", self.bias.abs().render()),
            ("adjusted gap", self.adjusted_gap.render()),
            ("verdict", self.verdict.to_string()),
        ];
        let mut out = String::new();
        for (name, value) in rows {
            out.push_str(&format!("{name:<38}{value:>24}\n"));
        }
        out
    }
}

fn sick() -> Event {
    Event::any().outcome(1)
}

fn arm(x: Exposure) -> Event {
    Event::any().exposure(x)
}

fn require_arms<T: Scalar>(joint: &JointDistribution<T>) -> Result<()> {
    for x in Exposure::BOTH {
        if joint.prob(&arm(x)).is_zero() {
            return Err(Error::DegenerateExposure { arm: x.label() });
        }
    }
    Ok(())
}

/// `sum_k P(D_ebar=1 | E=ebar, C=k) P(C=k | E=e)`.
pub fn standardized_proportion<T: Scalar>(joint: &JointDistribution<T>) -> Result<T> {
    require_arms(joint)?;
    let mut total = zero::<T>();
    for k in 0..2u8 {
        let weight = joint.conditional_prob(&Event::any().covariate(k), &arm(Exposure::Exposed))?;
        if weight.is_zero() {
            continue;
        }
        let stratum = arm(Exposure::Unexposed).covariate(k);
        if joint.prob(&stratum).is_zero() {
            return Err(Error::VanishedStratum { stratum: k });
        }
        total = total + joint.conditional_prob(&sick(), &stratum)? * weight;
    }
    Ok(total)
}

pub fn hypothetical_proportion<T: Scalar>(joint: &JointDistribution<T>) -> Result<T> {
    require_arms(joint)?;
    joint.conditional_prob(&sick(), &arm(Exposure::Exposed))
}

pub fn observed_proportion<T: Scalar>(joint: &JointDistribution<T>) -> Result<T> {
    require_arms(joint)?;
    joint.conditional_prob(&sick(), &arm(Exposure::Unexposed))
}

/// Signed bias `P(D_ebar=1 | E=e) - P(D_ebar=1 | E=ebar)`.
pub fn confounding_bias<T: Scalar>(joint: &JointDistribution<T>) -> Result<T> {
    Ok(hypothetical_proportion(joint)? - observed_proportion(joint)?)
}

fn check_tol<T: Scalar>(tol: &T) -> Result<()> {
    if *tol < zero() {
        return Err(Error::InvalidTolerance(format!("{tol:?} is negative")));
    }
    if T::EXACT && !tol.is_zero() {
        return Err(Error::InexactTolerance);
    }
    Ok(())
}

struct Comparison<T: Scalar> {
    irrelevant: bool,
    confounder: bool,
    report: ClassificationReport<T>,
}

fn compare_proportions<T: Scalar>(
    hypothetical: T,
    observed: T,
    standardized: T,
    tol: &T,
) -> Result<Comparison<T>> {
    check_tol(tol)?;
    let bias = hypothetical.clone() - observed.clone();
    let adjusted_gap = (hypothetical.clone() - standardized.clone()).abs();
    let irrelevant = (standardized.clone() - observed.clone()).abs() <= *tol;
    let confounder = adjusted_gap < bias.abs() - tol.clone();
    let verdict = if irrelevant {
        Verdict::Irrelevant
    } else if confounder {
        Verdict::Confounder
    } else {
        Verdict::Neither
    };
    Ok(Comparison {
        irrelevant,
        confounder,
        report: ClassificationReport {
            hypothetical,
            observed,
            standardized,
            bias,
            adjusted_gap,
            verdict,
        },
    })
}

fn compare<T: Scalar>(joint: &JointDistribution<T>, tol: &T) -> Result<Comparison<T>> {
    check_tol(tol)?;
    compare_proportions(
        hypothetical_proportion(joint)?,
        observed_proportion(joint)?,
        standardized_proportion(joint)?,
        tol,
    )
}

/// Builds a report from the three proportions, however they were obtained.
pub fn report_from_proportions<T: Scalar>(
    hypothetical: T,
    observed: T,
    standardized: T,
    tol: &T,
) -> Result<ClassificationReport<T>> {
    Ok(compare_proportions(hypothetical, observed, standardized, tol)?.report)
}

/// Classifies the covariate. Irrelevance is tested first; for exact
/// arithmetic `tol` must be zero.
pub fn classify_covariate<T: Scalar>(
    joint: &JointDistribution<T>,
    tol: &T,
) -> Result<ClassificationReport<T>> {
    Ok(compare(joint, tol)?.report)
}

/// True unless the joint satisfies both the irrelevance and the confounder
/// inequality at once. Both predicates are evaluated independently of the
/// verdict precedence.
pub fn check_lemma1<T: Scalar>(joint: &JointDistribution<T>, tol: &T) -> Result<bool> {
    let cmp = compare(joint, tol)?;
    Ok(!(cmp.irrelevant && cmp.confounder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joint::{joint_from_model1, Model1Params, Response};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn example() -> JointDistribution<Rational> {
        joint_from_model1(&Model1Params {
            t: q(2, 5),
            a0: q(1, 5),
            a1: q(3, 5),
            response: Response { b0: q(1, 10), b1: q(7, 10), u0: q(3, 10), u1: q(9, 10) },
        })
        .unwrap()
    }

    #[test]
    fn model1_example_report() {
        let r = classify_covariate(&example(), &Rational::from_ratio(0, 1)).unwrap();
        assert_eq!(r.standardized, q(1, 2));
        assert_eq!(r.observed, q(1, 4));
        assert_eq!(r.hypothetical, q(7, 10));
        assert_eq!(r.bias, q(9, 20));
        assert_eq!(r.adjusted_gap, q(1, 5));
        // 0.2 < 0.45 by the strict inequality
        assert_eq!(r.verdict, Verdict::Confounder);
    }

    #[test]
    fn uniform_is_irrelevant() {
        let j = JointDistribution::new([0.125; 8]).unwrap();
        let r = classify_covariate(&j, &DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Irrelevant);
        assert_eq!(r.bias, 0.0);
        assert!(check_lemma1(&j, &DEFAULT_TOL).unwrap());
    }

    #[test]
    fn exact_mode_rejects_nonzero_tol() {
        let err = classify_covariate(&example(), &q(1, 1000)).unwrap_err();
        assert_eq!(err, Error::InexactTolerance);
        assert!(classify_covariate(&example().to_f64(), &-1.0).is_err());
    }

    #[test]
    fn vanished_stratum_reported() {
        // All unexposed mass sits in C=0, yet exposed individuals exist in C=1.
        let z = q(0, 1);
        let cells = [q(1, 8), q(1, 8), q(1, 8), q(1, 8), q(1, 4), q(1, 4), z.clone(), z];
        let j = JointDistribution::new(cells).unwrap();
        assert_eq!(
            standardized_proportion(&j).unwrap_err(),
            Error::VanishedStratum { stratum: 1 }
        );
    }

    #[test]
    fn degenerate_arm_reported() {
        let z = q(0, 1);
        let cells = [q(1, 4), q(1, 4), q(1, 4), q(1, 4), z.clone(), z.clone(), z.clone(), z];
        let j = JointDistribution::new(cells).unwrap();
        assert_eq!(
            confounding_bias(&j).unwrap_err(),
            Error::DegenerateExposure { arm: "ebar" }
        );
    }

    #[test]
    fn covariate_relabel_is_invariant() {
        let j = example();
        let a = classify_covariate(&j, &q(0, 1)).unwrap();
        let b = classify_covariate(&j.swap_covariate(), &q(0, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_json_has_six_fields() {
        let r = classify_covariate(&example(), &q(0, 1)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 6);
        assert_eq!(v["standardized"], "1/2");
        assert_eq!(v["verdict"], "Confounder");
        let back: ClassificationReport<Rational> = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
