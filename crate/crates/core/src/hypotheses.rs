//! The seven ancillary conditional-independence hypotheses.
//!
//! Each hypothesis can be checked two ways: numerically on a joint, and
//! algebraically on a model's parameters. [`impose`] produces parameter sets
//! that satisfy a chosen set of hypotheses exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{Error, Result};
use crate::joint::{Event, Exposure, JointDistribution, Model, ModelParams, Param};
use crate::scalar::{one, zero, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    /// E ⊥ D_ebar
    H1,
    /// E ⊥ D_ebar | C=0
    H2,
    /// E ⊥ D_ebar | C=1
    H3,
    /// E ⊥ C
    H4,
    /// D_ebar ⊥ C
    H5,
    /// D_ebar ⊥ C | E=ebar
    H6,
    /// D_ebar ⊥ C | E=e
    H7,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 7] = [
        Hypothesis::H1,
        Hypothesis::H2,
        Hypothesis::H3,
        Hypothesis::H4,
        Hypothesis::H5,
        Hypothesis::H6,
        Hypothesis::H7,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H4 => "H4",
            Hypothesis::H5 => "H5",
            Hypothesis::H6 => "H6",
            Hypothesis::H7 => "H7",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Hypothesis::H1 => "E ⊥ D_ebar",
            Hypothesis::H2 => "E ⊥ D_ebar | C=0",
            Hypothesis::H3 => "E ⊥ D_ebar | C=1",
            Hypothesis::H4 => "E ⊥ C",
            Hypothesis::H5 => "D_ebar ⊥ C",
            Hypothesis::H6 => "D_ebar ⊥ C | E=ebar",
            Hypothesis::H7 => "D_ebar ⊥ C | E=e",
        }
    }

    /// Parameter pair made equal by this hypothesis, if it is a plain equality.
    /// The second element is the source whose value is kept.
    fn equality(self, model: Model) -> Option<(Param, Param)> {
        match (self, model) {
            (Hypothesis::H2, _) => Some((Param::U0, Param::B0)),
            (Hypothesis::H3, _) => Some((Param::U1, Param::B1)),
            (Hypothesis::H4, Model::CovariateDrivesExposure) => Some((Param::A0, Param::A1)),
            (Hypothesis::H4, Model::ExposureDrivesCovariate) => Some((Param::C0, Param::C1)),
            (Hypothesis::H6, _) => Some((Param::B1, Param::B0)),
            (Hypothesis::H7, _) => Some((Param::U1, Param::U0)),
            _ => None,
        }
    }

    /// Response parameters to solve for, most preferred first.
    fn solve_preference(self) -> Option<[Param; 4]> {
        match self {
            Hypothesis::H1 => Some([Param::U1, Param::U0, Param::B1, Param::B0]),
            Hypothesis::H5 => Some([Param::U0, Param::U1, Param::B0, Param::B1]),
            _ => None,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Hypothesis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        Hypothesis::ALL
            .into_iter()
            .find(|h| h.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown hypothesis `{s}` (expected H1..H7)"))
    }
}

/// A set of hypotheses, iterated in H1..H7 order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HypothesisSet(BTreeSet<Hypothesis>);

impl HypothesisSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, h: Hypothesis) -> bool {
        self.0.contains(&h)
    }

    pub fn insert(&mut self, h: Hypothesis) -> bool {
        self.0.insert(h)
    }

    pub fn iter(&self) -> impl Iterator<Item = Hypothesis> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<const N: usize> From<[Hypothesis; N]> for HypothesisSet {
    fn from(hs: [Hypothesis; N]) -> Self {
        HypothesisSet(hs.into_iter().collect())
    }
}

impl FromIterator<Hypothesis> for HypothesisSet {
    fn from_iter<I: IntoIterator<Item = Hypothesis>>(iter: I) -> Self {
        HypothesisSet(iter.into_iter().collect())
    }
}

impl fmt::Display for HypothesisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.iter().map(Hypothesis::id).collect();
        write!(f, "{{{}}}", ids.join(", "))
    }
}

impl FromStr for HypothesisSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Hypothesis::from_str)
            .collect()
    }
}

fn diff<T: Scalar>(
    joint: &JointDistribution<T>,
    event: Event,
    left: Event,
    right: Event,
) -> Result<T> {
    Ok(joint.conditional_prob(&event, &left)? - joint.conditional_prob(&event, &right)?)
}

/// Signed gap between the two conditionals whose equality is `h`.
pub fn numeric_residual<T: Scalar>(joint: &JointDistribution<T>, h: Hypothesis) -> Result<T> {
    let sick = Event::any().outcome(1);
    let e = Event::any().exposure(Exposure::Exposed);
    let ebar = Event::any().exposure(Exposure::Unexposed);
    let c0 = Event::any().covariate(0);
    let c1 = Event::any().covariate(1);
    match h {
        Hypothesis::H1 => diff(joint, sick, e, ebar),
        Hypothesis::H2 => diff(joint, sick, e.covariate(0), ebar.covariate(0)),
        Hypothesis::H3 => diff(joint, sick, e.covariate(1), ebar.covariate(1)),
        Hypothesis::H4 => diff(joint, c1, e, ebar),
        Hypothesis::H5 => diff(joint, sick, c0, c1),
        Hypothesis::H6 => diff(joint, sick, ebar.covariate(0), ebar.covariate(1)),
        Hypothesis::H7 => diff(joint, sick, e.covariate(0), e.covariate(1)),
    }
}

/// Checks `h` on a joint. A zero-probability conditioning event is an
/// error, not `false`.
pub fn holds_numeric<T: Scalar>(joint: &JointDistribution<T>, h: Hypothesis, tol: &T) -> Result<bool> {
    Ok(numeric_residual(joint, h)?.abs() <= *tol)
}

/// Signed residual of the model's parameter equation for `h`.
pub fn algebraic_residual<T: Scalar>(params: &ModelParams<T>, h: Hypothesis) -> Result<T> {
    let r = params.response();
    Ok(match h {
        Hypothesis::H1 => closed_form::bias(params)?,
        Hypothesis::H2 => r.u0.clone() - r.b0.clone(),
        Hypothesis::H3 => r.u1.clone() - r.b1.clone(),
        Hypothesis::H4 => match params {
            ModelParams::Model1(p) => p.a0.clone() - p.a1.clone(),
            ModelParams::Model2(p) => p.c1.clone() - p.c0.clone(),
            ModelParams::Model3(_) => zero(),
        },
        Hypothesis::H5 => {
            closed_form::risk_given_covariate(params, 0)?
                - closed_form::risk_given_covariate(params, 1)?
        }
        Hypothesis::H6 => r.b0.clone() - r.b1.clone(),
        Hypothesis::H7 => r.u0.clone() - r.u1.clone(),
    })
}

pub fn holds_algebraic<T: Scalar>(params: &ModelParams<T>, h: Hypothesis, tol: &T) -> Result<bool> {
    params.validate()?;
    Ok(algebraic_residual(params, h)?.abs() <= *tol)
}

/// Redraws allowed when a solved parameter leaves [0, 1].
pub const RESAMPLE_BUDGET: usize = 1000;

/// Returns parameters satisfying every member of `hs` exactly.
///
/// Equalities are applied by substitution. `H1` is solved for `u1` and
/// `H5` for `u0` (falling back to another response parameter when the
/// designated one is tied by an equality or has no influence). When the
/// solution leaves [0, 1] a fresh base is drawn from `rng`.
pub fn impose<T: Scalar, R: Rng + ?Sized>(
    base: &ModelParams<T>,
    hs: &HypothesisSet,
    rng: &mut R,
) -> Result<ModelParams<T>> {
    impose_with_budget(base, hs, rng, RESAMPLE_BUDGET)
}

pub fn impose_with_budget<T: Scalar, R: Rng + ?Sized>(
    base: &ModelParams<T>,
    hs: &HypothesisSet,
    rng: &mut R,
    budget: usize,
) -> Result<ModelParams<T>> {
    base.validate()?;
    let mut candidate = base.clone();
    for attempt in 0..=budget {
        if attempt > 0 {
            candidate = ModelParams::sample(base.model(), rng);
        }
        if let Some(done) = apply(&candidate, hs)? {
            return Ok(done);
        }
    }
    let hypothesis = hs
        .iter()
        .find(|h| h.solve_preference().is_some())
        .expect("only equational constraints can leave the unit interval");
    Err(Error::BudgetExhausted { hypothesis, budget })
}

/// Union-find over parameter names; each class resolves to its source value.
struct Classes {
    members: Vec<Vec<Param>>,
}

impl Classes {
    fn new(params: &[Param]) -> Self {
        Classes {
            members: params.iter().map(|p| vec![*p]).collect(),
        }
    }

    fn find(&self, p: Param) -> usize {
        self.members
            .iter()
            .position(|m| m.contains(&p))
            .expect("parameter belongs to the model")
    }

    /// Merges the class of `target` into the class of `source`.
    fn union(&mut self, target: Param, source: Param) {
        let (t, s) = (self.find(target), self.find(source));
        if t == s {
            return;
        }
        let moved = std::mem::take(&mut self.members[t]);
        self.members[s].extend(moved);
        self.members.retain(|m| !m.is_empty());
    }
}

/// Fixed priority for which member's value a merged class keeps.
fn source_rank(p: Param) -> usize {
    [
        Param::B0,
        Param::B1,
        Param::U0,
        Param::U1,
        Param::A1,
        Param::A0,
        Param::C1,
        Param::C0,
        Param::A,
        Param::T,
    ]
    .iter()
    .position(|q| *q == p)
    .unwrap_or(usize::MAX)
}

fn set_class<T: Scalar>(params: &mut ModelParams<T>, class: &[Param], value: &T) {
    for p in class {
        *params.get_mut(*p).expect("model parameter") = value.clone();
    }
}

fn in_unit<T: Scalar>(v: &T) -> bool {
    *v >= zero() && *v <= one()
}

/// One imposition attempt: `Ok(None)` means a solved value left [0, 1].
fn apply<T: Scalar>(base: &ModelParams<T>, hs: &HypothesisSet) -> Result<Option<ModelParams<T>>> {
    let model = base.model();
    let mut classes = Classes::new(&model.params());
    for h in hs.iter() {
        if let Some((target, source)) = h.equality(model) {
            classes.union(target, source);
        }
    }

    let mut out = base.clone();
    for class in &classes.members {
        if class.len() < 2 {
            continue;
        }
        let source = *class.iter().min_by_key(|p| source_rank(**p)).unwrap();
        let value = base.get(source).expect("model parameter").clone();
        set_class(&mut out, class, &value);
    }

    let equations: Vec<Hypothesis> = hs.iter().filter(|h| h.solve_preference().is_some()).collect();
    if equations.is_empty() {
        return Ok(Some(out));
    }

    // Residuals are affine in the response parameters once the structural
    // parameters are fixed, so coefficients come from finite evaluation.
    let residuals = |p: &ModelParams<T>| -> Result<Vec<T>> {
        equations.iter().map(|h| algebraic_residual(p, *h)).collect()
    };

    let choices: Vec<Vec<usize>> = equations
        .iter()
        .map(|h| {
            let mut seen = Vec::new();
            for p in h.solve_preference().unwrap() {
                let c = classes.find(p);
                if !seen.contains(&c) {
                    seen.push(c);
                }
            }
            seen
        })
        .collect();

    for unknowns in unknown_combinations(&choices) {
        let mut at_zero = out.clone();
        for &c in &unknowns {
            set_class(&mut at_zero, &classes.members[c], &zero());
        }
        let constant = residuals(&at_zero)?;
        let mut matrix = Vec::with_capacity(unknowns.len());
        for &c in &unknowns {
            let mut probe = at_zero.clone();
            set_class(&mut probe, &classes.members[c], &one());
            let shifted = residuals(&probe)?;
            matrix.push(
                shifted
                    .into_iter()
                    .zip(&constant)
                    .map(|(s, k)| s - k.clone())
                    .collect::<Vec<T>>(),
            );
        }
        // matrix[j][i] = coefficient of unknown j in equation i
        let Some(solution) = solve_linear(&matrix, &constant) else {
            continue;
        };
        let mut solved = at_zero;
        for (c, v) in unknowns.iter().zip(&solution) {
            if !in_unit(v) {
                return Ok(None);
            }
            set_class(&mut solved, &classes.members[*c], v);
        }
        return Ok(Some(solved));
    }

    if residuals(&out)?.iter().all(|r| r.is_zero()) {
        return Ok(Some(out));
    }
    Err(Error::Unsatisfiable(format!(
        "{hs} leaves no free response parameter for {}",
        equations.iter().map(|h| h.id()).collect::<Vec<_>>().join(", ")
    )))
}

/// Distinct-class assignments of one unknown per equation, in preference order.
fn unknown_combinations(choices: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::new();
        for partial in &out {
            for &c in options {
                if !partial.contains(&c) {
                    let mut p = partial.clone();
                    p.push(c);
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

/// Solves `sum_j x_j * cols[j][i] = -constant[i]` for at most two unknowns.
fn solve_linear<T: Scalar>(cols: &[Vec<T>], constant: &[T]) -> Option<Vec<T>> {
    match cols.len() {
        1 => {
            let a = &cols[0][0];
            if a.is_zero() {
                return None;
            }
            Some(vec![-constant[0].clone() / a.clone()])
        }
        2 => {
            let (a, b) = (&cols[0][0], &cols[1][0]);
            let (c, d) = (&cols[0][1], &cols[1][1]);
            let det = a.clone() * d.clone() - b.clone() * c.clone();
            if det.is_zero() {
                return None;
            }
            let (r0, r1) = (-constant[0].clone(), -constant[1].clone());
            let x = (r0.clone() * d.clone() - b.clone() * r1.clone()) / det.clone();
            let y = (a.clone() * r1 - c.clone() * r0) / det;
            Some(vec![x, y])
        }
        _ => None,
    }
}
