//! Model parameterizations and the exact joint over (E, C, D_ebar).
//!
//! The three structures are: covariate drives exposure (model 1), exposure
//! drives covariate (model 2), and exposure independent of covariate
//! (model 3). In every model both potential-outcome conditionals are stored:
//! `b_k = P(D_ebar=1 | E=ebar, C=k)` and `u_k = P(D_ebar=1 | E=e, C=k)`.
//! Complements are derived on demand.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complement, one, repr, zero, Encoded, Scalar};

/// Exposure level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exposure {
    #[serde(rename = "e")]
    Exposed,
    #[serde(rename = "ebar")]
    Unexposed,
}

impl Exposure {
    pub const BOTH: [Exposure; 2] = [Exposure::Exposed, Exposure::Unexposed];

    fn index(self) -> usize {
        match self {
            Exposure::Exposed => 0,
            Exposure::Unexposed => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Exposure::Exposed => "e",
            Exposure::Unexposed => "ebar",
        }
    }
}

impl fmt::Display for Exposure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which causal structure a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    /// C affects E and D; E affects D.
    #[serde(rename = "1")]
    CovariateDrivesExposure,
    /// E affects C and D; C affects D.
    #[serde(rename = "2")]
    ExposureDrivesCovariate,
    /// E and C independent; both affect D.
    #[serde(rename = "3")]
    Independent,
}

impl Model {
    pub const ALL: [Model; 3] = [
        Model::CovariateDrivesExposure,
        Model::ExposureDrivesCovariate,
        Model::Independent,
    ];

    pub fn number(self) -> u8 {
        match self {
            Model::CovariateDrivesExposure => 1,
            Model::ExposureDrivesCovariate => 2,
            Model::Independent => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Model> {
        Model::ALL.into_iter().find(|m| m.number() == n)
    }

    /// Structural (non-response) parameters of this model, in declaration order.
    pub fn structural_params(self) -> &'static [Param] {
        match self {
            Model::CovariateDrivesExposure => &[Param::T, Param::A0, Param::A1],
            Model::ExposureDrivesCovariate => &[Param::A, Param::C0, Param::C1],
            Model::Independent => &[Param::A, Param::T],
        }
    }

    pub fn params(self) -> Vec<Param> {
        let mut all = self.structural_params().to_vec();
        all.extend_from_slice(&Param::RESPONSE);
        all
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model {}", self.number())
    }
}

/// Named scalar parameter across all three parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    T,
    A0,
    A1,
    A,
    C0,
    C1,
    B0,
    B1,
    U0,
    U1,
}

impl Param {
    pub const RESPONSE: [Param; 4] = [Param::B0, Param::B1, Param::U0, Param::U1];

    pub fn name(self) -> &'static str {
        match self {
            Param::T => "t",
            Param::A0 => "a0",
            Param::A1 => "a1",
            Param::A => "a",
            Param::C0 => "c0",
            Param::C1 => "c1",
            Param::B0 => "b0",
            Param::B1 => "b1",
            Param::U0 => "u0",
            Param::U1 => "u1",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Potential-outcome conditionals shared by all three models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Response<T: Scalar> {
    #[serde(with = "repr")]
    pub b0: T,
    #[serde(with = "repr")]
    pub b1: T,
    #[serde(with = "repr")]
    pub u0: T,
    #[serde(with = "repr")]
    pub u1: T,
}

impl<T: Scalar> Response<T> {
    /// `P(D_ebar=1 | E=x, C=k)`.
    pub fn risk(&self, exposure: Exposure, stratum: u8) -> &T {
        match (exposure, stratum) {
            (Exposure::Unexposed, 0) => &self.b0,
            (Exposure::Unexposed, _) => &self.b1,
            (Exposure::Exposed, 0) => &self.u0,
            (Exposure::Exposed, _) => &self.u1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Model1Params<T: Scalar> {
    #[serde(with = "repr")]
    pub t: T,
    #[serde(with = "repr")]
    pub a0: T,
    #[serde(with = "repr")]
    pub a1: T,
    #[serde(flatten)]
    pub response: Response<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Model2Params<T: Scalar> {
    #[serde(with = "repr")]
    pub a: T,
    #[serde(with = "repr")]
    pub c0: T,
    #[serde(with = "repr")]
    pub c1: T,
    #[serde(flatten)]
    pub response: Response<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Model3Params<T: Scalar> {
    #[serde(with = "repr")]
    pub a: T,
    #[serde(with = "repr")]
    pub t: T,
    #[serde(flatten)]
    pub response: Response<T>,
}

/// A parameter set for one of the three models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", bound = "")]
pub enum ModelParams<T: Scalar> {
    #[serde(rename = "1")]
    Model1(Model1Params<T>),
    #[serde(rename = "2")]
    Model2(Model2Params<T>),
    #[serde(rename = "3")]
    Model3(Model3Params<T>),
}

impl<T: Scalar> ModelParams<T> {
    pub fn model(&self) -> Model {
        match self {
            ModelParams::Model1(_) => Model::CovariateDrivesExposure,
            ModelParams::Model2(_) => Model::ExposureDrivesCovariate,
            ModelParams::Model3(_) => Model::Independent,
        }
    }

    pub fn response(&self) -> &Response<T> {
        match self {
            ModelParams::Model1(p) => &p.response,
            ModelParams::Model2(p) => &p.response,
            ModelParams::Model3(p) => &p.response,
        }
    }

    /// Looks up a parameter by name; `None` if the model has no such parameter.
    pub fn get(&self, param: Param) -> Option<&T> {
        let r = self.response();
        match param {
            Param::B0 => return Some(&r.b0),
            Param::B1 => return Some(&r.b1),
            Param::U0 => return Some(&r.u0),
            Param::U1 => return Some(&r.u1),
            _ => {}
        }
        match (self, param) {
            (ModelParams::Model1(p), Param::T) => Some(&p.t),
            (ModelParams::Model1(p), Param::A0) => Some(&p.a0),
            (ModelParams::Model1(p), Param::A1) => Some(&p.a1),
            (ModelParams::Model2(p), Param::A) => Some(&p.a),
            (ModelParams::Model2(p), Param::C0) => Some(&p.c0),
            (ModelParams::Model2(p), Param::C1) => Some(&p.c1),
            (ModelParams::Model3(p), Param::A) => Some(&p.a),
            (ModelParams::Model3(p), Param::T) => Some(&p.t),
            _ => None,
        }
    }

    /// Mutable lookup; `None` if the model has no such parameter.
    pub fn get_mut(&mut self, param: Param) -> Option<&mut T> {
        let (structural, r): (Option<&mut T>, &mut Response<T>) = match self {
            ModelParams::Model1(p) => (
                match param {
                    Param::T => Some(&mut p.t),
                    Param::A0 => Some(&mut p.a0),
                    Param::A1 => Some(&mut p.a1),
                    _ => None,
                },
                &mut p.response,
            ),
            ModelParams::Model2(p) => (
                match param {
                    Param::A => Some(&mut p.a),
                    Param::C0 => Some(&mut p.c0),
                    Param::C1 => Some(&mut p.c1),
                    _ => None,
                },
                &mut p.response,
            ),
            ModelParams::Model3(p) => (
                match param {
                    Param::A => Some(&mut p.a),
                    Param::T => Some(&mut p.t),
                    _ => None,
                },
                &mut p.response,
            ),
        };
        match param {
            Param::B0 => Some(&mut r.b0),
            Param::B1 => Some(&mut r.b1),
            Param::U0 => Some(&mut r.u0),
            Param::U1 => Some(&mut r.u1),
            _ => structural,
        }
    }

    /// Builds a parameter set from a name lookup; every parameter of the
    /// model must be supplied.
    pub fn from_lookup(
        model: Model,
        mut lookup: impl FnMut(Param) -> Option<T>,
    ) -> std::result::Result<Self, Param> {
        let mut take = |p: Param| lookup(p).ok_or(p);
        let response = Response {
            b0: take(Param::B0)?,
            b1: take(Param::B1)?,
            u0: take(Param::U0)?,
            u1: take(Param::U1)?,
        };
        Ok(match model {
            Model::CovariateDrivesExposure => ModelParams::Model1(Model1Params {
                t: take(Param::T)?,
                a0: take(Param::A0)?,
                a1: take(Param::A1)?,
                response,
            }),
            Model::ExposureDrivesCovariate => ModelParams::Model2(Model2Params {
                a: take(Param::A)?,
                c0: take(Param::C0)?,
                c1: take(Param::C1)?,
                response,
            }),
            Model::Independent => ModelParams::Model3(Model3Params {
                a: take(Param::A)?,
                t: take(Param::T)?,
                response,
            }),
        })
    }

    /// Draws every parameter with [`Scalar::sample_interior`].
    pub fn sample<R: rand::Rng + ?Sized>(model: Model, rng: &mut R) -> Self {
        // Draw in a fixed order so seeds reproduce regardless of lookup order.
        let values: Vec<(Param, T)> = model
            .params()
            .into_iter()
            .map(|p| (p, T::sample_interior(rng)))
            .collect();
        Self::from_lookup(model, |p| {
            values.iter().find(|(q, _)| *q == p).map(|(_, v)| v.clone())
        })
        .expect("every model parameter was drawn")
    }

    /// Checks that every parameter lies in [0, 1].
    pub fn validate(&self) -> Result<()> {
        for p in self.model().params() {
            let v = self.get(p).expect("model parameter");
            if *v < zero() || *v > one() {
                return Err(Error::ParamOutOfRange {
                    name: p.name(),
                    value: format!("{v:?}"),
                });
            }
        }
        Ok(())
    }

    pub fn to_joint(&self) -> Result<JointDistribution<T>> {
        match self {
            ModelParams::Model1(p) => joint_from_model1(p),
            ModelParams::Model2(p) => joint_from_model2(p),
            ModelParams::Model3(p) => joint_from_model3(p),
        }
    }
}

/// An assignment of some of the three variables; `None` leaves a variable free.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Event {
    pub exposure: Option<Exposure>,
    pub covariate: Option<u8>,
    pub outcome: Option<u8>,
}

impl Event {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn exposure(mut self, x: Exposure) -> Self {
        self.exposure = Some(x);
        self
    }

    pub fn covariate(mut self, k: u8) -> Self {
        self.covariate = Some(k);
        self
    }

    pub fn outcome(mut self, d: u8) -> Self {
        self.outcome = Some(d);
        self
    }

    /// Conjunction; conflicting assignments yield `None` (the empty event).
    pub fn and(self, other: Event) -> Option<Event> {
        fn merge<V: PartialEq + Copy>(a: Option<V>, b: Option<V>) -> Option<Option<V>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => None,
                (x, y) => Some(x.or(y)),
            }
        }
        Some(Event {
            exposure: merge(self.exposure, other.exposure)?,
            covariate: merge(self.covariate, other.covariate)?,
            outcome: merge(self.outcome, other.outcome)?,
        })
    }

    fn matches(&self, x: Exposure, c: u8, d: u8) -> bool {
        self.exposure.is_none_or(|v| v == x)
            && self.covariate.is_none_or(|v| v == c)
            && self.outcome.is_none_or(|v| v == d)
    }

    fn check(&self) -> Result<()> {
        if self.covariate.is_some_and(|k| k > 1) || self.outcome.is_some_and(|d| d > 1) {
            return Err(Error::InvalidJoint(format!("non-binary assignment {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(x) = self.exposure {
            parts.push(format!("E={x}"));
        }
        if let Some(k) = self.covariate {
            parts.push(format!("C={k}"));
        }
        if let Some(d) = self.outcome {
            parts.push(format!("D_ebar={d}"));
        }
        if parts.is_empty() {
            f.write_str("(any)")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

/// Exact 8-cell joint over (E, C, D_ebar).
///
/// Cells are stored in canonical order: `(e,0,0) (e,0,1) (e,1,0) (e,1,1)`
/// and then the same four for `ebar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", into = "JointRepr", try_from = "JointRepr")]
pub struct JointDistribution<T: Scalar> {
    cells: [T; 8],
}

/// Float-mode normalization tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl<T: Scalar> JointDistribution<T> {
    pub fn new(cells: [T; 8]) -> Result<Self> {
        let mut total = zero::<T>();
        for (i, c) in cells.iter().enumerate() {
            if *c < zero() {
                return Err(Error::InvalidJoint(format!("cell {i} is negative")));
            }
            total = total + c.clone();
        }
        let normalized = if T::EXACT {
            total == one()
        } else {
            (total.to_f64() - 1.0).abs() <= NORMALIZATION_TOL
        };
        if !normalized {
            return Err(Error::InvalidJoint(format!(
                "weights sum to {}, not 1",
                total.to_f64()
            )));
        }
        Ok(Self { cells })
    }

    /// Canonical index of cell `(x, c, d)`.
    pub fn index(x: Exposure, c: u8, d: u8) -> usize {
        x.index() * 4 + (c as usize) * 2 + d as usize
    }

    pub fn cells(&self) -> &[T; 8] {
        &self.cells
    }

    pub fn cell(&self, x: Exposure, c: u8, d: u8) -> &T {
        &self.cells[Self::index(x, c, d)]
    }

    /// Marginal probability of an event.
    pub fn prob(&self, event: &Event) -> T {
        let mut total = zero::<T>();
        for x in Exposure::BOTH {
            for c in 0..2u8 {
                for d in 0..2u8 {
                    if event.matches(x, c, d) {
                        total = total + self.cell(x, c, d).clone();
                    }
                }
            }
        }
        total
    }

    /// `P(event | given)`; conditioning on a null event is an error.
    pub fn conditional_prob(&self, event: &Event, given: &Event) -> Result<T> {
        event.check()?;
        given.check()?;
        let denom = self.prob(given);
        if denom.is_zero() {
            return Err(Error::ZeroProbability {
                event: given.to_string(),
            });
        }
        let numer = match event.and(*given) {
            Some(joint) => self.prob(&joint),
            None => zero(),
        };
        Ok(numer / denom)
    }

    /// Joint with the covariate labels 0 and 1 swapped.
    pub fn swap_covariate(&self) -> Self {
        let cells = std::array::from_fn(|i| {
            let x = if i < 4 { Exposure::Exposed } else { Exposure::Unexposed };
            let c = ((i / 2) % 2) as u8;
            let d = (i % 2) as u8;
            self.cell(x, 1 - c, d).clone()
        });
        Self { cells }
    }

    pub fn to_f64(&self) -> JointDistribution<f64> {
        JointDistribution {
            cells: std::array::from_fn(|i| self.cells[i].to_f64()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRepr {
    cells: Vec<Encoded>,
}

impl<T: Scalar> From<JointDistribution<T>> for JointRepr {
    fn from(j: JointDistribution<T>) -> Self {
        JointRepr {
            cells: j.cells.iter().map(Scalar::encode).collect(),
        }
    }
}

impl<T: Scalar> TryFrom<JointRepr> for JointDistribution<T> {
    type Error = String;

    fn try_from(r: JointRepr) -> std::result::Result<Self, String> {
        if r.cells.len() != 8 {
            return Err(format!("expected 8 cells, found {}", r.cells.len()));
        }
        let values = r
            .cells
            .into_iter()
            .map(T::decode)
            .collect::<std::result::Result<Vec<T>, String>>()?;
        let cells: [T; 8] = values.try_into().map_err(|_| "cell count".to_string())?;
        JointDistribution::new(cells).map_err(|e| e.to_string())
    }
}

/// Builds the joint from a factorization `P(E) P(C | E) P(D | E, C)` given
/// as closures over exposure and stratum.
fn assemble<T: Scalar>(
    exposure_and_stratum: impl Fn(Exposure, u8) -> T,
    response: &Response<T>,
) -> Result<JointDistribution<T>> {
    let cells = std::array::from_fn(|i| {
        let x = if i < 4 { Exposure::Exposed } else { Exposure::Unexposed };
        let c = ((i / 2) % 2) as u8;
        let d = (i % 2) as u8;
        let risk = response.risk(x, c).clone();
        let outcome = if d == 1 { risk } else { complement(&risk) };
        exposure_and_stratum(x, c) * outcome
    });
    JointDistribution::new(cells)
}

fn bernoulli<T: Scalar>(p: &T, level: u8) -> T {
    if level == 1 {
        p.clone()
    } else {
        complement(p)
    }
}

fn require_open_arm<T: Scalar>(p_exposed: &T) -> Result<()> {
    if p_exposed.is_zero() {
        return Err(Error::DegenerateExposure { arm: "e" });
    }
    if *p_exposed == one() {
        return Err(Error::DegenerateExposure { arm: "ebar" });
    }
    Ok(())
}

/// Covariate drives exposure: `P(C) P(E | C) P(D_ebar | E, C)`.
pub fn joint_from_model1<T: Scalar>(p: &Model1Params<T>) -> Result<JointDistribution<T>> {
    ModelParams::Model1(p.clone()).validate()?;
    let p_exposed =
        complement(&p.t) * p.a0.clone() + p.t.clone() * p.a1.clone();
    require_open_arm(&p_exposed)?;
    assemble(
        |x, c| {
            let a = if c == 0 { &p.a0 } else { &p.a1 };
            let pe = match x {
                Exposure::Exposed => a.clone(),
                Exposure::Unexposed => complement(a),
            };
            bernoulli(&p.t, c) * pe
        },
        &p.response,
    )
}

/// Exposure drives covariate: `P(E) P(C | E) P(D_ebar | E, C)`.
pub fn joint_from_model2<T: Scalar>(p: &Model2Params<T>) -> Result<JointDistribution<T>> {
    ModelParams::Model2(p.clone()).validate()?;
    require_open_arm(&p.a)?;
    assemble(
        |x, c| match x {
            Exposure::Exposed => p.a.clone() * bernoulli(&p.c1, c),
            Exposure::Unexposed => complement(&p.a) * bernoulli(&p.c0, c),
        },
        &p.response,
    )
}

/// Exposure independent of covariate: `P(E) P(C) P(D_ebar | E, C)`.
pub fn joint_from_model3<T: Scalar>(p: &Model3Params<T>) -> Result<JointDistribution<T>> {
    ModelParams::Model3(p.clone()).validate()?;
    require_open_arm(&p.a)?;
    assemble(
        |x, c| bernoulli(&p.t, c) * bernoulli(&p.a, if x == Exposure::Exposed { 1 } else { 0 }),
        &p.response,
    )
}
