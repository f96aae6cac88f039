//! Parameter-level formulas for each model.
//!
//! These never touch a [`JointDistribution`](crate::joint::JointDistribution);
//! they are the algebraic route that the joint-based measures are checked
//! against, and the residuals that constrained sampling solves.

use crate::error::{Error, Result};
use crate::joint::ModelParams;
use crate::scalar::{complement, Scalar};

fn ratio<T: Scalar>(numer: T, denom: T, what: &str) -> Result<T> {
    if denom.is_zero() {
        return Err(Error::ZeroProbability { event: what.to_string() });
    }
    Ok(numer / denom)
}

/// `P(D_ebar=1 | E=e)`, the hypothetical risk of the exposed.
pub fn hypothetical<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let r = params.response();
    match params {
        ModelParams::Model1(p) => {
            let w0 = p.a0.clone() * complement(&p.t);
            let w1 = p.a1.clone() * p.t.clone();
            ratio(
                r.u0.clone() * w0.clone() + r.u1.clone() * w1.clone(),
                w0 + w1,
                "E=e",
            )
        }
        ModelParams::Model2(p) => {
            Ok(r.u0.clone() * complement(&p.c1) + r.u1.clone() * p.c1.clone())
        }
        ModelParams::Model3(p) => {
            Ok(r.u0.clone() * complement(&p.t) + r.u1.clone() * p.t.clone())
        }
    }
}

/// `P(D_ebar=1 | E=ebar)`, the observed risk of the unexposed.
pub fn observed<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let r = params.response();
    match params {
        ModelParams::Model1(p) => {
            let w0 = complement(&p.a0) * complement(&p.t);
            let w1 = complement(&p.a1) * p.t.clone();
            ratio(
                r.b0.clone() * w0.clone() + r.b1.clone() * w1.clone(),
                w0 + w1,
                "E=ebar",
            )
        }
        ModelParams::Model2(p) => {
            Ok(r.b0.clone() * complement(&p.c0) + r.b1.clone() * p.c0.clone())
        }
        ModelParams::Model3(p) => {
            Ok(r.b0.clone() * complement(&p.t) + r.b1.clone() * p.t.clone())
        }
    }
}

/// Unexposed risk re-weighted by the exposed covariate distribution.
pub fn standardized<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let r = params.response();
    match params {
        ModelParams::Model1(p) => {
            let w0 = p.a0.clone() * complement(&p.t);
            let w1 = p.a1.clone() * p.t.clone();
            ratio(
                r.b0.clone() * w0.clone() + r.b1.clone() * w1.clone(),
                w0 + w1,
                "E=e",
            )
        }
        ModelParams::Model2(p) => {
            Ok(r.b0.clone() * complement(&p.c1) + r.b1.clone() * p.c1.clone())
        }
        ModelParams::Model3(p) => {
            Ok(r.b0.clone() * complement(&p.t) + r.b1.clone() * p.t.clone())
        }
    }
}

pub fn bias<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    Ok(hypothetical(params)? - observed(params)?)
}

/// `P(D_ebar=1 | C=k)`.
pub fn risk_given_covariate<T: Scalar>(params: &ModelParams<T>, stratum: u8) -> Result<T> {
    let r = params.response();
    let (b, u) = if stratum == 0 {
        (&r.b0, &r.u0)
    } else {
        (&r.b1, &r.u1)
    };
    match params {
        ModelParams::Model1(p) => {
            let a = if stratum == 0 { &p.a0 } else { &p.a1 };
            Ok(u.clone() * a.clone() + b.clone() * complement(a))
        }
        ModelParams::Model2(p) => {
            // P(C=k | E=x) P(E=x), summed over x, normalizes the mixture.
            let level = |c: &T| if stratum == 1 { c.clone() } else { complement(c) };
            let we = level(&p.c1) * p.a.clone();
            let wu = level(&p.c0) * complement(&p.a);
            ratio(
                u.clone() * we.clone() + b.clone() * wu.clone(),
                we + wu,
                if stratum == 0 { "C=0" } else { "C=1" },
            )
        }
        ModelParams::Model3(p) => Ok(u.clone() * p.a.clone() + b.clone() * complement(&p.a)),
    }
}

/// `(b0 - b1)(a0 - a1)`, the factor whose vanishing makes the covariate
/// irrelevant in model 1 (and `(b1 - b0)(c1 - c0)` in model 2).
pub fn irrelevance_factor<T: Scalar>(params: &ModelParams<T>) -> T {
    let r = params.response();
    match params {
        ModelParams::Model1(p) => (r.b0.clone() - r.b1.clone()) * (p.a0.clone() - p.a1.clone()),
        ModelParams::Model2(p) => (r.b1.clone() - r.b0.clone()) * (p.c1.clone() - p.c0.clone()),
        ModelParams::Model3(_) => T::zero(),
    }
}
