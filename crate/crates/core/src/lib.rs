//! Confounding analysis for three-binary-variable counterfactual models.
//!
//! The crate represents the joint over exposure `E`, covariate `C` and the
//! unexposed potential outcome `D_ebar`, computes the confounding bias and
//! the covariate-standardized proportion, classifies `C` as a confounder,
//! an irrelevant factor, or neither, and checks sufficient conditions for
//! each conclusion by constrained sampling.
//!
//! ```
//! use confound_kit::{measures::Verdict, strata_tables};
//!
//! let report = strata_tables::analyze_counts(&strata_tables::table1()).unwrap();
//! assert_eq!(report.verdict, Verdict::Neither);
//! ```

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod hypotheses;
pub mod joint;
pub mod measures;
pub mod scalar;
pub mod strata_tables;
pub mod theorems;

pub use error::{Error, Result};
pub use hypotheses::{Hypothesis, HypothesisSet};
pub use joint::{Exposure, JointDistribution, Model, ModelParams};
pub use measures::{ClassificationReport, Verdict};
pub use scalar::{Rational, Scalar};
