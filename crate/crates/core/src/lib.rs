//! Exact analysis of Boolean functions of small total influence.
//!
//! Truth tables are bit-packed with coordinate 1 as the least-significant
//! index bit. Measures, influences and approximation errors are exact
//! dyadic rationals; floating point appears only in logarithmic bounds and
//! in the sampling estimators.

pub mod approx;
pub mod dnf;
pub mod dyadic;
pub mod error;
pub mod fourier;
pub mod function;
pub mod generators;
pub mod influence;
pub mod real;
pub mod sampling;
pub mod shifting;
pub mod spec;
pub mod sweep;

pub use approx::{
    approximate, best_dnf_oracle, best_subcube, ApproxResult, BudgetPolicy, SplitRule,
};
pub use dnf::{dnf_error, Dnf, Term};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use function::BooleanFunction;
pub use influence::{report, InfluenceReport};
pub use shifting::{compress_pipeline, shift, ShiftSpec};
pub use spec::FunctionSpec;
