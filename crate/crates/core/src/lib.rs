//! Numerics for Baker-type entire functions with multiply connected
//! wandering domains.

/// Library version recorded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod classify;
pub mod critical;
pub mod error;
pub mod evaluator;
pub mod families;
pub mod geometry;
pub mod logspace;
pub mod render;
pub mod verify;

pub use classify::{classify, Classification, ClassifyInput, Clustering, Connectivity, UniformPerfectness};
pub use critical::{critical_value_ratio, locate, locate_thm2, locate_thm4, CriticalPoint};
pub use error::{Error, Result};
pub use evaluator::{
    circle_extrema, eval_f, eval_logderiv, zero_count, CircleExtrema, CircleRadius, EvalConfig,
    FValue, ScaledPoint,
};
pub use families::{FamilyKind, FamilySpec, PRule, PhaseRule, ZeroEntry, ZeroSequence};
pub use logspace::LogComplex;
pub use verify::{
    find_epsilon, verify_baker1988, verify_ring_thm4, verify_thm2, Margin, RingVerification,
};
