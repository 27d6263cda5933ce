use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A log-modulus left the range of `f64`. Carries the first failing index
    /// when the overflow happened while generating a sequence.
    #[error("numeric overflow{}: {context}", index.map(|k| format!(" at index {k}")).unwrap_or_default())]
    Overflow {
        index: Option<usize>,
        context: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("point cannot be placed relative to any zero: {0}")]
    Rebase(String),

    #[error("evaluation point coincides with a zero (index {0})")]
    Pole(usize),

    #[error("argument-principle count unreliable (residual {residual:.3e}); increase samples")]
    CountUnreliable { residual: f64 },

    #[error("circle radius lies on the zero circle of index {0}")]
    RadiusOnZero(usize),

    #[error("Newton iteration did not converge at index {k} (last step {last_step:.3e})")]
    NoConvergence { k: usize, last_step: f64 },

    #[error("Newton iterate left the search annulus at index {0}")]
    LeftAnnulus(usize),

    #[error("bracket failed at index {k}: g(x) = {gx:.6e}, g(y) = {gy:.6e}")]
    BracketFailed { k: usize, gx: f64, gy: f64 },

    #[error("no critical point available for index {0}")]
    MissingCriticalPoint(usize),

    #[error("point outside the annulus domain: {0}")]
    OutOfDomain(String),

    #[error("invalid render spec: {0}")]
    SpecInvalid(String),

    #[error("index {0} outside the generated sequence")]
    IndexOutOfRange(usize),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Overflow { .. } => "overflow",
            Error::Validation(_) => "validation",
            Error::Rebase(_) => "rebase",
            Error::Pole(_) => "pole",
            Error::CountUnreliable { .. } => "count_unreliable",
            Error::RadiusOnZero(_) => "radius_on_zero",
            Error::NoConvergence { .. } => "no_convergence",
            Error::LeftAnnulus(_) => "left_annulus",
            Error::BracketFailed { .. } => "bracket_failed",
            Error::MissingCriticalPoint(_) => "missing_critical_point",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::SpecInvalid(_) => "spec_invalid",
            Error::IndexOutOfRange(_) => "index_out_of_range",
        }
    }

    /// Index the error refers to, when there is one.
    pub fn index(&self) -> Option<usize> {
        match self {
            Error::Overflow { index, .. } => *index,
            Error::Pole(k)
            | Error::RadiusOnZero(k)
            | Error::LeftAnnulus(k)
            | Error::MissingCriticalPoint(k)
            | Error::IndexOutOfRange(k)
            | Error::NoConvergence { k, .. }
            | Error::BracketFailed { k, .. } => Some(*k),
            _ => None,
        }
    }

    /// Input problems as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::SpecInvalid(_)
                | Error::OutOfDomain(_)
                | Error::IndexOutOfRange(_)
                | Error::MissingCriticalPoint(_)
        )
    }

    pub(crate) fn overflow(context: impl Into<String>) -> Self {
        Error::Overflow {
            index: None,
            context: context.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
