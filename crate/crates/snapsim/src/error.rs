use thiserror::Error;

/// Coarse error class used to pick process exit codes at the CLI boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad inputs or violated preconditions.
    Validation,
    /// The computation ran but its numerical integrity checks failed.
    Numerical,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation guard violated: {0}")]
    Truncation(String),

    #[error("norm drift {drift:.3e} exceeds {limit:.3e} in {context}")]
    NormDrift {
        context: &'static str,
        drift: f64,
        limit: f64,
    },

    #[error("trace drift {drift:.3e} exceeds {limit:.3e}; reduce the integrator step")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("phase step {step:.3} rad exceeds pi between waiting times; densify the time grid")]
    PhaseAliasing { step: f64 },

    #[error("fit contrast {contrast:.3e} below noise floor {floor:.3e}")]
    LowContrast { contrast: f64, floor: f64 },

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl SimError {
    pub fn class(&self) -> ErrorClass {
        match self {
            SimError::Domain(_)
            | SimError::DimensionMismatch { .. }
            | SimError::Truncation(_)
            | SimError::Underdetermined(_)
            | SimError::Io(_)
            | SimError::Config(_) => ErrorClass::Validation,
            SimError::NormDrift { .. }
            | SimError::TraceDrift { .. }
            | SimError::PhaseAliasing { .. }
            | SimError::LowContrast { .. }
            | SimError::OptimizationFailure(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
