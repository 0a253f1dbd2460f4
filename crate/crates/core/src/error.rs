use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncircleError {
    #[error("family CUSTOM requires a custom_matrix")]
    MissingCustomMatrix,

    #[error("eigenvectors requested at an exceptional point (|gap| = {gap:e})")]
    DegenerateAtEP { gap: f64 },

    #[error("eigenbasis is ill-conditioned (condition number {condition:e})")]
    IllConditionedBasis { condition: f64 },

    #[error("time {t} μs lies outside the loop period [0, {period}]")]
    OutOfRange { t: f64, period: f64 },

    #[error("invalid {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("integrator step size underflow at t = {t} μs")]
    StepSizeUnderflow { t: f64 },

    #[error("state norm underflow at t = {t} μs")]
    DecayUnderflow { t: f64 },

    #[error("loop passes through an exceptional point (min gap {min_gap:e})")]
    LoopThroughEP { min_gap: f64 },

    #[error("transported-frame coupling diverges at t = {t} μs (λ → 0)")]
    EPSingularity { t: f64 },

    #[error("Riccati amplitude blew up (|R| > 1e12) at t = {t} μs")]
    BlowUp { t: f64 },

    #[error("eigenvalue gap collapses on the loop (|gap| = {gap:e})")]
    GapCollapse { gap: f64 },

    #[error("effective transported-frame gap collapses (|gap| = {gap:e} at θ = {theta})")]
    EffectiveGapCollapse { gap: f64, theta: f64 },

    #[error("phase unwrapping did not converge within the refinement limit")]
    RefinementLimit,

    #[error("an exceptional point lies on the loop (distance {distance:e})")]
    EPOnPath { distance: f64 },

    #[error("final state is ambiguous (fidelities {f_alpha:.3}, {f_beta:.3})")]
    AmbiguousEndpoint { f_alpha: f64, f_beta: f64 },
}

pub type Result<T> = std::result::Result<T, EncircleError>;
