//! Dynamical encircling of exceptional points in two-level PT- and
//! anti-PT-symmetric non-Hermitian systems.
//!
//! Rates (`Δ`, `J`, `γ`, `r`) are in μs⁻¹ and times in μs, with ħ = 1.
//! Laboratory figures quoted in MHz are used numerically as μs⁻¹.
//!
//! The pipeline is bottom-up:
//!
//! - [`linalg`]: complex 2-vectors, 2×2 matrices, closed-form exponential.
//! - [`model`]: Hamiltonian families, spectra, eigenbases, the EP.
//! - [`path`]: the (optionally noisy) encircling loop.
//! - [`evolve`]: Schrödinger propagation, eigen-decomposition, overlaps.
//! - [`transport`]: the parallel-transported frame and Riccati amplitudes.
//! - [`topology`]: spectral and dynamic vorticity.
//! - [`classify`]: chirality and reciprocity predictors and verdicts.

pub mod classify;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod path;
pub mod topology;
pub mod transport;

pub use error::{EncircleError, Result};
pub use linalg::{CMat2, CVec2, C64};
pub use model::{EigenPair, Family, HamiltonianSpec, Regime};
pub use path::{Direction, LoopSpec, PathPoint};
