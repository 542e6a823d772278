//! Explicit a-priori bounds for the nonlinear radiation-type elliptic problem
//!
//! `-∇·(A∇u) = f - ∇·f⃗` in Ω, `(A∇u - f⃗)·n + b(u) = h` on Γ,
//! `(A∇u - f⃗)·n = g` on Γ_N,
//!
//! together with a P1 finite-element harness that checks each bound on
//! concrete instances.

pub mod bounds;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod model;
pub mod solver;

pub use bounds::{evaluate, reevaluate, BoundReport, Operation};
pub use constants::{ConstantError, EmbeddingConstants};
pub use error::{Error, Result};
pub use experiments::{Instance, VerificationRecord};
pub use model::{
    check_regime, derive_exponents, CoefficientBounds, DataFn, DataNorms, ExponentSet, Exponents,
    GeometryMeasures, Proposition, ProblemSpec, RegimeReport,
};
