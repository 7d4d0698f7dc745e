//! Bivariate extremal-dependence copula built from a generalized Pareto
//! radius and a Beta angle: `(A, B) = S (V1, V2)` with `S ~ GP(1, λ)` and
//! `(V1, V2) = (V, 1-V) / ‖(V, 1-V)‖`, `V ~ Beta(α, α)`.
//!
//! `λ > 0` gives asymptotic dependence, `λ <= 0` asymptotic independence;
//! both classes are covered by one parameter space.

pub mod dependence;
pub mod error;
pub mod inference;
pub mod model;
pub mod numerics;
pub mod sample;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{Copula, ModelParams, NormSpec, PseudoMargin};
pub use sample::{Provenance, UniformSample};
