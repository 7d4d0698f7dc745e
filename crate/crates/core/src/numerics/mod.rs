//! Numerical building blocks: quadrature, root finding, simplex search and a
//! few statistics helpers.

pub mod quadrature;
pub mod roots;
pub mod simplex;
pub mod stats;

pub use quadrature::{integrate, integrate_scalar, Tolerance};
