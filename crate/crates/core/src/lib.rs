//! Constructive machinery for universal inner functions on the polydisk:
//! automorphism algebra, composition operators on the ball of `H^∞(𝔻ⁿ)`,
//! inner-function diagnostics, Schur projection onto finite Blaschke
//! products, and a staged engine building a finite product `x = ∏ x_j` whose
//! orbit under an automorphism sequence approximates prescribed targets.

pub mod automorphisms;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod holo;
pub mod inner_tools;

pub use error::{Error, Result};
pub use geometry::{CPoint, COMetric, CompactProbe, TorusPoint};
pub use holo::{CompositionOperator, Expr, HoloFunction};

/// Library version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
