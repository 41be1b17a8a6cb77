//! Convergence analysis for series whose terms are generated by iterating a
//! defining function, `sum_{n>=0} f^n(x0)`.
//!
//! The pipeline parses `f`, iterates its orbit at extended precision, probes
//! the behavior of `f` near the origin and applies one convergence criterion
//! after another until one of them is decisive. Every verdict names the rule
//! that fired together with its numeric witnesses.

pub mod classify;
pub mod cli;
pub mod estimate;
pub mod expr;
pub mod grid;
pub mod orbit;
pub mod precision;

pub use expr::{FunctionDef, TaylorDef};
pub use orbit::{Mode, Orbit, OrbitConfig, OrbitStatus};
pub use precision::Precision;
