// Graph code indexes several parallel arrays by vertex or edge id.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod graphs;
pub mod lengths;
pub mod morphisms;
pub mod subgroups;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};
pub use lengths::{LengthStructure, Scalar};

/// Length structures with exact rational coordinates.
pub type ExactLengths = lengths::LengthStructure<num_rational::Rational64>;
/// Length structures with floating-point coordinates.
pub type FloatLengths = lengths::LengthStructure<f64>;
