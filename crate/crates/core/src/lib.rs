//! Index, winding and intersection calculus for punctured holomorphic
//! curves in 4-dimensional symplectic cobordisms.

pub mod error;
pub mod halfint;
pub mod orbit_spectrum;
pub mod parallel;
pub mod rational;
pub mod surface_model;
pub mod zero_count;

pub use error::{Error, Result};
pub use halfint::Half;
pub use rational::Rational;
pub mod classification;
pub mod cover_calculus;
pub mod curve_invariants;
pub mod intersection_theory;
pub mod scenario;
