//! Asymptotic operators, their spectra and winding numbers, and every
//! per-orbit quantity built from them.

mod flow;
mod omega;
mod operator;
mod orbit;
mod spectrum;

pub use flow::crossing_index;
pub use omega::{delta_mb, omega_pair, omega_self, q_tilde, side_of};
pub use operator::{AsymptoticOperator, MIN_SAMPLES};
pub use orbit::{
    CzMethod, DeclaredWindings, Extremal, OrbitCatalog, OrbitClass, OrbitKind, Perturbation, Relation, Side,
    DEFAULT_TRUNCATION,
};
pub use spectrum::{discretized_spectrum, zero_profile, Eigenpair, SpectralData, ZeroProfile, MIN_TRUNCATION};
