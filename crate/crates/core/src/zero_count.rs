//! Winding numbers of sampled loops and the half-integer zero count of a
//! section with totally real boundary condition.

use crate::error::{Error, Result};
use crate::halfint::Half;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples below this modulus are treated as zeros.
pub const ZERO_TOL: f64 = 1e-9;

/// Nonzero complex samples at uniform times over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampledLoop {
    #[serde(with = "pairs")]
    pub values: Vec<Complex64>,
}

mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl SampledLoop {
    pub fn new(values: Vec<Complex64>) -> Self {
        SampledLoop { values }
    }

    /// Sample `f` at `n` uniform points of [0, 1).
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        SampledLoop { values: (0..n).map(|j| f(j as f64 / n as f64)).collect() }
    }
}

/// Why a winding could not be read off a set of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindingFailure {
    Empty,
    NearZero { index: usize },
    AmbiguousStep { index: usize, step: f64 },
}

/// Winding with an explicit modulus floor and maximal admissible step.
pub(crate) fn winding_with(
    values: &[Complex64],
    min_modulus: f64,
    max_step: f64,
) -> std::result::Result<i64, WindingFailure> {
    if values.is_empty() {
        return Err(WindingFailure::Empty);
    }
    if let Some(index) = values.iter().position(|z| z.norm() <= min_modulus) {
        return Err(WindingFailure::NearZero { index });
    }
    let n = values.len();
    let mut total = 0.0;
    for j in 0..n {
        // arg(b / a) is the wrapped increment, in (−π, π].
        let step = (values[(j + 1) % n] / values[j]).arg();
        if step.abs() >= max_step {
            return Err(WindingFailure::AmbiguousStep { index: j, step });
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Total change of argument over one period, divided by 2π.
pub fn loop_winding(l: &SampledLoop) -> Result<i64> {
    winding_with(&l.values, ZERO_TOL, PI).map_err(|f| match f {
        WindingFailure::Empty => Error::Precondition("loop has no samples".into()),
        WindingFailure::NearZero { index } => {
            Error::Numerical(format!("sample {index} lies within {ZERO_TOL:e} of zero; the loop winding is undefined"))
        }
        WindingFailure::AmbiguousStep { index, step } => Error::Numerical(format!(
            "argument jumps by {step:.3} between samples {index} and {}; refine the sampling",
            index + 1
        )),
    })
}

/// Relative Chern number, boundary Maslov index and the winding of the
/// section along the free part of the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleData {
    pub c1: i64,
    #[serde(default)]
    pub maslov: i64,
    #[serde(default)]
    pub boundary_winding: i64,
}

/// Z(σ) = c₁ + μ/2 + wind.
pub fn zero_count(b: &BundleData) -> Half {
    Half::from_int(b.c1 + b.boundary_winding) + Half::from_doubled(b.maslov)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub doubled: BundleData,
    pub z: Half,
    pub z_doubled: Half,
    pub ok: bool,
}

/// Glue the bundle to its conjugate along the totally real part of the
/// boundary and compare zero counts: the double must count twice as many.
pub fn doubling_check(b: &BundleData) -> DoublingReport {
    let doubled = BundleData { c1: 2 * b.c1 + b.maslov, maslov: 0, boundary_winding: 2 * b.boundary_winding };
    let z = zero_count(b);
    let z_doubled = zero_count(&doubled);
    DoublingReport { doubled, z, z_doubled, ok: z_doubled == z * 2 }
}
