//! Sampled asymptotic operators A = −J₀ d/dt − S(t) on the circle ℝ/ℤ.
//!
//! We identify ℝ² with ℂ so that J₀ is multiplication by i. A symmetric
//! matrix S then acts as `S z = a z + b z̄` with
//! `a = (s₁₁ + s₂₂)/2` (real) and `b = (s₁₁ − s₂₂)/2 + i s₁₂`. The loop S(t)
//! is the trigonometric interpolant of the samples.

use crate::error::{Error, Result};
use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MIN_SAMPLES: usize = 16;
const SYMMETRY_TOL: f64 = 1e-12;

/// A loop of symmetric 2×2 matrices, possibly pulled back along the
/// `iterate`-fold cover of the circle (S_k(t) = k·S(kt)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct AsymptoticOperator {
    samples: Vec<[f64; 3]>,
    iterate: u32,
}

impl TryFrom<Vec<Vec<f64>>> for AsymptoticOperator {
    type Error = Error;

    /// Rows are `[s11, s12, s22]` or full `[s11, s12, s21, s22]`.
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut samples = Vec::with_capacity(rows.len());
        for (j, r) in rows.iter().enumerate() {
            let path = format!("samples[{j}]");
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(path, "non-finite matrix entry"));
            }
            let s = match r.as_slice() {
                [a, b, c] => [*a, *b, *c],
                [a, b, c, d] => {
                    let scale = 1f64.max(b.abs()).max(c.abs());
                    if (b - c).abs() > SYMMETRY_TOL * scale {
                        return Err(Error::validation(path, "sample is not symmetric"));
                    }
                    [*a, 0.5 * (b + c), *d]
                }
                _ => return Err(Error::validation(path, "expected 3 or 4 entries per sample")),
            };
            samples.push(s);
        }
        AsymptoticOperator::new(samples)
    }
}

impl From<AsymptoticOperator> for Vec<Vec<f64>> {
    fn from(op: AsymptoticOperator) -> Self {
        op.samples.iter().map(|s| s.to_vec()).collect()
    }
}

impl AsymptoticOperator {
    pub fn new(samples: Vec<[f64; 3]>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::validation(
                "samples",
                format!("need at least {MIN_SAMPLES} samples, got {}", samples.len()),
            ));
        }
        Ok(AsymptoticOperator { samples, iterate: 1 })
    }

    /// Sample an arbitrary loop `t ↦ (s11, s12, s22)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        Self::new((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    /// The constant loop S ≡ θ·Id.
    pub fn scalar(theta: f64) -> Self {
        Self::from_fn(MIN_SAMPLES, |_| [theta, 0.0, theta]).expect("enough samples")
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn iterate(&self) -> u32 {
        self.iterate
    }

    /// The operator of the k-fold iterate of the orbit.
    pub fn pullback(&self, k: u32) -> Self {
        AsymptoticOperator { samples: self.samples.clone(), iterate: self.iterate * k }
    }

    /// Materialize the samples of k·S(kt) on a grid k times finer. Used as
    /// an independent check on the block-diagonal treatment of iterates.
    pub fn explicit_samples(&self) -> Self {
        let k = self.iterate as usize;
        let kf = self.iterate as f64;
        let mut out = Vec::with_capacity(self.samples.len() * k);
        for _ in 0..k {
            out.extend(self.samples.iter().map(|s| [kf * s[0], kf * s[1], kf * s[2]]));
        }
        AsymptoticOperator { samples: out, iterate: 1 }
    }

    pub(crate) fn fourier(&self) -> Fourier {
        Fourier::new(&self.samples)
    }

    /// Largest Frobenius norm of the samples of the pulled-back loop.
    pub fn sup_norm(&self) -> f64 {
        let k = self.iterate as f64;
        self.samples.iter().map(|s| k * (s[0] * s[0] + 2.0 * s[1] * s[1] + s[2] * s[2]).sqrt()).fold(0.0, f64::max)
    }
}

/// Fourier coefficients of the complex functions a(t) and b(t).
#[derive(Debug, Clone)]
pub(crate) struct Fourier {
    /// Coefficients live at indices −half..=half.
    half: i64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl Fourier {
    fn new(samples: &[[f64; 3]]) -> Self {
        let n = samples.len();
        let half = (n / 2) as i64;
        let len = (2 * half + 1) as usize;
        let mut a = vec![Complex64::new(0.0, 0.0); len];
        let mut b = vec![Complex64::new(0.0, 0.0); len];
        for j in -half..=half {
            let mut sa = Complex64::new(0.0, 0.0);
            let mut sb = Complex64::new(0.0, 0.0);
            for (idx, s) in samples.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -2.0 * PI * (j * idx as i64) as f64 / n as f64);
                sa += phase * (0.5 * (s[0] + s[2]));
                sb += phase * Complex64::new(0.5 * (s[0] - s[2]), s[1]);
            }
            // The Nyquist mode of an even grid is shared between ±n/2.
            let w = if n.is_multiple_of(2) && j.abs() == half { 0.5 } else { 1.0 } / n as f64;
            a[(j + half) as usize] = sa * w;
            b[(j + half) as usize] = sb * w;
        }
        Fourier { half, a, b }
    }

    pub(crate) fn a(&self, j: i64) -> Complex64 {
        if j.abs() > self.half {
            Complex64::new(0.0, 0.0)
        } else {
            self.a[(j + self.half) as usize]
        }
    }

    pub(crate) fn b(&self, j: i64) -> Complex64 {
        if j.abs() > self.half {
            Complex64::new(0.0, 0.0)
        } else {
            self.b[(j + self.half) as usize]
        }
    }

    /// The interpolated matrix S(t) of the base loop.
    pub(crate) fn eval(&self, t: f64) -> Matrix2<f64> {
        let mut av = Complex64::new(0.0, 0.0);
        let mut bv = Complex64::new(0.0, 0.0);
        for j in -self.half..=self.half {
            let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 * t);
            av += self.a(j) * e;
            bv += self.b(j) * e;
        }
        let a = av.re;
        Matrix2::new(a + bv.re, bv.im, bv.im, a - bv.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_samples_and_trig_loops() {
        let op = AsymptoticOperator::from_fn(16, |t| {
            let c = (2.0 * PI * t).cos();
            let s = (6.0 * PI * t).sin();
            [1.0 + c, 0.5 * s, -2.0 + c * s]
        })
        .unwrap();
        let f = op.fourier();
        for t in [0.0, 0.1234, 0.5, 0.77] {
            let c = (2.0 * PI * t).cos();
            let s = (6.0 * PI * t).sin();
            let m = f.eval(t);
            assert!((m[(0, 0)] - (1.0 + c)).abs() < 1e-12);
            assert!((m[(0, 1)] - 0.5 * s).abs() < 1e-12);
            assert!((m[(1, 1)] - (-2.0 + c * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn ingest_rules() {
        assert!(AsymptoticOperator::try_from(vec![vec![1.0, 0.0, 1.0]; 8]).is_err());
        let asym = vec![vec![1.0, 0.5, 0.4, 1.0]; 16];
        assert!(AsymptoticOperator::try_from(asym).is_err());
        let sym = vec![vec![1.0, 0.5, 0.5 + 1e-14, 1.0]; 16];
        let op = AsymptoticOperator::try_from(sym).unwrap();
        assert_eq!(op.samples()[0], [1.0, 0.5 + 0.5e-14, 1.0]);
    }

    #[test]
    fn explicit_pullback_scales_and_tiles() {
        let op = AsymptoticOperator::scalar(1.5).pullback(3);
        let ex = op.explicit_samples();
        assert_eq!(ex.samples().len(), 48);
        assert!(ex.samples().iter().all(|s| (s[0] - 4.5).abs() < 1e-15 && s[1] == 0.0));
        assert!((op.sup_norm() - 4.5 * 2f64.sqrt()).abs() < 1e-12);
    }
}
