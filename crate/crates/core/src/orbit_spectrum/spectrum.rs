//! Fourier-Galerkin discretization of asymptotic operators.
//!
//! For the k-th iterate the loop k·S(kt) only has Fourier modes in kℤ, so the
//! mode e^{2πimt} couples to e^{2πijt} when j ≡ m (mod k) and to the conjugate
//! of e^{2πijt} when j ≡ −m (mod k). The truncated matrix therefore splits
//! into blocks indexed by residue pairs {r, −r}, which keeps high iterates
//! affordable. Each block is realified and diagonalized separately.

use super::operator::{AsymptoticOperator, Fourier};
use crate::error::{Error, Result};
use crate::zero_count::{winding_with, WindingFailure};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MIN_TRUNCATION: usize = 8;
/// Relative tolerance (times the spectral diameter) for calling an
/// eigenvalue zero or two eigenvalues equal.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;
const WINDING_RETRIES: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    pub winding: i64,
    pub multiplicity: u8,
}

/// The trusted part of a truncated spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// Fourier modes per unit frequency of the underlying simple loop.
    pub truncation: usize,
    pub iterate: u32,
    /// Number of eigenvalues of the full truncated matrix.
    pub total: usize,
    /// max − min over the full truncated spectrum.
    pub diameter: f64,
    /// Eigenpairs of the reliable window (middle half), grouped by multiplicity.
    pub eigenpairs: Vec<Eigenpair>,
}

impl SpectralData {
    /// Windings nondecreasing, and every winding strictly inside the window
    /// range carried by exactly two eigenvalues (counted with multiplicity).
    pub fn check_window(&self) -> Result<()> {
        for w in self.eigenpairs.windows(2) {
            if w[1].winding < w[0].winding {
                return Err(Error::Numerical(format!(
                    "winding decreases from {} to {} between eigenvalues {:.6} and {:.6}",
                    w[0].winding, w[1].winding, w[0].value, w[1].value
                )));
            }
            if w[1].winding > w[0].winding + 1 {
                return Err(Error::Numerical(format!("winding jumps from {} to {}", w[0].winding, w[1].winding)));
            }
        }
        let (Some(first), Some(last)) = (self.eigenpairs.first(), self.eigenpairs.last()) else {
            return Err(Error::Numerical("empty reliable window".into()));
        };
        for w in first.winding + 1..last.winding {
            let count: u32 = self.eigenpairs.iter().filter(|e| e.winding == w).map(|e| e.multiplicity as u32).sum();
            if count != 2 {
                return Err(Error::Numerical(format!(
                    "winding {w} carried by {count} eigenvalues in the reliable window"
                )));
            }
        }
        Ok(())
    }

    /// Winding values fully inside the window (edge values may be cut).
    pub fn interior_windings(&self) -> Vec<i64> {
        match (self.eigenpairs.first(), self.eigenpairs.last()) {
            (Some(a), Some(b)) => (a.winding + 1..b.winding).collect(),
            _ => vec![],
        }
    }
}

struct Block {
    modes: Vec<i64>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

#[derive(Clone, Copy)]
struct Entry {
    value: f64,
    block: usize,
    col: usize,
}

/// All eigenpairs of the truncated operator, sorted by eigenvalue.
pub(crate) struct Decomposition {
    blocks: Vec<Block>,
    entries: Vec<Entry>,
    max_mode: i64,
}

impl Decomposition {
    pub(crate) fn new(op: &AsymptoticOperator, truncation: usize) -> Result<Self> {
        if truncation < MIN_TRUNCATION {
            return Err(Error::Precondition(format!("truncation must be at least {MIN_TRUNCATION}, got {truncation}")));
        }
        let k = op.iterate() as i64;
        let fourier = op.fourier();
        let max_mode = k * truncation as i64;
        let mut residue_sets = Vec::new();
        for r in 0..k {
            let s = (k - r) % k;
            if r <= s {
                residue_sets.push(if r == s { vec![r] } else { vec![r, s] });
            }
        }
        let build = |res: &Vec<i64>| -> Block {
            let modes: Vec<i64> = (-max_mode..=max_mode).filter(|m| res.contains(&m.rem_euclid(k))).collect();
            let matrix = block_matrix(&fourier, k, &modes);
            let eig = SymmetricEigen::new(matrix);
            Block { modes, values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
        };
        let blocks: Vec<Block> = crate::parallel::map(&residue_sets, build);
        let mut entries = Vec::new();
        for (bi, b) in blocks.iter().enumerate() {
            for (c, &value) in b.values.iter().enumerate() {
                entries.push(Entry { value, block: bi, col: c });
            }
        }
        entries.sort_by(|x, y| x.value.total_cmp(&y.value));
        Ok(Decomposition { blocks, entries, max_mode })
    }

    pub(crate) fn len(&self) -> usize {
        self.entries.len()
    }

    pub(crate) fn value(&self, i: usize) -> f64 {
        self.entries[i].value
    }

    pub(crate) fn diameter(&self) -> f64 {
        self.entries.last().map_or(0.0, |l| l.value) - self.entries.first().map_or(0.0, |f| f.value)
    }

    /// Indices of the middle half of the sorted spectrum.
    pub(crate) fn window(&self) -> std::ops::Range<usize> {
        let n = self.len();
        n / 4..n - n / 4
    }

    /// Winding of the eigenfunction of sorted entry `i`, evaluated by FFT
    /// on a grid that is refined when the argument is ambiguous.
    pub(crate) fn winding(&self, i: usize) -> Result<i64> {
        let e = self.entries[i];
        let block = &self.blocks[e.block];
        let half = block.modes.len();
        let coeffs: Vec<(i64, Complex64)> = block
            .modes
            .iter()
            .enumerate()
            .map(|(p, &m)| {
                let x = block.vectors[(p, e.col)];
                let y = block.vectors[(half + p, e.col)];
                (m, Complex64::new(x, y))
            })
            .collect();
        let mut grid = (8 * (2 * self.max_mode as usize + 1)).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let mut last = None;
        for _ in 0..=WINDING_RETRIES {
            let mut buf = vec![Complex64::new(0.0, 0.0); grid];
            for &(m, c) in &coeffs {
                buf[m.rem_euclid(grid as i64) as usize] += c;
            }
            planner.plan_fft_inverse(grid).process(&mut buf);
            let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
            match winding_with(&buf, 1e-7 * peak, 0.5 * PI) {
                Ok(w) => return Ok(w),
                Err(f) => last = Some(f),
            }
            grid *= 2;
        }
        Err(Error::Numerical(format!(
            "winding extraction failed for eigenvalue {:.6} after refinement ({})",
            e.value,
            match last {
                Some(WindingFailure::NearZero { .. }) => "eigenfunction nearly vanishes",
                Some(WindingFailure::AmbiguousStep { .. }) => "argument step ambiguous",
                _ => "no samples",
            }
        )))
    }
}

/// Realified matrix of the block spanned by `modes`.
fn block_matrix(f: &Fourier, k: i64, modes: &[i64]) -> DMatrix<f64> {
    let n = modes.len();
    let kf = k as f64;
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let coef = |g: &dyn Fn(i64) -> Complex64, d: i64| -> Complex64 {
        if d % k == 0 {
            g(d / k)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    for (p, &mi) in modes.iter().enumerate() {
        for (q, &mj) in modes.iter().enumerate() {
            // complex-linear part: 2πm δ − k a_{m−j}
            let mut pc = -kf * coef(&|j| f.a(j), mi - mj);
            if p == q {
                pc += Complex64::new(2.0 * PI * mi as f64, 0.0);
            }
            // conjugate-linear part: −k b_{m+j}
            let qc = -kf * coef(&|j| f.b(j), mi + mj);
            m[(p, q)] += pc.re + qc.re;
            m[(p, n + q)] += -pc.im + qc.im;
            m[(n + p, q)] += pc.im + qc.im;
            m[(n + p, n + q)] += pc.re - qc.re;
        }
    }
    // Remove rounding asymmetry before the symmetric solver sees it.
    let t = m.transpose();
    (m + t) * 0.5
}

/// Eigenpairs in the reliable window, with windings.
pub fn discretized_spectrum(op: &AsymptoticOperator, truncation: usize) -> Result<SpectralData> {
    let d = Decomposition::new(op, truncation)?;
    let diameter = d.diameter();
    let tol = DEGENERACY_REL_TOL * diameter;
    let idx: Vec<usize> = d.window().collect();
    let windings = crate::parallel::map(&idx, |&i| d.winding(i));
    let mut eigenpairs: Vec<Eigenpair> = Vec::new();
    for (&i, w) in idx.iter().zip(windings) {
        let w = w?;
        let v = d.value(i);
        match eigenpairs.last_mut() {
            Some(last) if last.multiplicity == 1 && last.winding == w && (v - last.value).abs() <= tol => {
                last.multiplicity = 2;
            }
            _ => eigenpairs.push(Eigenpair { value: v, winding: w, multiplicity: 1 }),
        }
    }
    Ok(SpectralData { truncation, iterate: op.iterate(), total: d.len(), diameter, eigenpairs })
}

/// What the spectrum looks like near zero, certified against a gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroProfile {
    /// Winding of the largest negative non-kernel eigenvalue.
    pub below: i64,
    /// Winding of the smallest positive non-kernel eigenvalue.
    pub above: i64,
    /// Windings of the (numerically exact) kernel, sorted.
    pub kernel: Vec<i64>,
}

impl ZeroProfile {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }
}

/// Locate the spectrum around zero. Every eigenvalue must either be a
/// kernel eigenvalue (|λ| below the degeneracy tolerance) or satisfy
/// |λ| ≥ `gap`; otherwise no admissible perturbation size exists.
pub fn zero_profile(op: &AsymptoticOperator, truncation: usize, gap: f64) -> Result<ZeroProfile> {
    let d = Decomposition::new(op, truncation)?;
    let tol = DEGENERACY_REL_TOL * d.diameter();
    let window = d.window();
    let n = d.len();
    let mut kernel_idx = Vec::new();
    let mut below = None;
    let mut above = None;
    for i in 0..n {
        let v = d.value(i);
        if v.abs() <= tol {
            kernel_idx.push(i);
        } else if v.abs() < gap {
            return Err(Error::Numerical(format!(
                "eigenvalue {v:.3e} lies inside the declared gap (−{gap:e}, {gap:e}); \
                 shrink delta_gap or perturb the loop"
            )));
        } else if v < 0.0 {
            below = Some(i);
        } else if above.is_none() {
            above = Some(i);
        }
    }
    let (Some(lo), Some(hi)) = (below, above) else {
        return Err(Error::Numerical("spectrum does not straddle zero".into()));
    };
    // One extra eigenvalue on each side serves as a monotonicity guard.
    let (lo2, hi2) = (lo.saturating_sub(1), (hi + 1).min(n - 1));
    if lo2 < window.start || hi2 >= window.end {
        return Err(Error::Numerical(format!(
            "eigenvalues near zero fall outside the reliable window at truncation {truncation}; increase it"
        )));
    }
    let wb = d.winding(lo)?;
    let wa = d.winding(hi)?;
    let kernel = kernel_idx.iter().map(|&i| d.winding(i)).collect::<Result<Vec<_>>>()?;
    let chain: Vec<i64> = std::iter::once(d.winding(lo2)?)
        .chain(std::iter::once(wb))
        .chain(kernel.iter().copied())
        .chain(std::iter::once(wa))
        .chain(std::iter::once(d.winding(hi2)?))
        .collect();
    if chain.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Numerical(format!("windings near zero are not monotone: {chain:?}")));
    }
    Ok(ZeroProfile { below: wb, above: wa, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_scalar(theta: f64, k: u32, trunc: usize) {
        let op = AsymptoticOperator::scalar(theta).pullback(k);
        let s = discretized_spectrum(&op, trunc).unwrap();
        s.check_window().unwrap();
        for e in &s.eigenpairs {
            let expected = 2.0 * PI * e.winding as f64 - k as f64 * theta;
            assert!((e.value - expected).abs() < 1e-9, "{e:?} vs {expected}");
        }
    }

    #[test]
    fn zero_loop_has_2pik_spectrum() {
        let s = discretized_spectrum(&AsymptoticOperator::scalar(0.0), 32).unwrap();
        assert!(s.eigenpairs.iter().filter(|e| e.multiplicity == 2).count() >= s.eigenpairs.len() - 2);
        check_scalar(0.0, 1, 32);
    }

    #[test]
    fn scalar_shift_and_iterates() {
        check_scalar(PI, 1, 16);
        check_scalar(PI, 3, 16);
        check_scalar(1.0, 4, 12);
    }

    #[test]
    fn diagonal_equals_scalar() {
        let a = discretized_spectrum(&AsymptoticOperator::scalar(0.7), 16).unwrap();
        let b = discretized_spectrum(&AsymptoticOperator::from_fn(16, |_| [0.7, 0.0, 0.7]).unwrap(), 16).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn block_treatment_matches_explicit_samples() {
        let op = AsymptoticOperator::from_fn(16, |t| {
            let c = (2.0 * PI * t).cos();
            [2.0 + 3.0 * c, 1.5 * (4.0 * PI * t).sin(), 1.0 - c]
        })
        .unwrap()
        .pullback(2);
        let blocked = zero_profile(&op, 24, 1e-6).unwrap();
        let explicit = zero_profile(&op.explicit_samples(), 48, 1e-6).unwrap();
        assert_eq!(blocked, explicit);
    }

    #[test]
    fn profiles_of_model_operators() {
        let p = zero_profile(&AsymptoticOperator::scalar(2.0 * PI), 16, 1e-3).unwrap();
        assert_eq!(p, ZeroProfile { below: 0, above: 2, kernel: vec![1, 1] });
        let shear = AsymptoticOperator::from_fn(16, |_| [1.0, 0.0, 0.0]).unwrap();
        let p = zero_profile(&shear, 16, 1e-3).unwrap();
        assert_eq!(p.kernel, vec![0]);
        assert!(zero_profile(&AsymptoticOperator::scalar(1e-4), 16, 1e-3).is_err());
    }

    #[test]
    fn truncation_precondition() {
        assert!(discretized_spectrum(&AsymptoticOperator::scalar(1.0), 4).is_err());
    }
}
