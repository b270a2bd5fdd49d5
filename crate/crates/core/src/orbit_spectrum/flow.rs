//! Conley-Zehnder index of a path of symplectic matrices by counting
//! crossings with the Maslov cycle.
//!
//! The path solves Ψ' = J₀ S₀(t) Ψ, Ψ(0) = I on [0, 1], with S₀ = S_k − ε the
//! perturbed loop. Zeros of g = det(Ψ − I) = 2 − tr Ψ mark crossings. A crossing
//! with one-dimensional kernel v contributes sign⟨v, S₀ v⟩, a passage through
//! the identity contributes the signature of S₀, and the start contributes
//! half the signature of S₀(0).
//!
//! Passages close to the identity are where two crossings can hide inside a
//! single grid cell, so every local minimum of ‖Ψ − I‖ below a threshold gets
//! rescanned on a grid fine enough to separate them.

use super::operator::{AsymptoticOperator, Fourier};
use crate::error::{Error, Result};
use nalgebra::{Matrix2, SymmetricEigen};

/// Product of the step size and the sup norm of S₀ on the coarse grid.
const COARSE_STEP_SCALE: f64 = 0.02;
const MIN_STEPS: usize = 2000;
/// ‖Ψ − I‖ below this is treated as an exact passage through the identity.
const IDENTITY_TOL: f64 = 1e-8;
/// Local minima of ‖Ψ − I‖ below this get a fine rescan.
const NEAR_IDENTITY: f64 = 0.25;
const BISECTION_STEPS: usize = 60;

struct Path<'a> {
    fourier: &'a Fourier,
    k: f64,
    eps: f64,
}

type M2 = Matrix2<f64>;

fn j0() -> M2 {
    M2::new(0.0, -1.0, 1.0, 0.0)
}

impl Path<'_> {
    fn s0(&self, t: f64) -> M2 {
        self.fourier.eval((self.k * t).fract()) * self.k - M2::identity() * self.eps
    }

    fn rhs(&self, t: f64, psi: &M2) -> M2 {
        j0() * self.s0(t) * psi
    }

    /// Integrate from (t0, ψ0) to t1 with `steps` RK4 steps.
    fn advance(&self, t0: f64, psi0: M2, t1: f64, steps: usize) -> M2 {
        let h = (t1 - t0) / steps as f64;
        let mut psi = psi0;
        let mut t = t0;
        for _ in 0..steps {
            let k1 = self.rhs(t, &psi);
            let k2 = self.rhs(t + 0.5 * h, &(psi + k1 * (0.5 * h)));
            let k3 = self.rhs(t + 0.5 * h, &(psi + k2 * (0.5 * h)));
            let k4 = self.rhs(t + h, &(psi + k3 * h));
            psi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t += h;
        }
        psi
    }
}

fn g(psi: &M2) -> f64 {
    2.0 - psi.trace()
}

fn dist_id(psi: &M2) -> f64 {
    (psi - M2::identity()).norm()
}

fn signature(s: &M2, scale: f64) -> Result<i64> {
    let e = SymmetricEigen::new(*s).eigenvalues;
    let mut sig = 0;
    for v in e.iter() {
        if v.abs() <= 1e-9 * scale.max(1.0) {
            return Err(Error::Degenerate {
                orbit: String::new(),
                detail: "crossing form is degenerate at a passage through the identity".into(),
            });
        }
        sig += if *v > 0.0 { 1 } else { -1 };
    }
    Ok(sig)
}

/// Crossing-form Conley-Zehnder index of the operator A + ε.
pub fn crossing_index(op: &AsymptoticOperator, eps: f64) -> Result<i64> {
    let fourier = op.fourier();
    let path = Path { fourier: &fourier, k: op.iterate() as f64, eps };
    let smax = op.sup_norm() * 1.5 + eps.abs() + 1.0;
    let n = MIN_STEPS.max((smax / COARSE_STEP_SCALE).ceil() as usize);
    let h = 1.0 / n as f64;

    let s_start = path.s0(0.0);
    let start_sig = signature(&s_start, smax).map_err(|_| Error::Degenerate {
        orbit: String::new(),
        detail: "S − ε is singular at t = 0; the starting crossing form is degenerate".into(),
    })?;

    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(M2::identity());
    for i in 0..n {
        let next = path.advance(i as f64 * h, nodes[i], (i + 1) as f64 * h, 1);
        nodes.push(next);
    }
    let end = nodes[n];
    if g(&end).abs() <= 1e-8 * end.norm_squared().max(1.0) {
        return Err(Error::Degenerate { orbit: String::new(), detail: "the endpoint Ψ(1) has eigenvalue 1".into() });
    }

    // Cells [i, i+1] already accounted for by a fine rescan.
    let mut claimed = vec![false; n];
    // Start contribution: ½ signature, twice to stay in integers.
    let mut twice = start_sig;
    claimed[0] = true;

    // The last node counts too: a passage can sit just before t = 1.
    for i in 1..=n {
        let d = dist_id(&nodes[i]);
        let next = if i < n { dist_id(&nodes[i + 1]) } else { f64::INFINITY };
        if d < NEAR_IDENTITY && d <= dist_id(&nodes[i - 1]) && d <= next {
            let lo = i - 1;
            let hi = (i + 1).min(n);
            twice += 2 * fine_scan(&path, lo as f64 * h, nodes[lo], hi as f64 * h, smax)?;
            claimed[lo..hi].fill(true);
        }
    }

    for i in 0..n {
        if claimed[i] {
            continue;
        }
        let (ga, gb) = (g(&nodes[i]), g(&nodes[i + 1]));
        if (ga > 0.0) != (gb > 0.0) {
            twice += 2 * crossing_sign(&path, i as f64 * h, nodes[i], (i + 1) as f64 * h, smax)?;
        }
    }
    if twice % 2 != 0 {
        return Err(Error::Numerical("crossing count produced a half-integer index".into()));
    }
    Ok(twice / 2)
}

/// Net contribution of the cells [a, b] around a near-identity passage.
fn fine_scan(path: &Path<'_>, a: f64, psi_a: M2, b: f64, smax: f64) -> Result<i64> {
    let (t_star, d_star) = closest_approach(path, a, psi_a, b);
    let at = |t: f64| path.advance(a, psi_a, t, 8);
    if d_star < IDENTITY_TOL {
        // Exact passage: count it by signature and stay clear of the
        // rounding noise in g right next to it.
        let r = (1e-4 / smax).min(0.25 * (b - a));
        let mut total = signature(&path.s0(t_star), smax)?;
        if t_star - r > a {
            total += scan_uniform(path, a, psi_a, t_star - r, 64, smax)?;
        }
        if t_star + r < b {
            total += scan_uniform(path, t_star + r, at(t_star + r), b, 64, smax)?;
        }
        return Ok(total);
    }
    // Crossings near the identity come in pairs about d*/|S| apart.
    let w = 20.0 * d_star / smax;
    let lo = (t_star - w).max(a);
    let hi = (t_star + w).min(b);
    let mut total = 0;
    if lo > a {
        total += scan_uniform(path, a, psi_a, lo, 64, smax)?;
    }
    total += scan_uniform(path, lo, at(lo), hi, 2000, smax)?;
    if hi < b {
        total += scan_uniform(path, hi, at(hi), b, 64, smax)?;
    }
    Ok(total)
}

/// Minimize ‖Ψ(t) − I‖ over [a, b]: coarse sampling, then golden section.
fn closest_approach(path: &Path<'_>, a: f64, psi_a: M2, b: f64) -> (f64, f64) {
    let dist = |t: f64| dist_id(&path.advance(a, psi_a, t, 8));
    let samples: usize = 64;
    let step = (b - a) / samples as f64;
    let best =
        (0..=samples).map(|j| (j, dist(a + j as f64 * step))).min_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty").0;
    let (mut lo, mut hi) = (a + best.saturating_sub(1) as f64 * step, (a + (best + 1) as f64 * step).min(b));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if dist(x1) <= dist(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, dist(t))
}

/// Crossings counted on a uniform subdivision of [t0, t1].
fn scan_uniform(path: &Path<'_>, t0: f64, psi0: M2, t1: f64, cells: usize, smax: f64) -> Result<i64> {
    let h = (t1 - t0) / cells as f64;
    let mut psi = psi0;
    let mut total = 0;
    for j in 0..cells {
        let ta = t0 + j as f64 * h;
        let next = path.advance(ta, psi, ta + h, 4);
        if (g(&psi) > 0.0) != (g(&next) > 0.0) {
            total += crossing_sign(path, ta, psi, ta + h, smax)?;
        }
        psi = next;
    }
    Ok(total)
}

/// Sign of the crossing form at the zero of g inside [a, b].
fn crossing_sign(path: &Path<'_>, a: f64, psi_a: M2, b: f64, smax: f64) -> Result<i64> {
    let (mut lo, mut plo, mut hi) = (a, psi_a, b);
    let ga = g(&psi_a);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let pm = path.advance(lo, plo, mid, 2);
        if (g(&pm) > 0.0) == (ga > 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let psi = path.advance(lo, plo, t, 1);
    let nmat = psi - M2::identity();
    if nmat.norm() < IDENTITY_TOL {
        return signature(&path.s0(t), smax);
    }
    // At a simple crossing Ψ − I is rank one with image and kernel both
    // spanned by v; take the dominant column.
    let c0 = nmat.column(0).into_owned();
    let c1 = nmat.column(1).into_owned();
    let v = if c0.norm() >= c1.norm() { c0 } else { c1 };
    let v = v / v.norm();
    let s = path.s0(t);
    let form = (v.transpose() * s * v)[(0, 0)];
    if form.abs() <= 1e-7 * s.norm().max(1.0) {
        return Err(Error::Degenerate {
            orbit: String::new(),
            detail: format!("crossing at t = {t:.6} has a degenerate crossing form"),
        });
    }
    Ok(if form > 0.0 { 1 } else { -1 })
}
