//! Intersection pairing of constrained curves, its asymptotic part, and the
//! singularity index obtained from the adjunction formula.

use crate::curve_invariants::{ends, normal_chern, ConstraintSet, CurveData, End};
use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::orbit_spectrum::{delta_mb, omega_pair, omega_self, side_of, OrbitCatalog, OrbitClass, Perturbation, Side};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Two constrained curves and the relative pairing u •_Φ u′ between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingInput {
    pub left: CurveData,
    pub left_constraints: ConstraintSet,
    pub right: CurveData,
    pub right_constraints: ConstraintSet,
    pub relative_pairing: i64,
    /// Declared i_∞(u_z, u′_z′); absent pairs are 0.
    #[serde(default)]
    pub end_intersections: Vec<EndPairValue>,
    /// Declared geometric count u · u′, checked against i − i_∞.
    #[serde(default)]
    pub geometric_count: Option<i64>,
}

impl PairingInput {
    pub fn self_pairing(u: &CurveData, c: &ConstraintSet, relative_pairing: i64) -> Self {
        PairingInput {
            left: u.clone(),
            left_constraints: c.clone(),
            right: u.clone(),
            right_constraints: c.clone(),
            relative_pairing,
            end_intersections: Vec::new(),
            geometric_count: None,
        }
    }
}

/// A value attached to an ordered pair of punctures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndPairValue {
    pub left: String,
    pub right: String,
    pub value: i64,
}

fn lookup(values: &[EndPairValue], left: &str, right: &str) -> Option<i64> {
    values.iter().find(|v| v.left == left && v.right == right).map(|v| v.value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndPairTerm {
    pub left: String,
    pub right: String,
    pub i_infty: i64,
    pub i_mb: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub terms: Vec<EndPairTerm>,
    pub total: i64,
    /// Whether i = u · u′ + i_∞ held, when a geometric count was declared.
    pub geometric_check: Option<bool>,
}

fn same_sign_pairs<'a>(cat: &'a OrbitCatalog, p: &'a PairingInput) -> Result<Vec<(End<'a>, End<'a>)>> {
    let l = ends(cat, &p.left, &p.left_constraints)?;
    let r = ends(cat, &p.right, &p.right_constraints)?;
    let mut out = Vec::new();
    for a in &l {
        for b in &r {
            if a.sign == b.sign {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(out)
}

/// Σ Ω±(γ_z ± c_z, γ_z′ ± c′_z′) over end pairs of equal sign.
pub fn omega_sum(cat: &OrbitCatalog, p: &PairingInput) -> Result<i64> {
    same_sign_pairs(cat, p)?.iter().map(|(a, b)| omega_pair(cat, a.orbit, a.eps, b.orbit, b.eps, a.sign)).sum()
}

/// i(u; c | u′; c′) = u •_Φ u′ − Σ Ω.
pub fn intersection_number(cat: &OrbitCatalog, p: &PairingInput) -> Result<i64> {
    Ok(p.relative_pairing - omega_sum(cat, p)?)
}

/// Ω(γ, γ′) − Ω(γ + ε, γ′ + ε′): intersections that can come in from a
/// Morse-Bott family.
pub fn i_mb(cat: &OrbitCatalog, a: &End<'_>, b: &End<'_>) -> Result<i64> {
    let z = Perturbation::ZERO;
    let v = omega_pair(cat, a.orbit, z, b.orbit, z, a.sign)? - omega_pair(cat, a.orbit, a.eps, b.orbit, b.eps, a.sign)?;
    if v < 0 {
        return Err(Error::Consistency(format!(
            "i_MB between ends `{}` and `{}` is negative ({v}); winding data is not monotone in ε",
            a.puncture, b.puncture
        )));
    }
    Ok(v)
}

pub fn asymptotic_intersection(cat: &OrbitCatalog, p: &PairingInput) -> Result<AsymptoticReport> {
    let mut terms = Vec::new();
    for (a, b) in same_sign_pairs(cat, p)? {
        let key = (a.puncture.clone(), b.puncture.clone());
        let i_infty = lookup(&p.end_intersections, &key.0, &key.1).unwrap_or(0);
        if i_infty < 0 {
            return Err(Error::Consistency(format!("declared i_∞ at ({}, {}) is negative", key.0, key.1)));
        }
        terms.push(EndPairTerm { left: key.0, right: key.1, i_infty, i_mb: i_mb(cat, &a, &b)? });
    }
    let total = terms.iter().map(|t| t.i_infty + t.i_mb).sum();
    let geometric_check = match p.geometric_count {
        None => None,
        Some(g) => Some(intersection_number(cat, p)? == g + total),
    };
    Ok(AsymptoticReport { terms, total, geometric_check })
}

/// The orbit γ_z^ε used for covering counts: a generic neighbour for
/// unconstrained ends at exceptional Morse-Bott orbits, the orbit itself
/// otherwise.
fn generic_orbit<'a>(cat: &'a OrbitCatalog, e: &End<'a>) -> Result<&'a OrbitClass> {
    if e.constrained() || cat.kernel_dim(e.orbit)? == 0 {
        return Ok(e.orbit);
    }
    // Orbits of isotropy 1 already are generic members of their family.
    if e.orbit.generic.is_none() && e.orbit.isotropy() == 1 {
        return Ok(e.orbit);
    }
    let id = e.orbit.generic.as_ref().ok_or_else(|| {
        Error::Missing(format!(
            "unconstrained Morse-Bott end `{}` on orbit `{}` needs a `generic` orbit",
            e.puncture, e.orbit.id
        ))
    })?;
    cat.get(id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovTotals {
    pub cov_infty: i64,
    pub cov_mb: i64,
}

pub fn cov_totals(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<CovTotals> {
    let mut t = CovTotals { cov_infty: 0, cov_mb: 0 };
    for e in ends(cat, u, c)? {
        let (side, _) = side_of(e.sign);
        let gen = generic_orbit(cat, &e)?;
        t.cov_infty += i64::from(cat.cov_extremal(gen, side)?) - 1;
        if !e.constrained() {
            let nu = cat.nu_pm(e.orbit)?;
            let nu = if side == Side::Minus { nu.0 } else { nu.1 };
            t.cov_mb += (i64::from(gen.cover) - 1) * nu;
        }
    }
    Ok(t)
}

/// sing(u; c) = ½[i(u|u) − c_N − cov_∞ − cov_MB].
pub fn adjunction_sing(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet, self_i: i64) -> Result<Half> {
    if !u.somewhere_injective {
        return Err(Error::Precondition(format!("curve `{}` is not declared somewhere injective", u.id)));
    }
    let cn = normal_chern(cat, u, c)?;
    let cov = cov_totals(cat, u, c)?;
    let twice = Half::from_int(self_i - cov.cov_infty - cov.cov_mb) - cn;
    let Some(twice) = twice.to_int() else {
        return Err(Error::Consistency(format!("curve `{}`: i − c_N − cov terms is {twice}, not an integer", u.id)));
    };
    if twice < 0 {
        return Err(Error::Consistency(format!(
            "curve `{}`: sing = {} < 0; data inconsistent with a J-holomorphic curve",
            u.id,
            Half::from_doubled(twice)
        )));
    }
    Ok(Half::from_doubled(twice))
}

/// Optional per-end inputs for the singularity decomposition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfEndData {
    /// i_∞^Φ(u_z, u_z); defaults to the minimum Ω±(γ_z).
    #[serde(default)]
    pub self_infty: BTreeMap<String, i64>,
    /// i_∞(u_z, u_z′) for z ≠ z′; defaults to 0.
    #[serde(default)]
    pub pair_infty: Vec<EndPairValue>,
    /// The local singularity index δ(u), when known.
    #[serde(default)]
    pub delta: Option<Half>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingTerm {
    pub kind: String,
    pub ends: Vec<String>,
    /// Contribution to 2δ_∞.
    pub twice_value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingReport {
    pub terms: Vec<SingTerm>,
    pub delta_infty: Half,
    pub sing: Half,
    /// δ(u) + δ_∞ = sing, when δ(u) was declared.
    pub consistent: Option<bool>,
    /// Per-end inputs left at their defaults are not independently verified.
    pub defaulted_inputs: Vec<String>,
}

pub fn sing_decomposition(
    cat: &OrbitCatalog,
    u: &CurveData,
    c: &ConstraintSet,
    self_i: i64,
    data: &SelfEndData,
) -> Result<SingReport> {
    let sing = adjunction_sing(cat, u, c, self_i)?;
    let es = ends(cat, u, c)?;
    let mut terms = Vec::new();
    let mut defaulted = Vec::new();
    let mut push = |kind: &str, ends: Vec<String>, v: i64| -> Result<()> {
        if v < 0 {
            return Err(Error::Consistency(format!("{kind} term at {ends:?} is negative ({v})")));
        }
        terms.push(SingTerm { kind: kind.into(), ends, twice_value: v });
        Ok(())
    };
    for (i, a) in es.iter().enumerate() {
        for (j, b) in es.iter().enumerate() {
            if i == j || a.sign != b.sign {
                continue;
            }
            let key = (a.puncture.clone(), b.puncture.clone());
            let inf = lookup(&data.pair_infty, &key.0, &key.1).unwrap_or(0);
            push("i_infty", vec![key.0.clone(), key.1.clone()], inf)?;
            push("i_mb", vec![key.0, key.1], i_mb(cat, a, b)?)?;
        }
        let omega0 = omega_self(cat, a.orbit, a.sign)?;
        let self_inf = match data.self_infty.get(&a.puncture) {
            Some(v) => *v,
            None => {
                defaulted.push(a.puncture.clone());
                omega0
            }
        };
        push("delta_infty_end", vec![a.puncture.clone()], self_inf - omega0)?;
        push("delta_mb", vec![a.puncture.clone()], delta_mb(cat, a.orbit, a.c_z, a.sign)?.doubled())?;
    }
    let twice: i64 = terms.iter().map(|t| t.twice_value).sum();
    let delta_infty = Half::from_doubled(twice);
    let consistent = data.delta.map(|d| d + delta_infty == sing);
    Ok(SingReport { terms, delta_infty, sing, consistent, defaulted_inputs: defaulted })
}
