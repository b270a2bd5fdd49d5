//! Integer calculus attached to a single curve: Fredholm index, normal
//! Chern number, parity counts, the constant K(c, G) and the automatic
//! transversality bounds.

use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::orbit_spectrum::{CzMethod, OrbitCatalog, OrbitClass, Perturbation};
use crate::surface_model::{euler_char, PuncturedSurface, Sign};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveData {
    pub id: String,
    pub surface: PuncturedSurface,
    #[serde(default = "two")]
    pub ambient_dim_n: u32,
    /// Orbit id per puncture id.
    pub orbit_at: BTreeMap<String, String>,
    pub c1_rel: i64,
    #[serde(default)]
    pub maslov_boundary: i64,
    #[serde(default)]
    pub z_du: Half,
    #[serde(default)]
    pub somewhere_injective: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology_tag: Option<String>,
}

fn two() -> u32 {
    2
}

impl CurveData {
    pub fn validate(&self, cat: &OrbitCatalog) -> Result<()> {
        let base = format!("curves.{}", self.id);
        self.surface.validate().map_err(|e| prefix(e, &format!("{base}.surface")))?;
        if self.ambient_dim_n == 0 {
            return Err(Error::validation(format!("{base}.ambient_dim_n"), "must be positive"));
        }
        if self.ambient_dim_n != 2 && self.surface.num_punctures() > 0 {
            return Err(Error::validation(
                format!("{base}.ambient_dim_n"),
                "punctured curves are only supported in dimension 4 (n = 2)",
            ));
        }
        for p in &self.surface.punctures {
            let Some(o) = self.orbit_at.get(&p.id) else {
                return Err(Error::validation(format!("{base}.orbit_at"), format!("puncture `{}` has no orbit", p.id)));
            };
            cat.get(o)
                .map_err(|_| Error::validation(format!("{base}.orbit_at.{}", p.id), format!("unknown orbit `{o}`")))?;
        }
        if let Some(extra) = self.orbit_at.keys().find(|z| self.surface.puncture(z).is_none()) {
            return Err(Error::validation(format!("{base}.orbit_at.{extra}"), "not a puncture of the surface"));
        }
        if self.z_du < Half::ZERO {
            return Err(Error::validation(format!("{base}.z_du"), "Z(du) is nonnegative"));
        }
        if self.surface.boundary_components == 0 {
            if !self.z_du.is_integer() {
                return Err(Error::validation(format!("{base}.z_du"), "Z(du) is an integer when there is no boundary"));
            }
            if self.maslov_boundary != 0 {
                return Err(Error::validation(
                    format!("{base}.maslov_boundary"),
                    "must be 0 when there is no boundary",
                ));
            }
        }
        Ok(())
    }

    pub fn orbit<'a>(&self, cat: &'a OrbitCatalog, z: &str) -> Result<&'a OrbitClass> {
        let id =
            self.orbit_at.get(z).ok_or_else(|| Error::Missing(format!("curve `{}` has no orbit at `{z}`", self.id)))?;
        cat.get(id)
    }
}

pub(crate) fn prefix(e: Error, path: &str) -> Error {
    match e {
        Error::Validation { path: p, msg } => Error::validation(format!("{path}.{p}"), msg),
        other => other,
    }
}

/// Constrained punctures Γ_C; the rest are unconstrained. The weight δ
/// defaults to half the catalog gap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    #[serde(default)]
    pub constrained: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Perturbation>,
}

impl ConstraintSet {
    pub fn new(constrained: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ConstraintSet { constrained: constrained.into_iter().map(Into::into).collect(), delta: None }
    }

    pub fn is_constrained(&self, z: &str) -> bool {
        self.constrained.contains(z)
    }

    pub fn delta(&self, cat: &OrbitCatalog) -> Perturbation {
        self.delta.unwrap_or_else(|| cat.small_delta())
    }

    /// c_z = +δ on Γ_C and −δ on Γ_U.
    pub fn c_z(&self, cat: &OrbitCatalog, z: &str) -> Perturbation {
        let d = self.delta(cat);
        if self.is_constrained(z) {
            d
        } else {
            d.neg()
        }
    }

    pub fn validate(&self, s: &PuncturedSurface, path: &str) -> Result<()> {
        if let Some(z) = self.constrained.iter().find(|z| s.puncture(z).is_none()) {
            return Err(Error::validation(format!("{path}.constrained"), format!("`{z}` is not a puncture")));
        }
        if let Some(d) = self.delta {
            if !d.is_positive() {
                return Err(Error::validation(format!("{path}.delta"), "the weight δ must be positive"));
            }
        }
        Ok(())
    }
}

/// One end of a curve with its perturbed orbit γ_z ± c_z.
#[derive(Debug, Clone)]
pub struct End<'a> {
    pub puncture: String,
    pub sign: Sign,
    pub orbit: &'a OrbitClass,
    pub c_z: Perturbation,
    /// ±c_z, the perturbation actually applied to the orbit.
    pub eps: Perturbation,
}

impl End<'_> {
    pub fn constrained(&self) -> bool {
        self.c_z.is_positive()
    }
}

pub fn ends<'a>(cat: &'a OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<Vec<End<'a>>> {
    u.surface
        .punctures
        .iter()
        .map(|p| {
            let c_z = c.c_z(cat, &p.id);
            let eps = if p.sign == Sign::Plus { c_z } else { c_z.neg() };
            Ok(End { puncture: p.id.clone(), sign: p.sign, orbit: u.orbit(cat, &p.id)?, c_z, eps })
        })
        .collect()
}

/// (#Γ₀, #Γ₁): punctures whose perturbed orbit is even / odd.
pub fn parity_partition(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<(i64, i64)> {
    let mut counts = (0, 0);
    for e in ends(cat, u, c)? {
        if cat.alpha_pm(e.orbit, e.eps)?.parity == 0 {
            counts.0 += 1;
        } else {
            counts.1 += 1;
        }
    }
    Ok(counts)
}

/// μ(u; c) = μ(boundary) + Σ₊ μ_CZ(γ + c) − Σ₋ μ_CZ(γ − c).
pub fn total_maslov(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<i64> {
    let mut mu = u.maslov_boundary;
    for e in ends(cat, u, c)? {
        mu += e.sign.factor() * cat.conley_zehnder(e.orbit, e.eps, CzMethod::Winding)?;
    }
    Ok(mu)
}

pub fn fredholm_index(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<i64> {
    let n = i64::from(u.ambient_dim_n);
    Ok((n - 3) * euler_char(&u.surface) + 2 * u.c1_rel + total_maslov(cat, u, c)?)
}

/// c_N from the index: 2c_N = ind − 2 + 2g + #Γ₀ + m.
pub fn normal_chern_from_index(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<Half> {
    let s = &u.surface;
    let ind = fredholm_index(cat, u, c)?;
    let (g0, _) = parity_partition(cat, u, c)?;
    Ok(Half::from_doubled(ind - 2 + 2 * i64::from(s.genus) + g0 + i64::from(s.boundary_components)))
}

/// c_N from windings: c₁ − χ + ½μ(boundary) + Σ₊ α−(γ + c) − Σ₋ α+(γ − c).
pub fn normal_chern_from_windings(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<Half> {
    let mut total = u.c1_rel - euler_char(&u.surface);
    for e in ends(cat, u, c)? {
        let a = cat.alpha_pm(e.orbit, e.eps)?;
        total += match e.sign {
            Sign::Plus => a.alpha_minus,
            Sign::Minus => -a.alpha_plus,
        };
    }
    Ok(Half::from_int(total) + Half::from_doubled(u.maslov_boundary))
}

/// Normal Chern number, computed both ways and cross-checked.
pub fn normal_chern(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<Half> {
    if u.ambient_dim_n != 2 {
        return Err(Error::Precondition(format!(
            "c_N is defined for n = 2, curve `{}` has n = {}",
            u.id, u.ambient_dim_n
        )));
    }
    let a = normal_chern_from_index(cat, u, c)?;
    let b = normal_chern_from_windings(cat, u, c)?;
    if a != b {
        return Err(Error::Consistency(format!(
            "curve `{}`: c_N is {a} from the index but {b} from the windings",
            u.id
        )));
    }
    Ok(a)
}

/// K(c, G) = min{k + ℓ : 0 ≤ k ≤ G, ℓ ≥ 0, 2k + ℓ > 2c}, with ℓ even on
/// closed surfaces.
pub fn k_bound(c: Half, g: u32, has_boundary: bool) -> i64 {
    (0..=i64::from(g))
        .map(|k| {
            let mut l = (c.doubled() - 2 * k + 1).max(0);
            if !has_boundary && l % 2 == 1 {
                l += 1;
            }
            k + l
        })
        .min()
        .expect("k = 0 is always admissible")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reformulations {
    /// ind > 2g + #Γ₀ + #π₀(∂Σ) − 2 + 2Z(du)
    pub topological: bool,
    /// 2c₁ + μ + #Γ₁ > 2Z(du)
    pub chern_maslov: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub index: i64,
    pub normal_chern: Half,
    pub z_du: Half,
    pub criterion_met: bool,
    pub kernel_lower: i64,
    pub kernel_upper: i64,
    pub gamma0_count: i64,
    pub reformulations: Reformulations,
}

pub fn transversality_check(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<TransversalityReport> {
    let ind = fredholm_index(cat, u, c)?;
    let cn = normal_chern(cat, u, c)?;
    let (g0, g1) = parity_partition(cat, u, c)?;
    let z = u.z_du;
    let s = &u.surface;
    let boundary = s.boundary_components > 0;
    let criterion_met = Half::from_int(ind) > cn + z;
    let two_z = z.doubled();
    let (lower, upper) = if ind <= two_z {
        (two_z, two_z + k_bound(cn - z, g0 as u32, boundary))
    } else {
        (ind, ind + k_bound(cn + z - Half::from_int(ind), g0 as u32, boundary))
    };
    let reformulations = Reformulations {
        topological: ind > 2 * i64::from(s.genus) + g0 + i64::from(s.boundary_components) - 2 + two_z,
        chern_maslov: 2 * u.c1_rel + total_maslov(cat, u, c)? + g1 > two_z,
    };
    if reformulations.topological != criterion_met || reformulations.chern_maslov != criterion_met {
        return Err(Error::Consistency(format!(
            "curve `{}`: equivalent forms of the transversality criterion disagree",
            u.id
        )));
    }
    if criterion_met && lower != upper {
        return Err(Error::Consistency(format!("curve `{}`: regular but kernel bounds [{lower}, {upper}]", u.id)));
    }
    Ok(TransversalityReport {
        index: ind,
        normal_chern: cn,
        z_du: z,
        criterion_met,
        kernel_lower: lower,
        kernel_upper: upper,
        gamma0_count: g0,
        reformulations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundleBounds {
    pub injective: bool,
    pub surjective: bool,
    pub kernel_lower: i64,
    pub kernel_upper: i64,
}

/// Kernel and cokernel information for a real Cauchy-Riemann operator on a
/// line bundle with index `ind` and adjusted first Chern number `c1_adj`.
pub fn line_bundle_bounds(ind: i64, c1_adj: Half, gamma0: u32, has_boundary: bool) -> LineBundleBounds {
    let injective = ind <= 0 && c1_adj < Half::ZERO;
    let surjective = ind >= 0 && Half::from_int(ind) > c1_adj;
    let lower = ind.max(0);
    let mut upper = i64::MAX;
    if ind <= 0 {
        upper = upper.min(if injective { 0 } else { k_bound(c1_adj, gamma0, has_boundary) });
    }
    if ind >= 0 {
        upper =
            upper.min(if surjective { ind } else { ind + k_bound(c1_adj - Half::from_int(ind), gamma0, has_boundary) });
    }
    LineBundleBounds { injective, surjective, kernel_lower: lower, kernel_upper: upper }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalIndices {
    /// ind(u; c) − 2Z(du)
    pub normal: i64,
    /// 3χ + #Γ + 2Z(du)
    pub tangent: i64,
}

pub fn index_normal_operator(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<NormalIndices> {
    let ind = fredholm_index(cat, u, c)?;
    let two_z = u.z_du.doubled();
    Ok(NormalIndices { normal: ind - two_z, tangent: 3 * euler_char(&u.surface) + u.surface.num_punctures() + two_z })
}

/// 2Z(du) ≤ ind(u; c); false means the data cannot come from a somewhere
/// injective curve for generic J.
pub fn critical_bound_check(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<bool> {
    if !u.somewhere_injective {
        return Err(Error::Precondition(format!("curve `{}` is not declared somewhere injective", u.id)));
    }
    Ok(u.z_du.doubled() <= fredholm_index(cat, u, c)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroBudget {
    /// Z(η) + Z_∞(η) for any nontrivial kernel section η.
    pub budget: Half,
    pub kernel_trivial: bool,
    /// Nontrivial sections have no zeros, at infinity included.
    pub zero_free: bool,
}

pub fn adjusted_c1_zero_budget(c1_adj: Half) -> ZeroBudget {
    ZeroBudget { budget: c1_adj, kernel_trivial: c1_adj < Half::ZERO, zero_free: c1_adj == Half::ZERO }
}
