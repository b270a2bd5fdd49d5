//! Multiple covers u∘φ of a curve u by a branched cover φ of punctured
//! surfaces: pulled-back constraints, the covering formula for c_N, the
//! intersection covering inequality, the partial order on constraints, and
//! the a priori list of possible underlying simple curves.

use crate::curve_invariants::{ends, normal_chern, prefix, ConstraintSet, CurveData, End};
use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::intersection_theory::{intersection_number, PairingInput};
use crate::orbit_spectrum::{q_tilde, side_of, OrbitCatalog, OrbitClass, Relation};
use crate::parallel;
use crate::surface_model::{
    euler_char, riemann_hurwitz_punctured, BranchedCover, FiberSpec, Puncture, PuncturedSurface, Sign,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A base curve v with constraints 𝐜′, a branched cover φ onto its domain,
/// and constraints 𝐜 on the domain of φ (those of the curve u = v∘φ as a
/// member of its own moduli space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverScenario {
    pub id: String,
    pub cover: BranchedCover,
    pub base: CurveData,
    pub base_constraints: ConstraintSet,
    pub total_constraints: ConstraintSet,
    /// Orbits declared for the covering curve; when present they must agree
    /// with γ_z = γ_{φ(z)}^{k_z}.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub declared_orbits: BTreeMap<String, String>,
}

impl CoverScenario {
    pub fn validate(&self, cat: &OrbitCatalog) -> Result<()> {
        let base = format!("covers.{}", self.id);
        self.cover.validate().map_err(|e| prefix(e, &format!("{base}.cover")))?;
        riemann_hurwitz_punctured(&self.cover).map_err(|e| prefix(e, &format!("{base}.cover")))?;
        if self.cover.codomain != self.base.surface {
            return Err(Error::validation(
                format!("{base}.cover.codomain"),
                format!("codomain differs from the surface of base curve `{}`", self.base.id),
            ));
        }
        self.base.validate(cat)?;
        self.base_constraints.validate(&self.base.surface, &format!("{base}.base_constraints"))?;
        self.total_constraints.validate(&self.cover.domain, &format!("{base}.total_constraints"))?;
        let (composed, _) = self.composed(cat).map_err(|e| match e {
            Error::Missing(m) => Error::validation(format!("{base}.cover"), m),
            other => other,
        })?;
        for (z, declared) in &self.declared_orbits {
            let derived = composed.orbit_at.get(z).ok_or_else(|| {
                Error::validation(format!("{base}.declared_orbits.{z}"), "not a puncture of the domain")
            })?;
            if derived != declared {
                return Err(Error::validation(
                    format!("{base}.declared_orbits.{z}"),
                    format!("declared `{declared}` but γ_φ(z)^k_z is `{derived}`"),
                ));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> u32 {
        self.cover.degree
    }

    /// The composed curve v∘φ with data assembled by hand: c₁ scales by the
    /// degree, Z(du) = deg·Z(dv) + Z(dφ̇), and every end sits on the k_z-fold
    /// cover of the orbit below it. Covers that only exist as pulled-back
    /// operators are added to the returned catalog.
    pub fn composed(&self, cat: &OrbitCatalog) -> Result<(CurveData, OrbitCatalog)> {
        let mut ext = cat.clone();
        let mut orbit_at = BTreeMap::new();
        for p in &self.cover.domain.punctures {
            let (zeta, k) = fiber(&self.cover, &p.id)?;
            let below = self.base.orbit(cat, zeta)?;
            let up = cat.cover_orbit(below, k)?;
            if ext.get(&up.id).is_err() {
                ext.insert(up.clone())?;
            }
            orbit_at.insert(p.id.clone(), up.id);
        }
        let k = i64::from(self.degree());
        let z_dphi = riemann_hurwitz_punctured(&self.cover)?;
        let u = CurveData {
            id: format!("{}∘{}", self.base.id, self.id),
            surface: self.cover.domain.clone(),
            ambient_dim_n: self.base.ambient_dim_n,
            orbit_at,
            c1_rel: k * self.base.c1_rel,
            maslov_boundary: 0,
            z_du: self.base.z_du * k + Half::from_int(z_dphi),
            somewhere_injective: k == 1 && self.base.somewhere_injective,
            homology_tag: self.base.homology_tag.clone(),
        };
        Ok((u, ext))
    }

    pub fn pulled_back(&self) -> ConstraintSet {
        pullback_constraints(&self.cover, &self.base_constraints)
    }
}

fn fiber<'a>(c: &'a BranchedCover, z: &str) -> Result<(&'a str, u32)> {
    c.fiber_map
        .get(z)
        .map(|f| (f.target.as_str(), f.order))
        .ok_or_else(|| Error::Missing(format!("domain puncture `{z}` has no fiber entry")))
}

/// φ*𝐜′: a domain puncture is constrained exactly when its image is.
pub fn pullback_constraints(cover: &BranchedCover, base_c: &ConstraintSet) -> ConstraintSet {
    ConstraintSet {
        constrained: cover
            .fiber_map
            .iter()
            .filter(|(_, f)| base_c.is_constrained(&f.target))
            .map(|(z, _)| z.clone())
            .collect(),
        delta: base_c.delta,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QTerm {
    pub puncture: String,
    pub k: u32,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnCoverReport {
    pub degree: u32,
    pub cn_base: Half,
    pub z_dphi: i64,
    pub q: i64,
    pub q_terms: Vec<QTerm>,
    /// deg·c_N(v; 𝐜′) + Z(dφ̇) + Q.
    pub cn_cover: Half,
    /// c_N of the composed curve computed from scratch.
    pub cn_direct: Half,
}

fn end_map<'a>(es: Vec<End<'a>>) -> BTreeMap<String, End<'a>> {
    es.into_iter().map(|e| (e.puncture.clone(), e)).collect()
}

pub fn cn_cover(cat: &OrbitCatalog, s: &CoverScenario) -> Result<CnCoverReport> {
    let cn_base = normal_chern(cat, &s.base, &s.base_constraints)?;
    let z_dphi = riemann_hurwitz_punctured(&s.cover)?;
    let below = end_map(ends(cat, &s.base, &s.base_constraints)?);
    let mut q_terms = Vec::new();
    for p in &s.cover.domain.punctures {
        let (zeta, k) = fiber(&s.cover, &p.id)?;
        let e = &below[zeta];
        let q = cat.q_of_cover(e.orbit, e.eps, k, side_of(e.sign).0)?;
        q_terms.push(QTerm { puncture: p.id.clone(), k, q });
    }
    let q: i64 = q_terms.iter().map(|t| t.q).sum();
    let cn_cover = cn_base * i64::from(s.degree()) + Half::from_int(z_dphi + q);
    let (u, ext) = s.composed(cat)?;
    let cn_direct = normal_chern(&ext, &u, &s.pulled_back())?;
    if cn_direct != cn_cover {
        return Err(Error::Consistency(format!(
            "cover `{}`: covering formula gives c_N = {cn_cover}, the composed curve has {cn_direct}",
            s.id
        )));
    }
    Ok(CnCoverReport { degree: s.degree(), cn_base, z_dphi, q, q_terms, cn_cover, cn_direct })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QTildeTerm {
    pub cover_end: String,
    pub other_end: String,
    pub k: u32,
    pub q_tilde: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ICoverReport {
    /// i(u∘φ; φ*𝐜 | v; 𝐜′).
    pub lhs: i64,
    /// deg·i(u; 𝐜 | v; 𝐜′).
    pub rhs: i64,
    pub slack: i64,
    pub terms: Vec<QTildeTerm>,
}

/// The covering inequality for intersection numbers against another curve.
/// `base_pairing` is the relative pairing of the base curve with `other`;
/// the cover's pairing is deg times it.
pub fn i_cover_bound(
    cat: &OrbitCatalog,
    s: &CoverScenario,
    other: &CurveData,
    other_c: &ConstraintSet,
    base_pairing: i64,
) -> Result<ICoverReport> {
    let k = i64::from(s.degree());
    let (u, ext) = s.composed(cat)?;
    let pair = |left: &CurveData, lc: &ConstraintSet, rel: i64| PairingInput {
        left: left.clone(),
        left_constraints: lc.clone(),
        right: other.clone(),
        right_constraints: other_c.clone(),
        relative_pairing: rel,
        end_intersections: Vec::new(),
        geometric_count: None,
    };
    let lhs = intersection_number(&ext, &pair(&u, &s.pulled_back(), k * base_pairing))?;
    let rhs = k * intersection_number(cat, &pair(&s.base, &s.base_constraints, base_pairing))?;

    let below = end_map(ends(cat, &s.base, &s.base_constraints)?);
    let theirs = ends(cat, other, other_c)?;
    let mut terms = Vec::new();
    for p in &s.cover.domain.punctures {
        let (zeta, kz) = fiber(&s.cover, &p.id)?;
        let e = &below[zeta];
        for f in theirs.iter().filter(|f| f.sign == e.sign) {
            let v = match cat.relation(e.orbit, f.orbit)? {
                Relation::Distinct => 0,
                Relation::SameSimple => q_tilde(cat, e.orbit, e.eps, f.orbit, f.eps, kz, e.sign)?,
            };
            if v < 0 {
                return Err(Error::Consistency(format!("q̃ at ({}, {}) is negative", p.id, f.puncture)));
            }
            terms.push(QTildeTerm { cover_end: p.id.clone(), other_end: f.puncture.clone(), k: kz, q_tilde: v });
        }
    }
    let slack: i64 = terms.iter().map(|t| t.q_tilde).sum();
    if lhs < rhs {
        return Err(Error::Consistency(format!(
            "cover `{}`: i(u∘φ | v) = {lhs} < deg·i(u | v) = {rhs}; pairing data is inconsistent",
            s.id
        )));
    }
    if lhs - rhs != slack {
        return Err(Error::Consistency(format!(
            "cover `{}`: i(u∘φ | v) − deg·i(u | v) = {} but the q̃ terms sum to {slack}",
            s.id,
            lhs - rhs
        )));
    }
    Ok(ICoverReport { lhs, rhs, slack, terms })
}

/// i(u∘φ | u∘φ) ≥ deg²·i(u | u), by applying the covering inequality on
/// each side.
pub fn self_cover_bound(cat: &OrbitCatalog, s: &CoverScenario, base_self_pairing: i64) -> Result<(i64, i64)> {
    let k = i64::from(s.degree());
    let (u, ext) = s.composed(cat)?;
    let c = s.pulled_back();
    let lhs = intersection_number(&ext, &PairingInput::self_pairing(&u, &c, k * k * base_self_pairing))?;
    let rhs =
        k * k * intersection_number(cat, &PairingInput::self_pairing(&s.base, &s.base_constraints, base_self_pairing))?;
    let mid = i_cover_bound(cat, s, &s.base, &s.base_constraints, base_self_pairing)?;
    if lhs < k * mid.lhs || mid.lhs < mid.rhs {
        return Err(Error::Consistency(format!("cover `{}`: self-intersection covering chain fails", s.id)));
    }
    Ok((lhs, rhs))
}

/// 𝐜₁ ≤ 𝐜₂: every puncture constrained by 𝐜₁ is constrained by 𝐜₂. Both
/// sets refer to the same curve, so "to the same orbit" is automatic.
pub fn constraint_leq(surface: &PuncturedSurface, c1: &ConstraintSet, c2: &ConstraintSet) -> Result<bool> {
    c1.validate(surface, "left")?;
    c2.validate(surface, "right")?;
    Ok(c1.constrained.is_subset(&c2.constrained))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub cn_weak: Half,
    pub cn_strong: Half,
    pub i_weak: i64,
    pub i_strong: i64,
    pub holds: bool,
}

/// Weaker constraints never decrease c_N or intersection numbers.
pub fn monotonicity(
    cat: &OrbitCatalog,
    u: &CurveData,
    weak: &ConstraintSet,
    strong: &ConstraintSet,
    other: &CurveData,
    other_c: &ConstraintSet,
    pairing: i64,
) -> Result<MonotonicityReport> {
    if !constraint_leq(&u.surface, weak, strong)? {
        return Err(Error::Precondition("monotonicity needs 𝐜⁻ ≤ 𝐜⁺".into()));
    }
    let i_of = |c: &ConstraintSet| {
        intersection_number(
            cat,
            &PairingInput {
                left: u.clone(),
                left_constraints: c.clone(),
                right: other.clone(),
                right_constraints: other_c.clone(),
                relative_pairing: pairing,
                end_intersections: Vec::new(),
                geometric_count: None,
            },
        )
    };
    let cn_weak = normal_chern(cat, u, weak)?;
    let cn_strong = normal_chern(cat, u, strong)?;
    let (i_weak, i_strong) = (i_of(weak)?, i_of(strong)?);
    Ok(MonotonicityReport { cn_weak, cn_strong, i_weak, i_strong, holds: cn_weak >= cn_strong && i_weak >= i_strong })
}

/// One puncture of a candidate underlying curve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidatePuncture {
    pub id: String,
    pub sign: Sign,
    /// Representative orbit γ_ζ; within a Morse-Bott family any member may
    /// occur for an unconstrained ζ.
    pub orbit: String,
    /// Preimages with their branching orders k_z.
    pub preimages: Vec<(String, u32)>,
}

/// A combinatorial sketch of v in u = v∘φ: codomain topology, the puncture
/// identification with branching orders, and the constraints 𝐜′.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverCandidate {
    pub degree: u32,
    pub codomain_genus: u32,
    pub punctures: Vec<CandidatePuncture>,
    /// Z(dφ̇) forced by Riemann-Hurwitz.
    pub interior_branching: i64,
    pub constraints: ConstraintSet,
}

impl CoverCandidate {
    pub fn codomain(&self) -> PuncturedSurface {
        PuncturedSurface::closed(
            self.codomain_genus,
            self.punctures.iter().map(|p| Puncture::new(p.id.clone(), p.sign)).collect(),
        )
    }

    pub fn cover(&self, domain: &PuncturedSurface) -> BranchedCover {
        let mut fiber_map = BTreeMap::new();
        for p in &self.punctures {
            for (z, k) in &p.preimages {
                fiber_map.insert(z.clone(), FiberSpec { target: p.id.clone(), order: *k });
            }
        }
        BranchedCover {
            domain: domain.clone(),
            codomain: self.codomain(),
            degree: self.degree,
            fiber_map,
            interior_branch_count: self.interior_branching as u32,
        }
    }

    /// 𝐜 ≤ φ*𝐜′ with matching orbits: each constrained z maps to a
    /// constrained ζ whose orbit covers to γ_z.
    pub fn dominates(&self, cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<bool> {
        let pulled = pullback_constraints(&self.cover(&u.surface), &self.constraints);
        if !constraint_leq(&u.surface, c, &pulled)? {
            return Ok(false);
        }
        for p in &self.punctures {
            for (z, k) in &p.preimages {
                if c.is_constrained(z) {
                    let up = cat.cover_orbit(cat.get(&p.orbit)?, *k)?;
                    if up.id != u.orbit_at[z] {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Options (k_z, γ with γ^{k_z} = γ_z) at one puncture.
fn root_options(cat: &OrbitCatalog, o: &OrbitClass) -> Vec<(u32, String)> {
    (1..=o.cover)
        .filter(|k| o.cover.is_multiple_of(*k))
        .filter_map(|k| {
            if k == 1 {
                return Some((1, o.id.clone()));
            }
            cat.orbits().find(|r| r.simple() == o.simple() && r.cover == o.cover / k).map(|r| (k, r.id.clone()))
        })
        .collect()
}

struct Slot<'a> {
    z: &'a str,
    sign: Sign,
    k: u32,
    root: &'a OrbitClass,
    constrained: bool,
}

fn compatible(a: &Slot<'_>, b: &Slot<'_>) -> bool {
    if a.sign != b.sign {
        return false;
    }
    if a.root.id == b.root.id {
        return true;
    }
    // Different orbits may share an image only inside one Morse-Bott
    // manifold, and a constrained image is pinned to a single orbit.
    let same_family = a.root.is_morse_bott()
        && b.root.is_morse_bott()
        && a.root.cover == b.root.cover
        && a.root.family.is_some()
        && a.root.family == b.root.family;
    same_family && !(a.constrained && b.constrained)
}

fn partitions(slots: &[Slot<'_>], at: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if at == slots.len() {
        out.push(blocks.clone());
        return;
    }
    for b in 0..blocks.len() {
        if blocks[b].iter().all(|&j| compatible(&slots[j], &slots[at])) {
            blocks[b].push(at);
            partitions(slots, at + 1, blocks, out);
            blocks[b].pop();
        }
    }
    blocks.push(vec![at]);
    partitions(slots, at + 1, blocks, out);
    blocks.pop();
}

fn candidates_for(
    u: &CurveData,
    c: &ConstraintSet,
    cat: &OrbitCatalog,
    choice: &[(u32, String)],
) -> Result<Vec<CoverCandidate>> {
    let ps = &u.surface.punctures;
    let mut slots = Vec::with_capacity(ps.len());
    for (p, (k, root)) in ps.iter().zip(choice) {
        slots.push(Slot { z: &p.id, sign: p.sign, k: *k, root: cat.get(root)?, constrained: c.is_constrained(&p.id) });
    }
    let mut parts = Vec::new();
    partitions(&slots, 0, &mut Vec::new(), &mut parts);
    let chi = euler_char(&u.surface);
    let mut out = Vec::new();
    for blocks in parts {
        let degs: BTreeSet<u32> = blocks.iter().map(|b| b.iter().map(|&j| slots[j].k).sum()).collect();
        if degs.len() != 1 {
            continue;
        }
        let degree = *degs.iter().next().expect("one degree");
        let mut punctures = Vec::new();
        let mut constrained = BTreeSet::new();
        for (i, b) in blocks.iter().enumerate() {
            let id = format!("ζ{}", i + 1);
            let pinned = b.iter().find(|&&j| slots[j].constrained);
            let rep = &slots[*pinned.unwrap_or(&b[0])];
            if pinned.is_some() {
                constrained.insert(id.clone());
            }
            punctures.push(CandidatePuncture {
                id,
                sign: rep.sign,
                orbit: rep.root.id.clone(),
                preimages: b.iter().map(|&j| (slots[j].z.to_string(), slots[j].k)).collect(),
            });
        }
        for g in 0..=u.surface.genus {
            let chi_base = 2 - 2 * i64::from(g) - blocks.len() as i64;
            let interior = -chi + i64::from(degree) * chi_base;
            if interior < 0 || (degree == 1 && interior != 0) {
                continue;
            }
            out.push(CoverCandidate {
                degree,
                codomain_genus: g,
                punctures: punctures.clone(),
                interior_branching: interior,
                constraints: ConstraintSet { constrained: constrained.clone(), delta: c.delta },
            });
        }
    }
    Ok(out)
}

/// All combinatorial possibilities for the underlying simple curve of a
/// multiple cover in the component of `u`, including the trivial degree-1
/// one. Output is sorted canonically. Closed curves only yield the trivial
/// candidate, since without punctures the degree is not bounded here.
pub fn enumerate_cover_candidates(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet) -> Result<Vec<CoverCandidate>> {
    u.validate(cat)?;
    c.validate(&u.surface, "constraints")?;
    let mut choices: Vec<Vec<(u32, String)>> = vec![Vec::new()];
    for p in &u.surface.punctures {
        let opts = root_options(cat, u.orbit(cat, &p.id)?);
        choices = choices
            .into_iter()
            .flat_map(|pre| {
                opts.iter().map(move |o| {
                    let mut v = pre.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect();
    }
    let mut all = Vec::new();
    for r in parallel::map(&choices, |ch| candidates_for(u, c, cat, ch)) {
        all.extend(r?);
    }
    all.sort();
    all.dedup();
    Ok(all)
}
