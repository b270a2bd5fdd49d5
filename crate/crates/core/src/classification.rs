//! Stable, nicely embedded curves and the screen that decides what a
//! multiply covered limit of such curves can look like.
//!
//! The screen is combinatorial. It evaluates the integer inequalities that
//! rule out each branch (c_N of the underlying curve equal to 0, index −1,
//! branched or index-0 covers) on the declared data, and reports the first
//! inequality that fails as a witness.

use crate::cover_calculus::{cn_cover, constraint_leq, CoverScenario};
use crate::curve_invariants::{
    ends, fredholm_index, normal_chern, parity_partition, transversality_check, ConstraintSet, CurveData,
};
use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::intersection_theory::{adjunction_sing, cov_totals, intersection_number, PairingInput};
use crate::orbit_spectrum::{side_of, OrbitCatalog, OrbitClass, OrbitKind, Perturbation};
use crate::surface_model::{aut_dim, riemann_hurwitz_punctured};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceDerived {
    pub genus_zero: bool,
    /// #Γ₀ = 1 when ind = 1 and 0 otherwise.
    pub gamma0_rule: bool,
    /// 0 ≤ ind ≤ 2.
    pub index_range: bool,
    pub c_n_value: Half,
    pub c_n_in_range: bool,
    pub sing_zero: bool,
    /// For ind ∈ {1, 2}: c_N = i = cov_∞ = cov_MB = 0. Vacuous for ind = 0.
    pub foliation_rule: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceReport {
    pub is_nice: bool,
    pub failed_conditions: Vec<String>,
    pub index: i64,
    pub self_intersection: i64,
    pub derived: NiceDerived,
}

pub fn is_stable_nicely_embedded(
    cat: &OrbitCatalog,
    u: &CurveData,
    c: &ConstraintSet,
    self_i: i64,
) -> Result<NiceReport> {
    if !u.somewhere_injective {
        return Err(Error::Precondition(format!("curve `{}` is not declared somewhere injective", u.id)));
    }
    let ind = fredholm_index(cat, u, c)?;
    let cn = normal_chern(cat, u, c)?;
    let (g0, _) = parity_partition(cat, u, c)?;
    let mut failed = Vec::new();
    if self_i > 0 {
        failed.push(format!("(1) i(u|u) = {self_i} > 0"));
    }
    if ind < 0 {
        failed.push(format!("(2) ind = {ind} < 0"));
    }
    if Half::from_int(ind) <= cn {
        failed.push(format!("(3) ind = {ind} ≤ c_N = {cn}"));
    }
    let cov = cov_totals(cat, u, c)?;
    let sing_zero = matches!(adjunction_sing(cat, u, c, self_i), Ok(s) if s == Half::ZERO);
    let derived = NiceDerived {
        genus_zero: u.surface.genus == 0,
        gamma0_rule: g0 == i64::from(ind == 1),
        index_range: (0..=2).contains(&ind),
        c_n_value: cn,
        c_n_in_range: cn == Half::from_int(-1) || cn == Half::ZERO,
        sing_zero,
        foliation_rule: ind == 0 || (cn == Half::ZERO && self_i == 0 && cov.cov_infty == 0 && cov.cov_mb == 0),
    };
    let is_nice = failed.is_empty();
    let all = derived.genus_zero
        && derived.gamma0_rule
        && derived.index_range
        && derived.c_n_in_range
        && derived.sing_zero
        && derived.foliation_rule;
    if is_nice && !all {
        return Err(Error::Consistency(format!(
            "curve `{}` meets the three defining inequalities but violates a consequence: {derived:?}",
            u.id
        )));
    }
    Ok(NiceReport { is_nice, failed_conditions: failed, index: ind, self_intersection: self_i, derived })
}

/// z is bad when it is even and γ_z is the double cover of a
/// nondegenerate odd orbit.
pub fn is_bad_puncture(cat: &OrbitCatalog, orbit: &OrbitClass, parity: u8) -> Result<bool> {
    if parity != 0 || orbit.cover != 2 {
        return Ok(false);
    }
    let simple = simple_orbit(cat, orbit)?;
    if cat.kernel_dim(simple)? != 0 {
        return Ok(false);
    }
    Ok(cat.alpha_pm(simple, Perturbation::ZERO)?.parity == 1)
}

fn simple_orbit<'a>(cat: &'a OrbitCatalog, o: &'a OrbitClass) -> Result<&'a OrbitClass> {
    if o.cover == 1 {
        return Ok(o);
    }
    cat.orbits()
        .find(|r| r.simple() == o.simple() && r.cover == 1)
        .ok_or_else(|| Error::Missing(format!("simple orbit `{}` under `{}` is not in the catalog", o.simple(), o.id)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvenCase {
    NondegenerateEven,
    /// A 2-dimensional Morse-Bott family; ν∓ = 0 exactly at constrained ends.
    MorseBottSurface,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvenAnalysis {
    pub puncture: String,
    pub orbit: String,
    pub case: EvenCase,
    pub cover: u32,
    pub bad: bool,
}

/// Classification of the unique even puncture of a nicely embedded index-1
/// curve.
pub fn unique_even_analysis(cat: &OrbitCatalog, u: &CurveData, c: &ConstraintSet, self_i: i64) -> Result<EvenAnalysis> {
    let nice = is_stable_nicely_embedded(cat, u, c, self_i)?;
    if !nice.is_nice || nice.index != 1 {
        return Err(Error::Precondition(format!(
            "curve `{}` is not a nicely embedded index-1 curve (index {}, failed {:?})",
            u.id, nice.index, nice.failed_conditions
        )));
    }
    let mut even = Vec::new();
    for e in ends(cat, u, c)? {
        if cat.alpha_pm(e.orbit, e.eps)?.parity == 0 {
            even.push(e);
        }
    }
    let [e] = even.as_slice() else {
        return Err(Error::Consistency(format!("curve `{}` has {} even punctures at index 1", u.id, even.len())));
    };
    let o = e.orbit;
    if o.cover > 2 {
        return Err(Error::Consistency(format!(
            "even puncture `{}` sits on a {}-fold cover; only simple or double covers are possible",
            e.puncture, o.cover
        )));
    }
    let case = if cat.kernel_dim(o)? == 0 {
        EvenCase::NondegenerateEven
    } else {
        let OrbitKind::MorseBott { manifold_dim: 2, .. } = o.kind else {
            return Err(Error::Consistency(format!(
                "even puncture `{}` on a degenerate orbit outside a 2-dimensional Morse-Bott family",
                e.puncture
            )));
        };
        let (nm, np) = cat.nu_pm(o)?;
        let nu = if side_of(e.sign).0 == crate::orbit_spectrum::Side::Minus { nm } else { np };
        if (nu == 0) != e.constrained() {
            return Err(Error::Consistency(format!(
                "even puncture `{}`: ν = {nu} but the end is {}",
                e.puncture,
                if e.constrained() { "constrained" } else { "unconstrained" }
            )));
        }
        EvenCase::MorseBottSurface
    };
    let bad = is_bad_puncture(cat, o, 0)?;
    if o.cover == 2 && !bad {
        return Err(Error::Consistency(format!(
            "even puncture `{}` is doubly covered but its simple orbit is not nondegenerate and odd",
            e.puncture
        )));
    }
    Ok(EvenAnalysis { puncture: e.puncture.clone(), orbit: o.id.clone(), case, cover: o.cover, bad })
}

/// Which genericity assumption stands behind the index bound for simple
/// curves: a generic homotopy allows index −1, a fixed generic J does not.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Genericity {
    #[default]
    Homotopy,
    FixedJ,
}

impl Genericity {
    pub fn index_lower_bound(self) -> i64 {
        match self {
            Genericity::Homotopy => -1,
            Genericity::FixedJ => 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenOptions {
    #[serde(default)]
    pub genericity: Genericity,
    /// Relative self-pairing v •_Φ v, enabling the direct check that the
    /// underlying curve is nicely embedded.
    #[serde(default)]
    pub base_self_pairing: Option<i64>,
}

/// The inequality that rules a branch out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub step: u8,
    pub inequality: String,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    NicelyEmbedded,
    UnbranchedCoverOfIndexZero,
    Contradiction { witness: Witness },
}

/// The dimension comparison behind the immersion step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionComparison {
    pub z_du: Half,
    /// Kernel upper bound from the line-bundle estimate, modulo automorphisms.
    pub kernel_upper: i64,
    /// 2Z(dφ̇) + dim Aut + (1 for a homotopy of J).
    pub cover_family_dim: i64,
    /// kernel_upper + dim Aut + (1 for a homotopy of J).
    pub kernel_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenVerdict {
    pub outcome: Outcome,
    pub hypotheses: Vec<String>,
    pub notes: Vec<String>,
    pub dimension: Option<DimensionComparison>,
}

impl ScreenVerdict {
    fn contradiction(
        step: u8,
        inequality: impl Into<String>,
        lhs: i64,
        rhs: i64,
        hyp: Vec<String>,
        notes: Vec<String>,
    ) -> Self {
        ScreenVerdict {
            outcome: Outcome::Contradiction { witness: Witness { step, inequality: inequality.into(), lhs, rhs } },
            hypotheses: hyp,
            notes,
            dimension: None,
        }
    }
}

fn to_int(h: Half, what: &str) -> Result<i64> {
    h.to_int().ok_or_else(|| Error::Consistency(format!("{what} = {h} is not an integer")))
}

/// Decide whether u = v∘φ can be a limit of stable, nicely embedded curves
/// with constraints `limit_c`, following the branch eliminations for the
/// underlying curve v.
pub fn degeneration_screen(
    cat: &OrbitCatalog,
    s: &CoverScenario,
    limit_c: &ConstraintSet,
    opts: &ScreenOptions,
) -> Result<ScreenVerdict> {
    s.validate(cat)?;
    let bound = opts.genericity.index_lower_bound();
    let mut hyp = vec![format!("genericity ({:?}): ind(v; c') ≥ {bound}", opts.genericity)];
    let mut notes = Vec::new();
    if s.degree() == 1 {
        notes.push("degree 1: not a multiple cover".into());
        return Ok(ScreenVerdict { outcome: Outcome::NicelyEmbedded, hypotheses: hyp, notes, dimension: None });
    }
    if !s.base.somewhere_injective {
        return Err(Error::Precondition(format!("base curve `{}` must be somewhere injective", s.base.id)));
    }
    let k = i64::from(s.degree());
    let ind_v = fredholm_index(cat, &s.base, &s.base_constraints)?;
    if ind_v < bound {
        return Ok(ScreenVerdict::contradiction(0, "ind(v; c') ≥ genericity bound", ind_v, bound, hyp, notes));
    }
    let (u, ext) = s.composed(cat)?;
    limit_c.validate(&u.surface, "limit_constraints")?;
    let pulled = s.pulled_back();
    if !constraint_leq(&u.surface, limit_c, &pulled)? {
        return Ok(ScreenVerdict::contradiction(
            0,
            "c ≤ φ*c' (constrained ends of u lie over constrained ends of v)",
            0,
            1,
            hyp,
            notes,
        ));
    }
    hyp.push(
        "u is a limit of stable, nicely embedded curves: i(u; c | u; c) ≤ 0, 0 ≤ ind(u; c) ≤ 2, c_N(u; c) ≤ 0".into(),
    );
    let ind_u = fredholm_index(&ext, &u, limit_c)?;
    let cn_u = to_int(normal_chern(&ext, &u, limit_c)?, "c_N(u; c)")?;
    if !(0..=2).contains(&ind_u) {
        return Ok(ScreenVerdict::contradiction(0, "0 ≤ ind(u; c) ≤ 2", ind_u, 2, hyp, notes));
    }
    if cn_u > 0 {
        return Ok(ScreenVerdict::contradiction(0, "c_N(u; c) ≤ 0", cn_u, 0, hyp, notes));
    }
    let cov = cov_totals(&ext, &u, limit_c)?;
    let covs = cov.cov_infty + cov.cov_mb;
    let rep = cn_cover(cat, s)?;
    let cn_v = to_int(rep.cn_base, "c_N(v; c')")?;
    let cn_pulled = to_int(rep.cn_cover, "c_N(u; φ*c')")?;
    notes.push(format!("c_N(u; φ*c') = {k}·{cn_v} + {} + {} = {cn_pulled}", rep.z_dphi, rep.q));
    if cn_u < cn_pulled {
        return Ok(ScreenVerdict::contradiction(
            0,
            "c_N(u; c) ≥ c_N(u; φ*c') (monotonicity)",
            cn_u,
            cn_pulled,
            hyp,
            notes,
        ));
    }

    // Step 1: c_N(v) = 0 is impossible.
    if cn_v >= 0 {
        if cn_pulled > 0 {
            return Ok(ScreenVerdict::contradiction(
                1,
                "0 ≥ c_N(u; c) ≥ k·c_N(v; c') + Z(dφ̇) + Q",
                0,
                cn_pulled,
                hyp,
                notes,
            ));
        }
        let branching: i64 = s.cover.puncture_branching();
        notes.push(format!("Σ(k_z − 1) = {branching}, cov_∞ + cov_MB = {covs}"));
        if covs < branching {
            return Ok(ScreenVerdict::contradiction(
                1,
                "cov_∞ + cov_MB ≥ Σ(k_z − 1) (forced by q = 0 and divisibility)",
                covs,
                branching,
                hyp,
                notes,
            ));
        }
        return Ok(ScreenVerdict::contradiction(
            1,
            "i(u; c | u; c) ≥ c_N + cov_∞ + cov_MB ≥ 2k − 2 must be ≤ 0",
            cn_u + covs,
            0,
            hyp,
            notes,
        ));
    }

    // Step 2: index −1 for v is impossible.
    if ind_v == -1 {
        let (g0_u, _) = parity_partition(&ext, &u, limit_c)?;
        notes.push(format!("ind(u; c) = {ind_u}, #Γ₀(u) = {g0_u}, cov_∞ + cov_MB = {covs}"));
        if covs < k - 1 {
            return Ok(ScreenVerdict::contradiction(
                2,
                "cov_∞ + cov_MB ≥ k − 1 over the even puncture",
                covs,
                k - 1,
                hyp,
                notes,
            ));
        }
        return Ok(ScreenVerdict::contradiction(
            2,
            "i(u; c | u; c) ≥ c_N + cov_∞ + cov_MB ≥ k − 1 must be ≤ 0",
            cn_u + covs,
            0,
            hyp,
            notes,
        ));
    }

    // Step 3: v is nicely embedded.
    if let Some(p) = opts.base_self_pairing {
        let i_v = intersection_number(cat, &PairingInput::self_pairing(&s.base, &s.base_constraints, p))?;
        notes.push(format!("i(v; c' | v; c') = {i_v}"));
        if i_v > 0 {
            return Ok(ScreenVerdict::contradiction(3, "0 ≥ i(u|u) ≥ k²·i(v|v)", k * k * i_v, 0, hyp, notes));
        }
        let nice = is_stable_nicely_embedded(cat, &s.base, &s.base_constraints, i_v)?;
        if !nice.is_nice {
            return Ok(ScreenVerdict::contradiction(
                3,
                format!("v nicely embedded: {:?}", nice.failed_conditions),
                0,
                1,
                hyp,
                notes,
            ));
        }
    } else {
        notes.push("i(v|v) ≤ 0 follows from i(u|u) ≤ 0; no self-pairing declared for a direct check".into());
    }

    // Step 4: at index 1 the even puncture of u must be bad.
    if ind_u == 1 {
        let mut bad = false;
        for e in ends(&ext, &u, limit_c)? {
            if ext.alpha_pm(e.orbit, e.eps)?.parity == 0 {
                bad |= is_bad_puncture(&ext, e.orbit, 0)?;
            }
        }
        if !bad {
            return Ok(ScreenVerdict::contradiction(4, "index-1 cover has a bad even puncture", 0, 1, hyp, notes));
        }
        notes.push("the even puncture of u is bad".into());
    }

    // Step 5: u is immersed and has positive index.
    let z_dphi = riemann_hurwitz_punctured(&s.cover)?;
    let t = transversality_check(&ext, &u, limit_c)?;
    let aut = aut_dim(&u.surface);
    let extra = i64::from(opts.genericity == Genericity::Homotopy);
    let dim = DimensionComparison {
        z_du: u.z_du,
        kernel_upper: t.kernel_upper,
        cover_family_dim: 2 * z_dphi + aut + extra,
        kernel_bound: t.kernel_upper + aut + extra,
    };
    if u.z_du > Half::ZERO || ind_u == 0 {
        let mut v = ScreenVerdict::contradiction(
            5,
            "kernel bound equals the dimension of the branched-cover family, so nearby curves are covers",
            dim.kernel_bound,
            dim.cover_family_dim,
            hyp,
            notes,
        );
        v.dimension = Some(dim);
        return Ok(v);
    }
    notes.push(format!(
        "u is immersed with ind(u; c) = {ind_u}; regular by the transversality criterion: {}",
        t.criterion_met
    ));
    Ok(ScreenVerdict { outcome: Outcome::UnbranchedCoverOfIndexZero, hypotheses: hyp, notes, dimension: Some(dim) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionTerm {
    pub puncture: String,
    pub k: u32,
    /// q∓(γ_φ(z) ± c′; k_z).
    pub q: i64,
    /// Whether ±α∓(γ_z ± c_z) equals ±k_z·α∓(γ_φ(z) ± c′) − q (the chain is
    /// tight at the weaker constraint).
    pub tight: bool,
    /// α∓(γ_z ± c_z) ∈ k_z ℤ.
    pub divisible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub fires: bool,
    pub terms: Vec<ObstructionTerm>,
    pub cov_total: i64,
    pub reason: String,
}

/// Decide the obstruction from its ingredients: some branched end must
/// break the chain (q > 0 or a strict constraint inequality), or a
/// divisible end must show up in the covering counts.
pub fn obstruction_fires(terms: &[ObstructionTerm], cov_total: i64) -> (bool, String) {
    if terms.is_empty() {
        return (false, "no puncture with k_z > 1".into());
    }
    if let Some(t) = terms.iter().find(|t| t.q > 0) {
        return (true, format!("q = {} > 0 at `{}` leaves no zero-free kernel section", t.q, t.puncture));
    }
    if let Some(t) = terms.iter().find(|t| !t.tight) {
        return (true, format!("winding chain is strict at `{}`", t.puncture));
    }
    if let Some(t) = terms.iter().find(|t| !t.divisible) {
        return (true, format!("α at `{}` is not divisible by k_z = {}", t.puncture, t.k));
    }
    if cov_total > 0 {
        return (true, format!("divisibility forces cov_∞ + cov_MB = {cov_total} > 0, contradicting c_N = 0"));
    }
    (false, "all branched ends divisible with vanishing covering terms".into())
}

/// Whether the zero-free kernel sections of the cover fail to descend to
/// the underlying curve, which makes multiple covers isolated.
pub fn kernel_section_cover_obstruction(
    cat: &OrbitCatalog,
    s: &CoverScenario,
    limit_c: &ConstraintSet,
) -> Result<ObstructionReport> {
    s.validate(cat)?;
    if riemann_hurwitz_punctured(&s.cover)? != 0 {
        return Err(Error::Precondition("the punctured cover must be unbranched".into()));
    }
    let (u, ext) = s.composed(cat)?;
    let ind = fredholm_index(&ext, &u, limit_c)?;
    if !(1..=2).contains(&ind) {
        return Err(Error::Precondition(format!("ind(u; c) = {ind}, the obstruction is stated for index 1 or 2")));
    }
    let below: std::collections::BTreeMap<_, _> =
        ends(cat, &s.base, &s.base_constraints)?.into_iter().map(|e| (e.puncture.clone(), e)).collect();
    let mut terms = Vec::new();
    for e in ends(&ext, &u, limit_c)? {
        let f = &s.cover.fiber_map[&e.puncture];
        if f.order < 2 {
            continue;
        }
        let b = &below[&f.target];
        let (side, w) = side_of(e.sign);
        let q = cat.q_of_cover(b.orbit, b.eps, f.order, side)?;
        let top = ext.alpha_side(e.orbit, e.eps, side)?;
        let base = cat.alpha_side(b.orbit, b.eps, side)?;
        let kk = i64::from(f.order);
        terms.push(ObstructionTerm {
            puncture: e.puncture.clone(),
            k: f.order,
            q,
            tight: w * kk * base == w * top - q,
            divisible: top % kk == 0,
        });
    }
    let cov = cov_totals(&ext, &u, limit_c)?;
    let cov_total = cov.cov_infty + cov.cov_mb;
    let (fires, reason) = obstruction_fires(&terms, cov_total);
    Ok(ObstructionReport { fires, terms, cov_total, reason })
}
