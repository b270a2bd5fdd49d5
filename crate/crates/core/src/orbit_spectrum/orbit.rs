//! Periodic orbits with winding data, and the catalog that resolves them.
//!
//! An orbit either declares its extremal windings or carries a sampled
//! asymptotic operator. Declared data is trusted (after consistency checks);
//! operator data is resolved through the spectral oracle and cached.

use super::flow::crossing_index;
use super::operator::AsymptoticOperator;
use super::spectrum::{zero_profile, ZeroProfile};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

pub const DEFAULT_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
#[derive(Default)]
pub enum OrbitKind {
    #[default]
    Nondegenerate,
    MorseBott {
        manifold_dim: u8,
        isotropy: u32,
    },
}

/// Declared extremal windings `[α−, α+]`, unperturbed and at ±δ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredWindings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus_delta: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus_delta: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitClass {
    pub id: String,
    /// Underlying simple orbit; defaults to `id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple_id: Option<String>,
    #[serde(default = "one")]
    pub cover: u32,
    #[serde(default)]
    pub kind: OrbitKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<DeclaredWindings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<AsymptoticOperator>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub distinct_from: BTreeSet<String>,
    /// Label of the Morse-Bott manifold containing the orbit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Id of γ_ε^k, the same cover of a generic orbit in the family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generic: Option<String>,
}

fn one() -> u32 {
    1
}

impl OrbitClass {
    pub fn declared(id: &str, alpha_minus: i64, alpha_plus: i64) -> Self {
        OrbitClass {
            id: id.into(),
            simple_id: None,
            cover: 1,
            kind: OrbitKind::Nondegenerate,
            declared: Some(DeclaredWindings { alpha: Some([alpha_minus, alpha_plus]), ..Default::default() }),
            operator: None,
            distinct_from: BTreeSet::new(),
            family: None,
            generic: None,
        }
    }

    pub fn with_operator(id: &str, op: AsymptoticOperator) -> Self {
        OrbitClass {
            id: id.into(),
            simple_id: None,
            cover: 1,
            kind: OrbitKind::Nondegenerate,
            declared: None,
            operator: Some(op),
            distinct_from: BTreeSet::new(),
            family: None,
            generic: None,
        }
    }

    pub fn simple(&self) -> &str {
        self.simple_id.as_deref().unwrap_or(&self.id)
    }

    pub fn is_morse_bott(&self) -> bool {
        matches!(self.kind, OrbitKind::MorseBott { .. })
    }

    pub fn isotropy(&self) -> u32 {
        match self.kind {
            OrbitKind::MorseBott { isotropy, .. } => isotropy,
            OrbitKind::Nondegenerate => 1,
        }
    }

    /// Structural checks that need no other orbit.
    pub fn validate_local(&self) -> Result<()> {
        let v = |field: &str, msg: String| Err(Error::validation(format!("orbits.{}.{field}", self.id), msg));
        if self.id.is_empty() {
            return Err(Error::validation("orbits", "orbit id must be nonempty"));
        }
        if self.cover == 0 {
            return v("cover", "covering number must be positive".into());
        }
        if self.cover > 1 && self.simple() == self.id {
            return v("simple_id", "a multiple cover needs a simple_id different from its id".into());
        }
        if let OrbitKind::MorseBott { manifold_dim, isotropy } = self.kind {
            if !(2..=3).contains(&manifold_dim) {
                return v("kind.manifold_dim", format!("must be 2 or 3, got {manifold_dim}"));
            }
            if isotropy == 0 || !self.cover.is_multiple_of(isotropy) {
                return v("kind.isotropy", format!("isotropy {isotropy} must divide the cover {}", self.cover));
            }
            if manifold_dim == 2 && isotropy > 2 {
                return v("kind.isotropy", "exceptional orbits in 2-dimensional families have isotropy 2".into());
            }
        }
        match (&self.declared, &self.operator) {
            (Some(_), Some(_)) => v("declared", "`declared` and `operator` are mutually exclusive".into()),
            (None, None) => v("declared", "give either `declared` windings or an `operator`".into()),
            (Some(d), None) => self.validate_declared(d),
            (None, Some(_)) => Ok(()),
        }
    }

    fn validate_declared(&self, d: &DeclaredWindings) -> Result<()> {
        let path = format!("orbits.{}.declared", self.id);
        let parity_ok = |w: [i64; 2]| (0..=1).contains(&(w[1] - w[0]));
        for (name, w) in [("alpha", d.alpha), ("plus_delta", d.plus_delta), ("minus_delta", d.minus_delta)] {
            if let Some(w) = w {
                if (name != "alpha" || !self.is_morse_bott()) && !parity_ok(w) {
                    return Err(Error::validation(
                        format!("{path}.{name}"),
                        format!("α+ − α− must be 0 or 1, got {}", w[1] - w[0]),
                    ));
                }
            }
        }
        match self.kind {
            OrbitKind::Nondegenerate => {
                if d.alpha.is_none() {
                    return Err(Error::validation(path, "nondegenerate orbits declare `alpha`"));
                }
                if d.plus_delta.is_some() || d.minus_delta.is_some() {
                    return Err(Error::validation(path, "perturbed windings only apply to Morse-Bott orbits"));
                }
            }
            OrbitKind::MorseBott { manifold_dim, .. } => {
                let (Some(p), Some(m)) = (d.plus_delta, d.minus_delta) else {
                    return Err(Error::validation(path, "Morse-Bott orbits declare `plus_delta` and `minus_delta`"));
                };
                if m[0] < p[0] || m[1] < p[1] {
                    return Err(Error::validation(path, "windings must not decrease from +δ to −δ"));
                }
                // μ(γ−δ) − μ(γ+δ) equals the kernel dimension.
                let jump = (m[0] + m[1]) - (p[0] + p[1]);
                if jump != i64::from(manifold_dim) - 1 {
                    return Err(Error::validation(
                        path,
                        format!(
                            "spectral flow {jump} across zero does not match kernel dimension {}",
                            manifold_dim - 1
                        ),
                    ));
                }
                if let Some(a) = d.alpha {
                    if a != [p[0], m[1]] {
                        return Err(Error::validation(
                            format!("{path}.alpha"),
                            "unperturbed windings must equal [α−(γ+δ), α+(γ−δ)]",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A signed perturbation ε applied to an orbit: γ + ε has operator A + ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perturbation(#[serde(with = "rational")] pub Rational);

impl Perturbation {
    pub const ZERO: Perturbation = Perturbation(Rational::new_raw(0, 1));

    pub fn new(num: i64, den: i64) -> Self {
        Perturbation(Rational::new(num, den))
    }

    pub fn is_positive(&self) -> bool {
        self.0 > Rational::from_integer(0)
    }

    pub fn is_negative(&self) -> bool {
        self.0 < Rational::from_integer(0)
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    pub fn scale(&self, k: u32) -> Self {
        Perturbation(self.0 * Rational::from_integer(i64::from(k)))
    }

    pub fn neg(&self) -> Self {
        Perturbation(-self.0)
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.0)
    }
}

/// Which extremal winding: below (−) or above (+) the perturbed zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremal {
    pub alpha_minus: i64,
    pub alpha_plus: i64,
    pub parity: i64,
}

impl Extremal {
    fn new(alpha_minus: i64, alpha_plus: i64) -> Result<Self> {
        let parity = alpha_plus - alpha_minus;
        if !(0..=1).contains(&parity) {
            return Err(Error::Consistency(format!(
                "extremal windings ({alpha_minus}, {alpha_plus}) differ by {parity}, not 0 or 1"
            )));
        }
        Ok(Extremal { alpha_minus, alpha_plus, parity })
    }

    pub fn side(&self, s: Side) -> i64 {
        match s {
            Side::Minus => self.alpha_minus,
            Side::Plus => self.alpha_plus,
        }
    }

    pub fn cz(&self) -> i64 {
        2 * self.alpha_minus + self.parity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CzMethod {
    Winding,
    CrossingFlow,
}

/// Geometric relation between two orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Both cover the same simple orbit.
    SameSimple,
    Distinct,
}

/// Resolved set of orbits sharing one gap threshold and truncation.
#[derive(Debug)]
pub struct OrbitCatalog {
    pub delta_gap: Rational,
    pub truncation: usize,
    orbits: BTreeMap<String, OrbitClass>,
    profiles: Mutex<HashMap<(u64, u32, usize), Result<ZeroProfile>>>,
}

impl Clone for OrbitCatalog {
    fn clone(&self) -> Self {
        OrbitCatalog {
            delta_gap: self.delta_gap,
            truncation: self.truncation,
            orbits: self.orbits.clone(),
            profiles: Mutex::new(self.profiles.lock().expect("profile cache").clone()),
        }
    }
}

fn op_key(op: &AsymptoticOperator) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for s in op.samples() {
        for x in s {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

impl OrbitCatalog {
    pub fn new(delta_gap: Rational, truncation: usize) -> Self {
        OrbitCatalog { delta_gap, truncation, orbits: BTreeMap::new(), profiles: Mutex::new(HashMap::new()) }
    }

    /// Insert an orbit after its local checks. Cross-references are checked
    /// by [`OrbitCatalog::validate`].
    pub fn insert(&mut self, o: OrbitClass) -> Result<()> {
        o.validate_local()?;
        if self.orbits.contains_key(&o.id) {
            return Err(Error::validation(format!("orbits.{}", o.id), "duplicate orbit id"));
        }
        self.orbits.insert(o.id.clone(), o);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&OrbitClass> {
        self.orbits.get(id).ok_or_else(|| Error::Missing(format!("unknown orbit `{id}`")))
    }

    pub fn orbits(&self) -> impl Iterator<Item = &OrbitClass> {
        self.orbits.values()
    }

    /// Cross-reference and spectral checks over the whole catalog.
    pub fn validate(&self) -> Result<()> {
        if self.delta_gap <= Rational::from_integer(0) {
            return Err(Error::validation("delta_gap", "must be a positive rational"));
        }
        let ids: BTreeSet<&str> = self.orbits.values().flat_map(|o| [o.id.as_str(), o.simple()]).collect();
        for o in self.orbits.values() {
            let base = format!("orbits.{}", o.id);
            for d in &o.distinct_from {
                if !ids.contains(d.as_str()) {
                    return Err(Error::validation(format!("{base}.distinct_from"), format!("unknown orbit `{d}`")));
                }
                if d == o.simple() || d == &o.id {
                    return Err(Error::validation(
                        format!("{base}.distinct_from"),
                        "an orbit is not distinct from itself",
                    ));
                }
            }
            if let Some(g) = &o.generic {
                let gen = self
                    .orbits
                    .get(g)
                    .ok_or_else(|| Error::validation(format!("{base}.generic"), format!("unknown orbit `{g}`")))?;
                if !o.is_morse_bott() {
                    return Err(Error::validation(
                        format!("{base}.generic"),
                        "only Morse-Bott orbits name a generic orbit",
                    ));
                }
                let k = o.cover / o.isotropy();
                if gen.cover != k {
                    return Err(Error::validation(
                        format!("{base}.generic"),
                        format!("generic orbit should be a {k}-fold cover, found {}", gen.cover),
                    ));
                }
                for side in [Side::Minus, Side::Plus] {
                    let (c, ce) = (self.cov_extremal(o, side)?, self.cov_extremal(gen, side)?);
                    if c < ce {
                        return Err(Error::validation(
                            format!("{base}.generic"),
                            format!("cov{}(γ^k) = {c} is smaller than cov of the generic cover, {ce}", side_sym(side)),
                        ));
                    }
                }
            }
            if o.operator.is_some() {
                let p = self.profile(o).map_err(|e| Error::validation(format!("{base}.operator"), e.to_string()))?;
                let expected = match o.kind {
                    OrbitKind::Nondegenerate => 0,
                    OrbitKind::MorseBott { manifold_dim, .. } => usize::from(manifold_dim) - 1,
                };
                if p.kernel_dim() != expected {
                    return Err(Error::validation(
                        format!("{base}.operator"),
                        format!(
                            "kernel dimension {} does not match the declared kind (expected {expected})",
                            p.kernel_dim()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    fn gap_f64(&self) -> f64 {
        rational::to_f64(&self.delta_gap)
    }

    fn profile(&self, o: &OrbitClass) -> Result<ZeroProfile> {
        let op = o.operator.as_ref().ok_or_else(|| Error::Missing(format!("orbit `{}` has no operator", o.id)))?;
        let key = (op_key(op), op.iterate(), self.truncation);
        if let Some(p) = self.profiles.lock().expect("profile cache").get(&key) {
            return p.clone();
        }
        // Eigenvalues of a k-fold iterate inherited from the simple orbit
        // scale by k, and so does the admissible perturbation.
        let gap = self.gap_f64() * f64::from(o.cover.max(1));
        let p = zero_profile(op, self.truncation, gap);
        self.profiles.lock().expect("profile cache").insert(key, p.clone());
        p
    }

    fn check_size(&self, o: &OrbitClass, eps: Perturbation) -> Result<()> {
        let bound = self.delta_gap * Rational::from_integer(i64::from(o.cover));
        if eps.0 >= bound || -eps.0 >= bound {
            return Err(Error::Precondition(format!(
                "|ε| = {} is not below the gap {} for orbit `{}`",
                eps.0, bound, o.id
            )));
        }
        Ok(())
    }

    fn degenerate(o: &OrbitClass, detail: impl Into<String>) -> Error {
        Error::Degenerate { orbit: o.id.clone(), detail: detail.into() }
    }

    /// Extremal windings of γ + ε.
    pub fn alpha_pm(&self, o: &OrbitClass, eps: Perturbation) -> Result<Extremal> {
        self.check_size(o, eps)?;
        if let Some(d) = &o.declared {
            let w = match o.kind {
                OrbitKind::Nondegenerate => d.alpha,
                OrbitKind::MorseBott { .. } if eps.is_positive() => d.plus_delta,
                OrbitKind::MorseBott { .. } if eps.is_negative() => d.minus_delta,
                OrbitKind::MorseBott { .. } => {
                    return Err(Self::degenerate(o, "the unperturbed Morse-Bott operator has a kernel"))
                }
            };
            let w = w.ok_or_else(|| Error::Missing(format!("orbit `{}` lacks windings at ε = {}", o.id, eps.0)))?;
            return Extremal::new(w[0], w[1]);
        }
        let p = self.profile(o)?;
        let (lo, hi) = match (p.kernel.first(), p.kernel.last()) {
            (None, _) | (_, None) => (p.below, p.above),
            (Some(&k0), Some(&k1)) => {
                if eps.is_positive() {
                    (p.below, k0.min(p.above))
                } else if eps.is_negative() {
                    (k1.max(p.below), p.above)
                } else {
                    return Err(Self::degenerate(
                        o,
                        format!("kernel of dimension {} with windings {:?}", p.kernel_dim(), p.kernel),
                    ));
                }
            }
        };
        Extremal::new(lo, hi)
    }

    /// Extremal windings of the nonzero spectrum of the unperturbed operator:
    /// the largest winding strictly below zero and the smallest strictly
    /// above. For nondegenerate orbits this is just `alpha_pm` at ε = 0.
    pub fn alpha_unperturbed(&self, o: &OrbitClass) -> Result<[i64; 2]> {
        if let Some(d) = &o.declared {
            if let Some(a) = d.alpha {
                return Ok(a);
            }
            if let (Some(p), Some(m)) = (d.plus_delta, d.minus_delta) {
                return Ok([p[0], m[1]]);
            }
            return Err(Error::Missing(format!("orbit `{}` lacks unperturbed windings", o.id)));
        }
        let p = self.profile(o)?;
        Ok([p.below, p.above])
    }

    /// One extremal winding, allowing ε = 0 on Morse-Bott orbits.
    pub fn alpha_side(&self, o: &OrbitClass, eps: Perturbation, side: Side) -> Result<i64> {
        if eps.is_zero() && self.kernel_dim(o)? > 0 {
            let a = self.alpha_unperturbed(o)?;
            return Ok(if side == Side::Minus { a[0] } else { a[1] });
        }
        Ok(self.alpha_pm(o, eps)?.side(side))
    }

    pub fn kernel_dim(&self, o: &OrbitClass) -> Result<usize> {
        if o.declared.is_some() {
            return Ok(match o.kind {
                OrbitKind::Nondegenerate => 0,
                OrbitKind::MorseBott { manifold_dim, .. } => usize::from(manifold_dim) - 1,
            });
        }
        Ok(self.profile(o)?.kernel_dim())
    }

    pub fn conley_zehnder(&self, o: &OrbitClass, eps: Perturbation, method: CzMethod) -> Result<i64> {
        match method {
            CzMethod::Winding => Ok(self.alpha_pm(o, eps)?.cz()),
            CzMethod::CrossingFlow => {
                self.check_size(o, eps)?;
                let op = o.operator.as_ref().ok_or_else(|| {
                    Error::Precondition(format!(
                        "orbit `{}` has declared windings; the flow method needs an operator",
                        o.id
                    ))
                })?;
                crossing_index(op, eps.to_f64()).map_err(|e| match e {
                    Error::Degenerate { detail, .. } => Self::degenerate(o, detail),
                    other => other,
                })
            }
        }
    }

    /// A perturbation safely inside the gap, for quantities defined at ±δ.
    pub fn small_delta(&self) -> Perturbation {
        Perturbation(self.delta_gap / Rational::from_integer(2))
    }

    /// ν± = α±(γ − δ) − α±(γ + δ).
    pub fn nu_pm(&self, o: &OrbitClass) -> Result<(i64, i64)> {
        if self.kernel_dim(o)? == 0 {
            return Ok((0, 0));
        }
        let d = self.small_delta();
        let plus = self.alpha_pm(o, d)?;
        let minus = self.alpha_pm(o, d.neg())?;
        let nu = (minus.alpha_minus - plus.alpha_minus, minus.alpha_plus - plus.alpha_plus);
        if !(0..=1).contains(&nu.0) || !(0..=1).contains(&nu.1) {
            return Err(Error::Consistency(format!("ν± = {nu:?} for orbit `{}` lie outside {{0, 1}}", o.id)));
        }
        Ok(nu)
    }

    /// The k-fold cover γᵏ. Operator-backed orbits are pulled back; declared
    /// orbits must have the cover present in the catalog.
    pub fn cover_orbit(&self, o: &OrbitClass, k: u32) -> Result<OrbitClass> {
        if k == 0 {
            return Err(Error::Precondition("covering multiplicity must be positive".into()));
        }
        if k == 1 {
            return Ok(o.clone());
        }
        let total = o.cover * k;
        if let Some(found) = self.orbits.values().find(|c| c.simple() == o.simple() && c.cover == total) {
            return Ok(found.clone());
        }
        let Some(op) = &o.operator else {
            return Err(Error::Missing(format!(
                "no declared {total}-fold cover of simple orbit `{}` (needed as `{}`^{k})",
                o.simple(),
                o.id
            )));
        };
        Ok(OrbitClass {
            id: format!("{}^{total}", o.simple()),
            simple_id: Some(o.simple().to_string()),
            cover: total,
            kind: if o.is_morse_bott() { o.kind } else { OrbitKind::Nondegenerate },
            declared: None,
            operator: Some(op.pullback(k)),
            distinct_from: o.distinct_from.clone(),
            family: o.family.clone(),
            generic: None,
        })
    }

    /// Covering number of the extremal eigenfunctions on the given side:
    /// the largest divisor of the orbit's cover dividing α.
    pub fn cov_extremal(&self, o: &OrbitClass, side: Side) -> Result<u32> {
        let a = self.alpha_unperturbed(o)?;
        let w = if side == Side::Minus { a[0] } else { a[1] };
        Ok(i64::from(o.cover).gcd(&w) as u32)
    }

    /// q± with α±(γᵏ + kε) = k·α±(γ + ε) ∓ q±.
    pub fn q_of_cover(&self, o: &OrbitClass, eps: Perturbation, k: u32, side: Side) -> Result<i64> {
        if k == 1 {
            return Ok(0);
        }
        let base = self.alpha_pm(o, eps)?.side(side);
        let cov = self.cover_orbit(o, k)?;
        let top = self.alpha_pm(&cov, eps.scale(k))?.side(side);
        let kk = i64::from(k);
        let q = match side {
            Side::Minus => top - kk * base,
            Side::Plus => kk * base - top,
        };
        if !(0..kk).contains(&q) {
            return Err(Error::Consistency(format!(
                "q{} = {q} for `{}` covered {k} times lies outside [0, {}]",
                side_sym(side),
                o.id,
                k - 1
            )));
        }
        Ok(q)
    }

    pub fn relation(&self, a: &OrbitClass, b: &OrbitClass) -> Result<Relation> {
        if a.simple() == b.simple() {
            return Ok(Relation::SameSimple);
        }
        let names = |o: &OrbitClass| -> BTreeSet<String> { [o.id.clone(), o.simple().to_string()].into() };
        let declared = |o: &OrbitClass| -> BTreeSet<String> {
            let mut s = o.distinct_from.clone();
            if let Some(simple) = self.orbits.get(o.simple()) {
                s.extend(simple.distinct_from.iter().cloned());
            }
            s
        };
        let (na, nb) = (names(a), names(b));
        if declared(a).iter().any(|x| nb.contains(x)) || declared(b).iter().any(|x| na.contains(x)) {
            return Ok(Relation::Distinct);
        }
        Err(Error::Missing(format!(
            "cannot tell whether orbits `{}` and `{}` are geometrically distinct; add a `distinct_from` entry",
            a.id, b.id
        )))
    }

    /// Shift the trivialization along each named simple orbit by `s` full
    /// turns: windings of γᵏ move by k·s. Declared windings are offset,
    /// operators get S ↦ S + 2πs.
    pub fn with_trivialization_shift(&self, shifts: &BTreeMap<String, i64>) -> Result<OrbitCatalog> {
        let mut out = OrbitCatalog::new(self.delta_gap, self.truncation);
        for o in self.orbits.values() {
            let mut o = o.clone();
            if let Some(&s) = shifts.get(o.simple()) {
                let d = s * i64::from(o.cover);
                if let Some(dw) = &mut o.declared {
                    for w in [&mut dw.alpha, &mut dw.plus_delta, &mut dw.minus_delta].into_iter().flatten() {
                        w[0] += d;
                        w[1] += d;
                    }
                }
                if let Some(op) = &o.operator {
                    // The operator is stored for the simple orbit and pulled
                    // back, so the base shift is s regardless of the cover.
                    let shift = 2.0 * PI * s as f64;
                    let samples = op.samples().iter().map(|m| [m[0] + shift, m[1], m[2] + shift]).collect();
                    o.operator = Some(AsymptoticOperator::new(samples)?.pullback(op.iterate()));
                }
            }
            out.insert(o)?;
        }
        Ok(out)
    }
}

pub(crate) fn side_sym(s: Side) -> &'static str {
    match s {
        Side::Minus => "−",
        Side::Plus => "+",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> OrbitCatalog {
        OrbitCatalog::new(Rational::new(1, 100), 48)
    }

    fn mb_declared(id: &str, cover: u32, plus: [i64; 2], minus: [i64; 2]) -> OrbitClass {
        OrbitClass {
            id: id.into(),
            simple_id: (cover > 1).then(|| "g".to_string()),
            cover,
            kind: OrbitKind::MorseBott { manifold_dim: 3, isotropy: 1 },
            declared: Some(DeclaredWindings { alpha: None, plus_delta: Some(plus), minus_delta: Some(minus) }),
            operator: None,
            distinct_from: BTreeSet::new(),
            family: Some("F".into()),
            generic: None,
        }
    }

    #[test]
    fn scalar_alpha_and_cz() {
        let c = cat();
        let o = OrbitClass::with_operator("a", AsymptoticOperator::scalar(1.0));
        let e = c.alpha_pm(&o, Perturbation::ZERO).unwrap();
        assert_eq!((e.alpha_minus, e.alpha_plus, e.parity), (0, 1, 1));
        assert_eq!(c.conley_zehnder(&o, Perturbation::ZERO, CzMethod::Winding).unwrap(), 1);
        assert_eq!(c.conley_zehnder(&o, Perturbation::ZERO, CzMethod::CrossingFlow).unwrap(), 1);
        let o3 = OrbitClass::with_operator("b", AsymptoticOperator::scalar(3.0 * PI));
        assert_eq!(c.conley_zehnder(&o3, Perturbation::ZERO, CzMethod::Winding).unwrap(), 3);
        // Small perturbations of a nondegenerate orbit change nothing.
        let d = Perturbation::new(1, 200);
        assert_eq!(c.alpha_pm(&o, d).unwrap(), c.alpha_pm(&o, d.neg()).unwrap());
    }

    #[test]
    fn morse_bott_operator() {
        let c = cat();
        let mut o = OrbitClass::with_operator("h", AsymptoticOperator::scalar(2.0 * PI));
        o.kind = OrbitKind::MorseBott { manifold_dim: 3, isotropy: 1 };
        assert!(c.alpha_pm(&o, Perturbation::ZERO).is_err());
        assert_eq!(c.nu_pm(&o).unwrap(), (1, 1));
        let d = c.small_delta();
        let flow = c.conley_zehnder(&o, d.neg(), CzMethod::Winding).unwrap()
            - c.conley_zehnder(&o, d, CzMethod::Winding).unwrap();
        assert_eq!(flow as usize, c.kernel_dim(&o).unwrap());
    }

    #[test]
    fn q_examples() {
        let c = cat();
        let o = OrbitClass::with_operator("p", AsymptoticOperator::scalar(PI));
        assert_eq!(c.q_of_cover(&o, Perturbation::ZERO, 1, Side::Minus).unwrap(), 0);
        assert_eq!(c.q_of_cover(&o, Perturbation::ZERO, 3, Side::Minus).unwrap(), 1);
        assert_eq!(c.q_of_cover(&o, Perturbation::ZERO, 3, Side::Plus).unwrap(), 1);
        let cov = c.cover_orbit(&o, 3).unwrap();
        assert_eq!(cov.cover, 3);
        assert_eq!(c.alpha_pm(&cov, Perturbation::ZERO).unwrap().alpha_minus, 1);
    }

    #[test]
    fn cov_divisibility() {
        let mut c = cat();
        c.insert(OrbitClass::declared("g", 0, 1)).unwrap();
        let mut odd = OrbitClass::declared("g2", 1, 1);
        odd.simple_id = Some("g".into());
        odd.cover = 2;
        c.insert(odd.clone()).unwrap();
        assert_eq!(c.cov_extremal(c.get("g").unwrap(), Side::Minus).unwrap(), 1);
        assert_eq!(c.cov_extremal(&odd, Side::Minus).unwrap(), 1);
        let mut even = odd.clone();
        even.declared = Some(DeclaredWindings { alpha: Some([2, 2]), ..Default::default() });
        assert_eq!(c.cov_extremal(&even, Side::Minus).unwrap(), 2);
    }

    #[test]
    fn declared_validation() {
        let bad = OrbitClass::declared("x", 0, 2);
        assert!(bad.validate_local().is_err());
        assert!(mb_declared("m", 1, [0, 1], [1, 2]).validate_local().is_ok());
        // Kernel of dimension 2 needs a spectral flow of 2.
        assert!(mb_declared("m", 1, [0, 1], [0, 2]).validate_local().is_err());
    }

    #[test]
    fn distinctness() {
        let mut c = cat();
        let mut a = OrbitClass::declared("a", 0, 1);
        a.distinct_from.insert("b".into());
        c.insert(a).unwrap();
        c.insert(OrbitClass::declared("b", 0, 1)).unwrap();
        c.insert(OrbitClass::declared("z", 0, 1)).unwrap();
        let (a, b, z) = (c.get("a").unwrap(), c.get("b").unwrap(), c.get("z").unwrap());
        assert_eq!(c.relation(a, b).unwrap(), Relation::Distinct);
        assert_eq!(c.relation(b, a).unwrap(), Relation::Distinct);
        assert_eq!(c.relation(a, a).unwrap(), Relation::SameSimple);
        assert!(c.relation(a, z).is_err());
    }

    #[test]
    fn shifted_operator_moves_windings() {
        let mut c = cat();
        c.insert(OrbitClass::with_operator("q", AsymptoticOperator::scalar(1.0))).unwrap();
        let s = c.with_trivialization_shift(&[("q".to_string(), 2)].into()).unwrap();
        let before = c.alpha_pm(c.get("q").unwrap(), Perturbation::ZERO).unwrap();
        let after = s.alpha_pm(s.get("q").unwrap(), Perturbation::ZERO).unwrap();
        assert_eq!(after.alpha_minus, before.alpha_minus + 2);
    }
}
