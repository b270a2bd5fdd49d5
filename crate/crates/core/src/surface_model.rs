//! Punctured-surface combinatorics and branched-cover bookkeeping.
//!
//! A surface is genus, boundary count and an ordered list of signed interior
//! punctures. Covers are purely combinatorial: a degree, a fiber map on the
//! punctures with branching orders, and a declared count of interior branching.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// +1 or −1.
    pub const fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Puncture {
    pub id: String,
    pub sign: Sign,
}

impl Puncture {
    pub fn new(id: impl Into<String>, sign: Sign) -> Self {
        Puncture { id: id.into(), sign }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuncturedSurface {
    pub genus: u32,
    #[serde(default)]
    pub boundary_components: u32,
    #[serde(default)]
    pub punctures: Vec<Puncture>,
}

impl PuncturedSurface {
    pub fn new(genus: u32, boundary_components: u32, punctures: Vec<Puncture>) -> Self {
        PuncturedSurface { genus, boundary_components, punctures }
    }

    /// A genus-`g` closed surface with the given punctures.
    pub fn closed(genus: u32, punctures: Vec<Puncture>) -> Self {
        Self::new(genus, 0, punctures)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, p) in self.punctures.iter().enumerate() {
            if p.id.is_empty() {
                return Err(Error::validation(format!("punctures[{i}]"), "empty puncture id"));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(Error::validation(format!("punctures[{i}]"), format!("duplicate puncture id `{}`", p.id)));
            }
        }
        Ok(())
    }

    pub fn puncture(&self, id: &str) -> Option<&Puncture> {
        self.punctures.iter().find(|p| p.id == id)
    }

    pub fn num_punctures(&self) -> i64 {
        self.punctures.len() as i64
    }

    pub fn count_sign(&self, sign: Sign) -> i64 {
        self.punctures.iter().filter(|p| p.sign == sign).count() as i64
    }

    pub fn is_stable(&self) -> bool {
        euler_char(self) < 0
    }
}

/// χ(Σ̇) = 2 − 2g − m − #Γ.
pub fn euler_char(s: &PuncturedSurface) -> i64 {
    2 - 2 * s.genus as i64 - s.boundary_components as i64 - s.num_punctures()
}

/// The seven surfaces with χ ≥ 0, which carry continuous automorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonStable {
    Sphere,
    Plane,
    Disk,
    Cylinder,
    PuncturedDisk,
    Annulus,
    Torus,
}

impl NonStable {
    pub const ALL: [NonStable; 7] = [
        NonStable::Sphere,
        NonStable::Plane,
        NonStable::Disk,
        NonStable::Cylinder,
        NonStable::PuncturedDisk,
        NonStable::Annulus,
        NonStable::Torus,
    ];

    /// (genus, boundary components, punctures) of the model surface.
    pub const fn topology(self) -> (u32, u32, usize) {
        match self {
            NonStable::Sphere => (0, 0, 0),
            NonStable::Plane => (0, 0, 1),
            NonStable::Disk => (0, 1, 0),
            NonStable::Cylinder => (0, 0, 2),
            NonStable::PuncturedDisk => (0, 1, 1),
            NonStable::Annulus => (0, 2, 0),
            NonStable::Torus => (1, 0, 0),
        }
    }

    /// (automorphism dimension, Teichmüller dimension).
    pub const fn dims(self) -> (i64, i64) {
        match self {
            NonStable::Sphere => (6, 0),
            NonStable::Plane => (4, 0),
            NonStable::Disk => (3, 0),
            NonStable::Cylinder => (2, 0),
            NonStable::PuncturedDisk => (1, 0),
            NonStable::Annulus => (1, 1),
            NonStable::Torus => (2, 2),
        }
    }

    pub fn classify(s: &PuncturedSurface) -> Option<NonStable> {
        let key = (s.genus, s.boundary_components, s.punctures.len());
        NonStable::ALL.into_iter().find(|t| t.topology() == key)
    }
}

/// Real dimension of the moduli space of conformal structures.
pub fn teichmuller_dim(s: &PuncturedSurface) -> i64 {
    match NonStable::classify(s) {
        Some(t) => t.dims().1,
        None => 6 * s.genus as i64 - 6 + 3 * s.boundary_components as i64 + 2 * s.num_punctures(),
    }
}

/// Real dimension of the automorphism group (zero for stable surfaces).
pub fn aut_dim(s: &PuncturedSurface) -> i64 {
    NonStable::classify(s).map_or(0, |t| t.dims().0)
}

/// Image puncture and branching order of one domain puncture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub target: String,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchedCover {
    pub domain: PuncturedSurface,
    pub codomain: PuncturedSurface,
    pub degree: u32,
    /// Domain puncture id → (codomain puncture id, branching order k_z).
    pub fiber_map: BTreeMap<String, FiberSpec>,
    #[serde(default)]
    pub interior_branch_count: u32,
}

impl BranchedCover {
    /// Structural checks: fibers cover everything, signs match, orders sum
    /// to the degree. Riemann-Hurwitz is checked separately.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate().map_err(|e| prefix(e, "domain"))?;
        self.codomain.validate().map_err(|e| prefix(e, "codomain"))?;
        if self.degree == 0 {
            return Err(Error::validation("degree", "degree must be positive"));
        }
        if self.domain.boundary_components != 0 || self.codomain.boundary_components != 0 {
            return Err(Error::validation("cover", "covers are modelled between surfaces without boundary"));
        }
        for key in self.fiber_map.keys() {
            if self.domain.puncture(key).is_none() {
                return Err(Error::validation(format!("fiber_map.{key}"), "not a puncture of the domain"));
            }
        }
        let mut sums: BTreeMap<&str, u32> = self.codomain.punctures.iter().map(|p| (p.id.as_str(), 0)).collect();
        for p in &self.domain.punctures {
            let path = format!("fiber_map.{}", p.id);
            let f = self
                .fiber_map
                .get(&p.id)
                .ok_or_else(|| Error::validation(&path, "domain puncture has no fiber entry"))?;
            if f.order == 0 {
                return Err(Error::validation(&path, "branching order must be ≥ 1"));
            }
            let target = self
                .codomain
                .puncture(&f.target)
                .ok_or_else(|| Error::validation(&path, format!("unknown codomain puncture `{}`", f.target)))?;
            if target.sign != p.sign {
                return Err(Error::validation(&path, "puncture sign differs from its image"));
            }
            *sums.get_mut(f.target.as_str()).expect("present") += f.order;
        }
        for (zeta, total) in sums {
            if total != self.degree {
                return Err(Error::validation(
                    format!("fiber_map[→{zeta}]"),
                    format!("branching orders over `{zeta}` sum to {total}, degree is {}", self.degree),
                ));
            }
        }
        Ok(())
    }

    pub fn order_at(&self, z: &str) -> Option<u32> {
        self.fiber_map.get(z).map(|f| f.order)
    }

    pub fn image_of(&self, z: &str) -> Option<&str> {
        self.fiber_map.get(z).map(|f| f.target.as_str())
    }

    /// Σ_z (k_z − 1) over domain punctures.
    pub fn puncture_branching(&self) -> i64 {
        self.fiber_map.values().map(|f| f.order as i64 - 1).sum()
    }

    /// The identity cover of a surface.
    pub fn identity(s: &PuncturedSurface) -> Self {
        BranchedCover {
            domain: s.clone(),
            codomain: s.clone(),
            degree: 1,
            fiber_map: s
                .punctures
                .iter()
                .map(|p| (p.id.clone(), FiberSpec { target: p.id.clone(), order: 1 }))
                .collect(),
            interior_branch_count: 0,
        }
    }
}

fn prefix(e: Error, p: &str) -> Error {
    match e {
        Error::Validation { path, msg } => Error::Validation { path: format!("{p}.{path}"), msg },
        other => other,
    }
}

/// Z(dφ̇) on the punctured domain, computed from Euler characteristics and
/// cross-checked against the declared branching.
///
/// Two counts must agree: on the punctured surfaces −χ(Σ̇) + k·χ(Σ̇′) sees
/// only interior critical points, while on the closed surfaces the
/// classical formula also picks up the orders k_z − 1 at the punctures.
pub fn riemann_hurwitz_punctured(c: &BranchedCover) -> Result<i64> {
    c.validate()?;
    let k = c.degree as i64;
    let punctured = -euler_char(&c.domain) + k * euler_char(&c.codomain);
    let interior = c.interior_branch_count as i64;
    if punctured != interior {
        return Err(Error::validation(
            "interior_branch_count",
            format!("Euler characteristics give Z(dφ̇) = {punctured}, declared interior branching is {interior}"),
        ));
    }
    let closed = -closed_euler(&c.domain) + k * closed_euler(&c.codomain);
    if closed != interior + c.puncture_branching() {
        return Err(Error::Consistency(format!(
            "closed Riemann-Hurwitz gives {closed}, branch orders sum to {}",
            interior + c.puncture_branching()
        )));
    }
    Ok(punctured)
}

fn closed_euler(s: &PuncturedSurface) -> i64 {
    2 - 2 * i64::from(s.genus)
}

/// Dimension of the space of nearby branched covers modulo reparametrization.
pub fn cover_moduli_dim(c: &BranchedCover) -> Result<i64> {
    Ok(2 * riemann_hurwitz_punctured(c)?)
}

/// The composite φ₂∘φ₁ of `first: Σ₁ → Σ₂` and `second: Σ₂ → Σ₃`.
///
/// The interior branching is assembled from the pieces: every interior
/// critical point of φ₂ has `deg φ₁` preimages counted with multiplicity.
pub fn compose(first: &BranchedCover, second: &BranchedCover) -> Result<BranchedCover> {
    if first.codomain != second.domain {
        return Err(Error::validation("compose", "codomain of the first cover is not the domain of the second"));
    }
    first.validate()?;
    second.validate()?;
    let mut fiber_map = BTreeMap::new();
    for (z, f1) in &first.fiber_map {
        let f2 = &second.fiber_map[&f1.target];
        fiber_map.insert(z.clone(), FiberSpec { target: f2.target.clone(), order: f1.order * f2.order });
    }
    Ok(BranchedCover {
        domain: first.domain.clone(),
        codomain: second.codomain.clone(),
        degree: first.degree * second.degree,
        fiber_map,
        interior_branch_count: first.interior_branch_count + first.degree * second.interior_branch_count,
    })
}
