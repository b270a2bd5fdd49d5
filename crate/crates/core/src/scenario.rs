//! Scenario files: loading with located errors, query dispatch through a
//! registry, and deterministic reports in JSON or text form.

use crate::classification::{
    degeneration_screen, is_bad_puncture, is_stable_nicely_embedded, kernel_section_cover_obstruction,
    unique_even_analysis, Genericity, ScreenOptions,
};
use crate::cover_calculus::{
    cn_cover, constraint_leq, enumerate_cover_candidates, i_cover_bound, monotonicity, pullback_constraints,
    CoverScenario,
};
use crate::curve_invariants::{
    adjusted_c1_zero_budget, critical_bound_check, fredholm_index, index_normal_operator, k_bound, line_bundle_bounds,
    normal_chern, parity_partition, transversality_check, ConstraintSet, CurveData,
};
use crate::error::{Error, Result};
use crate::halfint::Half;
use crate::intersection_theory::{
    adjunction_sing, asymptotic_intersection, cov_totals, intersection_number, sing_decomposition, EndPairValue,
    PairingInput, SelfEndData,
};
use crate::orbit_spectrum::{
    delta_mb, discretized_spectrum, omega_pair, omega_self, q_tilde, CzMethod, OrbitCatalog, OrbitClass, Perturbation,
    Side, DEFAULT_TRUNCATION,
};
use crate::parallel;
use crate::rational::{self, Rational};
use crate::surface_model::{
    aut_dim, compose, cover_moduli_dim, euler_char, riemann_hurwitz_punctured, teichmuller_dim, BranchedCover,
    FiberSpec, NonStable, PuncturedSurface, Sign,
};
use crate::zero_count::{doubling_check, loop_winding, zero_count, BundleData, SampledLoop};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides the default truncation.
pub const TRUNCATION_ENV: &str = "HOLOCALC_TRUNCATION";

/// The bundled foliation scenario (two curves and the squaring cover).
pub const FOLIATION_SCENARIO: &str = include_str!("../scenarios/foliation.scn");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDecl {
    pub curve: CurveData,
    #[serde(default)]
    pub constraints: ConstraintSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingDecl {
    pub id: String,
    pub left: String,
    pub right: String,
    pub relative_pairing: i64,
    #[serde(default)]
    pub left_constraints: Option<ConstraintSet>,
    #[serde(default)]
    pub right_constraints: Option<ConstraintSet>,
    #[serde(default)]
    pub end_intersections: Vec<EndPairValue>,
    #[serde(default)]
    pub geometric_count: Option<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDecl {
    pub id: String,
    /// Base curve v; the codomain is its surface.
    #[serde(default)]
    pub base: Option<String>,
    /// Required when there is no base curve.
    #[serde(default)]
    pub codomain: Option<PuncturedSurface>,
    pub domain: PuncturedSurface,
    pub degree: u32,
    pub fiber_map: BTreeMap<String, FiberSpec>,
    #[serde(default)]
    pub interior_branch_count: u32,
    /// Constraints of the covering curve; default φ*𝐜′.
    #[serde(default)]
    pub total_constraints: Option<ConstraintSet>,
    #[serde(default)]
    pub declared_orbits: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDecl {
    pub id: String,
    pub op: String,
    #[serde(default = "empty_args")]
    pub args: Value,
}

fn empty_args() -> Value {
    json!({})
}

/// The document as written.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(with = "rational")]
    pub delta_gap: Rational,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub orbits: Vec<OrbitClass>,
    #[serde(default)]
    pub surfaces: BTreeMap<String, PuncturedSurface>,
    #[serde(default)]
    pub curves: Vec<CurveDecl>,
    #[serde(default)]
    pub pairings: Vec<PairingDecl>,
    #[serde(default)]
    pub covers: Vec<CoverDecl>,
    #[serde(default)]
    pub queries: Vec<QueryDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationSource {
    Default,
    Scenario,
    Environment,
    CommandLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub value: usize,
    pub source: TruncationSource,
}

/// A fully resolved and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub catalog: OrbitCatalog,
    pub truncation: TruncationInfo,
    pub surfaces: BTreeMap<String, PuncturedSurface>,
    pub curves: BTreeMap<String, CurveDecl>,
    pub pairings: BTreeMap<String, PairingInput>,
    pub covers: BTreeMap<String, (BranchedCover, Option<CoverScenario>)>,
    pub queries: Vec<QueryDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadError {
    Io(String),
    /// Every schema or semantic problem found, each with its location.
    Invalid(Vec<Error>),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "I/O error: {m}"),
            LoadError::Invalid(es) => {
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
        }
    }
}

/// Overrides applied while loading, highest priority first.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub truncation: Option<usize>,
    /// Read the environment override; off in tests that need isolation.
    pub use_env: bool,
}

pub fn load_scenario(path: &Path, opts: LoadOptions) -> std::result::Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, opts)
}

pub fn parse_scenario(text: &str, opts: LoadOptions) -> std::result::Result<Scenario, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        LoadError::Invalid(vec![Error::validation(if path == "." { "$".into() } else { path }, e.inner().to_string())])
    })?;
    resolve(file, opts).map_err(LoadError::Invalid)
}

fn env_truncation() -> std::result::Result<Option<usize>, Error> {
    match std::env::var(TRUNCATION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::validation(TRUNCATION_ENV, format!("`{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn resolve(file: ScenarioFile, opts: LoadOptions) -> std::result::Result<Scenario, Vec<Error>> {
    let mut errs = Vec::new();
    let env = if opts.use_env {
        env_truncation().unwrap_or_else(|e| {
            errs.push(e);
            None
        })
    } else {
        None
    };
    let truncation = match (opts.truncation, env, file.truncation) {
        (Some(v), _, _) => TruncationInfo { value: v, source: TruncationSource::CommandLine },
        (None, Some(v), _) => TruncationInfo { value: v, source: TruncationSource::Environment },
        (None, None, Some(v)) => TruncationInfo { value: v, source: TruncationSource::Scenario },
        _ => TruncationInfo { value: DEFAULT_TRUNCATION, source: TruncationSource::Default },
    };
    if truncation.value == 0 {
        errs.push(Error::validation("truncation", "must be positive"));
    }
    let mut catalog = OrbitCatalog::new(file.delta_gap, truncation.value);
    for (i, o) in file.orbits.into_iter().enumerate() {
        if let Err(e) = catalog.insert(o) {
            errs.push(relocate(e, &format!("orbits[{i}]")));
        }
    }
    if errs.is_empty() {
        if let Err(e) = catalog.validate() {
            errs.push(e);
        }
    }
    let mut surfaces = BTreeMap::new();
    for (name, s) in file.surfaces {
        match s.validate() {
            Ok(()) => {
                surfaces.insert(name, s);
            }
            Err(e) => errs.push(relocate(e, &format!("surfaces.{name}"))),
        }
    }
    let mut curves = BTreeMap::new();
    for (i, d) in file.curves.into_iter().enumerate() {
        let id = d.curve.id.clone();
        let checked = d
            .curve
            .validate(&catalog)
            .and_then(|()| d.constraints.validate(&d.curve.surface, &format!("curves.{id}.constraints")));
        if let Err(e) = checked {
            errs.push(e);
        } else if curves.insert(id.clone(), d).is_some() {
            errs.push(Error::validation(format!("curves[{i}].curve.id"), format!("duplicate curve id `{id}`")));
        }
    }
    let mut pairings = BTreeMap::new();
    for p in file.pairings {
        let path = format!("pairings.{}", p.id);
        let (Some(l), Some(r)) = (curves.get(&p.left), curves.get(&p.right)) else {
            errs.push(Error::validation(path, "left and right must name declared curves"));
            continue;
        };
        let lc = p.left_constraints.unwrap_or_else(|| l.constraints.clone());
        let rc = p.right_constraints.unwrap_or_else(|| r.constraints.clone());
        for (side, c, cu) in [("left", &lc, l), ("right", &rc, r)] {
            if let Err(e) = c.validate(&cu.curve.surface, &format!("{path}.{side}_constraints")) {
                errs.push(e);
            }
        }
        let input = PairingInput {
            left: l.curve.clone(),
            left_constraints: lc,
            right: r.curve.clone(),
            right_constraints: rc,
            relative_pairing: p.relative_pairing,
            end_intersections: p.end_intersections,
            geometric_count: p.geometric_count,
        };
        if pairings.insert(p.id.clone(), input).is_some() {
            errs.push(Error::validation(path, "duplicate pairing id"));
        }
    }
    let mut covers = BTreeMap::new();
    for d in file.covers {
        let path = format!("covers.{}", d.id);
        match resolve_cover(&d, &curves, &catalog) {
            Ok(c) => {
                if covers.insert(d.id.clone(), c).is_some() {
                    errs.push(Error::validation(path, "duplicate cover id"));
                }
            }
            Err(e) => errs.push(e),
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for (i, q) in file.queries.iter().enumerate() {
        let path = format!("queries[{i}]");
        if !seen.insert(q.id.clone()) {
            errs.push(Error::validation(format!("{path}.id"), format!("duplicate query id `{}`", q.id)));
        }
        match find_op(&q.op) {
            None => errs.push(Error::validation(format!("{path}.op"), format!("unknown query kind `{}`", q.op))),
            Some(op) => {
                if let Err(m) = (op.check)(&q.args) {
                    errs.push(Error::validation(format!("{path}.args"), m));
                }
            }
        }
    }
    let s = Scenario {
        name: file.name.unwrap_or_else(|| "scenario".into()),
        catalog,
        truncation,
        surfaces,
        curves,
        pairings,
        covers,
        queries: file.queries,
    };
    for (i, q) in s.queries.iter().enumerate() {
        if let Some(op) = find_op(&q.op) {
            if let Ok(refs) = (op.refs)(&q.args) {
                for (kind, id) in refs {
                    if !s.has(kind, &id) {
                        errs.push(Error::validation(format!("queries[{i}].args"), format!("unknown {kind} `{id}`")));
                    }
                }
            }
        }
    }
    if errs.is_empty() {
        Ok(s)
    } else {
        Err(errs)
    }
}

fn relocate(e: Error, base: &str) -> Error {
    match e {
        Error::Validation { path, msg } => Error::validation(format!("{base}.{path}"), msg),
        other => Error::validation(base, other.to_string()),
    }
}

fn resolve_cover(
    d: &CoverDecl,
    curves: &BTreeMap<String, CurveDecl>,
    cat: &OrbitCatalog,
) -> Result<(BranchedCover, Option<CoverScenario>)> {
    let path = format!("covers.{}", d.id);
    let base = match &d.base {
        Some(b) => Some(
            curves.get(b).ok_or_else(|| Error::validation(format!("{path}.base"), format!("unknown curve `{b}`")))?,
        ),
        None => None,
    };
    let codomain = match (&d.codomain, base) {
        (Some(c), _) => c.clone(),
        (None, Some(b)) => b.curve.surface.clone(),
        (None, None) => return Err(Error::validation(path, "a cover needs a base curve or a codomain")),
    };
    let cover = BranchedCover {
        domain: d.domain.clone(),
        codomain,
        degree: d.degree,
        fiber_map: d.fiber_map.clone(),
        interior_branch_count: d.interior_branch_count,
    };
    riemann_hurwitz_punctured(&cover).map_err(|e| relocate(e, &path))?;
    let Some(b) = base else {
        return Ok((cover, None));
    };
    let sc = CoverScenario {
        id: d.id.clone(),
        total_constraints: d.total_constraints.clone().unwrap_or_else(|| pullback_constraints(&cover, &b.constraints)),
        cover: cover.clone(),
        base: b.curve.clone(),
        base_constraints: b.constraints.clone(),
        declared_orbits: d.declared_orbits.clone(),
    };
    sc.validate(cat)?;
    Ok((cover, Some(sc)))
}

impl Scenario {
    fn has(&self, kind: &str, id: &str) -> bool {
        match kind {
            "curve" => self.curves.contains_key(id),
            "orbit" => self.catalog.get(id).is_ok(),
            "pairing" => self.pairings.contains_key(id),
            "cover" => self.covers.contains_key(id),
            "surface" => self.surfaces.contains_key(id) || self.curves.contains_key(id),
            _ => false,
        }
    }

    fn curve(&self, id: &str) -> Result<&CurveDecl> {
        self.curves.get(id).ok_or_else(|| Error::Missing(format!("unknown curve `{id}`")))
    }

    fn curve_with(&self, id: &str, c: &Option<ConstraintSet>) -> Result<(&CurveData, ConstraintSet)> {
        let d = self.curve(id)?;
        let c = c.clone().unwrap_or_else(|| d.constraints.clone());
        c.validate(&d.curve.surface, "constraints")?;
        Ok((&d.curve, c))
    }

    fn orbit(&self, id: &str) -> Result<&OrbitClass> {
        self.catalog.get(id)
    }

    fn pairing(&self, id: &str) -> Result<&PairingInput> {
        self.pairings.get(id).ok_or_else(|| Error::Missing(format!("unknown pairing `{id}`")))
    }

    /// A named surface, or the surface of a named curve.
    fn surface(&self, id: &str) -> Result<&PuncturedSurface> {
        self.surfaces
            .get(id)
            .or_else(|| self.curves.get(id).map(|d| &d.curve.surface))
            .ok_or_else(|| Error::Missing(format!("unknown surface `{id}`")))
    }

    fn cover(&self, id: &str) -> Result<&BranchedCover> {
        self.covers.get(id).map(|c| &c.0).ok_or_else(|| Error::Missing(format!("unknown cover `{id}`")))
    }

    fn cover_scenario(&self, id: &str) -> Result<&CoverScenario> {
        self.covers
            .get(id)
            .ok_or_else(|| Error::Missing(format!("unknown cover `{id}`")))?
            .1
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("cover `{id}` has no base curve")))
    }

    fn self_i(&self, u: &CurveData, c: &ConstraintSet, self_i: Option<i64>, pairing: &Option<String>) -> Result<i64> {
        match (self_i, pairing) {
            (Some(v), None) => Ok(v),
            (None, Some(p)) => {
                let p = self.pairing(p)?;
                if p.left.id != u.id || p.right.id != u.id {
                    return Err(Error::Precondition(format!("pairing is not a self-pairing of `{}`", u.id)));
                }
                let mut p = p.clone();
                p.left_constraints = c.clone();
                p.right_constraints = c.clone();
                intersection_number(&self.catalog, &p)
            }
            _ => Err(Error::Precondition("give exactly one of `self_i` and `pairing`".into())),
        }
    }
}

// ---------------------------------------------------------------------------
// Query registry

type Refs = Vec<(&'static str, String)>;

/// Argument records for each query kind report the scenario objects they
/// refer to, so unresolved references are caught at load time.
trait Args: DeserializeOwned {
    fn refs(&self) -> Refs {
        Vec::new()
    }
}

pub struct OpSpec {
    pub name: &'static str,
    pub module: &'static str,
    /// The formula or criterion the result rests on.
    pub basis: &'static str,
    check: fn(&Value) -> std::result::Result<(), String>,
    refs: fn(&Value) -> std::result::Result<Refs, String>,
    run: fn(&Scenario, &Value) -> Result<Value>,
}

fn parse<T: Args>(v: &Value) -> std::result::Result<T, String> {
    T::deserialize(v).map_err(|e| e.to_string())
}

fn check<T: Args>(v: &Value) -> std::result::Result<(), String> {
    parse::<T>(v).map(|_| ())
}

fn refs<T: Args>(v: &Value) -> std::result::Result<Refs, String> {
    parse::<T>(v).map(|a| a.refs())
}

fn go<T: Args, R: Serialize>(s: &Scenario, v: &Value, f: fn(&Scenario, T) -> Result<R>) -> Result<Value> {
    let a = parse::<T>(v).map_err(|m| Error::validation("args", m))?;
    let r = f(s, a)?;
    serde_json::to_value(r).map_err(|e| Error::Consistency(format!("result serialization failed: {e}")))
}

macro_rules! op {
    ($name:literal, $module:literal, $basis:literal, $args:ty, $f:expr) => {
        OpSpec {
            name: $name,
            module: $module,
            basis: $basis,
            check: check::<$args>,
            refs: refs::<$args>,
            run: |s, v| go::<$args, _>(s, v, $f),
        }
    };
}

fn zero() -> Perturbation {
    Perturbation::ZERO
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceArgs {
    surface: String,
}
impl Args for SurfaceArgs {
    fn refs(&self) -> Refs {
        vec![("surface", self.surface.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverArgs {
    cover: String,
}
impl Args for CoverArgs {
    fn refs(&self) -> Refs {
        vec![("cover", self.cover.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeArgs {
    first: String,
    second: String,
}
impl Args for ComposeArgs {
    fn refs(&self) -> Refs {
        vec![("cover", self.first.clone()), ("cover", self.second.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitArgs {
    orbit: String,
    #[serde(default)]
    truncation: Option<usize>,
}
impl Args for OrbitArgs {
    fn refs(&self) -> Refs {
        vec![("orbit", self.orbit.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitEpsArgs {
    orbit: String,
    #[serde(default = "zero")]
    eps: Perturbation,
    #[serde(default)]
    method: Option<CzMethod>,
}
impl Args for OrbitEpsArgs {
    fn refs(&self) -> Refs {
        vec![("orbit", self.orbit.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitKArgs {
    orbit: String,
    #[serde(default = "zero")]
    eps: Perturbation,
    #[serde(default = "one")]
    k: u32,
    #[serde(default)]
    side: Option<Side>,
}
impl Args for OrbitKArgs {
    fn refs(&self) -> Refs {
        vec![("orbit", self.orbit.clone())]
    }
}

fn one() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OmegaArgs {
    a: String,
    #[serde(default = "zero")]
    ea: Perturbation,
    #[serde(default)]
    b: Option<String>,
    #[serde(default = "zero")]
    eb: Perturbation,
    #[serde(default = "one")]
    k: u32,
    sign: Sign,
}
impl Args for OmegaArgs {
    fn refs(&self) -> Refs {
        let mut r = vec![("orbit", self.a.clone())];
        r.extend(self.b.iter().map(|b| ("orbit", b.clone())));
        r
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveArgs {
    curve: String,
    #[serde(default)]
    constraints: Option<ConstraintSet>,
    #[serde(default)]
    self_i: Option<i64>,
    #[serde(default)]
    pairing: Option<String>,
    #[serde(default)]
    ends: SelfEndData,
}
impl Args for CurveArgs {
    fn refs(&self) -> Refs {
        let mut r = vec![("curve", self.curve.clone())];
        r.extend(self.pairing.iter().map(|p| ("pairing", p.clone())));
        r
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KBoundArgs {
    c: Half,
    g: u32,
    #[serde(default)]
    boundary: bool,
}
impl Args for KBoundArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineBundleArgs {
    ind: i64,
    c1_adj: Half,
    #[serde(default)]
    gamma0: u32,
    #[serde(default)]
    boundary: bool,
}
impl Args for LineBundleArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetArgs {
    c1_adj: Half,
}
impl Args for BudgetArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairingArgs {
    pairing: String,
}
impl Args for PairingArgs {
    fn refs(&self) -> Refs {
        vec![("pairing", self.pairing.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgainstArgs {
    cover: String,
    other: String,
    #[serde(default)]
    other_constraints: Option<ConstraintSet>,
    base_pairing: i64,
}
impl Args for AgainstArgs {
    fn refs(&self) -> Refs {
        vec![("cover", self.cover.clone()), ("curve", self.other.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LeqArgs {
    curve: String,
    left: ConstraintSet,
    right: ConstraintSet,
}
impl Args for LeqArgs {
    fn refs(&self) -> Refs {
        vec![("curve", self.curve.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MonotonicityArgs {
    curve: String,
    weak: ConstraintSet,
    strong: ConstraintSet,
    other: String,
    #[serde(default)]
    other_constraints: Option<ConstraintSet>,
    relative_pairing: i64,
}
impl Args for MonotonicityArgs {
    fn refs(&self) -> Refs {
        vec![("curve", self.curve.clone()), ("curve", self.other.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BadArgs {
    orbit: String,
    parity: u8,
}
impl Args for BadArgs {
    fn refs(&self) -> Refs {
        vec![("orbit", self.orbit.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenArgs {
    cover: String,
    #[serde(default)]
    limit_constraints: Option<ConstraintSet>,
    #[serde(default)]
    genericity: Genericity,
    #[serde(default)]
    base_self_pairing: Option<i64>,
}
impl Args for ScreenArgs {
    fn refs(&self) -> Refs {
        vec![("cover", self.cover.clone())]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopArgs {
    samples: SampledLoop,
}
impl Args for LoopArgs {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleArgs {
    bundle: BundleData,
}
impl Args for BundleArgs {}

fn side_or_err(side: Option<Side>) -> Result<Side> {
    side.ok_or_else(|| Error::validation("args.side", "this query needs `side`"))
}

fn limit_or_default(s: &CoverScenario, c: Option<ConstraintSet>) -> ConstraintSet {
    c.unwrap_or_else(|| s.total_constraints.clone())
}

/// Every query kind, in a fixed order.
pub static REGISTRY: &[OpSpec] = &[
    // surfaces and covers
    op!("euler_char", "surface_model", "χ = 2 − 2g − m − #Γ", SurfaceArgs, |s, a| {
        Ok(euler_char(s.surface(&a.surface)?))
    }),
    op!("teichmuller_dim", "surface_model", "6g − 6 + 3m + 2#Γ, or the non-stable table", SurfaceArgs, |s, a| {
        let f = s.surface(&a.surface)?;
        Ok(json!({ "dim": teichmuller_dim(f), "non_stable": NonStable::classify(f) }))
    }),
    op!("aut_dim", "surface_model", "automorphism dimension, zero when χ < 0", SurfaceArgs, |s, a| {
        Ok(aut_dim(s.surface(&a.surface)?))
    }),
    op!(
        "riemann_hurwitz",
        "surface_model",
        "Z(dφ̇) = −χ(Σ̇) + k·χ(Σ̇′), checked against branch orders",
        CoverArgs,
        |s, a| { riemann_hurwitz_punctured(s.cover(&a.cover)?) }
    ),
    op!("cover_moduli_dim", "surface_model", "dimension 2·Z(dφ̇) of nearby branched covers", CoverArgs, |s, a| {
        cover_moduli_dim(s.cover(&a.cover)?)
    }),
    op!(
        "compose_covers",
        "surface_model",
        "Z(d(φ₂∘φ₁)) = Z(dφ₁) + deg φ₁·Z(dφ₂)",
        ComposeArgs,
        |s, a| {
            let c = compose(s.cover(&a.first)?, s.cover(&a.second)?)?;
            Ok(json!({ "degree": c.degree, "z_dphi": riemann_hurwitz_punctured(&c)?, "fiber_map": c.fiber_map }))
        }
    ),
    // orbits and spectra
    op!(
        "spectrum",
        "orbit_spectrum",
        "Fourier-Galerkin spectrum of −J₀d/dt − S, middle half",
        OrbitArgs,
        |s, a| {
            let o = s.orbit(&a.orbit)?;
            let op = o.operator.as_ref().ok_or_else(|| Error::Missing(format!("orbit `{}` has no operator", o.id)))?;
            discretized_spectrum(op, a.truncation.unwrap_or(s.truncation.value))
        }
    ),
    op!(
        "alpha_pm",
        "orbit_spectrum",
        "extremal windings of eigenvalues below and above −ε",
        OrbitEpsArgs,
        |s, a| { s.catalog.alpha_pm(s.orbit(&a.orbit)?, a.eps) }
    ),
    op!(
        "conley_zehnder",
        "orbit_spectrum",
        "μ_CZ = 2α− + p, or the crossing form of the linearized flow",
        OrbitEpsArgs,
        |s, a| { s.catalog.conley_zehnder(s.orbit(&a.orbit)?, a.eps, a.method.unwrap_or(CzMethod::Winding)) }
    ),
    op!("nu_pm", "orbit_spectrum", "ν± = α±(γ − δ) − α±(γ + δ)", OrbitEpsArgs, |s, a| {
        let (m, p) = s.catalog.nu_pm(s.orbit(&a.orbit)?)?;
        Ok(json!({ "nu_minus": m, "nu_plus": p }))
    }),
    op!("cover_orbit", "orbit_spectrum", "k-fold iterate; eigenvalues scale by k", OrbitKArgs, |s, a| {
        let c = s.catalog.cover_orbit(s.orbit(&a.orbit)?, a.k)?;
        let mut cat = s.catalog.clone();
        if cat.get(&c.id).is_err() {
            cat.insert(c.clone())?;
        }
        Ok(json!({ "id": c.id, "cover": c.cover, "alpha": cat.alpha_pm(&c, a.eps.scale(a.k))? }))
    }),
    op!("cov_extremal", "orbit_spectrum", "largest divisor of the cover dividing α∓", OrbitKArgs, |s, a| {
        s.catalog.cov_extremal(s.orbit(&a.orbit)?, side_or_err(a.side)?)
    }),
    op!("q_of_cover", "orbit_spectrum", "α±(γᵏ + kε) = k·α±(γ + ε) ∓ q±", OrbitKArgs, |s, a| {
        s.catalog.q_of_cover(s.orbit(&a.orbit)?, a.eps, a.k, side_or_err(a.side)?)
    }),
    op!(
        "omega_pair",
        "orbit_spectrum",
        "Ω = m·n·min of the weighted extremal windings per cover",
        OmegaArgs,
        |s, a| {
            let b = a.b.as_deref().ok_or_else(|| Error::validation("args.b", "omega_pair needs `b`"))?;
            omega_pair(&s.catalog, s.orbit(&a.a)?, a.ea, s.orbit(b)?, a.eb, a.sign)
        }
    ),
    op!("omega_self", "orbit_spectrum", "∓(k − 1)α∓(γᵏ) + cov∓(γᵏ) − 1", OmegaArgs, |s, a| {
        omega_self(&s.catalog, s.orbit(&a.a)?, a.sign)
    }),
    op!(
        "q_tilde",
        "orbit_spectrum",
        "Ω(γᵏᵐ + kδ, γⁿ + ε) = k·Ω(γᵐ + δ, γⁿ + ε) − q̃",
        OmegaArgs,
        |s, a| {
            let b = a.b.as_deref().ok_or_else(|| Error::validation("args.b", "q_tilde needs `b`"))?;
            q_tilde(&s.catalog, s.orbit(&a.a)?, a.ea, s.orbit(b)?, a.eb, a.k, a.sign)
        }
    ),
    op!(
        "delta_mb",
        "orbit_spectrum",
        "½[k(m − 1)ν∓ + cov∓(γᵏ) − cov∓(γ_εᵏ)], zero when constrained",
        OmegaArgs,
        |s, a| { delta_mb(&s.catalog, s.orbit(&a.a)?, a.ea, a.sign) }
    ),
    // single curves
    op!("parity_partition", "curve_invariants", "even and odd punctures of the perturbed orbits", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        let (even, odd) = parity_partition(&s.catalog, u, &c)?;
        Ok(json!({ "even": even, "odd": odd }))
    }),
    op!("fredholm_index", "curve_invariants", "ind = (n − 3)χ + 2c₁ + μ", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        fredholm_index(&s.catalog, u, &c)
    }),
    op!(
        "normal_chern",
        "curve_invariants",
        "2c_N = ind − 2 + 2g + #Γ₀ + m, checked against the winding form",
        CurveArgs,
        |s, a| {
            let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
            normal_chern(&s.catalog, u, &c)
        }
    ),
    op!("k_bound", "curve_invariants", "K(c, G) = min{k + ℓ : k ≤ G, 2k + ℓ > 2c}", KBoundArgs, |_, a| {
        Ok(k_bound(a.c, a.g, a.boundary))
    }),
    op!("transversality", "curve_invariants", "automatic transversality: ind > c_N + Z(du)", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        transversality_check(&s.catalog, u, &c)
    }),
    op!(
        "line_bundle_bounds",
        "curve_invariants",
        "kernel bounds for Cauchy-Riemann operators on line bundles",
        LineBundleArgs,
        |_, a| { Ok(line_bundle_bounds(a.ind, a.c1_adj, a.gamma0, a.boundary)) }
    ),
    op!("index_normal_operator", "curve_invariants", "normal index ind − 2Z(du)", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        index_normal_operator(&s.catalog, u, &c)
    }),
    op!("critical_bound_check", "curve_invariants", "Z(du) ≤ c_N bound on critical points", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        critical_bound_check(&s.catalog, u, &c)
    }),
    op!(
        "zero_budget",
        "curve_invariants",
        "sections with c₁ < 0 vanish; zero count equals c₁",
        BudgetArgs,
        |_, a| { Ok(adjusted_c1_zero_budget(a.c1_adj)) }
    ),
    // intersections
    op!(
        "intersection_number",
        "intersection_theory",
        "i = u •_Φ u′ − ΣΩ over end pairs of equal sign",
        PairingArgs,
        |s, a| { intersection_number(&s.catalog, s.pairing(&a.pairing)?) }
    ),
    op!("asymptotic_intersection", "intersection_theory", "i_∞ + i_MB per end pair", PairingArgs, |s, a| {
        asymptotic_intersection(&s.catalog, s.pairing(&a.pairing)?)
    }),
    op!(
        "cov_totals",
        "intersection_theory",
        "cov_∞ = Σ(cov∓ − 1), cov_MB = Σ_U (cov − 1)ν∓",
        CurveArgs,
        |s, a| {
            let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
            cov_totals(&s.catalog, u, &c)
        }
    ),
    op!("adjunction_sing", "intersection_theory", "i(u|u) = 2 sing + c_N + cov_∞ + cov_MB", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        let i = s.self_i(u, &c, a.self_i, &a.pairing)?;
        adjunction_sing(&s.catalog, u, &c, i)
    }),
    op!(
        "sing_decomposition",
        "intersection_theory",
        "sing = δ(u) + δ_∞(u) with δ_∞ split by end pairs",
        CurveArgs,
        |s, a| {
            let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
            let i = s.self_i(u, &c, a.self_i, &a.pairing)?;
            sing_decomposition(&s.catalog, u, &c, i, &a.ends)
        }
    ),
    // covers
    op!("pullback_constraints", "cover_calculus", "z constrained iff φ(z) constrained", CoverArgs, |s, a| {
        Ok(s.cover_scenario(&a.cover)?.pulled_back())
    }),
    op!("cn_cover", "cover_calculus", "c_N(v∘φ) = deg·c_N(v) + Z(dφ̇) + Q", CoverArgs, |s, a| {
        cn_cover(&s.catalog, s.cover_scenario(&a.cover)?)
    }),
    op!("i_cover_bound", "cover_calculus", "i(v∘φ | w) = deg·i(v | w) + Σq̃", AgainstArgs, |s, a| {
        let sc = s.cover_scenario(&a.cover)?;
        let (w, wc) = s.curve_with(&a.other, &a.other_constraints)?;
        i_cover_bound(&s.catalog, sc, w, &wc, a.base_pairing)
    }),
    op!("constraint_leq", "cover_calculus", "c₁ ≤ c₂ iff Γ_C(c₁) ⊆ Γ_C(c₂)", LeqArgs, |s, a| {
        constraint_leq(&s.curve(&a.curve)?.curve.surface, &a.left, &a.right)
    }),
    op!(
        "monotonicity",
        "cover_calculus",
        "c⁻ ≤ c⁺ gives c_N(c⁻) ≥ c_N(c⁺) and i(c⁻) ≥ i(c⁺)",
        MonotonicityArgs,
        |s, a| {
            let u = &s.curve(&a.curve)?.curve;
            let (w, wc) = s.curve_with(&a.other, &a.other_constraints)?;
            monotonicity(&s.catalog, u, &a.weak, &a.strong, w, &wc, a.relative_pairing)
        }
    ),
    op!(
        "cover_candidates",
        "cover_calculus",
        "a priori list of underlying curves with c ≤ φ*c′",
        CurveArgs,
        |s, a| {
            let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
            enumerate_cover_candidates(&s.catalog, u, &c)
        }
    ),
    // classification
    op!("nicely_embedded", "classification", "i(u|u) ≤ 0, ind ≥ 0, ind > c_N", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        let i = s.self_i(u, &c, a.self_i, &a.pairing)?;
        is_stable_nicely_embedded(&s.catalog, u, &c, i)
    }),
    op!("unique_even", "classification", "the even puncture of an index-1 nicely embedded curve", CurveArgs, |s, a| {
        let (u, c) = s.curve_with(&a.curve, &a.constraints)?;
        let i = s.self_i(u, &c, a.self_i, &a.pairing)?;
        unique_even_analysis(&s.catalog, u, &c, i)
    }),
    op!(
        "bad_puncture",
        "classification",
        "even end on the double cover of a nondegenerate odd orbit",
        BadArgs,
        |s, a| { is_bad_puncture(&s.catalog, s.orbit(&a.orbit)?, a.parity) }
    ),
    op!(
        "degeneration_screen",
        "classification",
        "branch elimination for multiply covered limits of nicely embedded curves",
        ScreenArgs,
        |s, a| {
            let sc = s.cover_scenario(&a.cover)?;
            let opts = ScreenOptions { genericity: a.genericity, base_self_pairing: a.base_self_pairing };
            degeneration_screen(&s.catalog, sc, &limit_or_default(sc, a.limit_constraints), &opts)
        }
    ),
    op!(
        "kernel_obstruction",
        "classification",
        "zero-free kernel sections do not descend along branched ends",
        ScreenArgs,
        |s, a| {
            let sc = s.cover_scenario(&a.cover)?;
            kernel_section_cover_obstruction(&s.catalog, sc, &limit_or_default(sc, a.limit_constraints))
        }
    ),
    // zero counts
    op!("loop_winding", "zero_count", "winding number of a sampled loop in ℂ*", LoopArgs, |_, a| {
        loop_winding(&a.samples)
    }),
    op!("zero_count", "zero_count", "Z(σ) = c₁ + μ/2 + wind", BundleArgs, |_, a| { Ok(zero_count(&a.bundle)) }),
    op!("doubling_check", "zero_count", "zero count doubles under doubling along the boundary", BundleArgs, |_, a| {
        Ok(doubling_check(&a.bundle))
    }),
];

pub fn find_op(name: &str) -> Option<&'static OpSpec> {
    REGISTRY.iter().find(|o| o.name == name)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub id: String,
    pub op: String,
    pub basis: String,
    pub inputs: Value,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub truncation: TruncationInfo,
    pub results: Vec<QueryResult>,
    pub errors: usize,
}

impl Report {
    /// CLI exit status: 0 when every query succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.errors > 0)
    }

    pub fn get(&self, id: &str) -> Option<&QueryResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

fn run_one(s: &Scenario, q: &QueryDecl) -> QueryResult {
    let op = find_op(&q.op).expect("query kinds are checked at load time");
    let (status, value, error) = match (op.run)(s, &q.args) {
        Ok(v) => (Status::Ok, Some(v), None),
        Err(e) => (Status::Error, None, Some(e.to_string())),
    };
    QueryResult {
        id: q.id.clone(),
        op: q.op.clone(),
        basis: op.basis.into(),
        inputs: q.args.clone(),
        status,
        value,
        error,
    }
}

/// Execute the queries in declaration order. With `parallel` the queries
/// are evaluated concurrently and reassembled in the same order.
pub fn run(s: &Scenario, parallel: bool) -> Report {
    let results = if parallel {
        parallel::map(&s.queries, |q| run_one(s, q))
    } else {
        parallel::map_sequential(&s.queries, |q| run_one(s, q))
    };
    let errors = results.iter().filter(|r| r.status == Status::Error).count();
    Report { schema_version: SCHEMA_VERSION, scenario: s.name.clone(), truncation: s.truncation, results, errors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

pub fn emit(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Text => emit_text(r),
    }
}

fn emit_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (schema {})", r.scenario, r.schema_version);
    let _ = writeln!(out, "truncation {} ({:?})", r.truncation.value, r.truncation.source);
    for q in &r.results {
        let _ = writeln!(out);
        let _ = writeln!(out, "[{}] {}", q.id, q.op);
        let _ = writeln!(out, "  basis:  {}", q.basis);
        let _ = writeln!(out, "  inputs: {}", serde_json::to_string(&q.inputs).expect("json value"));
        match (&q.value, &q.error) {
            (Some(v), _) => {
                let _ = writeln!(out, "  value:  {}", serde_json::to_string(v).expect("json value"));
            }
            (_, Some(e)) => {
                let _ = writeln!(out, "  error:  {e}");
            }
            _ => {}
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{} queries, {} errors", r.results.len(), r.errors);
    out
}

pub fn parse_report(json: &str) -> std::result::Result<Report, String> {
    serde_json::from_str(json).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn foliation() -> Scenario {
        parse_scenario(FOLIATION_SCENARIO, LoadOptions::default()).unwrap()
    }

    fn int(r: &Report, id: &str) -> i64 {
        let q = r.get(id).unwrap_or_else(|| panic!("no query {id}"));
        assert_eq!(q.status, Status::Ok, "{q:?}");
        q.value.as_ref().unwrap().as_i64().unwrap_or_else(|| {
            let v = q.value.as_ref().unwrap();
            assert_eq!(v["den"], 1, "{v}");
            v["num"].as_i64().unwrap()
        })
    }

    #[test]
    fn bundled_foliation_runs() {
        let s = foliation();
        assert_eq!(s.curves.len(), 2);
        assert_eq!(s.covers.len(), 1);
        let r = run(&s, false);
        assert_eq!(r.errors, 0, "{}", emit(&r, Format::Text));
        assert_eq!(int(&r, "ind_v"), 0);
        assert_eq!(int(&r, "cn_v"), -1);
        assert_eq!(int(&r, "i_v"), -1);
        assert_eq!(int(&r, "ind_u"), 2);
        assert_eq!(int(&r, "cn_u"), 0);
        assert_eq!(int(&r, "i_u"), 0);
        assert_eq!(
            r.get("screen").unwrap().value.as_ref().unwrap()["outcome"]["kind"],
            "unbranched_cover_of_index_zero"
        );
    }

    #[test]
    fn reports_are_deterministic_and_round_trip() {
        let s = foliation();
        let a = emit(&run(&s, false), Format::Json);
        let b = emit(&run(&s, true), Format::Json);
        assert_eq!(a, b);
        let back = parse_report(&a).unwrap();
        assert_eq!(emit(&back, Format::Json), a);
        assert_eq!(back, run(&s, false));
    }

    #[test]
    fn every_operation_has_a_query_kind() {
        let names: Vec<_> = REGISTRY.iter().map(|o| o.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "duplicate query kinds");
        for required in [
            "euler_char",
            "teichmuller_dim",
            "aut_dim",
            "riemann_hurwitz",
            "cover_moduli_dim",
            "spectrum",
            "alpha_pm",
            "conley_zehnder",
            "nu_pm",
            "cover_orbit",
            "cov_extremal",
            "q_of_cover",
            "omega_pair",
            "omega_self",
            "q_tilde",
            "delta_mb",
            "parity_partition",
            "fredholm_index",
            "normal_chern",
            "k_bound",
            "transversality",
            "line_bundle_bounds",
            "index_normal_operator",
            "critical_bound_check",
            "zero_budget",
            "intersection_number",
            "asymptotic_intersection",
            "cov_totals",
            "adjunction_sing",
            "sing_decomposition",
            "pullback_constraints",
            "cn_cover",
            "i_cover_bound",
            "constraint_leq",
            "cover_candidates",
            "nicely_embedded",
            "unique_even",
            "bad_puncture",
            "degeneration_screen",
            "kernel_obstruction",
            "loop_winding",
            "zero_count",
            "doubling_check",
        ] {
            assert!(find_op(required).is_some(), "missing query kind {required}");
        }
        for m in [
            "surface_model",
            "orbit_spectrum",
            "curve_invariants",
            "intersection_theory",
            "cover_calculus",
            "classification",
            "zero_count",
        ] {
            assert!(REGISTRY.iter().any(|o| o.module == m));
        }
    }

    #[test]
    fn load_errors_carry_paths() {
        let bad = FOLIATION_SCENARIO.replacen("\"delta_gap\"", "\"delta_gapp\"", 1);
        let LoadError::Invalid(es) = parse_scenario(&bad, LoadOptions::default()).unwrap_err() else { panic!() };
        assert!(es[0].to_string().contains("delta_gapp"), "{es:?}");
        let bad = FOLIATION_SCENARIO.replacen("\"order\": 2", "\"order\": 3", 1);
        let LoadError::Invalid(es) = parse_scenario(&bad, LoadOptions::default()).unwrap_err() else { panic!() };
        assert!(es.iter().any(|e| e.to_string().contains("covers.phi")), "{es:?}");
        let bad = FOLIATION_SCENARIO.replacen("\"op\": \"fredholm_index\"", "\"op\": \"no_such_query\"", 1);
        assert!(parse_scenario(&bad, LoadOptions::default()).is_err());
    }

    #[test]
    fn empty_queries_give_empty_report() {
        let s = parse_scenario(r#"{"delta_gap": "1/100"}"#, LoadOptions::default()).unwrap();
        let r = run(&s, false);
        assert!(r.results.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn truncation_override_is_echoed() {
        let s =
            parse_scenario(r#"{"delta_gap": "1/100"}"#, LoadOptions { truncation: Some(96), use_env: false }).unwrap();
        let r = run(&s, false);
        assert_eq!(r.truncation, TruncationInfo { value: 96, source: TruncationSource::CommandLine });
    }
}
