//! Seeded generators shared by the integration tests and the acceptance
//! harness.
#![allow(dead_code)]

use holocalc::cover_calculus::{pullback_constraints, CoverScenario};
use holocalc::curve_invariants::{ConstraintSet, CurveData};
use holocalc::orbit_spectrum::{AsymptoticOperator, DeclaredWindings, OrbitCatalog, OrbitClass, OrbitKind};
use holocalc::surface_model::{BranchedCover, FiberSpec, Puncture, PuncturedSurface, Sign};
use holocalc::{Half, Rational};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A symmetric loop S(t) whose entries are trigonometric polynomials of
/// degree at most `degree`, sampled finely enough to be reproduced exactly.
pub fn random_trig_loop(rng: &mut ChaCha8Rng, degree: usize) -> AsymptoticOperator {
    let mut coeffs = [[0.0f64; 7]; 3];
    // A common scalar part sets the overall rotation, so the corpus spans
    // several Conley-Zehnder indices.
    let rotation = rng.gen_range(-16.0..16.0);
    for (i, entry) in coeffs.iter_mut().enumerate() {
        entry[0] = rng.gen_range(-4.0..4.0) + if i == 1 { 0.0 } else { rotation };
        for j in 1..=degree {
            entry[2 * j - 1] = rng.gen_range(-2.0..2.0);
            entry[2 * j] = rng.gen_range(-2.0..2.0);
        }
    }
    AsymptoticOperator::from_fn(32, |t| {
        let eval = |c: &[f64; 7]| {
            (1..=3).fold(c[0], |acc, j| {
                let a = 2.0 * PI * j as f64 * t;
                acc + c[2 * j - 1] * a.cos() + c[2 * j] * a.sin()
            })
        };
        [eval(&coeffs[0]), eval(&coeffs[1]), eval(&coeffs[2])]
    })
    .expect("32 samples is enough for degree 3")
}

/// How the windings of γᵏ are generated for a declared family.
#[derive(Debug, Clone, Copy)]
pub enum Model {
    /// Elliptic rotation by 2π·r per period, r not a multiple of 1/k for
    /// any cover used: α−(γᵏ) = ⌊kr⌋, α+ = α− + 1.
    Elliptic(f64),
    /// Hyperbolic with even winding w: α±(γᵏ) = k·w.
    Hyperbolic(i64),
    /// Morse-Bott torus family of rotation number j: windings at +δ are
    /// (kj − 1, kj) and at −δ (kj, kj + 1).
    MorseBott(i64),
}

pub fn model_windings(m: Model, k: u32) -> (OrbitKind, DeclaredWindings) {
    let k64 = i64::from(k);
    match m {
        Model::Elliptic(r) => {
            let a = (f64::from(k) * r).floor() as i64;
            (OrbitKind::Nondegenerate, DeclaredWindings { alpha: Some([a, a + 1]), ..Default::default() })
        }
        Model::Hyperbolic(w) => {
            (OrbitKind::Nondegenerate, DeclaredWindings { alpha: Some([k64 * w, k64 * w]), ..Default::default() })
        }
        Model::MorseBott(j) => (
            OrbitKind::MorseBott { manifold_dim: 3, isotropy: 1 },
            DeclaredWindings {
                alpha: None,
                plus_delta: Some([k64 * j - 1, k64 * j]),
                minus_delta: Some([k64 * j, k64 * j + 1]),
            },
        ),
    }
}

pub fn cover_id(simple: &str, k: u32) -> String {
    if k == 1 {
        simple.to_string()
    } else {
        format!("{simple}^{k}")
    }
}

pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    match rng.gen_range(0..3) {
        0 => {
            // Keep kr away from integers for k ≤ 12.
            let base = rng.gen_range(-2i64..3) as f64;
            Model::Elliptic(base + rng.gen_range(1..13) as f64 / 13.0)
        }
        1 => Model::Hyperbolic(2 * rng.gen_range(-1..2)),
        _ => Model::MorseBott(rng.gen_range(-1i64..3)),
    }
}

/// A catalog of `n` simple orbits with declared covers up to `max_cover`.
pub fn random_catalog(rng: &mut ChaCha8Rng, n: usize, max_cover: u32) -> (OrbitCatalog, Vec<String>) {
    let mut cat = OrbitCatalog::new(Rational::new(1, 100), 64);
    let simples: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    for s in &simples {
        let model = random_model(rng);
        for k in 1..=max_cover {
            let (kind, declared) = model_windings(model, k);
            cat.insert(OrbitClass {
                id: cover_id(s, k),
                simple_id: (k > 1).then(|| s.clone()),
                cover: k,
                kind,
                declared: Some(declared),
                operator: None,
                distinct_from: simples.iter().filter(|x| *x != s).cloned().collect(),
                family: matches!(model, Model::MorseBott(_)).then(|| format!("T_{s}")),
                generic: None,
            })
            .unwrap();
        }
    }
    cat.validate().unwrap();
    (cat, simples)
}

pub fn random_surface(
    rng: &mut ChaCha8Rng,
    max_genus: u32,
    punctures: std::ops::RangeInclusive<usize>,
) -> PuncturedSurface {
    let n = rng.gen_range(punctures);
    let genus = rng.gen_range(0..=max_genus);
    let punctures = (0..n)
        .map(|i| Puncture::new(format!("z{i}"), if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus }))
        .collect();
    PuncturedSurface::closed(genus, punctures)
}

pub fn random_subset(rng: &mut ChaCha8Rng, s: &PuncturedSurface) -> ConstraintSet {
    ConstraintSet::new(s.punctures.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.id.clone()))
}

/// A curve whose ends sit on covers of at most `max_end_cover` of the
/// catalog's simple orbits.
pub fn random_curve(
    rng: &mut ChaCha8Rng,
    id: &str,
    surface: PuncturedSurface,
    simples: &[String],
    max_end_cover: u32,
) -> CurveData {
    let orbit_at = surface
        .punctures
        .iter()
        .map(|p| (p.id.clone(), cover_id(simples.choose(rng).unwrap(), rng.gen_range(1..=max_end_cover))))
        .collect();
    CurveData {
        id: id.into(),
        surface,
        ambient_dim_n: 2,
        orbit_at,
        c1_rel: rng.gen_range(-6..=6),
        maslov_boundary: 0,
        z_du: Half::from_int(rng.gen_range(0..=2)),
        somewhere_injective: true,
        homology_tag: None,
    }
}

/// A random partition of `d` into positive parts.
pub fn random_partition(rng: &mut ChaCha8Rng, d: u32) -> Vec<u32> {
    let mut left = d;
    let mut parts = Vec::new();
    while left > 0 {
        let p = rng.gen_range(1..=left);
        parts.push(p);
        left -= p;
    }
    parts
}

/// A degree-`d` cover of `codomain` with random fibers over the punctures
/// and random interior branching. The domain genus is solved from the
/// Euler characteristics, raising the interior branching when needed.
pub fn random_cover(rng: &mut ChaCha8Rng, codomain: &PuncturedSurface, d: u32, tag: &str) -> BranchedCover {
    let mut fiber_map = BTreeMap::new();
    let mut punctures = Vec::new();
    for p in &codomain.punctures {
        let parts = if d == 1 { vec![1] } else { random_partition(rng, d) };
        for (i, k) in parts.into_iter().enumerate() {
            let id = format!("{}{tag}{i}", p.id);
            fiber_map.insert(id.clone(), FiberSpec { target: p.id.clone(), order: k });
            punctures.push(Puncture::new(id, p.sign));
        }
    }
    let chi_cod = 2 - 2 * i64::from(codomain.genus) - codomain.num_punctures();
    let n = punctures.len() as i64;
    let mut b: i64 = if d == 1 { 0 } else { rng.gen_range(0..=3) };
    // 2 − 2g = d·χ′ − b + n
    let twice_genus = |b: i64| 2 - (i64::from(d) * chi_cod - b + n);
    if twice_genus(b) % 2 != 0 {
        b += 1;
    }
    while twice_genus(b) < 0 {
        b += 2;
    }
    let genus = (twice_genus(b) / 2) as u32;
    BranchedCover {
        domain: PuncturedSurface::closed(genus, punctures),
        codomain: codomain.clone(),
        degree: d,
        fiber_map,
        interior_branch_count: b as u32,
    }
}

/// Base curve v, a random cover φ of its domain and the pulled-back
/// constraints, over a catalog holding every cover the composition needs.
pub fn random_cover_scenario(rng: &mut ChaCha8Rng, id: usize) -> (OrbitCatalog, CoverScenario) {
    let (cat, simples) = random_catalog(rng, 3, 12);
    let surface = random_surface(rng, 1, 1..=4);
    let v = random_curve(rng, &format!("v{id}"), surface, &simples, 3);
    let base_c = random_subset(rng, &v.surface);
    let d = rng.gen_range(1..=4);
    let cover = random_cover(rng, &v.surface, d, "_");
    let total = pullback_constraints(&cover, &base_c);
    let s = CoverScenario {
        id: format!("phi{id}"),
        cover,
        base: v,
        base_constraints: base_c,
        total_constraints: total,
        declared_orbits: BTreeMap::new(),
    };
    (cat, s)
}
