//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod support;

use holocalc::cover_calculus::{cn_cover, monotonicity};
use holocalc::curve_invariants::{k_bound, normal_chern_from_index, normal_chern_from_windings, ConstraintSet};
use holocalc::orbit_spectrum::{
    discretized_spectrum, omega_pair, q_tilde, AsymptoticOperator, CzMethod, OrbitCatalog, OrbitClass, Perturbation,
    Side,
};
use holocalc::scenario::{parse_scenario, run, LoadOptions, Report, Status, FOLIATION_SCENARIO};
use holocalc::surface_model::{
    aut_dim, compose, euler_char, riemann_hurwitz_punctured, teichmuller_dim, NonStable, Puncture, PuncturedSurface,
    Sign,
};
use holocalc::zero_count::{doubling_check, loop_winding, BundleData, SampledLoop};
use holocalc::{Half, Rational};
use num_complex::Complex64;
use rand::Rng;
use serde_json::Value;
use std::f64::consts::PI;
use std::time::Instant;
use support::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn value<'a>(r: &'a Report, id: &str) -> Result<&'a Value, String> {
    let q = r.get(id).ok_or_else(|| format!("no query `{id}`"))?;
    if q.status != Status::Ok {
        return Err(format!("`{id}` failed: {}", q.error.as_deref().unwrap_or("?")));
    }
    Ok(q.value.as_ref().expect("ok results carry a value"))
}

fn int(v: &Value) -> Option<i64> {
    v.as_i64().or_else(|| (v["den"] == 1).then(|| v["num"].as_i64()).flatten())
}

fn expect_int(r: &Report, id: &str, path: &[&str], want: i64) -> Result<(), String> {
    let mut v = value(r, id)?;
    for p in path {
        v = &v[p];
    }
    let got = int(v).ok_or_else(|| format!("`{id}`{path:?} is not an integer: {v}"))?;
    ensure(got == want, || format!("`{id}`{path:?} = {got}, expected {want}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = parse_scenario(FOLIATION_SCENARIO, LoadOptions::default()).map_err(|e| e.to_string())?;
    let r = run(&s, false);
    let elapsed = start.elapsed();
    for (id, path, want) in [
        ("ind_v", &[][..], 0),
        ("cn_v", &[], -1),
        ("i_v", &[], -1),
        ("sing_v", &[], 0),
        ("ind_u", &[], 2),
        ("cn_u", &[], 0),
        ("i_u", &[], 0),
        ("cov_u", &["cov_infty"], 0),
        ("cov_u", &["cov_mb"], 0),
    ] {
        expect_int(&r, id, path, want)?;
    }
    for id in ["transversality_v", "transversality_u"] {
        ensure(value(&r, id)?["criterion_met"] == true, || format!("`{id}` criterion not met"))?;
    }
    let kind = &value(&r, "screen")?["outcome"]["kind"];
    ensure(kind == "unbranched_cover_of_index_zero", || format!("screen verdict {kind}"))?;
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("all foliation values exact, verdict UnbranchedCoverOfIndexZero, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

/// 100 seeded random loops that pass the gap certificate at both
/// truncations, with the number of rejected draws.
fn loop_corpus() -> (Vec<AsymptoticOperator>, usize) {
    let mut r = rng(0x005e_edc2);
    let cat64 = OrbitCatalog::new(Rational::new(1, 1000), 64);
    let cat128 = OrbitCatalog::new(Rational::new(1, 1000), 128);
    let (mut out, mut rejected) = (Vec::new(), 0);
    while out.len() < 100 {
        let op = random_trig_loop(&mut r, 3);
        let o = OrbitClass::with_operator("g", op.clone());
        let ok = cat64.alpha_pm(&o, Perturbation::ZERO).is_ok() && cat128.alpha_pm(&o, Perturbation::ZERO).is_ok();
        if ok {
            out.push(op);
        } else {
            rejected += 1;
        }
    }
    (out, rejected)
}

fn criterion_2(corpus: &[AsymptoticOperator], rejected: usize) -> Outcome {
    let cat64 = OrbitCatalog::new(Rational::new(1, 1000), 64);
    let cat128 = OrbitCatalog::new(Rational::new(1, 1000), 128);
    let mut range = (i64::MAX, i64::MIN);
    for (i, op) in corpus.iter().enumerate() {
        let o = OrbitClass::with_operator("g", op.clone());
        let z = Perturbation::ZERO;
        let w = cat64.conley_zehnder(&o, z, CzMethod::Winding).map_err(|e| format!("loop {i}: {e}"))?;
        let f = cat64.conley_zehnder(&o, z, CzMethod::CrossingFlow).map_err(|e| format!("loop {i}: {e}"))?;
        ensure(w == f, || format!("loop {i}: winding {w}, crossing flow {f}"))?;
        let a64 = cat64.alpha_pm(&o, z).map_err(|e| e.to_string())?;
        let a128 = cat128.alpha_pm(&o, z).map_err(|e| e.to_string())?;
        ensure(a64 == a128, || format!("loop {i}: {a64:?} at T = 64, {a128:?} at T = 128"))?;
        range = (range.0.min(w), range.1.max(w));
    }
    Ok(format!(
        "100/100 loops agree, truncation 64 vs 128 identical, μ_CZ ∈ [{}, {}], {rejected} draws rejected by the gap check",
        range.0, range.1
    ))
}

fn criterion_3(corpus: &[AsymptoticOperator]) -> Outcome {
    let mut pairs = 0;
    for (i, op) in corpus.iter().enumerate() {
        let s = discretized_spectrum(op, 64).map_err(|e| format!("loop {i}: {e}"))?;
        s.check_window().map_err(|e| format!("loop {i}: {e}"))?;
        pairs += s.eigenpairs.len();
    }
    Ok(format!("windings monotone, each interior winding twice, {pairs} eigenpairs checked"))
}

fn brute_k(c: Half, g: u32, boundary: bool) -> i64 {
    (0..=i64::from(g))
        .flat_map(|k| (0..64).map(move |l| (k, l)))
        .filter(|&(k, l)| (boundary || l % 2 == 0) && Half::from_int(2 * k + l) > c * 2)
        .map(|(k, l)| k + l)
        .min()
        .unwrap()
}

fn criterion_4() -> Outcome {
    let mut n = 0;
    for twice_c in -6..=12 {
        for g in 0..=5 {
            for b in [false, true] {
                let c = Half::from_doubled(twice_c);
                let (got, want) = (k_bound(c, g, b), brute_k(c, g, b));
                ensure(got == want, || format!("K({c}, {g}, boundary={b}) = {got}, enumeration gives {want}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} cases exact"))
}

fn check_lemma(
    cat: &OrbitCatalog,
    g: &OrbitClass,
    m: u32,
    n: u32,
    k: u32,
    d: Perturbation,
    e: Perturbation,
) -> Result<(), String> {
    let s = |x: holocalc::Error| format!("γ = {}, (m, n, k) = ({m}, {n}, {k}): {x}", g.id);
    let gm = cat.cover_orbit(g, m).map_err(s)?;
    let gn = cat.cover_orbit(g, n).map_err(s)?;
    let gkm = cat.cover_orbit(&gm, k).map_err(s)?;
    for side in [Side::Minus, Side::Plus] {
        let q = cat.q_of_cover(&gm, d, k, side).map_err(s)?;
        ensure((0..i64::from(k)).contains(&q), || format!("q = {q} outside [0, {}]", k - 1))?;
    }
    for sign in [Sign::Plus, Sign::Minus] {
        let lhs = omega_pair(cat, &gkm, d.scale(k), &gn, e, sign).map_err(s)?;
        let base = omega_pair(cat, &gm, d, &gn, e, sign).map_err(s)?;
        let qt = q_tilde(cat, &gm, d, &gn, e, k, sign).map_err(s)?;
        ensure(lhs == i64::from(k) * base - qt, || {
            format!("γ = {}, (m, n, k) = ({m}, {n}, {k}), sign {sign}: {lhs} ≠ {k}·{base} − {qt}", g.id)
        })?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let cat = OrbitCatalog::new(Rational::new(1, 1000), 32);
    let mut r = rng(5);
    let small = [Perturbation::ZERO, Perturbation::new(1, 4000), Perturbation::new(-1, 4000)];
    let mut cases = 0;
    for theta in [0.37 * PI, 1.21 * PI, -0.83 * PI] {
        let g = OrbitClass::with_operator("scalar", AsymptoticOperator::scalar(theta));
        for m in 1..=6 {
            for n in 1..=6 {
                for k in 1..=6 {
                    check_lemma(&cat, &g, m, n, k, small[r.gen_range(0..3)], small[r.gen_range(0..3)])?;
                    cases += 1;
                }
            }
        }
    }
    let loop_cat = OrbitCatalog::new(Rational::new(1, 1000), 24);
    let mut loops = 0;
    while loops < 6 {
        let g = OrbitClass::with_operator("loop", random_trig_loop(&mut r, 3));
        // Only loops whose iterates up to 36 clear the gap are usable.
        if (1..=36)
            .any(|j| loop_cat.cover_orbit(&g, j).and_then(|o| loop_cat.alpha_pm(&o, Perturbation::ZERO)).is_err())
        {
            continue;
        }
        loops += 1;
        for _ in 0..25 {
            let (m, n, k) = (r.gen_range(1..=6), r.gen_range(1..=6), r.gen_range(1..=6));
            check_lemma(&loop_cat, &g, m, n, k, small[r.gen_range(0..3)], small[r.gen_range(0..3)])?;
            cases += 1;
        }
    }
    ensure(cases >= 500, || format!("only {cases} cases"))?;
    Ok(format!("{cases} cases ({} scalar, {} on {loops} random loops), q ∈ [0, k−1] throughout", 648, cases - 648))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    for i in 0..1000 {
        let (cat, simples) = random_catalog(&mut r, 3, 4);
        let s = random_surface(&mut r, 2, 0..=5);
        let u = random_curve(&mut r, "u", s, &simples, 4);
        let c = random_subset(&mut r, &u.surface);
        let a = normal_chern_from_index(&cat, &u, &c).map_err(|e| format!("curve {i}: {e}"))?;
        let b = normal_chern_from_windings(&cat, &u, &c).map_err(|e| format!("curve {i}: {e}"))?;
        ensure(a == b, || format!("curve {i}: {a} from the index, {b} from windings"))?;
    }
    let mut branched = 0;
    for i in 0..200 {
        let (cat, s) = random_cover_scenario(&mut r, i);
        let rep = cn_cover(&cat, &s).map_err(|e| format!("cover {i}: {e}"))?;
        ensure(rep.cn_cover == rep.cn_direct, || format!("cover {i}: {} vs {}", rep.cn_cover, rep.cn_direct))?;
        branched += usize::from(rep.z_dphi > 0);
    }
    Ok(format!("1000 curves agree; cover formula matches direct c_N on 200 covers ({branched} branched)"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut strict = 0;
    for i in 0..200 {
        let (cat, simples) = random_catalog(&mut r, 3, 4);
        let us = random_surface(&mut r, 1, 1..=5);
        let u = random_curve(&mut r, "u", us, &simples, 3);
        let vs = random_surface(&mut r, 1, 1..=4);
        let v = random_curve(&mut r, "v", vs, &simples, 3);
        let weak = random_subset(&mut r, &u.surface);
        let strong = ConstraintSet::new(
            u.surface.punctures.iter().filter(|p| weak.is_constrained(&p.id) || r.gen_bool(0.5)).map(|p| p.id.clone()),
        );
        let vc = random_subset(&mut r, &v.surface);
        let m = monotonicity(&cat, &u, &weak, &strong, &v, &vc, r.gen_range(-8..8))
            .map_err(|e| format!("case {i}: {e}"))?;
        ensure(m.cn_weak >= m.cn_strong && m.i_weak >= m.i_strong, || format!("case {i}: {m:?}"))?;
        strict += usize::from(m.cn_weak > m.cn_strong || m.i_weak > m.i_strong);
    }
    Ok(format!("200 cases hold ({strict} strict)"))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let closed = |s: &PuncturedSurface| 2 - 2 * i64::from(s.genus);
    for i in 0..200 {
        let cod = random_surface(&mut r, 2, 1..=4);
        let d = r.gen_range(1..=5);
        let c = random_cover(&mut r, &cod, d, "_");
        let z = riemann_hurwitz_punctured(&c).map_err(|e| format!("cover {i}: {e}"))?;
        let euler = -euler_char(&c.domain) + i64::from(d) * euler_char(&cod);
        ensure(z == euler, || format!("cover {i}: {z} vs Euler {euler}"))?;
        let branch = -closed(&c.domain) + i64::from(d) * closed(&cod);
        ensure(branch == z + c.puncture_branching(), || format!("cover {i}: branch orders disagree"))?;
    }
    for i in 0..200 {
        let bottom = random_surface(&mut r, 1, 1..=3);
        let d2 = r.gen_range(1..=3);
        let second = random_cover(&mut r, &bottom, d2, "_");
        let d1 = r.gen_range(1..=3);
        let first = random_cover(&mut r, &second.domain, d1, "'");
        let c = compose(&first, &second).map_err(|e| format!("composition {i}: {e}"))?;
        let z = riemann_hurwitz_punctured(&c).map_err(|e| format!("composition {i}: {e}"))?;
        let z1 = riemann_hurwitz_punctured(&first).map_err(|e| e.to_string())?;
        let z2 = riemann_hurwitz_punctured(&second).map_err(|e| e.to_string())?;
        ensure(z == z1 + i64::from(d1) * z2, || format!("composition {i}: {z} ≠ {z1} + {d1}·{z2}"))?;
    }
    Ok("200 covers and 200 compositions exact".into())
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    for i in 0..200 {
        let b = BundleData {
            c1: r.gen_range(-30..30),
            maslov: r.gen_range(-30..30),
            boundary_winding: r.gen_range(-30..30),
        };
        ensure(doubling_check(&b).ok, || format!("bundle {i}: {b:?}"))?;
    }
    let mut loops = 0;
    for n in -5i64..=5 {
        for _ in 0..10 {
            let lead = Complex64::from_polar(r.gen_range(2.0..3.0), r.gen_range(0.0..2.0 * PI));
            let extra: Vec<(i64, Complex64)> = (0..3)
                .map(|_| {
                    (r.gen_range(-6i64..=6), Complex64::from_polar(r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI)))
                })
                .filter(|(j, _)| *j != n)
                .collect();
            let l = SampledLoop::from_fn(256, |t| {
                let e = |j: i64| Complex64::from_polar(1.0, 2.0 * PI * j as f64 * t);
                lead * e(n) + extra.iter().map(|(j, a)| a * e(*j)).sum::<Complex64>()
            });
            let w = loop_winding(&l).map_err(|e| e.to_string())?;
            ensure(w == n, || format!("loop with leading mode {n} gave winding {w}"))?;
            loops += 1;
        }
    }
    Ok(format!("200 bundles double exactly, {loops} trigonometric loops wind as predicted"))
}

fn criterion_10() -> Outcome {
    let expected = [(6, 0), (4, 0), (3, 0), (2, 0), (1, 0), (1, 1), (2, 2)];
    for (t, want) in NonStable::ALL.into_iter().zip(expected) {
        let (g, b, m) = t.topology();
        let s = PuncturedSurface::new(g, b, (0..m).map(|i| Puncture::new(format!("p{i}"), Sign::Plus)).collect());
        let got = (aut_dim(&s), teichmuller_dim(&s));
        ensure(got == want, || format!("{t:?}: {got:?}, expected {want:?}"))?;
        let lhs = aut_dim(&s) - teichmuller_dim(&s);
        let rhs = 3 * euler_char(&s) + s.num_punctures();
        ensure(lhs == rhs, || format!("{t:?}: aut − teich = {lhs}, 3χ + #Γ = {rhs}"))?;
    }
    Ok("7 rows reproduced, aut − teich = 3χ + #Γ on each".into())
}

fn main() {
    let (corpus, rejected) = loop_corpus();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "foliation example", criterion_1()),
        (2, "Conley-Zehnder two-method agreement", criterion_2(&corpus, rejected)),
        (3, "spectral window", criterion_3(&corpus)),
        (4, "K(c, G) oracle", criterion_4()),
        (5, "covering identities", criterion_5()),
        (6, "c_N consistency", criterion_6()),
        (7, "monotonicity", criterion_7()),
        (8, "Riemann-Hurwitz double computation", criterion_8()),
        (9, "zero-count identities", criterion_9()),
        (10, "non-stable surface table", criterion_10()),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
