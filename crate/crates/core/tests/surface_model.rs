mod support;

use holocalc::surface_model::{
    aut_dim, compose, cover_moduli_dim, euler_char, riemann_hurwitz_punctured, teichmuller_dim, BranchedCover,
    FiberSpec, NonStable, Puncture, PuncturedSurface, Sign,
};
use proptest::prelude::*;
use support::{random_cover, random_surface, rng};

fn sphere(n: usize) -> PuncturedSurface {
    PuncturedSurface::closed(0, (0..n).map(|i| Puncture::new(format!("p{i}"), Sign::Minus)).collect())
}

#[test]
fn non_stable_table() {
    let expected = [(6, 0), (4, 0), (3, 0), (2, 0), (1, 0), (1, 1), (2, 2)];
    for (t, dims) in NonStable::ALL.into_iter().zip(expected) {
        let (g, b, m) = t.topology();
        let s = PuncturedSurface::new(g, b, (0..m).map(|i| Puncture::new(format!("p{i}"), Sign::Plus)).collect());
        assert_eq!((aut_dim(&s), teichmuller_dim(&s)), dims, "{t:?}");
        assert_eq!(aut_dim(&s) - teichmuller_dim(&s), 3 * euler_char(&s) + s.num_punctures());
    }
}

#[test]
fn stable_teichmuller_dimension() {
    for g in 0..4 {
        for b in 0..3 {
            for m in 0..5 {
                let s =
                    PuncturedSurface::new(g, b, (0..m).map(|i| Puncture::new(format!("p{i}"), Sign::Plus)).collect());
                if s.is_stable() {
                    assert_eq!(teichmuller_dim(&s), -3 * euler_char(&s) - s.num_punctures());
                    assert_eq!(aut_dim(&s), 0);
                }
            }
        }
    }
}

/// Degree 2 over the thrice-punctured sphere: fully branched over p0, two
/// sheets over p1 and p2, one interior branch point.
#[test]
fn one_interior_branch_point() {
    let codomain = sphere(3);
    let fm = [("a", "p0", 2), ("b1", "p1", 1), ("b2", "p1", 1), ("c1", "p2", 1), ("c2", "p2", 1)];
    let cover = BranchedCover {
        domain: PuncturedSurface::closed(0, fm.iter().map(|(z, _, _)| Puncture::new(*z, Sign::Minus)).collect()),
        codomain,
        degree: 2,
        fiber_map: fm.iter().map(|(z, t, k)| (z.to_string(), FiberSpec { target: t.to_string(), order: *k })).collect(),
        interior_branch_count: 1,
    };
    assert_eq!(riemann_hurwitz_punctured(&cover).unwrap(), 1);
    assert_eq!(cover_moduli_dim(&cover).unwrap(), 2);
    let mut wrong = cover.clone();
    wrong.interior_branch_count = 2;
    assert!(riemann_hurwitz_punctured(&wrong).unwrap_err().is_validation());
}

#[test]
fn identity_composes_trivially() {
    let s = sphere(4);
    let id = BranchedCover::identity(&s);
    let c = compose(&id, &id).unwrap();
    assert_eq!(c.degree, 1);
    assert_eq!(riemann_hurwitz_punctured(&c).unwrap(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn riemann_hurwitz_two_ways(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cod = random_surface(&mut r, 2, 1..=4);
        let d = r.gen_range(1..=5);
        let c = random_cover(&mut r, &cod, d, "_");
        let z = riemann_hurwitz_punctured(&c).unwrap();
        prop_assert_eq!(z, -euler_char(&c.domain) + i64::from(d) * euler_char(&cod));
        let closed = |s: &PuncturedSurface| 2 - 2 * i64::from(s.genus);
        prop_assert_eq!(
            -closed(&c.domain) + i64::from(d) * closed(&cod),
            z + c.puncture_branching()
        );
    }

    #[test]
    fn composition_is_additive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bottom = random_surface(&mut r, 1, 1..=3);
        let d2 = r.gen_range(1..=3);
        let second = random_cover(&mut r, &bottom, d2, "_");
        let d1 = r.gen_range(1..=3);
        let first = random_cover(&mut r, &second.domain, d1, "'");
        let c = compose(&first, &second).unwrap();
        prop_assert_eq!(c.degree, d1 * d2);
        let (z1, z2) = (riemann_hurwitz_punctured(&first).unwrap(), riemann_hurwitz_punctured(&second).unwrap());
        prop_assert_eq!(riemann_hurwitz_punctured(&c).unwrap(), z1 + i64::from(d1) * z2);
    }
}

use rand::Rng;
