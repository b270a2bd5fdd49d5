mod support;

use holocalc::zero_count::{doubling_check, loop_winding, zero_count, BundleData, SampledLoop};
use holocalc::Half;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;
use support::rng;

/// A trigonometric loop dominated by the mode e^{2πint}, so its winding is n.
fn dominated(r: &mut rand_chacha::ChaCha8Rng, n: i64) -> Vec<(i64, Complex64)> {
    let mut terms = vec![(n, Complex64::from_polar(r.gen_range(2.0..3.0), r.gen_range(0.0..2.0 * PI)))];
    for _ in 0..3 {
        let j = r.gen_range(-4i64..=4);
        if j != n {
            terms.push((j, Complex64::from_polar(r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI))));
        }
    }
    terms
}

fn sample(terms: &[(i64, Complex64)], n: usize) -> SampledLoop {
    SampledLoop::from_fn(n, |t| {
        terms.iter().map(|(j, a)| a * Complex64::from_polar(1.0, 2.0 * PI * *j as f64 * t)).sum()
    })
}

#[test]
fn closed_form_windings() {
    for n in -4..=4 {
        let l = SampledLoop::from_fn(64, |t| Complex64::from_polar(1.0, 2.0 * PI * n as f64 * t));
        assert_eq!(loop_winding(&l).unwrap(), n);
    }
}

#[test]
fn zero_count_example() {
    let b = BundleData { c1: 2, maslov: 1, boundary_winding: -1 };
    assert_eq!(zero_count(&b), Half::from_doubled(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn winding_of_dominated_loops(seed in any::<u64>(), n in -4i64..=4) {
        let mut r = rng(seed);
        let l = sample(&dominated(&mut r, n), 256);
        prop_assert_eq!(loop_winding(&l).unwrap(), n);
    }

    #[test]
    fn winding_is_additive_and_odd(seed in any::<u64>(), n in -3i64..=3, m in -3i64..=3) {
        let mut r = rng(seed);
        let a = sample(&dominated(&mut r, n), 256);
        let b = sample(&dominated(&mut r, m), 256);
        let prod = SampledLoop::new(a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect());
        let conj = SampledLoop::new(a.values.iter().map(|x| x.conj()).collect());
        let (wa, wb) = (loop_winding(&a).unwrap(), loop_winding(&b).unwrap());
        prop_assert_eq!(loop_winding(&prod).unwrap(), wa + wb);
        prop_assert_eq!(loop_winding(&conj).unwrap(), -wa);
    }

    #[test]
    fn doubling_always_doubles(c1 in -20i64..20, maslov in -20i64..20, w in -20i64..20) {
        let rep = doubling_check(&BundleData { c1, maslov, boundary_winding: w });
        prop_assert!(rep.ok);
        prop_assert_eq!(rep.z_doubled, rep.z * 2);
    }
}
