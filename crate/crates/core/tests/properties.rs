use std::cmp::Ordering;

use mvf_core::difference::{gauss_norm, Automorphism, GaussElement};
use mvf_core::formula::{evaluate, grid_witnesses, Assignment, Formula, Witnesses};
use mvf_core::groups::{equiv_groups, ConcreteGroup};
use mvf_core::hahn::HahnSeries;
use mvf_core::projective::{distance, eval_predicate, homogenize, MetricRing, PPoint};
use mvf_core::real::Real;
use mvf_core::sample::Sampler;
use mvf_core::values::{Magnitude, Value};
use num_rational::BigRational;
use proptest::prelude::*;

fn g23() -> ConcreteGroup {
    ConcreteGroup::from_integers(&[2, 3]).unwrap()
}

fn sampler(seed: u64) -> Sampler {
    Sampler::new(g23(), seed)
}

fn sign_twist() -> Automorphism {
    Automorphism::twist(
        g23(),
        &[(Value::ratio(2, 1), BigRational::from_integer((-1).into())), (Value::ratio(3, 1), BigRational::from_integer(1.into()))],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_order_is_compatible_with_mul(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let (a, b, c) = (s.value(), s.value(), s.value());
        if a.compare(&b) == Ordering::Less {
            prop_assert_eq!(a.mul(&c).compare(&b.mul(&c)), Ordering::Less);
        }
    }

    #[test]
    fn from_rational_is_a_homomorphism(n1 in 1i64..500, d1 in 1i64..500, n2 in 1i64..500, d2 in 1i64..500) {
        let q1 = BigRational::new(n1.into(), d1.into());
        let q2 = BigRational::new(n2.into(), d2.into());
        let lhs = Value::from_rational(&(&q1 * &q2)).unwrap();
        let rhs = Value::from_rational(&q1).unwrap().mul(&Value::from_rational(&q2).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_valuation_is_ultrametric_and_multiplicative(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let (a, b) = (s.series(), s.series());
        let (va, vb) = (a.valuation(), b.valuation());
        let sum = (&a + &b).valuation();
        prop_assert!(sum <= va.clone().max(vb.clone()));
        if va != vb {
            prop_assert_eq!(sum, va.clone().max(vb.clone()));
        }
        prop_assert_eq!((&a * &b).valuation(), va.mul(&vb));
    }

    #[test]
    fn residue_is_a_ring_morphism(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let (a, b) = (s.unit(), s.unit());
        let (ra, rb) = (a.residue().unwrap(), b.residue().unwrap());
        prop_assert_eq!((&a * &b).residue().unwrap(), &ra * &rb);
        prop_assert_eq!((&a + &b).residue().unwrap(), &ra + &rb);
    }

    #[test]
    fn distance_is_ultrametric(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let (a, b, c) = (s.point(), s.point(), s.point());
        prop_assert!(distance(&a, &c) <= distance(&a, &b).max(distance(&b, &c)));
    }

    #[test]
    fn predicates_ignore_unit_rescaling(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let p = s.poly(2, 3, 4);
        let pts = vec![s.point(), s.point()];
        let scaled: Vec<PPoint> = pts.iter().map(|x| {
            let u = s.unit();
            x.rescaled_by(&u)
        }).collect();
        let v = eval_predicate(&p, &pts).unwrap();
        prop_assert!(v <= Magnitude::one());
        prop_assert_eq!(v, eval_predicate(&p, &scaled).unwrap());
    }

    #[test]
    fn homogenization_dehomogenizes_back(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let nvars = 1 + (seed % 3) as usize;
        let p = s.poly(nvars, 4, 6);
        prop_assert_eq!(homogenize(&p).dehomogenize(), p);
    }

    #[test]
    fn twist_is_isometric_and_multiplicative(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let sigma = sign_twist();
        let (a, b) = (s.series(), s.series());
        let sa = sigma.apply_series(&a).unwrap();
        prop_assert_eq!(sa.valuation(), a.valuation());
        prop_assert_eq!(sigma.apply_series(&(&a * &b)).unwrap(), &sa * &sigma.apply_series(&b).unwrap());
        prop_assert_eq!(sigma.apply_series(&(&a + &b)).unwrap(), &sa + &sigma.apply_series(&b).unwrap());
    }

    #[test]
    fn gauss_norm_is_multiplicative(seed in any::<u64>()) {
        let mut s = sampler(seed);
        let p = GaussElement::new(vec![s.series(), s.series()]);
        let q = GaussElement::new(vec![s.series(), s.series(), s.series()]);
        prop_assert_eq!(gauss_norm(&p.mul(&q)), gauss_norm(&p).mul(&gauss_norm(&q)));
        prop_assert!(gauss_norm(&p.add(&q)) <= gauss_norm(&p).max(gauss_norm(&q)));
    }
}

#[test]
fn equiv_groups_is_an_equivalence() {
    let groups: Vec<_> = [&[2u64][..], &[3], &[2, 3], &[5, 7], &[4, 9], &[2, 3, 5], &[6, 10, 15]]
        .iter()
        .map(|g| ConcreteGroup::from_integers(g).unwrap().theory())
        .collect();
    for a in &groups {
        assert!(equiv_groups(a, a));
        for b in &groups {
            assert_eq!(equiv_groups(a, b), equiv_groups(b, a));
            for c in &groups {
                if equiv_groups(a, b) && equiv_groups(b, c) {
                    assert!(equiv_groups(a, c));
                }
            }
        }
    }
}

/// `|‖P(a)‖ − ‖P(b)‖| ≤ max_i d(a_i, b_i)`; any counterexample is printed
/// as a finding and counted.
#[test]
fn predicate_modulus_is_the_identity() {
    let mut s = sampler(2024);
    let mut findings = Vec::new();
    for _ in 0..500 {
        let p = s.poly(2, 3, 4);
        let a = vec![s.point(), s.point()];
        let b = vec![s.point(), s.point()];
        let pa = Real::from_magnitude(&eval_predicate(&p, &a).unwrap());
        let pb = Real::from_magnitude(&eval_predicate(&p, &b).unwrap());
        let gap = (&pa - &pb).max(&pb - &pa);
        let d = distance(&a[0], &b[0]).max(distance(&a[1], &b[1]));
        if gap.compare(&Real::from_magnitude(&d)) == Ordering::Greater {
            findings.push(format!("P = {}, a = {:?}, b = {:?}: gap {} > {}", p, a, b, gap, d));
        }
    }
    for f in &findings {
        println!("modulus finding: {}", f);
    }
    println!("modulus check: {} findings in 500 samples", findings.len());
    assert!(findings.is_empty(), "{} modulus findings", findings.len());
}

#[test]
fn nested_witness_sets_bound_monotonically() {
    let x = PPoint::affine(HahnSeries::monomial(BigRational::from_integer(1.into()), Value::ratio(1, 2))).unwrap();
    let mut asg = Assignment::new();
    asg.insert("x".to_string(), x);
    let inf: Formula = "inf y . ||y - x||".parse().unwrap();
    let sup: Formula = "sup y . ||y - x||".parse().unwrap();
    let mut prev: Option<(Real, Real)> = None;
    for (d, h) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
        let ws = Witnesses::uniform(grid_witnesses(&g23(), d, h));
        let lo = evaluate(&inf, None, &asg, &ws).unwrap().value;
        let hi = evaluate(&sup, None, &asg, &ws).unwrap().value;
        if let Some((plo, phi)) = prev {
            assert_ne!(lo.compare(&plo), Ordering::Greater);
            assert_ne!(hi.compare(&phi), Ordering::Less);
        }
        prev = Some((lo, hi));
    }
}
