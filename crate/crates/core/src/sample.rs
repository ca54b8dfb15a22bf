//! Seeded pseudorandom sampling of series, points and polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

use crate::groups::ConcreteGroup;
use crate::hahn::HahnSeries;
use crate::projective::{IntPoly, PPoint};
use crate::values::Value;

pub struct Sampler {
    rng: ChaCha8Rng,
    group: ConcreteGroup,
    /// Coordinates are drawn from `[-coord, coord]`.
    pub coord: i64,
    pub max_terms: usize,
}

impl Sampler {
    pub fn new(group: ConcreteGroup, seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), group, coord: 2, max_terms: 3 }
    }

    pub fn group(&self) -> &ConcreteGroup {
        &self.group
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn value(&mut self) -> Value {
        let c = self.coord;
        let coords: Vec<i64> = (0..self.group.generators().len()).map(|_| self.rng.gen_range(-c..=c)).collect();
        self.group.element(&coords)
    }

    pub fn coefficient(&mut self) -> BigRational {
        let n: i64 = *[-3i64, -2, -1, 1, 2, 3].choose(&mut self.rng).unwrap();
        let d: i64 = self.rng.gen_range(1..=3);
        BigRational::new(n.into(), d.into())
    }

    /// Non-zero series with up to `max_terms` terms.
    pub fn series(&mut self) -> HahnSeries {
        let k = self.rng.gen_range(1..=self.max_terms);
        let terms: Vec<_> = (0..k).map(|_| (self.value(), self.coefficient())).collect();
        let s = HahnSeries::from_terms(terms);
        if s.is_zero() {
            HahnSeries::one()
        } else {
            s
        }
    }

    /// Series of norm exactly 1: a non-zero constant plus smaller terms.
    pub fn unit(&mut self) -> HahnSeries {
        let mut terms = vec![(Value::one(), self.coefficient())];
        for _ in 0..self.rng.gen_range(0..self.max_terms) {
            let v = self.value();
            if v.compare(&Value::one()) == Ordering::Less {
                terms.push((v, self.coefficient()));
            }
        }
        HahnSeries::from_terms(terms)
    }

    /// Normalized point; roughly one in ten is `∞` and one in ten has a
    /// zero numerator.
    pub fn point(&mut self) -> PPoint {
        match self.rng.gen_range(0..10) {
            0 => PPoint::infinity(),
            1 => PPoint::affine(HahnSeries::zero()).expect("zero is affine"),
            2..=5 => PPoint::affine(self.series()).expect("finite point"),
            _ => {
                let (x, y) = (self.series(), self.series());
                PPoint::normalize(x, y).expect("non-zero pair")
            }
        }
    }

    /// Integer polynomial in `nvars` variables of total degree at most
    /// `max_degree` with at most `max_terms` monomials.
    pub fn poly(&mut self, nvars: usize, max_degree: u32, max_terms: usize) -> IntPoly {
        loop {
            let k = self.rng.gen_range(1..=max_terms);
            let mut terms = Vec::new();
            for _ in 0..k {
                let mut budget = self.rng.gen_range(0..=max_degree);
                let mut exps = vec![0u32; nvars];
                for e in exps.iter_mut() {
                    let d = self.rng.gen_range(0..=budget);
                    *e = d;
                    budget -= d;
                }
                exps.shuffle(&mut self.rng);
                let c = *[-3i64, -2, -1, 1, 2, 3].choose(&mut self.rng).unwrap();
                terms.push((exps, c));
            }
            let p = IntPoly::from_terms(nvars, terms).expect("arity matches");
            if !p.terms().is_empty() {
                return p;
            }
        }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> BigInt {
        BigInt::from(self.rng.gen_range(lo..=hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::values::Magnitude;

    fn sampler(seed: u64) -> Sampler {
        Sampler::new(ConcreteGroup::from_integers(&[2, 3]).unwrap(), seed)
    }

    #[test]
    fn seeded_runs_repeat() {
        let (mut a, mut b) = (sampler(7), sampler(7));
        for _ in 0..20 {
            assert_eq!(a.point().to_string(), b.point().to_string());
        }
    }

    #[test]
    fn units_have_norm_one() {
        let mut s = sampler(1);
        for _ in 0..50 {
            assert_eq!(s.unit().valuation(), Magnitude::Pos(Value::one()));
        }
    }

    #[test]
    fn polys_respect_degree() {
        let mut s = sampler(3);
        for _ in 0..50 {
            let p = s.poly(3, 4, 5);
            for e in p.terms().keys() {
                assert!(e.iter().sum::<u32>() <= 4);
            }
        }
    }
}
