//! Newton–Hensel lifting of simple residue roots in `Q((t^Γ))`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hahn::{parse_series_poly, HahnSeries};
use crate::values::{Magnitude, Value};

/// Univariate polynomial with Hahn-series coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesPoly {
    coeffs: Vec<HahnSeries>,
}

impl SeriesPoly {
    pub fn new(mut coeffs: Vec<HahnSeries>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(HahnSeries::zero());
        }
        SeriesPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[HahnSeries] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &HahnSeries) -> HahnSeries {
        let mut acc = HahnSeries::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> SeriesPoly {
        if self.coeffs.len() == 1 {
            return SeriesPoly::new(vec![HahnSeries::zero()]);
        }
        SeriesPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&BigRational::from_integer((i as i64).into())))
                .collect(),
        )
    }

    /// Residue polynomial evaluated at a rational point.
    fn residue_eval(&self, at: &BigRational) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * at + c.residue()?;
        }
        Ok(acc)
    }
}

impl fmt::Display for SeriesPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, "]")
    }
}

impl FromStr for SeriesPoly {
    type Err = Error;

    /// Either a coefficient list `[c0, c1, ...]` (lowest degree first) or an
    /// expression in `X` such as `X^3 - (1 + t^(1/2))`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let coeffs = inner
                .split(',')
                .map(|c| c.trim().parse::<HahnSeries>())
                .collect::<Result<Vec<_>>>()?;
            return Ok(SeriesPoly::new(coeffs));
        }
        Ok(SeriesPoly::new(parse_series_poly(s, Some('X'))?))
    }
}

#[derive(Clone, Debug)]
pub struct HenselRoot {
    /// The root, carrying the requested floor as its precision.
    pub root: HahnSeries,
    /// Exact `|P(root)|` for the stored terms of `root`.
    pub residual: Magnitude,
    /// Iterates `x_0 = seed, x_1, …`.
    pub iterates: Vec<HahnSeries>,
}

/// Upper bound on Newton steps from quadratic convergence:
/// `|r_k| ≤ |r_0|^{2^k}` reaches `floor` once `2^k ≥ ln floor / ln |r_0|`.
fn step_bound(r0: &Value, floor: &Value) -> usize {
    let (lr, lf) = (r0.ln(), floor.ln());
    if lr >= 0.0 || lf >= 0.0 {
        return 2;
    }
    let ratio = (lf / lr).max(1.0);
    ratio.log2().ceil() as usize + 2
}

/// Lifts the residue root of `seed` to `x` with `|P(x)| ≤ floor` by
/// iterating `x ← x − P(x)/P′(x)`. Each step truncates at
/// `w = max(floor, |P(x)|²)`, which keeps the residual strictly decreasing.
pub fn newton_root(p: &SeriesPoly, seed: &HahnSeries, floor: &Value) -> Result<HenselRoot> {
    for c in p.coeffs() {
        if let Magnitude::Pos(v) = c.valuation() {
            if v.compare(&Value::one()) == Ordering::Greater {
                return Err(Error::NotInValuationRing(v.to_string()));
            }
        }
    }
    let s0 = seed.residue()?;
    if !p.residue_eval(&s0)?.is_zero() {
        return Err(Error::NotAResidueRoot);
    }
    let dp = p.derivative();
    if dp.residue_eval(&s0)?.is_zero() {
        return Err(Error::NonSimpleRoot);
    }

    let mut x = seed.without_precision();
    let mut iterates = vec![x.clone()];
    let mut r = p.eval(&x);
    let bound = match r.valuation() {
        Magnitude::Pos(r0) => step_bound(&r0, floor),
        Magnitude::Zero => 0,
    };
    let mut steps = 0;
    loop {
        let rv = r.valuation();
        let done = match &rv {
            Magnitude::Zero => true,
            Magnitude::Pos(v) => v.compare(floor) != Ordering::Greater,
        };
        if done {
            return Ok(HenselRoot {
                root: x.clone().with_precision(Some(floor.clone())),
                residual: rv,
                iterates,
            });
        }
        if steps >= bound {
            return Err(Error::NonConvergence(format!(
                "residual {} above floor after {} steps",
                rv, steps
            )));
        }
        let Magnitude::Pos(rval) = rv else { unreachable!() };
        let w = rval.mul(&rval).max(floor.clone());
        let d = dp.eval(&x);
        let d_inv = d.invert(&w.div(&rval))?.without_precision();
        let correction = &r * &d_inv;
        x = (&x - &correction).truncate(&w).without_precision();
        let next = p.eval(&x);
        if next.valuation() >= Magnitude::Pos(rval.clone()) {
            return Err(Error::NonConvergence(format!(
                "residual did not decrease below {}",
                Magnitude::Pos(rval)
            )));
        }
        r = next;
        iterates.push(x.clone());
        steps += 1;
    }
}

/// `[c0, 1]`-style helper: the polynomial `X − c`.
pub fn linear(c: &HahnSeries) -> SeriesPoly {
    SeriesPoly::new(vec![-c, HahnSeries::one()])
}

/// Root of `X^n − a` near 1, the standard footnote instance being
/// `X³ − (1 + t^{1/2})`.
pub fn nth_root_poly(n: usize, a: &HahnSeries) -> SeriesPoly {
    let mut coeffs = vec![HahnSeries::zero(); n + 1];
    coeffs[0] = -a;
    coeffs[n] = HahnSeries::constant(BigRational::one());
    SeriesPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> HahnSeries {
        x.parse().unwrap()
    }

    fn footnote() -> SeriesPoly {
        "X^3 - (1 + t^(1/2))".parse().unwrap()
    }

    #[test]
    fn first_newton_step_by_hand() {
        // P(1) = -t^(1/2), P'(1) = 3, so x_1 = 1 + t^(1/2)/3
        let out = newton_root(&footnote(), &HahnSeries::one(), &Value::ratio(1, 1_000_000)).unwrap();
        assert_eq!(out.iterates[1], s("1 + 1/3*t^(1/2)"));
    }

    #[test]
    fn footnote_root_converges() {
        let floor = Value::ratio(1, 1_000_000);
        let out = newton_root(&footnote(), &HahnSeries::one(), &floor).unwrap();
        assert!(out.residual <= Magnitude::Pos(floor.clone()));
        assert_eq!(out.root.residue().unwrap(), BigRational::one());
        // recheck the residual independently of the iteration
        let x = out.root.without_precision();
        let direct = &x.pow(3) - &s("1 + t^(1/2)");
        assert_eq!(direct.valuation(), out.residual);
    }

    #[test]
    fn linear_and_exact_roots() {
        let c = s("2 + t^(1/3) - 5*t^(1/7)");
        let out = newton_root(&linear(&c), &s("2"), &Value::ratio(1, 1000)).unwrap();
        assert_eq!(out.root.without_precision(), c);
        assert_eq!(out.residual, Magnitude::Zero);

        let p: SeriesPoly = "[-1, 0, 1]".parse().unwrap();
        let out = newton_root(&p, &HahnSeries::one(), &Value::ratio(1, 1000)).unwrap();
        assert_eq!(out.root.without_precision(), HahnSeries::one());
        assert_eq!(out.iterates.len(), 1);
    }

    #[test]
    fn rejects_bad_seeds() {
        let p: SeriesPoly = "X^2".parse().unwrap();
        assert_eq!(newton_root(&p, &HahnSeries::zero(), &Value::ratio(1, 2)).unwrap_err(), Error::NonSimpleRoot);
        assert_eq!(
            newton_root(&footnote(), &s("2"), &Value::ratio(1, 2)).unwrap_err(),
            Error::NotAResidueRoot
        );
        let big: SeriesPoly = "[t^2, 1]".parse().unwrap();
        assert!(matches!(newton_root(&big, &HahnSeries::zero(), &Value::ratio(1, 2)), Err(Error::NotInValuationRing(_))));
    }

    #[test]
    fn residual_bound_holds_for_square_roots() {
        let floor = Value::ratio(1, 10_000);
        for a in ["4 + t^(1/3)", "9 - 2*t^(2/3) + t^(1/5)", "1/4 + t^(1/2)"] {
            let a = s(a);
            let r = a.residue().unwrap();
            let sqrt = BigRational::new(r.numer().sqrt(), r.denom().sqrt());
            let out = newton_root(&nth_root_poly(2, &a), &HahnSeries::constant(sqrt), &floor).unwrap();
            assert!(out.residual <= Magnitude::Pos(floor.clone()));
        }
    }
}
