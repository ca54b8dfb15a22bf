//! Exact real numbers spanned by [`Value`]s: finite `Q`-linear combinations
//! of radicals `∏ p^{f_p}` with every `f_p ∈ [0, 1)`.
//!
//! Such radicals are linearly independent over `Q`, so a combination is zero
//! exactly when its coefficient map is empty. Signs are then decided by
//! refining integer root brackets until the sum's interval excludes zero,
//! which always terminates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::values::{ratio_to_f64, Magnitude, Value};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Real {
    // radical (exponents in [0,1)) -> nonzero coefficient
    terms: BTreeMap<Value, BigRational>,
}

impl Real {
    pub fn zero() -> Self {
        Real::default()
    }

    pub fn one() -> Self {
        Real::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Value::one(), q);
        }
        Real { terms }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Real::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_value(v: &Value) -> Self {
        let (q, r) = v.split_rational();
        let mut terms = BTreeMap::new();
        terms.insert(r, q);
        Real { terms }
    }

    pub fn from_magnitude(m: &Magnitude) -> Self {
        match m {
            Magnitude::Zero => Real::zero(),
            Magnitude::Pos(v) => Real::from_value(v),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value, when no radical is involved.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Value::one()).cloned(),
            _ => None,
        }
    }

    /// The value as a single [`Magnitude`], when the number is `0` or a
    /// positive multiple of one radical.
    pub fn to_magnitude(&self) -> Option<Magnitude> {
        if self.terms.is_empty() {
            return Some(Magnitude::Zero);
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (r, q) = self.terms.iter().next()?;
        if !q.is_positive() {
            return None;
        }
        let qv = Value::from_rational(q).ok()?;
        Some(Magnitude::Pos(qv.mul(r)))
    }

    fn insert_term(terms: &mut BTreeMap<Value, BigRational>, r: Value, q: BigRational) {
        let slot = terms.entry(r).or_insert_with(BigRational::zero);
        *slot += q;
        if slot.is_zero() {
            terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(r, q)| ratio_to_f64(q) * r.to_f64()).sum()
    }

    pub fn signum(&self) -> Ordering {
        if self.terms.is_empty() {
            return Ordering::Equal;
        }
        if let Some(q) = self.to_rational() {
            return q.cmp(&BigRational::zero());
        }
        // cheap float screen
        let approx = self.to_f64();
        let scale: f64 = self.terms.iter().map(|(r, q)| ratio_to_f64(q).abs() * r.to_f64()).sum();
        if approx.abs() > 1e-9 * scale.max(1e-300) {
            return if approx > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        let mut bits = 64u64;
        loop {
            let (lo, hi) = self.bracket(bits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }

    /// Interval `[lo, hi]` containing the number, with radicals bracketed to
    /// `bits` binary digits.
    fn bracket(&self, bits: u64) -> (BigRational, BigRational) {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (r, q) in &self.terms {
            let (rl, rh) = radical_bracket(r, bits);
            let rl = BigRational::from_integer(rl.into()) / &scale;
            let rh = BigRational::from_integer(rh.into()) / &scale;
            if q.is_positive() {
                lo += q * &rl;
                hi += q * &rh;
            } else {
                lo += q * &rh;
                hi += q * &rl;
            }
        }
        (lo, hi)
    }

    pub fn compare(&self, other: &Real) -> Ordering {
        (self - other).signum()
    }

    pub fn max(self, other: Real) -> Real {
        if self.compare(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if self.compare(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Clamp into `[0, 1]`.
    pub fn clamp01(self) -> Real {
        self.max(Real::zero()).min(Real::one())
    }
}

/// `floor(r·2^bits)` and `floor(r·2^bits) + 1` for a radical `r`.
fn radical_bracket(r: &Value, bits: u64) -> (BigUint, BigUint) {
    if r.is_one() {
        let v = BigUint::one() << bits;
        return (v.clone(), v);
    }
    let n = r
        .exponents()
        .values()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
    let n_u32 = n.to_u32().expect("root degree fits in u32");
    let mut m = BigUint::one();
    for (p, e) in r.exponents() {
        let k = (e * BigRational::from_integer(n.clone())).to_integer();
        m *= BigUint::from(*p).pow(k.to_u32().expect("radical exponent in [0,1)"));
    }
    let shifted = m << (bits * n_u32 as u64);
    let lo = shifted.nth_root(n_u32);
    let hi = &lo + BigUint::one();
    (lo, hi)
}

impl Add for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        let mut terms = self.terms.clone();
        for (r, q) in &rhs.terms {
            Real::insert_term(&mut terms, r.clone(), q.clone());
        }
        Real { terms }
    }
}

impl Sub for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        self + &(-rhs)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { terms: self.terms.iter().map(|(r, q)| (r.clone(), -q)).collect() }
    }
}

impl Mul for &Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        let mut terms = BTreeMap::new();
        for (r1, q1) in &self.terms {
            for (r2, q2) in &rhs.terms {
                let (q, r) = r1.mul(r2).split_rational();
                Real::insert_term(&mut terms, r, q * q1 * q2);
            }
        }
        Real { terms }
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (r, q) in &self.terms {
            let (sign, q_abs) = if q.is_negative() { ("-", -q) } else { ("+", q.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            if r.is_one() {
                write!(f, "{}", q_abs)?;
            } else if q_abs.is_one() {
                write!(f, "[{}]", r)?;
            } else {
                write!(f, "{}*[{}]", q_abs, r)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn val(s: &str) -> Value {
        s.parse().unwrap()
    }

    #[test]
    fn cancellation_is_exact() {
        let m = Real::from_value(&val("2^-1/2 * 3^1/3"));
        let one_minus = &Real::one() - &m;
        let sum = &m + &one_minus;
        assert_eq!(sum, Real::one());
        assert_eq!(sum.compare(&Real::one()), Ordering::Equal);
    }

    #[test]
    fn linear_dependence_over_rationals_is_normalized() {
        // 8^(1/2) = 2 * 2^(1/2)
        let a = Real::from_value(&val("2^3/2"));
        let b = Real::from_value(&val("2^1/2"));
        let diff = &a - &(&b + &b);
        assert!(diff.is_zero());
    }

    #[test]
    fn sign_of_close_radicals() {
        // sqrt(2) + sqrt(3) vs sqrt(10): squares 5 + 2 sqrt(6) < 10 since 24 < 25
        let lhs = &Real::from_value(&val("2^1/2")) + &Real::from_value(&val("3^1/2"));
        let rhs = Real::from_value(&val("2^1/2 * 5^1/2"));
        assert_eq!(lhs.compare(&rhs), Ordering::Less);
        // 3/2 vs sqrt(2) via brackets
        let x = &Real::from_ratio(3, 2) - &Real::from_value(&val("2^1/2"));
        assert_eq!(x.bracket(64).0.cmp(&BigRational::zero()), Ordering::Greater);
        assert_eq!(x.signum(), Ordering::Greater);
    }

    #[test]
    fn nearly_cancelling_sum_uses_brackets() {
        // 2^(1/2) - 1414213562373095/10^15 is positive but tiny
        let approx = Real::from_rational(BigRational::new(
            1_414_213_562_373_095i64.into(),
            1_000_000_000_000_000i64.into(),
        ));
        let d = &Real::from_value(&val("2^1/2")) - &approx;
        assert_eq!(d.signum(), Ordering::Greater);
        assert_eq!((-&d).signum(), Ordering::Less);
    }

    #[test]
    fn products_and_magnitudes() {
        let r = Real::from_value(&val("2^1/2"));
        assert_eq!(&r * &r, Real::from_ratio(2, 1));
        assert_eq!(
            Real::from_value(&val("2^3/2 * 3")).to_magnitude(),
            Some(Magnitude::Pos(val("2^3/2 * 3")))
        );
        assert_eq!(Real::from_ratio(7, 3).clamp01(), Real::one());
        assert_eq!(Real::from_ratio(-7, 3).clamp01(), Real::zero());
    }
}
