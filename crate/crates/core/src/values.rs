//! Exact positive reals of the form `∏ p^{e_p}` with rational exponents.
//!
//! A [`Value`] is both an element of a value group inside `(R^+, ·)` and a
//! metric distance. Exponent maps are kept canonical (no zero exponents, keys
//! prime) so structural equality is semantic equality. Ordering is decided
//! exactly by clearing exponent denominators and comparing big integers; a
//! floating-point logarithm is cached only to skip that work when the two
//! sides are far apart.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative gap above which the cached logarithms decide the order.
const LOG_MARGIN: f64 = 1e-9;

#[derive(Clone)]
pub struct Value {
    exps: BTreeMap<u64, BigRational>,
    log: f64,
}

impl Value {
    pub fn one() -> Self {
        Value { exps: BTreeMap::new(), log: 0.0 }
    }

    fn from_map(mut exps: BTreeMap<u64, BigRational>) -> Self {
        exps.retain(|_, e| !e.is_zero());
        let log = exps.iter().map(|(p, e)| ratio_to_f64(e) * (*p as f64).ln()).sum();
        Value { exps, log }
    }

    /// `p^e`. The base may be any integer ≥ 1; it is factored.
    pub fn power_of(base: u64, e: BigRational) -> Result<Self> {
        let f = factor_u64(base)?;
        let mut exps = BTreeMap::new();
        for (p, k) in f {
            exps.insert(p, &e * BigRational::from_integer(BigInt::from(k)));
        }
        Ok(Value::from_map(exps))
    }

    pub fn from_integer(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NonPositive("0".into()));
        }
        Value::power_of(n, BigRational::one())
    }

    /// Factors a positive rational into integer prime exponents.
    pub fn from_rational(q: &BigRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::NonPositive(q.to_string()));
        }
        let num = q.numer().to_u64().ok_or_else(|| Error::TooLarge(q.numer().to_string()))?;
        let den = q.denom().to_u64().ok_or_else(|| Error::TooLarge(q.denom().to_string()))?;
        let mut exps: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (p, k) in factor_u64(num)? {
            *exps.entry(p).or_insert_with(BigRational::zero) += BigRational::from_integer(k.into());
        }
        for (p, k) in factor_u64(den)? {
            *exps.entry(p).or_insert_with(BigRational::zero) -= BigRational::from_integer(k.into());
        }
        Ok(Value::from_map(exps))
    }

    /// Shorthand for `from_rational(n/d)`; panics on non-positive input.
    pub fn ratio(n: i64, d: i64) -> Self {
        Value::from_rational(&BigRational::new(n.into(), d.into())).expect("positive ratio")
    }

    pub fn exponents(&self) -> &BTreeMap<u64, BigRational> {
        &self.exps
    }

    pub fn exponent(&self, p: u64) -> BigRational {
        self.exps.get(&p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &Value) -> Value {
        let mut exps = self.exps.clone();
        for (p, e) in &other.exps {
            *exps.entry(*p).or_insert_with(BigRational::zero) += e;
        }
        Value::from_map(exps)
    }

    pub fn inv(&self) -> Value {
        Value {
            exps: self.exps.iter().map(|(p, e)| (*p, -e)).collect(),
            log: -self.log,
        }
    }

    pub fn div(&self, other: &Value) -> Value {
        self.mul(&other.inv())
    }

    /// `self^q` for rational `q` (roots included).
    pub fn pow(&self, q: &BigRational) -> Value {
        Value::from_map(self.exps.iter().map(|(p, e)| (*p, e * q)).collect())
    }

    pub fn powi(&self, k: i64) -> Value {
        self.pow(&BigRational::from_integer(k.into()))
    }

    /// True when every exponent is an integer, i.e. the value is rational.
    pub fn is_rational(&self) -> bool {
        self.exps.values().all(|e| e.is_integer())
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        if !self.is_rational() {
            return None;
        }
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (p, e) in &self.exps {
            let k = e.to_integer();
            let k_abs = k.abs().to_u32()?;
            let f = BigUint::from(*p).pow(k_abs);
            if k.is_positive() {
                num *= f;
            } else {
                den *= f;
            }
        }
        Some(BigRational::new(num.into(), den.into()))
    }

    pub fn ln(&self) -> f64 {
        self.log
    }

    pub fn to_f64(&self) -> f64 {
        self.log.exp()
    }

    /// Splits `self = q · r` with `q` rational and every exponent of the
    /// radical `r` in `[0, 1)`.
    pub fn split_rational(&self) -> (BigRational, Value) {
        let mut int_part = BTreeMap::new();
        let mut frac_part = BTreeMap::new();
        for (p, e) in &self.exps {
            let fl = e.floor();
            let fr = e - &fl;
            if !fl.is_zero() {
                int_part.insert(*p, fl);
            }
            if !fr.is_zero() {
                frac_part.insert(*p, fr);
            }
        }
        let q = Value::from_map(int_part).to_rational().expect("integer exponents");
        (q, Value::from_map(frac_part))
    }

    /// Exact comparison: clear denominators of `self / other` by their lcm
    /// `N` and compare `∏ p^{N·e_p}` against 1 as a ratio of big integers.
    pub fn compare(&self, other: &Value) -> Ordering {
        let gap = self.log - other.log;
        if gap.abs() > LOG_MARGIN * (1.0 + self.log.abs() + other.log.abs()) {
            return if gap > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        self.compare_exact(other)
    }

    pub fn compare_exact(&self, other: &Value) -> Ordering {
        let ratio = self.div(other);
        if ratio.is_one() {
            return Ordering::Equal;
        }
        let n = ratio
            .exps
            .values()
            .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (p, e) in &ratio.exps {
            let k = (e * BigRational::from_integer(n.clone())).to_integer();
            let k_abs = k.abs().to_u32().expect("exponent fits in u32");
            let f = BigUint::from(*p).pow(k_abs);
            if k.is_positive() {
                num *= f;
            } else {
                den *= f;
            }
        }
        num.cmp(&den)
    }

    pub fn max_value(&self, other: &Value) -> Value {
        if self.compare(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn min_value(&self, other: &Value) -> Value {
        if self.compare(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.exps == other.exps
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exps.hash(state);
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({})", self)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (p, e) in &self.exps {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if e.is_one() {
                write!(f, "{}", p)?;
            } else {
                write!(f, "{}^{}", p, e)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Value {
    type Err = Error;

    /// Parses `2^1/2 * 3^-1`, `6`, `1`, and also a plain rational such as
    /// `3/4` (no `^` present), which is factored.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty value literal".into()));
        }
        if !s.contains('^') && !s.contains('*') {
            let q = parse_rational(s)?;
            return Value::from_rational(&q);
        }
        let mut acc = Value::one();
        for factor in s.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => {
                    let e = e.trim().trim_start_matches('(').trim_end_matches(')');
                    (b.trim(), parse_rational(e)?)
                }
                None => (factor, BigRational::one()),
            };
            let base: u64 = base
                .parse()
                .map_err(|_| Error::Parse(format!("bad base `{}` in value literal", base)))?;
            if base == 0 {
                return Err(Error::NonPositive("0".into()));
            }
            acc = acc.mul(&Value::power_of(base, exp)?);
        }
        Ok(acc)
    }
}

/// A [`Value`] or the exact zero. `Zero` sorts below every value; it is the
/// absolute value of `0` and the distance between equal points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Magnitude {
    Zero,
    Pos(Value),
}

impl Magnitude {
    pub fn one() -> Self {
        Magnitude::Pos(Value::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Magnitude::Zero)
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Magnitude::Zero => None,
            Magnitude::Pos(v) => Some(v),
        }
    }

    pub fn mul(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Pos(a), Magnitude::Pos(b)) => Magnitude::Pos(a.mul(b)),
            _ => Magnitude::Zero,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Zero => 0.0,
            Magnitude::Pos(v) => v.to_f64(),
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Zero => write!(f, "0"),
            Magnitude::Pos(v) => write!(f, "{}", v),
        }
    }
}

impl From<Value> for Magnitude {
    fn from(v: Value) -> Self {
        Magnitude::Pos(v)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{}`", s));
    let q = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.parse().map_err(|_| bad())?),
    };
    Ok(q)
}

pub(crate) fn ratio_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // huge numerator or denominator: scale both down first
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

/// Trial-division factorization.
pub fn factor_u64(mut n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::NonPositive("0".into()));
    }
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(out)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor_u64(n).map(|f| f == vec![(n, 1)]).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Value {
        s.parse().unwrap()
    }

    #[test]
    fn mul_examples() {
        assert!(v("2").mul(&v("2^-1")).is_one());
        assert_eq!(v("2").mul(&v("3")), v("2 * 3"));
        assert_eq!(v("2^1/2").mul(&v("2^1/2")), v("2"));
    }

    #[test]
    fn compare_sqrt6() {
        // 2 vs sqrt(6): squares are 4 < 6
        assert_eq!(v("2").compare(&v("2^1/2 * 3^1/2")), Ordering::Less);
        assert_eq!(v("2").compare_exact(&v("2^1/2 * 3^1/2")), Ordering::Less);
        let x = v("5^2/3 * 7^-1/5");
        assert_eq!(x.compare(&x), Ordering::Equal);
        assert_eq!(v("2^-1").compare(&Value::one()), Ordering::Less);
    }

    #[test]
    fn from_rational_examples() {
        let twelve = Value::from_rational(&BigRational::from_integer(12.into())).unwrap();
        assert_eq!(twelve.exponent(2), BigRational::from_integer(2.into()));
        assert_eq!(twelve.exponent(3), BigRational::one());
        assert_eq!(twelve.exponents().len(), 2);
        assert!(Value::ratio(1, 1).is_one());
        let tq = Value::ratio(3, 4);
        assert_eq!(tq.exponent(3), BigRational::one());
        assert_eq!(tq.exponent(2), BigRational::from_integer((-2).into()));
        assert!(Value::from_rational(&BigRational::zero()).is_err());
        assert!(Value::from_rational(&BigRational::from_integer((-3).into())).is_err());
    }

    #[test]
    fn min_max() {
        let half = Value::ratio(1, 2);
        let quarter = Value::ratio(1, 4);
        assert_eq!(half.max_value(&quarter), half);
        assert_eq!(half.max_value(&half), half);
        assert_eq!(v("2").min_value(&v("3")), v("2"));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(v("2^1/2 * 3^-1").to_string(), "2^1/2 * 3^-1");
        assert_eq!(v("1").to_string(), "1");
        assert_eq!(v("3/4"), v("2^-2 * 3"));
        assert_eq!(v("4^1/2"), v("2"));
        assert_eq!(v("2^(-1/2)"), v("2^-1/2"));
        assert!("2^x".parse::<Value>().is_err());
        assert!("0".parse::<Value>().is_err());
    }

    #[test]
    fn exact_path_near_ties() {
        // 2^(1/3) * 3^(-1/5) against a nearby rational forces the exact path
        let a = v("2^1/3 * 3^-1/5");
        let a_f = a.to_f64();
        let (n, d) = ((a_f * 1e12).floor() as i64, 1_000_000_000_000i64);
        let below = Value::from_rational(&BigRational::new(n.into(), d.into()));
        // n/d is not factorable into small primes in general; compare through the exact path only when it factors
        if let Ok(b) = below {
            assert_eq!(a.compare_exact(&b), Ordering::Greater);
        }
        assert_eq!(Value::ratio(3, 4).to_rational().unwrap(), BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn split_rational_parts() {
        let (q, r) = v("2^3/2 * 3^-1/3").split_rational();
        // 2^(3/2) 3^(-1/3) = 2 * 3^-1 * 2^(1/2) 3^(2/3)
        assert_eq!(q, BigRational::new(2.into(), 3.into()));
        assert_eq!(r, v("2^1/2 * 3^2/3"));
    }
}
