//! The projective line `KP¹` as a metric structure: normalized points,
//! the distance `d(a,b) = |a°b* − a*b°|`, homogenized integer polynomials
//! and predicate values `‖P(ā)‖ = |P^h(ā°, ā*)|`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hahn::HahnSeries;
use crate::values::{Magnitude, Value};

/// A commutative ring with an ultrametric absolute value into `Magnitude`,
/// containing the Hahn series field.
pub trait MetricRing: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_series(s: &HahnSeries) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn norm(&self) -> Magnitude;
    /// Multiply by the monomial `t^γ`.
    fn scale_monomial(&self, gamma: &Value) -> Self;
    fn scale(&self, q: &BigRational) -> Self;
    /// A nonzero rational `r` such that `self / r` has residue-level leading
    /// coefficient 1, used to pick canonical representatives. Only called on
    /// elements of norm 1.
    fn unit_scalar(&self) -> Option<BigRational>;
    fn parse(s: &str) -> Result<Self>;

    fn from_int(n: &BigInt) -> Self {
        Self::from_series(&HahnSeries::constant(BigRational::from_integer(n.clone())))
    }
}

impl MetricRing for HahnSeries {
    fn zero() -> Self {
        HahnSeries::zero()
    }
    fn one() -> Self {
        HahnSeries::one()
    }
    fn from_series(s: &HahnSeries) -> Self {
        s.clone()
    }
    fn is_zero(&self) -> bool {
        HahnSeries::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn norm(&self) -> Magnitude {
        self.valuation()
    }
    fn scale_monomial(&self, gamma: &Value) -> Self {
        HahnSeries::scale_monomial(self, gamma)
    }
    fn scale(&self, q: &BigRational) -> Self {
        HahnSeries::scale(self, q)
    }
    fn unit_scalar(&self) -> Option<BigRational> {
        self.residue().ok().filter(|r| !r.is_zero())
    }
    fn parse(s: &str) -> Result<Self> {
        s.parse()
    }
}

/// A point `[a° : a*]` with `max(|a°|, |a*|) = 1`.
#[derive(Clone, Debug)]
pub struct PPoint<R = HahnSeries> {
    num: R,
    den: R,
}

impl<R: MetricRing> PPoint<R> {
    /// Rescales `(x, y)` by `t^γ` with `γ = max(|x|,|y|)^{-1}`, then divides
    /// by a rational so that the denominator (or, at ∞, the numerator) has
    /// residue-level coefficient 1.
    pub fn normalize(x: R, y: R) -> Result<Self> {
        let m = match x.norm().max(y.norm()) {
            Magnitude::Zero => return Err(Error::ZeroPair),
            Magnitude::Pos(v) => v,
        };
        let gamma = m.inv();
        let (mut num, mut den) = (x.scale_monomial(&gamma), y.scale_monomial(&gamma));
        let pivot = if den.norm() == Magnitude::one() { &den } else { &num };
        if let Some(c) = pivot.unit_scalar() {
            if !c.is_one() {
                let c = c.recip();
                num = num.scale(&c);
                den = den.scale(&c);
            }
        }
        Ok(PPoint { num, den })
    }

    pub fn infinity() -> Self {
        PPoint { num: R::one(), den: R::zero() }
    }

    /// `[x : 1]` for `|x| ≤ 1`, otherwise the normalized pair.
    pub fn affine(x: R) -> Result<Self> {
        PPoint::normalize(x, R::one())
    }

    pub fn num(&self) -> &R {
        &self.num
    }

    pub fn den(&self) -> &R {
        &self.den
    }

    pub fn is_infinity(&self) -> bool {
        self.den.is_zero()
    }

    /// `d(self, other) = |a°b* − a*b°|`.
    pub fn distance(&self, other: &PPoint<R>) -> Magnitude {
        distance(self, other)
    }

    /// Applies a coordinatewise map (for instance an automorphism) and
    /// renormalizes.
    pub fn map<S: MetricRing, F>(&self, mut f: F) -> Result<PPoint<S>>
    where
        F: FnMut(&R) -> Result<S>,
    {
        PPoint::normalize(f(&self.num)?, f(&self.den)?)
    }

    /// Multiplies both coordinates by `u` (a change of representative when
    /// `|u| = 1`), without renormalizing.
    pub fn rescaled_by(&self, u: &R) -> PPoint<R> {
        PPoint { num: self.num.mul(u), den: self.den.mul(u) }
    }
}

/// Same projective point: the cross-difference vanishes.
impl<R: MetricRing> PartialEq for PPoint<R> {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den).sub(&self.den.mul(&other.num)).is_zero()
    }
}

impl<R: MetricRing> fmt::Display for PPoint<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            return write!(f, "inf");
        }
        write!(f, "[{} : {}]", self.num, self.den)
    }
}

impl<R: MetricRing> FromStr for PPoint<R> {
    type Err = Error;

    /// `[<series> : <series>]`, `inf`, or a bare element `x` meaning `[x : 1]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(PPoint::infinity());
        }
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (a, b) = inner
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("point `{}` needs `:`", s)))?;
            return PPoint::normalize(R::parse(a.trim())?, R::parse(b.trim())?);
        }
        PPoint::affine(R::parse(s)?)
    }
}

/// A map on points of the projective line, such as an automorphism acting
/// coordinatewise. `preimage` must invert `apply`.
pub trait PointMap<R: MetricRing> {
    fn apply(&self, p: &PPoint<R>) -> Result<PPoint<R>>;
    fn preimage(&self, p: &PPoint<R>) -> Result<PPoint<R>>;
}

pub fn normalize<R: MetricRing>(x: R, y: R) -> Result<PPoint<R>> {
    PPoint::normalize(x, y)
}

pub fn distance<R: MetricRing>(a: &PPoint<R>, b: &PPoint<R>) -> Magnitude {
    a.num.mul(&b.den).sub(&a.den.mul(&b.num)).norm()
}

/// `‖x*‖ = d(x, ∞)`.
pub fn norm_star<R: MetricRing>(a: &PPoint<R>) -> Magnitude {
    a.den.norm()
}

/// `‖x‖ = |x°|`.
pub fn norm_num<R: MetricRing>(a: &PPoint<R>) -> Magnitude {
    a.num.norm()
}

/// Integer polynomial in `n` variables; monomials are exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    pub fn zero(nvars: usize) -> Self {
        IntPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = IntPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = IntPoly::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, i64)>>(nvars: usize, terms: I) -> Result<Self> {
        let mut p = IntPoly::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::ArityMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    /// Re-embeds into `n ≥ nvars` variables.
    pub fn widen(&self, n: usize) -> IntPoly {
        let mut p = IntPoly::zero(n.max(self.nvars));
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e.resize(p.nvars, 0);
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.nvars.max(other.nvars);
        let mut p = self.widen(n);
        for (e, c) in &other.widen(n).terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let n = self.nvars.max(other.nvars);
        let (a, b) = (self.widen(n), other.widen(n));
        let mut p = IntPoly::zero(n);
        for (e1, c1) in &a.terms {
            for (e2, c2) in &b.terms {
                let e = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> IntPoly {
        let mut out = IntPoly::constant(self.nvars, BigInt::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `deg_{X_i} P`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// Parses with variables ordered by first appearance.
    pub fn parse_with_vars(s: &str, vars: &mut Vec<String>) -> Result<IntPoly> {
        let mut p = PolyParser { chars: s.chars().collect(), pos: 0, vars };
        let out = p.sum()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!("unexpected `{}` in `{}`", p.chars[p.pos], s)));
        }
        let n = p.vars.len();
        Ok(out.widen(n))
    }

    /// Parses against a fixed variable list; unknown names are errors.
    pub fn parse_in(s: &str, names: &[&str]) -> Result<IntPoly> {
        let mut vars: Vec<String> = names.iter().map(|v| v.to_string()).collect();
        let p = IntPoly::parse_with_vars(s, &mut vars)?;
        if vars.len() != names.len() {
            return Err(Error::Parse(format!("unknown variable `{}`", vars[names.len()])));
        }
        Ok(p)
    }
}

impl FromStr for IntPoly {
    type Err = Error;
    /// Variables are ordered alphabetically by name.
    fn from_str(s: &str) -> Result<Self> {
        let mut found = Vec::new();
        IntPoly::parse_with_vars(s, &mut found)?;
        found.sort();
        let names: Vec<&str> = found.iter().map(String::as_str).collect();
        IntPoly::parse_in(s, &names)
    }
}

fn fmt_monomial(f: &mut fmt::Formatter<'_>, c: &BigInt, factors: &[(String, u32)], first: bool) -> fmt::Result {
    let sign = if c.is_negative() { "-" } else { "+" };
    if first {
        if c.is_negative() {
            write!(f, "-")?;
        }
    } else {
        write!(f, " {} ", sign)?;
    }
    let a = c.abs();
    let vars: Vec<String> = factors
        .iter()
        .filter(|(_, k)| *k > 0)
        .map(|(v, k)| if *k == 1 { v.clone() } else { format!("{}^{}", v, k) })
        .collect();
    if vars.is_empty() {
        return write!(f, "{}", a);
    }
    if !a.is_one() {
        write!(f, "{}*", a)?;
    }
    write!(f, "{}", vars.join("*"))
}

fn var_name(i: usize, n: usize) -> String {
    if n <= 3 {
        ["X", "Y", "Z"][i].to_string()
    } else {
        format!("X{}", i + 1)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let factors: Vec<(String, u32)> =
                e.iter().enumerate().map(|(i, d)| (var_name(i, self.nvars), *d)).collect();
            fmt_monomial(f, c, &factors, k == 0)?;
        }
        Ok(())
    }
}

struct PolyParser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a mut Vec<String>,
}

impl PolyParser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<IntPoly> {
        let mut acc = if self.peek() == Some('-') {
            self.pos += 1;
            self.product()?.neg()
        } else {
            self.product()?
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<IntPoly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                // juxtaposition: `2X`, `XY` is read as one name, so only
                // digits followed by a name or `(` are implicit products
                Some('(') => acc = acc.mul(&self.power()?),
                Some(c) if c.is_alphabetic() => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<IntPoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.integer()?;
            let k = k.to_u32().ok_or_else(|| Error::Parse("exponent too large".into()))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("expected an integer".into()));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| Error::Parse(s))
    }

    fn atom(&mut self) -> Result<IntPoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(IntPoly::constant(self.vars.len(), self.integer()?)),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let i = match self.vars.iter().position(|v| *v == name) {
                    Some(i) => i,
                    None => {
                        self.vars.push(name);
                        self.vars.len() - 1
                    }
                };
                Ok(IntPoly::var(self.vars.len(), i))
            }
            other => Err(Error::Parse(format!("unexpected {:?} in polynomial", other))),
        }
    }
}

impl IntPoly {
    /// Renders with the given variable names, for instance terms of a
    /// formula.
    pub fn display_with(&self, names: &[String]) -> String {
        struct W<'a>(&'a IntPoly, &'a [String]);
        impl fmt::Display for W<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.0.terms.is_empty() {
                    return write!(f, "0");
                }
                for (k, (e, c)) in self.0.terms.iter().rev().enumerate() {
                    let factors: Vec<(String, u32)> =
                        e.iter().enumerate().map(|(i, d)| (self.1[i].clone(), *d)).collect();
                    fmt_monomial(f, c, &factors, k == 0)?;
                }
                Ok(())
            }
        }
        W(self, names).to_string()
    }
}

/// `P^h`: homogeneous of degree `r_i = deg_{X_i} P` in each pair `(X_i, X_i*)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomPolynomial {
    pair_degrees: Vec<u32>,
    // exponent of X_i per monomial; the X_i* exponent is r_i minus it
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl HomPolynomial {
    pub fn pair_degrees(&self) -> &[u32] {
        &self.pair_degrees
    }

    /// Monomials as `((deg X_i, deg X_i*) per pair, coefficient)`.
    pub fn monomials(&self) -> impl Iterator<Item = (Vec<(u32, u32)>, &BigInt)> + '_ {
        self.terms.iter().map(|(e, c)| {
            let pairs = e.iter().zip(&self.pair_degrees).map(|(d, r)| (*d, r - d)).collect();
            (pairs, c)
        })
    }

    /// `P^h(x̄, 1̄)`.
    pub fn dehomogenize(&self) -> IntPoly {
        IntPoly { nvars: self.pair_degrees.len(), terms: self.terms.clone() }
    }

    pub fn eval<R: MetricRing>(&self, args: &[PPoint<R>]) -> Result<R> {
        let n = self.pair_degrees.len();
        if args.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: args.len() });
        }
        // powers[i][k] = (a_i°^k, a_i*^k)
        let powers: Vec<Vec<(R, R)>> = args
            .iter()
            .zip(&self.pair_degrees)
            .map(|(a, r)| {
                let mut out = Vec::with_capacity(*r as usize + 1);
                let (mut pn, mut pd) = (R::one(), R::one());
                for _ in 0..=*r {
                    out.push((pn.clone(), pd.clone()));
                    pn = pn.mul(&a.num);
                    pd = pd.mul(&a.den);
                }
                out
            })
            .collect();
        let mut acc = R::zero();
        for (e, c) in &self.terms {
            let mut m = R::from_int(c);
            for (i, d) in e.iter().enumerate() {
                let r = self.pair_degrees[i];
                m = m.mul(&powers[i][*d as usize].0).mul(&powers[i][(r - d) as usize].1);
            }
            acc = acc.add(&m);
        }
        Ok(acc)
    }
}

impl fmt::Display for HomPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.pair_degrees.len();
        for (k, (pairs, c)) in self.monomials().collect::<Vec<_>>().into_iter().rev().enumerate() {
            let mut factors = Vec::new();
            for (i, (d, s)) in pairs.iter().enumerate() {
                factors.push((var_name(i, n), *d));
                factors.push((format!("{}*", var_name(i, n)), *s));
            }
            fmt_monomial(f, c, &factors, k == 0)?;
        }
        Ok(())
    }
}

pub fn homogenize(p: &IntPoly) -> HomPolynomial {
    let pair_degrees = (0..p.nvars).map(|i| p.degree_in(i)).collect();
    HomPolynomial { pair_degrees, terms: p.terms.clone() }
}

/// `‖P(ā)‖ = |P^h(ā°, ā*)|`.
pub fn eval_predicate<R: MetricRing>(p: &IntPoly, args: &[PPoint<R>]) -> Result<Magnitude> {
    if args.len() != p.nvars {
        return Err(Error::ArityMismatch { expected: p.nvars, got: args.len() });
    }
    Ok(homogenize(p).eval(args)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> HahnSeries {
        x.parse().unwrap()
    }

    fn pt(x: &str) -> PPoint {
        x.parse().unwrap()
    }

    fn v(x: &str) -> Magnitude {
        Magnitude::Pos(x.parse().unwrap())
    }

    #[test]
    fn normalize_uses_reciprocal_scaling() {
        let p = PPoint::normalize(s("t^(1/2)"), s("t^(1/4)")).unwrap();
        assert_eq!(p.num(), &s("1"));
        assert_eq!(p.den(), &s("t^(1/2)"));
        let inf = PPoint::normalize(s("5"), s("0")).unwrap();
        assert_eq!((inf.num(), inf.den()), (&s("1"), &s("0")));
        let zero = PPoint::normalize(s("0"), s("3")).unwrap();
        assert_eq!((zero.num(), zero.den()), (&s("0"), &s("1")));
        assert_eq!(PPoint::normalize(s("0"), s("0")).unwrap_err(), Error::ZeroPair);
    }

    #[test]
    fn d_to_infinity_is_norm_star() {
        let a = pt("[1 : t^(1/2)]");
        assert_eq!(distance(&a, &PPoint::infinity()), v("1/2"));
        assert_eq!(norm_star(&a), v("1/2"));
        assert_eq!(distance(&pt("inf"), &pt("[0 : 1]")), Magnitude::one());
        assert_eq!(distance(&a, &a), Magnitude::Zero);
    }

    #[test]
    fn projective_identification() {
        assert_eq!(pt("[2 : 2]"), pt("[1 : 1]"));
        assert_eq!(pt("[t^(1/3) : t^(1/3)]"), pt("[1:1]"));
        assert_ne!(pt("[1 : 2]"), pt("[1 : 1]"));
    }

    #[test]
    fn homogenization_examples() {
        let p: IntPoly = "X^2 + 1".parse().unwrap();
        assert_eq!(homogenize(&p).to_string(), "X^2 + X*^2");
        let q: IntPoly = "X1*X2 - 1".parse().unwrap();
        assert_eq!(homogenize(&q).pair_degrees(), &[1, 1]);
        let mons: Vec<_> = homogenize(&q).monomials().map(|(e, c)| (e, c.clone())).collect();
        assert!(mons.contains(&(vec![(1, 0), (1, 0)], BigInt::from(1))));
        assert!(mons.contains(&(vec![(0, 1), (0, 1)], BigInt::from(-1))));
        let x: IntPoly = "X".parse().unwrap();
        assert_eq!(homogenize(&x).to_string(), "X");
        assert_eq!(homogenize(&p).dehomogenize(), p);
    }

    #[test]
    fn predicate_examples() {
        let x: IntPoly = "X".parse().unwrap();
        assert_eq!(eval_predicate(&x, &[pt("[1 : t^(1/2)]")]).unwrap(), Magnitude::one());
        assert_eq!(eval_predicate(&x, &[pt("[t^(1/2) : 1]")]).unwrap(), v("1/2"));
        assert_eq!(
            eval_predicate(&x, &[pt("inf"), pt("inf")]).unwrap_err(),
            Error::ArityMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn xy_minus_z_expands_as_cross_term() {
        let p: IntPoly = "X*Y - Z".parse().unwrap();
        let (b, a, sb) = (pt("[1 : t^(1/3) + 2]"), pt("[t^(1/2) : 1]"), pt("[3 : 1 - t^(1/5)]"));
        let direct = &(&(b.num() * a.num()) * sb.den()) - &(&(sb.num() * b.den()) * a.den());
        assert_eq!(eval_predicate(&p, &[b, a, sb]).unwrap(), direct.valuation());
    }

    #[test]
    fn parse_juxtaposition_and_powers() {
        let p = IntPoly::parse_in("2X(Y - 1)^2", &["X", "Y"]).unwrap();
        let q = IntPoly::parse_in("2*X*Y^2 - 4*X*Y + 2*X", &["X", "Y"]).unwrap();
        assert_eq!(p, q);
        assert!(IntPoly::parse_in("X + W", &["X"]).is_err());
    }
}
