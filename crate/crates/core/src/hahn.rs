//! Finitely supported Hahn series over `Q` with exponents in `(R^+, ·)`.
//!
//! Exponents compose multiplicatively: `t^γ · t^δ = t^{γδ}` and the unit
//! monomial is `t^1 = 1`. The absolute value of a nonzero series is its
//! largest exponent, so the valuation ring is `{|x| ≤ 1}` and a term with a
//! smaller exponent is more infinitesimal.
//!
//! A series may carry a precision floor `π`: the represented element is only
//! known up to an error of absolute value at most `π`, and no stored exponent
//! is `≤ π`. Arithmetic propagates floors conservatively.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::groups::ConcreteGroup;
use crate::values::{parse_rational, Magnitude, Value};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct HahnSeries {
    terms: BTreeMap<Value, BigRational>,
    precision: Option<Value>,
}

impl HahnSeries {
    pub fn zero() -> Self {
        HahnSeries::default()
    }

    pub fn one() -> Self {
        HahnSeries::constant(BigRational::one())
    }

    pub fn constant(q: BigRational) -> Self {
        HahnSeries::monomial(q, Value::one())
    }

    pub fn from_int(n: i64) -> Self {
        HahnSeries::constant(BigRational::from_integer(n.into()))
    }

    /// `q · t^γ`.
    pub fn monomial(q: BigRational, gamma: Value) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(gamma, q);
        }
        HahnSeries { terms, precision: None }
    }

    pub fn from_terms<I: IntoIterator<Item = (Value, BigRational)>>(terms: I) -> Self {
        let mut s = HahnSeries::zero();
        for (g, q) in terms {
            s.add_term(g, q);
        }
        s
    }

    pub fn with_precision(mut self, floor: Option<Value>) -> Self {
        self.precision = floor;
        self.enforce_precision();
        self
    }

    pub fn without_precision(&self) -> Self {
        HahnSeries { terms: self.terms.clone(), precision: None }
    }

    fn add_term(&mut self, gamma: Value, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(gamma.clone()).or_insert_with(BigRational::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&gamma);
        }
    }

    fn enforce_precision(&mut self) {
        if let Some(p) = &self.precision {
            let keep = self.terms.split_off(p);
            self.terms = keep;
            self.terms.remove(p);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Value, BigRational> {
        &self.terms
    }

    pub fn precision(&self) -> Option<&Value> {
        self.precision.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// The dominant term `(γ, c)`: largest exponent.
    pub fn leading(&self) -> Option<(&Value, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// `|x|`: the largest exponent, or [`Magnitude::Zero`] for zero.
    pub fn valuation(&self) -> Magnitude {
        match self.leading() {
            Some((g, _)) => Magnitude::Pos(g.clone()),
            None => Magnitude::Zero,
        }
    }

    /// `max(|x|, π)`: a bound on the true absolute value.
    fn magnitude_bound(&self) -> Magnitude {
        let v = self.valuation();
        match &self.precision {
            Some(p) => v.max(Magnitude::Pos(p.clone())),
            None => v,
        }
    }

    pub fn coefficient(&self, gamma: &Value) -> BigRational {
        self.terms.get(gamma).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Residue in `Q`: the coefficient of `t^1`.
    pub fn residue(&self) -> Result<BigRational> {
        if let Magnitude::Pos(v) = self.valuation() {
            if v.compare(&Value::one()) == Ordering::Greater {
                return Err(Error::NotInValuationRing(v.to_string()));
            }
        }
        Ok(self.coefficient(&Value::one()))
    }

    /// Multiply by the monomial `t^γ`; exact, exponents and floor scale by γ.
    pub fn scale_monomial(&self, gamma: &Value) -> Self {
        HahnSeries {
            terms: self.terms.iter().map(|(g, q)| (g.mul(gamma), q.clone())).collect(),
            precision: self.precision.as_ref().map(|p| p.mul(gamma)),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return HahnSeries { terms: BTreeMap::new(), precision: self.precision.clone() };
        }
        HahnSeries {
            terms: self.terms.iter().map(|(g, c)| (g.clone(), c * q)).collect(),
            precision: self.precision.clone(),
        }
    }

    /// Drop every term with exponent `≤ floor` and record the floor.
    pub fn truncate(&self, floor: &Value) -> Self {
        let precision = match &self.precision {
            Some(p) => p.clone().max(floor.clone()),
            None => floor.clone(),
        };
        HahnSeries { terms: self.terms.clone(), precision: Some(precision) }.normalized()
    }

    /// Drop every term with exponent `≤ floor` without recording a floor.
    fn drop_below(&self, floor: &Value) -> Self {
        let mut terms = self.terms.clone();
        let mut keep = terms.split_off(floor);
        keep.remove(floor);
        HahnSeries { terms: keep, precision: self.precision.clone() }
    }

    fn normalized(mut self) -> Self {
        self.enforce_precision();
        self
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = HahnSeries::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `b` with `|a·b − 1| ≤ floor`, by expanding `a = c·t^v·(1 + ε)` into a
    /// geometric series in `ε` whose terms at relative size `≤ floor` are
    /// dropped. Monomials invert exactly.
    pub fn invert(&self, floor: &Value) -> Result<Self> {
        let (v, c) = self.leading().ok_or(Error::DivisionByZero)?;
        let (v, c) = (v.clone(), c.clone());
        let v_inv = v.inv();
        let c_inv = c.recip();
        // ε = a / (c t^v) − 1, exact
        let mut eps = self.without_precision().scale_monomial(&v_inv).scale(&c_inv);
        eps.add_term(Value::one(), -BigRational::one());
        let neg_eps = -&eps;
        let mut sum = HahnSeries::one();
        let mut power = HahnSeries::one();
        loop {
            power = (&power * &neg_eps).drop_below(floor);
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        let mut b = sum.scale_monomial(&v_inv).scale(&c_inv);
        // floor of the result: truncation error plus the input's own floor
        let mut precision = if eps.is_zero() { None } else { Some(floor.mul(&v_inv)) };
        if let Some(pa) = &self.precision {
            let from_input = pa.mul(&v_inv).mul(&v_inv);
            precision = Some(match precision {
                Some(p) => p.max(from_input),
                None => from_input,
            });
        }
        b.precision = precision;
        Ok(b.normalized())
    }

    /// Map `f` over coefficients and exponents (used by automorphisms).
    pub fn map_terms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Value, &BigRational) -> Result<(Value, BigRational)>,
    {
        let mut out = HahnSeries { terms: BTreeMap::new(), precision: self.precision.clone() };
        for (g, q) in &self.terms {
            let (g2, q2) = f(g, q)?;
            out.add_term(g2, q2);
        }
        Ok(out)
    }

    pub fn exponents(&self) -> impl Iterator<Item = &Value> {
        self.terms.keys()
    }
}

/// `Res(x, y)`: the residue of `x/y` when `0 < |x| ≤ |y|`, else 0.
pub fn res2(x: &HahnSeries, y: &HahnSeries) -> BigRational {
    let (Magnitude::Pos(vx), Magnitude::Pos(vy)) = (x.valuation(), y.valuation()) else {
        return BigRational::zero();
    };
    if vx.compare(&vy) == Ordering::Greater {
        return BigRational::zero();
    }
    // any relative floor below 1 leaves the t^1 coefficient of x/y exact;
    // use the size of y's non-leading part
    let rel = y
        .terms()
        .iter()
        .rev()
        .nth(1)
        .map(|(g, _)| g.div(&vy))
        .unwrap_or_else(|| Value::ratio(1, 2));
    let floor = rel.mul(&vy);
    let y_inv = y.invert(&floor).expect("y is nonzero");
    (x * &y_inv).residue().unwrap_or_else(|_| BigRational::zero())
}

impl Add for &HahnSeries {
    type Output = HahnSeries;
    fn add(self, rhs: &HahnSeries) -> HahnSeries {
        let mut out = self.clone();
        for (g, q) in &rhs.terms {
            out.add_term(g.clone(), q.clone());
        }
        out.precision = match (&self.precision, &rhs.precision) {
            (Some(a), Some(b)) => Some(a.clone().max(b.clone())),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        out.normalized()
    }
}

impl Sub for &HahnSeries {
    type Output = HahnSeries;
    fn sub(self, rhs: &HahnSeries) -> HahnSeries {
        self + &(-rhs)
    }
}

impl Neg for &HahnSeries {
    type Output = HahnSeries;
    fn neg(self) -> HahnSeries {
        HahnSeries {
            terms: self.terms.iter().map(|(g, q)| (g.clone(), -q)).collect(),
            precision: self.precision.clone(),
        }
    }
}

impl Mul for &HahnSeries {
    type Output = HahnSeries;
    fn mul(self, rhs: &HahnSeries) -> HahnSeries {
        let mut out = HahnSeries::zero();
        for (g1, q1) in &self.terms {
            for (g2, q2) in &rhs.terms {
                out.add_term(g1.mul(g2), q1 * q2);
            }
        }
        // error of a·b: π_a·max(|b|,π_b) and π_b·max(|a|,π_a)
        let mut floor: Option<Value> = None;
        let mut widen = |p: &Value, other: Magnitude| {
            if let Magnitude::Pos(m) = other {
                let e = p.mul(&m);
                floor = Some(match floor.take() {
                    Some(f) => f.max(e),
                    None => e,
                });
            }
        };
        if let Some(pa) = &self.precision {
            widen(pa, rhs.magnitude_bound());
        }
        if let Some(pb) = &rhs.precision {
            widen(pb, self.magnitude_bound());
        }
        out.precision = floor;
        out.normalized()
    }
}

impl fmt::Debug for HahnSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HahnSeries({})", self)
    }
}

pub(crate) fn fmt_exponent(g: &Value) -> String {
    // long rationals read better as prime powers
    match g.to_rational() {
        Some(q) if q.is_integer() && q.to_string().len() <= 12 => format!("t^{}", q),
        Some(q) if q.to_string().len() <= 12 => format!("t^({})", q),
        _ => format!("t^({})", g),
    }
}

impl fmt::Display for HahnSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() && self.precision.is_none() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, q) in self.terms.iter().rev() {
            let neg = q.is_negative();
            let a = q.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if g.is_one() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", fmt_exponent(g))?;
            } else {
                write!(f, "{}*{}", a, fmt_exponent(g))?;
            }
        }
        if let Some(p) = &self.precision {
            if first {
                write!(f, "O({})", fmt_exponent(p))?;
            } else {
                write!(f, " + O({})", fmt_exponent(p))?;
            }
        }
        Ok(())
    }
}

impl FromStr for HahnSeries {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut coeffs = parse_series_poly(s, None)?;
        if coeffs.len() > 1 {
            return Err(Error::Parse(format!("`{}` is not a series", s)));
        }
        Ok(coeffs.pop().unwrap_or_default())
    }
}

/// Parses an expression in `t` (and optionally a polynomial variable) into
/// the coefficient list of that variable, lowest degree first.
///
/// Grammar: sums and products of rationals (`3/4`), monomials `t^(e)` or
/// `t^k` where `e` is a value literal or rational, the variable and its
/// integer powers, parentheses, and `O(t^(e))` precision markers.
pub fn parse_series_poly(s: &str, var: Option<char>) -> Result<Vec<HahnSeries>> {
    let mut p = Parser { chars: s.chars().collect(), pos: 0, var };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(Error::Parse(format!("unexpected `{}` in `{}`", p.chars[p.pos], s)));
    }
    Ok(trim_poly(out))
}

type Poly = Vec<HahnSeries>;

fn trim_poly(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero() && c.precision().is_none()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(HahnSeries::zero());
    }
    p
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let zero = HahnSeries::zero();
    (0..n)
        .map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero))
        .collect()
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![HahnSeries::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    var: Option<char>,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        let s: String = self.chars.iter().collect();
        Err(Error::Parse(format!("{} at position {} in `{}`", msg, self.pos, s)))
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = poly_add(&acc, &self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                acc = poly_add(&acc, &t.iter().map(|c| -c).collect());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let neg = self.eat('-');
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = poly_mul(&acc, &self.factor()?);
        }
        if neg {
            acc = acc.iter().map(|c| -c).collect();
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.eat('^') {
            let k = self.integer()?;
            let k = k.to_u32().ok_or_else(|| Error::Parse("bad power".into()))?;
            let mut acc = vec![HahnSeries::one()];
            for _ in 0..k {
                acc = poly_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("digits"))
    }

    fn t_exponent(&mut self) -> Result<Value> {
        if !self.eat('^') {
            return self.err("expected `^` after `t`");
        }
        if self.peek() == Some('(') {
            self.pos += 1;
            let start = self.pos;
            let mut depth = 1;
            while self.pos < self.chars.len() {
                match self.chars[self.pos] {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                self.pos += 1;
            }
            if self.pos >= self.chars.len() {
                return self.err("unclosed `(`");
            }
            let inner: String = self.chars[start..self.pos].iter().collect();
            self.pos += 1;
            return inner.parse();
        }
        let k = self.integer()?;
        Value::from_rational(&BigRational::from_integer(k))
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some('t') => {
                self.pos += 1;
                let g = self.t_exponent()?;
                Ok(vec![HahnSeries::monomial(BigRational::one(), g)])
            }
            Some('O') => {
                self.pos += 1;
                if !self.eat('(') || !self.eat('t') {
                    return self.err("expected `O(t^...)`");
                }
                let g = self.t_exponent()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(vec![HahnSeries::zero().with_precision(Some(g))])
            }
            Some(c) if Some(c) == self.var => {
                self.pos += 1;
                Ok(vec![HahnSeries::zero(), HahnSeries::one()])
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let mut q = BigRational::from_integer(n);
                // a literal fraction binds tighter than `*`
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    q /= BigRational::from_integer(d);
                }
                Ok(vec![HahnSeries::constant(q)])
            }
            _ => self.err("unexpected token"),
        }
    }
}

/// A concrete field `Q((t^Γ))`: the exponent group, optionally with its
/// divisible hull admitted.
#[derive(Clone, Debug)]
pub struct FieldHandle {
    pub group: ConcreteGroup,
    pub allow_roots: bool,
}

impl FieldHandle {
    pub fn new(group: ConcreteGroup, allow_roots: bool) -> Self {
        FieldHandle { group, allow_roots }
    }

    pub fn admits(&self, gamma: &Value) -> bool {
        if self.allow_roots {
            self.group.hull_contains(gamma)
        } else {
            self.group.contains(gamma)
        }
    }

    /// Verifies every exponent (and the floor) lies in the declared group.
    pub fn check(&self, s: &HahnSeries) -> Result<()> {
        for g in s.exponents().chain(s.precision()) {
            if !self.admits(g) {
                return Err(Error::ExponentOutsideGroup {
                    exponent: g.to_string(),
                    group: self.describe(),
                });
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        if self.allow_roots {
            format!("hull{}", self.group)
        } else {
            self.group.to_string()
        }
    }

    pub fn add(&self, a: &HahnSeries, b: &HahnSeries) -> Result<HahnSeries> {
        self.check(a)?;
        self.check(b)?;
        Ok(a + b)
    }

    pub fn negate(&self, a: &HahnSeries) -> Result<HahnSeries> {
        self.check(a)?;
        Ok(-a)
    }

    pub fn mul(&self, a: &HahnSeries, b: &HahnSeries) -> Result<HahnSeries> {
        self.check(a)?;
        self.check(b)?;
        Ok(a * b)
    }

    pub fn parse(&self, s: &str) -> Result<HahnSeries> {
        let x: HahnSeries = s.parse()?;
        self.check(&x)?;
        Ok(x)
    }
}

/// `dg_K = sup{|x| : |x| < 1}`: 0 when trivially valued, the largest group
/// element below 1 for a discrete group, 1 when dense.
pub fn discreteness_gap(f: &FieldHandle) -> Magnitude {
    match f.group.rank() {
        0 => Magnitude::Zero,
        1 if !f.allow_roots => {
            Magnitude::Pos(f.group.discrete_generator_below_one().expect("rank one"))
        }
        _ => Magnitude::one(),
    }
}

/// Parses `1/2`-style rationals; re-exported for the CLI.
pub fn parse_coefficient(s: &str) -> Result<BigRational> {
    parse_rational(s)
}
