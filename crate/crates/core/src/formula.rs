//! Continuous-logic formulas over the projective line with an optional
//! automorphism `σ`, evaluated exactly on quantifier-free parts and by
//! finite witness sets on `sup`/`inf`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::groups::{dense_witness, search_shells, ConcreteGroup};
use crate::hahn::HahnSeries;
use crate::projective::{distance, eval_predicate, IntPoly, MetricRing, PPoint, PointMap};
use crate::real::Real;
use crate::values::{parse_rational, Magnitude, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(String),
    Infinity,
    Point(PPoint),
    /// `σ^k(term)`
    Sigma(u32, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn sigma(t: Term) -> Term {
        match t {
            Term::Sigma(k, inner) => Term::Sigma(k + 1, inner),
            other => Term::Sigma(1, Box::new(other)),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Sigma(_, t) => t.collect_vars(out),
            Term::Infinity | Term::Point(_) => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Infinity => write!(f, "inf"),
            Term::Point(p) if p.is_infinity() => write!(f, "inf"),
            Term::Point(p) => write!(f, "[{} : {}]", p.num(), p.den()),
            Term::Sigma(1, t) => write!(f, "s({})", t),
            Term::Sigma(k, t) => write!(f, "s^{}({})", k, t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Pred(IntPoly, Vec<Term>),
    Dist(Term, Term),
    Const(BigRational),
    /// `1 − x`
    Neg(Box<Formula>),
    /// `max(0, x − y)`
    TruncSub(Box<Formula>, Box<Formula>),
    Max(Box<Formula>, Box<Formula>),
    Min(Box<Formula>, Box<Formula>),
    Prod(Box<Formula>, Box<Formula>),
    /// `min(1, x + y)`
    ClampAdd(Box<Formula>, Box<Formula>),
    Sup(String, Box<Formula>),
    Inf(String, Box<Formula>),
}

impl Formula {
    pub fn pred(p: IntPoly, terms: Vec<Term>) -> Result<Formula> {
        if p.nvars() != terms.len() {
            return Err(Error::ArityMismatch { expected: p.nvars(), got: terms.len() });
        }
        Ok(Formula::Pred(p, terms))
    }

    pub fn constant(q: BigRational) -> Result<Formula> {
        if q.is_negative() || q > BigRational::one() {
            return Err(Error::InvalidArgument(format!("constant {} outside [0, 1]", q)));
        }
        Ok(Formula::Const(q))
    }

    pub fn ratio(n: i64, d: i64) -> Formula {
        Formula::constant(BigRational::new(n.into(), d.into())).expect("constant in [0, 1]")
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn trunc_sub(a: Formula, b: Formula) -> Formula {
        Formula::TruncSub(Box::new(a), Box::new(b))
    }

    pub fn max(a: Formula, b: Formula) -> Formula {
        Formula::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: Formula, b: Formula) -> Formula {
        Formula::Min(Box::new(a), Box::new(b))
    }

    pub fn prod(a: Formula, b: Formula) -> Formula {
        Formula::Prod(Box::new(a), Box::new(b))
    }

    pub fn clamp_add(a: Formula, b: Formula) -> Formula {
        Formula::ClampAdd(Box::new(a), Box::new(b))
    }

    pub fn sup(v: &str, f: Formula) -> Formula {
        Formula::Sup(v.to_string(), Box::new(f))
    }

    pub fn inf(v: &str, f: Formula) -> Formula {
        Formula::Inf(v.to_string(), Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Pred(_, ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Formula::Dist(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Const(_) => {}
            Formula::Neg(f) => f.collect_free(out),
            Formula::TruncSub(a, b)
            | Formula::Max(a, b)
            | Formula::Min(a, b)
            | Formula::Prod(a, b)
            | Formula::ClampAdd(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Sup(v, f) | Formula::Inf(v, f) => {
                let mut inner = BTreeSet::new();
                f.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Pred(..) | Formula::Dist(..) | Formula::Const(_) => true,
            Formula::Neg(f) => f.is_quantifier_free(),
            Formula::TruncSub(a, b)
            | Formula::Max(a, b)
            | Formula::Min(a, b)
            | Formula::Prod(a, b)
            | Formula::ClampAdd(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Sup(..) | Formula::Inf(..) => false,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pred(p, ts) => {
                let names: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "||{}||", p.display_with(&names))
            }
            Formula::Dist(a, b) => write!(f, "d({}, {})", a, b),
            Formula::Const(q) => write!(f, "{}", q),
            Formula::Neg(a) => write!(f, "neg({})", a),
            Formula::TruncSub(a, b) => write!(f, "({} - {})", a, b),
            Formula::Max(a, b) => write!(f, "max({}, {})", a, b),
            Formula::Min(a, b) => write!(f, "min({}, {})", a, b),
            Formula::Prod(a, b) => write!(f, "({} * {})", a, b),
            Formula::ClampAdd(a, b) => write!(f, "({} + {})", a, b),
            Formula::Sup(v, a) => write!(f, "(sup {} . {})", v, a),
            Formula::Inf(v, a) => write!(f, "(inf {} . {})", v, a),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    /// Syntax: `inf y . min(1, ||y*x - s(y)|| + max(1 - ||y||, 1 - ||y^*||))`.
    /// `+` is addition capped at 1, `-` is truncated subtraction, `*` the
    /// product. `||P(terms)||` is a predicate, `||t^*||` is `d(t, inf)`,
    /// `d(a, b)` the distance. Terms are variables, `inf`, point literals
    /// `[a : b]` and `s(...)` / `s^k(...)` for `σ`.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = FormulaParser { chars: s.chars().collect(), pos: 0 };
        let f = p.formula()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!("trailing input at {} in `{}`", p.pos, s)));
        }
        Ok(f)
    }
}

struct FormulaParser {
    chars: Vec<char>,
    pos: usize,
}

const KEYWORDS: [&str; 8] = ["inf", "sup", "min", "max", "neg", "d", "dist", "s"];

impl FormulaParser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn looking_at(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        self.pos + n <= self.chars.len() && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars())
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.looking_at(s) {
            self.pos += s.chars().count();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", s)))
        }
    }

    fn err(&self, msg: &str) -> Error {
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().take(20).collect();
        Error::Parse(format!("{} at `{}`", msg, rest))
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.chars.get(self.pos).is_some_and(|c| c.is_alphabetic()) {
            return None;
        }
        while self.chars.get(self.pos).is_some_and(|c| c.is_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut acc = self.product()?;
        loop {
            if self.eat("+") {
                acc = Formula::clamp_add(acc, self.product()?);
            } else if self.peek() == Some('-') {
                self.pos += 1;
                acc = Formula::trunc_sub(acc, self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Formula> {
        let mut acc = self.primary()?;
        while self.eat("*") {
            acc = Formula::prod(acc, self.primary()?);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek() {
            None => Err(self.err("unexpected end")),
            Some('(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            Some('|') => {
                self.expect("||")?;
                let f = self.norm_body()?;
                self.expect("||")?;
                Ok(f)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == '/' || *c == '.') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                let q = if let Some((w, frac)) = text.split_once('.') {
                    let denom = BigInt::from(10u32).pow(frac.len() as u32);
                    let n: BigInt = format!("{}{}", w, frac).parse().map_err(|_| self.err("bad number"))?;
                    BigRational::new(n, denom)
                } else {
                    parse_rational(&text)?
                };
                Formula::constant(q)
            }
            Some(_) => {
                let save = self.pos;
                let name = self.ident().ok_or_else(|| self.err("unexpected character"))?;
                match name.as_str() {
                    "inf" | "sup" => {
                        let v = self.ident().ok_or_else(|| self.err("expected a variable"))?;
                        self.expect(".")?;
                        let body = self.formula()?;
                        Ok(if name == "inf" { Formula::inf(&v, body) } else { Formula::sup(&v, body) })
                    }
                    "min" | "max" => {
                        self.expect("(")?;
                        let mut acc = self.formula()?;
                        while self.eat(",") {
                            let next = self.formula()?;
                            acc = if name == "min" { Formula::min(acc, next) } else { Formula::max(acc, next) };
                        }
                        self.expect(")")?;
                        Ok(acc)
                    }
                    "neg" => {
                        self.expect("(")?;
                        let f = self.formula()?;
                        self.expect(")")?;
                        Ok(Formula::negate(f))
                    }
                    "d" | "dist" => {
                        self.expect("(")?;
                        let a = self.term()?;
                        self.expect(",")?;
                        let b = self.term()?;
                        self.expect(")")?;
                        Ok(Formula::Dist(a, b))
                    }
                    _ => {
                        self.pos = save;
                        Err(self.err("expected a formula"))
                    }
                }
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        if self.peek() == Some('[') {
            let start = self.pos;
            let end = self.chars[start..]
                .iter()
                .position(|c| *c == ']')
                .ok_or_else(|| self.err("unclosed point literal"))?;
            let text: String = self.chars[start..=start + end].iter().collect();
            self.pos = start + end + 1;
            return Ok(Term::Point(text.parse()?));
        }
        let save = self.pos;
        let name = self.ident().ok_or_else(|| self.err("expected a term"))?;
        match name.as_str() {
            "inf" => Ok(Term::Infinity),
            "s" if self.looking_at("(") || self.looking_at("^") => {
                let mut k = 1u32;
                if self.eat("^") {
                    self.skip_ws();
                    let start = self.pos;
                    while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let digits: String = self.chars[start..self.pos].iter().collect();
                    k = digits.parse().map_err(|_| self.err("expected σ power"))?;
                }
                self.expect("(")?;
                let inner = self.term()?;
                self.expect(")")?;
                let mut t = inner;
                for _ in 0..k {
                    t = Term::sigma(t);
                }
                Ok(t)
            }
            n if KEYWORDS.contains(&n) && n != "s" && n != "d" => {
                self.pos = save;
                Err(self.err("keyword used as a term"))
            }
            _ => Ok(Term::Var(name)),
        }
    }

    /// Inside `|| ... ||`: either `t^*` or a polynomial over terms.
    fn norm_body(&mut self) -> Result<Formula> {
        let save = self.pos;
        if let Ok(t) = self.term() {
            if self.eat("^*") && self.looking_at("||") {
                return Ok(Formula::Dist(t, Term::Infinity));
            }
        }
        self.pos = save;
        let mut terms = Vec::new();
        let p = self.poly_sum(&mut terms)?;
        let p = p.widen(terms.len());
        Formula::pred(p, terms)
    }

    fn poly_sum(&mut self, terms: &mut Vec<Term>) -> Result<IntPoly> {
        let mut acc = if self.eat("-") {
            self.poly_product(terms)?.neg()
        } else {
            self.poly_product(terms)?
        };
        loop {
            if self.eat("+") {
                acc = acc.add(&self.poly_product(terms)?);
            } else if self.eat("-") {
                acc = acc.sub(&self.poly_product(terms)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn poly_product(&mut self, terms: &mut Vec<Term>) -> Result<IntPoly> {
        let mut acc = self.poly_power(terms)?;
        while self.eat("*") {
            acc = acc.mul(&self.poly_power(terms)?);
        }
        Ok(acc)
    }

    fn poly_power(&mut self, terms: &mut Vec<Term>) -> Result<IntPoly> {
        let base = self.poly_atom(terms)?;
        if self.looking_at("^") && !self.looking_at("^*") {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let k: u32 = digits.parse().map_err(|_| self.err("expected an exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn poly_atom(&mut self, terms: &mut Vec<Term>) -> Result<IntPoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let p = self.poly_sum(terms)?;
                self.expect(")")?;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                Ok(IntPoly::constant(terms.len(), digits.parse().map_err(|_| self.err("bad integer"))?))
            }
            _ => {
                let t = self.term()?;
                let i = match terms.iter().position(|u| *u == t) {
                    Some(i) => i,
                    None => {
                        terms.push(t);
                        terms.len() - 1
                    }
                };
                Ok(IntPoly::var(terms.len(), i))
            }
        }
    }
}

/// How a reported value relates to the true value of the formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Exact,
    /// The true value is at most the reported one.
    UpperBoundOfInf,
    /// The true value is at least the reported one.
    LowerBoundOfSup,
    Mixed,
}

impl Direction {
    fn flip(self) -> Direction {
        match self {
            Direction::UpperBoundOfInf => Direction::LowerBoundOfSup,
            Direction::LowerBoundOfSup => Direction::UpperBoundOfInf,
            d => d,
        }
    }

    fn join(self, other: Direction) -> Direction {
        match (self, other) {
            (Direction::Exact, d) | (d, Direction::Exact) => d,
            (a, b) if a == b => a,
            _ => Direction::Mixed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Exact => "exact",
            Direction::UpperBoundOfInf => "upper_bound_of_inf",
            Direction::LowerBoundOfSup => "lower_bound_of_sup",
            Direction::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Grid { depth: u32, height: u32 },
    Registered(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Explicit => write!(f, "explicit"),
            Provenance::Grid { depth, height } => write!(f, "grid({}, {})", depth, height),
            Provenance::Registered(n) => write!(f, "registered({})", n),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WitnessSet<R = HahnSeries> {
    points: Vec<PPoint<R>>,
    provenance: Provenance,
}

impl<R: MetricRing> WitnessSet<R> {
    pub fn new(points: Vec<PPoint<R>>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyWitnessSet(provenance.to_string()));
        }
        Ok(WitnessSet { points, provenance })
    }

    pub fn explicit(points: Vec<PPoint<R>>) -> Result<Self> {
        WitnessSet::new(points, Provenance::Explicit)
    }

    pub fn points(&self) -> &[PPoint<R>] {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &PPoint<R>) -> bool {
        self.points.contains(p)
    }

    /// Appends points not already present.
    pub fn extend(&mut self, more: impl IntoIterator<Item = PPoint<R>>) {
        for p in more {
            if !self.points.contains(&p) {
                self.points.push(p);
            }
        }
    }

}

impl WitnessSet<HahnSeries> {
    /// The same points, embedded into a larger ring.
    pub fn lift<S: MetricRing>(&self) -> WitnessSet<S> {
        let points = self
            .points
            .iter()
            .map(|p| p.map(|x| Ok(S::from_series(x))).expect("nonzero pair stays nonzero"))
            .collect();
        WitnessSet { points, provenance: self.provenance.clone() }
    }
}

/// Witness sets per quantified variable, with an optional fallback.
#[derive(Clone, Debug)]
pub struct Witnesses<R = HahnSeries> {
    default: Option<WitnessSet<R>>,
    per_var: BTreeMap<String, WitnessSet<R>>,
}

impl<R: MetricRing> Default for Witnesses<R> {
    fn default() -> Self {
        Witnesses { default: None, per_var: BTreeMap::new() }
    }
}

impl<R: MetricRing> Witnesses<R> {
    pub fn uniform(ws: WitnessSet<R>) -> Self {
        Witnesses { default: Some(ws), per_var: BTreeMap::new() }
    }

    pub fn with(mut self, var: &str, ws: WitnessSet<R>) -> Self {
        self.per_var.insert(var.to_string(), ws);
        self
    }

    pub fn for_var(&self, var: &str) -> Result<&WitnessSet<R>> {
        self.per_var
            .get(var)
            .or(self.default.as_ref())
            .ok_or_else(|| Error::EmptyWitnessSet(var.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct EvalResult<R = HahnSeries> {
    pub value: Real,
    pub direction: Direction,
    /// Points chosen for quantified variables along the extremal branch.
    pub witness: Vec<(String, PPoint<R>)>,
}

pub type Assignment<R = HahnSeries> = BTreeMap<String, PPoint<R>>;

struct Evaluator<'a, R: MetricRing> {
    sigma: Option<&'a dyn PointMap<R>>,
    witnesses: &'a Witnesses<R>,
}

impl<R: MetricRing> Evaluator<'_, R> {
    fn term(&self, t: &Term, env: &Assignment<R>) -> Result<PPoint<R>> {
        match t {
            Term::Var(v) => env.get(v).cloned().ok_or_else(|| Error::UnboundVariable(v.clone())),
            Term::Infinity => Ok(PPoint::infinity()),
            Term::Point(p) => p.map(|x| Ok(R::from_series(x))),
            Term::Sigma(k, inner) => {
                let sigma = self
                    .sigma
                    .ok_or_else(|| Error::InvalidAutomorphism("formula uses s(...) but no automorphism is given".into()))?;
                let mut p = self.term(inner, env)?;
                for _ in 0..*k {
                    p = sigma.apply(&p)?;
                }
                Ok(p)
            }
        }
    }

    fn eval(&self, f: &Formula, env: &mut Assignment<R>) -> Result<EvalResult<R>> {
        let exact = |value: Real| EvalResult { value, direction: Direction::Exact, witness: Vec::new() };
        match f {
            Formula::Const(q) => Ok(exact(Real::from_rational(q.clone()))),
            Formula::Pred(p, ts) => {
                let args = ts.iter().map(|t| self.term(t, env)).collect::<Result<Vec<_>>>()?;
                Ok(exact(Real::from_magnitude(&eval_predicate(p, &args)?)))
            }
            Formula::Dist(a, b) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                Ok(exact(Real::from_magnitude(&distance(&a, &b))))
            }
            Formula::Neg(a) => {
                let r = self.eval(a, env)?;
                Ok(EvalResult { value: &Real::one() - &r.value, direction: r.direction.flip(), witness: r.witness })
            }
            Formula::TruncSub(a, b) => {
                let (ra, rb) = (self.eval(a, env)?, self.eval(b, env)?);
                let value = (&ra.value - &rb.value).max(Real::zero());
                Ok(combine(value, ra, rb, true))
            }
            Formula::Max(a, b) => {
                let (ra, rb) = (self.eval(a, env)?, self.eval(b, env)?);
                let value = ra.value.clone().max(rb.value.clone());
                Ok(combine(value, ra, rb, false))
            }
            Formula::Min(a, b) => {
                let (ra, rb) = (self.eval(a, env)?, self.eval(b, env)?);
                let value = ra.value.clone().min(rb.value.clone());
                Ok(combine(value, ra, rb, false))
            }
            Formula::Prod(a, b) => {
                let (ra, rb) = (self.eval(a, env)?, self.eval(b, env)?);
                let value = &ra.value * &rb.value;
                Ok(combine(value, ra, rb, false))
            }
            Formula::ClampAdd(a, b) => {
                let (ra, rb) = (self.eval(a, env)?, self.eval(b, env)?);
                let value = (&ra.value + &rb.value).min(Real::one());
                Ok(combine(value, ra, rb, false))
            }
            Formula::Inf(v, body) => self.quantify(v, body, env, true),
            Formula::Sup(v, body) => self.quantify(v, body, env, false),
        }
    }

    fn quantify(&self, v: &str, body: &Formula, env: &mut Assignment<R>, is_inf: bool) -> Result<EvalResult<R>> {
        let ws = self.witnesses.for_var(v)?;
        let saved = env.remove(v);
        let mut best: Option<(EvalResult<R>, PPoint<R>)> = None;
        let mut dir = Direction::Exact;
        let extreme = if is_inf { Real::zero() } else { Real::one() };
        for p in ws.points() {
            env.insert(v.to_string(), p.clone());
            let r = match self.eval(body, env) {
                Ok(r) => r,
                Err(e) => {
                    restore(env, v, saved);
                    return Err(e);
                }
            };
            dir = dir.join(r.direction);
            let better = match &best {
                None => true,
                Some((b, _)) => {
                    let c = r.value.compare(&b.value);
                    if is_inf { c.is_lt() } else { c.is_gt() }
                }
            };
            if better {
                let stop = r.value == extreme;
                best = Some((r, p.clone()));
                if stop {
                    break;
                }
            }
        }
        restore(env, v, saved);
        let (r, p) = best.expect("witness sets are nonempty");
        let own = if is_inf { Direction::UpperBoundOfInf } else { Direction::LowerBoundOfSup };
        let mut witness = vec![(v.to_string(), p)];
        witness.extend(r.witness);
        Ok(EvalResult { value: r.value, direction: own.join(dir), witness })
    }
}

fn restore<R: MetricRing>(env: &mut Assignment<R>, v: &str, saved: Option<PPoint<R>>) {
    env.remove(v);
    if let Some(p) = saved {
        env.insert(v.to_string(), p);
    }
}

fn combine<R: MetricRing>(value: Real, a: EvalResult<R>, b: EvalResult<R>, antitone_b: bool) -> EvalResult<R> {
    let db = if antitone_b { b.direction.flip() } else { b.direction };
    let mut witness = a.witness;
    witness.extend(b.witness);
    EvalResult { value, direction: a.direction.join(db), witness }
}

/// Evaluates `f` under `assignment`. `sigma` interprets `s(...)`.
pub fn evaluate<R: MetricRing>(
    f: &Formula,
    sigma: Option<&dyn PointMap<R>>,
    assignment: &Assignment<R>,
    witnesses: &Witnesses<R>,
) -> Result<EvalResult<R>> {
    let ev = Evaluator { sigma, witnesses };
    let mut env = assignment.clone();
    ev.eval(f, &mut env)
}

pub const PHI_TEXT: &str = "inf y . min(1, ||y*x - s(y)|| + max(1 - ||y||, 1 - ||y^*||))";

/// `φ(x) = inf_y min(1, ‖yx − σ(y)‖ + max(1 − ‖y‖, 1 − ‖y*‖))`.
pub fn phi_formula() -> Formula {
    PHI_TEXT.parse().expect("built-in formula parses")
}

/// The bracket of `φ` with both `x` and `y` free.
pub fn phi_bracket_formula() -> Formula {
    match phi_formula() {
        Formula::Inf(_, body) => *body,
        _ => unreachable!("phi is an infimum"),
    }
}

pub fn phi<R: MetricRing>(sigma: &dyn PointMap<R>, a: &PPoint<R>, witnesses: &WitnessSet<R>) -> Result<EvalResult<R>> {
    let mut env = Assignment::new();
    env.insert("x".to_string(), a.clone());
    evaluate(&phi_formula(), Some(sigma), &env, &Witnesses::uniform(witnesses.clone()))
}

/// Value of the bracket at a single `y`.
pub fn phi_bracket<R: MetricRing>(sigma: &dyn PointMap<R>, a: &PPoint<R>, y: &PPoint<R>) -> Result<Real> {
    let mut env = Assignment::new();
    env.insert("x".to_string(), a.clone());
    env.insert("y".to_string(), y.clone());
    Ok(evaluate(&phi_bracket_formula(), Some(sigma), &env, &Witnesses::default())?.value)
}

/// A point `[t^γ : 1]` with `1 − 1/n ≤ γ < 1`, satisfying the `n`-th
/// condition `(1 − ‖x‖) ∨ (1 − ‖x*‖) ≤ 1/n` of the type. Searches around
/// `1 − 1/(2n)` with tolerance `1/(4n)` first, then the whole window.
pub fn pi_witness(g: &ConcreteGroup, n: u32, bound: u32) -> Result<PPoint> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !g.theory().is_dense() {
        return Err(Error::NotDense(g.to_string()));
    }
    let n = n as i64;
    let target = Value::ratio(2 * n - 1, 2 * n);
    let tol = Magnitude::Pos(Value::ratio(1, 4 * n));
    let gamma = match dense_witness(g, &target, &tol, bound) {
        Ok(gamma) => gamma,
        Err(Error::NotFound { .. }) => {
            let lower = (n > 1).then(|| Value::ratio(n - 1, n));
            let lower_f = lower.as_ref().map_or(0.0, Value::to_f64);
            let one = Value::one();
            let near = |f: f64| f > lower_f - 1e-9 && f < 1.0 + 1e-9;
            search_shells(g, bound, near, |gamma| {
                lower.as_ref().is_none_or(|l| gamma.compare(l) != Ordering::Less)
                    && gamma.compare(&one) == Ordering::Less
            })
            .ok_or(Error::NotFound { bound })?
        }
        Err(e) => return Err(e),
    };
    let r = Real::from_value(&gamma);
    debug_assert!(r.compare(&Real::from_ratio(n - 1, n)).is_ge() && r.compare(&Real::one()).is_lt());
    PPoint::affine(HahnSeries::monomial(BigRational::one(), gamma))
}

/// `(1 − ‖x‖) ∨ (1 − ‖x*‖)`, the quantity bounded by `1/n` in the type.
pub fn pi_condition<R: MetricRing>(a: &PPoint<R>) -> Real {
    let one = Real::one();
    let u = &one - &Real::from_magnitude(&a.num().norm());
    let v = &one - &Real::from_magnitude(&a.den().norm());
    u.max(v)
}

#[derive(Clone, Debug)]
pub struct PiReport<R = HahnSeries> {
    pub n: u32,
    pub point: PPoint<R>,
    pub condition: Real,
    pub phi: EvalResult<R>,
}

pub fn pi_report<R: MetricRing>(
    g: &ConcreteGroup,
    sigma: &dyn PointMap<R>,
    n: u32,
    bound: u32,
    witnesses: &WitnessSet<R>,
) -> Result<PiReport<R>> {
    let point = pi_witness(g, n, bound)?.map(|x| Ok(R::from_series(x)))?;
    let condition = pi_condition(&point);
    let phi = phi(sigma, &point, witnesses)?;
    Ok(PiReport { n, point, condition, phi })
}

/// `∞`, `[0 : 1]` and every `[c·t^γ : 1]` with `c = a/b`, `|a|, b ≤ height`
/// and `γ` a lattice element with basis coordinates at most `depth`.
pub fn grid_witnesses(g: &ConcreteGroup, depth: u32, height: u32) -> WitnessSet {
    let mut gammas = Vec::new();
    search_shells(g, depth, |_| true, |gamma| {
        gammas.push(gamma.clone());
        false
    });
    let h = height.max(1) as i64;
    let mut coeffs = Vec::new();
    for b in 1..=h {
        for a in -h..=h {
            if a != 0 && a.unsigned_abs().gcd(&(b as u64)) == 1 {
                coeffs.push(BigRational::new(a.into(), b.into()));
            }
        }
    }
    let mut points = vec![PPoint::infinity(), PPoint::affine(HahnSeries::zero()).expect("[0:1]")];
    for gamma in &gammas {
        for c in &coeffs {
            let x = HahnSeries::monomial(c.clone(), gamma.clone());
            points.push(PPoint::affine(x).expect("nonzero"));
        }
    }
    WitnessSet { points, provenance: Provenance::Grid { depth, height } }
}

/// Registered witness list from literal points.
pub fn parse_witnesses(name: &str, items: &[&str]) -> Result<WitnessSet> {
    let points = items.iter().map(|s| s.parse()).collect::<Result<Vec<PPoint>>>()?;
    WitnessSet::new(points, Provenance::Registered(name.to_string()))
}

/// Rationals and `Value`s both convert to `Real` losslessly; this renders
/// a result as `p/q` when rational.
pub fn render_value(r: &Real) -> String {
    match r.to_rational() {
        Some(q) => q.to_string(),
        None => match r.to_magnitude() {
            Some(m) => m.to_string(),
            None => format!("{} (~{:.6})", r, r.to_f64()),
        },
    }
}
