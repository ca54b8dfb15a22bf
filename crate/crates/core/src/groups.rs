//! Finitely generated subgroups of `(Q^{>0}, ·)` and symbolic theories of
//! regular ordered abelian groups.
//!
//! Dense regular groups are classified up to elementary equivalence by the
//! quotient sizes `|G/pG| = p^k` for every prime `p`; a [`GroupTheory`]
//! stores that profile as a default exponent plus finitely many exceptions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::Hnf;
use crate::real::Real;
use crate::values::{Magnitude, Value};

#[derive(Clone, Debug)]
pub struct ConcreteGroup {
    generators: Vec<Value>,
    primes: Vec<u64>,
    hnf: Hnf,
}

impl ConcreteGroup {
    pub fn new(generators: Vec<Value>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("a group needs at least one generator".into()));
        }
        if let Some(g) = generators.iter().find(|g| !g.is_rational()) {
            return Err(Error::InvalidArgument(format!(
                "generator {} is not a positive rational",
                g
            )));
        }
        let primes: Vec<u64> = generators
            .iter()
            .flat_map(|g| g.exponents().keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let rows: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| primes.iter().map(|p| g.exponent(*p).to_integer()).collect())
            .collect();
        let hnf = Hnf::new(&rows, primes.len());
        Ok(ConcreteGroup { generators, primes, hnf })
    }

    /// Convenience constructor from positive integers.
    pub fn from_integers(gens: &[u64]) -> Result<Self> {
        let gens = gens.iter().map(|&n| Value::from_integer(n)).collect::<Result<Vec<_>>>()?;
        ConcreteGroup::new(gens)
    }

    pub fn generators(&self) -> &[Value] {
        &self.generators
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn hnf(&self) -> &Hnf {
        &self.hnf
    }

    pub fn rank(&self) -> usize {
        self.hnf.rank()
    }

    /// Lattice basis as values (rows of the Hermite normal form).
    pub fn basis(&self) -> Vec<Value> {
        self.hnf.basis.iter().map(|row| self.vector_value(row)).collect()
    }

    fn vector_value(&self, row: &[BigInt]) -> Value {
        let mut exps = BTreeMap::new();
        for (p, e) in self.primes.iter().zip(row) {
            exps.insert(*p, BigRational::from_integer(e.clone()));
        }
        let mut acc = Value::one();
        for (p, e) in exps {
            acc = acc.mul(&Value::power_of(p, e).expect("prime base"));
        }
        acc
    }

    /// Exponent vector of `v` over this group's primes, or `None` if `v`
    /// involves another prime.
    pub fn exponent_vector(&self, v: &Value) -> Option<Vec<BigRational>> {
        if v.exponents().keys().any(|p| self.primes.binary_search(p).is_err()) {
            return None;
        }
        Some(self.primes.iter().map(|p| v.exponent(*p)).collect())
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.basis_coords(v).is_some()
    }

    /// Membership in the divisible hull `{γ : γ^n ∈ G for some n ≥ 1}`.
    pub fn hull_contains(&self, v: &Value) -> bool {
        self.exponent_vector(v)
            .and_then(|vec| self.hnf.solve_rational(&vec))
            .is_some()
    }

    pub fn basis_coords(&self, v: &Value) -> Option<Vec<BigInt>> {
        self.hnf.solve_integer(&self.exponent_vector(v)?)
    }

    /// One integer vector `n` with `v = ∏ generators[i]^{n_i}`.
    pub fn generator_coords(&self, v: &Value) -> Option<Vec<BigInt>> {
        Some(self.hnf.to_row_coords(&self.basis_coords(v)?))
    }

    /// `∏ basis[i]^{coords[i]}`.
    pub fn element(&self, coords: &[i64]) -> Value {
        let mut row = vec![BigInt::zero(); self.primes.len()];
        for (c, b) in coords.iter().zip(&self.hnf.basis) {
            for (r, e) in row.iter_mut().zip(b) {
                *r += e * c;
            }
        }
        self.vector_value(&row)
    }

    /// Analytic quotient invariant: `|G/pG| = p^rank` for a free lattice.
    pub fn quotient_exponent(&self) -> u32 {
        self.rank() as u32
    }

    pub fn theory(&self) -> GroupTheory {
        classify_group(self)
    }

    /// Largest element below 1 for rank-1 groups.
    pub fn discrete_generator_below_one(&self) -> Option<Value> {
        if self.rank() != 1 {
            return None;
        }
        let b = self.basis().pop()?;
        Some(if b.compare(&Value::one()) == Ordering::Less { b } else { b.inv() })
    }
}

impl PartialEq for ConcreteGroup {
    /// Same subgroup (equal lattices over the same primes).
    fn eq(&self, other: &Self) -> bool {
        self.primes == other.primes && self.hnf.basis == other.hnf.basis
    }
}

impl fmt::Display for ConcreteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match g.to_rational() {
                Some(q) => write!(f, "{}", q)?,
                None => write!(f, "{}", g)?,
            }
        }
        write!(f, ">")
    }
}

impl FromStr for ConcreteGroup {
    type Err = Error;

    /// `<2, 3>` or `2, 3`; entries are positive rationals or value literals.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('<').trim_end_matches('>');
        let gens = inner
            .split(',')
            .map(|g| g.trim().parse::<Value>())
            .collect::<Result<Vec<_>>>()?;
        ConcreteGroup::new(gens)
    }
}

/// The exponent `k` in `|G/pG| = p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Invariant::Finite(k) => write!(f, "{}", k),
            Invariant::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Invariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "∞" => Ok(Invariant::Infinite),
            t => t
                .parse()
                .map(Invariant::Finite)
                .map_err(|_| Error::Parse(format!("bad invariant `{}`", t))),
        }
    }
}

/// Quotient profile of a dense regular group, canonical: exceptions never
/// repeat the default.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuotientProfile {
    default: Invariant,
    exceptions: BTreeMap<u64, Invariant>,
}

impl QuotientProfile {
    pub fn new(default: Invariant, exceptions: BTreeMap<u64, Invariant>) -> Result<Self> {
        if let Some(p) = exceptions.keys().find(|p| !crate::values::is_prime(**p)) {
            return Err(Error::InvalidArgument(format!("{} is not prime", p)));
        }
        let exceptions = exceptions.into_iter().filter(|(_, k)| *k != default).collect();
        Ok(QuotientProfile { default, exceptions })
    }

    pub fn uniform(k: Invariant) -> Self {
        QuotientProfile { default: k, exceptions: BTreeMap::new() }
    }

    pub fn at(&self, p: u64) -> Invariant {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn default_invariant(&self) -> Invariant {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, Invariant> {
        &self.exceptions
    }

    pub fn is_divisible(&self) -> bool {
        self.default == Invariant::Finite(0) && self.exceptions.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupTheory {
    Trivial,
    /// Every discrete regular group is elementarily equivalent to `(Z, +, <)`.
    DiscreteRegular,
    DenseRegular(QuotientProfile),
}

impl GroupTheory {
    /// The theory of `(R^+, ·)`: dense and divisible.
    pub fn divisible() -> Self {
        GroupTheory::DenseRegular(QuotientProfile::uniform(Invariant::Finite(0)))
    }

    pub fn dense_uniform(k: u32) -> Self {
        GroupTheory::DenseRegular(QuotientProfile::uniform(Invariant::Finite(k)))
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, GroupTheory::DenseRegular(_))
    }

    pub fn is_divisible(&self) -> Result<bool> {
        match self {
            GroupTheory::Trivial => Err(Error::TrivialGroup),
            GroupTheory::DiscreteRegular => Ok(false),
            GroupTheory::DenseRegular(p) => Ok(p.is_divisible()),
        }
    }

    /// Divisibility where trivial counts as not divisible; used by rewrite
    /// rules that only ever see non-trivial groups.
    pub fn is_divisible_dense(&self) -> bool {
        matches!(self, GroupTheory::DenseRegular(p) if p.is_divisible())
    }
}

impl fmt::Display for GroupTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupTheory::Trivial => write!(f, "trivial"),
            GroupTheory::DiscreteRegular => write!(f, "discrete"),
            GroupTheory::DenseRegular(p) if p.is_divisible() => write!(f, "dense divisible"),
            GroupTheory::DenseRegular(p) => {
                write!(f, "dense default={}", p.default)?;
                if !p.exceptions.is_empty() {
                    write!(f, " except ")?;
                    for (i, (q, k)) in p.exceptions.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}:{}", q, k)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for GroupTheory {
    type Err = Error;

    /// `trivial`, `discrete`, `dense divisible`, `dense default=2`,
    /// `dense default=2 except 3:0, 5:inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "trivial" => return Ok(GroupTheory::Trivial),
            "discrete" => return Ok(GroupTheory::DiscreteRegular),
            "dense divisible" => return Ok(GroupTheory::divisible()),
            _ => {}
        }
        let rest = s
            .strip_prefix("dense")
            .ok_or_else(|| Error::Parse(format!("bad group theory `{}`", s)))?
            .trim();
        let (def, exc) = match rest.split_once("except") {
            Some((d, e)) => (d.trim(), Some(e.trim())),
            None => (rest, None),
        };
        let def = def
            .strip_prefix("default=")
            .ok_or_else(|| Error::Parse(format!("expected `default=<k>` in `{}`", s)))?
            .parse::<Invariant>()?;
        let mut exceptions = BTreeMap::new();
        if let Some(exc) = exc {
            for item in exc.split(',') {
                let (p, k) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad exception `{}`", item)))?;
                let p: u64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad prime `{}`", p)))?;
                exceptions.insert(p, k.parse()?);
            }
        }
        Ok(GroupTheory::DenseRegular(QuotientProfile::new(def, exceptions)?))
    }
}

/// Rank 0 is trivial, rank 1 cyclic hence discrete, rank `r ≥ 2` dense with
/// `|G/pG| = p^r` at every prime.
pub fn classify_group(g: &ConcreteGroup) -> GroupTheory {
    match g.rank() {
        0 => GroupTheory::Trivial,
        1 => GroupTheory::DiscreteRegular,
        r => GroupTheory::dense_uniform(r as u32),
    }
}

pub fn equiv_groups(a: &GroupTheory, b: &GroupTheory) -> bool {
    a == b
}

/// Searches the lattice box `|coord| ≤ bound` (in Hermite-basis
/// coordinates) for an element within `tolerance` of `target`. Vectors are
/// visited shell by shell (`max |coord| = 0, 1, …`) and lexicographically
/// inside a shell, so the answer is the simplest hit and deterministic.
pub fn dense_witness(
    g: &ConcreteGroup,
    target: &Value,
    tolerance: &Magnitude,
    bound: u32,
) -> Result<Value> {
    if g.rank() < 2 {
        return Err(Error::InvalidGroupTheory(format!("{} is not dense", g)));
    }
    let one = Value::one();
    if target.compare(&one) == Ordering::Greater {
        return Err(Error::InvalidArgument(format!("target {} exceeds 1", target)));
    }
    if let Magnitude::Pos(t) = tolerance {
        if t.compare(&one) == Ordering::Greater {
            return Err(Error::InvalidArgument(format!("tolerance {} exceeds 1", t)));
        }
    }
    let target_f = target.to_f64();
    let tol_f = tolerance.to_f64();
    let target_r = Real::from_value(target);
    let tol_r = Real::from_magnitude(tolerance);
    let near = |gamma_f: f64| (gamma_f - target_f).abs() - tol_f <= 1e-9 * (1.0 + target_f);
    search_shells(g, bound, near, |gamma| {
        if tolerance.is_zero() {
            return gamma == target;
        }
        let d = &Real::from_value(gamma) - &target_r;
        let d = if d.signum() == Ordering::Less { -&d } else { d };
        d.compare(&tol_r) != Ordering::Greater
    })
    .ok_or(Error::NotFound { bound })
}

/// First lattice element (shell order, then lexicographic) accepted by `hit`.
/// Elements whose float approximation fails `near` are skipped without
/// being built exactly.
pub fn search_shells<N, F>(g: &ConcreteGroup, bound: u32, near: N, mut hit: F) -> Option<Value>
where
    N: Fn(f64) -> bool,
    F: FnMut(&Value) -> bool,
{
    let basis = g.basis();
    let logs: Vec<f64> = basis.iter().map(|b| b.ln()).collect();
    let r = basis.len();
    let mut coords = vec![0i64; r];
    for k in 0..=bound as i64 {
        if let Some(found) = shell(g, &logs, k, 0, false, &mut coords, &near, &mut hit) {
            return Some(found);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn shell<N, F>(
    g: &ConcreteGroup,
    logs: &[f64],
    k: i64,
    pos: usize,
    extreme: bool,
    coords: &mut Vec<i64>,
    near: &N,
    hit: &mut F,
) -> Option<Value>
where
    N: Fn(f64) -> bool,
    F: FnMut(&Value) -> bool,
{
    if pos == coords.len() {
        if !extreme && k > 0 {
            return None;
        }
        let ln: f64 = coords.iter().zip(logs).map(|(c, l)| *c as f64 * l).sum();
        if !near(ln.exp()) {
            return None;
        }
        let gamma = g.element(coords);
        return hit(&gamma).then_some(gamma);
    }
    let last = pos + 1 == coords.len();
    for c in -k..=k {
        let is_extreme = c.abs() == k;
        if last && !extreme && !is_extreme && k > 0 {
            continue;
        }
        coords[pos] = c;
        if let Some(v) = shell(g, logs, k, pos + 1, extreme || is_extreme, coords, near, hit) {
            return Some(v);
        }
    }
    None
}

/// Brute-force size of `G/pG` as a power of `p`, by enumerating generator
/// combinations with coefficients in `0..p` and identifying vectors whose
/// difference lies in `pG`. Independent of the rank computation.
pub fn quotient_exponent_by_cosets(g: &ConcreteGroup, p: u32) -> u32 {
    let gens: Vec<Vec<BigInt>> = g
        .generators()
        .iter()
        .map(|v| g.primes().iter().map(|q| v.exponent(*q).to_integer()).collect())
        .collect();
    let width = g.primes().len();
    let mut reps: Vec<Vec<BigInt>> = Vec::new();
    let m = gens.len();
    let mut digits = vec![0u32; m];
    loop {
        let mut v = vec![BigInt::zero(); width];
        for (d, row) in digits.iter().zip(&gens) {
            for (x, e) in v.iter_mut().zip(row) {
                *x += e * d;
            }
        }
        if !reps.iter().any(|r| in_p_multiple(g, r, &v, p)) {
            reps.push(v);
        }
        // next digit vector
        let mut i = 0;
        while i < m {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
    }
    let mut count = reps.len() as u64;
    let mut k = 0;
    while count > 1 {
        assert_eq!(count % p as u64, 0, "coset count must be a power of p");
        count /= p as u64;
        k += 1;
    }
    k
}

fn in_p_multiple(g: &ConcreteGroup, a: &[BigInt], b: &[BigInt], p: u32) -> bool {
    let diff: Vec<BigRational> = a
        .iter()
        .zip(b)
        .map(|(x, y)| BigRational::new(x - y, BigInt::from(p)))
        .collect();
    // diff/p must be an integer combination of generators; bounded search
    // over generator coefficients keeps this independent of the HNF solver
    integer_combination_exists(g, &diff, 2 * p as i64 + 2)
}

fn integer_combination_exists(g: &ConcreteGroup, target: &[BigRational], bound: i64) -> bool {
    if target.iter().any(|x| !x.is_integer()) {
        return false;
    }
    let target: Vec<i64> = target.iter().map(|x| x.to_integer().to_i64().unwrap()).collect();
    let gens: Vec<Vec<i64>> = g
        .generators()
        .iter()
        .map(|v| g.primes().iter().map(|q| v.exponent(*q).to_integer().to_i64().unwrap()).collect())
        .collect();
    fn rec(gens: &[Vec<i64>], rest: &mut Vec<i64>, bound: i64) -> bool {
        match gens.split_first() {
            None => rest.iter().all(|x| *x == 0),
            Some((g0, tail)) => {
                for c in -bound..=bound {
                    for (r, e) in rest.iter_mut().zip(g0) {
                        *r -= c * e;
                    }
                    let ok = rec(tail, rest, bound);
                    for (r, e) in rest.iter_mut().zip(g0) {
                        *r += c * e;
                    }
                    if ok {
                        return true;
                    }
                }
                false
            }
        }
    }
    let mut rest = target;
    rec(&gens, &mut rest, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grp(g: &[u64]) -> ConcreteGroup {
        ConcreteGroup::from_integers(g).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(grp(&[2, 3]).rank(), 2);
        assert_eq!(grp(&[4, 8]).rank(), 1);
        assert_eq!(grp(&[1]).rank(), 0);
        assert_eq!(grp(&[6, 10, 15]).rank(), 3);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_group(&grp(&[2, 3])), GroupTheory::dense_uniform(2));
        assert_eq!(classify_group(&grp(&[4, 8])), GroupTheory::DiscreteRegular);
        assert_eq!(classify_group(&grp(&[1])), GroupTheory::Trivial);
        assert_eq!(grp(&[4, 8]).basis(), vec![Value::from_integer(2).unwrap()]);
    }

    #[test]
    fn equiv_examples() {
        let t23 = grp(&[2, 3]).theory();
        assert!(equiv_groups(&t23, &grp(&[5, 7]).theory()));
        assert!(!equiv_groups(&t23, &grp(&[2, 3, 5]).theory()));
        assert!(!equiv_groups(&GroupTheory::divisible(), &t23));
    }

    #[test]
    fn divisibility() {
        assert!(GroupTheory::divisible().is_divisible().unwrap());
        assert!(!grp(&[2, 3]).theory().is_divisible().unwrap());
        assert!(!GroupTheory::DiscreteRegular.is_divisible().unwrap());
        assert_eq!(GroupTheory::Trivial.is_divisible(), Err(Error::TrivialGroup));
    }

    #[test]
    fn theory_syntax_round_trip() {
        for s in ["dense divisible", "dense default=2 except 3:0", "discrete", "trivial", "dense default=inf except 2:1, 5:0"] {
            let t: GroupTheory = s.parse().unwrap();
            assert_eq!(t.to_string().parse::<GroupTheory>().unwrap(), t);
        }
        let t: GroupTheory = "dense default=0 except 2:0".parse().unwrap();
        assert!(t.is_divisible().unwrap());
        assert!("dense default=2 except 4:1".parse::<GroupTheory>().is_err());
    }

    #[test]
    fn dense_witness_exact_member() {
        let g = grp(&[2, 3]);
        let w = dense_witness(&g, &Value::ratio(2, 3), &Magnitude::Zero, 5).unwrap();
        assert_eq!(w, Value::ratio(2, 3));
    }

    #[test]
    fn dense_witness_not_found() {
        let g = grp(&[2, 3]);
        let err = dense_witness(&g, &Value::ratio(1, 5), &Magnitude::Zero, 20).unwrap_err();
        assert_eq!(err, Error::NotFound { bound: 20 });
        assert!(dense_witness(&grp(&[2]), &Value::ratio(1, 2), &Magnitude::Zero, 3).is_err());
    }

    #[test]
    fn dense_witness_tolerance() {
        // exhaustive oracle over |i|,|j| <= 20 in shell-then-lex order
        let g = grp(&[2, 3]);
        let tol = Value::ratio(1, 100);
        let w = dense_witness(&g, &Value::ratio(1, 2), &Magnitude::Pos(tol), 20).unwrap();
        let wf = w.to_f64();
        assert!((0.49..=0.51).contains(&wf));
        let mut best: Option<(i64, i64, i64)> = None;
        for i in -20i64..=20 {
            for j in -20i64..=20 {
                let x = 2f64.powi(i as i32) * 3f64.powi(j as i32);
                if (x - 0.5).abs() <= 0.01 {
                    let key = (i.abs().max(j.abs()), i, j);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
        let (_, i, j) = best.unwrap();
        assert_eq!(w, g.element(&[i, j]));
    }

    #[test]
    fn coset_oracle_matches_rank() {
        for gens in [&[2u64][..], &[2, 3], &[2, 3, 5], &[4, 8], &[6, 10, 15], &[12, 18]] {
            let g = grp(gens);
            for p in [2, 3, 5] {
                assert_eq!(quotient_exponent_by_cosets(&g, p), g.quotient_exponent(), "{:?} p={}", gens, p);
            }
        }
    }

    #[test]
    fn membership_and_hull() {
        let g = grp(&[4, 8]);
        assert!(g.contains(&Value::from_integer(2).unwrap()));
        assert!(!g.contains(&"2^1/2".parse().unwrap()));
        assert!(g.hull_contains(&"2^1/2".parse().unwrap()));
        assert!(!g.hull_contains(&Value::from_integer(3).unwrap()));
        let coords = g.generator_coords(&Value::from_integer(2).unwrap()).unwrap();
        // 4^a 8^b = 2 means 2a + 3b = 1
        assert_eq!(&coords[0] * 2 + &coords[1] * 3, BigInt::from(1));
    }

    #[test]
    fn single_generator_is_discrete() {
        for n in [2u64, 3, 6, 10, 49] {
            assert_eq!(classify_group(&grp(&[n])), GroupTheory::DiscreteRegular);
        }
        let g: ConcreteGroup = "<3/4>".parse().unwrap();
        assert_eq!(g.theory(), GroupTheory::DiscreteRegular);
        assert_eq!(g.discrete_generator_below_one(), Some(Value::ratio(3, 4)));
    }
}
