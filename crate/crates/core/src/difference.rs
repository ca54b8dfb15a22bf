//! Isometric automorphisms of `Q((t^Γ))`, the Gauss extension `K(X)` with
//! `σ̃(X) = aX`, and sample checks of the difference-field axioms.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::groups::ConcreteGroup;
use crate::hahn::{parse_series_poly, FieldHandle, HahnSeries};
use crate::projective::{distance, eval_predicate, IntPoly, MetricRing, PPoint, PointMap};
use crate::values::{Magnitude, Value};

/// `Σ c_i X^i` with Hahn-series coefficients and the Gauss norm
/// `|Σ c_i X^i| = max |c_i|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussElement {
    coeffs: Vec<HahnSeries>,
}

impl GaussElement {
    pub fn new(mut coeffs: Vec<HahnSeries>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        GaussElement { coeffs }
    }

    pub fn constant(c: HahnSeries) -> Self {
        GaussElement::new(vec![c])
    }

    /// The distinguished variable `X`.
    pub fn x() -> Self {
        GaussElement::new(vec![HahnSeries::zero(), HahnSeries::one()])
    }

    pub fn coeffs(&self) -> &[HahnSeries] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> HahnSeries {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn map_coeffs<F>(&self, mut f: F) -> Result<GaussElement>
    where
        F: FnMut(usize, &HahnSeries) -> Result<HahnSeries>,
    {
        Ok(GaussElement::new(self.coeffs.iter().enumerate().map(|(i, c)| f(i, c)).collect::<Result<_>>()?))
    }
}

pub fn gauss_norm(p: &GaussElement) -> Magnitude {
    p.coeffs.iter().map(|c| c.valuation()).max().unwrap_or(Magnitude::Zero)
}

impl MetricRing for GaussElement {
    fn zero() -> Self {
        GaussElement::new(Vec::new())
    }
    fn one() -> Self {
        GaussElement::constant(HahnSeries::one())
    }
    fn from_series(s: &HahnSeries) -> Self {
        GaussElement::constant(s.clone())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        GaussElement::new((0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return GaussElement::zero();
        }
        let mut out = vec![HahnSeries::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        GaussElement::new(out)
    }
    fn neg(&self) -> Self {
        GaussElement::new(self.coeffs.iter().map(|c| -c).collect())
    }
    fn norm(&self) -> Magnitude {
        gauss_norm(self)
    }
    fn scale_monomial(&self, gamma: &Value) -> Self {
        GaussElement::new(self.coeffs.iter().map(|c| c.scale_monomial(gamma)).collect())
    }
    fn scale(&self, q: &BigRational) -> Self {
        GaussElement::new(self.coeffs.iter().map(|c| c.scale(q)).collect())
    }
    /// Residue of the highest-degree coefficient of norm 1.
    fn unit_scalar(&self) -> Option<BigRational> {
        self.coeffs
            .iter()
            .rev()
            .filter(|c| c.valuation() == Magnitude::one())
            .find_map(|c| c.residue().ok().filter(|r| !r.is_zero()))
    }
    fn parse(s: &str) -> Result<Self> {
        Ok(GaussElement::new(parse_series_poly(s, Some('X'))?))
    }
}

impl fmt::Display for GaussElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let x = if i == 1 { "X".to_string() } else { format!("X^{}", i) };
                if i > 0 && c.precision().is_none() && *c == HahnSeries::one() {
                    return x;
                }
                let c = if c.is_monomial() && c.precision().is_none() { c.to_string() } else { format!("({})", c) };
                if i == 0 {
                    c
                } else {
                    format!("{}*{}", c, x)
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `u: Γ → Q^×` given on the generators of a concrete group.
#[derive(Clone, Debug)]
pub struct Twist {
    group: ConcreteGroup,
    values: Vec<BigRational>,
}

impl Twist {
    /// Generators not listed map to 1. Keys must be generators of `group`;
    /// the assignment must respect every relation among them.
    pub fn new(group: ConcreteGroup, assign: &[(Value, BigRational)]) -> Result<Self> {
        let mut values = vec![BigRational::one(); group.generators().len()];
        for (g, u) in assign {
            if u.is_zero() {
                return Err(Error::InvalidAutomorphism(format!("u({}) = 0", g)));
            }
            let i = group
                .generators()
                .iter()
                .position(|h| h == g)
                .ok_or_else(|| Error::InvalidAutomorphism(format!("{} is not a generator of {}", g, group)))?;
            values[i] = u.clone();
        }
        for rel in &group.hnf().relations {
            let prod = rational_power_product(&values, rel)?;
            if !prod.is_one() {
                let gens: Vec<String> = group.generators().iter().map(|g| g.to_string()).collect();
                return Err(Error::InvalidAutomorphism(format!(
                    "twist is not a homomorphism: relation {:?} among {:?} maps to {}",
                    rel.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                    gens,
                    prod
                )));
            }
        }
        Ok(Twist { group, values })
    }

    pub fn group(&self) -> &ConcreteGroup {
        &self.group
    }

    pub fn values(&self) -> impl Iterator<Item = (&Value, &BigRational)> {
        self.group.generators().iter().zip(&self.values)
    }

    /// `u(γ)`; `γ` must lie in the lattice itself.
    pub fn eval(&self, gamma: &Value) -> Result<BigRational> {
        let coords = self.group.generator_coords(gamma).ok_or_else(|| Error::ExponentOutsideGroup {
            exponent: gamma.to_string(),
            group: self.group.to_string(),
        })?;
        rational_power_product(&self.values, &coords)
    }

    pub fn inverse(&self) -> Twist {
        Twist { group: self.group.clone(), values: self.values.iter().map(|u| u.recip()).collect() }
    }
}

fn rational_power_product(values: &[BigRational], exps: &[BigInt]) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for (u, e) in values.iter().zip(exps) {
        let e = e
            .to_i32()
            .ok_or_else(|| Error::InvalidArgument(format!("twist exponent {} too large", e)))?;
        acc *= u.pow(e);
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub enum Automorphism {
    Identity,
    Twist(Twist),
    /// `σ̃(Σ c_i X^i) = Σ σ(c_i) a^i X^i` on `K(X)`.
    GaussLift(Box<Automorphism>, HahnSeries),
}

impl Automorphism {
    pub fn twist(group: ConcreteGroup, assign: &[(Value, BigRational)]) -> Result<Self> {
        Ok(Automorphism::Twist(Twist::new(group, assign)?))
    }

    /// Lifts `base` to the Gauss extension; `|a|` must be 1.
    pub fn gauss_lift(base: Automorphism, a: HahnSeries) -> Result<Self> {
        if a.valuation() != Magnitude::one() {
            return Err(Error::NotAUnit(a.valuation().to_string()));
        }
        if matches!(base, Automorphism::GaussLift(..)) {
            return Err(Error::InvalidAutomorphism("cannot lift a Gauss lift again".into()));
        }
        Ok(Automorphism::GaussLift(Box::new(base), a))
    }

    pub fn apply_series(&self, x: &HahnSeries) -> Result<HahnSeries> {
        match self {
            Automorphism::Identity => Ok(x.clone()),
            Automorphism::Twist(u) => x.map_terms(|g, c| Ok((g.clone(), c * u.eval(g)?))),
            Automorphism::GaussLift(base, _) => base.apply_series(x),
        }
    }

    pub fn preimage_series(&self, x: &HahnSeries) -> Result<HahnSeries> {
        match self {
            Automorphism::Identity => Ok(x.clone()),
            Automorphism::Twist(u) => x.map_terms(|g, c| Ok((g.clone(), c / u.eval(g)?))),
            Automorphism::GaussLift(base, _) => base.preimage_series(x),
        }
    }

    pub fn apply_gauss(&self, p: &GaussElement) -> Result<GaussElement> {
        let Automorphism::GaussLift(base, a) = self else {
            return Err(Error::InvalidAutomorphism("Gauss elements need a Gauss lift".into()));
        };
        let mut apow = HahnSeries::one();
        let mut out = Vec::with_capacity(p.coeffs.len());
        for c in &p.coeffs {
            out.push(&base.apply_series(c)? * &apow);
            apow = &apow * a;
        }
        Ok(GaussElement::new(out))
    }

    /// The point `[u : v]` with `σ̃([u : v])` equal to the given point.
    /// With `b = σ^{-1}(a)` the preimage of `Σ c_i X^i` is
    /// `Σ σ^{-1}(c_i) b^{-i} X^i`; clearing `b^{-D}` from both coordinates
    /// keeps everything polynomial.
    fn preimage_gauss_point(&self, p: &PPoint<GaussElement>) -> Result<PPoint<GaussElement>> {
        let Automorphism::GaussLift(base, a) = self else {
            return Err(Error::InvalidAutomorphism("Gauss elements need a Gauss lift".into()));
        };
        let b = base.preimage_series(a)?;
        let d = p.num().coeffs.len().max(p.den().coeffs.len());
        let bpow: Vec<HahnSeries> = std::iter::successors(Some(HahnSeries::one()), |x| Some(x * &b)).take(d + 1).collect();
        let pull = |e: &GaussElement| -> Result<GaussElement> {
            e.map_coeffs(|i, c| Ok(&base.preimage_series(c)? * &bpow[d - i]))
        };
        PPoint::normalize(pull(p.num())?, pull(p.den())?)
    }

    pub fn inverse(&self) -> Result<Automorphism> {
        match self {
            Automorphism::Identity => Ok(Automorphism::Identity),
            Automorphism::Twist(u) => Ok(Automorphism::Twist(u.inverse())),
            Automorphism::GaussLift(base, a) => {
                // σ̃^{-1}(X) = σ^{-1}(a)^{-1} X needs an exact inverse of a
                if !a.is_monomial() {
                    return Err(Error::InvalidAutomorphism(
                        "element-level inverse of a Gauss lift needs a monomial a; use point preimages".into(),
                    ));
                }
                let b = base.preimage_series(a)?;
                let inv = b.invert(&Value::ratio(1, 2))?.without_precision();
                Ok(Automorphism::GaussLift(Box::new(base.inverse()?), inv))
            }
        }
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Automorphism::Identity => write!(f, "id"),
            Automorphism::Twist(u) => {
                let parts: Vec<String> = u.values().map(|(g, q)| format!("{} => {}", g, q)).collect();
                write!(f, "twist({})", parts.join(", "))
            }
            Automorphism::GaussLift(base, a) => write!(f, "gauss({}, a = {})", base, a),
        }
    }
}

impl PointMap<HahnSeries> for Automorphism {
    fn apply(&self, p: &PPoint<HahnSeries>) -> Result<PPoint<HahnSeries>> {
        p.map(|x| self.apply_series(x))
    }
    fn preimage(&self, p: &PPoint<HahnSeries>) -> Result<PPoint<HahnSeries>> {
        p.map(|x| self.preimage_series(x))
    }
}

impl PointMap<GaussElement> for Automorphism {
    fn apply(&self, p: &PPoint<GaussElement>) -> Result<PPoint<GaussElement>> {
        p.map(|x| self.apply_gauss(x))
    }
    fn preimage(&self, p: &PPoint<GaussElement>) -> Result<PPoint<GaussElement>> {
        self.preimage_gauss_point(p)
    }
}

/// `(K(X), σ̃)` over a concrete field.
#[derive(Clone, Debug)]
pub struct GaussStructure {
    pub field: FieldHandle,
    pub sigma: Automorphism,
}

impl GaussStructure {
    pub fn a(&self) -> &HahnSeries {
        match &self.sigma {
            Automorphism::GaussLift(_, a) => a,
            _ => unreachable!("built by gauss_extend"),
        }
    }

    /// `b = X`, with `|b| = 1`.
    pub fn b(&self) -> GaussElement {
        GaussElement::x()
    }

    pub fn b_point(&self) -> PPoint<GaussElement> {
        PPoint::affine(GaussElement::x()).expect("[X : 1]")
    }

    /// `[a : 1]` as a point of the extension.
    pub fn a_point(&self) -> PPoint<GaussElement> {
        PPoint::affine(GaussElement::constant(self.a().clone())).expect("|a| = 1")
    }
}

pub fn gauss_extend(field: &FieldHandle, sigma: Automorphism, a: HahnSeries) -> Result<GaussStructure> {
    field.check(&a)?;
    let lift = Automorphism::gauss_lift(sigma, a.clone())?;
    let x = GaussElement::x();
    let sx = lift.apply_gauss(&x)?;
    assert_eq!(sx, x.mul(&GaussElement::constant(a)), "σ̃(X) = aX");
    Ok(GaussStructure { field: field.clone(), sigma: lift })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    /// `(poly, tuple)` pairs checked for (II).
    pub checked_ii: usize,
    pub checked_iv: usize,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

/// Argument tuples for a `k`-ary predicate: every tuple when there are at
/// most `TUPLE_LIMIT`, otherwise cyclic windows `(p_j, p_{j+1}, …)`.
const TUPLE_LIMIT: usize = 4096;

fn tuples<T: Clone>(points: &[T], k: usize) -> Vec<Vec<T>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let all = (n as u128).checked_pow(k as u32).is_some_and(|c| c <= TUPLE_LIMIT as u128);
    if all {
        let mut out = Vec::new();
        let mut idx = vec![0usize; k];
        loop {
            out.push(idx.iter().map(|&i| points[i].clone()).collect());
            let mut pos = k;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < n {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
    (0..n).map(|j| (0..k).map(|i| points[(j + i) % n].clone()).collect()).collect()
}

/// Checks (II) `‖P(x̄)‖ = ‖P(σx̄)‖`, (III) `d(∞, σ∞) = 0` and (IV) via
/// exact preimages `x = σ^{-1}(y)` with `d(σx, y) = 0`.
pub fn check_axioms<R: MetricRing>(sigma: &dyn PointMap<R>, polys: &[IntPoly], points: &[PPoint<R>]) -> AxiomReport {
    let mut report = AxiomReport::default();
    let images: Vec<Result<PPoint<R>>> = points.iter().map(|p| sigma.apply(p)).collect();
    for (p, img) in points.iter().zip(&images) {
        if let Err(e) = img {
            report.violations.push(Violation { axiom: "II", detail: format!("σ undefined at {}: {}", p, e) });
        }
    }
    let indexed: Vec<usize> = (0..points.len()).filter(|&i| images[i].is_ok()).collect();
    for poly in polys {
        for tuple in tuples(&indexed, poly.nvars()) {
            let args: Vec<PPoint<R>> = tuple.iter().map(|&i| points[i].clone()).collect();
            let moved: Vec<PPoint<R>> = tuple.iter().map(|&i| images[i].clone().expect("filtered")).collect();
            report.checked_ii += 1;
            match (eval_predicate(poly, &args), eval_predicate(poly, &moved)) {
                (Ok(l), Ok(r)) if l == r => {}
                (Ok(l), Ok(r)) => report.violations.push(Violation {
                    axiom: "II",
                    detail: format!(
                        "‖{}‖ at ({}) is {} but {} after σ",
                        poly,
                        args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "),
                        l,
                        r
                    ),
                }),
                (Err(e), _) | (_, Err(e)) => {
                    report.violations.push(Violation { axiom: "II", detail: e.to_string() })
                }
            }
        }
    }
    let inf = PPoint::infinity();
    match sigma.apply(&inf) {
        Ok(s) if distance(&inf, &s) == Magnitude::Zero => {}
        Ok(s) => report.violations.push(Violation { axiom: "III", detail: format!("σ(∞) = {}", s) }),
        Err(e) => report.violations.push(Violation { axiom: "III", detail: e.to_string() }),
    }
    for y in points {
        report.checked_iv += 1;
        let ok = sigma
            .preimage(y)
            .and_then(|x| sigma.apply(&x).map(|sx| (x, distance(&sx, y))));
        match ok {
            Ok((_, Magnitude::Zero)) => {}
            Ok((x, d)) => report.violations.push(Violation {
                axiom: "IV",
                detail: format!("preimage {} of {} lands at distance {}", x, y, d),
            }),
            Err(e) => report.violations.push(Violation { axiom: "IV", detail: format!("no preimage of {}: {}", y, e) }),
        }
    }
    report
}
