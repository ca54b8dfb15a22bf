//! Symbolic theory calculus for dense metric valued fields: field-theory
//! expressions, generating pairs, classes `C(Δ, l)`, the residue shift and
//! three-valued equivalence verdicts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::groups::{classify_group, equiv_groups, ConcreteGroup, GroupTheory};
use crate::values::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Unknown,
        }
    }

    pub fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Yes, _) | (_, Verdict::Yes) => Verdict::Yes,
            (Verdict::No, Verdict::No) => Verdict::No,
            _ => Verdict::Unknown,
        }
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Yes => Verdict::No,
            Verdict::No => Verdict::Yes,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Verdict::Unknown
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

impl FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "yes" | "true" => Ok(Verdict::Yes),
            "no" | "false" => Ok(Verdict::No),
            "unknown" | "?" => Ok(Verdict::Unknown),
            t => Err(Error::Parse(format!("bad verdict `{}`", t))),
        }
    }
}

/// User-declared facts about a custom base theory.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Flags {
    pub large: Verdict,
    /// Whether `l ≡ l((t^{R^+}))`.
    pub fixed_point: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseTheory {
    Acf0,
    Rcf,
    PadicClosed(u64),
    /// `k((t))`
    LaurentOver(Box<FieldTheoryExpr>),
    NumberField(String),
    PseudoFinite(String),
    Custom(String, Flags),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldTheoryExpr {
    Base(BaseTheory),
    /// `l((t^Δ))` with `Δ` non-trivial regular.
    Hahn(Box<FieldTheoryExpr>, GroupTheory),
}

/// Elementary properties used to separate theories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Props {
    pub large: Verdict,
    pub fixed_point: Verdict,
    pub alg_closed: Verdict,
    pub real_closed: Verdict,
    pub pac: Verdict,
}

impl FieldTheoryExpr {
    pub fn base(b: BaseTheory) -> Self {
        FieldTheoryExpr::Base(b)
    }

    pub fn q() -> Self {
        FieldTheoryExpr::Base(BaseTheory::NumberField("Q".into()))
    }

    pub fn acf0() -> Self {
        FieldTheoryExpr::Base(BaseTheory::Acf0)
    }

    pub fn rcf() -> Self {
        FieldTheoryExpr::Base(BaseTheory::Rcf)
    }

    pub fn hahn(inner: FieldTheoryExpr, g: GroupTheory) -> Result<Self> {
        if g == GroupTheory::Trivial {
            return Err(Error::TrivialGroup);
        }
        Ok(FieldTheoryExpr::Hahn(Box::new(inner), g))
    }

    pub fn depth(&self) -> usize {
        match self {
            FieldTheoryExpr::Base(BaseTheory::LaurentOver(k)) => k.depth(),
            FieldTheoryExpr::Base(_) => 0,
            FieldTheoryExpr::Hahn(l, _) => 1 + l.depth(),
        }
    }

    pub fn props(&self) -> Props {
        use Verdict::*;
        match self {
            FieldTheoryExpr::Base(b) => match b {
                BaseTheory::Acf0 => Props { large: Yes, fixed_point: Yes, alg_closed: Yes, real_closed: No, pac: Yes },
                BaseTheory::Rcf => Props { large: Yes, fixed_point: Yes, alg_closed: No, real_closed: Yes, pac: No },
                BaseTheory::PadicClosed(_) | BaseTheory::LaurentOver(_) => {
                    Props { large: Yes, fixed_point: Yes, alg_closed: No, real_closed: No, pac: No }
                }
                BaseTheory::NumberField(_) => Props { large: No, fixed_point: No, alg_closed: No, real_closed: No, pac: No },
                BaseTheory::PseudoFinite(_) => {
                    Props { large: Yes, fixed_point: No, alg_closed: No, real_closed: No, pac: Yes }
                }
                BaseTheory::Custom(_, f) => Props {
                    large: f.large,
                    fixed_point: f.fixed_point,
                    // a non-large field is neither algebraically nor real closed nor PAC
                    alg_closed: if f.large == No { No } else { Unknown },
                    real_closed: if f.large == No { No } else { Unknown },
                    pac: if f.large == No { No } else { Unknown },
                },
            },
            FieldTheoryExpr::Hahn(l, g) => {
                let inner = l.props();
                let div = Verdict::from_bool(g.is_divisible_dense());
                let ac = inner.alg_closed.and(div);
                // henselian and non-trivially valued: large, a fixed point,
                // and PAC only when algebraically closed
                Props { large: Yes, fixed_point: Yes, alg_closed: ac, real_closed: inner.real_closed.and(div), pac: ac }
            }
        }
    }

    /// `Hahn(l, Γ)` view, reading `k((t))` as `k((t^Z))`.
    fn as_hahn(&self) -> Option<(FieldTheoryExpr, GroupTheory)> {
        match self {
            FieldTheoryExpr::Hahn(l, g) => Some(((**l).clone(), g.clone())),
            FieldTheoryExpr::Base(BaseTheory::LaurentOver(k)) => Some(((**k).clone(), GroupTheory::DiscreteRegular)),
            _ => None,
        }
    }
}

fn fmt_group(g: &GroupTheory) -> String {
    if g.is_divisible_dense() {
        "R+".to_string()
    } else {
        g.to_string()
    }
}

impl fmt::Display for FieldTheoryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTheoryExpr::Base(b) => match b {
                BaseTheory::Acf0 => write!(f, "ACF0"),
                BaseTheory::Rcf => write!(f, "RCF"),
                BaseTheory::PadicClosed(p) => write!(f, "padic({})", p),
                BaseTheory::LaurentOver(k) => write!(f, "laurent({})", k),
                BaseTheory::NumberField(n) if n == "Q" => write!(f, "Q"),
                BaseTheory::NumberField(n) => write!(f, "numberfield({})", n),
                BaseTheory::PseudoFinite(n) => write!(f, "pseudofinite({})", n),
                BaseTheory::Custom(n, fl) => {
                    write!(f, "custom({}, large={}, fixed={})", n, fl.large, fl.fixed_point)
                }
            },
            FieldTheoryExpr::Hahn(l, g) => write!(f, "hahn({}, {})", l, fmt_group(g)),
        }
    }
}

/// Name tables for parsing expressions that refer to declared groups and
/// field theories.
#[derive(Clone, Debug, Default)]
pub struct Names {
    pub groups: BTreeMap<String, GroupTheory>,
    pub fields: BTreeMap<String, FieldTheoryExpr>,
}

/// Group theory reference: `R+`, `discrete`, `trivial`, a lattice literal
/// `<2, 3>` (optionally `Th<2, 3>`), theory text such as
/// `dense default=2 except 3:0`, or a declared name.
pub fn parse_group_theory(s: &str, names: &Names) -> Result<GroupTheory> {
    let s = s.trim();
    if s == "R+" || s == "R^+" {
        return Ok(GroupTheory::divisible());
    }
    let lit = s.strip_prefix("Th").unwrap_or(s).trim();
    if lit.starts_with('<') {
        return Ok(classify_group(&lit.parse::<ConcreteGroup>()?));
    }
    if let Some(g) = names.groups.get(s) {
        return Ok(g.clone());
    }
    s.parse().map_err(|_| Error::Parse(format!("unknown group theory `{}`", s)))
}

/// Field theory syntax: `Q`, `ACF0`, `RCF`, `padic(p)`, `laurent(expr)`,
/// `numberfield(name)`, `pseudofinite(name)`,
/// `custom(name, large=yes|no|unknown, fixed=yes|no|unknown)`,
/// `hahn(expr, group)`, or a declared name.
pub fn parse_field_theory(s: &str, names: &Names) -> Result<FieldTheoryExpr> {
    let s = s.trim();
    let (head, args) = match s.find('(') {
        Some(i) => {
            let inner = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced `{}`", s)))?;
            (s[..i].trim(), Some(inner))
        }
        None => (s, None),
    };
    let one_arg = |what: &str| args.map(str::trim).ok_or_else(|| Error::Parse(format!("{} needs an argument", what)));
    Ok(match head {
        "Q" if args.is_none() => FieldTheoryExpr::q(),
        "ACF0" | "C" if args.is_none() => FieldTheoryExpr::acf0(),
        "RCF" | "R" if args.is_none() => FieldTheoryExpr::rcf(),
        "padic" | "Qp" => {
            let p: u64 = one_arg(head)?.parse().map_err(|_| Error::Parse(format!("bad prime in `{}`", s)))?;
            if !crate::values::is_prime(p) {
                return Err(Error::InvalidArgument(format!("{} is not prime", p)));
            }
            FieldTheoryExpr::Base(BaseTheory::PadicClosed(p))
        }
        "laurent" => FieldTheoryExpr::Base(BaseTheory::LaurentOver(Box::new(parse_field_theory(one_arg(head)?, names)?))),
        "numberfield" => {
            let n = one_arg(head)?;
            FieldTheoryExpr::Base(BaseTheory::NumberField(n.to_string()))
        }
        "pseudofinite" => FieldTheoryExpr::Base(BaseTheory::PseudoFinite(args.unwrap_or("F").trim().to_string())),
        "custom" => {
            let parts = split_top(one_arg(head)?);
            let name = parts.first().ok_or_else(|| Error::Parse("custom needs a name".into()))?.to_string();
            let mut flags = Flags { large: Verdict::Unknown, fixed_point: Verdict::Unknown };
            for kv in &parts[1..] {
                let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad flag `{}`", kv)))?;
                match k.trim() {
                    "large" => flags.large = v.parse()?,
                    "fixed" | "fixed_point" => flags.fixed_point = v.parse()?,
                    other => return Err(Error::Parse(format!("unknown flag `{}`", other))),
                }
            }
            FieldTheoryExpr::Base(BaseTheory::Custom(name, flags))
        }
        "hahn" => {
            // the group text may itself contain commas
            let rest = one_arg(head)?;
            let cut = first_top_comma(rest)
                .ok_or_else(|| Error::Parse(format!("hahn needs a field and a group: `{}`", s)))?;
            let l = parse_field_theory(&rest[..cut], names)?;
            let g_text = rest[cut + 1..].trim();
            FieldTheoryExpr::hahn(l, parse_group_theory(g_text, names)?)?
        }
        name if args.is_none() => names
            .fields
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("unknown field theory `{}`", name)))?,
        _ => return Err(Error::Parse(format!("unknown field theory `{}`", s))),
    })
}

fn first_top_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '<' => depth += 1,
            ')' | '>' => depth -= 1,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

/// Splits on commas outside parentheses and angle brackets.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '<' => depth += 1,
            ')' | '>' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

impl FromStr for FieldTheoryExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_field_theory(s, &Names::default())
    }
}

pub type Trace = Vec<String>;

/// R1: `Hahn(Hahn(l, Γ), divisible) → Hahn(l, Γ)`;
/// R2: `Hahn(b, divisible) → b` for a base `b` that is a fixed point.
/// Inner expressions are rewritten first; each step lowers the depth.
pub fn canonicalize(f: &FieldTheoryExpr) -> FieldTheoryExpr {
    canonicalize_traced(f, &mut Vec::new())
}

pub fn canonicalize_traced(f: &FieldTheoryExpr, trace: &mut Trace) -> FieldTheoryExpr {
    match f {
        FieldTheoryExpr::Base(BaseTheory::LaurentOver(k)) => {
            FieldTheoryExpr::Base(BaseTheory::LaurentOver(Box::new(canonicalize_traced(k, trace))))
        }
        FieldTheoryExpr::Base(_) => f.clone(),
        FieldTheoryExpr::Hahn(l, g) => {
            let inner = canonicalize_traced(l, trace);
            if g.is_divisible_dense() {
                match &inner {
                    FieldTheoryExpr::Hahn(..) => {
                        trace.push(format!("R1: hahn({}, R+) -> {}", inner, inner));
                        return inner;
                    }
                    FieldTheoryExpr::Base(_) if inner.props().fixed_point == Verdict::Yes => {
                        trace.push(format!("R2: hahn({}, R+) -> {} (fixed point)", inner, inner));
                        return inner;
                    }
                    _ => {}
                }
            }
            FieldTheoryExpr::Hahn(Box::new(inner), g.clone())
        }
    }
}

fn conflict(a: &FieldTheoryExpr, b: &FieldTheoryExpr) -> Option<String> {
    let (pa, pb) = (a.props(), b.props());
    let checks = [
        ("large", pa.large, pb.large),
        ("fixed point", pa.fixed_point, pb.fixed_point),
        ("algebraically closed", pa.alg_closed, pb.alg_closed),
        ("real closed", pa.real_closed, pb.real_closed),
        ("PAC", pa.pac, pb.pac),
    ];
    checks
        .iter()
        .find(|(_, x, y)| x.is_decisive() && y.is_decisive() && x != y)
        .map(|(name, x, y)| format!("{} is {} for {} but {} for {}", name, x, a, y, b))
}

/// Elementary equivalence of field theories in the ring language.
pub fn equiv_fields(a: &FieldTheoryExpr, b: &FieldTheoryExpr) -> Verdict {
    equiv_fields_traced(a, b, &mut Vec::new())
}

pub fn equiv_fields_traced(a: &FieldTheoryExpr, b: &FieldTheoryExpr, trace: &mut Trace) -> Verdict {
    let a = canonicalize_traced(a, trace);
    let b = canonicalize_traced(b, trace);
    if a == b {
        trace.push(format!("{} and {} are identical", a, b));
        return Verdict::Yes;
    }
    if let Some(why) = conflict(&a, &b) {
        trace.push(format!("property conflict: {}", why));
        return Verdict::No;
    }
    match (&a, &b) {
        (FieldTheoryExpr::Base(x), FieldTheoryExpr::Base(y)) if a.as_hahn().is_none() || b.as_hahn().is_none() => {
            base_vs_base(x, y, trace)
        }
        _ => match (a.as_hahn(), b.as_hahn()) {
            (Some((l, g)), Some((l2, g2))) => hahn_vs_hahn(&l, &g, &l2, &g2, trace),
            _ => {
                trace.push(format!("no rule decides {} against {}", a, b));
                Verdict::Unknown
            }
        },
    }
}

fn base_vs_base(x: &BaseTheory, y: &BaseTheory, trace: &mut Trace) -> Verdict {
    use BaseTheory::*;
    let v = match (x, y) {
        (Custom(n, _), Custom(m, _)) if n == m => Verdict::Yes,
        (Custom(..), _) | (_, Custom(..)) => Verdict::Unknown,
        (Acf0, Acf0) | (Rcf, Rcf) => Verdict::Yes,
        (PadicClosed(p), PadicClosed(q)) => Verdict::from_bool(p == q),
        (LaurentOver(k), LaurentOver(k2)) => {
            trace.push("k((t)) ≡ k'((t)) iff k ≡ k'".into());
            return equiv_fields_traced(k, k2, trace);
        }
        // number fields are elementarily equivalent only when isomorphic
        (NumberField(n), NumberField(m)) => Verdict::from_bool(n == m),
        (PseudoFinite(n), PseudoFinite(m)) if n == m => Verdict::Yes,
        (PseudoFinite(_), PseudoFinite(_)) => Verdict::Unknown,
        _ => Verdict::No,
    };
    trace.push(format!(
        "catalog: {} vs {} -> {}",
        FieldTheoryExpr::Base(x.clone()),
        FieldTheoryExpr::Base(y.clone()),
        v
    ));
    v
}

/// For dense `Γ, Γ'` the Hahn fields are equivalent iff (i) `Γ ≡ Γ'` and
/// `l ≡ l'`, (ii) `Γ'` divisible and `l' ≡ l((t^Γ))`, or (iii) the mirror
/// case. With a discrete group these remain sufficient but not necessary.
fn hahn_vs_hahn(
    l: &FieldTheoryExpr,
    g: &GroupTheory,
    l2: &FieldTheoryExpr,
    g2: &GroupTheory,
    trace: &mut Trace,
) -> Verdict {
    let case_i = if equiv_groups(g, g2) { equiv_fields_traced(l, l2, trace) } else { Verdict::No };
    let mirror = |lx: &FieldTheoryExpr, gx: &GroupTheory, ly: &FieldTheoryExpr, gy: &GroupTheory, trace: &mut Trace| {
        if !gy.is_divisible_dense() {
            return Verdict::No;
        }
        match FieldTheoryExpr::hahn(lx.clone(), gx.clone()) {
            Ok(h) => equiv_fields_traced(ly, &h, trace),
            Err(_) => Verdict::Unknown,
        }
    };
    let case_ii = mirror(l, g, l2, g2, trace);
    let case_iii = mirror(l2, g2, l, g, trace);
    let v = case_i.or(case_ii).or(case_iii);
    trace.push(format!("hahn cases (i)={} (ii)={} (iii)={}", case_i, case_ii, case_iii));
    if v == Verdict::No && !(g.is_dense() && g2.is_dense()) {
        trace.push("discrete group: the case split is not exhaustive".into());
        return Verdict::Unknown;
    }
    v
}

/// Theory of a metric valued field, as far as the classification needs it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvfDescriptor {
    pub group: GroupTheory,
    pub residue: FieldTheoryExpr,
    /// Discreteness gap, present for discrete (in `(0,1)`) and trivial (`0`)
    /// value groups.
    pub dg: Option<DgValue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DgValue {
    Zero,
    Gap(Value),
}

impl fmt::Display for DgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DgValue::Zero => write!(f, "0"),
            DgValue::Gap(v) => write!(f, "{}", v),
        }
    }
}

impl MvfDescriptor {
    pub fn dense(group: GroupTheory, residue: FieldTheoryExpr) -> Result<Self> {
        if !group.is_dense() {
            return Err(Error::NotDense(group.to_string()));
        }
        Ok(MvfDescriptor { group, residue, dg: None })
    }

    /// Discrete value group with gap `dg ∈ (0, 1)`, or trivial when `dg = 0`.
    pub fn with_gap(dg: Option<Value>, residue: FieldTheoryExpr) -> Result<Self> {
        match dg {
            None => Ok(MvfDescriptor { group: GroupTheory::Trivial, residue, dg: Some(DgValue::Zero) }),
            Some(v) => {
                if v.compare(&Value::one()) != std::cmp::Ordering::Less {
                    return Err(Error::InvalidArgument(format!("discreteness gap {} must lie in (0, 1)", v)));
                }
                Ok(MvfDescriptor { group: GroupTheory::DiscreteRegular, residue, dg: Some(DgValue::Gap(v)) })
            }
        }
    }
}

impl fmt::Display for MvfDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.dg {
            Some(dg) => write!(f, "(dg: {}, residue: {})", dg, self.residue),
            None => write!(f, "(group: {}, residue: {})", fmt_group(&self.group), self.residue),
        }
    }
}

/// Parses `(group: G, residue: L)` or `(dg: 1/2, residue: L)`.
pub fn parse_descriptor(s: &str, names: &Names) -> Result<MvfDescriptor> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("descriptor must be parenthesized: `{}`", s)))?;
    let mut group = None;
    let mut dg = None;
    let mut residue = None;
    // the residue is last and may contain commas; split keys greedily
    let parts = split_top(inner);
    let mut i = 0;
    while i < parts.len() {
        let (k, v) = parts[i]
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `key: value` in `{}`", parts[i])))?;
        match k.trim() {
            "group" => {
                // theory text may carry `except p:k, q:k` lists
                let mut text = v.trim().to_string();
                while i + 1 < parts.len() && !parts[i + 1].contains(": ") && !parts[i + 1].starts_with("residue") {
                    i += 1;
                    text.push_str(", ");
                    text.push_str(parts[i]);
                }
                group = Some(parse_group_theory(&text, names)?);
            }
            "dg" => dg = Some(v.trim().to_string()),
            "residue" => residue = Some(parse_field_theory(v, names)?),
            other => return Err(Error::Parse(format!("unknown descriptor key `{}`", other))),
        }
        i += 1;
    }
    let residue = residue.ok_or_else(|| Error::Parse("descriptor needs a residue".into()))?;
    match (group, dg) {
        (Some(_), Some(_)) => Err(Error::Parse("give either group or dg, not both".into())),
        (Some(g), None) if g.is_dense() => MvfDescriptor::dense(g, residue),
        (Some(GroupTheory::Trivial), None) => MvfDescriptor::with_gap(None, residue),
        (Some(g), None) => Err(Error::Parse(format!("discrete group {} needs `dg: <value>` instead", g))),
        (None, Some(d)) if d == "0" => MvfDescriptor::with_gap(None, residue),
        (None, Some(d)) => MvfDescriptor::with_gap(Some(d.parse()?), residue),
        (None, None) => Err(Error::Parse("descriptor needs group or dg".into())),
    }
}

/// `C(Δ, l)` together with how a particular field sits in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDescriptor {
    pub delta: GroupTheory,
    pub l: FieldTheoryExpr,
    pub shifted: bool,
    /// Verdict of `is_generating_pair(Δ, l)`.
    pub generating: Verdict,
}

impl ClassDescriptor {
    /// Class identity ignores how the member sits in it.
    pub fn same_class(&self, other: &ClassDescriptor) -> bool {
        equiv_groups(&self.delta, &other.delta) && canonicalize(&self.l) == canonicalize(&other.l)
    }

    pub fn pair(&self) -> String {
        format!("({}, {})", fmt_group(&self.delta), self.l)
    }
}

impl fmt::Display for ClassDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{} {}", self.pair(), if self.shifted { "shifted" } else { "unshifted" })
    }
}

pub fn is_generating_pair(delta: &GroupTheory, l: &FieldTheoryExpr) -> Result<Verdict> {
    is_generating_pair_traced(delta, l, &mut Vec::new())
}

pub fn is_generating_pair_traced(delta: &GroupTheory, l: &FieldTheoryExpr, trace: &mut Trace) -> Result<Verdict> {
    match delta {
        GroupTheory::Trivial => return Err(Error::TrivialGroup),
        GroupTheory::DiscreteRegular => {
            return Err(Error::InvalidGroupTheory("generating pairs need a dense group".into()))
        }
        GroupTheory::DenseRegular(_) => {}
    }
    if !delta.is_divisible_dense() {
        trace.push(format!("({}, {}) generating: group not divisible", fmt_group(delta), l));
        return Ok(Verdict::Yes);
    }
    let c = canonicalize_traced(l, trace);
    let v = match &c {
        FieldTheoryExpr::Hahn(inner, g) if g.is_dense() && !g.is_divisible_dense() => {
            trace.push(format!("{} decomposes over the non-divisible group {}", c, fmt_group(g)));
            Verdict::No
        }
        FieldTheoryExpr::Hahn(inner, g) if g.is_dense() => {
            // l ≡ l'((t^{R+})) is forbidden only when l' ≢ l
            let same = equiv_fields_traced(inner, l, trace);
            trace.push(format!("{} decomposes over R+ with {} ≡ {}: {}", c, inner, l, same));
            match same {
                Verdict::No => Verdict::No,
                _ => Verdict::Unknown,
            }
        }
        // k((t^Z)) ≡ k((t)): generating for any k of characteristic 0
        FieldTheoryExpr::Hahn(..) => Verdict::Yes,
        FieldTheoryExpr::Base(BaseTheory::Custom(_, f)) => {
            if f.large == Verdict::No {
                trace.push("non-large fields are not Hahn fields".into());
                Verdict::Yes
            } else {
                Verdict::Unknown
            }
        }
        FieldTheoryExpr::Base(_) => {
            trace.push(format!("catalog base {} has no forbidden decomposition", c));
            Verdict::Yes
        }
    };
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct ClassOutcome {
    pub class: ClassDescriptor,
    /// `Yes` when the class is determined, `Unknown` when a step could not
    /// be decided (the class shown is then the unshifted reading).
    pub determined: Verdict,
    pub trace: Trace,
}

pub fn class_of(k: &MvfDescriptor) -> Result<ClassOutcome> {
    if k.dg.is_some() || !k.group.is_dense() {
        return Err(Error::NotDense(format!("{}: use the discrete criterion", k)));
    }
    let mut trace = Vec::new();
    if !k.group.is_divisible_dense() {
        trace.push(format!("value group {} not divisible: unshifted", fmt_group(&k.group)));
        let class = ClassDescriptor { delta: k.group.clone(), l: k.residue.clone(), shifted: false, generating: Verdict::Yes };
        return Ok(ClassOutcome { class, determined: Verdict::Yes, trace });
    }
    let c = canonicalize_traced(&k.residue, &mut trace);
    let mut determined = Verdict::Yes;
    if let FieldTheoryExpr::Hahn(inner, g) = &c {
        if g.is_dense() {
            let gp = is_generating_pair_traced(g, inner, &mut trace)?;
            let distinct = if g.is_divisible_dense() {
                equiv_fields_traced(inner, &k.residue, &mut trace).negate()
            } else {
                Verdict::Yes
            };
            let shifted = gp.and(distinct);
            trace.push(format!("shifted reading ({}, {}): generating={} distinct={}", fmt_group(g), inner, gp, distinct));
            match shifted {
                Verdict::Yes => {
                    let class = ClassDescriptor { delta: g.clone(), l: (**inner).clone(), shifted: true, generating: gp };
                    return Ok(ClassOutcome { class, determined, trace });
                }
                Verdict::No => {}
                Verdict::Unknown => determined = Verdict::Unknown,
            }
        }
    }
    let gp = is_generating_pair_traced(&k.group, &c, &mut trace)?;
    if gp != Verdict::Yes {
        determined = Verdict::Unknown;
    }
    trace.push(format!("unshifted: ({}, {})", fmt_group(&k.group), c));
    let class = ClassDescriptor { delta: GroupTheory::divisible(), l: c, shifted: false, generating: gp };
    Ok(ClassOutcome { class, determined, trace })
}

#[derive(Clone, Debug)]
pub struct EquivOutcome {
    pub verdict: Verdict,
    pub classes: Option<(ClassDescriptor, ClassDescriptor)>,
    pub trace: Trace,
}

/// Same class for dense fields; equal gaps and equivalent residue fields
/// for discrete ones.
pub fn equivalent(k1: &MvfDescriptor, k2: &MvfDescriptor) -> Result<EquivOutcome> {
    match (&k1.dg, &k2.dg) {
        (None, None) => {
            let (c1, c2) = (class_of(k1)?, class_of(k2)?);
            let mut trace = c1.trace.clone();
            trace.extend(c2.trace.iter().cloned());
            let groups = Verdict::from_bool(equiv_groups(&c1.class.delta, &c2.class.delta));
            let fields = equiv_fields_traced(&c1.class.l, &c2.class.l, &mut trace);
            let mut verdict = groups.and(fields);
            if c1.determined != Verdict::Yes || c2.determined != Verdict::Yes {
                trace.push("a class is undetermined".into());
                verdict = Verdict::Unknown;
            }
            trace.push(format!("{} vs {}: {}", c1.class.pair(), c2.class.pair(), verdict));
            Ok(EquivOutcome { verdict, classes: Some((c1.class, c2.class)), trace })
        }
        (Some(DgValue::Gap(a)), Some(DgValue::Gap(b))) => {
            let mut trace = Vec::new();
            let gaps = Verdict::from_bool(a == b);
            trace.push(format!("discreteness gaps {} and {}: {}", a, b, gaps));
            let fields = if gaps == Verdict::Yes {
                equiv_fields_traced(&k1.residue, &k2.residue, &mut trace)
            } else {
                Verdict::No
            };
            Ok(EquivOutcome { verdict: gaps.and(fields), classes: None, trace })
        }
        (Some(DgValue::Zero), Some(DgValue::Zero)) => Ok(EquivOutcome {
            verdict: Verdict::Unknown,
            classes: None,
            trace: vec!["trivially valued fields are outside the metric classification".into()],
        }),
        _ => Err(Error::MixedDensity(format!("{} vs {}", k1, k2))),
    }
}

/// Symbolic image of a metric ultrapower of an unshifted member:
/// `(R^+, l((t^Δ)))`.
pub fn residue_shift(c: &ClassDescriptor) -> Result<MvfDescriptor> {
    MvfDescriptor::dense(GroupTheory::divisible(), FieldTheoryExpr::hahn(c.l.clone(), c.delta.clone())?)
}

#[derive(Clone, Debug)]
pub struct LringOutcome {
    pub verdict: Verdict,
    pub class_verdict: Verdict,
    pub trace: Trace,
}

/// `K ≡ F` in the ring language, decided as `k_K((t^{Γ_K})) ≡ k_F((t^{Γ_F}))`
/// and cross-checked against the class verdict.
pub fn lring_equiv(k1: &MvfDescriptor, k2: &MvfDescriptor) -> Result<LringOutcome> {
    if k1.dg.is_some() || k2.dg.is_some() {
        return Err(Error::NotDense("ring-language reduction needs dense fields".into()));
    }
    let h1 = FieldTheoryExpr::hahn(k1.residue.clone(), k1.group.clone())?;
    let h2 = FieldTheoryExpr::hahn(k2.residue.clone(), k2.group.clone())?;
    let mut trace = Vec::new();
    let verdict = equiv_fields_traced(&h1, &h2, &mut trace);
    let class = equivalent(k1, k2)?;
    if verdict.is_decisive() && class.verdict.is_decisive() && verdict != class.verdict {
        return Err(Error::CrossCheck(format!(
            "ring-language verdict {} but class verdict {} for {} vs {}",
            verdict, class.verdict, k1, k2
        )));
    }
    trace.push(format!("class verdict {}", class.verdict));
    Ok(LringOutcome { verdict, class_verdict: class.verdict, trace })
}

/// Built-in base theories of the catalog.
pub fn catalog() -> Vec<FieldTheoryExpr> {
    vec![
        FieldTheoryExpr::acf0(),
        FieldTheoryExpr::rcf(),
        FieldTheoryExpr::Base(BaseTheory::PadicClosed(2)),
        FieldTheoryExpr::Base(BaseTheory::PadicClosed(5)),
        FieldTheoryExpr::Base(BaseTheory::LaurentOver(Box::new(FieldTheoryExpr::q()))),
        FieldTheoryExpr::q(),
        FieldTheoryExpr::Base(BaseTheory::NumberField("Q(i)".into())),
        FieldTheoryExpr::Base(BaseTheory::PseudoFinite("F".into())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ft(s: &str) -> FieldTheoryExpr {
        s.parse().unwrap()
    }

    fn th23() -> GroupTheory {
        parse_group_theory("<2,3>", &Names::default()).unwrap()
    }

    fn dense(g: &str, l: &str) -> MvfDescriptor {
        MvfDescriptor::dense(parse_group_theory(g, &Names::default()).unwrap(), ft(l)).unwrap()
    }

    #[test]
    fn three_valued_logic() {
        use Verdict::*;
        assert_eq!(Yes.and(Unknown), Unknown);
        assert_eq!(No.and(Unknown), No);
        assert_eq!(Yes.or(Unknown), Yes);
        assert_eq!(Unknown.negate(), Unknown);
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&ft("hahn(hahn(Q, <2,3>), R+)")), ft("hahn(Q, <2,3>)"));
        assert_eq!(canonicalize(&ft("hahn(ACF0, R+)")), ft("ACF0"));
        assert_eq!(canonicalize(&ft("hahn(Q, <2,3>)")), ft("hahn(Q, <2,3>)"));
        assert_eq!(canonicalize(&ft("hahn(Q, R+)")), ft("hahn(Q, R+)"));
        assert_eq!(canonicalize(&ft("hahn(hahn(hahn(RCF, R+), R+), R+)")), ft("RCF"));
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "hahn(hahn(Q, dense default=2), R+)",
            "custom(K, large=yes, fixed=unknown)",
            "laurent(padic(3))",
            "hahn(pseudofinite(F), dense default=1 except 2:0, 3:inf)",
            "hahn(Q, discrete)",
        ] {
            let e = ft(s);
            assert_eq!(ft(&e.to_string()), e, "{}", s);
        }
        assert!("hahn(Q, trivial)".parse::<FieldTheoryExpr>().is_err());
        assert!("padic(4)".parse::<FieldTheoryExpr>().is_err());
    }

    #[test]
    fn equiv_field_examples() {
        assert_eq!(equiv_fields(&ft("hahn(Q, <2,3>)"), &ft("hahn(Q, <5,7>)")), Verdict::Yes);
        assert_eq!(equiv_fields(&ft("hahn(Q, R+)"), &ft("Q")), Verdict::No);
        assert_eq!(equiv_fields(&ft("hahn(ACF0, R+)"), &ft("ACF0")), Verdict::Yes);
        assert_eq!(equiv_fields(&ft("hahn(Q, <2,3>)"), &ft("hahn(Q, <2,3,5>)")), Verdict::No);
        assert_eq!(equiv_fields(&ft("pseudofinite(F)"), &ft("pseudofinite(G)")), Verdict::Unknown);
        assert_eq!(equiv_fields(&ft("custom(K, large=no)"), &ft("hahn(Q, R+)")), Verdict::No);
        assert_eq!(equiv_fields(&ft("laurent(Q)"), &ft("hahn(Q, discrete)")), Verdict::Yes);
    }

    #[test]
    fn generating_pair_examples() {
        assert_eq!(is_generating_pair(&th23(), &ft("Q")).unwrap(), Verdict::Yes);
        assert_eq!(is_generating_pair(&GroupTheory::divisible(), &ft("hahn(Q, <2,3>)")).unwrap(), Verdict::No);
        assert_eq!(is_generating_pair(&GroupTheory::divisible(), &ft("ACF0")).unwrap(), Verdict::Yes);
        assert_eq!(is_generating_pair(&GroupTheory::divisible(), &ft("laurent(Q)")).unwrap(), Verdict::Yes);
        assert_eq!(is_generating_pair(&GroupTheory::divisible(), &ft("hahn(Q, R+)")).unwrap(), Verdict::No);
        assert!(is_generating_pair(&GroupTheory::DiscreteRegular, &ft("Q")).is_err());
        assert_eq!(is_generating_pair(&GroupTheory::Trivial, &ft("Q")).unwrap_err(), Error::TrivialGroup);
    }

    #[test]
    fn class_examples() {
        let c = class_of(&dense("<2,3>", "Q")).unwrap();
        assert_eq!((c.class.pair(), c.class.shifted), ("(dense default=2, Q)".to_string(), false));
        let c = class_of(&dense("R+", "hahn(Q, <2,3>)")).unwrap();
        assert_eq!((c.class.pair(), c.class.shifted), ("(dense default=2, Q)".to_string(), true));
        let c = class_of(&dense("R+", "ACF0")).unwrap();
        assert_eq!((c.class.pair(), c.class.shifted), ("(R+, ACF0)".to_string(), false));
        let c = class_of(&dense("R+", "hahn(Q, R+)")).unwrap();
        assert_eq!((c.class.pair(), c.class.shifted), ("(R+, Q)".to_string(), true));
        assert!(class_of(&MvfDescriptor::with_gap(Some(Value::ratio(1, 2)), ft("Q")).unwrap()).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let v = equivalent(&dense("<2,3>", "Q"), &dense("R+", "hahn(Q, <2,3>)")).unwrap();
        assert_eq!(v.verdict, Verdict::Yes);
        let d = |n, d| MvfDescriptor::with_gap(Some(Value::ratio(n, d)), ft("Q")).unwrap();
        assert_eq!(equivalent(&d(1, 2), &d(1, 3)).unwrap().verdict, Verdict::No);
        assert_eq!(equivalent(&d(1, 2), &d(1, 2)).unwrap().verdict, Verdict::Yes);
        assert_eq!(equivalent(&dense("R+", "Q"), &dense("R+", "pseudofinite(F)")).unwrap().verdict, Verdict::No);
        assert!(matches!(equivalent(&dense("R+", "Q"), &d(1, 2)), Err(Error::MixedDensity(_))));
        let t = MvfDescriptor::with_gap(None, ft("Q")).unwrap();
        assert_eq!(equivalent(&t, &t).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn lring_examples() {
        let r = lring_equiv(&dense("<2,3>", "Q"), &dense("R+", "hahn(Q, <2,3>)")).unwrap();
        assert_eq!((r.verdict, r.class_verdict), (Verdict::Yes, Verdict::Yes));
        let r = lring_equiv(&dense("R+", "ACF0"), &dense("R+", "RCF")).unwrap();
        assert_eq!((r.verdict, r.class_verdict), (Verdict::No, Verdict::No));
        let k = dense("<2,3,5>", "pseudofinite(F)");
        assert_eq!(lring_equiv(&k, &k).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn residue_shift_examples() {
        let c = class_of(&dense("<2,3>", "Q")).unwrap().class;
        let s = residue_shift(&c).unwrap();
        assert_eq!(s, dense("R+", "hahn(Q, <2,3>)"));
        let c = class_of(&dense("R+", "ACF0")).unwrap().class;
        let s = residue_shift(&c).unwrap();
        assert_eq!(canonicalize(&s.residue), ft("ACF0"));
    }

    #[test]
    fn descriptor_parsing() {
        let names = Names::default();
        let d = parse_descriptor("(group: dense default=2 except 3:0, 5:1, residue: hahn(Q, <2,3>))", &names).unwrap();
        assert_eq!(d.residue, ft("hahn(Q, <2,3>)"));
        assert!(matches!(d.group, GroupTheory::DenseRegular(ref p) if p.exceptions().len() == 2));
        let d = parse_descriptor("(dg: 1/2, residue: Q)", &names).unwrap();
        assert_eq!(d.dg, Some(DgValue::Gap(Value::ratio(1, 2))));
        assert!(parse_descriptor("(dg: 2, residue: Q)", &names).is_err());
    }
}
