use std::str::FromStr;

use mvf_core::classifier::{class_of, equiv_fields_traced, equivalent, lring_equiv, residue_shift, DgValue, Verdict};
use mvf_core::difference::{check_axioms, GaussElement};
use mvf_core::formula::{
    evaluate, grid_witnesses, pi_report, Assignment, Formula, Provenance, WitnessSet, Witnesses,
};
use mvf_core::groups::ConcreteGroup;
use mvf_core::hahn::{FieldHandle, HahnSeries};
use mvf_core::hensel::{newton_root, SeriesPoly};
use mvf_core::projective::{IntPoly, MetricRing, PPoint, PointMap};
use mvf_core::real::Real;
use mvf_core::sample::Sampler;
use mvf_core::values::Value;

use crate::report::{Report, Status};
use crate::workspace::Workspace;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessStrategy {
    Grid { depth: u32, height: u32 },
    List(String),
}

impl FromStr for WitnessStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("grid:") {
            let (d, h) = rest.split_once(',').ok_or("expected grid:<depth>,<height>")?;
            let depth = d.trim().parse().map_err(|_| format!("bad depth `{}`", d))?;
            let height = h.trim().parse().map_err(|_| format!("bad height `{}`", h))?;
            return Ok(WitnessStrategy::Grid { depth, height });
        }
        if let Some(name) = s.strip_prefix("list:") {
            return Ok(WitnessStrategy::List(name.trim().to_string()));
        }
        Err(format!("witness strategy must be grid:<depth>,<height> or list:<name>, got `{}`", s))
    }
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Yes => Status::Yes,
        Verdict::No => Status::No,
        Verdict::Unknown => Status::Unknown,
    }
}

pub fn classify(ws: &Workspace, name: &str) -> Result<Report, CliError> {
    let mut r = Report::new(format!("classify:{}", name));
    if let Some(decl) = ws.fields.get(name) {
        let d = decl.descriptor()?;
        r.field("field", &d);
        match &d.dg {
            Some(DgValue::Zero) => {
                r.field("verdict", Verdict::Unknown);
                r.trace.push("trivially valued fields are outside the metric classification".into());
                r.status = Status::Unknown;
            }
            Some(DgValue::Gap(g)) => {
                r.field("verdict", Verdict::Yes).field("dg", g).field("residue", &d.residue);
                r.trace.push("discrete value group: determined by the discreteness gap and the residue field".into());
            }
            None => {
                let out = class_of(&d)?;
                let c = &out.class;
                r.field("verdict", out.determined)
                    .field("class", format!("C{}", c.pair()))
                    .field("shifted", if c.shifted { "yes" } else { "no" })
                    .field("generating", c.generating);
                if !c.shifted {
                    if let Ok(s) = residue_shift(c) {
                        r.field("residue_shift", s);
                    }
                }
                r.trace = out.trace;
                r.status = verdict_status(out.determined);
            }
        }
        return Ok(r);
    }
    if let Some(f) = ws.field_theories.get(name) {
        let mut trace = Vec::new();
        let canon = mvf_core::classifier::canonicalize_traced(f, &mut trace);
        let p = canon.props();
        r.field("theory", f)
            .field("canonical", &canon)
            .field("large", p.large)
            .field("fixed_point", p.fixed_point)
            .field("alg_closed", p.alg_closed)
            .field("real_closed", p.real_closed)
            .field("pac", p.pac);
        r.trace = trace;
        return Ok(r);
    }
    Err(CliError::Usage(format!("unknown field or field theory `{}`", name)))
}

pub fn equiv(ws: &Workspace, a: &str, b: &str) -> Result<Report, CliError> {
    let mut r = Report::new(format!("equiv:{}:{}", a, b));
    match (ws.fields.get(a), ws.fields.get(b)) {
        (Some(fa), Some(fb)) => {
            let (da, db) = (fa.descriptor()?, fb.descriptor()?);
            let out = equivalent(&da, &db)?;
            r.field("verdict", out.verdict);
            if let Some((ca, cb)) = &out.classes {
                r.field("class_a", ca).field("class_b", cb);
            }
            r.trace = out.trace;
            if da.dg.is_none() && db.dg.is_none() {
                let lr = lring_equiv(&da, &db)?;
                r.field("lring", lr.verdict);
                let agree = if lr.verdict.is_decisive() && out.verdict.is_decisive() { "agree" } else { "undecided" };
                r.field("cross_check", agree);
            }
            r.status = verdict_status(out.verdict);
        }
        (None, None) => {
            let fa = ws.field_theories.get(a).ok_or_else(|| CliError::Usage(format!("unknown name `{}`", a)))?;
            let fb = ws.field_theories.get(b).ok_or_else(|| CliError::Usage(format!("unknown name `{}`", b)))?;
            let v = equiv_fields_traced(fa, fb, &mut r.trace);
            r.field("verdict", v);
            r.status = verdict_status(v);
        }
        _ => return Err(CliError::Usage("compare two fields or two field theories, not one of each".into())),
    }
    Ok(r)
}

fn default_field() -> FieldHandle {
    FieldHandle::new(ConcreteGroup::from_integers(&[2, 3]).expect("<2,3>"), false)
}

fn concrete(ws: &Workspace, name: Option<&str>) -> Result<FieldHandle, CliError> {
    match name {
        Some(n) => Ok(ws.field_decl(n)?.handle(n)?.clone()),
        None => Ok(default_field()),
    }
}

fn witness_set<R: MetricRing>(ws: &Workspace, field: &FieldHandle, strategy: &WitnessStrategy) -> Result<WitnessSet<R>, CliError> {
    match strategy {
        WitnessStrategy::Grid { depth, height } => Ok(grid_witnesses(&field.group, *depth, *height).lift::<R>()),
        WitnessStrategy::List(name) => {
            let items = ws.witnesses.get(name).ok_or_else(|| CliError::Usage(format!("unknown witness list `{}`", name)))?;
            let pts = items.iter().map(|s| s.parse::<PPoint<R>>()).collect::<Result<Vec<_>, _>>()?;
            Ok(WitnessSet::new(pts, Provenance::Registered(name.clone()))?)
        }
    }
}

pub struct EvalArgs<'a> {
    pub formula: &'a str,
    pub at: &'a [String],
    pub auto: Option<&'a str>,
    pub field: Option<&'a str>,
    pub witness: &'a WitnessStrategy,
}

pub fn eval(ws: &Workspace, args: &EvalArgs) -> Result<Report, CliError> {
    let formula = ws.formula(args.formula)?;
    let field = concrete(ws, args.field)?;
    let auto = match args.auto {
        Some(a) => ws.auto_decl(a)?,
        None => crate::workspace::AutoDecl::Identity,
    };
    let sigma = auto.bind(&field)?;
    let mut r = Report::new(format!("eval:{}", args.formula));
    r.field("sigma", &sigma);
    if auto.is_gauss() {
        eval_in::<GaussElement>(ws, &formula, &sigma, &field, args, &mut r)?;
    } else {
        eval_in::<HahnSeries>(ws, &formula, &sigma, &field, args, &mut r)?;
    }
    Ok(r)
}

fn eval_in<R: MetricRing>(
    ws: &Workspace,
    formula: &Formula,
    sigma: &dyn PointMap<R>,
    field: &FieldHandle,
    args: &EvalArgs,
    r: &mut Report,
) -> Result<(), CliError> {
    let mut asg: Assignment<R> = Assignment::new();
    for item in args.at {
        let (var, pt) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--at expects var=<point>, got `{}`", item)))?;
        asg.insert(var.trim().to_string(), pt.parse()?);
    }
    for (v, p) in &asg {
        r.field(&format!("at_{}", v), p);
    }
    let wit = witness_set::<R>(ws, field, args.witness)?;
    r.field("witnesses", format!("{} ({} points)", wit.provenance(), wit.len()));
    let out = evaluate(formula, Some(sigma), &asg, &Witnesses::uniform(wit))?;
    r.real("value", &out.value).field("direction", out.direction.as_str());
    for (v, p) in &out.witness {
        r.field(&format!("witness_{}", v), p);
    }
    Ok(())
}

fn leading_terms(x: &HahnSeries, k: usize) -> String {
    let top: Vec<_> = x.terms().iter().rev().take(k).map(|(g, c)| (g.clone(), c.clone())).collect();
    let shown = HahnSeries::from_terms(top);
    if x.terms().len() > k {
        format!("{} + ...", shown)
    } else {
        shown.to_string()
    }
}

pub fn hensel(poly: &str, seed: &str, floor: &Value) -> Result<Report, CliError> {
    let p: SeriesPoly = poly.parse()?;
    let x0: HahnSeries = seed.parse()?;
    let out = newton_root(&p, &x0, floor)?;
    let mut r = Report::new(format!("hensel:{}", p));
    r.field("seed", &x0)
        .field("floor", floor)
        .field("root_leading", leading_terms(&out.root.without_precision(), 6))
        .field("root_terms", out.root.terms().len())
        .field("residual", &out.residual)
        .field("iterations", out.iterates.len() - 1);
    if out.iterates.len() > 1 {
        let first = &out.iterates[1] - &out.iterates[0];
        r.field("first_correction", first);
    }
    Ok(r)
}

pub struct CheckArgs<'a> {
    pub field: &'a str,
    pub auto: &'a str,
    pub polys: usize,
    pub points: usize,
    pub seed: u64,
}

pub fn check(ws: &Workspace, args: &CheckArgs) -> Result<Report, CliError> {
    let field = concrete(ws, Some(args.field))?;
    let auto = ws.auto_decl(args.auto)?;
    let sigma = auto.bind(&field)?;
    let mut smp = Sampler::new(field.group.clone(), args.seed);
    let polys: Vec<IntPoly> = (0..args.polys).map(|i| smp.poly(1 + i % 3, 3, 4)).collect();
    let pts: Vec<PPoint> = (0..args.points).map(|_| smp.point()).collect();
    let rep = if auto.is_gauss() {
        let mut lifted: Vec<PPoint<GaussElement>> =
            pts.iter().map(|p| p.map(|x| Ok(GaussElement::from_series(x)))).collect::<Result<_, _>>()?;
        lifted.push(PPoint::affine(GaussElement::x())?);
        check_axioms::<GaussElement>(&sigma, &polys, &lifted)
    } else {
        check_axioms::<HahnSeries>(&sigma, &polys, &pts)
    };
    let mut r = Report::new(format!("check:{}:{}", args.field, args.auto));
    r.field("sigma", &sigma)
        .field("seed", args.seed)
        .field("verdict", if rep.passed() { "pass" } else { "fail" })
        .field("checked_ii", rep.checked_ii)
        .field("checked_iv", rep.checked_iv)
        .field("violations", rep.violations.len());
    if let Some(v) = rep.violations.first() {
        r.field("first_axiom", v.axiom).field("first_witness", &v.detail);
    }
    r.status = if rep.passed() { Status::Yes } else { Status::No };
    Ok(r)
}

pub struct PiArgs<'a> {
    pub field: Option<&'a str>,
    pub auto: Option<&'a str>,
    pub n: u32,
    pub bound: u32,
    pub witness: &'a WitnessStrategy,
}

pub fn pi(ws: &Workspace, args: &PiArgs) -> Result<Report, CliError> {
    let field = concrete(ws, args.field)?;
    let auto = match args.auto {
        Some(a) => ws.auto_decl(a)?,
        None => crate::workspace::AutoDecl::Identity,
    };
    let sigma = auto.bind(&field)?;
    let mut r = Report::new(format!("pi:{}", args.n));
    r.field("sigma", &sigma).field("bound", args.bound);
    if auto.is_gauss() {
        pi_in::<GaussElement>(ws, &field, &sigma, args, &mut r)?;
    } else {
        pi_in::<HahnSeries>(ws, &field, &sigma, args, &mut r)?;
    }
    Ok(r)
}

fn pi_in<R: MetricRing>(
    ws: &Workspace,
    field: &FieldHandle,
    sigma: &dyn PointMap<R>,
    args: &PiArgs,
    r: &mut Report,
) -> Result<(), CliError> {
    let wit = witness_set::<R>(ws, field, args.witness)?;
    let rep = pi_report(&field.group, sigma, args.n, args.bound, &wit)?;
    let bound = Real::from_ratio(1, args.n as i64);
    r.field("point", &rep.point)
        .real("condition", &rep.condition)
        .field("condition_ok", if rep.condition.compare(&bound).is_le() { "yes" } else { "no" })
        .real("phi", &rep.phi.value)
        .field("direction", rep.phi.direction.as_str());
    if rep.phi.value != Real::one() {
        r.status = Status::No;
    }
    Ok(())
}
