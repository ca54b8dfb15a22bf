//! Line-oriented config: `kind name = expression`, one declaration per line,
//! `#` starts a comment. Kinds: group, grouptheory, field, fieldtheory,
//! auto, formula, witness.

use std::collections::BTreeMap;
use std::path::Path;

use mvf_core::classifier::{parse_descriptor, parse_field_theory, parse_group_theory, FieldTheoryExpr, MvfDescriptor, Names};
use mvf_core::difference::Automorphism;
use mvf_core::formula::{phi_formula, Formula};
use mvf_core::groups::{classify_group, ConcreteGroup, GroupTheory};
use mvf_core::hahn::{parse_coefficient, FieldHandle, HahnSeries};
use mvf_core::values::Value;
use num_rational::BigRational;

use crate::CliError;

#[derive(Clone, Debug)]
pub enum FieldDecl {
    /// `Q((t^Γ))` with a concrete group.
    Concrete(FieldHandle),
    /// `(group: .., residue: ..)` or `(dg: .., residue: ..)`.
    Theory(MvfDescriptor),
}

impl FieldDecl {
    pub fn descriptor(&self) -> Result<MvfDescriptor, CliError> {
        match self {
            FieldDecl::Theory(d) => Ok(d.clone()),
            FieldDecl::Concrete(h) => {
                let q = FieldTheoryExpr::q();
                let d = if h.allow_roots && h.group.rank() > 0 {
                    MvfDescriptor::dense(GroupTheory::divisible(), q)?
                } else {
                    match h.group.rank() {
                        0 => MvfDescriptor::with_gap(None, q)?,
                        1 => MvfDescriptor::with_gap(h.group.discrete_generator_below_one(), q)?,
                        _ => MvfDescriptor::dense(classify_group(&h.group), q)?,
                    }
                };
                Ok(d)
            }
        }
    }

    pub fn handle(&self, name: &str) -> Result<&FieldHandle, CliError> {
        match self {
            FieldDecl::Concrete(h) => Ok(h),
            FieldDecl::Theory(_) => {
                Err(CliError::Usage(format!("field `{}` is a theory descriptor; this command needs a concrete field", name)))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum AutoDecl {
    Identity,
    /// Generator values; bound to the field's group at use unless `on` names one.
    Twist(Vec<(Value, BigRational)>, Option<ConcreteGroup>),
    Gauss(Box<AutoDecl>, HahnSeries),
}

impl AutoDecl {
    pub fn is_gauss(&self) -> bool {
        matches!(self, AutoDecl::Gauss(..))
    }

    pub fn bind(&self, field: &FieldHandle) -> Result<Automorphism, CliError> {
        Ok(match self {
            AutoDecl::Identity => Automorphism::Identity,
            AutoDecl::Twist(assign, group) => {
                Automorphism::twist(group.clone().unwrap_or_else(|| field.group.clone()), assign)?
            }
            AutoDecl::Gauss(base, a) => {
                field.check(a)?;
                Automorphism::gauss_lift(base.bind(field)?, a.clone())?
            }
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub groups: BTreeMap<String, ConcreteGroup>,
    pub group_theories: BTreeMap<String, GroupTheory>,
    pub fields: BTreeMap<String, FieldDecl>,
    pub field_theories: BTreeMap<String, FieldTheoryExpr>,
    pub autos: BTreeMap<String, AutoDecl>,
    pub formulas: BTreeMap<String, Formula>,
    /// Raw point literals, parsed in whichever ring the command needs.
    pub witnesses: BTreeMap<String, Vec<String>>,
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Splits on commas outside brackets and parentheses.
pub fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' | '<' => depth += 1,
            // the `>` of `=>` closes nothing
            '>' if cur.ends_with('=') => {}
            ')' | ']' | '>' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

impl Workspace {
    pub fn load(paths: &[impl AsRef<Path>]) -> Result<Self, CliError> {
        let mut ws = Workspace::default();
        for p in paths {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(p.display().to_string(), e))?;
            ws.add_text(&p.display().to_string(), &text)?;
        }
        Ok(ws)
    }

    pub fn add_text(&mut self, file: &str, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.declare(line).map_err(|e| CliError::Config { file: file.to_string(), line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    fn names(&self) -> Names {
        let mut groups = self.group_theories.clone();
        for (n, g) in &self.groups {
            groups.entry(n.clone()).or_insert_with(|| classify_group(g));
        }
        Names { groups, fields: self.field_theories.clone() }
    }

    pub fn declare(&mut self, line: &str) -> Result<(), CliError> {
        let (kind, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| CliError::Usage(format!("expected `kind name = expression`: `{}`", line)))?;
        let (name, expr) = rest
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("missing `=` in `{}`", line)))?;
        let (name, expr) = (name.trim(), expr.trim());
        if !is_ident(name) {
            return Err(CliError::Usage(format!("bad name `{}`", name)));
        }
        let dup = |taken: bool| {
            if taken {
                Err(CliError::Usage(format!("{} `{}` declared twice", kind, name)))
            } else {
                Ok(())
            }
        };
        match kind {
            "group" => {
                dup(self.groups.contains_key(name))?;
                let g = self.concrete_group(expr)?;
                self.groups.insert(name.into(), g);
            }
            "grouptheory" => {
                dup(self.group_theories.contains_key(name))?;
                let g = self.group_theory(expr)?;
                self.group_theories.insert(name.into(), g);
            }
            "field" => {
                dup(self.fields.contains_key(name))?;
                let f = self.field(expr)?;
                self.fields.insert(name.into(), f);
            }
            "fieldtheory" => {
                dup(self.field_theories.contains_key(name))?;
                let f = parse_field_theory(expr, &self.names()).map_err(|e| self.unknown_hint(e, expr))?;
                self.field_theories.insert(name.into(), f);
            }
            "auto" => {
                dup(self.autos.contains_key(name))?;
                let a = self.auto(expr)?;
                self.autos.insert(name.into(), a);
            }
            "formula" => {
                dup(self.formulas.contains_key(name))?;
                self.formulas.insert(name.into(), expr.parse()?);
            }
            "witness" => {
                dup(self.witnesses.contains_key(name))?;
                let items = split_top(expr);
                if items.is_empty() {
                    return Err(CliError::Usage(format!("witness list `{}` is empty", name)));
                }
                self.witnesses.insert(name.into(), items);
            }
            other => return Err(CliError::Usage(format!("unknown declaration kind `{}`", other))),
        }
        Ok(())
    }

    fn unknown_hint(&self, e: mvf_core::error::Error, expr: &str) -> CliError {
        CliError::Usage(format!("{} (in `{}`; names must be declared before use)", e, expr))
    }

    fn concrete_group(&self, s: &str) -> Result<ConcreteGroup, CliError> {
        let s = s.trim();
        if let Some(g) = self.groups.get(s) {
            return Ok(g.clone());
        }
        if s.starts_with('<') {
            return Ok(s.parse()?);
        }
        Err(CliError::Usage(format!("unknown group `{}` (names must be declared before use)", s)))
    }

    fn group_theory(&self, s: &str) -> Result<GroupTheory, CliError> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("Th(").and_then(|r| r.strip_suffix(')')) {
            return Ok(classify_group(&self.concrete_group(inner)?));
        }
        parse_group_theory(s, &self.names()).map_err(|e| self.unknown_hint(e, s))
    }

    fn field(&self, s: &str) -> Result<FieldDecl, CliError> {
        let s = s.trim();
        if s.starts_with('(') {
            return Ok(FieldDecl::Theory(parse_descriptor(s, &self.names()).map_err(|e| self.unknown_hint(e, s))?));
        }
        let group_text = if let Some(g) = s.strip_prefix("Q((t^").and_then(|r| r.strip_suffix("))")) {
            g
        } else if let Some(inner) = s.strip_prefix("hahn(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top(inner);
            if parts.len() != 2 || parts[0] != "Q" {
                return Err(CliError::Usage(format!("concrete fields are hahn(Q, <group>), got `{}`", s)));
            }
            return self.concrete_field(&parts[1]);
        } else {
            return Err(CliError::Usage(format!("cannot read field `{}`", s)));
        };
        self.concrete_field(group_text)
    }

    fn concrete_field(&self, g: &str) -> Result<FieldDecl, CliError> {
        let g = g.trim();
        let (text, roots) = match g.strip_prefix("hull(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => (inner, true),
            None => (g, false),
        };
        Ok(FieldDecl::Concrete(FieldHandle::new(self.concrete_group(text)?, roots)))
    }

    fn auto(&self, s: &str) -> Result<AutoDecl, CliError> {
        let s = s.trim();
        if s == "id" || s == "identity" {
            return Ok(AutoDecl::Identity);
        }
        if let Some(name) = self.autos.get(s) {
            return Ok(name.clone());
        }
        if let Some(rest) = s.strip_prefix("twist(") {
            let (body, tail) = rest
                .split_once(')')
                .ok_or_else(|| CliError::Usage(format!("unbalanced `{}`", s)))?;
            let mut assign = Vec::new();
            for item in split_top(body) {
                let (k, v) = item
                    .split_once("=>")
                    .ok_or_else(|| CliError::Usage(format!("twist entries look like `2 => -1`, got `{}`", item)))?;
                assign.push((k.trim().parse::<Value>()?, parse_coefficient(v.trim())?));
            }
            let tail = tail.trim();
            let group = match tail.strip_prefix("on") {
                Some(g) => Some(self.concrete_group(g)?),
                None if tail.is_empty() => None,
                None => return Err(CliError::Usage(format!("unexpected `{}` after twist", tail))),
            };
            return Ok(AutoDecl::Twist(assign, group));
        }
        if let Some(inner) = s.strip_prefix("gauss(").and_then(|r| r.strip_suffix(')')) {
            let parts = split_top(inner);
            let [base, a] = parts.as_slice() else {
                return Err(CliError::Usage(format!("expected gauss(<auto>, a = <series>), got `{}`", s)));
            };
            let a = a
                .strip_prefix('a')
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| CliError::Usage(format!("expected `a = <series>` in `{}`", s)))?;
            let base = self.auto(base)?;
            if base.is_gauss() {
                return Err(CliError::Usage("a Gauss lift cannot be lifted again".into()));
            }
            return Ok(AutoDecl::Gauss(Box::new(base), a.trim().parse()?));
        }
        Err(CliError::Usage(format!("unknown automorphism `{}` (names must be declared before use)", s)))
    }

    pub fn field_decl(&self, name: &str) -> Result<&FieldDecl, CliError> {
        self.fields.get(name).ok_or_else(|| CliError::Usage(format!("unknown field `{}`", name)))
    }

    pub fn auto_decl(&self, name: &str) -> Result<AutoDecl, CliError> {
        self.auto(name)
    }

    /// A declared formula, the built-in `phi`, or inline formula text.
    pub fn formula(&self, name: &str) -> Result<Formula, CliError> {
        if let Some(f) = self.formulas.get(name) {
            return Ok(f.clone());
        }
        if name == "phi" {
            return Ok(phi_formula());
        }
        name.parse().map_err(|e| CliError::Usage(format!("`{}` is neither a declared formula nor parses: {}", name, e)))
    }
}
