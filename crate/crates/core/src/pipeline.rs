//! Stratum data, transcribed claims, and the stage-by-stage gluing of
//! presentations.
//!
//! Each stage glues the ring of a new closed stratum `A` onto the ring `C`
//! of the previously built open part along `D = A/(c_top)`. Stratum classes
//! are given as invariant polynomials in the ψ-variables of the stratum, and
//! the previous generators are restricted to the stratum through their
//! ψ-forms.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groebner::{map_kernel, Ideal, SubalgebraMembership};
use crate::invariants::GroupAction;
use crate::parser::{
    parse_document_with_hint, parse_expr_at, parse_group, parse_var_list, DocKind, Document, Entry, Env, Expr,
    Pos, VarEnv,
};
use crate::poly::{Context, Polynomial, Rational, VarTable, WeightedDegree};
use crate::ringpres::{fiber_product, graded_surjectivity, DegreeCertificate, GeneratorPair, Morphism, Presentation};

/// Signs `ε_a` with `k_a = ε_a · p_a` for the ψ-power sums `p_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignConvention {
    pub e: [i8; 3],
}

impl SignConvention {
    pub const DEFAULT: SignConvention = SignConvention { e: [-1, -1, -1] };

    /// All eight conventions, the default first.
    pub fn all() -> Vec<SignConvention> {
        let mut out = Vec::new();
        for bits in 0..8u8 {
            let s = |b: u8| if bits & b == 0 { -1 } else { 1 };
            out.push(SignConvention { e: [s(1), s(2), s(4)] });
        }
        out
    }

    pub fn sign(&self, name: &str) -> Option<i8> {
        match name {
            "e1" => Some(self.e[0]),
            "e2" => Some(self.e[1]),
            "e3" => Some(self.e[2]),
            _ => None,
        }
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: i8| if x < 0 { "-1" } else { "+1" };
        write!(f, "e1={} e2={} e3={}", s(self.e[0]), s(self.e[1]), s(self.e[2]))
    }
}

impl Serialize for SignConvention {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.e.serialize(s)
    }
}

impl std::str::FromStr for SignConvention {
    type Err = Error;

    /// `-1,-1,+1` or the short form `--+`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad sign convention `{s}` (use e.g. `-1,-1,-1` or `---`)"));
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let signs: Vec<i8> = if t.contains(',') {
            t.split(',')
                .map(|x| match x.trim() {
                    "-1" | "-" => Ok(-1),
                    "1" | "+1" | "+" => Ok(1),
                    _ => Err(bad()),
                })
                .collect::<Result<_>>()?
        } else {
            t.chars()
                .map(|c| match c {
                    '-' => Ok(-1),
                    '+' => Ok(1),
                    _ => Err(bad()),
                })
                .collect::<Result<_>>()?
        };
        let e: [i8; 3] = signs.try_into().map_err(|_| bad())?;
        Ok(SignConvention { e })
    }
}

/// Closed component of a generator pair.
#[derive(Clone, Debug)]
pub enum ClosedSide {
    /// Restriction of the open component to the stratum.
    Restrict,
    Expr(Expr),
}

#[derive(Clone, Debug)]
pub struct PairSpec {
    pub name: String,
    pub closed: ClosedSide,
    pub open: Expr,
}

/// Substitution from the ψ-variables of an earlier stratum.
#[derive(Clone, Debug)]
struct PullMap {
    name: String,
    source: String,
    pos: Pos,
    images: Vec<(String, Expr)>,
}

/// One stratum: ψ-variables, symmetry group, classes and gluing data.
#[derive(Clone, Debug)]
pub struct StratumSpec {
    pub stage: String,
    pub label: String,
    pub psi: Context,
    pub group: GroupAction,
    /// Definitions, classes and `c_top`, in file order.
    entries: Vec<(String, Expr)>,
    pub classes: Vec<String>,
    /// Weights of the classes, from their ψ-degrees.
    pub class_weights: Vec<u32>,
    maps: Vec<PullMap>,
    restrict: Vec<(String, Expr)>,
    pub pairs: Vec<PairSpec>,
    extras_closed: Vec<Expr>,
    extras_open: Vec<Expr>,
    extras_previous: bool,
}

fn split_list(entry: &Entry, sep: char) -> Vec<(String, Pos)> {
    let mut out = Vec::new();
    let mut col = 0;
    for part in entry.value.split(sep) {
        let lead = part.chars().take_while(|c| c.is_whitespace()).count();
        if !part.trim().is_empty() {
            out.push((part.trim().to_string(), entry.pos.shift(col + lead)));
        }
        col += part.chars().count() + 1;
    }
    out
}

impl StratumSpec {
    /// Load a stratum document. `earlier` holds the strata it may pull back from.
    pub fn load(doc: &Document, earlier: &[StratumSpec]) -> Result<StratumSpec> {
        if doc.kind != DocKind::Stratum {
            return Err(Error::invalid(format!("expected a stratum document, got {}", doc.kind)));
        }
        let head = doc.require("stratum")?;
        let stage = head.require("stage")?.value.clone();
        let label = head.get("label").map(|e| e.value.clone()).unwrap_or_else(|| stage.clone());
        let psi = doc.var_table("psi", None)?;
        let group = parse_group(doc.require("group")?, &psi)?;

        let mut entries: Vec<(String, Expr)> = Vec::new();
        let mut classes = Vec::new();
        let add = |sec: &str, entries: &mut Vec<(String, Expr)>| -> Result<Vec<String>> {
            let mut names = Vec::new();
            if let Some(s) = doc.section(sec) {
                for (k, e) in s.keyed()? {
                    if psi.contains(k) || entries.iter().any(|(n, _)| n == k) {
                        return Err(e.pos.error(format!("`{k}` is already defined")));
                    }
                    entries.push((k.to_string(), e.expr()?));
                    names.push(k.to_string());
                }
            }
            Ok(names)
        };
        add("defs", &mut entries)?;
        classes.extend(add("classes", &mut entries)?);
        let top = add("top_chern", &mut entries)?;
        if top != ["c_top"] {
            return Err(doc.require("top_chern")?.pos.error("[top_chern] must hold exactly `c_top = ...`"));
        }
        if classes.is_empty() {
            return Err(doc.require("classes")?.pos.error("no classes"));
        }

        let mut maps = Vec::new();
        if let Some(s) = doc.section("maps") {
            for (k, e) in s.keyed()? {
                let (source, body) = e
                    .value
                    .split_once(':')
                    .ok_or_else(|| e.pos.error("expected `stage: var -> expr, ...`"))?;
                let source = source.trim().to_string();
                if !earlier.iter().any(|s| s.stage == source) {
                    return Err(e.pos.error(format!("unknown source stratum `{source}`")));
                }
                let offset = source.chars().count() + 1;
                let body_entry = Entry {
                    key: None,
                    value: body.to_string(),
                    pos: e.pos.shift(offset),
                };
                let mut images = Vec::new();
                for (item, pos) in split_list(&body_entry, ',') {
                    let (v, img) = item
                        .split_once("->")
                        .ok_or_else(|| pos.error("expected `var -> expr`"))?;
                    let skip = v.chars().count() + 2 + img.chars().take_while(|c| c.is_whitespace()).count();
                    images.push((v.trim().to_string(), parse_expr_at(img.trim(), pos.shift(skip))?));
                }
                maps.push(PullMap {
                    name: k.to_string(),
                    source,
                    pos: e.pos,
                    images,
                });
            }
        }

        let mut restrict = Vec::new();
        if let Some(s) = doc.section("restrict") {
            for (k, e) in s.keyed()? {
                restrict.push((k.to_string(), e.expr()?));
            }
        }

        let mut pairs = Vec::new();
        if let Some(s) = doc.section("pairs") {
            for (k, e) in s.keyed()? {
                let (closed, open) = e
                    .value
                    .split_once('|')
                    .ok_or_else(|| e.pos.error("expected `closed | open`"))?;
                let lead = closed.chars().take_while(|c| c.is_whitespace()).count();
                let closed_side = if closed.trim() == "@restrict" {
                    ClosedSide::Restrict
                } else {
                    ClosedSide::Expr(parse_expr_at(closed.trim(), e.pos.shift(lead))?)
                };
                let off = closed.chars().count() + 1;
                let lead = open.chars().take_while(|c| c.is_whitespace()).count();
                pairs.push(PairSpec {
                    name: k.to_string(),
                    closed: closed_side,
                    open: parse_expr_at(open.trim(), e.pos.shift(off + lead))?,
                });
            }
        }

        let mut extras_closed = Vec::new();
        let mut extras_open = Vec::new();
        let mut extras_previous = false;
        if let Some(s) = doc.section("extras") {
            for (k, e) in s.keyed()? {
                for (item, pos) in split_list(e, ';') {
                    match (k, item.as_str()) {
                        ("open", "@previous") => extras_previous = true,
                        ("open", _) => extras_open.push(parse_expr_at(&item, pos)?),
                        ("closed", _) => extras_closed.push(parse_expr_at(&item, pos)?),
                        _ => return Err(e.pos.error(format!("unknown extras key `{k}`"))),
                    }
                }
            }
        }

        let mut spec = StratumSpec {
            stage,
            label,
            psi,
            group,
            entries,
            classes,
            class_weights: Vec::new(),
            maps,
            restrict,
            pairs,
            extras_closed,
            extras_open,
            extras_previous,
        };
        // invariance and degrees do not depend on the sign convention
        let mut all = earlier.to_vec();
        all.push(spec.clone());
        let ev = Evaluator::new(&all, SignConvention::DEFAULT);
        let me = all.len() - 1;
        let mut weights = Vec::new();
        for name in spec.classes.iter().chain(std::iter::once(&"c_top".to_string())) {
            let f = ev.value(me, name, Pos::default())?;
            spec.group.require_invariant(&f)?;
            match f.weighted_degree() {
                WeightedDegree::Homogeneous(d) if d > 0 => weights.push(d),
                _ => {
                    return Err(Error::invalid(format!(
                        "class `{name}` of {} is not homogeneous of positive degree: {f}",
                        spec.stage
                    )))
                }
            }
        }
        weights.pop();
        spec.class_weights = weights;
        Ok(spec)
    }

    pub fn class_context(&self) -> Result<Context> {
        Ok(VarTable::with_weights(self.classes.iter().cloned().zip(self.class_weights.iter().copied()))?.shared())
    }
}

/// ψ-level evaluation of stratum names under one sign convention.
pub struct Evaluator<'a> {
    specs: &'a [StratumSpec],
    conv: SignConvention,
    memo: RefCell<HashMap<(usize, String), Polynomial>>,
    active: RefCell<Vec<(usize, String)>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(specs: &'a [StratumSpec], conv: SignConvention) -> Self {
        Evaluator {
            specs,
            conv,
            memo: RefCell::new(HashMap::new()),
            active: RefCell::new(Vec::new()),
        }
    }

    pub fn index(&self, stage: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.stage == stage)
    }

    pub fn env(&self, i: usize) -> StratumEnv<'_, 'a> {
        StratumEnv { ev: self, i }
    }

    /// ψ-form of a definition, class, `c_top` or restricted generator.
    pub fn value(&self, i: usize, name: &str, pos: Pos) -> Result<Polynomial> {
        let spec = &self.specs[i];
        let (key, expr) = if let Some((_, e)) = spec.entries.iter().find(|(n, _)| n == name) {
            (name.to_string(), e)
        } else if let Some((_, e)) = spec.restrict.iter().find(|(n, _)| n == name) {
            (format!("@{name}"), e)
        } else {
            return Err(pos.error(format!("unknown identifier `{name}` in {}", spec.stage)));
        };
        self.cached(i, key, pos, expr)
    }

    /// ψ-form of the restriction of a previous generator.
    pub fn restriction(&self, i: usize, name: &str) -> Result<Polynomial> {
        let spec = &self.specs[i];
        let (_, e) = spec.restrict.iter().find(|(n, _)| n == name).ok_or_else(|| {
            Error::invalid(format!("{} gives no restriction for generator `{name}`", spec.stage))
        })?;
        self.cached(i, format!("@{name}"), Pos::default(), e)
    }

    fn cached(&self, i: usize, key: String, pos: Pos, expr: &Expr) -> Result<Polynomial> {
        if let Some(p) = self.memo.borrow().get(&(i, key.clone())) {
            return Ok(p.clone());
        }
        if self.active.borrow().contains(&(i, key.clone())) {
            return Err(pos.error(format!("circular definition of `{}`", key.trim_start_matches('@'))));
        }
        self.active.borrow_mut().push((i, key.clone()));
        let r = expr.eval(&self.env(i));
        self.active.borrow_mut().pop();
        let p = r?;
        self.memo.borrow_mut().insert((i, key), p.clone());
        Ok(p)
    }
}

pub struct StratumEnv<'e, 'a> {
    ev: &'e Evaluator<'a>,
    i: usize,
}

impl Env for StratumEnv<'_, '_> {
    fn context(&self) -> &Context {
        &self.ev.specs[self.i].psi
    }

    fn name(&self, name: &str, pos: Pos) -> Result<Polynomial> {
        let psi = self.context();
        if psi.contains(name) {
            return Polynomial::var(psi, name);
        }
        self.ev.value(self.i, name, pos)
    }

    fn param(&self, name: &str, pos: Pos) -> Result<Rational> {
        self.ev
            .conv
            .sign(name)
            .map(|s| Rational::from_integer(s.into()))
            .ok_or_else(|| pos.error(format!("unknown parameter `${name}` (expected $e1, $e2 or $e3)")))
    }

    fn call(&self, name: &str, args: &[Expr], pos: Pos) -> Result<Polynomial> {
        let spec = &self.ev.specs[self.i];
        let one = |args: &[Expr]| -> Result<Polynomial> {
            match args {
                [a] => a.eval(self),
                _ => Err(pos.error(format!("`{name}` takes one argument"))),
            }
        };
        match name {
            "transfer" => spec.group.transfer(&one(args)?),
            "reynolds" => spec.group.reynolds(&one(args)?),
            "pull" => {
                let (map_name, arg) = match args {
                    [Expr::Name(m, _), a] => (m, a),
                    _ => return Err(pos.error("`pull` takes a map name and an expression")),
                };
                let map = spec
                    .maps
                    .iter()
                    .find(|m| &m.name == map_name)
                    .ok_or_else(|| pos.error(format!("unknown map `{map_name}`")))?;
                let src = self
                    .ev
                    .index(&map.source)
                    .ok_or_else(|| map.pos.error(format!("unknown stratum `{}`", map.source)))?;
                let f = arg.eval(&self.ev.env(src))?;
                let src_psi = &self.ev.specs[src].psi;
                let images = src_psi
                    .names()
                    .iter()
                    .map(|v| match map.images.iter().find(|(n, _)| n == v) {
                        Some((_, e)) => e.eval(self),
                        None => Err(map.pos.error(format!("map `{}` does not assign `{v}`", map.name))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                f.substitute_indexed(self.context(), &images)
            }
            _ => Err(pos.error(format!("unknown function `{name}`"))),
        }
    }
}

/// Base ring and strata, in stage order.
#[derive(Clone, Debug)]
pub struct PipelineData {
    pub base: Presentation,
    pub strata: Vec<StratumSpec>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parse a file, prefixing diagnostics with its path.
pub fn load_document(path: &Path) -> Result<Document> {
    let hint = path
        .extension()
        .and_then(|e| e.to_str())
        .and_then(DocKind::from_extension);
    parse_document_with_hint(&read(path)?, hint).map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub(crate) fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, column, message } if !message.starts_with(&path.display().to_string()) => {
            Error::Parse {
                line,
                column,
                message: format!("{}: {message}", path.display()),
            }
        }
        other => other,
    })
}

impl PipelineData {
    /// `stage0.pres` and every `*.stratum` file of `dir`, ordered by stage name.
    pub fn load(dir: &Path) -> Result<PipelineData> {
        let base_path = dir.join("stage0.pres");
        let base = with_path(&base_path, load_document(&base_path)?.to_presentation())?;
        let listing = std::fs::read_dir(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        let mut docs = Vec::new();
        for entry in listing.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("stratum") {
                let doc = load_document(&path)?;
                let stage = with_path(&path, doc.require("stratum").and_then(|s| s.require("stage").cloned()))?;
                docs.push((stage.value, path, doc));
            }
        }
        docs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut strata: Vec<StratumSpec> = Vec::new();
        for (_, path, doc) in docs {
            let spec = with_path(&path, StratumSpec::load(&doc, &strata))?;
            strata.push(spec);
        }
        Ok(PipelineData { base, strata })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "ASSUMED")]
    Assumed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Assumed => "ASSUMED",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub degree: u32,
    pub generated: usize,
    pub pairs: usize,
    pub presentation: Option<usize>,
    pub certified: bool,
}

impl From<&DegreeCertificate> for CertificateRow {
    fn from(c: &DegreeCertificate) -> Self {
        CertificateRow {
            degree: c.degree,
            generated: c.generated,
            pairs: c.pairs,
            presentation: c.presentation,
            certified: c.certified(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PresentationSummary {
    pub label: String,
    pub generators: Vec<String>,
    pub relations: Vec<String>,
}

impl PresentationSummary {
    pub fn of(p: &Presentation) -> Result<Self> {
        let ctx = p.context();
        Ok(PresentationSummary {
            label: p.label().to_string(),
            generators: ctx
                .names()
                .iter()
                .zip(ctx.weights())
                .map(|(n, w)| format!("{n}:{w}"))
                .collect(),
            relations: p.minimal_relations()?.iter().map(|r| r.to_string()).collect(),
        })
    }
}

/// One gluing step.
#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub label: String,
    pub checks: Vec<Check>,
    pub stratum_ring: Option<PresentationSummary>,
    pub top_class: Option<String>,
    pub restriction: Vec<(String, String)>,
    pub pairs: Vec<(String, String, String)>,
    pub certificates: Vec<CertificateRow>,
    pub result: Option<PresentationSummary>,
}

impl StageReport {
    fn check(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

/// Named intermediate results that claims refer to.
#[derive(Clone, Debug)]
pub enum Object {
    Ideal(Ideal),
    Map(Morphism),
}

/// Per-stage data reused by claims.
pub struct StageData {
    pub classes: Context,
    pub forms: Vec<Polynomial>,
    pub membership: Arc<SubalgebraMembership>,
    pub stratum: Presentation,
    pub quotient: Presentation,
}

impl StageData {
    /// Class expression of an invariant ψ-polynomial.
    pub fn to_class(&self, f: &Polynomial) -> Result<Polynomial> {
        self.membership
            .express(f)?
            .ok_or_else(|| Error::invalid(format!("`{f}` is not a polynomial in the classes")))
    }
}

/// Everything computed for one sign convention.
pub struct PipelineRun {
    pub convention: SignConvention,
    pub dmax: u32,
    pub stages: Vec<StageReport>,
    pub objects: BTreeMap<String, Object>,
    pub stage_data: BTreeMap<String, StageData>,
    pub result: Option<Presentation>,
    pub aborted: Option<String>,
}

const EXACTNESS_NOTE: &str =
    "the localization sequence is exact and the square of restrictions is cartesian once c_top is a non-zero-divisor; geometric input, not recomputed";

/// One induction step: glue stratum `i` onto `prev`.
pub fn induction_step(
    ev: &Evaluator<'_>,
    i: usize,
    prev: &Presentation,
    dmax: u32,
    objects: &mut BTreeMap<String, Object>,
    stage_data: &mut BTreeMap<String, StageData>,
) -> (StageReport, Option<Presentation>) {
    let spec = &ev.specs[i];
    let mut report = StageReport {
        stage: spec.stage.clone(),
        label: spec.label.clone(),
        checks: Vec::new(),
        stratum_ring: None,
        top_class: None,
        restriction: Vec::new(),
        pairs: Vec::new(),
        certificates: Vec::new(),
        result: None,
    };
    let out = step_inner(ev, i, prev, dmax, objects, stage_data, &mut report);
    match out {
        Ok(p) => (report, p),
        Err(e) => {
            report.check("stage completed", Status::Fail, e.to_string());
            (report, None)
        }
    }
}

fn step_inner(
    ev: &Evaluator<'_>,
    i: usize,
    prev: &Presentation,
    dmax: u32,
    objects: &mut BTreeMap<String, Object>,
    stage_data: &mut BTreeMap<String, StageData>,
    report: &mut StageReport,
) -> Result<Option<Presentation>> {
    let spec = &ev.specs[i];
    let st = &spec.stage;
    let env = ev.env(i);

    // stratum ring as the invariant ring in the classes
    let classes = spec.class_context()?;
    let forms = spec
        .classes
        .iter()
        .map(|c| ev.value(i, c, Pos::default()))
        .collect::<Result<Vec<_>>>()?;
    let inv = spec.group.invariant_presentation(&forms, &classes, dmax)?;
    let gen_detail = inv
        .dimensions
        .iter()
        .map(|(d, a, b)| format!("{d}:{a}/{b}"))
        .collect::<Vec<_>>()
        .join(" ");
    if !inv.generates() {
        report.check("classes generate the invariants", Status::Fail, gen_detail);
        return Ok(None);
    }
    report.check(
        "classes generate the invariants",
        Status::Pass,
        format!("through degree {dmax} (degree:generated/invariant {gen_detail})"),
    );
    let stratum = Presentation::from_ideal(format!("A_{st}"), inv.relations.clone())?;
    report.stratum_ring = Some(PresentationSummary::of(&stratum)?);
    objects.insert(format!("{st}.stratum"), Object::Ideal(stratum.relations().clone()));
    let membership = Arc::new(SubalgebraMembership::with_tags(&Ideal::zero(&spec.psi), &forms, &classes)?);
    let to_class = |f: &Polynomial| -> Result<Polynomial> {
        membership
            .express(f)?
            .ok_or_else(|| Error::invalid(format!("`{f}` is not a polynomial in the classes of {st}")))
    };

    // non-zero-divisor gate
    let top = to_class(&ev.value(i, "c_top", Pos::default())?)?;
    report.top_class = Some(top.to_string());
    let nzd = stratum.relations().nonzerodivisor(&top)?;
    if !nzd.is_nonzerodivisor {
        let w = nzd.witness.map(|w| w.to_string()).unwrap_or_default();
        report.check(
            "c_top is a non-zero-divisor",
            Status::Fail,
            Error::ZeroDivisor {
                element: top.to_string(),
                witness: w,
            }
            .to_string(),
        );
        return Ok(None);
    }
    report.check("c_top is a non-zero-divisor", Status::Pass, format!("c_top = {top}"));
    let quotient = stratum.quotient(format!("D_{st}"), std::slice::from_ref(&top))?;
    objects.insert(format!("{st}.D"), Object::Ideal(quotient.relations().clone()));

    // restriction of the previous generators
    let prev_ctx = prev.context().clone();
    let mut res = Vec::new();
    for name in prev_ctx.names() {
        let img = to_class(&ev.restriction(i, name)?)?;
        report.restriction.push((name.clone(), img.to_string()));
        res.push(img);
    }
    let free = Presentation::free(format!("C_{st}"), &prev_ctx);
    let q_free = Morphism::new(&free, &quotient, res.clone())?;
    let q_prev = Morphism::new(prev, &quotient, res.clone())?;
    objects.insert(format!("{st}.restriction_kernel"), Object::Ideal(q_free.kernel()?));
    objects.insert(format!("{st}.restriction"), Object::Map(q_prev.clone()));
    match q_prev.check()?.failure {
        None => report.check("restriction is well defined", Status::Pass, "previous relations vanish in D"),
        Some((rel, nf)) => {
            report.check(
                "restriction is well defined",
                Status::Fail,
                format!("relation `{rel}` restricts to `{nf}`"),
            );
            return Ok(None);
        }
    }

    // generator pairs
    let p = Morphism::new(&stratum, &quotient, (0..classes.len()).map(|k| Polynomial::var_at(&classes, k)).collect())?;
    let mut pairs = Vec::new();
    for ps in &spec.pairs {
        let open = ps.open.eval(&VarEnv(&prev_ctx))?;
        let closed = match &ps.closed {
            ClosedSide::Restrict => open.substitute_indexed(&classes, &res)?,
            ClosedSide::Expr(e) => to_class(&e.eval(&env)?)?,
        };
        let closed = stratum.normal_form(&closed)?;
        report.pairs.push((ps.name.clone(), closed.to_string(), open.to_string()));
        pairs.push(GeneratorPair::new(ps.name.clone(), closed, open));
    }
    let square = match fiber_product(format!("F_{st}"), &p, &q_free, pairs.clone()) {
        Ok(s) => s,
        Err(e) => {
            report.check("generator pairs are compatible", Status::Fail, e.to_string());
            return Ok(None);
        }
    };
    report.check("generator pairs are compatible", Status::Pass, format!("{} pairs", pairs.len()));
    objects.insert(format!("{st}.kernel_closed"), Object::Ideal(square.kernel_closed.clone()));
    objects.insert(format!("{st}.kernel_open"), Object::Ideal(square.kernel_open.clone()));
    objects.insert(format!("{st}.fiber"), Object::Ideal(square.result.relations().clone()));

    // quotient by the extras
    let closed_extra = spec
        .extras_closed
        .iter()
        .map(|e| to_class(&e.eval(&env)?))
        .collect::<Result<Vec<_>>>()?;
    let mut open_extra = spec
        .extras_open
        .iter()
        .map(|e| e.eval(&VarEnv(&prev_ctx)))
        .collect::<Result<Vec<_>>>()?;
    if spec.extras_previous {
        open_extra.extend(prev.relations().generators().iter().cloned());
    }
    let result = square.apply_quotient(format!("B_{st}"), &closed_extra, &open_extra)?;
    objects.insert(format!("{st}.result"), Object::Ideal(result.relations().clone()));

    // graded surjectivity onto A x_D C with C the previous ring
    let stratum_q = stratum.quotient(format!("A_{st}"), &closed_extra)?;
    let p_q = Morphism::new(&stratum_q, &quotient, p.images().to_vec())?;
    let mut certs = graded_surjectivity(&p_q, &q_prev, &pairs, dmax)?;
    for c in certs.iter_mut() {
        c.presentation = Some(result.graded_dimension(c.degree));
    }
    report.certificates = certs.iter().map(CertificateRow::from).collect();
    let bad: Vec<u32> = certs.iter().filter(|c| !c.certified()).map(|c| c.degree).collect();
    if bad.is_empty() {
        report.check(
            "pairs generate the fiber product",
            Status::Pass,
            format!("degrees 1..={dmax}; presented dimensions agree"),
        );
    } else {
        report.check(
            "pairs generate the fiber product",
            Status::Fail,
            format!("dimension mismatch in degrees {bad:?}"),
        );
    }
    report.check("exactness", Status::Assumed, EXACTNESS_NOTE);
    report.result = Some(PresentationSummary::of(&result)?);
    stage_data.insert(
        st.clone(),
        StageData {
            classes,
            forms,
            membership,
            stratum,
            quotient,
        },
    );
    Ok(Some(result))
}

/// Run every stage under `conv`, stopping at the first failed gate.
pub fn run_pipeline(data: &PipelineData, conv: SignConvention, dmax: u32) -> PipelineRun {
    let ev = Evaluator::new(&data.strata, conv);
    let mut run = PipelineRun {
        convention: conv,
        dmax,
        stages: Vec::new(),
        objects: BTreeMap::new(),
        stage_data: BTreeMap::new(),
        result: None,
        aborted: None,
    };
    let mut prev = data.base.clone();
    run.objects
        .insert("stage0.result".into(), Object::Ideal(prev.relations().clone()));
    for i in 0..data.strata.len() {
        let (report, next) = induction_step(&ev, i, &prev, dmax, &mut run.objects, &mut run.stage_data);
        let failed = report.checks.iter().find(|c| c.status == Status::Fail).cloned();
        run.stages.push(report);
        match next {
            Some(p) => prev = p,
            None => {
                let why = failed.map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default();
                run.aborted = Some(format!("{}: {why}", data.strata[i].stage));
                return run;
            }
        }
    }
    run.result = Some(prev);
    run
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// `lhs = rhs` between ψ-forms.
    Identity,
    /// `lhs = rhs` in the quotient `D` of a stage.
    Congruence,
    /// The relations among named ψ-forms.
    Kernel,
    /// Listed ψ-polynomials generate the invariant ring.
    Generation,
    /// Listed ψ-polynomials cut out the origin.
    ZeroDim,
    /// A named ideal equals the listed generators.
    Object,
    /// A polynomial lies in a named ideal.
    Relation,
    /// A named map is injective.
    Injective,
    /// The stage's generator pairs passed graded certification.
    Certified,
    /// Recorded without verification.
    Assumed,
}

impl std::str::FromStr for ClaimKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => ClaimKind::Identity,
            "congruence" => ClaimKind::Congruence,
            "kernel" => ClaimKind::Kernel,
            "generation" => ClaimKind::Generation,
            "zero_dim" => ClaimKind::ZeroDim,
            "object" => ClaimKind::Object,
            "relation" => ClaimKind::Relation,
            "injective" => ClaimKind::Injective,
            "certified" => ClaimKind::Certified,
            "assumed" => ClaimKind::Assumed,
            _ => return Err(Error::invalid(format!("unknown claim kind `{s}`"))),
        })
    }
}

/// A transcribed statement with the data needed to check it.
#[derive(Clone, Debug)]
pub struct Claim {
    pub id: String,
    pub anchor: String,
    pub kind: ClaimKind,
    pub stage: Option<String>,
    pub object: Option<String>,
    fields: BTreeMap<String, Entry>,
}

impl Claim {
    fn field(&self, name: &str) -> Result<&Entry> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::invalid(format!("claim `{}` lacks `{name}`", self.id)))
    }
}

/// Claims of a `claims` document, in file order.
pub fn load_claims(doc: &Document) -> Result<Vec<Claim>> {
    if doc.kind != DocKind::Claims {
        return Err(Error::invalid(format!("expected a claims document, got {}", doc.kind)));
    }
    let mut out: Vec<Claim> = Vec::new();
    for sec in doc.sections_named("claim") {
        let id = sec.require("id")?;
        if out.iter().any(|c| c.id == id.value) {
            return Err(id.pos.error(format!("duplicate claim id `{}`", id.value)));
        }
        let kind_entry = sec.require("kind")?;
        let kind: ClaimKind = kind_entry.value.parse().map_err(|e: Error| kind_entry.pos.error(e.to_string()))?;
        let mut fields = BTreeMap::new();
        for (k, e) in sec.keyed()? {
            fields.insert(k.to_string(), e.clone());
        }
        let claim = Claim {
            id: id.value.clone(),
            anchor: sec.get("anchor").map(|e| e.value.trim_matches('"').to_string()).unwrap_or_default(),
            kind,
            stage: sec.get("stage").map(|e| e.value.clone()),
            object: sec.get("object").map(|e| e.value.clone()),
            fields,
        };
        let needs: &[&str] = match kind {
            ClaimKind::Identity | ClaimKind::Congruence => &["stage", "statement"],
            ClaimKind::Kernel => &["stage", "vars", "generators"],
            ClaimKind::Generation | ClaimKind::ZeroDim => &["stage", "generators"],
            ClaimKind::Object => &["object", "generators"],
            ClaimKind::Relation => &["object", "relation"],
            ClaimKind::Injective => &["object"],
            ClaimKind::Certified => &["stage"],
            ClaimKind::Assumed => &["note"],
        };
        for n in needs {
            sec.require(n)?;
        }
        out.push(claim);
    }
    Ok(out)
}

pub fn load_claims_file(path: &Path) -> Result<Vec<Claim>> {
    with_path(path, load_claims(&load_document(path)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimOutcome {
    pub id: String,
    pub kind: ClaimKind,
    pub anchor: String,
    pub status: Status,
    pub detail: String,
    pub corrected: Option<String>,
}

fn statement_sides(e: &Entry) -> Result<(String, Expr, Expr)> {
    let (l, r) = e
        .value
        .split_once('=')
        .ok_or_else(|| e.pos.error("expected `lhs = rhs`"))?;
    let lead = r.chars().take_while(|c| c.is_whitespace()).count();
    let lhs = parse_expr_at(l.trim(), e.pos)?;
    let rhs = parse_expr_at(r.trim(), e.pos.shift(l.chars().count() + 1 + lead))?;
    Ok((l.trim().to_string(), lhs, rhs))
}

fn list_in(e: &Entry, env: &dyn Env) -> Result<Vec<Polynomial>> {
    split_list(e, ';')
        .into_iter()
        .map(|(t, pos)| parse_expr_at(&t, pos)?.eval(env))
        .collect()
}

fn join(polys: &[Polynomial]) -> String {
    if polys.is_empty() {
        return "(0)".into();
    }
    polys.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("; ")
}

struct Verdict {
    status: Status,
    detail: String,
    corrected: Option<String>,
}

fn pass(detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        status: Status::Pass,
        detail: detail.into(),
        corrected: None,
    })
}

fn fail(detail: impl Into<String>, corrected: Option<String>) -> Result<Verdict> {
    Ok(Verdict {
        status: Status::Fail,
        detail: detail.into(),
        corrected,
    })
}

/// Check one claim against a pipeline run.
pub fn verify_claim(claim: &Claim, data: &PipelineData, run: &PipelineRun) -> ClaimOutcome {
    let ev = Evaluator::new(&data.strata, run.convention);
    let v = check_claim(claim, &ev, run).unwrap_or_else(|e| Verdict {
        status: Status::Fail,
        detail: format!("not checkable: {e}"),
        corrected: None,
    });
    ClaimOutcome {
        id: claim.id.clone(),
        kind: claim.kind,
        anchor: claim.anchor.clone(),
        status: v.status,
        detail: v.detail,
        corrected: v.corrected,
    }
}

fn object<'r>(run: &'r PipelineRun, name: &str) -> Result<&'r Object> {
    run.objects.get(name).ok_or_else(|| {
        Error::invalid(match &run.aborted {
            Some(why) => format!("`{name}` was not computed; pipeline stopped at {why}"),
            None => format!("unknown object `{name}`"),
        })
    })
}

fn object_ideal<'r>(run: &'r PipelineRun, name: &str) -> Result<&'r Ideal> {
    match object(run, name)? {
        Object::Ideal(i) => Ok(i),
        Object::Map(_) => Err(Error::invalid(format!("`{name}` is a map, not an ideal"))),
    }
}

/// Compare an ideal with claimed generators; on mismatch the corrected form
/// lists minimal generators of the computed ideal.
fn compare_ideals(computed: &Ideal, claimed: &[Polynomial]) -> Result<Verdict> {
    let ctx = computed.context();
    let claimed_ideal = Ideal::new(ctx, claimed.to_vec())?;
    let extra: Vec<Polynomial> = claimed
        .iter()
        .filter(|g| !computed.contains(g).unwrap_or(false))
        .cloned()
        .collect();
    let minimal = computed.minimal_generators()?;
    let missing: Vec<Polynomial> = minimal
        .iter()
        .filter(|g| !claimed_ideal.contains(g).unwrap_or(false))
        .cloned()
        .collect();
    if extra.is_empty() && missing.is_empty() {
        return pass(format!("ideals agree; generators {}", join(&minimal)));
    }
    let mut detail = Vec::new();
    if !extra.is_empty() {
        detail.push(format!("not in the computed ideal: {}", join(&extra)));
    }
    if !missing.is_empty() {
        detail.push(format!("not implied by the claim: {}", join(&missing)));
    }
    fail(detail.join("; "), Some(join(&minimal)))
}

fn check_claim(claim: &Claim, ev: &Evaluator<'_>, run: &PipelineRun) -> Result<Verdict> {
    let stage_index = || -> Result<usize> {
        let st = claim.stage.as_deref().unwrap_or_default();
        ev.index(st).ok_or_else(|| Error::invalid(format!("unknown stage `{st}`")))
    };
    match claim.kind {
        ClaimKind::Assumed => Ok(Verdict {
            status: Status::Assumed,
            detail: claim.field("note")?.value.clone(),
            corrected: None,
        }),
        ClaimKind::Identity => {
            let i = stage_index()?;
            let env = ev.env(i);
            let (lhs_text, lhs, rhs) = statement_sides(claim.field("statement")?)?;
            let l = lhs.eval(&env)?;
            let r = rhs.eval(&env)?;
            let diff = &l - &r;
            if diff.is_zero() {
                return pass(format!("both sides equal {l}"));
            }
            let psi = &ev.specs[i].psi;
            let names: Vec<String> = rhs.names().into_iter().filter(|n| !psi.contains(n)).collect();
            let corrected = if names.is_empty() {
                format!("{lhs_text} = {l}")
            } else {
                let forms = names
                    .iter()
                    .map(|n| ev.value(i, n, Pos::default()))
                    .collect::<Result<Vec<_>>>()?;
                let tags = VarTable::with_weights(
                    names
                        .iter()
                        .cloned()
                        .zip(forms.iter().map(|f| f.max_weighted_degree().unwrap_or(1).max(1))),
                )?
                .shared();
                let m = SubalgebraMembership::with_tags(&Ideal::zero(psi), &forms, &tags)?;
                match m.express(&l)? {
                    Some(p) => format!("{lhs_text} = {p}"),
                    None => format!("{lhs_text} = {l}"),
                }
            };
            fail(format!("lhs - rhs = {diff}"), Some(corrected))
        }
        ClaimKind::Congruence => {
            let i = stage_index()?;
            let env = ev.env(i);
            let sd = run
                .stage_data
                .get(&ev.specs[i].stage)
                .ok_or_else(|| Error::invalid("stage was not computed"))?;
            let (lhs_text, lhs, rhs) = statement_sides(claim.field("statement")?)?;
            let l = sd.quotient.normal_form(&sd.to_class(&lhs.eval(&env)?)?)?;
            let r = sd.quotient.normal_form(&sd.to_class(&rhs.eval(&env)?)?)?;
            if l == r {
                pass(format!("both sides reduce to {l} modulo c_top"))
            } else {
                fail(format!("lhs reduces to {l}, rhs to {r}"), Some(format!("{lhs_text} = {l}")))
            }
        }
        ClaimKind::Kernel => {
            let i = stage_index()?;
            let entry = claim.field("vars")?;
            let bare = Entry {
                key: None,
                ..entry.clone()
            };
            let vars = parse_var_list(&[&bare])?;
            let ctx = VarTable::with_weights(vars.iter().map(|(n, w, _)| (n.clone(), *w)))?.shared();
            let forms = vars
                .iter()
                .map(|(n, _, pos)| ev.env(i).name(n, *pos))
                .collect::<Result<Vec<_>>>()?;
            for (f, (n, w, _)) in forms.iter().zip(&vars) {
                if f.weighted_degree() != WeightedDegree::Homogeneous(*w) {
                    return fail(format!("`{n}` has ψ-form {f}, not of degree {w}"), None);
                }
            }
            let kernel = map_kernel(&ctx, &[], &Ideal::zero(&ev.specs[i].psi), &forms)?;
            let claimed = list_in(claim.field("generators")?, &VarEnv(&ctx))?;
            compare_ideals(&kernel, &claimed)
        }
        ClaimKind::Generation => {
            let i = stage_index()?;
            let group = &ev.specs[i].group;
            let claimed = list_in(claim.field("generators")?, &ev.env(i))?;
            for g in &claimed {
                if !group.is_invariant(g)? {
                    return fail(format!("`{g}` is not invariant"), None);
                }
            }
            let basic = group.algebra_generators()?;
            let m = SubalgebraMembership::new(&claimed)?;
            let missing: Vec<Polynomial> = basic
                .iter()
                .filter(|b| !matches!(m.express(b), Ok(Some(_))))
                .cloned()
                .collect();
            if missing.is_empty() {
                pass(format!("generate the invariants; minimal generators {}", join(&basic)))
            } else {
                fail(
                    format!("invariants outside the subalgebra: {}", join(&missing)),
                    Some(join(&basic)),
                )
            }
        }
        ClaimKind::ZeroDim => {
            let i = stage_index()?;
            let psi = &ev.specs[i].psi;
            let gens = list_in(claim.field("generators")?, &ev.env(i))?;
            let ideal = Ideal::new(psi, gens)?;
            let zd = ideal.zero_dimensional();
            let Some(count) = zd.standard_monomials.filter(|_| zd.zero_dimensional) else {
                return fail("not zero-dimensional", None);
            };
            // the only common zero is the origin iff every variable is nilpotent
            for k in 0..psi.len() {
                let x = Polynomial::var_at(psi, k);
                let nil = (1..=count as u32 + 1).any(|e| ideal.contains(&x.pow(e)).unwrap_or(false));
                if !nil {
                    return fail(format!("`{}` is not nilpotent modulo the ideal", psi.name(k)), None);
                }
            }
            pass(format!("zero-dimensional with {count} standard monomials; only zero is the origin"))
        }
        ClaimKind::Object => {
            let name = claim.object.as_deref().unwrap_or_default();
            let ideal = object_ideal(run, name)?;
            let claimed = list_in(claim.field("generators")?, &VarEnv(ideal.context()))?;
            compare_ideals(ideal, &claimed)
        }
        ClaimKind::Relation => {
            let name = claim.object.as_deref().unwrap_or_default();
            let ideal = object_ideal(run, name)?;
            let rel = list_in(claim.field("relation")?, &VarEnv(ideal.context()))?;
            let [rel] = rel.as_slice() else {
                return Err(Error::invalid("expected one relation"));
            };
            let nf = ideal.reduce(rel)?;
            if nf.is_zero() {
                pass("lies in the computed ideal")
            } else {
                fail(format!("normal form {nf}"), Some((rel - &nf).to_string()))
            }
        }
        ClaimKind::Certified => {
            let st = claim.stage.as_deref().unwrap_or_default();
            let report = run
                .stages
                .iter()
                .find(|r| r.stage == st)
                .ok_or_else(|| Error::invalid(format!("stage `{st}` was not run")))?;
            match report.checks.iter().find(|c| c.name == "pairs generate the fiber product") {
                Some(c) if c.status == Status::Pass => pass(c.detail.clone()),
                Some(c) => fail(c.detail.clone(), None),
                None => fail("stage stopped before certification", None),
            }
        }
        ClaimKind::Injective => {
            let name = claim.object.as_deref().unwrap_or_default();
            let Object::Map(m) = object(run, name)? else {
                return Err(Error::invalid(format!("`{name}` is not a map")));
            };
            let kernel = m.kernel()?;
            if kernel.equals(m.source().relations())? {
                pass("kernel equals the source relations")
            } else {
                let minimal = kernel.minimal_generators()?;
                fail(format!("kernel {}", join(&minimal)), Some(format!("kernel = ({})", join(&minimal))))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub assumed: usize,
}

/// Full verification under one convention.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub convention: SignConvention,
    pub dmax: u32,
    pub stages: Vec<StageReport>,
    pub aborted: Option<String>,
    pub result: Option<PresentationSummary>,
    pub claims: Vec<ClaimOutcome>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn outcome(&self, id: &str) -> Option<&ClaimOutcome> {
        self.claims.iter().find(|c| c.id == id)
    }
}

fn summarize(claims: &[ClaimOutcome]) -> Summary {
    let count = |s: Status| claims.iter().filter(|c| c.status == s).count();
    Summary {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        assumed: count(Status::Assumed),
    }
}

/// Run the pipeline and check every claim.
pub fn verify_paper(data: &PipelineData, claims: &[Claim], conv: SignConvention, dmax: u32) -> VerificationReport {
    let run = run_pipeline(data, conv, dmax);
    let outcomes: Vec<ClaimOutcome> = claims.iter().map(|c| verify_claim(c, data, &run)).collect();
    VerificationReport {
        convention: conv,
        dmax,
        aborted: run.aborted.clone(),
        result: run.result.as_ref().and_then(|p| PresentationSummary::of(p).ok()),
        stages: run.stages,
        summary: summarize(&outcomes),
        claims: outcomes,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionRow {
    pub convention: SignConvention,
    pub passed: usize,
    pub aborted: Option<String>,
    pub failed: Vec<String>,
}

/// Claim status under each of the eight conventions.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionSearch {
    pub rows: Vec<ConventionRow>,
    /// Conventions with the most passing claims.
    pub best: Vec<SignConvention>,
    /// Whether some convention passes every checkable claim.
    pub consistent: bool,
    /// Claims failing under every convention.
    pub never_pass: Vec<String>,
    /// Claims that each pass under some convention but never together.
    pub exclusive_pairs: Vec<(String, String)>,
}

pub fn convention_search(data: &PipelineData, claims: &[Claim], dmax: u32) -> ConventionSearch {
    let conventions = SignConvention::all();
    let reports: Vec<VerificationReport> = std::thread::scope(|s| {
        let handles: Vec<_> = conventions
            .iter()
            .map(|&c| s.spawn(move || verify_paper(data, claims, c, dmax)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let checked: Vec<&Claim> = claims.iter().filter(|c| c.kind != ClaimKind::Assumed).collect();
    let passes = |r: &VerificationReport, id: &str| r.outcome(id).is_some_and(|o| o.status == Status::Pass);
    let rows: Vec<ConventionRow> = reports
        .iter()
        .map(|r| ConventionRow {
            convention: r.convention,
            passed: r.summary.passed,
            aborted: r.aborted.clone(),
            failed: r
                .claims
                .iter()
                .filter(|c| c.status == Status::Fail)
                .map(|c| c.id.clone())
                .collect(),
        })
        .collect();
    let top = rows.iter().map(|r| r.passed).max().unwrap_or(0);
    let best = rows.iter().filter(|r| r.passed == top).map(|r| r.convention).collect();
    let consistent = rows.iter().any(|r| r.failed.is_empty());
    let masks: Vec<u8> = checked
        .iter()
        .map(|c| {
            reports
                .iter()
                .enumerate()
                .filter(|(_, r)| passes(r, &c.id))
                .fold(0u8, |m, (k, _)| m | (1 << k))
        })
        .collect();
    let never_pass = checked
        .iter()
        .zip(&masks)
        .filter(|(_, &m)| m == 0)
        .map(|(c, _)| c.id.clone())
        .collect();
    let mut exclusive_pairs = Vec::new();
    for a in 0..checked.len() {
        for b in a + 1..checked.len() {
            if masks[a] != 0 && masks[b] != 0 && masks[a] & masks[b] == 0 {
                exclusive_pairs.push((checked[a].id.clone(), checked[b].id.clone()));
            }
        }
    }
    ConventionSearch {
        rows,
        best,
        consistent,
        never_pass,
        exclusive_pairs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Machine,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "machine" | "json" => Ok(ReportFormat::Machine),
            _ => Err(Error::invalid(format!("unknown format `{s}`"))),
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn text_presentation(p: &PresentationSummary) -> String {
    let rels = if p.relations.is_empty() {
        "0".to_string()
    } else {
        p.relations.join(",\n      ")
    };
    format!("Q[{}] / (\n      {rels})", p.generators.join(", "))
}

pub fn emit_report(report: &VerificationReport, format: ReportFormat) -> String {
    if format == ReportFormat::Machine {
        return json(report);
    }
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "convention {}  dmax {}", report.convention, report.dmax);
    for st in &report.stages {
        let _ = writeln!(s, "\n== {} ({}) ==", st.stage, st.label);
        if let Some(a) = &st.stratum_ring {
            let _ = writeln!(s, "  stratum ring: {}", text_presentation(a));
        }
        if let Some(t) = &st.top_class {
            let _ = writeln!(s, "  c_top = {t}");
        }
        for (n, img) in &st.restriction {
            let _ = writeln!(s, "  restrict {n} -> {img}");
        }
        for (n, a, c) in &st.pairs {
            let _ = writeln!(s, "  pair {n} = ({a}, {c})");
        }
        for c in &st.checks {
            let _ = writeln!(s, "  {:<7} {}: {}", c.status, c.name, c.detail);
        }
        if !st.certificates.is_empty() {
            let row = st
                .certificates
                .iter()
                .map(|c| format!("{}:{}/{}", c.degree, c.generated, c.pairs))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(s, "  certificate (degree:generated/pairs) {row}");
        }
        if let Some(r) = &st.result {
            let _ = writeln!(s, "  result: {}", text_presentation(r));
        }
    }
    if let Some(a) = &report.aborted {
        let _ = writeln!(s, "\npipeline stopped: {a}");
    }
    let _ = writeln!(s, "\n== claims ==");
    for c in &report.claims {
        let _ = writeln!(s, "  {:<7} {}", c.status, c.id);
        if c.status != Status::Pass {
            let _ = writeln!(s, "          {}", c.detail);
        }
        if let Some(fix) = &c.corrected {
            let _ = writeln!(s, "          corrected: {fix}");
        }
    }
    let _ = writeln!(
        s,
        "\nsummary: {} passed, {} failed, {} assumed",
        report.summary.passed, report.summary.failed, report.summary.assumed
    );
    s
}

pub fn emit_search(search: &ConventionSearch, format: ReportFormat) -> String {
    if format == ReportFormat::Machine {
        return json(search);
    }
    use std::fmt::Write;
    let mut s = String::new();
    for r in &search.rows {
        let _ = writeln!(s, "{}  passed {:>3}  failed {:>3}", r.convention, r.passed, r.failed.len());
        if let Some(a) = &r.aborted {
            let _ = writeln!(s, "    pipeline stopped: {a}");
        }
    }
    let best = search.best.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; ");
    let _ = writeln!(s, "best: {best}");
    let _ = writeln!(
        s,
        "single convention satisfying every claim: {}",
        if search.consistent { "yes" } else { "no" }
    );
    let _ = writeln!(s, "failing under every convention: {}", search.never_pass.join(", "));
    let _ = writeln!(s, "mutually exclusive claims:");
    for (a, b) in &search.exclusive_pairs {
        let _ = writeln!(s, "  {a} <-> {b}");
    }
    s
}
