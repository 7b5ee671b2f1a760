//! Batch front end. [`Cli`] is the command line; [`run`] validates every
//! option, loads the inputs, executes one verb and returns a [`Report`] whose
//! JSON form carries a versioned schema and whose summary is for people.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 parse or option error,
//! 3 infeasible size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::ainfty::{self, check_relations, hom_complex, AInfty, AInftyError, Elem, TableCategory};
use crate::coefficients::Ring;
use crate::complexes::Group;
use crate::functors::{self, TableFunctor};
use crate::localization::{self, Verdict};
use crate::nerve::{self, NerveError};
use crate::{data, suite};

pub const SCHEMA: &str = "ainfty-report/1";

/// Relation tuples checked per length before sampling kicks in.
pub(crate) const RELATION_BUDGET: usize = 100_000;
/// Largest hom basis a localization or Hochschild complex may have.
const BASIS_LIMIT: usize = 60_000;

#[derive(Parser, Debug, Clone)]
#[command(name = "ainfty", version, about = "Exact verification for finite A-infinity categories")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Ground ring (Z, Q or Fp). Inputs are base-changed to it when given;
    /// the built-in suite uses it for its field examples.
    #[arg(long, global = true)]
    pub ring: Option<String>,
    /// Word-length truncation L of localizations.
    #[arg(long = "L", global = true, default_value_t = 3)]
    pub truncation: usize,
    /// Degree window LO,HI for cohomology comparisons.
    #[arg(long, global = true, default_value = "-4,2", allow_hyphen_values = true)]
    pub window: String,
    /// Arity bound for relations, functors and Hochschild cochains.
    #[arg(long, global = true, default_value_t = 4)]
    pub arity: usize,
    /// Dimension bound for nerves.
    #[arg(long, global = true, default_value_t = 3)]
    pub dim: usize,
    /// Enumeration budget for simplices, functors and group elements.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub limit: usize,
    /// What goes to standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Summary)]
    pub format: Format,
    /// Write the JSON report to this file as well.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Summary,
    Json,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Verb {
    /// Relations, units and cohomology of each input category.
    Check {
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// Cohomology of every nonzero hom complex.
    Cohomology {
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// Compare hom_A with the truncated localization at the declared units.
    Localize { input: String },
    /// dg/A-infinity nerve comparison, horn filling, core, pi_0 and pi_1.
    Nerve {
        input: String,
        /// Write the truncated simplicial set here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Hochschild cochains up to the arity bound.
    Hochschild { input: String },
    /// Check functor files from SOURCE to TARGET, or enumerate functors up
    /// to natural equivalence when none are given.
    Functors { source: String, target: String, functors: Vec<String> },
    /// Run the built-in verification suite on the bundled examples.
    VerifyPaper {
        #[arg(long, value_enum)]
        lemma: Option<Lemma>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Relations,
    Units,
    Cones,
    Zw,
    RightInverse,
    Ts,
    ModI,
    Cohomologous,
    Nerve,
    Hochschild,
    Functors,
}

impl Lemma {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

/// Options after validation.
#[derive(Clone, Debug)]
pub struct Settings {
    pub ring: Option<Ring>,
    pub l: usize,
    pub window: (i32, i32),
    pub arity: usize,
    pub dim: usize,
    pub limit: usize,
}

impl Settings {
    pub fn field(&self) -> Ring {
        self.ring.unwrap_or(Ring::PrimeField(2))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Infeasible,
    Fail,
    ParseError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::ParseError => 2,
            Status::Infeasible => 3,
        }
    }

    fn word(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::ParseError => "parse error",
            Status::Infeasible => "infeasible",
        }
    }
}

/// One verified item: an input, a hom pair or a suite lemma.
#[derive(Clone, Debug, Serialize)]
pub struct Section {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<String>,
    pub data: Value,
    #[serde(skip)]
    pub lines: Vec<String>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section { name: name.into(), status: Status::Pass, counterexample: None, estimate: None, data: json!({}), lines: Vec::new() }
    }

    /// Records a failure; the first counterexample is kept.
    pub fn fail(&mut self, why: impl Into<String>) {
        if self.status != Status::Fail {
            self.counterexample = Some(why.into());
        }
        self.status = Status::Fail;
    }

    pub fn infeasible(&mut self, estimate: impl Into<String>) {
        if self.status == Status::Pass {
            self.status = Status::Infeasible;
            self.estimate = Some(estimate.into());
        }
    }

    /// Fails with `why()` unless `ok`; returns `ok`.
    pub fn require(&mut self, ok: bool, why: impl FnOnce() -> String) -> bool {
        if !ok {
            self.fail(why());
        }
        ok
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.data[key] = serde_json::to_value(v).expect("report data serializes");
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub verb: String,
    pub options: Value,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub sections: Vec<Section>,
}

impl Report {
    fn new(verb: &str, options: Value) -> Self {
        Report { schema: SCHEMA, verb: verb.into(), options, status: Status::Pass, error: None, sections: Vec::new() }
    }

    fn parse_error(verb: &str, options: Value, e: ErrorInfo) -> Self {
        Report { status: Status::ParseError, error: Some(e), ..Report::new(verb, options) }
    }

    fn finish(mut self) -> Self {
        self.status = self.sections.iter().map(|s| s.status).max().unwrap_or(Status::Pass);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "ainfty {}: {} ({} section{})", self.verb, self.status.word(), self.sections.len(), if self.sections.len() == 1 { "" } else { "s" }).unwrap();
        if let Some(e) = &self.error {
            writeln!(s, "  {} error at {}: {}", e.kind, e.location, e.message).unwrap();
        }
        for sec in &self.sections {
            writeln!(s, "[{}] {}", sec.status.word(), sec.name).unwrap();
            for l in &sec.lines {
                writeln!(s, "    {l}").unwrap();
            }
            if let Some(c) = &sec.counterexample {
                writeln!(s, "    counterexample: {c}").unwrap();
            }
            if let Some(e) = &sec.estimate {
                writeln!(s, "    estimate: {e}").unwrap();
            }
        }
        s
    }
}

fn option_error(location: &str, message: String) -> ErrorInfo {
    ErrorInfo { kind: "option".into(), location: location.into(), message }
}

fn parse_window(s: &str) -> Result<(i32, i32), ErrorInfo> {
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    let (a, b) = t.split_once(',').or_else(|| t.split_once("..")).ok_or_else(|| option_error("--window", format!("expected LO,HI, got {s:?}")))?;
    let p = |x: &str| x.trim().parse::<i32>().map_err(|_| option_error("--window", format!("bad bound {x:?}")));
    let (lo, hi) = (p(a)?, p(b)?);
    if lo > hi || hi - lo > 16 {
        return Err(option_error("--window", format!("need LO <= HI and a span of at most 16, got [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

pub fn validate(o: &Options) -> Result<Settings, ErrorInfo> {
    let ring = match &o.ring {
        Some(r) => Some(Ring::parse_name(r).ok_or_else(|| option_error("--ring", format!("unknown ring {r:?}; use Z, Q or Fp for a prime p")))?),
        None => None,
    };
    if !(1..=5).contains(&o.truncation) {
        return Err(option_error("--L", format!("truncation must be in 1..=5, got {}", o.truncation)));
    }
    if !(1..=6).contains(&o.arity) {
        return Err(option_error("--arity", format!("arity bound must be in 1..=6, got {}", o.arity)));
    }
    if !(1..=4).contains(&o.dim) {
        return Err(option_error("--dim", format!("nerve dimension must be in 1..=4, got {}", o.dim)));
    }
    if o.limit == 0 {
        return Err(option_error("--limit", "limit must be positive".into()));
    }
    Ok(Settings { ring, l: o.truncation, window: parse_window(&o.window)?, arity: o.arity, dim: o.dim, limit: o.limit })
}

fn options_value(o: &Options, lemma: Option<Lemma>) -> Value {
    json!({
        "ring": o.ring,
        "truncation": o.truncation,
        "window": o.window,
        "arity": o.arity,
        "dim": o.dim,
        "limit": o.limit,
        "lemma": lemma,
    })
}

/// Reads `spec` as a path, as a path with `ext` appended, or as the name of a
/// bundled file (the file stem is looked up).
fn read_source(spec: &str, ext: &str, bundled: impl Fn(&str) -> Option<&'static str>) -> Result<(String, String), ErrorInfo> {
    let with_ext = format!("{spec}.{ext}");
    for p in [spec, with_ext.as_str()] {
        if Path::new(p).is_file() {
            let text = std::fs::read_to_string(p).map_err(|e| ErrorInfo { kind: "io".into(), location: p.into(), message: e.to_string() })?;
            return Ok((text, p.to_string()));
        }
    }
    let stem = Path::new(spec).file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
    bundled(stem).map(|t| (t.to_string(), format!("bundled:{stem}"))).ok_or_else(|| ErrorInfo { kind: "io".into(), location: spec.into(), message: "no such file or bundled example".into() })
}

fn parse_failure(origin: &str, e: AInftyError) -> ErrorInfo {
    match e {
        AInftyError::Parse { line, msg } => ErrorInfo { kind: "parse".into(), location: format!("{origin}:{line}"), message: msg },
        other => ErrorInfo { kind: "parse".into(), location: origin.into(), message: other.to_string() },
    }
}

/// Replaces the `ring` line, so coefficients are read in the new ring.
fn rebase(text: &str, ring: Ring) -> String {
    let mut done = false;
    let mut out = String::with_capacity(text.len());
    for l in text.lines() {
        if !done && l.trim_start().starts_with("ring ") {
            out.push_str(&format!("ring {}", ring.name()));
            done = true;
        } else {
            out.push_str(l);
        }
        out.push('\n');
    }
    out
}

pub fn load_category(spec: &str, ring: Option<Ring>) -> Result<TableCategory, ErrorInfo> {
    let (text, origin) = read_source(spec, "cat", data::category_text)?;
    let text = match ring {
        Some(r) => rebase(&text, r),
        None => text,
    };
    let c = TableCategory::from_text(&text).map_err(|e| parse_failure(&origin, e))?;
    if c.ring() != Ring::Integers && has_torsion(&c) {
        return Err(ErrorInfo { kind: "parse".into(), location: origin, message: format!("torsion generators need ring Z, not {}", c.ring().name()) });
    }
    Ok(c)
}

pub fn has_torsion(c: &TableCategory) -> bool {
    let n = c.num_objects();
    (0..n).any(|x| (0..n).any(|y| (0..c.hom_dim(x, y)).any(|i| c.torsion(ainfty::Gen::new(x, y, i)).is_some())))
}

fn load_functor(spec: &str, a: &TableCategory, b: &TableCategory) -> Result<(String, TableFunctor), ErrorInfo> {
    let (text, origin) = read_source(spec, "fun", |stem| data::FUNCTORS.iter().find(|f| f.0 == stem).map(|f| f.3))?;
    let name = text.lines().find_map(|l| l.trim().strip_prefix("functor ")).unwrap_or(spec).trim().to_string();
    TableFunctor::from_text(&text, a, b).map(|f| (name, f)).map_err(|e| parse_failure(&origin, e))
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Report {
    let lemma = match &cli.verb {
        Verb::VerifyPaper { lemma } => *lemma,
        _ => None,
    };
    let verb = verb_name(&cli.verb);
    let options = options_value(&cli.opts, lemma);
    let s = match validate(&cli.opts) {
        Ok(s) => s,
        Err(e) => return Report::parse_error(verb, options, e),
    };
    let mut report = Report::new(verb, options.clone());
    let res = match &cli.verb {
        Verb::Check { inputs } => load_all(inputs, &s).map(|cats| cats.iter().map(|c| check(c, &s)).collect()),
        Verb::Cohomology { inputs } => load_all(inputs, &s).map(|cats| cats.iter().flat_map(|c| cohomology(c, &s)).collect()),
        Verb::Localize { input } => load_category(input, s.ring).map(|c| localize(&c, &s)),
        Verb::Nerve { input, dump } => load_category(input, s.ring).map(|c| nerve_sections(&c, &s, dump.as_deref())),
        Verb::Hochschild { input } => load_category(input, s.ring).map(|c| vec![hochschild(&c, &s)]),
        Verb::Functors { source, target, functors } => functor_sections(source, target, functors, &s),
        Verb::VerifyPaper { lemma } => Ok(suite::run(&s, *lemma)),
    };
    match res {
        Ok(sections) => {
            report.sections = sections;
            report.finish()
        }
        Err(e) => Report::parse_error(verb, options, e),
    }
}

fn verb_name(v: &Verb) -> &'static str {
    match v {
        Verb::Check { .. } => "check",
        Verb::Cohomology { .. } => "cohomology",
        Verb::Localize { .. } => "localize",
        Verb::Nerve { .. } => "nerve",
        Verb::Hochschild { .. } => "hochschild",
        Verb::Functors { .. } => "functors",
        Verb::VerifyPaper { .. } => "verify-paper",
    }
}

fn load_all(inputs: &[String], s: &Settings) -> Result<Vec<TableCategory>, ErrorInfo> {
    inputs.iter().map(|i| load_category(i, s.ring)).collect()
}

/// `H^d` in the window, nonzero degrees only.
pub fn cohomology_rows<A: AInfty + ?Sized>(a: &A, x: usize, y: usize, window: (i32, i32)) -> Result<Vec<(i32, Group)>, AInftyError> {
    let h = hom_complex(a, x, y)?;
    Ok(h.complex.cohomology_in(window.0, window.1).into_iter().filter(|(_, g)| g.order() != Some(1)).collect())
}

/// Relations up to the smaller of the declared and the requested arity.
fn integrity(c: &TableCategory, s: &Settings, sec: &mut Section) -> bool {
    let l = c.max_arity().min(s.arity);
    let rep = check_relations(c, l, Some(RELATION_BUDGET));
    let rows: Vec<Value> = rep.lengths.iter().map(|r| json!({"length": r.length, "checked": r.tuples_checked, "total": r.tuples_total.to_string()})).collect();
    sec.set("relations", rows);
    let parts: Vec<String> = rep.lengths.iter().map(|r| format!("l={} {}/{}", r.length, r.tuples_checked, r.tuples_total)).collect();
    sec.line(format!("relations: {}", parts.join(", ")));
    sec.require(rep.passed(), || rep.first_failure().unwrap_or_default().to_string())
}

fn header(c: &TableCategory, sec: &mut Section) {
    let objects: Vec<String> = (0..c.num_objects()).map(|x| c.object_name(x)).collect();
    sec.set("category", &c.name);
    sec.set("ring", c.ring().name());
    sec.set("objects", &objects);
}

fn units(c: &TableCategory, sec: &mut Section) {
    let mut rows = Vec::new();
    for x in 0..c.num_objects() {
        let name = c.object_name(x);
        let Some(u) = c.unit(x) else {
            rows.push(json!({"object": name, "declared": false}));
            sec.line(format!("unit {name}: none declared"));
            continue;
        };
        let strict = ainfty::is_strict_unit(c, x, &u);
        match ainfty::is_unit(c, x, &u) {
            Ok(v) => {
                rows.push(json!({"object": name, "declared": true, "strict": strict, "unit": v.is_unit, "zero_witness": v.is_unit && v.all_zero()}));
                sec.line(format!("unit {name}: {}", if strict { "strict" } else if v.is_unit { "homotopy unit" } else { "not a unit" }));
                sec.require(v.is_unit, || format!("declared unit of {name} fails: {}", v.reason.clone().unwrap_or_default()));
            }
            Err(e) => {
                sec.fail(format!("unit of {name}: {e}"));
            }
        }
    }
    sec.set("units", rows);
}

fn check(c: &TableCategory, s: &Settings) -> Section {
    let mut sec = Section::new(&c.name);
    header(c, &mut sec);
    if !integrity(c, s, &mut sec) {
        return sec;
    }
    if has_torsion(c) {
        sec.line("torsion homs: units and cohomology need free homs, not computed");
        return sec;
    }
    units(c, &mut sec);
    let mut rows = Vec::new();
    for x in 0..c.num_objects() {
        for y in 0..c.num_objects() {
            match cohomology_rows(c, x, y, s.window) {
                Ok(r) => {
                    for (d, g) in r {
                        sec.line(format!("H^{d}({}, {}) = {g}", c.object_name(x), c.object_name(y)));
                        rows.push(json!({"source": c.object_name(x), "target": c.object_name(y), "degree": d, "group": g.to_string()}));
                    }
                }
                Err(e) => sec.fail(format!("hom({}, {}): {e}", c.object_name(x), c.object_name(y))),
            }
        }
    }
    sec.set("cohomology", rows);
    sec
}

fn cohomology(c: &TableCategory, s: &Settings) -> Vec<Section> {
    let mut pre = Section::new(format!("{}: relations", c.name));
    if !integrity(c, s, &mut pre) {
        return vec![pre];
    }
    let mut out = Vec::new();
    for x in 0..c.num_objects() {
        for y in 0..c.num_objects() {
            if c.hom_dim(x, y) == 0 {
                continue;
            }
            let mut sec = Section::new(format!("{}: hom({}, {})", c.name, c.object_name(x), c.object_name(y)));
            if (0..c.hom_dim(x, y)).any(|i| c.torsion(ainfty::Gen::new(x, y, i)).is_some()) {
                sec.line("torsion generators; not computed");
                out.push(sec);
                continue;
            }
            match cohomology_rows(c, x, y, s.window) {
                Ok(r) => {
                    let rows: Vec<Value> = r.iter().map(|(d, g)| json!({"degree": d, "group": g.to_string()})).collect();
                    let text: Vec<String> = r.iter().map(|(d, g)| format!("H^{d} = {g}")).collect();
                    sec.line(if text.is_empty() { "acyclic in the window".to_string() } else { text.join(", ") });
                    sec.set("cohomology", rows);
                }
                Err(e) => sec.fail(e.to_string()),
            }
            out.push(sec);
        }
    }
    out
}

fn declared_units(c: &TableCategory) -> Result<Vec<Elem>, String> {
    (0..c.num_objects()).map(|x| c.unit(x).ok_or_else(|| format!("object {} has no declared unit", c.object_name(x)))).collect()
}

/// Word count of `A⁺[units⁻¹]` over all pairs, or the first pair above the limit.
fn localization_size(c: &TableCategory, us: &[Elem], l: usize) -> Result<usize, String> {
    let loc = localization::augmented_localization(c, us.to_vec(), l).map_err(|e| e.to_string())?;
    let n = c.num_objects();
    let mut total = 0;
    for x in 0..n {
        for y in 0..n {
            let d = loc.hom_dim(x, y);
            if d > BASIS_LIMIT {
                return Err(format!("hom({}, {}) of the truncated localization has {d} basis words (limit {BASIS_LIMIT})", c.object_name(x), c.object_name(y)));
            }
            total += d;
        }
    }
    Ok(total)
}

pub(crate) fn right_inverse_section<A: AInfty + Send>(name: &str, a: &A, us: &[Elem], s: &Settings) -> Section {
    let mut sec = Section::new(name);
    match localization::verify_right_inverse(a, us, s.l, s.window.0, s.window.1) {
        Ok(rep) => {
            for p in &rep.pairs {
                let degs: Vec<String> = p.rows.iter().map(|r| format!("{}:{}/{}", r.degree, r.base, r.localized)).collect();
                sec.line(format!(
                    "{} -> {}: stable image {}, literal {}, L vs L+1 {}  [{}]",
                    p.source,
                    p.target,
                    ok(p.stable_image_iso),
                    ok(p.quasi_iso),
                    ok(p.stable),
                    degs.join(" ")
                ));
                sec.require(p.stable_image_iso, || format!("hom({}, {}) at L = {}: {}", p.source, p.target, s.l, degs.join(" ")));
            }
            if rep.verdict == Verdict::Partial {
                sec.line("literal F_{<=L} comparison fails on endomorphisms; the stable image is certified");
            }
            sec.set("verdict", rep.verdict);
            sec.set("pairs", &rep.pairs);
        }
        Err(e) => sec.fail(e.to_string()),
    }
    sec
}

pub(crate) fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "no"
    }
}

fn localize(c: &TableCategory, s: &Settings) -> Vec<Section> {
    let mut pre = Section::new(format!("{}: relations", c.name));
    if !integrity(c, s, &mut pre) {
        return vec![pre];
    }
    let us = match declared_units(c) {
        Ok(u) => u,
        Err(e) => {
            pre.fail(e);
            return vec![pre];
        }
    };
    match localization_size(c, &us, s.l + 1) {
        Ok(n) => pre.line(format!("{n} basis words at L + 1 = {}", s.l + 1)),
        Err(e) => {
            pre.infeasible(e);
            return vec![pre];
        }
    }
    vec![pre, right_inverse_section(&format!("{}: right inverse", c.name), c, &us, s)]
}

fn nerve_error(sec: &mut Section, e: NerveError) {
    match e {
        NerveError::Infeasible(m) => sec.infeasible(m),
        other => sec.fail(other.to_string()),
    }
}

fn nerve_sections(c: &TableCategory, s: &Settings, dump: Option<&Path>) -> Vec<Section> {
    let mut pre = Section::new(format!("{}: relations", c.name));
    if !integrity(c, s, &mut pre) {
        return vec![pre];
    }
    let mut out = vec![pre];
    let dg = nerve::is_dg(c).is_ok();
    if dg {
        let mut sec = Section::new(format!("{}: dg and A-infinity nerves", c.name));
        match nerve::compare_nerves(c, s.dim, 20, 0, s.limit) {
            Ok(cmp) => {
                sec.line(format!("{} cell equations compared, residuals {}", cmp.residual_checks, if cmp.residuals_equal { "equal" } else { "differ" }));
                if let Some(n) = &cmp.counts {
                    sec.line(format!("simplex counts {n:?}, sets {}", if cmp.simplices_equal == Some(true) { "identical" } else { "differ" }));
                }
                sec.require(cmp.identical(), || "the dg and A-infinity nerve equations differ".into());
                sec.set("comparison", &cmp);
            }
            Err(e) => nerve_error(&mut sec, e),
        }
        out.push(sec);
    }
    let mut sec = Section::new(format!("{}: nerve to dimension {}", c.name, s.dim));
    if let Err(e) = nerve_body(c, s, dump, &mut sec) {
        nerve_error(&mut sec, e);
    }
    out.push(sec);
    out
}

fn nerve_body(c: &TableCategory, s: &Settings, dump: Option<&Path>, sec: &mut Section) -> Result<(), NerveError> {
    let nv = nerve::ainfty_nerve(c, s.dim)?;
    if c.ring().elements().is_none() {
        sec.infeasible(format!("simplices over {} form infinite sets; enumeration needs a finite field", c.ring().name()));
        return Ok(());
    }
    let ts = nv.truncate(s.limit)?;
    sec.line(format!("simplex counts {:?}", ts.counts()));
    sec.set("counts", ts.counts());
    let ids = ts.verify_identities();
    sec.require(ids.is_ok(), || format!("simplicial identity: {}", ids.clone().unwrap_err()));
    if let Some(p) = dump {
        std::fs::write(p, nv.dump(&ts)).map_err(|e| NerveError::Infeasible(format!("cannot write {}: {e}", p.display())))?;
    }
    let mut horns = BTreeMap::new();
    for n in 2..=s.dim.min(3) {
        let hs = nerve::inner_horns(&ts, n);
        match nerve::fill_all(&nv, &hs) {
            Ok(k) => {
                horns.insert(n, k);
            }
            Err(e) => {
                sec.fail(format!("inner horn of dimension {n}: {e}"));
            }
        }
    }
    sec.line(format!("inner horns filled by dimension: {horns:?}"));
    sec.set("inner_horns_filled", &horns);
    let core = nv.core(&ts)?;
    let names = |v: &Vec<Vec<usize>>| -> Vec<Vec<String>> { v.iter().map(|cl| cl.iter().map(|&x| c.object_name(x)).collect()).collect() };
    let pi0 = nerve::pi0_core(&core);
    let h0 = nv.h0_iso_classes(s.limit)?;
    sec.line(format!("pi_0(core) = {:?}, H^0-isomorphism classes = {:?}", names(&pi0), names(&h0)));
    sec.require(pi0 == h0, || "pi_0 of the core differs from the H^0-isomorphism classes".into());
    sec.set("pi0", names(&pi0));
    let mut rows = Vec::new();
    for x in 0..c.num_objects() {
        let loops = nerve::pi1_core(&core, x).map_err(NerveError::Infeasible)?;
        let units = nv.unit_group(x, s.limit)?;
        let same = nv.compare_pi1(&loops, x, s.limit)?;
        let (p, u) = (loops.group.describe(), units.group.describe());
        sec.line(format!("pi_1(core, {}) = {p}, H^0 units = {u}", c.object_name(x)));
        sec.require(same, || format!("pi_1 at {} is not the unit group of H^0", c.object_name(x)));
        rows.push(json!({"object": c.object_name(x), "pi1": p, "units": u, "isomorphic": same}));
    }
    sec.set("pi1", rows);
    Ok(())
}

fn hochschild(c: &TableCategory, s: &Settings) -> Section {
    let mut sec = Section::new(format!("{}: Hochschild cochains to arity {}", c.name, s.arity));
    if !integrity(c, s, &mut sec) {
        return sec;
    }
    let n = c.num_objects();
    let mut estimate: u128 = (0..n).map(|x| c.hom_dim(x, x) as u128).sum();
    for l in 1..=s.arity {
        let per: u128 = (0..n).map(|x| (0..n).map(|y| c.hom_dim(x, y)).max().unwrap_or(0) as u128).max().unwrap_or(0);
        estimate = estimate.saturating_add(ainfty::count_tuples(c, l).saturating_mul(per));
    }
    if estimate > BASIS_LIMIT as u128 {
        sec.infeasible(format!("about {estimate} cochain basis elements (limit {BASIS_LIMIT})"));
        return sec;
    }
    match functors::hochschild(c, s.arity) {
        Ok(fc) => {
            let dims = fc.dims_by_arity();
            let h = fc.complex().cohomology_in(s.window.0, s.window.1);
            let rows: Vec<Value> = h.iter().map(|(d, g)| json!({"degree": d, "group": g.to_string()})).collect();
            let text: Vec<String> = h.iter().filter(|(_, g)| g.order() != Some(1)).map(|(d, g)| format!("HH^{d} = {g}")).collect();
            sec.line(format!("basis by arity {dims:?}"));
            sec.line(if text.is_empty() { "acyclic in the window".to_string() } else { text.join(", ") });
            let (lo, hi) = fc.complex().trusted();
            if lo > i32::MIN || hi < i32::MAX {
                sec.line(format!("degrees [{lo}, {hi}] are unaffected by the arity cut"));
            }
            sec.set("dims_by_arity", dims);
            sec.set("trusted", (lo, hi));
            sec.set("cohomology", rows);
        }
        Err(e) => sec.fail(e.to_string()),
    }
    sec
}

fn functor_sections(source: &str, target: &str, files: &[String], s: &Settings) -> Result<Vec<Section>, ErrorInfo> {
    let a = load_category(source, s.ring)?;
    let b = load_category(target, s.ring)?;
    let fs: Vec<(String, TableFunctor)> = files.iter().map(|f| load_functor(f, &a, &b)).collect::<Result<_, _>>()?;
    let mut pre = Section::new(format!("{} and {}: relations", a.name, b.name));
    if !integrity(&a, s, &mut pre) || !integrity(&b, s, &mut pre) {
        return Ok(vec![pre]);
    }
    let mut out = vec![pre];
    for (name, f) in &fs {
        let mut sec = Section::new(format!("functor {name}: {} -> {}", a.name, b.name));
        let rep = functors::check_functor(&a, &b, f, s.arity);
        sec.line(format!("{} tuples checked", rep.tuples_checked));
        sec.set("tuples_checked", rep.tuples_checked);
        sec.require(rep.passed, || rep.failure.clone().unwrap_or_default());
        out.push(sec);
    }
    if fs.is_empty() {
        let mut sec = Section::new(format!("functors {} -> {} up to natural equivalence", a.name, b.name));
        match functors::pi0_functor_classes(&a, &b, s.arity, s.limit as u128) {
            Ok(cl) => {
                sec.line(format!("{} candidates, {} functors, {} classes", cl.candidates, cl.functors, cl.classes.len()));
                sec.set("candidates", cl.candidates);
                sec.set("functors", cl.functors);
                sec.set("classes", &cl.classes);
            }
            Err(e) if e.contains("no declared unit") => sec.fail(e),
            Err(e) => sec.infeasible(e),
        }
        out.push(sec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ainfty").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn z2_resolution_check() {
        let r = run(&cli(&["check", "examples/z2-resolution"]));
        assert_eq!(r.exit_code(), 0, "{}", r.summary());
        assert!(r.summary().contains("H^0(X, X) = Z/2"), "{}", r.summary());
    }

    #[test]
    fn empty_cohomology() {
        let r = run(&cli(&["cohomology", "empty"]));
        assert_eq!(r.exit_code(), 0);
        assert!(r.sections.is_empty());
    }

    #[test]
    fn options_are_validated_first() {
        for args in [&["check", "k", "--window", "2,-4"][..], &["check", "k", "--ring", "F4"], &["nerve", "k", "--dim", "9"], &["localize", "k", "--L", "0"]] {
            let r = run(&cli(args));
            assert_eq!(r.exit_code(), 2, "{args:?}");
            assert_eq!(r.error.as_ref().unwrap().kind, "option");
        }
    }

    #[test]
    fn parse_errors_carry_a_location() {
        let dir = std::env::temp_dir().join(format!("ainfty-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.cat");
        std::fs::write(&p, "category bad\nring F2\nobject X\nbasis X Y e 0\n").unwrap();
        let r = run(&cli(&["check", p.to_str().unwrap()]));
        assert_eq!(r.exit_code(), 2);
        assert!(r.error.as_ref().unwrap().location.ends_with("bad.cat:4"), "{:?}", r.error);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn base_change_and_failures() {
        // Over F2 the differential ×2 vanishes: H^0 = F_2 and H^-1 = F_2.
        let r = run(&cli(&["check", "z2-resolution", "--ring", "F2"]));
        assert_eq!(r.exit_code(), 0);
        assert!(r.summary().contains("H^-1(X, X) = F_2"), "{}", r.summary());
        // Base-changing the torsion example to Q does not parse.
        let r = run(&cli(&["check", "z2", "--ring", "Q"]));
        assert_eq!(r.exit_code(), 2, "{}", r.summary());
    }

    #[test]
    fn nerve_and_functor_verbs() {
        let r = run(&cli(&["nerve", "k-f5"]));
        assert_eq!(r.exit_code(), 0, "{}", r.summary());
        assert!(r.summary().contains("Z/4"));
        let r = run(&cli(&["nerve", "z2-resolution"]));
        assert_eq!(r.exit_code(), 3, "{}", r.summary());
        let r = run(&cli(&["functors", "k1", "k", "collapse"]));
        assert_eq!(r.exit_code(), 0, "{}", r.summary());
        let r = run(&cli(&["functors", "k1", "k", "--arity", "2"]));
        assert_eq!(r.exit_code(), 0, "{}", r.summary());
    }
}
