//! The `bratteli-split` command line: argument parsing, config loading and
//! report emission. [`run`] is pure; [`main`] adds I/O and timing.

mod text;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::aif::{flip_check_fg, flip_check_rational_family, rational_params, rectangle_flip_class_check, SemigroupElement};
use crate::bratteli::{
    check_simplicity, path_bijectivity_check, shadow_verify, to_dot, validate, validate_config, Diagram,
    DiagramConfig, EventuallyPeriodicPath, FinitePath,
};
use crate::construction::{
    beta_consistency_check, build, relation_vectors, relation_vectors_agree, shadow_relation_check,
    validate_inputs, ConstructionBundle, ConstructionConfig, DEFAULT_DEPTH,
};
use crate::fixtures;
use crate::homology::{h0_r_approx, h0_tail_approx, stabilization_report, verify_iso_finite_level};
use crate::recipe::{eval_eventually_periodic, eval_prefix, etale_verdict, fixtures as recipes, EpOutcome, RecipeSource};

/// Paths enumerated by the bijectivity check before it switches to counting.
const BIJECTIVITY_LIMIT: usize = 20_000;
/// Levels scanned by the simplicity check before giving up on a cut.
const SIMPLICITY_WINDOW: usize = 4;
/// Default output length for `eval-phi`.
const DEFAULT_LEN: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "bratteli-split", version, about = "Split Bratteli diagrams, recipes and finite-level homology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a diagram or construction config.
    Validate(Opts),
    /// Emit the split diagram of a construction.
    Split(Opts),
    /// Build a construction and summarize it.
    Build(Opts),
    /// Evaluate the recipe's map on a finite or eventually periodic path.
    EvalPhi(Opts),
    /// Finite-level approximation of the zeroth homology.
    H0(Opts),
    /// Constrained, disjoint and highly symmetric checks of a recipe.
    CheckEtale(Opts),
    /// Flip criterion on the rational family or on cylinder classes.
    CheckAif(Opts),
    /// Layered DOT drawing of a diagram.
    ExportDot(Opts),
    /// Every check on one construction.
    Report(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Args)]
struct Opts {
    /// Config file (`bratteli-v1` or `construction-v1`) or fixture name.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Recipe fixture name or construction config.
    #[arg(long)]
    recipe: Option<String>,
    /// Path as `v>l>w,...`, `@v` or `ep(pre;period)`.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    len: Option<usize>,
    /// Homology of the tail relation of the diagram alone.
    #[arg(long)]
    tail_only: bool,
    /// Semigroup element `d,t`, for example `3/2,1/2`.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// The machine-readable report. Identical inputs give identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: Option<String>,
    pub params: BTreeMap<String, Value>,
    pub pass: bool,
    pub verdicts: BTreeMap<String, bool>,
    pub body: Value,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
}

type CmdResult = Result<Output, Failure>;

enum Output {
    Report(RunReport),
    Dot(String),
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

enum Loaded {
    Diagram(DiagramConfig),
    Construction(ConstructionConfig),
}

struct Config {
    loaded: Loaded,
    digest: String,
}

/// sha256 of the compact JSON with sorted keys.
pub fn config_digest<T: Serialize>(cfg: &T) -> String {
    let canonical = serde_json::to_string(&to_value(cfg)).expect("values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn load_config(arg: &str) -> Result<Config, Failure> {
    let loaded = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| Failure::Input(format!("{arg}: {e}")))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{arg}: {e}")))?;
        if v.get("base_diagram").is_some() {
            Loaded::Construction(serde_json::from_value(v).map_err(|e| Failure::Input(format!("{arg}: {e}")))?)
        } else {
            Loaded::Diagram(serde_json::from_value(v).map_err(|e| Failure::Input(format!("{arg}: {e}")))?)
        }
    } else if let Some(c) = fixtures::construction_by_name(arg) {
        Loaded::Construction(c)
    } else if let Some(d) = fixtures::diagram_by_name(arg) {
        Loaded::Diagram(d)
    } else {
        return Err(Failure::Input(format!("{arg}: no such file or fixture")));
    };
    let digest = match &loaded {
        Loaded::Diagram(d) => config_digest(d),
        Loaded::Construction(c) => config_digest(c),
    };
    Ok(Config { loaded, digest })
}

fn need_config(o: &Opts) -> Result<Config, Failure> {
    load_config(o.config.as_deref().ok_or_else(|| Failure::Usage("--config is required".into()))?)
}

fn need_construction(o: &Opts) -> Result<(ConstructionConfig, String), Failure> {
    let c = need_config(o)?;
    match c.loaded {
        Loaded::Construction(cfg) => Ok((cfg, c.digest)),
        Loaded::Diagram(_) => Err(Failure::Input("expected a construction config, got a diagram".into())),
    }
}

fn depth_of(o: &Opts, cfg: Option<&ConstructionConfig>) -> usize {
    o.depth.or(cfg.and_then(|c| c.depth)).unwrap_or(DEFAULT_DEPTH)
}

fn bundle(cfg: &ConstructionConfig, depth: usize) -> Result<ConstructionBundle, Failure> {
    build(cfg, depth).map_err(input)
}

struct Report {
    command: &'static str,
    digest: Option<String>,
    params: BTreeMap<String, Value>,
    verdicts: BTreeMap<String, bool>,
    body: Value,
}

impl Report {
    fn new(command: &'static str, digest: Option<String>) -> Self {
        Report {
            command,
            digest,
            params: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            body: Value::Null,
        }
    }

    fn param(mut self, k: &str, v: impl Serialize) -> Self {
        self.params.insert(k.into(), to_value(&v));
        self
    }

    fn verdict(&mut self, k: &str, pass: bool) {
        self.verdicts.insert(k.into(), pass);
    }

    fn body(mut self, v: Value) -> Self {
        self.body = v;
        self
    }

    fn done(self) -> CmdResult {
        Ok(Output::Report(RunReport {
            command: self.command.into(),
            config_digest: self.digest,
            params: self.params,
            pass: self.verdicts.values().all(|&p| p),
            verdicts: self.verdicts,
            body: self.body,
        }))
    }
}

fn cmd_validate(o: &Opts) -> CmdResult {
    let c = need_config(o)?;
    let mut rep = Report::new("validate", Some(c.digest));
    match c.loaded {
        Loaded::Diagram(cfg) => {
            let depth = o.depth.unwrap_or(DEFAULT_DEPTH);
            let mut violations = validate_config(&cfg);
            if violations.is_empty() {
                let d = Diagram::from_config(&cfg).map_err(input)?;
                violations = validate(&d, depth);
            }
            rep.verdict("diagram", violations.is_empty());
            let issues: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            rep.param("kind", "bratteli-v1")
                .param("depth", depth)
                .body(json!({ "violations": issues }))
                .done()
        }
        Loaded::Construction(cfg) => {
            let report = validate_inputs(&cfg, o.depth);
            rep.verdict("inputs", report.valid);
            rep.param("kind", "construction-v1")
                .param("depth", report.depth)
                .body(to_value(&report))
                .done()
        }
    }
}

fn cmd_split(o: &Opts) -> CmdResult {
    let (cfg, digest) = need_construction(o)?;
    let depth = depth_of(o, Some(&cfg));
    let b = bundle(&cfg, depth)?;
    if o.format == Some(Format::Dot) {
        return Ok(Output::Dot(to_dot(&b.split, depth).map_err(input)?));
    }
    let split = b.split.to_config(Some(depth + 1)).map_err(input)?;
    Report::new("split", Some(digest))
        .param("depth", depth)
        .body(json!({ "split_diagram": split }))
        .done()
}

fn level_rows(b: &ConstructionBundle, depth: usize) -> Result<Vec<Value>, Failure> {
    let mut rows = Vec::new();
    for level in 1..=depth {
        rows.push(to_value(&b.level_data(level).map_err(input)?));
    }
    Ok(rows)
}

fn cmd_build(o: &Opts) -> CmdResult {
    let (cfg, digest) = need_construction(o)?;
    let depth = depth_of(o, Some(&cfg));
    let b = bundle(&cfg, depth)?;
    if o.format == Some(Format::Dot) {
        return Ok(Output::Dot(to_dot(&b.split, depth).map_err(input)?));
    }
    let root = b.recipe.node(&b.recipe.root()).map_err(input)?;
    let relations = relation_vectors(&b, depth).map_err(input)?;
    let split = b.split.to_config(Some(depth + 1)).map_err(input)?;
    Report::new("build", Some(digest))
        .param("depth", depth)
        .body(json!({
            "mode": b.mode(),
            "recipe": b.recipe.name(),
            "constraint": (1..=depth).map(|l| b.constraint(l)).collect::<Vec<_>>(),
            "levels": level_rows(&b, depth)?,
            "root": {
                "a": root.a().iter().map(|p| p.to_text()).collect::<Vec<_>>(),
                "b": root.b().iter().map(|p| p.to_text()).collect::<Vec<_>>(),
                "pairs": root.pairs.len(),
                "children": root.children.len(),
            },
            "relations": relations,
            "split_diagram": split,
        }))
        .done()
}

/// A recipe fixture, or the recipe of a construction, with its constraint
/// function. Plain fixtures use `N_l = l`.
struct ResolvedRecipe {
    source: Arc<dyn RecipeSource>,
    bundle: Option<ConstructionBundle>,
    digest: String,
}

impl ResolvedRecipe {
    fn constraint(&self, level: usize) -> usize {
        match &self.bundle {
            Some(b) => b.constraint(level),
            None => level,
        }
    }
}

fn resolve_recipe(o: &Opts) -> Result<ResolvedRecipe, Failure> {
    let name = match (&o.recipe, &o.config) {
        (Some(r), _) => r.as_str(),
        (None, Some(c)) => c.as_str(),
        (None, None) => return Err(Failure::Usage("--recipe or --config is required".into())),
    };
    if let Some((_, source)) = recipes::basic().into_iter().find(|(n, _)| *n == name) {
        return Ok(ResolvedRecipe {
            source,
            bundle: None,
            digest: config_digest(&json!({ "recipe": name })),
        });
    }
    let c = load_config(name)?;
    let Loaded::Construction(cfg) = c.loaded else {
        return Err(Failure::Input(format!("{name} is a diagram, not a recipe")));
    };
    let b = bundle(&cfg, depth_of(o, Some(&cfg)).max(DEFAULT_DEPTH))?;
    Ok(ResolvedRecipe {
        source: b.recipe.clone(),
        bundle: Some(b),
        digest: c.digest,
    })
}

fn cmd_eval_phi(o: &Opts) -> CmdResult {
    let r = resolve_recipe(o)?;
    let text = o.input.as_deref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let len = o.len.unwrap_or(DEFAULT_LEN);
    let d = r.source.diagram();
    let rep = Report::new("eval-phi", Some(r.digest.clone()))
        .param("recipe", r.source.name())
        .param("input", text)
        .param("len", len);
    if text.trim_start().starts_with("ep(") {
        let x = EventuallyPeriodicPath::parse(text, d).map_err(input)?;
        let prefix_input = x.prefix(d, len).map_err(input)?;
        let (prefix, state) = eval_prefix(r.source.as_ref(), &prefix_input, len).map_err(input)?;
        let outcome = eval_eventually_periodic(r.source.as_ref(), &x, len.max(DEFAULT_LEN) * 4).map_err(input)?;
        let (exact, image) = match &outcome {
            EpOutcome::Exact(y) => (true, y.to_text(d).map_err(input)?),
            EpOutcome::Unresolved(p) => (false, p.to_text()),
        };
        rep.body(json!({
            "input": x.canonical().to_text(d).map_err(input)?,
            "exact": exact,
            "image": image,
            "prefix": prefix.to_text(),
            "state": state,
        }))
        .done()
    } else {
        let x = FinitePath::parse(text, d).map_err(input)?;
        let (image, state) = eval_prefix(r.source.as_ref(), &x, len).map_err(input)?;
        rep.body(json!({ "input": x.to_text(), "prefix": image.to_text(), "state": state }))
            .done()
    }
}

fn cmd_h0(o: &Opts) -> CmdResult {
    let c = need_config(o)?;
    let mut rep = Report::new("h0", Some(c.digest.clone()));
    if o.tail_only {
        let (cfg, level) = match &c.loaded {
            Loaded::Diagram(d) => (d.clone(), o.level.unwrap_or(DEFAULT_DEPTH)),
            Loaded::Construction(k) => (k.base_diagram.clone(), o.level.unwrap_or(DEFAULT_DEPTH)),
        };
        let d = Diagram::from_config(&cfg).map_err(input)?;
        let t = h0_tail_approx(&d, level).map_err(input)?;
        return rep
            .param("level", level)
            .param("tail_only", true)
            .body(json!({
                "free_rank": t.group.free_rank,
                "invariant_factors": to_value(&t.group)["invariant_factors"],
                "group": t.group.to_string(),
                "vertices": t.vertices,
                "maps": [t.connecting],
                "iso_check": Value::Null,
            }))
            .done();
    }
    let Loaded::Construction(cfg) = &c.loaded else {
        return Err(Failure::Input("h0 without --tail-only needs a construction config".into()));
    };
    let level = o.level.unwrap_or(DEFAULT_DEPTH);
    let b = bundle(cfg, depth_of(o, Some(cfg)).max(level))?;
    let h = h0_r_approx(&b, level).map_err(input)?;
    let iso = verify_iso_finite_level(&b, level).map_err(input)?;
    let stab = stabilization_report(&b, level).map_err(input)?;
    rep.verdict("iso_check", iso.pass);
    rep.verdict("stabilization", stab.pass);
    rep.param("level", level)
        .param("tail_only", false)
        .body(json!({
            "free_rank": h.group.free_rank,
            "invariant_factors": to_value(&h.group)["invariant_factors"],
            "group": h.group.to_string(),
            "generators": h.generators,
            "relations": h.relations,
            "maps": stab,
            "iso_check": iso,
        }))
        .done()
}

fn cmd_check_etale(o: &Opts) -> CmdResult {
    let r = resolve_recipe(o)?;
    let depth = o.depth.unwrap_or(DEFAULT_DEPTH);
    let n = |l: usize| r.constraint(l);
    let v = etale_verdict(r.source.as_ref(), &n, depth).map_err(input)?;
    let mut rep = Report::new("check-etale", Some(r.digest.clone()))
        .param("recipe", r.source.name())
        .param("depth", depth);
    rep.verdict("constrained", v.constrained.pass);
    rep.verdict("disjoint", v.disjoint.pass);
    rep.verdict("highly_symmetric", v.highly_symmetric.pass);
    rep.body(to_value(&v)).done()
}

/// The node reached from the root by first children, at `level`.
fn chain_node(b: &ConstructionBundle, level: usize) -> Result<Arc<crate::recipe::RecipeNode>, Failure> {
    let src = b.recipe.as_ref();
    let mut node = src.node(&src.root()).map_err(input)?;
    while node.level() < level {
        let Some(k) = node.children.first() else {
            return Err(Failure::Input(format!("the recipe stops before level {level}")));
        };
        node = src.node(k).map_err(input)?;
    }
    Ok(node)
}

fn cmd_check_aif(o: &Opts) -> CmdResult {
    let (cfg, digest) = need_construction(o)?;
    let level = o.level.unwrap_or(1).max(1);
    let b = bundle(&cfg, depth_of(o, Some(&cfg)).max(level))?;
    let mut rep = Report::new("check-aif", Some(digest)).param("level", level);
    match (&o.x, &o.y) {
        (Some(x), Some(y)) => {
            let x = SemigroupElement::parse(x).map_err(input)?;
            let y = SemigroupElement::parse(y).map_err(input)?;
            let (_, params) = rational_params(&b, level).map_err(input)?;
            let trace = flip_check_rational_family(&x, &y, &params).map_err(input)?;
            rep.verdict("family", trace.pass);
            rep.param("x", x.to_string())
                .param("y", y.to_string())
                .body(json!({ "params": params, "trace": trace }))
                .done()
        }
        (None, None) => {
            let node = chain_node(&b, level)?;
            let r = rectangle_flip_class_check(&b, node.level(), node.a(), node.b()).map_err(input)?;
            let group = flip_check_fg(&h0_r_approx(&b, node.level()).map_err(input)?.group);
            rep.verdict("family", r.family.pass);
            rep.body(json!({ "rectangle": r, "finite_level_group": group })).done()
        }
        _ => Err(Failure::Usage("--x and --y go together".into())),
    }
}

fn cmd_export_dot(o: &Opts) -> CmdResult {
    let c = need_config(o)?;
    let depth = o.depth.unwrap_or(4);
    let dot = match &c.loaded {
        Loaded::Diagram(cfg) => to_dot(&Diagram::from_config(cfg).map_err(input)?, depth),
        Loaded::Construction(cfg) => to_dot(&bundle(cfg, depth)?.split, depth),
    }
    .map_err(input)?;
    match o.format {
        None | Some(Format::Dot) => Ok(Output::Dot(dot)),
        Some(_) => Report::new("export-dot", Some(c.digest))
            .param("depth", depth)
            .body(json!({ "dot": dot }))
            .done(),
    }
}

fn cmd_report(o: &Opts) -> CmdResult {
    let c = need_config(o)?;
    let depth = o.depth.unwrap_or(6);
    let mut rep = Report::new("report", Some(c.digest.clone())).param("depth", depth);
    let cfg = match c.loaded {
        Loaded::Diagram(cfg) => {
            let d = Diagram::from_config(&cfg).map_err(input)?;
            let violations: Vec<String> = validate(&d, depth).iter().map(|v| v.to_string()).collect();
            let simple = check_simplicity(&d, SIMPLICITY_WINDOW, depth).map_err(input)?;
            rep.verdict("diagram", violations.is_empty());
            rep.verdict("simple", simple.pass);
            return rep.body(json!({ "violations": violations, "simplicity": simple })).done();
        }
        Loaded::Construction(cfg) => cfg,
    };
    let inputs = validate_inputs(&cfg, Some(depth));
    rep.verdict("inputs", inputs.valid);
    if !inputs.valid {
        return rep.body(json!({ "inputs": inputs })).done();
    }
    let level = o.level.unwrap_or(depth);
    let b = bundle(&cfg, depth.max(level))?;
    let shadow = shadow_verify(&b.shadow, &b.split, &b.base, depth);
    let bij = path_bijectivity_check(&b.shadow, &b.split, &b.base, depth, BIJECTIVITY_LIMIT).map_err(input)?;
    let beta = beta_consistency_check(&b, depth).map_err(input)?;
    let agree = relation_vectors_agree(&b, depth.min(4)).map_err(input)?;
    let shadow_rel = shadow_relation_check(&b, depth.min(4)).map_err(input)?;
    let n = |l: usize| b.constraint(l);
    let etale = etale_verdict(b.recipe.as_ref(), &n, depth.min(5)).map_err(input)?;
    let mut iso = Vec::new();
    for l in 1..=level {
        let r = verify_iso_finite_level(&b, l).map_err(input)?;
        rep.verdict(&format!("iso_level_{l:02}"), r.pass);
        iso.push(json!({ "level": l, "pass": r.pass, "group": r.h0.to_string(), "target": r.target.to_string() }));
    }
    rep.verdict("shadow", shadow.pass);
    rep.verdict("path_bijectivity", bij.pass);
    rep.verdict("beta_consistency", beta.pass);
    rep.verdict("relation_agreement", agree.pass);
    rep.verdict("shadow_relation", shadow_rel.pass);
    rep.verdict("etale", etale.pass());
    rep.param("level", level)
        .body(json!({
            "shadow": shadow,
            "path_bijectivity": bij,
            "beta_consistency": beta,
            "relation_agreement": agree,
            "shadow_relation": shadow_rel,
            "etale": { "verdict": etale.verdict, "failed": etale.failed },
            "iso": iso,
        }))
        .done()
}

fn render(out: Output, format: Option<Format>) -> Result<String, Failure> {
    match (out, format) {
        (Output::Dot(s), _) => Ok(s),
        (Output::Report(r), None | Some(Format::Json)) => {
            let mut s = serde_json::to_string_pretty(&r).expect("reports serialize");
            s.push('\n');
            Ok(s)
        }
        (Output::Report(r), Some(Format::Text)) => Ok(text::render(&r)),
        (Output::Report(r), Some(Format::Dot)) => Err(Failure::Usage(format!("{} has no DOT output", r.command))),
    }
}

/// Parses `args` (program name first) and runs the command. Exit code 0 on
/// success, 1 when a check fails, 2 on usage errors or malformed input.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let (opts, result) = match &cli.command {
        Command::Validate(o) => (o, cmd_validate(o)),
        Command::Split(o) => (o, cmd_split(o)),
        Command::Build(o) => (o, cmd_build(o)),
        Command::EvalPhi(o) => (o, cmd_eval_phi(o)),
        Command::H0(o) => (o, cmd_h0(o)),
        Command::CheckEtale(o) => (o, cmd_check_etale(o)),
        Command::CheckAif(o) => (o, cmd_check_aif(o)),
        Command::ExportDot(o) => (o, cmd_export_dot(o)),
        Command::Report(o) => (o, cmd_report(o)),
    };
    let fail = |f: Failure| {
        let msg = match f {
            Failure::Usage(m) => format!("usage error: {m}\n"),
            Failure::Input(m) => format!("error: {m}\n"),
        };
        Outcome { code: 2, stdout: String::new(), stderr: msg }
    };
    let out = match result {
        Ok(o) => o,
        Err(f) => return fail(f),
    };
    let code = match &out {
        Output::Report(r) if !r.pass => 1,
        _ => 0,
    };
    match render(out, opts.format) {
        Ok(stdout) => Outcome { code, stdout, stderr: String::new() },
        Err(f) => fail(f),
    }
}

/// Entry point of the binary. Timing goes to stderr so stdout stays
/// reproducible.
pub fn main() -> i32 {
    let t0 = Instant::now();
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    let mut err = std::io::stderr();
    let _ = write!(err, "{}", out.stderr);
    let _ = writeln!(err, "elapsed: {:.3}s", t0.elapsed().as_secs_f64());
    out.code
}
