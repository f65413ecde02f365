use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::{ConstructionConfig, Mode, RSequence, RSequenceError};
use crate::bratteli::{validate_config, BratteliError, Diagram, FinitePath, Label, Name, ShadowMap};
use crate::recipe::{Expansion, GeneratorRecipe, NodeKey, RecipeError, RecipeSource};
use crate::splitting::{build_split, default_split_spec, split_name, SplitChoice, SplitError, SplitSpec};

/// Levels checked by [`validate_inputs`] when neither the caller nor the
/// config gives a depth.
pub const DEFAULT_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    Diagram,
    StartLevel,
    RSequence,
    Divisibility,
    NeedsRTwo,
    SplitVertex,
    EdgeCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputIssue {
    pub kind: IssueKind,
    pub level: Option<usize>,
    pub detail: String,
}

impl fmt::Display for InputIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Some(l) => write!(f, "level {l}: {}", self.detail),
            None => f.write_str(&self.detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputReport {
    pub valid: bool,
    pub mode: Mode,
    /// Vertex levels checked, from 0.
    pub depth: usize,
    pub issues: Vec<InputIssue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("invalid construction input: {}", summary(.0))]
    Invalid(InputReport),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Bratteli(#[from] BratteliError),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error(transparent)]
    R(#[from] RSequenceError),
    #[error("level {level} vertex {vertex} is not a vertex of the split diagram")]
    UnknownVertex { level: usize, vertex: String },
    #[error("{0}")]
    Path(String),
}

fn summary(r: &InputReport) -> String {
    let v: Vec<String> = r.issues.iter().take(3).map(|i| i.to_string()).collect();
    let more = r.issues.len().saturating_sub(3);
    if more > 0 {
        format!("{} (and {more} more)", v.join("; "))
    } else {
        v.join("; ")
    }
}

fn split_choice(cfg: &ConstructionConfig) -> SplitChoice {
    match &cfg.split_vertex {
        Some(v) => SplitChoice::Named(v.clone()),
        None => SplitChoice::Last,
    }
}

/// First vertex of level 0 with at least `2 r_1` edges into the split vertex
/// of level 1, or the first vertex outright in strict mode.
fn seed_source(base: &Diagram, mode: Mode, w1: &str, r1: u64) -> Result<Option<Name>, BratteliError> {
    let vs = base.vertices(0)?;
    if mode == Mode::Strict {
        return Ok(vs.first().cloned());
    }
    for v in vs {
        if base.multiplicity(0, &v, w1)? as u64 >= 2 * r1 {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Checks the inputs down to vertex level `depth + 1`: divisibility, the
/// split vertex, and the edge counts the construction consumes. Strict mode
/// asks for the blanket bound `|E(v,w)| >= r_l + d_l`; relaxed mode needs
/// `r = 2` and only the counts actually used.
pub fn validate_inputs(cfg: &ConstructionConfig, depth: Option<usize>) -> InputReport {
    let depth = depth.or(cfg.depth).unwrap_or(DEFAULT_DEPTH);
    let mut issues = Vec::new();
    let mut push = |kind, level, detail: String| issues.push(InputIssue { kind, level, detail });
    let report = |issues: Vec<InputIssue>| InputReport {
        valid: issues.is_empty(),
        mode: cfg.mode,
        depth,
        issues,
    };

    for v in validate_config(&cfg.base_diagram) {
        push(IssueKind::Diagram, v.level, v.to_string());
    }
    if cfg.base_diagram.start_level != 0 {
        push(
            IssueKind::StartLevel,
            None,
            format!("the base must start at level 0, not {}", cfg.base_diagram.start_level),
        );
    }
    if !issues.is_empty() {
        return report(issues);
    }
    let mut push = |kind, level, detail: String| issues.push(InputIssue { kind, level, detail });

    let last = depth + 1;
    let mut r = vec![1u64];
    for l in 1..=last {
        match cfg.r_sequence.r(l) {
            Ok(x) => r.push(x),
            Err(e) => {
                push(IssueKind::RSequence, Some(l), e.to_string());
                break;
            }
        }
    }
    if r.len() > 1 && r[1] <= 1 {
        push(IssueKind::RSequence, Some(1), format!("r_1 = {} must exceed 1", r[1]));
    }
    let mut d = vec![1u64];
    for l in 1..r.len() {
        if r[l] % r[l - 1] != 0 {
            push(
                IssueKind::Divisibility,
                Some(l),
                format!("r_{} = {} does not divide r_{l} = {}", l - 1, r[l - 1], r[l]),
            );
            d.push(0);
        } else {
            d.push(r[l] / r[l - 1]);
        }
    }
    if cfg.mode == Mode::R2Relaxed {
        if let Some(l) = (1..r.len()).find(|&l| r[l] != 2) {
            push(
                IssueKind::NeedsRTwo,
                Some(l),
                format!("relaxed mode needs r = 2 throughout, got r_{l} = {}", r[l]),
            );
        }
    }
    if !issues.is_empty() || r.len() <= last {
        return report(issues);
    }
    let mut push = |kind, level, detail: String| issues.push(InputIssue { kind, level, detail });

    let base = match Diagram::from_config(&cfg.base_diagram) {
        Ok(b) => b,
        Err(e) => {
            push(IssueKind::Diagram, None, e.to_string());
            return report(issues);
        }
    };
    if base.last_level().is_some_and(|l| l < last) {
        push(
            IssueKind::Diagram,
            base.last_level(),
            format!("the base stops before level {last}"),
        );
        return report(issues);
    }
    let choice = split_choice(cfg);
    let mut w = vec![Name::from("")];
    for l in 1..=last {
        let vs = match base.vertices(l) {
            Ok(vs) => vs,
            Err(e) => {
                push(IssueKind::Diagram, Some(l), e.to_string());
                break;
            }
        };
        let pick = match &choice {
            SplitChoice::Last => vs.last().cloned(),
            SplitChoice::Named(n) => vs.iter().find(|v| &***v == n.as_str()).cloned(),
        };
        match pick {
            Some(v) => w.push(v),
            None => {
                push(
                    IssueKind::SplitVertex,
                    Some(l),
                    format!("no split vertex {:?} at level {l}", cfg.split_vertex.as_deref().unwrap_or("")),
                );
                break;
            }
        }
    }
    if w.len() <= last {
        return report(issues);
    }

    let mut shortfall = |level: usize, from: &str, to: &str, need: u64, have: usize, what: &str| {
        if (have as u64) < need {
            push(
                IssueKind::EdgeCount,
                Some(level),
                format!("{what}: {from} -> {to} has {have} edges, needs {need}"),
            );
        }
    };
    let count = |l: usize, v: &str, t: &str| base.multiplicity(l, v, t).unwrap_or(0);
    match cfg.mode {
        Mode::Strict => {
            for l in 1..=last {
                let from = base.vertices(l - 1).unwrap_or_default();
                let to = base.vertices(l).unwrap_or_default();
                for v in &from {
                    for t in &to {
                        shortfall(l - 1, v, t, r[l] + d[l], count(l - 1, v, t), "r_l + d_l bound");
                    }
                }
            }
        }
        Mode::R2Relaxed => {
            for v in base.vertices(0).unwrap_or_default() {
                shortfall(0, &v, &w[1], r[1], count(0, &v, &w[1]), "F on the first level");
            }
            let seeded = base
                .vertices(0)
                .unwrap_or_default()
                .iter()
                .any(|v| count(0, v, &w[1]) as u64 >= 2 * r[1]);
            if !seeded {
                shortfall(0, "level 0", &w[1], 2 * r[1], 0, "seed edges");
            }
            for l in 1..last {
                let have = count(l, &w[l], &w[l + 1]);
                shortfall(l, &w[l], &w[l + 1], r[l + 1], have, "F(w_a)");
                shortfall(l, &w[l], &w[l + 1], d[l + 1] + 1, have, "M_B");
            }
        }
    }
    report(issues)
}

/// The data the recipe generator uses at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelData {
    pub level: usize,
    pub w_a: String,
    pub w_b: String,
    pub r: u64,
    pub d: u64,
    /// Edges `w_a^l -> w_b^(l+1)` of the split diagram.
    pub m_a: Vec<Label>,
    /// Edges `w_b^l -> w_a^(l+1)` used for the `B` side of children.
    pub m_b: Vec<Label>,
}

#[derive(Clone)]
struct Ctx {
    spec: SplitSpec,
    r: RSequence,
    mode: Mode,
}

fn gen_err(e: impl fmt::Display) -> RecipeError {
    RecipeError::Generator(e.to_string())
}

impl Ctx {
    fn w_a(&self, level: usize) -> Result<Name, RecipeError> {
        self.spec.split_vertex(level).map_err(gen_err)
    }

    fn w_b(&self, level: usize) -> Result<Name, RecipeError> {
        Ok(split_name(&self.w_a(level)?, level))
    }

    fn r(&self, level: usize) -> Result<u64, RecipeError> {
        self.r.r(level).map_err(gen_err)
    }

    fn level_data(&self, c: &Diagram, level: usize) -> Result<LevelData, RecipeError> {
        let (wa, wb) = (self.w_a(level)?, self.w_b(level)?);
        let (na, nb) = (self.w_a(level + 1)?, self.w_b(level + 1)?);
        let r = self.r(level)?;
        let r_next = self.r(level + 1)?;
        let m_a = c.edges_between(level, &wa, &nb)?;
        let mut m_b = c.edges_between(level, &wb, &na)?;
        let want = match self.mode {
            Mode::Strict => r_next as usize,
            Mode::R2Relaxed => 1,
        };
        if m_b.len() < want {
            return Err(gen_err(format!(
                "level {level}: {wb} -> {na} has {} edges, needs {want}",
                m_b.len()
            )));
        }
        m_b.truncate(want);
        Ok(LevelData {
            level,
            w_a: wa.to_string(),
            w_b: wb.to_string(),
            r,
            d: r_next / r,
            m_a,
            m_b,
        })
    }

    /// The node `(A, B)` with `A` ending at `w_a^l` and `B` at `w_b^l`.
    fn forward(&self, c: &Diagram, level: usize, a: &[FinitePath], b: &[FinitePath]) -> Result<Expansion, RecipeError> {
        let ld = self.level_data(c, level)?;
        let ends_ok = a.iter().all(|p| **p.end() == *ld.w_a) && b.iter().all(|p| **p.end() == *ld.w_b);
        if !ends_ok || a.len() != b.len() || a.is_empty() {
            return Err(gen_err(format!(
                "level {level}: seeds must be equally many paths into {} and {}",
                ld.w_a, ld.w_b
            )));
        }
        let extend_all = |p: &FinitePath, ls: &[Label]| -> Result<Vec<FinitePath>, RecipeError> {
            ls.iter().map(|l| Ok(c.extend(p, l)?)).collect()
        };
        let mut children = Vec::new();
        match self.mode {
            Mode::Strict => {
                for i in 0..a.len() - 1 {
                    let ai = extend_all(&a[i], &ld.m_a)?;
                    let bi = extend_all(&b[i], &ld.m_b)?;
                    children.push((ai, bi));
                }
            }
            Mode::R2Relaxed => {
                let ai = extend_all(&a[0], &ld.m_a)?;
                let mut bi = Vec::new();
                for p in b {
                    bi.extend(extend_all(p, &ld.m_b)?);
                }
                children.push((ai, bi));
            }
        }
        let used_a: BTreeSet<&FinitePath> = children.iter().flat_map(|(x, _)| x).collect();
        let used_b: BTreeSet<&FinitePath> = children.iter().flat_map(|(_, y)| y).collect();
        let rest = |side: &[FinitePath], used: &BTreeSet<&FinitePath>| -> Result<BTreeMap<Name, Vec<FinitePath>>, RecipeError> {
            let mut by_end: BTreeMap<Name, Vec<FinitePath>> = BTreeMap::new();
            for p in side {
                for e in c.out_edges(level, p.end())? {
                    let mut q = p.clone();
                    q.push(e.label, e.target_name);
                    if !used.contains(&q) {
                        by_end.entry(q.end().clone()).or_default().push(q);
                    }
                }
            }
            for v in by_end.values_mut() {
                v.sort();
            }
            Ok(by_end)
        };
        let ra = rest(a, &used_a)?;
        let mut rb = rest(b, &used_b)?;
        let mut pairs = Vec::new();
        for (v, ws) in ra {
            let zs = rb.remove(&v).unwrap_or_default();
            if zs.len() != ws.len() {
                return Err(gen_err(format!(
                    "level {}: {} A-paths but {} B-paths left at {v}",
                    level + 1,
                    ws.len(),
                    zs.len()
                )));
            }
            pairs.extend(ws.into_iter().zip(zs));
        }
        if let Some((v, zs)) = rb.into_iter().find(|(_, zs)| !zs.is_empty()) {
            return Err(gen_err(format!(
                "level {}: 0 A-paths but {} B-paths left at {v}",
                level + 1,
                zs.len()
            )));
        }
        // Each child is the reverse of the forward node on (B_i, A_i).
        let keys = children
            .into_iter()
            .map(|(mut ai, mut bi)| {
                ai.sort();
                bi.sort();
                NodeKey {
                    level: level + 1,
                    a: ai,
                    b: bi,
                    tag: Arc::from(TAG),
                    reversed: true,
                }
            })
            .collect();
        Ok((pairs, keys))
    }

    fn generate(&self, c: &Diagram, key: &NodeKey) -> Result<Expansion, RecipeError> {
        if !key.reversed {
            return self.forward(c, key.level, &key.a, &key.b);
        }
        let (pairs, children) = self.forward(c, key.level, &key.b, &key.a)?;
        Ok((
            pairs.into_iter().map(|(w, z)| (z, w)).collect(),
            children.iter().map(NodeKey::swapped).collect(),
        ))
    }
}

const TAG: &str = "main";

/// Everything the construction produces.
#[derive(Clone)]
pub struct ConstructionBundle {
    pub config: ConstructionConfig,
    pub depth: usize,
    pub base: Diagram,
    pub split: Diagram,
    pub shadow: ShadowMap,
    pub spec: SplitSpec,
    pub recipe: Arc<dyn RecipeSource>,
    ctx: Ctx,
}

impl fmt::Debug for ConstructionBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstructionBundle")
            .field("mode", &self.config.mode)
            .field("depth", &self.depth)
            .field("recipe", &self.recipe.name())
            .finish_non_exhaustive()
    }
}

impl ConstructionBundle {
    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn r(&self, level: usize) -> Result<u64, ConstructionError> {
        Ok(self.config.r_sequence.r(level)?)
    }

    pub fn w_a(&self, level: usize) -> Result<Name, ConstructionError> {
        Ok(self.spec.split_vertex(level)?)
    }

    pub fn w_b(&self, level: usize) -> Result<Name, ConstructionError> {
        Ok(self.spec.w_b(level)?)
    }

    pub fn level_data(&self, level: usize) -> Result<LevelData, ConstructionError> {
        if level == 0 {
            return Err(ConstructionError::Path("level data starts at level 1".into()));
        }
        Ok(self.ctx.level_data(&self.split, level)?)
    }

    /// `N_l` for which the recipe is constrained: `l - 1`, or `l - 2` in
    /// relaxed mode where children collect `B` from two different seeds.
    pub fn constraint(&self, level: usize) -> usize {
        match self.config.mode {
            Mode::Strict => level.saturating_sub(1),
            Mode::R2Relaxed => level.saturating_sub(2),
        }
    }
}

/// Builds the split diagram and the recipe, after [`validate_inputs`] down to
/// `depth + 1`. Deeper levels are produced lazily.
pub fn build(cfg: &ConstructionConfig, depth: usize) -> Result<ConstructionBundle, ConstructionError> {
    let report = validate_inputs(cfg, Some(depth));
    if !report.valid {
        return Err(ConstructionError::Invalid(report));
    }
    let base = Diagram::from_config(&cfg.base_diagram)?;
    let spec = default_split_spec(&base, &cfg.r_sequence, split_choice(cfg))?;
    let (split, shadow) = build_split(&base, &spec, depth + 1)?;
    let ctx = Ctx {
        spec: spec.clone(),
        r: cfg.r_sequence.clone(),
        mode: cfg.mode,
    };
    let r1 = cfg.r_sequence.r(1)?;
    let w1 = spec.split_vertex(1)?;
    let b1 = spec.w_b(1)?;
    let s = seed_source(&base, cfg.mode, &w1, r1)?
        .ok_or_else(|| ConstructionError::Path("no seed source on level 0".into()))?;
    let seeds = |to: &str| -> Result<Vec<FinitePath>, ConstructionError> {
        let labels = split.edges_between(0, &s, to)?;
        if (labels.len() as u64) < r1 {
            return Err(ConstructionError::Path(format!("{s} -> {to} has fewer than {r1} edges")));
        }
        let v = FinitePath::vertex(0, &s);
        labels[..r1 as usize].iter().map(|l| Ok(split.extend(&v, l)?)).collect()
    };
    let root = NodeKey::new(1, seeds(&w1)?, seeds(&b1)?, TAG);
    let gen_ctx = ctx.clone();
    let recipe: Arc<dyn RecipeSource> = Arc::new(GeneratorRecipe::new(
        "main",
        split.clone(),
        root,
        move |c, k| gen_ctx.generate(c, k),
    ));
    Ok(ConstructionBundle {
        config: cfg.clone(),
        depth,
        base,
        split,
        shadow,
        spec,
        recipe,
        ctx,
    })
}
