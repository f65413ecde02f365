use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::config::{validate_config, DiagramConfig, EdgeConfig, TailConfig, TailRuleConfig};
use super::{BratteliError, FinitePath, Label, Name};
use crate::matrix::IntMatrix;

/// `(source, label, target)`.
pub type EdgeTriple = (Name, Label, Name);

/// Supplies the vertices and edges of each level on demand.
pub trait LevelSource: Send + Sync {
    /// Deepest level, or `None` when the diagram goes on forever.
    fn last_level(&self) -> Option<usize>;
    fn vertices(&self, level: usize) -> Result<Vec<Name>, BratteliError>;
    /// Edges from `level` to `level + 1` as `(source, label, target)`.
    fn edges(&self, level: usize) -> Result<Vec<(Name, Label, Name)>, BratteliError>;
    /// `(from_level, rules)` if every level from `from_level` on repeats the same
    /// vertices and edges.
    fn stationary_tail(&self) -> Option<(usize, Vec<EdgeTriple>)> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutEdge {
    pub label: Label,
    /// Index of the target in the next level.
    pub target: usize,
    pub target_name: Name,
}

/// One materialized level: its vertices and the edges to the next level,
/// sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub level: usize,
    pub vertices: Vec<Name>,
    index: HashMap<Name, usize>,
    pub out: Vec<Vec<OutEdge>>,
}

impl Level {
    pub fn index_of(&self, v: &str) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

struct Inner {
    source: Box<dyn LevelSource>,
    cache: RwLock<BTreeMap<usize, Arc<Level>>>,
}

/// A Bratteli diagram whose levels are built lazily and cached. Cloning is
/// cheap and clones share the cache.
#[derive(Clone)]
pub struct Diagram {
    inner: Arc<Inner>,
    start_level: usize,
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diagram")
            .field("start_level", &self.start_level)
            .field("last_level", &self.last_level())
            .finish()
    }
}

struct ExplicitSource {
    start: usize,
    levels: Vec<Vec<Name>>,
    edges: BTreeMap<usize, Vec<(Name, Label, Name)>>,
    tail: Option<(usize, Vec<EdgeTriple>)>,
}

impl LevelSource for ExplicitSource {
    fn last_level(&self) -> Option<usize> {
        match self.tail {
            Some(_) => None,
            None => Some(self.start + self.levels.len() - 1),
        }
    }

    fn vertices(&self, level: usize) -> Result<Vec<Name>, BratteliError> {
        let i = level - self.start;
        match (self.levels.get(i), &self.tail) {
            (Some(v), _) => Ok(v.clone()),
            (None, Some(_)) => Ok(self.levels.last().expect("nonempty").clone()),
            (None, None) => Err(BratteliError::Source(format!("level {level} not listed"))),
        }
    }

    fn edges(&self, level: usize) -> Result<Vec<(Name, Label, Name)>, BratteliError> {
        match &self.tail {
            Some((from, rules)) if level >= *from => Ok(rules.clone()),
            _ => Ok(self.edges.get(&level).cloned().unwrap_or_default()),
        }
    }

    fn stationary_tail(&self) -> Option<(usize, Vec<EdgeTriple>)> {
        self.tail.clone()
    }
}

impl Diagram {
    pub fn from_source(start_level: usize, source: Box<dyn LevelSource>) -> Self {
        Diagram {
            inner: Arc::new(Inner {
                source,
                cache: RwLock::new(BTreeMap::new()),
            }),
            start_level,
        }
    }

    /// Builds a diagram from a `bratteli-v1` config. Any config violation is an
    /// error here; use [`validate_config`] to list them.
    pub fn from_config(cfg: &DiagramConfig) -> Result<Self, BratteliError> {
        let violations = validate_config(cfg);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(BratteliError::Malformed(msgs.join("; ")));
        }
        let levels: Vec<Vec<Name>> = cfg
            .levels
            .iter()
            .map(|l| l.iter().map(|s| Name::from(s.as_str())).collect())
            .collect();
        let mut edges: BTreeMap<usize, Vec<(Name, Label, Name)>> = BTreeMap::new();
        for e in &cfg.edges {
            edges.entry(e.level).or_default().push((
                Name::from(e.from.as_str()),
                Label::new(&e.label),
                Name::from(e.to.as_str()),
            ));
        }
        let tail = cfg.stationary_tail.as_ref().map(|t| {
            (
                t.from_level,
                t.rules
                    .iter()
                    .map(|r| {
                        (
                            Name::from(r.from.as_str()),
                            Label::new(&r.label),
                            Name::from(r.to.as_str()),
                        )
                    })
                    .collect(),
            )
        });
        Ok(Diagram::from_source(
            cfg.start_level,
            Box::new(ExplicitSource {
                start: cfg.start_level,
                levels,
                edges,
                tail,
            }),
        ))
    }

    pub fn start_level(&self) -> usize {
        self.start_level
    }

    pub fn last_level(&self) -> Option<usize> {
        self.inner.source.last_level()
    }

    pub fn is_infinite(&self) -> bool {
        self.last_level().is_none()
    }

    /// Largest level not exceeding `depth` that the diagram reaches.
    pub fn reach(&self, depth: usize) -> usize {
        self.last_level().map_or(depth, |l| l.min(depth))
    }

    fn check_level(&self, level: usize) -> Result<(), BratteliError> {
        let last = self.last_level();
        if level < self.start_level || last.is_some_and(|l| level > l) {
            return Err(BratteliError::LevelOutOfRange {
                level,
                start: self.start_level,
                last: last.map_or("inf".to_string(), |l| l.to_string()),
            });
        }
        Ok(())
    }

    /// The materialized level, built on first use.
    pub fn level(&self, level: usize) -> Result<Arc<Level>, BratteliError> {
        self.check_level(level)?;
        if let Some(l) = self.inner.cache.read().expect("cache poisoned").get(&level) {
            return Ok(l.clone());
        }
        let built = Arc::new(self.build_level(level)?);
        let mut cache = self.inner.cache.write().expect("cache poisoned");
        Ok(cache.entry(level).or_insert(built).clone())
    }

    fn build_level(&self, level: usize) -> Result<Level, BratteliError> {
        let src = &self.inner.source;
        let vertices = src.vertices(level)?;
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(BratteliError::Malformed(format!(
                    "vertex {v:?} appears twice at level {level}"
                )));
            }
        }
        let mut out: Vec<Vec<OutEdge>> = vec![Vec::new(); vertices.len()];
        if self.last_level() != Some(level) {
            let next = src.vertices(level + 1)?;
            let next_index: HashMap<&str, usize> =
                next.iter().enumerate().map(|(i, v)| (&**v, i)).collect();
            for (from, label, to) in src.edges(level)? {
                let Some(&fi) = index.get(&from) else {
                    return Err(BratteliError::UnknownVertex {
                        level,
                        vertex: from.to_string(),
                    });
                };
                let Some(&ti) = next_index.get(&*to) else {
                    return Err(BratteliError::UnknownVertex {
                        level: level + 1,
                        vertex: to.to_string(),
                    });
                };
                out[fi].push(OutEdge {
                    label,
                    target: ti,
                    target_name: next[ti].clone(),
                });
            }
            for (i, edges) in out.iter_mut().enumerate() {
                edges.sort_by(|a, b| a.label.cmp(&b.label));
                if let Some(w) = edges.windows(2).find(|w| w[0].label == w[1].label) {
                    return Err(BratteliError::Malformed(format!(
                        "label {:?} used twice on edges leaving {:?} at level {level}",
                        w[0].label.as_str(),
                        vertices[i]
                    )));
                }
            }
        }
        Ok(Level {
            level,
            vertices,
            index,
            out,
        })
    }

    pub fn vertices(&self, level: usize) -> Result<Vec<Name>, BratteliError> {
        Ok(self.level(level)?.vertices.clone())
    }

    pub fn vertex_index(&self, level: usize, v: &str) -> Result<usize, BratteliError> {
        self.level(level)?
            .index_of(v)
            .ok_or_else(|| BratteliError::UnknownVertex {
                level,
                vertex: v.to_string(),
            })
    }

    pub fn out_edges(&self, level: usize, v: &str) -> Result<Vec<OutEdge>, BratteliError> {
        let l = self.level(level)?;
        let i = l.index_of(v).ok_or_else(|| BratteliError::UnknownVertex {
            level,
            vertex: v.to_string(),
        })?;
        Ok(l.out[i].clone())
    }

    pub fn edge_target(&self, level: usize, v: &str, label: &Label) -> Result<Name, BratteliError> {
        let l = self.level(level)?;
        let i = l.index_of(v).ok_or_else(|| BratteliError::UnknownVertex {
            level,
            vertex: v.to_string(),
        })?;
        l.out[i]
            .binary_search_by(|e| e.label.cmp(label))
            .map(|k| l.out[i][k].target_name.clone())
            .map_err(|_| BratteliError::UnknownEdge {
                level,
                vertex: v.to_string(),
                label: label.to_string(),
            })
    }

    /// Labels of the edges from `v` at `level` to `w` at `level + 1`, sorted.
    pub fn edges_between(&self, level: usize, v: &str, w: &str) -> Result<Vec<Label>, BratteliError> {
        Ok(self
            .out_edges(level, v)?
            .into_iter()
            .filter(|e| &*e.target_name == w)
            .map(|e| e.label)
            .collect())
    }

    pub fn multiplicity(&self, level: usize, v: &str, w: &str) -> Result<usize, BratteliError> {
        Ok(self.edges_between(level, v, w)?.len())
    }

    /// Appends the edge labelled `label` to `path`.
    pub fn extend(&self, path: &FinitePath, label: &Label) -> Result<FinitePath, BratteliError> {
        let target = self.edge_target(path.end_level(), path.end(), label)?;
        let mut p = path.clone();
        p.push(label.clone(), target);
        Ok(p)
    }

    /// Checks that `path` lies in the diagram.
    pub fn check_path(&self, path: &FinitePath) -> Result<(), BratteliError> {
        if path.start_level < self.start_level {
            return Err(BratteliError::WrongStartLevel {
                expected: self.start_level,
                actual: path.start_level,
            });
        }
        self.vertex_index(path.start_level, &path.start)?;
        let mut from = path.start.clone();
        for (i, s) in path.steps.iter().enumerate() {
            let level = path.start_level + i;
            let t = self.edge_target(level, &from, &s.label)?;
            if t != s.target {
                return Err(BratteliError::WrongTarget {
                    level,
                    vertex: from.to_string(),
                    label: s.label.to_string(),
                    claimed: s.target.to_string(),
                    actual: t.to_string(),
                });
            }
            from = t;
        }
        Ok(())
    }

    /// Number of paths from each vertex of `from` to each vertex of `to`,
    /// indexed `[source][target]`.
    pub fn path_counts(&self, from: usize, to: usize) -> Result<Vec<Vec<BigInt>>, BratteliError> {
        let l0 = self.level(from)?;
        let mut counts: Vec<Vec<BigInt>> = (0..l0.len())
            .map(|i| {
                let mut row = vec![BigInt::zero(); l0.len()];
                row[i] = BigInt::one();
                row
            })
            .collect();
        for level in from..to {
            let l = self.level(level)?;
            let n_next = self.level(level + 1)?.len();
            counts = counts
                .into_iter()
                .map(|row| {
                    let mut next = vec![BigInt::zero(); n_next];
                    for (j, c) in row.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for e in &l.out[j] {
                            next[e.target] += c;
                        }
                    }
                    next
                })
                .collect();
        }
        Ok(counts)
    }

    /// Writes the diagram back out as `bratteli-v1`. Stationary diagrams are
    /// written with their tail rule; others are listed explicitly up to
    /// `depth` (required for infinite ones).
    pub fn to_config(&self, depth: Option<usize>) -> Result<DiagramConfig, BratteliError> {
        let tail = self.inner.source.stationary_tail();
        let last = match (&tail, depth, self.last_level()) {
            (Some((from, _)), _, _) => (*from).max(self.start_level),
            (None, Some(d), _) => self.reach(d),
            (None, None, Some(l)) => l,
            (None, None, None) => {
                return Err(BratteliError::Source(
                    "an infinite diagram needs a depth to be written out".into(),
                ))
            }
        };
        let mut levels = Vec::new();
        let mut edges = Vec::new();
        for level in self.start_level..=last {
            let l = self.level(level)?;
            levels.push(l.vertices.iter().map(|v| v.to_string()).collect());
            if level < last {
                for (i, outs) in l.out.iter().enumerate() {
                    for e in outs {
                        edges.push(EdgeConfig {
                            level,
                            from: l.vertices[i].to_string(),
                            label: e.label.to_string(),
                            to: e.target_name.to_string(),
                        });
                    }
                }
            }
        }
        let stationary_tail = tail.map(|(_, rules)| {
            let mut rules: Vec<TailRuleConfig> = rules
                .into_iter()
                .map(|(f, l, t)| TailRuleConfig {
                    from: f.to_string(),
                    label: l.to_string(),
                    to: t.to_string(),
                })
                .collect();
            rules.sort();
            TailConfig {
                from_level: last,
                rules,
            }
        });
        Ok(DiagramConfig {
            start_level: self.start_level,
            levels,
            edges,
            stationary_tail,
        })
    }

    /// Same vertices and edges on every level from the start up to `depth`.
    pub fn same_up_to(&self, other: &Diagram, depth: usize) -> bool {
        if self.start_level != other.start_level {
            return false;
        }
        let d1 = self.reach(depth);
        if d1 != other.reach(depth) {
            return false;
        }
        (self.start_level..=d1).all(|level| match (self.level(level), other.level(level)) {
            (Ok(a), Ok(b)) => {
                a.vertices == b.vertices
                    && (level == d1
                        || a.out.iter().zip(&b.out).all(|(x, y)| {
                            x.len() == y.len()
                                && x.iter()
                                    .zip(y)
                                    .all(|(e, f)| e.label == f.label && e.target_name == f.target_name)
                        }))
            }
            _ => false,
        })
    }

    /// Shares the underlying levels; only the start level moves.
    fn truncated(&self, k0: usize) -> Diagram {
        Diagram {
            inner: self.inner.clone(),
            start_level: self.start_level.max(k0),
        }
    }
}

/// Drops every level before `k0`.
pub fn truncate(diagram: &Diagram, k0: usize) -> Result<Diagram, BratteliError> {
    if k0 < diagram.start_level() {
        return Err(BratteliError::WrongStartLevel {
            expected: diagram.start_level(),
            actual: k0,
        });
    }
    diagram.check_level(k0)?;
    Ok(diagram.truncated(k0))
}

/// The part of `path` from level `k0` on.
pub fn truncate_path(path: &FinitePath, k0: usize) -> Result<FinitePath, BratteliError> {
    path.suffix_from_level(k0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceMatrix {
    pub level: usize,
    /// Vertices of `level + 1`, indexing rows.
    pub rows: Vec<String>,
    /// Vertices of `level`, indexing columns.
    pub cols: Vec<String>,
    pub matrix: IntMatrix,
}

impl IncidenceMatrix {
    pub fn entry(&self, target: &str, source: &str) -> Option<&BigInt> {
        let i = self.rows.iter().position(|r| r == target)?;
        let j = self.cols.iter().position(|c| c == source)?;
        Some(&self.matrix[(i, j)])
    }
}

/// Entry `(w, v)` counts the edges from `v` on `level` to `w` on `level + 1`.
pub fn incidence_matrix(diagram: &Diagram, level: usize) -> Result<IncidenceMatrix, BratteliError> {
    if diagram.last_level() == Some(level) {
        return Err(BratteliError::LevelOutOfRange {
            level,
            start: diagram.start_level(),
            last: format!("{} (no edges leave the last level)", level),
        });
    }
    let l = diagram.level(level)?;
    let next = diagram.level(level + 1)?;
    let mut m = IntMatrix::zeros(next.len(), l.len());
    for (j, outs) in l.out.iter().enumerate() {
        for e in outs {
            m[(e.target, j)] += 1;
        }
    }
    Ok(IncidenceMatrix {
        level,
        rows: next.vertices.iter().map(|v| v.to_string()).collect(),
        cols: l.vertices.iter().map(|v| v.to_string()).collect(),
        matrix: m,
    })
}

/// All paths from level `from` to level `to`, in order of start vertex and then
/// labels. With a prefix, only the paths extending it.
pub fn enumerate_paths(
    diagram: &Diagram,
    from: usize,
    to: usize,
    prefix: Option<&FinitePath>,
) -> Result<Vec<FinitePath>, BratteliError> {
    if from > to {
        return Err(BratteliError::Source(format!(
            "cannot enumerate paths from level {from} to the earlier level {to}"
        )));
    }
    diagram.level(to)?;
    let seeds: Vec<FinitePath> = match prefix {
        Some(p) => {
            if p.start_level != from {
                return Err(BratteliError::WrongStartLevel {
                    expected: from,
                    actual: p.start_level,
                });
            }
            diagram.check_path(p)?;
            if p.end_level() > to {
                return Err(BratteliError::TruncationBeyondPath {
                    end: p.end_level(),
                    at: to,
                });
            }
            vec![p.clone()]
        }
        None => diagram
            .vertices(from)?
            .iter()
            .map(|v| FinitePath::vertex(from, v))
            .collect(),
    };
    let mut out = Vec::new();
    for seed in seeds {
        extend_all(diagram, seed, to, &mut out)?;
    }
    Ok(out)
}

fn extend_all(
    diagram: &Diagram,
    path: FinitePath,
    to: usize,
    out: &mut Vec<FinitePath>,
) -> Result<(), BratteliError> {
    if path.end_level() == to {
        out.push(path);
        return Ok(());
    }
    for e in diagram.out_edges(path.end_level(), path.end())? {
        let mut p = path.clone();
        p.push(e.label, e.target_name);
        extend_all(diagram, p, to, out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NoLevels,
    EmptyLevel,
    EmptyName,
    DuplicateVertex,
    DuplicateLabel,
    BadLabel,
    DanglingSource,
    DanglingTarget,
    EdgeLevelOutOfRange,
    BadTail,
    NoIncomingEdge,
    NoOutgoingEdge,
    Unbuildable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub level: Option<usize>,
    pub vertex: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detail)
    }
}

/// Dead ends up to level `depth`: vertices with no outgoing edge, and vertices
/// below the first level with no incoming edge.
pub fn validate(diagram: &Diagram, depth: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let last = diagram.reach(depth.max(diagram.start_level()));
    for level in diagram.start_level()..=last {
        let l = match diagram.level(level) {
            Ok(l) => l,
            Err(e) => {
                out.push(Violation {
                    kind: ViolationKind::Unbuildable,
                    level: Some(level),
                    vertex: None,
                    detail: e.to_string(),
                });
                return out;
            }
        };
        if l.is_empty() {
            out.push(Violation {
                kind: ViolationKind::EmptyLevel,
                level: Some(level),
                vertex: None,
                detail: format!("level {level} has no vertices"),
            });
        }
        if level < last {
            for (i, outs) in l.out.iter().enumerate() {
                if outs.is_empty() {
                    out.push(Violation {
                        kind: ViolationKind::NoOutgoingEdge,
                        level: Some(level),
                        vertex: Some(l.vertices[i].to_string()),
                        detail: format!("{:?} at level {level} has no outgoing edge", l.vertices[i]),
                    });
                }
            }
            if let Ok(next) = diagram.level(level + 1) {
                let mut has_in = vec![false; next.len()];
                for outs in &l.out {
                    for e in outs {
                        has_in[e.target] = true;
                    }
                }
                for (j, ok) in has_in.iter().enumerate() {
                    if !ok {
                        out.push(Violation {
                            kind: ViolationKind::NoIncomingEdge,
                            level: Some(level + 1),
                            vertex: Some(next.vertices[j].to_string()),
                            detail: format!(
                                "{:?} at level {} has no incoming edge",
                                next.vertices[j],
                                level + 1
                            ),
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityReport {
    pub pass: bool,
    /// Levels at which the telescoped diagram was cut.
    pub cuts: Vec<usize>,
    /// First level from which no product within the window is positive.
    pub stuck_at: Option<usize>,
}

/// Greedy telescoping up to `depth`: from each cut, take the shortest run of at
/// most `window` consecutive incidence matrices whose product is entrywise
/// positive.
pub fn check_simplicity(
    diagram: &Diagram,
    window: usize,
    depth: usize,
) -> Result<SimplicityReport, BratteliError> {
    let window = window.max(1);
    let last = diagram.reach(depth);
    let mut cuts = vec![diagram.start_level()];
    let mut at = diagram.start_level();
    while at < last {
        let mut prod: Option<IntMatrix> = None;
        let mut found = None;
        for step in 0..window {
            let level = at + step;
            if level >= last {
                break;
            }
            let m = incidence_matrix(diagram, level)?.matrix;
            let p = match prod {
                None => m,
                Some(p) => m.mul(&p),
            };
            if p.all_positive() {
                found = Some(level + 1);
                break;
            }
            prod = Some(p);
        }
        match found {
            Some(next) => {
                cuts.push(next);
                at = next;
            }
            None if at + window > last => break,
            None => {
                return Ok(SimplicityReport {
                    pass: false,
                    cuts,
                    stuck_at: Some(at),
                })
            }
        }
    }
    Ok(SimplicityReport {
        pass: true,
        cuts,
        stuck_at: None,
    })
}
