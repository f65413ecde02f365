//! Splitting one vertex per level of a base diagram.
//!
//! At every level `l >= 1` a vertex `w_a` of the base is doubled by a new
//! vertex `w_b`, named `<w_a>#b@<l>`. The edges into `w_a` listed in `F(v)`
//! are rerouted to `w_b`; `w_b` copies the out-edges of `w_a`, with its own
//! choice `F(w_b)` of which of them go to the next `w_b`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bratteli::{BratteliError, Diagram, Label, LevelSource, Name, ShadowMap};
use crate::construction::{RSequence, RSequenceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("level {level}: split vertex {vertex:?} is not a vertex of the base")]
    UnknownSplitVertex { level: usize, vertex: String },
    #[error("level {level}: label {label:?} in F({vertex}) is not an edge from {vertex:?} to {target:?}")]
    BadF {
        level: usize,
        vertex: String,
        label: String,
        target: String,
    },
    #[error("level {level}: new vertex name {name:?} collides with a base vertex")]
    NameCollision { level: usize, name: String },
    #[error("level {level}: {what} needs {required} edges from {from:?} to {to:?}, only {available} exist")]
    Insufficient {
        level: usize,
        what: String,
        from: String,
        to: String,
        required: u64,
        available: u64,
    },
    #[error("the base diagram starts at level {0}; splitting needs a start level of 0")]
    StartLevel(usize),
    #[error(transparent)]
    R(#[from] RSequenceError),
    #[error(transparent)]
    Bratteli(#[from] BratteliError),
}

/// The choices of a split. Levels are absolute.
pub trait SplitRule: Send + Sync {
    /// `w_a` at `level >= 1`.
    fn split_vertex(&self, level: usize) -> Result<Name, SplitError>;
    /// `F(v)` for a base vertex `v` at `level`: labels of edges from `v` to
    /// `w_a` at `level + 1`.
    fn f_base(&self, level: usize, v: &str) -> Result<Vec<Label>, SplitError>;
    /// `F(w_b)` at `level >= 1`: labels of edges from `w_a` at `level` to
    /// `w_a` at `level + 1`.
    fn f_split(&self, level: usize) -> Result<Vec<Label>, SplitError>;
}

#[derive(Clone)]
pub struct SplitSpec {
    rule: Arc<dyn SplitRule>,
}

impl fmt::Debug for SplitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SplitSpec")
    }
}

pub fn split_name(w_a: &str, level: usize) -> Name {
    Name::from(format!("{w_a}#b@{level}"))
}

impl SplitSpec {
    pub fn new(rule: impl SplitRule + 'static) -> Self {
        SplitSpec { rule: Arc::new(rule) }
    }

    pub fn split_vertex(&self, level: usize) -> Result<Name, SplitError> {
        self.rule.split_vertex(level)
    }

    pub fn f_base(&self, level: usize, v: &str) -> Result<Vec<Label>, SplitError> {
        self.rule.f_base(level, v)
    }

    pub fn f_split(&self, level: usize) -> Result<Vec<Label>, SplitError> {
        self.rule.f_split(level)
    }

    pub fn w_b(&self, level: usize) -> Result<Name, SplitError> {
        Ok(split_name(&self.split_vertex(level)?, level))
    }
}

/// A spec given level by level, for finite experiments. Missing F-sets are
/// empty.
#[derive(Debug, Clone, Default)]
pub struct TableSplit {
    pub split: BTreeMap<usize, String>,
    pub f_base: BTreeMap<(usize, String), Vec<String>>,
    pub f_split: BTreeMap<usize, Vec<String>>,
}

impl SplitRule for TableSplit {
    fn split_vertex(&self, level: usize) -> Result<Name, SplitError> {
        self.split
            .get(&level)
            .map(|s| Name::from(s.as_str()))
            .ok_or_else(|| SplitError::UnknownSplitVertex {
                level,
                vertex: "<none given>".into(),
            })
    }

    fn f_base(&self, level: usize, v: &str) -> Result<Vec<Label>, SplitError> {
        Ok(self
            .f_base
            .get(&(level, v.to_string()))
            .map(|ls| ls.iter().map(|l| Label::new(l)).collect())
            .unwrap_or_default())
    }

    fn f_split(&self, level: usize) -> Result<Vec<Label>, SplitError> {
        Ok(self
            .f_split
            .get(&level)
            .map(|ls| ls.iter().map(|l| Label::new(l)).collect())
            .unwrap_or_default())
    }
}

/// Which vertex to split at each level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitChoice {
    Last,
    Named(String),
}

/// F-sets of the main construction: `|F(w_a^l)| = r_(l+1)`,
/// `|F(w_b^l)| = d_(l+1)`, `|F(v^0)| = r_1` on level 0, empty elsewhere, each
/// the first labels in label order.
struct DefaultRule {
    base: Diagram,
    r: RSequence,
    choice: SplitChoice,
}

impl DefaultRule {
    fn first_labels(
        &self,
        level: usize,
        from: &str,
        to: &str,
        n: u64,
        what: &str,
    ) -> Result<Vec<Label>, SplitError> {
        let labels = self.base.edges_between(level, from, to)?;
        if (labels.len() as u64) < n {
            return Err(SplitError::Insufficient {
                level,
                what: what.to_string(),
                from: from.to_string(),
                to: to.to_string(),
                required: n,
                available: labels.len() as u64,
            });
        }
        Ok(labels[..n as usize].to_vec())
    }
}

impl SplitRule for DefaultRule {
    fn split_vertex(&self, level: usize) -> Result<Name, SplitError> {
        let vs = self.base.vertices(level)?;
        match &self.choice {
            SplitChoice::Last => Ok(vs.last().expect("levels are nonempty").clone()),
            SplitChoice::Named(n) => vs
                .iter()
                .find(|v| &***v == n.as_str())
                .cloned()
                .ok_or_else(|| SplitError::UnknownSplitVertex {
                    level,
                    vertex: n.clone(),
                }),
        }
    }

    fn f_base(&self, level: usize, v: &str) -> Result<Vec<Label>, SplitError> {
        let w_next = self.split_vertex(level + 1)?;
        if level == 0 {
            let n = self.r.r(1)?;
            return self.first_labels(0, v, &w_next, n, "F on the first level");
        }
        if *v == *self.split_vertex(level)? {
            let n = self.r.r(level + 1)?;
            return self.first_labels(level, v, &w_next, n, "F(w_a)");
        }
        Ok(Vec::new())
    }

    fn f_split(&self, level: usize) -> Result<Vec<Label>, SplitError> {
        let w = self.split_vertex(level)?;
        let w_next = self.split_vertex(level + 1)?;
        let r = self.r.r(level + 1)?;
        let prev = self.r.r(level)?;
        let d = if r % prev == 0 { r / prev } else { 0 };
        self.first_labels(level, &w, &w_next, d, "F(w_b)")
    }
}

/// The spec used by the main construction. The base must start at level 0.
/// Shortfalls surface when the split is built.
pub fn default_split_spec(
    base: &Diagram,
    r: &RSequence,
    choice: SplitChoice,
) -> Result<SplitSpec, SplitError> {
    if base.start_level() != 0 {
        return Err(SplitError::StartLevel(base.start_level()));
    }
    Ok(SplitSpec::new(DefaultRule {
        base: base.clone(),
        r: r.clone(),
        choice,
    }))
}

struct SplitSource {
    base: Diagram,
    spec: SplitSpec,
}

fn src_err(e: SplitError) -> BratteliError {
    match e {
        SplitError::Bratteli(b) => b,
        other => BratteliError::Source(other.to_string()),
    }
}

impl SplitSource {
    fn check_f(
        &self,
        level: usize,
        owner: &str,
        from: &str,
        f: &[Label],
        w_next: &str,
    ) -> Result<(), SplitError> {
        let ok: BTreeSet<Label> = self.base.edges_between(level, from, w_next)?.into_iter().collect();
        for l in f {
            if !ok.contains(l) {
                return Err(SplitError::BadF {
                    level,
                    vertex: owner.to_string(),
                    label: l.to_string(),
                    target: w_next.to_string(),
                });
            }
        }
        Ok(())
    }

    fn split_vertices(&self, level: usize) -> Result<Vec<Name>, SplitError> {
        let mut vs = self.base.vertices(level)?;
        if level > self.base.start_level() {
            let w = self.spec.split_vertex(level)?;
            if !vs.contains(&w) {
                return Err(SplitError::UnknownSplitVertex {
                    level,
                    vertex: w.to_string(),
                });
            }
            let b = split_name(&w, level);
            if vs.contains(&b) {
                return Err(SplitError::NameCollision {
                    level,
                    name: b.to_string(),
                });
            }
            vs.push(b);
        }
        Ok(vs)
    }

    fn split_edges(&self, level: usize) -> Result<Vec<(Name, Label, Name)>, SplitError> {
        let w_next = self.spec.split_vertex(level + 1)?;
        let b_next = split_name(&w_next, level + 1);
        let mut out = Vec::new();
        let route = |from: &Name,
                     src: &str,
                     f: &BTreeSet<Label>,
                     out: &mut Vec<(Name, Label, Name)>|
         -> Result<(), SplitError> {
            for e in self.base.out_edges(level, src)? {
                let to = if e.target_name == w_next && f.contains(&e.label) {
                    b_next.clone()
                } else {
                    e.target_name.clone()
                };
                out.push((from.clone(), e.label, to));
            }
            Ok(())
        };
        for v in self.base.vertices(level)? {
            let f = self.spec.f_base(level, &v)?;
            self.check_f(level, &v, &v, &f, &w_next)?;
            route(&v, &v, &f.into_iter().collect(), &mut out)?;
        }
        if level > self.base.start_level() {
            let w = self.spec.split_vertex(level)?;
            let b = split_name(&w, level);
            let f = self.spec.f_split(level)?;
            self.check_f(level, &b, &w, &f, &w_next)?;
            route(&b, &w, &f.into_iter().collect(), &mut out)?;
        }
        Ok(out)
    }
}

impl LevelSource for SplitSource {
    fn last_level(&self) -> Option<usize> {
        self.base.last_level()
    }

    fn vertices(&self, level: usize) -> Result<Vec<Name>, BratteliError> {
        self.split_vertices(level).map_err(src_err)
    }

    fn edges(&self, level: usize) -> Result<Vec<(Name, Label, Name)>, BratteliError> {
        self.split_edges(level).map_err(src_err)
    }
}

/// Builds the split diagram lazily, after checking the spec level by level
/// down to `depth`. The shadow map sends each `w_b` to its `w_a` and fixes
/// every other vertex.
pub fn build_split(
    base: &Diagram,
    spec: &SplitSpec,
    depth: usize,
) -> Result<(Diagram, ShadowMap), SplitError> {
    let source = SplitSource {
        base: base.clone(),
        spec: spec.clone(),
    };
    let last = base.reach(depth.max(base.start_level()));
    for level in base.start_level()..=last {
        source.split_vertices(level)?;
        if level < last {
            source.split_edges(level)?;
        }
    }
    let start = base.start_level();
    let t_spec = spec.clone();
    let shadow = ShadowMap::from_fn(move |level, v| {
        if level > start {
            if let Ok(w) = t_spec.split_vertex(level) {
                if *split_name(&w, level) == *v {
                    return Some(w);
                }
            }
        }
        Some(Name::from(v))
    });
    Ok((Diagram::from_source(start, Box::new(source)), shadow))
}
