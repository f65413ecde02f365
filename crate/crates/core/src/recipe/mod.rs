//! Recursive recipes `(A, B, rho)`: tail pairs `(w_i, z_i)` plus child
//! recipes `(A_i, B_i, rho_i)` one level down. Recipes are infinite, so a
//! source produces nodes on demand from a key.

mod check;
mod eval;
pub mod fixtures;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::bratteli::{BratteliError, Diagram, FinitePath, Label};

pub use check::{
    check_constrained, check_highly_symmetric, check_pairwise_disjoint, etale_verdict, ConstrainedReport,
    ConstrainedWitness, DisjointReport, DisjointWitness, EtaleVerdict, LevelModel, SymmetryFailure,
    SymmetryReport,
};
pub use eval::{eval_eventually_periodic, eval_prefix, EpOutcome, EvalMode, EvalState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecipeError {
    #[error(transparent)]
    Bratteli(#[from] BratteliError),
    #[error("node {node}: {detail}")]
    Partition { node: String, detail: String },
    #[error("input {0} does not start with a path of the root's A")]
    NotInDomain(String),
    #[error("input prefix {0} is neither a tail pair nor in a child at its node")]
    LeavesPartition(String),
    #[error("{0}")]
    Generator(String),
}

/// Identifies a node. Generators read `a`, `b` and `tag`; `reversed` records
/// that the node is the reverse of the generator's node with `a` and `b`
/// swapped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeKey {
    pub level: usize,
    pub a: Vec<FinitePath>,
    pub b: Vec<FinitePath>,
    pub tag: Arc<str>,
    pub reversed: bool,
}

impl NodeKey {
    pub fn new(level: usize, a: Vec<FinitePath>, b: Vec<FinitePath>, tag: &str) -> Self {
        NodeKey {
            level,
            a,
            b,
            tag: Arc::from(tag),
            reversed: false,
        }
    }

    pub fn swapped(&self) -> NodeKey {
        NodeKey {
            level: self.level,
            a: self.b.clone(),
            b: self.a.clone(),
            tag: self.tag.clone(),
            reversed: !self.reversed,
        }
    }
}

impl fmt::Debug for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|p| p.to_string()).collect();
        let b: Vec<String> = self.b.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]{{{}}}->{{{}}}", self.level, a.join(" "), b.join(" "))?;
        if self.reversed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// One expanded node. `a` and `b` end at `level`; pairs and children end one
/// level further down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecipeNode {
    pub key: NodeKey,
    pub pairs: Vec<(FinitePath, FinitePath)>,
    pub children: Vec<NodeKey>,
}

impl RecipeNode {
    pub fn level(&self) -> usize {
        self.key.level
    }

    pub fn a(&self) -> &[FinitePath] {
        &self.key.a
    }

    pub fn b(&self) -> &[FinitePath] {
        &self.key.b
    }

    /// The same node with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> RecipeNode {
        RecipeNode {
            key: self.key.swapped(),
            pairs: self.pairs.iter().map(|(w, z)| (z.clone(), w.clone())).collect(),
            children: self.children.iter().map(NodeKey::swapped).collect(),
        }
    }
}

pub trait RecipeSource: Send + Sync {
    fn name(&self) -> &str;
    fn diagram(&self) -> &Diagram;
    fn root(&self) -> NodeKey;
    fn node(&self, key: &NodeKey) -> Result<Arc<RecipeNode>, RecipeError>;
}

/// What a generator returns for a key: tail pairs and child keys.
pub type Expansion = (Vec<(FinitePath, FinitePath)>, Vec<NodeKey>);
type GenFn = dyn Fn(&Diagram, &NodeKey) -> Result<Expansion, RecipeError> + Send + Sync;

/// A recipe given by a node generator, with a memo table.
pub struct GeneratorRecipe {
    name: String,
    diagram: Diagram,
    root: NodeKey,
    generate: Box<GenFn>,
    memo: Mutex<HashMap<NodeKey, Arc<RecipeNode>>>,
}

impl GeneratorRecipe {
    pub fn new(
        name: &str,
        diagram: Diagram,
        root: NodeKey,
        generate: impl Fn(&Diagram, &NodeKey) -> Result<Expansion, RecipeError> + Send + Sync + 'static,
    ) -> Self {
        GeneratorRecipe {
            name: name.to_string(),
            diagram,
            root,
            generate: Box::new(generate),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl RecipeSource for GeneratorRecipe {
    fn name(&self) -> &str {
        &self.name
    }

    fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    fn root(&self) -> NodeKey {
        self.root.clone()
    }

    fn node(&self, key: &NodeKey) -> Result<Arc<RecipeNode>, RecipeError> {
        if let Some(n) = self.memo.lock().expect("memo poisoned").get(key) {
            return Ok(n.clone());
        }
        let (pairs, children) = (self.generate)(&self.diagram, key)?;
        let node = Arc::new(RecipeNode {
            key: key.clone(),
            pairs,
            children,
        });
        let mut memo = self.memo.lock().expect("memo poisoned");
        Ok(memo.entry(key.clone()).or_insert(node).clone())
    }
}

/// `(B, A, rho_r)`: every node with `A` and `B` and each pair exchanged.
pub struct Reversed {
    inner: Arc<dyn RecipeSource>,
    name: String,
}

impl RecipeSource for Reversed {
    fn name(&self) -> &str {
        &self.name
    }

    fn diagram(&self) -> &Diagram {
        self.inner.diagram()
    }

    fn root(&self) -> NodeKey {
        self.inner.root().swapped()
    }

    fn node(&self, key: &NodeKey) -> Result<Arc<RecipeNode>, RecipeError> {
        Ok(Arc::new(self.inner.node(&key.swapped())?.swapped()))
    }
}

pub fn reverse(source: Arc<dyn RecipeSource>) -> Arc<dyn RecipeSource> {
    let name = format!("reverse({})", source.name());
    Arc::new(Reversed { inner: source, name })
}

/// Out-edges `(label, target)` of `v` at `level`; two vertices with equal
/// lists continue identically.
fn out_signature(d: &Diagram, level: usize, v: &str) -> Result<Vec<(Label, String)>, RecipeError> {
    Ok(d.out_edges(level, v)?
        .into_iter()
        .map(|e| (e.label, e.target_name.to_string()))
        .collect())
}

/// Whether `w x` and `z x` are tail equivalent for every label sequence `x`:
/// equal end vertices, or ends with identical labelled out-edges.
pub fn pair_ends_match(d: &Diagram, w: &FinitePath, z: &FinitePath) -> Result<bool, RecipeError> {
    if w.end_level() != z.end_level() {
        return Ok(false);
    }
    if w.end() == z.end() {
        return Ok(true);
    }
    let level = w.end_level();
    if d.last_level() == Some(level) {
        return Ok(false);
    }
    Ok(out_signature(d, level, w.end())? == out_signature(d, level, z.end())?)
}

fn one_step(d: &Diagram, paths: &[FinitePath]) -> Result<Vec<FinitePath>, RecipeError> {
    let mut out = Vec::new();
    for p in paths {
        for e in d.out_edges(p.end_level(), p.end())? {
            let mut q = p.clone();
            q.push(e.label, e.target_name);
            out.push(q);
        }
    }
    out.sort();
    Ok(out)
}

/// Checks the recipe axioms at one node: pairs end alike, and `AE` and `BE`
/// split exactly into pair members and child sets of equal sizes.
pub fn check_node(d: &Diagram, node: &RecipeNode) -> Result<(), RecipeError> {
    let name = format!("{:?}", node.key);
    let bad = |detail: String| RecipeError::Partition {
        node: name.clone(),
        detail,
    };
    for p in node.a().iter().chain(node.b()) {
        if p.end_level() != node.level() {
            return Err(bad(format!("{p} does not end at level {}", node.level())));
        }
        d.check_path(p)?;
    }
    for (w, z) in &node.pairs {
        if !pair_ends_match(d, w, z)? {
            return Err(bad(format!("pair ({w}, {z}) ends at different vertices")));
        }
    }
    for c in &node.children {
        if c.level != node.level() + 1 {
            return Err(bad(format!("child {c:?} is not one level down")));
        }
        if c.a.len() != c.b.len() {
            return Err(bad(format!("child {c:?} has |A| != |B|")));
        }
    }
    for (side, own, firsts, childs) in [
        (
            'A',
            node.a(),
            node.pairs.iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
            node.children.iter().flat_map(|c| c.a.iter().cloned()).collect::<Vec<_>>(),
        ),
        (
            'B',
            node.b(),
            node.pairs.iter().map(|p| p.1.clone()).collect(),
            node.children.iter().flat_map(|c| c.b.iter().cloned()).collect(),
        ),
    ] {
        let want = one_step(d, own)?;
        let mut got: Vec<FinitePath> = firsts.into_iter().chain(childs).collect();
        got.sort();
        if want != got {
            let missing = want.iter().find(|p| got.binary_search(p).is_err());
            let extra = got.iter().find(|p| want.binary_search(p).is_err());
            let detail = match (missing, extra) {
                (Some(m), _) => format!("{side}E path {m} is not covered"),
                (None, Some(x)) => format!("{x} is not in {side}E"),
                (None, None) => format!("{side}E is covered with repetitions"),
            };
            return Err(bad(detail));
        }
    }
    Ok(())
}

/// A node of an expansion, with its position as child indices from the root.
#[derive(Debug, Clone)]
pub struct ExpandedNode {
    pub position: Vec<usize>,
    pub node: Arc<RecipeNode>,
}

/// All descendants down to `depth`, depth first, each checked with
/// [`check_node`].
pub fn expand(source: &dyn RecipeSource, depth: usize) -> Result<Vec<ExpandedNode>, RecipeError> {
    let d = source.diagram();
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), source.root())];
    while let Some((position, key)) = stack.pop() {
        if key.level > depth {
            continue;
        }
        let node = source.node(&key)?;
        check_node(d, &node).map_err(|e| match e {
            RecipeError::Partition { detail, .. } => RecipeError::Partition {
                node: format!("{position:?} {:?}", node.key),
                detail,
            },
            other => other,
        })?;
        for (i, c) in node.children.iter().enumerate().rev() {
            let mut p = position.clone();
            p.push(i);
            stack.push((p, c.clone()));
        }
        out.push(ExpandedNode { position, node });
    }
    Ok(out)
}

/// Longest common prefix of a nonempty set of paths with a common start.
pub fn common_prefix(paths: &[FinitePath]) -> Option<FinitePath> {
    let first = paths.first()?;
    let mut n = first.len();
    for p in &paths[1..] {
        n = n.min(first.common_prefix_len(p)?);
    }
    Some(first.prefix(n))
}
