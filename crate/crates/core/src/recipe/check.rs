use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{expand, ExpandedNode, RecipeError, RecipeNode, RecipeSource};
use crate::bratteli::{truncate_path, FinitePath};

fn by_level(nodes: &[ExpandedNode]) -> BTreeMap<usize, Vec<&ExpandedNode>> {
    let mut m: BTreeMap<usize, Vec<&ExpandedNode>> = BTreeMap::new();
    for n in nodes {
        m.entry(n.node.level()).or_default().push(n);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstrainedWitness {
    pub level: usize,
    pub position: Vec<usize>,
    pub side: char,
    pub required: usize,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstrainedReport {
    pub pass: bool,
    pub depth: usize,
    pub witness: Option<ConstrainedWitness>,
}

/// Every descendant at level `l <= depth` has all its `A` paths agreeing on
/// their first `n(l)` edges, and likewise for `B`.
pub fn check_constrained(
    source: &dyn RecipeSource,
    n: &dyn Fn(usize) -> usize,
    depth: usize,
) -> Result<ConstrainedReport, RecipeError> {
    for e in expand(source, depth)? {
        let required = n(e.node.level());
        for (side, paths) in [('A', e.node.a()), ('B', e.node.b())] {
            let Some(first) = paths.first() else { continue };
            for p in &paths[1..] {
                let agree = first.common_prefix_len(p).unwrap_or(0);
                let need = required.min(first.len()).min(p.len());
                let starts_differ = first.common_prefix_len(p).is_none();
                if agree < need || (starts_differ && required > 0) {
                    return Ok(ConstrainedReport {
                        pass: false,
                        depth,
                        witness: Some(ConstrainedWitness {
                            level: e.node.level(),
                            position: e.position.clone(),
                            side,
                            required,
                            first: first.to_string(),
                            second: p.to_string(),
                        }),
                    });
                }
            }
        }
    }
    Ok(ConstrainedReport {
        pass: true,
        depth,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjointWitness {
    pub level: usize,
    pub vertex: String,
    /// Descendant with a path of `A` ending at `vertex`.
    pub a_node: Vec<usize>,
    /// Descendant with a path of `B` ending at `vertex`.
    pub b_node: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisjointReport {
    /// Pairwise form: `A'` and `B''` end at disjoint vertex sets for any two
    /// descendants at one level, the same one included.
    pub pass: bool,
    /// Weaker form: `A'` and `B'` disjoint for each single descendant.
    pub single_pass: bool,
    pub depth: usize,
    pub witness: Option<DisjointWitness>,
    /// First failure between two different descendants.
    pub cross_branch_witness: Option<DisjointWitness>,
    pub single_witness: Option<DisjointWitness>,
}

fn ends(paths: &[FinitePath]) -> BTreeSet<&str> {
    paths.iter().map(|p| &**p.end()).collect()
}

/// Descendants on the diagram's first level are skipped: there `A` and `B`
/// are bare vertices and no path is moved yet.
pub fn check_pairwise_disjoint(source: &dyn RecipeSource, depth: usize) -> Result<DisjointReport, RecipeError> {
    let d = source.diagram();
    let nodes = expand(source, depth)?;
    let mut witness = None;
    let mut cross = None;
    let mut single = None;
    for (level, group) in by_level(&nodes) {
        if level == d.start_level() {
            continue;
        }
        let order = d.level(level)?;
        let a_ends: Vec<BTreeSet<&str>> = group.iter().map(|n| ends(n.node.a())).collect();
        let b_ends: Vec<BTreeSet<&str>> = group.iter().map(|n| ends(n.node.b())).collect();
        for v in order.vertices.iter() {
            let v: &str = v;
            let with_a: Vec<usize> = (0..group.len()).filter(|&i| a_ends[i].contains(v)).collect();
            let with_b: Vec<usize> = (0..group.len()).filter(|&i| b_ends[i].contains(v)).collect();
            let mk = |i: usize, j: usize| DisjointWitness {
                level,
                vertex: v.to_string(),
                a_node: group[i].position.clone(),
                b_node: group[j].position.clone(),
            };
            if witness.is_none() {
                if let (Some(&i), Some(&j)) = (with_a.first(), with_b.first()) {
                    witness = Some(mk(i, j));
                }
            }
            if single.is_none() {
                if let Some(&i) = with_a.iter().find(|i| with_b.contains(i)) {
                    single = Some(mk(i, i));
                }
            }
            if cross.is_none() {
                'outer: for &i in &with_a {
                    for &j in &with_b {
                        if i != j {
                            cross = Some(mk(i, j));
                            break 'outer;
                        }
                    }
                }
            }
        }
        if witness.is_some() && single.is_some() && cross.is_some() {
            break;
        }
    }
    Ok(DisjointReport {
        pass: witness.is_none(),
        single_pass: single.is_none(),
        depth,
        witness,
        cross_branch_witness: cross,
        single_witness: single,
    })
}

/// A node with every path truncated at level `k`, compared as a sorted
/// structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    a: Vec<FinitePath>,
    b: Vec<FinitePath>,
    pairs: Vec<(FinitePath, FinitePath)>,
    children: Vec<Shape>,
}

fn truncate_all(paths: &[FinitePath], k: usize) -> Option<Vec<FinitePath>> {
    let mut out: Vec<FinitePath> = paths.iter().map(|p| truncate_path(p, k).ok()).collect::<Option<_>>()?;
    out.sort();
    let n = out.len();
    out.dedup();
    (out.len() == n).then_some(out)
}

/// `None` when truncation at `k` is not injective on some `A` or `B`.
fn shape(
    source: &dyn RecipeSource,
    node: &RecipeNode,
    k: usize,
    remaining: usize,
) -> Result<Option<Shape>, RecipeError> {
    let (Some(a), Some(b)) = (truncate_all(node.a(), k), truncate_all(node.b(), k)) else {
        return Ok(None);
    };
    let mut pairs = Vec::with_capacity(node.pairs.len());
    for (w, z) in &node.pairs {
        pairs.push((truncate_path(w, k)?, truncate_path(z, k)?));
    }
    pairs.sort();
    let mut children = Vec::with_capacity(node.children.len());
    for c in &node.children {
        let s = if remaining == 0 {
            let (Some(a), Some(b)) = (truncate_all(&c.a, k), truncate_all(&c.b, k)) else {
                return Ok(None);
            };
            Shape {
                a,
                b,
                pairs: Vec::new(),
                children: Vec::new(),
            }
        } else {
            match shape(source, &*source.node(c)?, k, remaining - 1)? {
                Some(s) => s,
                None => return Ok(None),
            }
        };
        children.push(s);
    }
    children.sort();
    Ok(Some(Shape { a, b, pairs, children }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelModel {
    pub level: usize,
    pub descendants: usize,
    /// Truncation level of the common model; `None` when a single descendant
    /// makes the condition vacuous.
    pub k: Option<usize>,
    pub model_a: Vec<String>,
    pub model_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryFailure {
    pub level: usize,
    pub first: Vec<usize>,
    pub other: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub pass: bool,
    pub depth: usize,
    pub levels: Vec<LevelModel>,
    pub failure: Option<SymmetryFailure>,
}

/// For each level, looks for a truncation level `k` (largest first) at which
/// every descendant truncates to one common recipe, compared down to `depth`.
pub fn check_highly_symmetric(source: &dyn RecipeSource, depth: usize) -> Result<SymmetryReport, RecipeError> {
    let d = source.diagram();
    let nodes = expand(source, depth)?;
    let mut levels = Vec::new();
    for (level, group) in by_level(&nodes) {
        if group.len() <= 1 {
            levels.push(LevelModel {
                level,
                descendants: group.len(),
                k: None,
                model_a: Vec::new(),
                model_b: Vec::new(),
            });
            continue;
        }
        let remaining = depth - level;
        let mut found = None;
        let mut mismatch = None;
        for k in (d.start_level()..=level).rev() {
            let Some(model) = shape(source, &group[0].node, k, remaining)? else {
                continue;
            };
            let mut all = true;
            for other in &group[1..] {
                if shape(source, &other.node, k, remaining)?.as_ref() != Some(&model) {
                    if k == d.start_level() {
                        mismatch = Some(other.position.clone());
                    }
                    all = false;
                    break;
                }
            }
            if all {
                found = Some((k, model));
                break;
            }
        }
        match found {
            Some((k, model)) => levels.push(LevelModel {
                level,
                descendants: group.len(),
                k: Some(k),
                model_a: model.a.iter().map(|p| p.to_string()).collect(),
                model_b: model.b.iter().map(|p| p.to_string()).collect(),
            }),
            None => {
                let other = mismatch.unwrap_or_else(|| group[1].position.clone());
                return Ok(SymmetryReport {
                    pass: false,
                    depth,
                    levels,
                    failure: Some(SymmetryFailure {
                        level,
                        first: group[0].position.clone(),
                        other,
                        detail: format!(
                            "no truncation level makes the {} descendants at level {level} share a model",
                            group.len()
                        ),
                    }),
                });
            }
        }
    }
    Ok(SymmetryReport {
        pass: true,
        depth,
        levels,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaleVerdict {
    pub recipe: String,
    pub depth: usize,
    pub constrained: ConstrainedReport,
    pub disjoint: DisjointReport,
    pub highly_symmetric: SymmetryReport,
    pub verdict: String,
    pub failed: Vec<String>,
    pub note: String,
}

impl EtaleVerdict {
    pub fn pass(&self) -> bool {
        self.failed.is_empty()
    }
}

/// The three sufficient conditions for the generated relation to carry an
/// étale topology, checked down to `depth`. Uses the pairwise disjointness
/// form.
pub fn etale_verdict(
    source: &dyn RecipeSource,
    n: &dyn Fn(usize) -> usize,
    depth: usize,
) -> Result<EtaleVerdict, RecipeError> {
    let constrained = check_constrained(source, n, depth)?;
    let disjoint = check_pairwise_disjoint(source, depth)?;
    let highly_symmetric = check_highly_symmetric(source, depth)?;
    let mut failed = Vec::new();
    if !constrained.pass {
        failed.push("constrained".to_string());
    }
    if !disjoint.pass {
        failed.push("disjoint".to_string());
    }
    if !highly_symmetric.pass {
        failed.push("highly-symmetric".to_string());
    }
    let verdict = if failed.is_empty() {
        format!("hypotheses-hold-to-depth {depth}")
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok(EtaleVerdict {
        recipe: source.name().to_string(),
        depth,
        constrained,
        disjoint,
        highly_symmetric,
        verdict,
        failed,
        note: "finite-depth check of combinatorial hypotheses; not a proof about the topology".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    #[test]
    fn first_counterexample_fails_at_a() {
        let r = check_pairwise_disjoint(fixtures::counterexample_1().as_ref(), 3).unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        assert_eq!((w.level, w.vertex.as_str()), (1, "a"));
        assert!(!r.single_pass);
    }

    #[test]
    fn second_counterexample_passes_single_form_on_first_level() {
        let r = check_pairwise_disjoint(fixtures::counterexample_2().as_ref(), 3).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness.as_ref().unwrap().level, 1);
        let s = r.single_witness.unwrap();
        assert_eq!((s.level, s.vertex.as_str()), (2, "a"));
    }

    #[test]
    fn third_counterexample() {
        let src = fixtures::counterexample_3();
        let r = check_pairwise_disjoint(src.as_ref(), 3).unwrap();
        let c = r.cross_branch_witness.unwrap();
        assert_eq!(c.level, 2);
        assert_ne!(c.a_node[0], c.b_node[0], "witness spans both branches");
        let h = check_highly_symmetric(src.as_ref(), 3).unwrap();
        assert!(!h.pass);
        assert_eq!(h.failure.unwrap().level, 1);
    }

    #[test]
    fn odometer_hypotheses() {
        let od = fixtures::odometer();
        let v = etale_verdict(od.as_ref(), &|l| l, 6).unwrap();
        assert!(v.pass(), "{v:?}");
    }

    #[test]
    fn constrained_failure_has_paths() {
        let f = fixtures::flip();
        assert!(check_constrained(f.as_ref(), &|l| l, 4).unwrap().pass);
    }
}
