use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{ConstructionBundle, ConstructionError, TorsionLabel};
use crate::bratteli::{Diagram, FinitePath, ShadowMap};
use crate::recipe::{expand, RecipeError, RecipeNode, RecipeSource};

fn end_check(b: &ConstructionBundle, p: &FinitePath) -> Result<(), ConstructionError> {
    if p.start_level != 0 {
        return Err(ConstructionError::Path(format!("{p} does not start at level 0")));
    }
    b.split.check_path(p)?;
    Ok(())
}

/// `beta` of the cylinder ending at `v` on `level`: `1/r_l` at `w_b^l`, else 0.
pub fn beta_of_vertex(b: &ConstructionBundle, level: usize, v: &str) -> Result<TorsionLabel, ConstructionError> {
    b.split.vertex_index(level, v)?;
    if level > 0 && *b.w_b(level)? == *v {
        Ok(TorsionLabel::new(1, b.r(level)?))
    } else {
        Ok(TorsionLabel::ZERO)
    }
}

pub fn beta_of(b: &ConstructionBundle, path: &FinitePath) -> Result<TorsionLabel, ConstructionError> {
    end_check(b, path)?;
    beta_of_vertex(b, path.end_level(), path.end())
}

/// `e_(T(v))` in `Z^(V_l(D))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaVector {
    pub level: usize,
    pub vertex: String,
    pub vector: Vec<i64>,
}

pub fn alpha_of_vertex(b: &ConstructionBundle, level: usize, v: &str) -> Result<AlphaVector, ConstructionError> {
    let t = b
        .shadow
        .apply(level, v)
        .ok_or_else(|| ConstructionError::UnknownVertex {
            level,
            vertex: v.to_string(),
        })?;
    let i = b.base.vertex_index(level, &t)?;
    let mut vector = vec![0; b.base.vertices(level)?.len()];
    vector[i] = 1;
    Ok(AlphaVector {
        level,
        vertex: t.to_string(),
        vector,
    })
}

pub fn alpha_of(b: &ConstructionBundle, path: &FinitePath) -> Result<AlphaVector, ConstructionError> {
    b.split.check_path(path)?;
    alpha_of_vertex(b, path.end_level(), path.end())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BetaReport {
    pub pass: bool,
    pub depth: usize,
    /// Vertices checked, by case.
    pub cases: BTreeMap<String, usize>,
    /// Paths of length at most `depth` covered, as a decimal string.
    pub paths: String,
    pub failure: Option<String>,
}

/// `beta(w) = sum of beta(we)` over one-edge extensions, for every path of
/// length at most `depth`. `beta` only sees the end vertex, so each vertex is
/// checked once.
pub fn beta_consistency_check(b: &ConstructionBundle, depth: usize) -> Result<BetaReport, ConstructionError> {
    let mut cases = BTreeMap::new();
    let mut failure = None;
    let mut paths = BigInt::zero();
    for level in 0..=depth {
        let counts = b.split.path_counts(0, level)?;
        let lhs_vertices = b.split.vertices(level)?;
        for (i, v) in lhs_vertices.iter().enumerate() {
            paths += counts.iter().map(|row| row[i].clone()).sum::<BigInt>();
            let case = if level == 0 {
                "first level"
            } else if *b.w_a(level)? == **v {
                "w_a"
            } else if *b.w_b(level)? == **v {
                "w_b"
            } else {
                "other"
            };
            *cases.entry(case.to_string()).or_insert(0) += 1;
            let lhs = beta_of_vertex(b, level, v)?;
            let mut rhs = TorsionLabel::ZERO;
            for e in b.split.out_edges(level, v)? {
                rhs = rhs + beta_of_vertex(b, level + 1, &e.target_name)?;
            }
            if lhs != rhs && failure.is_none() {
                failure = Some(format!("level {level} vertex {v} ({case}): beta {lhs} but extensions sum to {rhs}"));
            }
        }
    }
    Ok(BetaReport {
        pass: failure.is_none(),
        depth,
        cases,
        paths: paths.to_string(),
        failure,
    })
}

/// `[A'] - [B']` of one descendant, over `V_l(C)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationVector {
    pub level: usize,
    pub vertices: Vec<String>,
    #[serde(serialize_with = "crate::matrix::serialize_bigint_vec")]
    pub vector: Vec<BigInt>,
}

pub fn node_relation(d: &Diagram, node: &RecipeNode) -> Result<RelationVector, ConstructionError> {
    let level = node.level();
    let vs = d.vertices(level)?;
    let mut vector = vec![BigInt::zero(); vs.len()];
    for p in node.a() {
        vector[d.vertex_index(level, p.end())?] += 1;
    }
    for p in node.b() {
        vector[d.vertex_index(level, p.end())?] -= 1;
    }
    Ok(RelationVector {
        level,
        vertices: vs.iter().map(|v| v.to_string()).collect(),
        vector,
    })
}

/// One relation vector per level `1..=up_to`, from the first-child chain.
pub fn relation_vectors(b: &ConstructionBundle, up_to: usize) -> Result<Vec<RelationVector>, ConstructionError> {
    let src = b.recipe.as_ref();
    let mut out = Vec::new();
    let mut key = src.root();
    while key.level <= up_to {
        let node = src.node(&key)?;
        out.push(node_relation(&b.split, &node)?);
        match node.children.first() {
            Some(c) => key = c.clone(),
            None => break,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationAgreement {
    pub pass: bool,
    pub depth: usize,
    pub nodes: usize,
    /// Sign of each level's descendants relative to the representative.
    pub orientation: Vec<(usize, i8)>,
    pub failure: Option<String>,
}

/// Every descendant to `depth` gives `+-` the representative relation
/// vector of its level, with one sign per level.
pub fn relation_vectors_agree(b: &ConstructionBundle, depth: usize) -> Result<RelationAgreement, ConstructionError> {
    let reps = relation_vectors(b, depth)?;
    let nodes = expand(b.recipe.as_ref(), depth)?;
    let mut orientation: BTreeMap<usize, i8> = BTreeMap::new();
    let mut failure = None;
    for en in &nodes {
        let rv = node_relation(&b.split, &en.node)?;
        let Some(rep) = reps.iter().find(|r| r.level == rv.level) else {
            continue;
        };
        let neg: Vec<BigInt> = rep.vector.iter().map(|x| -x).collect();
        let sign = if rv.vector == rep.vector {
            1
        } else if rv.vector == neg {
            -1
        } else {
            0
        };
        let prev = *orientation.entry(rv.level).or_insert(sign);
        if (sign == 0 || prev != sign) && failure.is_none() {
            failure = Some(format!(
                "descendant {:?} at level {} gives {:?}, representative {:?}",
                en.position, rv.level, rv.vector, rep.vector
            ));
        }
    }
    Ok(RelationAgreement {
        pass: failure.is_none(),
        depth,
        nodes: nodes.len(),
        orientation: orientation.into_iter().collect(),
        failure,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShadowRelationWitness {
    pub position: Vec<usize>,
    pub child: usize,
    pub a_images: Vec<String>,
    pub b_images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShadowRelationReport {
    pub pass: bool,
    pub depth: usize,
    pub children: usize,
    pub witness: Option<ShadowRelationWitness>,
}

fn images(t: &ShadowMap, paths: &[FinitePath]) -> Result<Vec<String>, RecipeError> {
    let mut v = Vec::with_capacity(paths.len());
    for p in paths {
        let img = t.apply(p.end_level(), p.end()).ok_or_else(|| {
            RecipeError::Generator(format!("shadow map undefined at {} on level {}", p.end(), p.end_level()))
        })?;
        v.push(img.to_string());
    }
    v.sort();
    Ok(v)
}

/// For each child `(A_i, B_i)` of every node to `depth`, the end vertices of
/// `T(A_i)` and `T(B_i)` agree with multiplicity.
pub fn recipe_shadow_relation_check(
    source: &dyn RecipeSource,
    t: &ShadowMap,
    depth: usize,
) -> Result<ShadowRelationReport, RecipeError> {
    let mut children = 0;
    for en in expand(source, depth)? {
        for (i, c) in en.node.children.iter().enumerate() {
            children += 1;
            let (ia, ib) = (images(t, &c.a)?, images(t, &c.b)?);
            if ia != ib {
                return Ok(ShadowRelationReport {
                    pass: false,
                    depth,
                    children,
                    witness: Some(ShadowRelationWitness {
                        position: en.position.clone(),
                        child: i,
                        a_images: ia,
                        b_images: ib,
                    }),
                });
            }
        }
    }
    Ok(ShadowRelationReport {
        pass: true,
        depth,
        children,
        witness: None,
    })
}

pub fn shadow_relation_check(b: &ConstructionBundle, depth: usize) -> Result<ShadowRelationReport, ConstructionError> {
    Ok(recipe_shadow_relation_check(b.recipe.as_ref(), &b.shadow, depth)?)
}

/// Whether `v` is a nonzero multiple of `e_i - e_j` for two distinct
/// indices, reported as `(i, j, k)` with `v = k (e_i - e_j)` and `k > 0`.
pub fn as_difference(v: &[BigInt]) -> Option<(usize, usize, BigInt)> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    match nz.as_slice() {
        [i, j] if v[*i] == -v[*j].clone() => {
            if v[*i].is_positive() {
                Some((*i, *j, v[*i].clone()))
            } else {
                Some((*j, *i, v[*j].clone()))
            }
        }
        _ => None,
    }
}
