use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{enumerate_paths, BratteliError, Diagram, EventuallyPeriodicPath, FinitePath, Name};

type VertexFn = dyn Fn(usize, &str) -> Option<Name> + Send + Sync;

/// A vertex map between two diagrams, level by level. Edges map by keeping
/// their labels.
#[derive(Clone)]
pub struct ShadowMap {
    map: Arc<VertexFn>,
}

impl fmt::Debug for ShadowMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ShadowMap")
    }
}

impl ShadowMap {
    pub fn identity() -> Self {
        ShadowMap::from_fn(|_, v| Some(Name::from(v)))
    }

    pub fn from_fn(f: impl Fn(usize, &str) -> Option<Name> + Send + Sync + 'static) -> Self {
        ShadowMap { map: Arc::new(f) }
    }

    /// Explicit table keyed by (level, vertex); vertices not in the table map
    /// to themselves.
    pub fn from_table(table: BTreeMap<(usize, String), String>) -> Self {
        ShadowMap::from_fn(move |level, v| {
            Some(Name::from(
                table
                    .get(&(level, v.to_string()))
                    .map_or(v, String::as_str),
            ))
        })
    }

    pub fn apply(&self, level: usize, v: &str) -> Option<Name> {
        (self.map)(level, v)
    }

    fn apply_or_err(&self, level: usize, v: &str) -> Result<Name, BratteliError> {
        self.apply(level, v)
            .ok_or_else(|| BratteliError::ShadowUndefined {
                level,
                vertex: v.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowFailureKind {
    StartLevelMismatch,
    Undefined,
    UnknownImage,
    FirstLevelNotBijective,
    NotSurjective,
    OutEdgesNotBijective,
    NotHomomorphism,
    Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowFailure {
    pub kind: ShadowFailureKind,
    pub level: usize,
    pub vertex: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub pass: bool,
    pub depth: usize,
    pub failures: Vec<ShadowFailure>,
}

fn fail(kind: ShadowFailureKind, level: usize, vertex: Option<&str>, detail: String) -> ShadowFailure {
    ShadowFailure {
        kind,
        level,
        vertex: vertex.map(str::to_string),
        detail,
    }
}

/// Checks the three shadow hypotheses up to level `depth`: bijective on the
/// first level, surjective on every level, and for each vertex a bijection from
/// its out-edges onto the out-edges of its image.
pub fn shadow_verify(t: &ShadowMap, c: &Diagram, c2: &Diagram, depth: usize) -> ShadowReport {
    let mut failures = Vec::new();
    let first = c.start_level();
    let depth = depth.max(first);
    let report = |failures: Vec<ShadowFailure>| ShadowReport {
        pass: failures.is_empty(),
        depth,
        failures,
    };
    if c2.start_level() != first {
        failures.push(fail(
            ShadowFailureKind::StartLevelMismatch,
            first,
            None,
            format!("diagrams start at levels {first} and {}", c2.start_level()),
        ));
        return report(failures);
    }
    let last = c.reach(depth);
    if c2.reach(depth) != last {
        failures.push(fail(
            ShadowFailureKind::Source,
            first,
            None,
            "diagrams reach different depths".into(),
        ));
        return report(failures);
    }
    for level in first..=last {
        let (l, l2) = match (c.level(level), c2.level(level)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                failures.push(fail(ShadowFailureKind::Source, level, None, e.to_string()));
                return report(failures);
            }
        };
        let mut images: Vec<Option<usize>> = Vec::with_capacity(l.len());
        for v in &l.vertices {
            match t.apply(level, v) {
                None => {
                    failures.push(fail(
                        ShadowFailureKind::Undefined,
                        level,
                        Some(v),
                        format!("no image for {v:?} at level {level}"),
                    ));
                    images.push(None);
                }
                Some(w) => match l2.index_of(&w) {
                    None => {
                        failures.push(fail(
                            ShadowFailureKind::UnknownImage,
                            level,
                            Some(v),
                            format!("image {w:?} of {v:?} is not a vertex at level {level}"),
                        ));
                        images.push(None);
                    }
                    Some(j) => images.push(Some(j)),
                },
            }
        }
        let hit: BTreeSet<usize> = images.iter().flatten().copied().collect();
        if level == first {
            let mut seen: BTreeMap<usize, &str> = BTreeMap::new();
            for (i, img) in images.iter().enumerate() {
                if let Some(j) = img {
                    if let Some(prev) = seen.insert(*j, &l.vertices[i]) {
                        failures.push(fail(
                            ShadowFailureKind::FirstLevelNotBijective,
                            level,
                            Some(&l.vertices[i]),
                            format!(
                                "{prev:?} and {:?} both map to {:?} on the first level",
                                l.vertices[i], l2.vertices[*j]
                            ),
                        ));
                    }
                }
            }
        }
        for (j, w) in l2.vertices.iter().enumerate() {
            if !hit.contains(&j) {
                let kind = if level == first {
                    ShadowFailureKind::FirstLevelNotBijective
                } else {
                    ShadowFailureKind::NotSurjective
                };
                failures.push(fail(
                    kind,
                    level,
                    Some(w),
                    format!("{w:?} at level {level} is not in the image"),
                ));
            }
        }
        if level == last {
            continue;
        }
        for (i, outs) in l.out.iter().enumerate() {
            let Some(j) = images[i] else { continue };
            let v = &l.vertices[i];
            let outs2 = &l2.out[j];
            let labels: Vec<_> = outs.iter().map(|e| &e.label).collect();
            let labels2: Vec<_> = outs2.iter().map(|e| &e.label).collect();
            if labels != labels2 {
                failures.push(fail(
                    ShadowFailureKind::OutEdgesNotBijective,
                    level,
                    Some(v),
                    format!(
                        "out-edge labels of {v:?} {:?} differ from those of its image {:?} {:?}",
                        labels.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
                        l2.vertices[j],
                        labels2.iter().map(|l| l.as_str()).collect::<Vec<_>>()
                    ),
                ));
                continue;
            }
            for (e, e2) in outs.iter().zip(outs2) {
                let img = t.apply(level + 1, &e.target_name);
                if img.as_deref() != Some(&*e2.target_name) {
                    failures.push(fail(
                        ShadowFailureKind::NotHomomorphism,
                        level,
                        Some(v),
                        format!(
                            "edge {v}>{}>{} maps to a target {:?} but the image edge ends at {:?}",
                            e.label, e.target_name, img, e2.target_name
                        ),
                    ));
                }
            }
        }
    }
    report(failures)
}

/// Relabels the vertices of `path` through `t`, keeping edge labels.
pub fn shadow_map_path(t: &ShadowMap, path: &FinitePath) -> Result<FinitePath, BratteliError> {
    let mut out = FinitePath::vertex(path.start_level, &t.apply_or_err(path.start_level, &path.start)?);
    for (i, s) in path.steps.iter().enumerate() {
        let level = path.start_level + i + 1;
        out.push(s.label.clone(), t.apply_or_err(level, &s.target)?);
    }
    Ok(out)
}

/// Maps the preperiod vertex by vertex; the period is a label sequence and is
/// kept as is.
pub fn shadow_map_periodic(
    t: &ShadowMap,
    path: &EventuallyPeriodicPath,
) -> Result<EventuallyPeriodicPath, BratteliError> {
    Ok(EventuallyPeriodicPath {
        preperiod: shadow_map_path(t, &path.preperiod)?,
        period: path.period.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BijectivityMode {
    Exhaustive,
    Counting,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectivityReport {
    pub pass: bool,
    pub mode: BijectivityMode,
    pub to_level: usize,
    pub paths: String,
    pub witness: Option<String>,
}

/// Checks that `t` maps the paths from the first level to `to` bijectively.
/// Enumerates them when there are at most `limit`, and otherwise compares path
/// counts per end vertex.
pub fn path_bijectivity_check(
    t: &ShadowMap,
    c: &Diagram,
    c2: &Diagram,
    to: usize,
    limit: usize,
) -> Result<BijectivityReport, BratteliError> {
    let first = c.start_level();
    let to = c.reach(to.max(first));
    let counts = c.path_counts(first, to)?;
    let counts2 = c2.path_counts(first, to)?;
    let total: BigInt = counts.iter().flatten().sum();
    let total2: BigInt = counts2.iter().flatten().sum();
    if total != total2 {
        return Ok(BijectivityReport {
            pass: false,
            mode: BijectivityMode::Counting,
            to_level: to,
            paths: total.to_string(),
            witness: Some(format!("{total} paths map into a set of {total2}")),
        });
    }
    if total <= BigInt::from(limit) {
        let paths = enumerate_paths(c, first, to, None)?;
        let mut seen = HashSet::with_capacity(paths.len());
        for p in &paths {
            let img = shadow_map_path(t, p)?;
            if let Err(e) = c2.check_path(&img) {
                return Ok(BijectivityReport {
                    pass: false,
                    mode: BijectivityMode::Exhaustive,
                    to_level: to,
                    paths: total.to_string(),
                    witness: Some(format!("image of {p} is not a path: {e}")),
                });
            }
            if !seen.insert(img.clone()) {
                return Ok(BijectivityReport {
                    pass: false,
                    mode: BijectivityMode::Exhaustive,
                    to_level: to,
                    paths: total.to_string(),
                    witness: Some(format!("two paths map to {img}")),
                });
            }
        }
        return Ok(BijectivityReport {
            pass: true,
            mode: BijectivityMode::Exhaustive,
            to_level: to,
            paths: total.to_string(),
            witness: None,
        });
    }
    // Per end vertex: paths into the preimage of w must number as many as paths into w.
    let l = c.level(to)?;
    let l2 = c2.level(to)?;
    let mut by_image = vec![BigInt::zero(); l2.len()];
    for (j, v) in l.vertices.iter().enumerate() {
        let w = t.apply_or_err(to, v)?;
        let k = l2.index_of(&w).ok_or_else(|| BratteliError::UnknownVertex {
            level: to,
            vertex: w.to_string(),
        })?;
        for row in &counts {
            by_image[k] += &row[j];
        }
    }
    for (k, w) in l2.vertices.iter().enumerate() {
        let direct: BigInt = counts2.iter().map(|row| &row[k]).sum();
        if direct != by_image[k] {
            return Ok(BijectivityReport {
                pass: false,
                mode: BijectivityMode::Counting,
                to_level: to,
                paths: total.to_string(),
                witness: Some(format!(
                    "{} paths end over {w:?} but {direct} paths end at it",
                    by_image[k]
                )),
            });
        }
    }
    Ok(BijectivityReport {
        pass: true,
        mode: BijectivityMode::Counting,
        to_level: to,
        paths: total.to_string(),
        witness: None,
    })
}
