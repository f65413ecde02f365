use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Violation, ViolationKind};

/// JSON schema `bratteli-v1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramConfig {
    #[serde(default)]
    pub start_level: usize,
    pub levels: Vec<Vec<String>>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_tail: Option<TailConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub level: usize,
    pub from: String,
    pub label: String,
    pub to: String,
}

/// From `from_level` on, every level has the vertices of `from_level` and the
/// edges given by `rules`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub from_level: usize,
    pub rules: Vec<TailRuleConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailRuleConfig {
    pub from: String,
    pub label: String,
    pub to: String,
}

impl DiagramConfig {
    pub fn last_listed_level(&self) -> Option<usize> {
        (!self.levels.is_empty()).then(|| self.start_level + self.levels.len() - 1)
    }

    pub fn level_vertices(&self, level: usize) -> Option<&[String]> {
        level
            .checked_sub(self.start_level)
            .and_then(|i| self.levels.get(i))
            .map(Vec::as_slice)
    }
}

fn violation(kind: ViolationKind, level: Option<usize>, vertex: Option<&str>, detail: String) -> Violation {
    Violation {
        kind,
        level,
        vertex: vertex.map(str::to_string),
        detail,
    }
}

/// Problems with the configuration itself: things that stop a diagram from
/// being built at all. Dead ends are reported by [`super::validate`].
pub fn validate_config(cfg: &DiagramConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if cfg.levels.is_empty() {
        out.push(violation(ViolationKind::NoLevels, None, None, "no levels".into()));
        return out;
    }
    let last = cfg.last_listed_level().expect("nonempty");
    for (i, names) in cfg.levels.iter().enumerate() {
        let level = cfg.start_level + i;
        if names.is_empty() {
            out.push(violation(
                ViolationKind::EmptyLevel,
                Some(level),
                None,
                format!("level {level} has no vertices"),
            ));
        }
        let mut seen = BTreeSet::new();
        for n in names {
            if n.is_empty() {
                out.push(violation(
                    ViolationKind::EmptyName,
                    Some(level),
                    None,
                    "empty vertex name".into(),
                ));
            }
            if !seen.insert(n.as_str()) {
                out.push(violation(
                    ViolationKind::DuplicateVertex,
                    Some(level),
                    Some(n),
                    format!("vertex {n:?} listed twice at level {level}"),
                ));
            }
        }
    }
    let edge_limit = match &cfg.stationary_tail {
        Some(t) => t.from_level,
        None => last,
    };
    let mut labels: BTreeMap<(usize, &str), BTreeSet<&str>> = BTreeMap::new();
    for e in &cfg.edges {
        if e.label.is_empty() || e.label.contains([',', '>', ';', '(', ')']) {
            out.push(violation(
                ViolationKind::BadLabel,
                Some(e.level),
                Some(&e.from),
                format!("label {:?} is empty or contains a reserved character", e.label),
            ));
        }
        if e.level < cfg.start_level || e.level >= edge_limit {
            out.push(violation(
                ViolationKind::EdgeLevelOutOfRange,
                Some(e.level),
                Some(&e.from),
                format!(
                    "edge {}>{}>{} at level {} lies outside levels {}..{}",
                    e.from, e.label, e.to, e.level, cfg.start_level, edge_limit
                ),
            ));
            continue;
        }
        let here = cfg.level_vertices(e.level).unwrap_or(&[]);
        let next = cfg.level_vertices(e.level + 1).unwrap_or(&[]);
        if !here.contains(&e.from) {
            out.push(violation(
                ViolationKind::DanglingSource,
                Some(e.level),
                Some(&e.from),
                format!("edge source {:?} is not a vertex of level {}", e.from, e.level),
            ));
        }
        if !next.contains(&e.to) {
            out.push(violation(
                ViolationKind::DanglingTarget,
                Some(e.level),
                Some(&e.from),
                format!("edge target {:?} is not a vertex of level {}", e.to, e.level + 1),
            ));
        }
        if !labels.entry((e.level, &e.from)).or_default().insert(&e.label) {
            out.push(violation(
                ViolationKind::DuplicateLabel,
                Some(e.level),
                Some(&e.from),
                format!("label {:?} used twice on edges leaving {:?}", e.label, e.from),
            ));
        }
    }
    if let Some(t) = &cfg.stationary_tail {
        if t.from_level < cfg.start_level || t.from_level != last {
            out.push(violation(
                ViolationKind::BadTail,
                Some(t.from_level),
                None,
                format!(
                    "stationary tail starts at level {} but the listed levels end at {last}",
                    t.from_level
                ),
            ));
        } else {
            let verts = cfg.level_vertices(t.from_level).unwrap_or(&[]);
            let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
            for r in &t.rules {
                if !verts.contains(&r.from) || !verts.contains(&r.to) {
                    out.push(violation(
                        ViolationKind::BadTail,
                        Some(t.from_level),
                        Some(&r.from),
                        format!("tail rule {}>{}>{} names an unknown vertex", r.from, r.label, r.to),
                    ));
                }
                if r.label.is_empty() || r.label.contains([',', '>', ';', '(', ')']) {
                    out.push(violation(
                        ViolationKind::BadLabel,
                        Some(t.from_level),
                        Some(&r.from),
                        format!("label {:?} is empty or contains a reserved character", r.label),
                    ));
                }
                if !seen.insert((&r.from, &r.label)) {
                    out.push(violation(
                        ViolationKind::DuplicateLabel,
                        Some(t.from_level),
                        Some(&r.from),
                        format!("tail label {:?} used twice on edges leaving {:?}", r.label, r.from),
                    ));
                }
            }
        }
    }
    out
}
