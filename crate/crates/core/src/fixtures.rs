//! Named diagrams and construction configs used by the examples, the CLI and
//! the tests.

use crate::bratteli::{DiagramConfig, EdgeConfig, TailConfig, TailRuleConfig};
use crate::construction::{ConstructionConfig, Mode, RSequence};

fn edge(level: usize, from: &str, label: &str, to: &str) -> EdgeConfig {
    EdgeConfig {
        level,
        from: from.into(),
        label: label.into(),
        to: to.into(),
    }
}

fn rule(from: &str, label: &str, to: &str) -> TailRuleConfig {
    TailRuleConfig {
        from: from.into(),
        label: label.into(),
        to: to.into(),
    }
}

fn levels(ls: &[&[&str]]) -> Vec<Vec<String>> {
    ls.iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect()
}

/// Single edges between all vertices of consecutive levels, each labelled by
/// its target, so paths read as words in the vertex names.
fn complete_tail(from_level: usize, names: &[&str]) -> TailConfig {
    let mut rules = Vec::new();
    for v in names {
        for w in names {
            rules.push(rule(v, w, w));
        }
    }
    TailConfig { from_level, rules }
}

/// Words in `{0,1}`: vertices `0` and `1` on every level below the root.
pub fn binary() -> DiagramConfig {
    DiagramConfig {
        start_level: 0,
        levels: levels(&[&["root"], &["0", "1"]]),
        edges: vec![edge(0, "root", "0", "0"), edge(0, "root", "1", "1")],
        stationary_tail: Some(complete_tail(1, &["0", "1"])),
    }
}

/// Words in `{a,b,c}`.
pub fn abc() -> DiagramConfig {
    DiagramConfig {
        start_level: 0,
        levels: levels(&[&["root"], &["a", "b", "c"]]),
        edges: ["a", "b", "c"].iter().map(|v| edge(0, "root", v, v)).collect(),
        stationary_tail: Some(complete_tail(1, &["a", "b", "c"])),
    }
}

/// Words in `{a,b,c}` whose first letter is `b` or `c`.
pub fn abc_without_first_a() -> DiagramConfig {
    let mut edges = vec![edge(0, "root", "b", "b"), edge(0, "root", "c", "c")];
    for v in ["b", "c"] {
        for w in ["a", "b", "c"] {
            edges.push(edge(1, v, w, w));
        }
    }
    DiagramConfig {
        start_level: 0,
        levels: levels(&[&["root"], &["b", "c"], &["a", "b", "c"]]),
        edges,
        stationary_tail: Some(complete_tail(2, &["a", "b", "c"])),
    }
}

/// One vertex per level: four edges from the root, then two per level. Tail
/// equivalence on it has group `Z[1/2]`.
pub fn two_adic() -> DiagramConfig {
    DiagramConfig {
        start_level: 0,
        levels: levels(&[&["root"], &["a"]]),
        edges: (1..=4).map(|i| edge(0, "root", &i.to_string(), "a")).collect(),
        stationary_tail: Some(TailConfig {
            from_level: 1,
            rules: vec![rule("a", "1", "a"), rule("a", "2", "a")],
        }),
    }
}

/// Two vertices per level with stationary incidence `[[1,2],[2,3]]` (rows and
/// columns `v, w`); its dimension group is `Z + Z(1+sqrt 5)/2`.
pub fn fibonacci_base() -> DiagramConfig {
    let mut edges = vec![edge(0, "root", "1", "v")];
    for i in 2..=5 {
        edges.push(edge(0, "root", &i.to_string(), "w"));
    }
    DiagramConfig {
        start_level: 0,
        levels: levels(&[&["root"], &["v", "w"]]),
        edges,
        stationary_tail: Some(TailConfig {
            from_level: 1,
            rules: vec![
                rule("v", "1", "v"),
                rule("v", "2", "w"),
                rule("v", "3", "w"),
                rule("w", "1", "v"),
                rule("w", "2", "v"),
                rule("w", "3", "w"),
                rule("w", "4", "w"),
                rule("w", "5", "w"),
            ],
        }),
    }
}

/// `n` vertices per level with `m` parallel edges between every pair of
/// consecutive vertices; `m` from the root as well.
pub fn uniform(n: usize, m: usize) -> DiagramConfig {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for v in &names {
        for k in 0..m {
            edges.push(edge(0, "root", &format!("{v}.{k}"), v));
        }
    }
    let mut rules = Vec::new();
    for v in &names {
        for w in &names {
            for k in 0..m {
                rules.push(rule(v, &format!("{w}.{k}"), w));
            }
        }
    }
    DiagramConfig {
        start_level: 0,
        levels: vec![vec!["root".to_string()], names],
        edges,
        stationary_tail: Some(TailConfig { from_level: 1, rules }),
    }
}

/// Like [`uniform`], with `mults[l]` parallel edges from each level-`l`
/// vertex to each level-`l+1` vertex; the last entry repeats in the tail.
pub fn graded(n: usize, mults: &[usize]) -> DiagramConfig {
    assert!(!mults.is_empty(), "need at least one multiplicity");
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for v in &names {
        for k in 0..mults[0] {
            edges.push(edge(0, "root", &format!("{v}.{k}"), v));
        }
    }
    for (level, &m) in mults.iter().enumerate().skip(1) {
        for v in &names {
            for w in &names {
                for k in 0..m {
                    edges.push(edge(level, v, &format!("{w}.{k}"), w));
                }
            }
        }
    }
    let m = *mults.last().expect("nonempty");
    let mut rules = Vec::new();
    for v in &names {
        for w in &names {
            for k in 0..m {
                rules.push(rule(v, &format!("{w}.{k}"), w));
            }
        }
    }
    let mut lv = vec![vec!["root".to_string()]];
    lv.extend(std::iter::repeat_n(names, mults.len()));
    DiagramConfig {
        start_level: 0,
        levels: lv,
        edges,
        stationary_tail: Some(TailConfig {
            from_level: mults.len(),
            rules,
        }),
    }
}

/// `Z[1/2] + Z/2`.
pub fn zhalf() -> ConstructionConfig {
    ConstructionConfig {
        base_diagram: two_adic(),
        r_sequence: RSequence::constant(2),
        split_vertex: None,
        mode: Mode::R2Relaxed,
        depth: None,
    }
}

/// `(Z + Z(1+sqrt 5)/2) + Z/2`.
pub fn fibonacci() -> ConstructionConfig {
    ConstructionConfig {
        base_diagram: fibonacci_base(),
        r_sequence: RSequence::constant(2),
        split_vertex: None,
        mode: Mode::R2Relaxed,
        depth: None,
    }
}

/// Names accepted wherever a diagram is expected.
pub fn diagram_by_name(name: &str) -> Option<DiagramConfig> {
    Some(match name {
        "binary" => binary(),
        "abc" => abc(),
        "abc-without-first-a" => abc_without_first_a(),
        "two-adic" => two_adic(),
        "fibonacci-base" => fibonacci_base(),
        _ => return None,
    })
}

pub fn construction_by_name(name: &str) -> Option<ConstructionConfig> {
    match name {
        "zhalf" => Some(zhalf()),
        "fibonacci" => Some(fibonacci()),
        _ => None,
    }
}
