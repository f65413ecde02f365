use std::fmt::Write;

use super::{BratteliError, Diagram};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz description with one `rank=same` layer per level, from the first
/// level down to level `depth`.
pub fn to_dot(diagram: &Diagram, depth: usize) -> Result<String, BratteliError> {
    let first = diagram.start_level();
    let last = diagram.reach(depth.max(first));
    let mut s = String::new();
    s.push_str("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    for level in first..=last {
        let l = diagram.level(level)?;
        let _ = writeln!(s, "  subgraph level_{level} {{\n    rank=same;");
        for (i, v) in l.vertices.iter().enumerate() {
            let _ = writeln!(s, "    n{level}_{i} [label=\"{}\"];", escape(v));
        }
        s.push_str("  }\n");
    }
    for level in first..last {
        let l = diagram.level(level)?;
        for (i, outs) in l.out.iter().enumerate() {
            for e in outs {
                let _ = writeln!(
                    s,
                    "  n{level}_{i} -> n{}_{} [label=\"{}\", arrowhead=none];",
                    level + 1,
                    e.target,
                    escape(e.label.as_str())
                );
            }
        }
    }
    s.push_str("}\n");
    Ok(s)
}
