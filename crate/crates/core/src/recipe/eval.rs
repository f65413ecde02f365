use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{common_prefix, NodeKey, RecipeError, RecipeNode, RecipeSource};
use crate::bratteli::{Diagram, EventuallyPeriodicPath, FinitePath, Label};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EvalMode {
    /// Still inside descendants; the output is the common prefix of `B`.
    Descend,
    /// Reached the pair `(w, z)`; the output is `z` followed by the input
    /// after `w`.
    Copy { z: FinitePath, copy_start: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalState {
    pub node: NodeKey,
    /// Input edges used to reach `node` (and the pair, in copy mode).
    pub input_pos: usize,
    pub mode: EvalMode,
    /// Length of the determined output before cutting to the target length.
    pub determined: usize,
    /// Input edges still needed before more output is determined; 0 once the
    /// target length is reached.
    pub more_input: usize,
}

/// Extends `start` by `labels`, following the diagram.
fn walk(d: &Diagram, start: &FinitePath, labels: &[Label]) -> Result<FinitePath, RecipeError> {
    let mut p = start.clone();
    for l in labels {
        p = d.extend(&p, l)?;
    }
    Ok(p)
}

fn lcp(paths: &[FinitePath]) -> FinitePath {
    common_prefix(paths).unwrap_or_else(|| {
        let p = &paths[0];
        FinitePath::vertex(p.start_level, &p.start)
    })
}

enum Step {
    Child(NodeKey),
    Pair(FinitePath),
}

fn step(node: &RecipeNode, p: &FinitePath) -> Result<Step, RecipeError> {
    if let Some((_, z)) = node.pairs.iter().find(|(w, _)| w == p) {
        return Ok(Step::Pair(z.clone()));
    }
    node.children
        .iter()
        .find(|c| c.a.contains(p))
        .map(|c| Step::Child(c.clone()))
        .ok_or_else(|| RecipeError::LeavesPartition(p.to_string()))
}

fn enter_root(source: &dyn RecipeSource, input: &FinitePath) -> Result<Arc<RecipeNode>, RecipeError> {
    let root = source.node(&source.root())?;
    let n0 = root.level().saturating_sub(input.start_level);
    let ok = root.a().iter().any(|a| {
        a.start_level == input.start_level
            && if input.len() >= n0 {
                input.prefix(n0) == *a
            } else {
                a.starts_with(input)
            }
    });
    if !ok {
        return Err(RecipeError::NotInDomain(input.to_string()));
    }
    Ok(root)
}

/// The part of `phi(input x)` fixed for every continuation `x`, cut to `m`
/// edges.
pub fn eval_prefix(
    source: &dyn RecipeSource,
    input: &FinitePath,
    m: usize,
) -> Result<(FinitePath, EvalState), RecipeError> {
    let d = source.diagram();
    d.check_path(input)?;
    let mut node = enter_root(source, input)?;
    let start = input.start_level;
    loop {
        let n = node.level() - start;
        if input.len() <= n {
            let out = lcp(node.b());
            let determined = out.len();
            let more = if determined >= m { 0 } else { n + 1 - input.len() };
            return Ok((
                out.prefix(m),
                EvalState {
                    node: node.key.clone(),
                    input_pos: input.len(),
                    mode: EvalMode::Descend,
                    determined,
                    more_input: more,
                },
            ));
        }
        match step(&node, &input.prefix(n + 1))? {
            Step::Pair(z) => {
                let rest: Vec<Label> = input.labels()[n + 1..].to_vec();
                let out = walk(d, &z, &rest)?;
                let determined = out.len();
                let more = m.saturating_sub(determined);
                return Ok((
                    out.prefix(m),
                    EvalState {
                        node: node.key.clone(),
                        input_pos: n + 1,
                        mode: EvalMode::Copy {
                            z,
                            copy_start: n + 1,
                        },
                        determined,
                        more_input: more,
                    },
                ));
            }
            Step::Child(k) => node = source.node(&k)?,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EpOutcome {
    Exact(EventuallyPeriodicPath),
    /// Only this prefix of the image was determined.
    Unresolved(FinitePath),
}

/// Position-free description of a node: the parts of `A` and `B` after their
/// common prefixes, by vertex index, plus the next levels of the diagram.
fn node_shape(d: &Diagram, node: &RecipeNode) -> Result<String, RecipeError> {
    let mut s = String::new();
    s.push(if node.key.reversed { 'r' } else { 'f' });
    for side in [node.a(), node.b()] {
        let pre = lcp(side);
        s.push('|');
        for p in side {
            let k = pre.end_level();
            let tail = p.suffix_from_level(k)?;
            for i in 0..=tail.len() {
                let v = tail.vertex_at(i);
                s.push_str(&d.vertex_index(k + i, v)?.to_string());
                if i < tail.len() {
                    s.push('>');
                    s.push_str(tail.steps[i].label.as_str());
                    s.push('>');
                }
            }
            s.push(';');
        }
    }
    for l in node.level()..node.level() + 3 {
        if d.last_level().is_some_and(|last| l >= last) {
            break;
        }
        let lv = d.level(l)?;
        s.push('#');
        for outs in &lv.out {
            for e in outs {
                s.push_str(&format!("{}:{},", e.label, e.target));
            }
            s.push('/');
        }
    }
    Ok(s)
}

/// Image of an eventually periodic point. Exact when a tail pair is reached,
/// or when the walk repeats a node shape at the same phase of the input's
/// period and the resulting periodic guess is confirmed on two further
/// periods; otherwise the determined prefix after `max_steps` levels.
pub fn eval_eventually_periodic(
    source: &dyn RecipeSource,
    x: &EventuallyPeriodicPath,
    max_steps: usize,
) -> Result<EpOutcome, RecipeError> {
    let d = source.diagram();
    let start = x.start_level();
    let pre_len = x.preperiod.len();
    let per_len = x.period.len();
    let root_level = source.node(&source.root())?.level();
    let mut input = x.prefix(d, root_level.saturating_sub(start))?;
    let mut node = enter_root(source, &input)?;
    let mut seen: HashMap<(usize, String), (usize, usize)> = HashMap::new();
    for _ in 0..max_steps {
        let n = node.level() - start;
        let out = lcp(node.b());
        if n >= pre_len {
            let phase = (n - pre_len) % per_len;
            let key = (phase, node_shape(d, &node)?);
            if let Some(&(n1, l1)) = seen.get(&key) {
                let l2 = out.len();
                if l2 > l1 {
                    let pre = out.prefix(l1);
                    let period: Vec<Label> = out.labels()[l1..l2].to_vec();
                    if let Ok(guess) = EventuallyPeriodicPath::new(d, pre, period, 2) {
                        let probe_len = n + 2 * (n - n1);
                        let probe = x.prefix(d, probe_len)?;
                        let (got, _) = eval_prefix(source, &probe, usize::MAX)?;
                        let long_enough = got.len() >= l2 + 2 * (l2 - l1);
                        let agrees = got
                            .steps
                            .iter()
                            .enumerate()
                            .all(|(i, s)| s.label == guess.label_at(i));
                        if long_enough && agrees {
                            return Ok(EpOutcome::Exact(guess.canonical()));
                        }
                    }
                }
            }
            seen.insert(key, (n, out.len()));
        }
        input = d.extend(&input, &x.label_at(n))?;
        match step(&node, &input)? {
            Step::Pair(z) => {
                let (pre_labels, period) = x.labels_from(n + 1);
                let pre = walk(d, &z, &pre_labels)?;
                let y = EventuallyPeriodicPath::new(d, pre, period, 1)?;
                return Ok(EpOutcome::Exact(y.canonical()));
            }
            Step::Child(k) => node = source.node(&k)?,
        }
    }
    Ok(EpOutcome::Unresolved(lcp(node.b())))
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, reverse};
    use super::*;

    fn word(d: &Diagram, w: &str) -> FinitePath {
        let labels: Vec<Label> = w.chars().map(|c| Label::new(&c.to_string())).collect();
        FinitePath::from_labels(d, 0, "root", &labels).unwrap()
    }

    fn letters(p: &FinitePath) -> String {
        p.labels().iter().map(|l| l.to_string()).collect()
    }

    #[test]
    fn odometer_adds_one() {
        let od = fixtures::odometer();
        let d = od.diagram().clone();
        let (out, st) = eval_prefix(od.as_ref(), &word(&d, "110"), 3).unwrap();
        assert_eq!(letters(&out), "001");
        assert!(matches!(st.mode, EvalMode::Copy { .. }));
        let back = reverse(od);
        let (inv, _) = eval_prefix(back.as_ref(), &word(&d, "001"), 3).unwrap();
        assert_eq!(letters(&inv), "110");
    }

    #[test]
    fn flip_flips() {
        let f = fixtures::flip();
        let d = f.diagram().clone();
        let (out, st) = eval_prefix(f.as_ref(), &word(&d, "0110"), 4).unwrap();
        assert_eq!(letters(&out), "1001");
        assert_eq!(st.mode, EvalMode::Descend);
    }

    #[test]
    fn odometer_on_all_ones() {
        let od = fixtures::odometer();
        let d = od.diagram().clone();
        let x = EventuallyPeriodicPath::new(&d, FinitePath::vertex(0, "root"), vec![Label::new("1")], 2).unwrap();
        match eval_eventually_periodic(od.as_ref(), &x, 50).unwrap() {
            EpOutcome::Exact(y) => {
                assert!(y.preperiod.is_empty());
                assert_eq!(y.period, vec![Label::new("0")]);
            }
            EpOutcome::Unresolved(p) => panic!("unresolved {p}"),
        }
    }

    #[test]
    fn copy_mode_is_exact() {
        let od = fixtures::odometer();
        let d = od.diagram().clone();
        let x = EventuallyPeriodicPath::new(&d, word(&d, "10"), vec![Label::new("1")], 2).unwrap();
        match eval_eventually_periodic(od.as_ref(), &x, 5).unwrap() {
            EpOutcome::Exact(y) => {
                let want = EventuallyPeriodicPath::new(&d, word(&d, "01"), vec![Label::new("1")], 2).unwrap();
                assert!(y.same_point(&want), "{y:?}");
            }
            EpOutcome::Unresolved(p) => panic!("unresolved {p}"),
        }
    }
}
