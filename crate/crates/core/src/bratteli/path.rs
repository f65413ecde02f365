use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BratteliError, Diagram, Label, Name};

/// One edge of a path, named by its label and the vertex it lands on.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub label: Label,
    pub target: Name,
}

/// A finite path starting at `start` on level `start_level`. The empty path is
/// the bare vertex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinitePath {
    pub start_level: usize,
    pub start: Name,
    pub steps: Vec<Step>,
}

impl FinitePath {
    pub fn vertex(level: usize, v: &str) -> Self {
        FinitePath {
            start_level: level,
            start: Name::from(v),
            steps: Vec::new(),
        }
    }

    /// Walks `labels` from `start` through `diagram`.
    pub fn from_labels<L: Into<Label> + Clone>(
        diagram: &Diagram,
        level: usize,
        start: &str,
        labels: &[L],
    ) -> Result<Self, BratteliError> {
        let mut p = FinitePath::vertex(level, start);
        diagram.vertex_index(level, start)?;
        for l in labels {
            p = diagram.extend(&p, &l.clone().into())?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end_level(&self) -> usize {
        self.start_level + self.steps.len()
    }

    pub fn end(&self) -> &Name {
        self.steps.last().map_or(&self.start, |s| &s.target)
    }

    /// Vertex reached after `i` edges.
    pub fn vertex_at(&self, i: usize) -> &Name {
        if i == 0 {
            &self.start
        } else {
            &self.steps[i - 1].target
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.steps.iter().map(|s| s.label.clone()).collect()
    }

    pub fn push(&mut self, label: Label, target: Name) {
        self.steps.push(Step { label, target });
    }

    pub fn concat(&self, tail: &FinitePath) -> FinitePath {
        assert_eq!(self.end_level(), tail.start_level, "paths do not compose");
        assert_eq!(self.end(), &tail.start, "paths do not compose");
        let mut out = self.clone();
        out.steps.extend(tail.steps.iter().cloned());
        out
    }

    /// First `n` edges.
    pub fn prefix(&self, n: usize) -> FinitePath {
        FinitePath {
            start_level: self.start_level,
            start: self.start.clone(),
            steps: self.steps[..n.min(self.steps.len())].to_vec(),
        }
    }

    /// The part of the path from absolute level `level` onwards.
    pub fn suffix_from_level(&self, level: usize) -> Result<FinitePath, BratteliError> {
        if level < self.start_level || level > self.end_level() {
            return Err(BratteliError::TruncationBeyondPath {
                end: self.end_level(),
                at: level,
            });
        }
        let k = level - self.start_level;
        Ok(FinitePath {
            start_level: level,
            start: self.vertex_at(k).clone(),
            steps: self.steps[k..].to_vec(),
        })
    }

    pub fn starts_with(&self, other: &FinitePath) -> bool {
        self.start_level == other.start_level
            && self.start == other.start
            && self.steps.len() >= other.steps.len()
            && self.steps[..other.steps.len()] == other.steps[..]
    }

    /// Length of the longest common prefix, counted in edges. Returns `None`
    /// when the start vertices differ.
    pub fn common_prefix_len(&self, other: &FinitePath) -> Option<usize> {
        if self.start_level != other.start_level || self.start != other.start {
            return None;
        }
        Some(
            self.steps
                .iter()
                .zip(&other.steps)
                .take_while(|(a, b)| a == b)
                .count(),
        )
    }

    /// Compact text: `v>label>w,w>label>x` or `@v` for a bare vertex.
    pub fn to_text(&self) -> String {
        if self.steps.is_empty() {
            return format!("@{}", self.start);
        }
        let mut parts = Vec::with_capacity(self.steps.len());
        let mut from = &self.start;
        for s in &self.steps {
            parts.push(format!("{}>{}>{}", from, s.label, s.target));
            from = &s.target;
        }
        parts.join(",")
    }

    /// Parses the format produced by [`FinitePath::to_text`] and checks the
    /// path against `diagram`, starting at its first level.
    pub fn parse(text: &str, diagram: &Diagram) -> Result<Self, BratteliError> {
        let level = diagram.start_level();
        let text = text.trim();
        if let Some(v) = text.strip_prefix('@') {
            diagram.vertex_index(level, v)?;
            return Ok(FinitePath::vertex(level, v));
        }
        let tokens = parse_tokens(text)?;
        let Some(first) = tokens.first() else {
            return Err(BratteliError::Parse("empty path".into()));
        };
        let mut path = FinitePath::vertex(level, &first.0);
        diagram.vertex_index(level, &first.0)?;
        for (from, label, to) in &tokens {
            if path.end().as_ref() != from.as_str() {
                return Err(BratteliError::Parse(format!(
                    "token {from}>{label}>{to} does not continue from {}",
                    path.end()
                )));
            }
            path = diagram.extend(&path, &Label::new(label))?;
            if path.end().as_ref() != to.as_str() {
                return Err(BratteliError::WrongTarget {
                    level: path.end_level() - 1,
                    vertex: from.clone(),
                    label: label.clone(),
                    claimed: to.clone(),
                    actual: path.end().to_string(),
                });
            }
        }
        Ok(path)
    }
}

pub(crate) fn parse_tokens(text: &str) -> Result<Vec<(String, String, String)>, BratteliError> {
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = tok.split('>').collect();
        if parts.len() != 3 || parts.iter().any(|p| p.is_empty()) {
            return Err(BratteliError::Parse(format!(
                "edge token {tok:?} is not of the form from>label>to"
            )));
        }
        out.push((parts[0].to_string(), parts[1].to_string(), parts[2].to_string()));
    }
    Ok(out)
}

impl fmt::Debug for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.start_level, self.to_text())
    }
}

impl fmt::Display for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// An infinite path that repeats the labels of `period` forever after
/// `preperiod`. Labels name edges at every level, so the vertices along the
/// repeated part are recovered by walking the diagram; their names may change
/// from level to level.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventuallyPeriodicPath {
    pub preperiod: FinitePath,
    pub period: Vec<Label>,
}

impl EventuallyPeriodicPath {
    /// Checks that the period is nonempty and that the path can be walked in
    /// `diagram` for `check_periods` repetitions of the period.
    pub fn new(
        diagram: &Diagram,
        preperiod: FinitePath,
        period: Vec<Label>,
        check_periods: usize,
    ) -> Result<Self, BratteliError> {
        if period.is_empty() {
            return Err(BratteliError::Parse("empty period".into()));
        }
        diagram.check_path(&preperiod)?;
        let ep = EventuallyPeriodicPath { preperiod, period };
        ep.prefix(diagram, ep.preperiod.len() + check_periods.max(1) * ep.period.len())?;
        Ok(ep)
    }

    pub fn start_level(&self) -> usize {
        self.preperiod.start_level
    }

    pub fn label_at(&self, i: usize) -> Label {
        let n = self.preperiod.len();
        if i < n {
            self.preperiod.steps[i].label.clone()
        } else {
            self.period[(i - n) % self.period.len()].clone()
        }
    }

    /// The first `n` edges as a finite path.
    pub fn prefix(&self, diagram: &Diagram, n: usize) -> Result<FinitePath, BratteliError> {
        if n <= self.preperiod.len() {
            return Ok(self.preperiod.prefix(n));
        }
        let mut p = self.preperiod.clone();
        for i in self.preperiod.len()..n {
            p = diagram.extend(&p, &self.label_at(i))?;
        }
        Ok(p)
    }

    /// Labels from position `i` onwards, as a (preperiod, period) pair of
    /// label lists.
    pub fn labels_from(&self, i: usize) -> (Vec<Label>, Vec<Label>) {
        let n = self.preperiod.len();
        if i <= n {
            (
                self.preperiod.labels()[i..].to_vec(),
                self.period.clone(),
            )
        } else {
            let k = (i - n) % self.period.len();
            let mut per = self.period[k..].to_vec();
            per.extend_from_slice(&self.period[..k]);
            (Vec::new(), per)
        }
    }

    /// Shortest period, then shortest preperiod.
    pub fn canonical(&self) -> EventuallyPeriodicPath {
        let p = &self.period;
        let n = p.len();
        let mut per = p.clone();
        for d in 1..=n {
            if n.is_multiple_of(d) && (d..n).all(|i| p[i] == p[i - d]) {
                per = p[..d].to_vec();
                break;
            }
        }
        let mut pre = self.preperiod.clone();
        while let Some(last) = pre.steps.last() {
            if last.label == *per.last().expect("nonempty period") {
                pre.steps.pop();
                let l = per.pop().expect("nonempty period");
                per.insert(0, l);
            } else {
                break;
            }
        }
        EventuallyPeriodicPath {
            preperiod: pre,
            period: per,
        }
    }

    /// Same infinite path, compared after canonicalization.
    pub fn same_point(&self, other: &EventuallyPeriodicPath) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.preperiod == b.preperiod && a.period == b.period
    }

    /// `ep(e1,...;p1,...)` where each token is `from>label>to`. The period is
    /// written with the vertex names of its first traversal.
    pub fn to_text(&self, diagram: &Diagram) -> Result<String, BratteliError> {
        let full = self.prefix(diagram, self.preperiod.len() + self.period.len())?;
        let mut pre = Vec::new();
        let mut per = Vec::new();
        let mut from = full.start.clone();
        for (i, s) in full.steps.iter().enumerate() {
            let tok = format!("{}>{}>{}", from, s.label, s.target);
            if i < self.preperiod.len() {
                pre.push(tok);
            } else {
                per.push(tok);
            }
            from = s.target.clone();
        }
        let start = if self.preperiod.is_empty() {
            String::new()
        } else {
            pre.join(",")
        };
        Ok(format!("ep({start};{})", per.join(",")))
    }

    /// Parses `ep(...;...)`. The path starts at the diagram's first level.
    pub fn parse(text: &str, diagram: &Diagram) -> Result<Self, BratteliError> {
        let t = text.trim();
        let inner = t
            .strip_prefix("ep(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| BratteliError::Parse(format!("{t:?} is not of the form ep(...;...)")))?;
        let (pre_txt, per_txt) = inner
            .split_once(';')
            .ok_or_else(|| BratteliError::Parse("missing ';' between preperiod and period".into()))?;
        let pre_tokens = parse_tokens(pre_txt)?;
        let per_tokens = parse_tokens(per_txt)?;
        if per_tokens.is_empty() {
            return Err(BratteliError::Parse("empty period".into()));
        }
        let start = pre_tokens
            .first()
            .or(per_tokens.first())
            .map(|t| t.0.clone())
            .expect("nonempty");
        let mut joined: Vec<String> = pre_tokens
            .iter()
            .chain(per_tokens.iter())
            .map(|(a, b, c)| format!("{a}>{b}>{c}"))
            .collect();
        if joined.is_empty() {
            joined.push(format!("@{start}"));
        }
        let walked = FinitePath::parse(&joined.join(","), diagram)?;
        let preperiod = walked.prefix(pre_tokens.len());
        let period = walked.steps[pre_tokens.len()..]
            .iter()
            .map(|s| s.label.clone())
            .collect();
        EventuallyPeriodicPath::new(diagram, preperiod, period, 2)
    }
}

impl fmt::Debug for EventuallyPeriodicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let per: Vec<&str> = self.period.iter().map(|l| l.as_str()).collect();
        write!(f, "ep({:?}; ({})^inf)", self.preperiod, per.join(" "))
    }
}
