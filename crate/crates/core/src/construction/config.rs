use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bratteli::DiagramConfig;

/// The divisibility chain `r_1 | r_2 | …`. `r_0` is taken to be 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RSequence {
    /// `r_1, r_2, …, r_n`; later terms repeat `r_n`.
    Explicit(Vec<u64>),
    /// `prefix`, then each further term is `ratio` times the previous one.
    Geometric { prefix: Vec<u64>, ratio: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RSequenceError {
    #[error("the r sequence is empty")]
    Empty,
    #[error("r_{level} overflows 64 bits")]
    Overflow { level: usize },
}

impl RSequence {
    pub fn constant(r: u64) -> Self {
        RSequence::Explicit(vec![r])
    }

    pub fn powers_of(base: u64) -> Self {
        RSequence::Geometric {
            prefix: vec![base],
            ratio: base,
        }
    }

    /// `r_level`, with `r_0 = 1`.
    pub fn r(&self, level: usize) -> Result<u64, RSequenceError> {
        if level == 0 {
            return Ok(1);
        }
        let (prefix, ratio) = match self {
            RSequence::Explicit(v) => (v, 1),
            RSequence::Geometric { prefix, ratio } => (prefix, *ratio),
        };
        let last = *prefix.last().ok_or(RSequenceError::Empty)?;
        if level <= prefix.len() {
            return Ok(prefix[level - 1]);
        }
        let mut x = last;
        for l in prefix.len() + 1..=level {
            x = x.checked_mul(ratio).ok_or(RSequenceError::Overflow { level: l })?;
        }
        Ok(x)
    }

    /// `d_level = r_level / r_(level-1)`; `None` when the division is not
    /// exact.
    pub fn d(&self, level: usize) -> Result<Option<u64>, RSequenceError> {
        let (a, b) = (self.r(level)?, self.r(level.saturating_sub(1))?);
        if level == 0 {
            return Ok(Some(1));
        }
        Ok((b != 0 && a % b == 0).then(|| a / b))
    }

    pub fn is_constant_two(&self, up_to: usize) -> Result<bool, RSequenceError> {
        for l in 1..=up_to {
            if self.r(l)? != 2 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every pair of consecutive vertices has at least `r_l + d_l` edges.
    Strict,
    /// `r_l = 2` throughout; only the edges actually consumed are required.
    R2Relaxed,
}

/// JSON schema `construction-v1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionConfig {
    pub base_diagram: DiagramConfig,
    pub r_sequence: RSequence,
    /// Vertex split at every level; the last vertex of each level when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_vertex: Option<String>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}
