//! Bratteli diagrams: graded multigraphs with labelled edges, finite and
//! eventually periodic paths, truncation and shadow homomorphisms.

mod config;
mod diagram;
mod dot;
mod path;
mod shadow;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use config::{validate_config, DiagramConfig, EdgeConfig, TailConfig, TailRuleConfig};
pub use diagram::{
    check_simplicity, enumerate_paths, incidence_matrix, truncate, truncate_path, validate,
    Diagram, EdgeTriple, IncidenceMatrix, Level, LevelSource, OutEdge, SimplicityReport, Violation,
    ViolationKind,
};
pub use dot::to_dot;
pub use path::{EventuallyPeriodicPath, FinitePath, Step};
pub use shadow::{
    path_bijectivity_check, shadow_map_path, shadow_map_periodic, shadow_verify, BijectivityMode,
    BijectivityReport, ShadowFailure, ShadowFailureKind, ShadowMap, ShadowReport,
};

/// Vertex names are shared, immutable strings.
pub type Name = Arc<str>;

/// An edge label. Labels that are decimal integers sort numerically and come
/// before all other labels, which sort as strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Arc::from(s))
    }
}

impl From<usize> for Label {
    fn from(n: usize) -> Self {
        Label(Arc::from(n.to_string()))
    }
}

fn numeric_key(s: &str) -> Option<&str> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        let t = s.trim_start_matches('0');
        Some(if t.is_empty() { "0" } else { t })
    } else {
        None
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (numeric_key(&self.0), numeric_key(&other.0)) {
            (Some(a), Some(b)) => a
                .len()
                .cmp(&b.len())
                .then_with(|| a.cmp(b))
                .then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Label::from(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BratteliError {
    #[error("level {level} is out of range (diagram reaches levels {start}..={last})")]
    LevelOutOfRange {
        level: usize,
        start: usize,
        last: String,
    },
    #[error("unknown vertex {vertex:?} at level {level}")]
    UnknownVertex { level: usize, vertex: String },
    #[error("no edge labelled {label:?} leaves {vertex:?} at level {level}")]
    UnknownEdge {
        level: usize,
        vertex: String,
        label: String,
    },
    #[error("edge {label:?} from {vertex:?} at level {level} ends at {actual:?}, not {claimed:?}")]
    WrongTarget {
        level: usize,
        vertex: String,
        label: String,
        claimed: String,
        actual: String,
    },
    #[error("path does not start at level {expected} (starts at {actual})")]
    WrongStartLevel { expected: usize, actual: usize },
    #[error("cannot truncate a path ending at level {end} at level {at}")]
    TruncationBeyondPath { end: usize, at: usize },
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("malformed path text: {0}")]
    Parse(String),
    #[error("shadow map undefined on {vertex:?} at level {level}")]
    ShadowUndefined { level: usize, vertex: String },
    #[error("{0}")]
    Source(String),
}
