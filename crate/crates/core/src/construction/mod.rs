//! The main construction: a split diagram `C` over a base `D`, the recursive
//! recipe on `C`, and the maps `alpha` (into `D`) and `beta` (into `Q/Z`).

mod build;
mod config;
mod homs;
mod torsion;

pub use build::{
    build, validate_inputs, ConstructionBundle, ConstructionError, InputIssue, InputReport, IssueKind, LevelData,
    DEFAULT_DEPTH,
};
pub use config::{ConstructionConfig, Mode, RSequence, RSequenceError};
pub use homs::{
    alpha_of, alpha_of_vertex, as_difference, beta_consistency_check, beta_of, beta_of_vertex, node_relation,
    recipe_shadow_relation_check, relation_vectors, relation_vectors_agree, shadow_relation_check, AlphaVector,
    BetaReport, RelationAgreement, RelationVector, ShadowRelationReport, ShadowRelationWitness,
};
pub use torsion::TorsionLabel;

#[cfg(test)]
mod tests;
