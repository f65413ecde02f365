//! Split Bratteli diagrams, recursive path-space recipes and finite-level
//! homology of the resulting equivalence relations.

pub mod bratteli;
pub mod homology;
pub mod matrix;
pub mod aif;
pub mod cli;
pub mod construction;
pub mod splitting;
pub mod fixtures;
pub mod recipe;
