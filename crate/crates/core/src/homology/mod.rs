//! Smith normal form, finitely generated abelian groups, and finite-level
//! approximations of H0.

mod approx;
mod group;
mod snf;

pub use approx::{
    h0_r_approx, h0_tail_approx, normal_form, pushed_relations, pushforward, stabilization_report,
    verify_iso_finite_level, verify_iso_with_modulus, H0Approx, IsoReport, NormalForm, StabilizationReport,
    StabilizationRow, TailApprox,
};
pub use group::{group_from_presentation, FgAbelianGroup};
pub use snf::{snf, SnfResult};
