//! Finite-level H0 of the Z[1/2] + Z/2 construction, level by level, with
//! the maps between consecutive levels.

use bratteli_split::construction::build;
use bratteli_split::fixtures;
use bratteli_split::homology::{h0_r_approx, stabilization_report, verify_iso_finite_level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = build(&fixtures::zhalf(), 10)?;
    for level in 1..=10 {
        let h = h0_r_approx(&b, level)?;
        let iso = verify_iso_finite_level(&b, level)?;
        println!(
            "L={level:>2}  H0 ~ {:<10} generators {:?}  iso to Z^n + Z/{}: {}",
            h.group.to_string(),
            h.generators,
            iso.modulus,
            iso.pass
        );
    }
    let stab = stabilization_report(&b, 6)?;
    for row in &stab.rows {
        if let (Some(k), Some(inj)) = (row.torsion_multiplier, row.torsion_injective) {
            println!("level {} -> {}: torsion class times {k}, injective {inj}", row.level, row.level + 1);
        }
    }
    Ok(())
}
