mod common;

use num_bigint::BigInt;

use bratteli_split::bratteli::ShadowMap;
use bratteli_split::construction::{build, relation_vectors, validate_inputs, ConstructionConfig, IssueKind, Mode};
use bratteli_split::fixtures;
use bratteli_split::homology::{h0_r_approx, h0_tail_approx, stabilization_report, verify_iso_with_modulus};
use bratteli_split::recipe::fixtures as recipes;

use common::{fit_check, strict_powers};

#[test]
fn fixture_files_match_named_fixtures() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    for name in ["zhalf", "fibonacci"] {
        let text = std::fs::read_to_string(format!("{dir}/{name}.json")).unwrap();
        let cfg: ConstructionConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(Some(cfg), fixtures::construction_by_name(name), "{name}");
    }
    let broken = std::fs::read_to_string(format!("{dir}/broken.json")).unwrap();
    assert!(serde_json::from_str::<ConstructionConfig>(&broken).is_err());
}

#[test]
fn stabilization_guard_aborts_on_a_wrong_shadow() {
    let mut b = build(&fixtures::zhalf(), 6).unwrap();
    assert!(stabilization_report(&b, 4).unwrap().pass);
    // The identity sends w_b to itself, which is not a base vertex.
    b.shadow = ShadowMap::identity();
    let r = stabilization_report(&b, 4).unwrap();
    assert!(!r.pass);
    assert!(r.aborted.is_some());
    assert!(r.rows.is_empty());
}

#[test]
fn stabilization_maps_of_zhalf() {
    let b = build(&fixtures::zhalf(), 8).unwrap();
    let r = stabilization_report(&b, 6).unwrap();
    assert!(r.pass && r.alpha_well_defined);
    for row in &r.rows {
        assert!(row.expected_shape, "level {}", row.level);
        if let Some(inj) = row.torsion_injective {
            assert!(inj, "level {}", row.level);
        }
    }
}

#[test]
fn strict_powers_torsion_grows() {
    let b = build(&strict_powers(1, 8), 5).unwrap();
    let r = stabilization_report(&b, 4).unwrap();
    assert!(r.pass);
    // Z/2^l -> Z/2^(l+1) is injective: multiplication by an even number.
    for row in r.rows.iter().filter(|row| row.torsion_multiplier.is_some()) {
        assert_eq!(row.torsion_multiplier.unwrap() % 2, 0, "level {}", row.level);
        assert_eq!(row.torsion_injective, Some(true));
    }
}

#[test]
fn wrong_modulus_is_caught() {
    let b = build(&fixtures::fibonacci(), 6).unwrap();
    assert!(verify_iso_with_modulus(&b, 4, 2).unwrap().pass);
    assert!(!verify_iso_with_modulus(&b, 4, 3).unwrap().pass);
}

#[test]
fn tail_only_homology_is_free() {
    let d = bratteli_split::bratteli::Diagram::from_config(&fixtures::fibonacci_base()).unwrap();
    let t = h0_tail_approx(&d, 5).unwrap();
    assert_eq!(t.group.free_rank, 2);
    assert!(t.group.invariant_factors.is_empty());
}

#[test]
fn split_adds_one_generator_per_level() {
    let b = build(&fixtures::fibonacci(), 6).unwrap();
    for level in 1..=5 {
        let h = h0_r_approx(&b, level).unwrap();
        assert_eq!(h.generators.len(), b.base.vertices(level).unwrap().len() + 1);
    }
    let rv = relation_vectors(&b, 5).unwrap();
    assert!(rv.iter().all(|r| r.vector.iter().sum::<BigInt>() == BigInt::from(0)));
}

#[test]
fn strict_mode_rejects_the_relaxed_fixtures() {
    let cfg = ConstructionConfig { mode: Mode::Strict, ..fixtures::zhalf() };
    let rep = validate_inputs(&cfg, Some(4));
    assert!(!rep.valid);
    assert!(rep.issues.iter().any(|i| i.kind == IssueKind::EdgeCount));
    assert!(build(&cfg, 4).is_err());
}

#[test]
fn basic_recipes_fit() {
    for name in ["odometer", "flip", "counterexample-1", "counterexample-3"] {
        let t = fit_check(recipes::by_name(name).unwrap(), 4, 3);
        assert!(t.violations.is_empty(), "{name}: {:?}", t.violations.first());
        assert!(t.pair_cases + t.child_cases > 0);
    }
}
