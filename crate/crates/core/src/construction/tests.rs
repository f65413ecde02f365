use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::*;
use crate::bratteli::{EventuallyPeriodicPath, FinitePath, Label};
use crate::fixtures;
use crate::recipe::{eval_eventually_periodic, expand, reverse, EpOutcome};

fn strict_powers(n: usize, levels: usize) -> ConstructionConfig {
    // r_l = 2^l, d_l = 2, so level l -> l+1 needs 2^(l+1) + 2 edges.
    let mults: Vec<usize> = (0..=levels).map(|l| (1usize << (l + 1)) + 2).collect();
    ConstructionConfig {
        base_diagram: fixtures::graded(n, &mults),
        r_sequence: RSequence::powers_of(2),
        split_vertex: None,
        mode: Mode::Strict,
        depth: None,
    }
}

#[test]
fn validation_cases() {
    assert!(validate_inputs(&fixtures::zhalf(), Some(6)).valid);
    assert!(validate_inputs(&fixtures::fibonacci(), Some(6)).valid);
    let mut strict = fibonacci_strict();
    let rep = validate_inputs(&strict, Some(3));
    assert!(!rep.valid);
    assert!(rep.issues.iter().all(|i| i.kind == IssueKind::EdgeCount));
    strict.r_sequence = RSequence::Explicit(vec![2, 3]);
    let rep = validate_inputs(&strict, Some(3));
    assert_eq!(rep.issues[0].kind, IssueKind::Divisibility);
    assert_eq!(rep.issues[0].level, Some(2));
    assert!(validate_inputs(&strict_powers(2, 4), Some(3)).valid);
}

fn fibonacci_strict() -> ConstructionConfig {
    ConstructionConfig {
        mode: Mode::Strict,
        ..fixtures::fibonacci()
    }
}

#[test]
fn zhalf_shape() {
    let b = build(&fixtures::zhalf(), 6).unwrap();
    let root = b.recipe.node(&b.recipe.root()).unwrap();
    assert_eq!(root.a().len(), 2);
    assert_eq!(root.children.len(), 1);
    let rv = relation_vectors(&b, 6).unwrap();
    assert_eq!(rv.len(), 6);
    for r in &rv {
        let (_, _, k) = as_difference(&r.vector).unwrap();
        assert_eq!(k, BigInt::from(2));
    }
    assert!(relation_vectors_agree(&b, 6).unwrap().pass);
}

#[test]
fn fibonacci_level_two_composition() {
    let b = build(&fixtures::fibonacci(), 4).unwrap();
    let root = b.recipe.node(&b.recipe.root()).unwrap();
    let mut ends: BTreeMap<String, usize> = BTreeMap::new();
    for p in root.a() {
        for e in b.split.out_edges(1, p.end()).unwrap() {
            *ends.entry(e.target_name.to_string()).or_default() += 1;
        }
    }
    let w_b = b.w_b(2).unwrap().to_string();
    assert_eq!(ends.get("v"), Some(&4));
    assert_eq!(ends.get("w"), Some(&2));
    assert_eq!(ends.get(&w_b), Some(&4));
}

#[test]
fn expansions_are_recipes() {
    for cfg in [fixtures::zhalf(), fixtures::fibonacci(), strict_powers(2, 8)] {
        let b = build(&cfg, 4).unwrap();
        let nodes = expand(b.recipe.as_ref(), 4).unwrap();
        assert!(!nodes.is_empty());
        assert!(shadow_relation_check(&b, 4).unwrap().pass);
        assert!(relation_vectors_agree(&b, 4).unwrap().pass);
        assert!(beta_consistency_check(&b, 6).unwrap().pass);
    }
}

#[test]
fn strict_bookkeeping() {
    // A-side paths into w_b^(l+1): r_l r_(l+1), children take (r_l - 1) r_(l+1).
    let b = build(&strict_powers(2, 4), 3).unwrap();
    let root = b.recipe.node(&b.recipe.root()).unwrap();
    let (r1, r2) = (2, 4);
    assert_eq!(root.children.len(), r1 - 1);
    let w_b2 = b.w_b(2).unwrap();
    let tail_into_wb = root.pairs.iter().filter(|(w, _)| *w.end() == w_b2).count();
    assert_eq!(tail_into_wb, r2);
    let rv = relation_vectors(&b, 3).unwrap();
    for (r, want) in rv.iter().zip([2, 4, 8]) {
        assert_eq!(as_difference(&r.vector).unwrap().2, BigInt::from(want));
    }
}

#[test]
fn beta_values() {
    let b = build(&strict_powers(2, 4), 3).unwrap();
    let wb = b.w_b(2).unwrap();
    assert_eq!(beta_of_vertex(&b, 2, &wb).unwrap(), TorsionLabel::new(1, 4));
    assert!(beta_of_vertex(&b, 2, "v0").unwrap().is_zero());
    let q = beta_of_vertex(&b, 2, &wb).unwrap();
    assert!((0..4).map(|_| q).sum::<TorsionLabel>().is_zero());
    let a = alpha_of_vertex(&b, 2, &wb).unwrap();
    assert_eq!(a.vertex, *b.w_a(2).unwrap());
    assert!(beta_of_vertex(&b, 2, "nope").is_err());
}

#[test]
fn zhalf_special_point() {
    let b = build(&fixtures::zhalf(), 6).unwrap();
    let c = &b.split;
    let x = EventuallyPeriodicPath::new(
        c,
        FinitePath::from_labels(c, 0, "root", &["3"]).unwrap(),
        vec![Label::new("1"), Label::new("2")],
        2,
    )
    .unwrap();
    let y = match eval_eventually_periodic(b.recipe.as_ref(), &x, 60).unwrap() {
        EpOutcome::Exact(y) => y,
        EpOutcome::Unresolved(p) => panic!("unresolved after {p}"),
    };
    // root -1-> b -2-> a -1-> b ...: the first B seed, then alternating.
    let want = EventuallyPeriodicPath::new(
        c,
        FinitePath::vertex(0, "root"),
        vec![Label::new("1"), Label::new("2")],
        2,
    )
    .unwrap();
    assert!(y.same_point(&want), "{y:?}");
    assert_eq!(y.prefix(c, 1).unwrap().end(), &b.w_b(1).unwrap());
    let back = reverse(b.recipe.clone());
    match eval_eventually_periodic(back.as_ref(), &y, 60).unwrap() {
        EpOutcome::Exact(z) => assert!(z.same_point(&x), "{z:?}"),
        EpOutcome::Unresolved(p) => panic!("unresolved after {p}"),
    }
}

#[test]
fn constructions_are_etale() {
    let strict3 = ConstructionConfig {
        base_diagram: fixtures::uniform(2, 6),
        r_sequence: RSequence::constant(3),
        split_vertex: None,
        mode: Mode::Strict,
        depth: None,
    };
    for cfg in [fixtures::zhalf(), fixtures::fibonacci(), strict3] {
        let b = build(&cfg, 5).unwrap();
        let n = |l| b.constraint(l);
        let v = crate::recipe::etale_verdict(b.recipe.as_ref(), &n, 5).unwrap();
        assert!(v.pass(), "{:?}", v.failed);
    }
}

#[test]
fn registry_has_seven() {
    let names: Vec<&str> = crate::recipe::fixtures::all().iter().map(|(n, _)| *n).collect();
    assert_eq!(names.len(), 7);
    assert!(names.contains(&"zhalf") && names.contains(&"fibonacci"));
}
