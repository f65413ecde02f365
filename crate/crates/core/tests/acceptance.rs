//! One line per acceptance criterion. Runs without the test harness so the
//! lines always appear, in order, and the process fails if any criterion does.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bratteli_split::aif::{
    flip_check_fg, flip_check_rational_family, AifError, RationalFamilyParams, SemigroupElement,
};
use bratteli_split::bratteli::{path_bijectivity_check, shadow_verify, EventuallyPeriodicPath, FinitePath, Label};
use bratteli_split::construction::{
    beta_consistency_check, build, shadow_relation_check, ConstructionBundle, ConstructionConfig, Mode, RSequence,
    TorsionLabel,
};
use bratteli_split::fixtures;
use bratteli_split::homology::{group_from_presentation, h0_r_approx, pushed_relations, verify_iso_finite_level, FgAbelianGroup};
use bratteli_split::recipe::{
    eval_eventually_periodic, etale_verdict, fixtures as recipes, reverse, EpOutcome,
};

use common::{fit_check, naive_invariant_factors, random_matrix, random_strict_config, strict_powers};

/// Criterion 1 wall-clock budget, seconds.
const ZHALF_BUDGET_S: f64 = 5.0;
/// Seed for every randomized criterion.
const SEED: u64 = 0x5eed_b4a7;
const RANDOM_CONFIGS: usize = 20;
const SNF_MATRICES: usize = 200;
const AIF_PAIRS: usize = 100;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn strict3() -> ConstructionConfig {
    ConstructionConfig {
        base_diagram: fixtures::uniform(2, 6),
        r_sequence: RSequence::constant(3),
        split_vertex: None,
        mode: Mode::Strict,
        depth: None,
    }
}

/// Invariant factors and free rank at `level`, from the library and from the
/// naive oracle on the same relations; they must agree.
fn h0_both(b: &ConstructionBundle, level: usize) -> Result<FgAbelianGroup, String> {
    let h = h0_r_approx(b, level).map_err(|e| e.to_string())?;
    let rels = pushed_relations(b, level).map_err(|e| e.to_string())?;
    let n = h.generators.len();
    let rows: Vec<Vec<i64>> = rels.iter().map(|r| r.iter().map(|x| x.to_i64().expect("small")).collect()).collect();
    let diag = if rows.is_empty() { Vec::new() } else { naive_invariant_factors(&rows) };
    let oracle = FgAbelianGroup::from_diagonal(n, &diag);
    ensure(oracle == h.group, || format!("level {level}: library {} but oracle {}", h.group, oracle))?;
    Ok(h.group)
}

fn expect_group(g: &FgAbelianGroup, free: usize, factors: &[u64], level: usize) -> Result<(), String> {
    let want: Vec<BigInt> = factors.iter().map(|&x| BigInt::from(x)).collect();
    ensure(g.free_rank == free && g.invariant_factors == want, || {
        format!("level {level}: got {g}, want rank {free} factors {factors:?}")
    })
}

fn iso(b: &ConstructionBundle, level: usize) -> Result<(), String> {
    let r = verify_iso_finite_level(b, level).map_err(|e| e.to_string())?;
    ensure(r.pass, || format!("level {level}: iso check failed: {:?}", r.failure))
}

fn c1_zhalf() -> Verdict {
    let t0 = Instant::now();
    let b = build(&fixtures::zhalf(), 12).map_err(|e| e.to_string())?;
    for level in 1..=12 {
        expect_group(&h0_both(&b, level)?, 1, &[2], level)?;
        iso(&b, level)?;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < ZHALF_BUDGET_S, || format!("took {secs:.2}s, budget {ZHALF_BUDGET_S}s"))?;
    Ok(format!("L=1..12 give Z + Z/2, iso holds, {secs:.2}s < {ZHALF_BUDGET_S}s"))
}

fn c2_fibonacci() -> Verdict {
    let b = build(&fixtures::fibonacci(), 10).map_err(|e| e.to_string())?;
    for level in 1..=10 {
        expect_group(&h0_both(&b, level)?, 2, &[2], level)?;
        iso(&b, level)?;
    }
    Ok("L=1..10 give Z^2 + Z/2, iso holds".into())
}

fn c3_general_r() -> Verdict {
    let mut shapes = Vec::new();
    for n in [1, 2] {
        let cfg = strict_powers(n, 8);
        let b = build(&cfg, 6).map_err(|e| e.to_string())?;
        for level in 1..=6 {
            let free = b.base.vertices(level).map_err(|e| e.to_string())?.len();
            expect_group(&h0_both(&b, level)?, free, &[1 << level], level)?;
        }
        shapes.push(format!("|V|={n}"));
    }
    Ok(format!("r_l = 2^l, L=1..6, factors [2^L] and free rank |V_L| for {}", shapes.join(", ")))
}

fn c4_fitting() -> Verdict {
    let mut pairs = 0;
    let mut children = 0;
    // one vertex per level keeps the strict case at 6 edges per step
    let strict = ConstructionConfig { base_diagram: fixtures::uniform(1, 6), ..strict3() };
    for cfg in [fixtures::zhalf(), fixtures::fibonacci(), strict] {
        let b = build(&cfg, 6).map_err(|e| e.to_string())?;
        let t = fit_check(b.recipe.clone(), 5, 3);
        ensure(t.violations.is_empty(), || {
            format!("{} violations, first: {}", t.violations.len(), t.violations[0])
        })?;
        pairs += t.pair_cases;
        children += t.child_cases;
    }
    Ok(format!("depth 5, suffixes <= 3: {pairs} pair cases and {children} child cases, 0 violations"))
}

fn verdict_of(b: &ConstructionBundle, depth: usize) -> Result<(), String> {
    let n = |l: usize| b.constraint(l);
    let v = etale_verdict(b.recipe.as_ref(), &n, depth).map_err(|e| e.to_string())?;
    ensure(v.pass(), || format!("{:?} failed {:?}", b.config.base_diagram.levels.get(1), v.failed))
}

fn c5_hypotheses() -> Verdict {
    for cfg in [fixtures::zhalf(), fixtures::fibonacci()] {
        verdict_of(&build(&cfg, 7).map_err(|e| e.to_string())?, 6)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..RANDOM_CONFIGS {
        let cfg = random_strict_config(&mut rng, 4);
        let b = build(&cfg, 7).map_err(|e| format!("random config {i}: {e}"))?;
        verdict_of(&b, 6).map_err(|e| format!("random config {i}: {e}"))?;
    }
    let id = |l: usize| l;
    let c1 = etale_verdict(recipes::counterexample_1().as_ref(), &id, 6).map_err(|e| e.to_string())?;
    let w = c1.disjoint.witness.clone().ok_or("counterexample-1 has no witness")?;
    ensure(!c1.pass() && w.level == 1 && w.vertex == "a", || format!("counterexample-1: {w:?}"))?;

    let c2 = etale_verdict(recipes::counterexample_2().as_ref(), &id, 6).map_err(|e| e.to_string())?;
    let w = c2.disjoint.witness.clone().ok_or("counterexample-2 has no witness")?;
    let s = c2.disjoint.single_witness.clone().ok_or("counterexample-2 has no single witness")?;
    ensure(
        !c2.pass() && w.level == 1 && (w.vertex == "b" || w.vertex == "c") && s.level == 2 && s.vertex == "a",
        || format!("counterexample-2: {w:?} / {s:?}"),
    )?;

    let c3 = etale_verdict(recipes::counterexample_3().as_ref(), &id, 6).map_err(|e| e.to_string())?;
    let x = c3.disjoint.cross_branch_witness.clone().ok_or("counterexample-3 has no cross-branch witness")?;
    ensure(
        !c3.pass() && x.level >= 2 && x.a_node[0] != x.b_node[0] && !c3.highly_symmetric.pass,
        || format!("counterexample-3: {x:?}, symmetric {}", c3.highly_symmetric.pass),
    )?;
    Ok(format!(
        "2 fixtures and {RANDOM_CONFIGS} random strict configs pass to depth 6; \
         counterexamples fail at (1,a), (1,{})/(2,a), cross-branch level {}",
        w.vertex, x.level
    ))
}

fn c6_special_point() -> Verdict {
    // root->a carries labels 3,4 and root->a#b@1 carries 1,2. The input is
    // 3 then (1 2) forever; the image is (1 2) forever from the root.
    let b = build(&fixtures::zhalf(), 8).map_err(|e| e.to_string())?;
    let d = b.recipe.diagram();
    let lab = |s: &str| Label::new(s);
    let pre = d.extend(&FinitePath::vertex(0, "root"), &lab("3")).map_err(|e| e.to_string())?;
    let x = EventuallyPeriodicPath::new(d, pre, vec![lab("1"), lab("2")], 2).map_err(|e| e.to_string())?;
    let want = EventuallyPeriodicPath::new(d, FinitePath::vertex(0, "root"), vec![lab("1"), lab("2")], 2)
        .map_err(|e| e.to_string())?;
    let y = match eval_eventually_periodic(b.recipe.as_ref(), &x, 64).map_err(|e| e.to_string())? {
        EpOutcome::Exact(y) => y,
        EpOutcome::Unresolved(p) => return Err(format!("unresolved after {p}")),
    };
    ensure(y.same_point(&want), || format!("image {}", y.to_text(d).unwrap_or_default()))?;
    let rev = reverse(b.recipe.clone());
    let back = match eval_eventually_periodic(rev.as_ref(), &y, 64).map_err(|e| e.to_string())? {
        EpOutcome::Exact(z) => z,
        EpOutcome::Unresolved(p) => return Err(format!("reverse unresolved after {p}")),
    };
    ensure(back.same_point(&x), || format!("round trip gave {}", back.to_text(d).unwrap_or_default()))?;
    Ok(format!(
        "{} -> {} -> back",
        x.to_text(d).map_err(|e| e.to_string())?,
        y.to_text(d).map_err(|e| e.to_string())?
    ))
}

fn c7_beta() -> Verdict {
    let mut names = Vec::new();
    let configs = [
        ("zhalf", fixtures::zhalf()),
        ("fibonacci", fixtures::fibonacci()),
        ("strict-r3", strict3()),
        ("strict-powers", strict_powers(2, 10)),
    ];
    for (name, cfg) in configs {
        let b = build(&cfg, 8).map_err(|e| format!("{name}: {e}"))?;
        let r = beta_consistency_check(&b, 8).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.pass, || format!("{name}: {:?}", r.failure))?;
        for case in ["first level", "w_a", "w_b"] {
            ensure(r.cases.contains_key(case), || format!("{name}: case {case} not exercised"))?;
        }
        names.push(name);
    }
    Ok(format!("depth 8 on {}; first-level, w_a and w_b cases all exercised", names.join(", ")))
}

fn c8_snf_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    for i in 0..SNF_MATRICES {
        let m = random_matrix(&mut rng, 8, 20);
        let rels: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        // cokernel of the row space: Z^cols / rows
        let lib = group_from_presentation(m[0].len(), &rels);
        let oracle = FgAbelianGroup::from_diagonal(m[0].len(), &naive_invariant_factors(&m));
        ensure(lib == oracle, || format!("matrix {i} {m:?}: library {lib}, oracle {oracle}"))?;
    }
    Ok(format!("{SNF_MATRICES} random matrices up to 8x8, entries in [-20, 20], identical factors"))
}

fn random_element<R: Rng>(rng: &mut R, primes: &[u64], e: u64) -> SemigroupElement {
    let mut den = BigInt::from(1);
    for &p in primes {
        for _ in 0..rng.gen_range(0..=3) {
            den *= p;
        }
    }
    let d = BigRational::new(BigInt::from(rng.gen_range(1..=60)), den);
    let t = TorsionLabel::new(rng.gen_range(0..e as i128), e);
    SemigroupElement::new(d, t).expect("positive d")
}

fn family_run(primes: &[u64], dens: &[u64], seed: u64) -> Result<(), String> {
    let params = RationalFamilyParams::new(primes, dens).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..AIF_PAIRS {
        let x = random_element(&mut rng, primes, params.e_generator());
        let y = random_element(&mut rng, primes, params.e_generator());
        let t = flip_check_rational_family(&x, &y, &params).map_err(|e| e.to_string())?;
        ensure(t.pass, || format!("{x} (x) {y} fails"))?;
        if let (Some(l), Some(r)) = (&t.lhs, &t.rhs) {
            ensure(l == r, || format!("{x} (x) {y}: sides differ"))?;
            // Under multiplication D (x) D -> D the normal form
            // k (1/N,0)^2 + pq (c,1/r)^2 must land on d_x d_y.
            let dec = t.decomposition.as_ref().ok_or("trace without decomposition")?;
            let n: BigInt = l.n.parse().map_err(|_| "bad N")?;
            let k: BigInt = l.free.parse().map_err(|_| "bad free part")?;
            let c: BigRational = dec.c_hat.parse().map_err(|_| "bad c")?;
            let got = BigRational::new(k, &n * &n) + &c * &c * BigRational::from_integer(BigInt::from(l.torsion_square));
            ensure(got == &x.d * &y.d, || format!("{x} (x) {y}: product {got}, want {}", &x.d * &y.d))?;
        }
    }
    Ok(())
}

fn c9_aif() -> Verdict {
    family_run(&[2], &[2], SEED ^ 9)?;
    family_run(&[2, 3], &[3], SEED ^ 10)?;
    let big = |x: u64| BigInt::from(x);
    let zz2 = FgAbelianGroup { free_rank: 1, invariant_factors: vec![big(2)] };
    let f = flip_check_fg(&zz2);
    ensure(!f.pass && f.offending == Some(("0".to_string(), "2".to_string())), || format!("Z + Z/2: {f:?}"))?;
    let z6 = group_from_presentation(2, &[vec![big(2), big(0)], vec![big(0), big(3)]]);
    ensure(flip_check_fg(&z6).pass, || format!("Z/2 + Z/3 ({z6}) should pass"))?;
    ensure(RationalFamilyParams::new(&[], &[2]) == Err(AifError::DCyclic), || "cyclic D accepted".into())?;
    ensure(
        RationalFamilyParams::new(&[2], &[3]) == Err(AifError::DivisibilityBroken { prime: 3, denominator: 3 }),
        || "broken divisibility accepted".into(),
    )?;
    Ok(format!(
        "{AIF_PAIRS} pairs each for Z[1/2],(1/2)Z and Z[1/6],(1/3)Z; Z+Z/2 fails on (0,2); Z/2+Z/3 passes; guards raise"
    ))
}

fn c10_shadow() -> Verdict {
    let mut configs = vec![fixtures::zhalf(), fixtures::fibonacci(), strict3(), strict_powers(2, 8)];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 11);
    configs.extend((0..5).map(|_| random_strict_config(&mut rng, 4)));
    let count = configs.len();
    for (i, cfg) in configs.into_iter().enumerate() {
        let b = build(&cfg, 6).map_err(|e| format!("config {i}: {e}"))?;
        let s = shadow_verify(&b.shadow, &b.split, &b.base, 6);
        ensure(s.pass, || format!("config {i}: shadow {:?}", s.failures.first()))?;
        let p = path_bijectivity_check(&b.shadow, &b.split, &b.base, 6, 20_000).map_err(|e| e.to_string())?;
        ensure(p.pass, || format!("config {i}: bijectivity {:?}", p.witness))?;
        let depth = if b.config.mode == Mode::Strict && b.r(2).unwrap_or(0) > 3 { 3 } else { 5 };
        let r = shadow_relation_check(&b, depth).map_err(|e| e.to_string())?;
        ensure(r.pass, || format!("config {i}: shadow relation {:?}", r.witness))?;
    }
    Ok(format!("{count} bundles: shadow and bijectivity to depth 6, shadow relations hold"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 zhalf homology L=1..12", c1_zhalf),
        ("2 fibonacci homology L=1..10", c2_fibonacci),
        ("3 general r = 2^l", c3_general_r),
        ("4 fitting clauses", c4_fitting),
        ("5 etale hypotheses", c5_hypotheses),
        ("6 special point", c6_special_point),
        ("7 beta consistency", c7_beta),
        ("8 snf oracle", c8_snf_oracle),
        ("9 flip criterion", c9_aif),
        ("10 shadow suite", c10_shadow),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t0 = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("{tag} criterion {name}: {detail} [{:.2}s]", t0.elapsed().as_secs_f64());
    }
    if failed == 0 {
        println!("acceptance: 10/10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
