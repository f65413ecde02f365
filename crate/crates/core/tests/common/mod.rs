#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use bratteli_split::bratteli::{
    enumerate_paths, Diagram, DiagramConfig, EdgeConfig, FinitePath, TailConfig, TailRuleConfig,
};
use bratteli_split::construction::{ConstructionConfig, Mode, RSequence};
use bratteli_split::fixtures;
use bratteli_split::recipe::{eval_prefix, expand, reverse, RecipeSource};

/// Invariant factors by plain Euclidean row and column reduction on the
/// first nonzero entry, then a gcd/lcm pass over the diagonal. Shares no
/// code with the library's elimination.
pub fn naive_invariant_factors(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // any nonzero entry in the remaining block
        let Some((pi, pj)) = (t..m).flat_map(|i| (t..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                while !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    let pivot_row = a[t].clone();
                    for (x, p) in a[i].iter_mut().zip(&pivot_row).skip(t) {
                        *x -= &q * p;
                    }
                    if !a[i][t].is_zero() {
                        a.swap(t, i);
                    }
                }
            }
            for j in t + 1..n {
                while !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let s = &q * &row[t];
                        row[j] -= s;
                    }
                    if !a[t][j].is_zero() {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                        dirty = true;
                    }
                }
            }
            if !dirty && (t + 1..m).all(|i| a[i][t].is_zero()) {
                break;
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    // Normalize to a divisibility chain: (x, y) -> (gcd, lcm) until stable.
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..diag.len() {
            for j in i + 1..diag.len() {
                let g = diag[i].gcd(&diag[j]);
                if g != diag[i] {
                    let l = diag[i].lcm(&diag[j]);
                    diag[i] = g;
                    diag[j] = l;
                    changed = true;
                }
            }
        }
    }
    diag
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    // cofactor expansion; callers only take small minors
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        n => {
            let mut s = BigInt::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect()).collect();
                let term = &m[0][j] * det(&minor);
                if j % 2 == 0 {
                    s += term;
                } else {
                    s -= term;
                }
            }
            s
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Invariant factors as quotients of determinantal divisors
/// `d_k = gcd of all k x k minors`. Exponential; for small matrices only.
pub fn determinantal_invariant_factors(rows: &[Vec<i64>]) -> Vec<BigInt> {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    let mut prev = BigInt::one();
    let mut out = Vec::new();
    for k in 1..=m.min(n) {
        let mut g = BigInt::zero();
        for rs in subsets(m, k) {
            for cs in subsets(n, k) {
                let minor: Vec<Vec<BigInt>> =
                    rs.iter().map(|&i| cs.iter().map(|&j| BigInt::from(rows[i][j])).collect()).collect();
                g = g.gcd(&det(&minor));
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out
}

/// Divisibility chains used for random strict configs.
const CHAINS: [&[u64]; 4] = [&[2], &[3], &[2, 4], &[2, 2, 4]];

/// A strict-mode config on `n` vertices per level with random
/// multiplicities, each pair between `r_l + d_l` and two more. Levels past
/// the listed ones repeat the last level's edges.
pub fn random_strict_config<R: Rng>(rng: &mut R, listed: usize) -> ConstructionConfig {
    let n = rng.gen_range(1..=3);
    let chain = CHAINS[rng.gen_range(0..CHAINS.len())];
    let r = RSequence::Explicit(chain.to_vec());
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut levels = vec![vec!["root".to_string()]];
    let mut edges = Vec::new();
    let need = |l: usize| (r.r(l + 1).unwrap() + r.d(l + 1).unwrap().unwrap()) as usize;
    let mut tail_mults = Vec::new();
    for level in 0..listed {
        let from: Vec<String> = if level == 0 { vec!["root".into()] } else { names.clone() };
        let mut mults = Vec::new();
        for v in &from {
            for w in &names {
                let k = need(level) + rng.gen_range(0..=2);
                mults.push((v.clone(), w.clone(), k));
                for i in 0..k {
                    edges.push(EdgeConfig {
                        level,
                        from: v.clone(),
                        label: format!("{w}.{i}"),
                        to: w.clone(),
                    });
                }
            }
        }
        levels.push(names.clone());
        if level + 1 == listed {
            tail_mults = mults;
        }
    }
    // the tail must also meet the bound for the constant part of r
    let tail_need = need(listed + 5);
    let rules = tail_mults
        .iter()
        .flat_map(|(v, w, k)| {
            let k = (*k).max(tail_need);
            (0..k).map(move |i| TailRuleConfig {
                from: v.clone(),
                label: format!("{w}.{i}"),
                to: w.clone(),
            })
        })
        .collect();
    let split_vertex = rng.gen_bool(0.5).then(|| names[rng.gen_range(0..n)].clone());
    ConstructionConfig {
        base_diagram: DiagramConfig {
            start_level: 0,
            levels,
            edges,
            stationary_tail: Some(TailConfig {
                from_level: listed,
                rules,
            }),
        },
        r_sequence: r,
        split_vertex,
        mode: Mode::Strict,
        depth: None,
    }
}

/// `r_l = 2^l` on `n` vertices with `2^(l+1) + 2` edges between any two
/// vertices of consecutive levels, listed down to `levels`.
pub fn strict_powers(n: usize, levels: usize) -> ConstructionConfig {
    let mults: Vec<usize> = (0..=levels).map(|l| (1usize << (l + 1)) + 2).collect();
    ConstructionConfig {
        base_diagram: fixtures::graded(n, &mults),
        r_sequence: RSequence::powers_of(2),
        split_vertex: None,
        mode: Mode::Strict,
        depth: None,
    }
}

/// Paths of length `0..=max_len` starting at the end of `p`.
pub fn suffixes(d: &Diagram, p: &FinitePath, max_len: usize) -> Vec<FinitePath> {
    let lvl = p.end_level();
    let mut out = Vec::new();
    let start = FinitePath::vertex(lvl, p.end());
    for k in 0..=max_len {
        out.extend(enumerate_paths(d, lvl, lvl + k, Some(&start)).unwrap());
    }
    out
}

/// `p` followed by the labels of `t`.
pub fn extend_by_labels(d: &Diagram, p: &FinitePath, t: &FinitePath) -> FinitePath {
    let mut q = p.clone();
    for l in t.labels() {
        q = d.extend(&q, &l).unwrap();
    }
    q
}

fn compatible(x: &FinitePath, y: &FinitePath) -> bool {
    x.starts_with(y) || y.starts_with(x)
}

#[derive(Debug, Default)]
pub struct FitTally {
    pub pair_cases: usize,
    pub child_cases: usize,
    pub violations: Vec<String>,
}

fn fit_one_direction(src: &dyn RecipeSource, depth: usize, suffix_len: usize, tally: &mut FitTally) {
    let d = src.diagram();
    for en in expand(src, depth).unwrap() {
        for (w, z) in &en.node.pairs {
            for t in suffixes(d, w, suffix_len) {
                tally.pair_cases += 1;
                let input = w.concat(&t);
                let want = extend_by_labels(d, z, &t);
                match eval_prefix(src, &input, want.len()) {
                    Ok((got, _)) if got == want => {}
                    Ok((got, _)) => tally.violations.push(format!("{}: {input} -> {got}, want {want}", src.name())),
                    Err(e) => tally.violations.push(format!("{}: {input}: {e}", src.name())),
                }
            }
        }
        for c in &en.node.children {
            for a in &c.a {
                for t in suffixes(d, a, suffix_len) {
                    tally.child_cases += 1;
                    let input = a.concat(&t);
                    match eval_prefix(src, &input, usize::MAX) {
                        Ok((got, _)) if c.b.iter().any(|b| compatible(&got, b)) => {}
                        Ok((got, _)) => {
                            tally.violations.push(format!("{}: child input {input} -> {got} leaves B", src.name()))
                        }
                        Err(e) => tally.violations.push(format!("{}: {input}: {e}", src.name())),
                    }
                }
            }
        }
    }
}

/// Both fitting clauses on every node down to `depth`,
/// over all suffixes of length at most `suffix_len`. The child clause is run
/// on the recipe and on its reverse, which together give `phi(A_i X) = B_i X`.
pub fn fit_check(src: std::sync::Arc<dyn RecipeSource>, depth: usize, suffix_len: usize) -> FitTally {
    let mut tally = FitTally::default();
    fit_one_direction(src.as_ref(), depth, suffix_len, &mut tally);
    let rev = reverse(src);
    fit_one_direction(rev.as_ref(), depth, suffix_len, &mut tally);
    tally
}

pub fn random_matrix<R: Rng>(rng: &mut R, max_dim: usize, bound: i64) -> Vec<Vec<i64>> {
    let m = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(1..=max_dim);
    (0..m).map(|_| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()).collect()
}
