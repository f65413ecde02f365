use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{group_from_presentation, snf, FgAbelianGroup};
use crate::bratteli::{incidence_matrix, BratteliError, Diagram, IncidenceMatrix};
use crate::construction::{
    alpha_of_vertex, relation_vectors, shadow_relation_check, ConstructionBundle, ConstructionError,
};
use crate::matrix::IntMatrix;

/// Level `level` of the tail-equivalence inductive system: `Z^(V_level)` and
/// the incidence matrix into the next level.
#[derive(Debug, Clone, Serialize)]
pub struct TailApprox {
    pub level: usize,
    pub group: FgAbelianGroup,
    pub vertices: Vec<String>,
    pub connecting: IncidenceMatrix,
}

pub fn h0_tail_approx(d: &Diagram, level: usize) -> Result<TailApprox, BratteliError> {
    let vertices: Vec<String> = d.vertices(level)?.iter().map(|v| v.to_string()).collect();
    Ok(TailApprox {
        level,
        group: FgAbelianGroup::free(vertices.len()),
        vertices,
        connecting: incidence_matrix(d, level)?,
    })
}

/// Applies the incidence matrices of levels `from .. to` to `v`.
pub fn pushforward(d: &Diagram, from: usize, v: &[BigInt], to: usize) -> Result<Vec<BigInt>, BratteliError> {
    if to < from {
        return Err(BratteliError::Malformed(format!("cannot push from level {from} back to {to}")));
    }
    let n = d.vertices(from)?.len();
    if v.len() != n {
        return Err(BratteliError::Malformed(format!(
            "vector of length {} on level {from} with {n} vertices",
            v.len()
        )));
    }
    let mut cur = v.to_vec();
    for l in from..to {
        cur = incidence_matrix(d, l)?.matrix.mul_vec(&cur);
    }
    Ok(cur)
}

/// Relation vectors of levels `1..=level`, each pushed to `level`.
pub fn pushed_relations(b: &ConstructionBundle, level: usize) -> Result<Vec<Vec<BigInt>>, ConstructionError> {
    let mut out = Vec::new();
    for rv in relation_vectors(b, level)? {
        out.push(pushforward(&b.split, rv.level, &rv.vector, level)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct H0Approx {
    pub level: usize,
    pub group: FgAbelianGroup,
    pub generators: Vec<String>,
    pub relations: usize,
}

/// `Z^(V_level(C))` modulo every descendant relation pushed to `level`.
pub fn h0_r_approx(b: &ConstructionBundle, level: usize) -> Result<H0Approx, ConstructionError> {
    let generators: Vec<String> = b.split.vertices(level)?.iter().map(|v| v.to_string()).collect();
    let rels = pushed_relations(b, level)?;
    Ok(H0Approx {
        level,
        group: group_from_presentation(generators.len(), &rels),
        generators,
        relations: rels.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoReport {
    pub pass: bool,
    pub level: usize,
    /// Order of the torsion summand of the target.
    pub modulus: u64,
    pub kills_relations: bool,
    pub surjective: bool,
    pub groups_match: bool,
    pub h0: FgAbelianGroup,
    pub target: FgAbelianGroup,
    pub failure: Option<String>,
}

/// The map `e_v -> (alpha(v), beta(v))` into `Z^(V_level(D)) + Z/r_level`
/// induces an isomorphism on [`h0_r_approx`].
pub fn verify_iso_finite_level(b: &ConstructionBundle, level: usize) -> Result<IsoReport, ConstructionError> {
    let r = b.r(level)?;
    verify_iso_with_modulus(b, level, r)
}

/// As [`verify_iso_finite_level`] with `beta(w_b) = 1/modulus`. Any modulus
/// other than `r_level` should fail.
pub fn verify_iso_with_modulus(b: &ConstructionBundle, level: usize, modulus: u64) -> Result<IsoReport, ConstructionError> {
    let h0 = h0_r_approx(b, level)?;
    let gens = b.split.vertices(level)?;
    let n = b.base.vertices(level)?.len();
    let w_b = b.w_b(level)?;
    let m = BigInt::from(modulus);

    // Columns are generators; the last row is the torsion coordinate.
    let mut phi = IntMatrix::zeros(n + 1, gens.len());
    for (j, v) in gens.iter().enumerate() {
        let a = alpha_of_vertex(b, level, v)?;
        for (i, x) in a.vector.iter().enumerate() {
            phi[(i, j)] = BigInt::from(*x);
        }
        if **v == *w_b {
            phi[(n, j)] = BigInt::one();
        }
    }
    let mut failure = None;
    let rels = pushed_relations(b, level)?;
    let mut kills = true;
    for (k, rel) in rels.iter().enumerate() {
        let img = phi.mul_vec(rel);
        let free_zero = img[..n].iter().all(Zero::is_zero);
        let tors_zero = img[n].mod_floor(&m).is_zero();
        if !(free_zero && tors_zero) {
            kills = false;
            failure.get_or_insert_with(|| format!("relation from level {} maps to {img:?} (mod {modulus})", k + 1));
        }
    }

    // Surjective onto Z^n + Z/m iff [phi | m e_n] is onto Z^(n+1).
    let mut ext = IntMatrix::zeros(n + 1, gens.len() + 1);
    for i in 0..=n {
        for j in 0..gens.len() {
            ext[(i, j)] = phi[(i, j)].clone();
        }
    }
    ext[(n, gens.len())] = m.clone();
    let diag = snf(&ext).d.diagonal();
    let surjective = diag.len() == n + 1 && diag.iter().all(One::is_one);
    if !surjective {
        failure.get_or_insert_with(|| "the map is not onto".to_string());
    }

    let target = FgAbelianGroup::from_diagonal(n + 1, &{
        let mut t = vec![BigInt::zero(); n + 1];
        t[0] = m;
        t
    });
    let groups_match = h0.group == target;
    if !groups_match {
        failure.get_or_insert_with(|| format!("H0 approximation is {} but the target is {target}", h0.group));
    }
    Ok(IsoReport {
        pass: kills && surjective && groups_match,
        level,
        modulus,
        kills_relations: kills,
        surjective,
        groups_match,
        h0: h0.group,
        target,
        failure,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationRow {
    pub level: usize,
    pub group: FgAbelianGroup,
    pub r: u64,
    /// Free rank `|V_level(D)|` and torsion `Z/r_level`.
    pub expected_shape: bool,
    /// `k` with `[e_(w_a) - e_(w_b)] -> k [e_(w_a) - e_(w_b)]` on the next
    /// level, found numerically.
    pub torsion_multiplier: Option<u64>,
    pub torsion_injective: Option<bool>,
    /// Map of the free parts: the incidence matrix of `D`.
    pub free_map: Option<IncidenceMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub max_level: usize,
    pub rows: Vec<StabilizationRow>,
    pub alpha_well_defined: bool,
    pub aborted: Option<String>,
    pub pass: bool,
}

/// Depth of the descendant check guarding a report.
const GUARD_DEPTH: usize = 3;

fn in_span(n: usize, rels: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    // Quotienting a finitely generated abelian group by a nonzero class
    // changes its isomorphism type.
    let mut more = rels.to_vec();
    more.push(v.to_vec());
    group_from_presentation(n, rels) == group_from_presentation(n, &more)
}

/// `h0_r_approx` for `1..=max_level`, with the maps between consecutive
/// levels. Stops early when `alpha` is not well defined.
pub fn stabilization_report(b: &ConstructionBundle, max_level: usize) -> Result<StabilizationReport, ConstructionError> {
    let guard = shadow_relation_check(b, GUARD_DEPTH.min(max_level))?;
    if !guard.pass {
        return Ok(StabilizationReport {
            max_level,
            rows: Vec::new(),
            alpha_well_defined: false,
            aborted: Some(format!(
                "shadow relation check failed at {:?}; alpha is not well defined",
                guard.witness
            )),
            pass: false,
        });
    }
    let mut rows = Vec::new();
    for level in 1..=max_level {
        let h = h0_r_approx(b, level)?;
        let r = b.r(level)?;
        let n = b.base.vertices(level)?.len();
        let want: Vec<BigInt> = if r > 1 { vec![BigInt::from(r)] } else { Vec::new() };
        let expected_shape = h.group.free_rank == n && h.group.invariant_factors == want;
        let (mut mult, mut inj, mut free_map) = (None, None, None);
        if level < max_level {
            let gens = b.split.vertices(level)?;
            let next = b.split.vertices(level + 1)?;
            let t = |vs: &[crate::bratteli::Name], l: usize| -> Result<Vec<BigInt>, ConstructionError> {
                let (wa, wb) = (b.w_a(l)?, b.w_b(l)?);
                Ok(vs
                    .iter()
                    .map(|v| {
                        if *v == wa {
                            BigInt::one()
                        } else if *v == wb {
                            -BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect())
            };
            let t_here = t(&gens, level)?;
            let t_next = t(&next, level + 1)?;
            let pushed = pushforward(&b.split, level, &t_here, level + 1)?;
            let r_next = b.r(level + 1)?;
            let rels = pushed_relations(b, level + 1)?;
            for k in 0..r_next {
                let diff: Vec<BigInt> = pushed
                    .iter()
                    .zip(&t_next)
                    .map(|(p, q)| p - BigInt::from(k) * q)
                    .collect();
                if in_span(next.len(), &rels, &diff) {
                    mult = Some(k);
                    let order = r_next / k.gcd(&r_next).max(1);
                    inj = Some(k != 0 && order == r);
                    break;
                }
            }
            free_map = Some(incidence_matrix(&b.base, level)?);
        }
        rows.push(StabilizationRow {
            level,
            group: h.group,
            r,
            expected_shape,
            torsion_multiplier: mult,
            torsion_injective: inj,
            free_map,
        });
    }
    let pass = rows
        .iter()
        .all(|row| row.expected_shape && row.torsion_injective.unwrap_or(true));
    Ok(StabilizationReport {
        max_level,
        rows,
        alpha_well_defined: true,
        aborted: None,
        pass,
    })
}

/// `(alpha, beta)` of a formal sum of level-`level` cylinders given by
/// vertex counts, and whether it lies in the positive cone: nonzero
/// `alpha` part, or both parts zero.
#[derive(Debug, Clone, Serialize)]
pub struct NormalForm {
    pub alpha: Vec<i64>,
    pub beta: crate::construction::TorsionLabel,
    pub positive: bool,
}

pub fn normal_form(b: &ConstructionBundle, level: usize, counts: &[BigInt]) -> Result<NormalForm, ConstructionError> {
    let gens = b.split.vertices(level)?;
    if counts.len() != gens.len() {
        return Err(ConstructionError::Path(format!(
            "{} counts for {} vertices",
            counts.len(),
            gens.len()
        )));
    }
    let n = b.base.vertices(level)?.len();
    let mut alpha = vec![0i64; n];
    let mut beta = crate::construction::TorsionLabel::ZERO;
    for (v, c) in gens.iter().zip(counts) {
        let a = alpha_of_vertex(b, level, v)?;
        let c64 = c
            .to_i64()
            .ok_or_else(|| ConstructionError::Path("count does not fit 64 bits".into()))?;
        for (x, y) in alpha.iter_mut().zip(&a.vector) {
            *x += c64 * y;
        }
        beta = beta + crate::construction::beta_of_vertex(b, level, v)?.scale(c64 as i128);
    }
    let nonneg = counts.iter().all(|c| !c.is_negative());
    let positive = nonneg && (alpha.iter().any(|&x| x != 0) || beta.is_zero());
    Ok(NormalForm { alpha, beta, positive })
}
