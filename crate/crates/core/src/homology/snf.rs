use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// `u * m * v == d` with `u`, `v` unimodular and `d` diagonal, its nonzero
/// entries positive and each dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Nonzero diagonal entries, in order.
    pub fn nonzero_diagonal(&self) -> Vec<BigInt> {
        self.d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.nonzero_diagonal().len()
    }

    /// Re-multiplies and checks every stated property, including unimodularity
    /// via determinants.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        if self.u.mul(m).mul(&self.v) != self.d || !self.d.is_diagonal() {
            return false;
        }
        if !self.u.determinant().abs().is_one() || !self.v.determinant().abs().is_one() {
            return false;
        }
        let diag = self.d.diagonal();
        let nz = diag.iter().take_while(|x| !x.is_zero()).count();
        if diag[nz..].iter().any(|x| !x.is_zero()) {
            return false;
        }
        diag[..nz].iter().all(|x| x.is_positive())
            && diag[..nz].windows(2).all(|w| (&w[1] % &w[0]).is_zero())
    }
}

fn min_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smith normal form by elimination, always pivoting on an entry of least
/// absolute value.
pub fn snf(m: &IntMatrix) -> SnfResult {
    let (r, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);
    let mut t = 0;
    while t < r.min(c) {
        let Some((pi, pj)) = min_pivot(&a, t) else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..r {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                dirty |= !a[(i, t)].is_zero();
            }
            for j in t + 1..c {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -a[(t, j)].div_floor(&a[(t, t)]);
                a.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                dirty |= !a[(t, j)].is_zero();
            }
            if dirty {
                // A remainder smaller than the pivot is left somewhere in row
                // or column t; bring the least one up and go again.
                let mut best = (t, t);
                for i in t..r {
                    if !a[(i, t)].is_zero() && a[(i, t)].abs() < a[best].abs() {
                        best = (i, t);
                    }
                }
                for j in t..c {
                    if !a[(t, j)].is_zero() && a[(t, j)].abs() < a[best].abs() {
                        best = (t, j);
                    }
                }
                a.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                a.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                continue;
            }
            let p = a[(t, t)].clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !(&a[(i, j)] % &p).is_zero()));
            match bad {
                Some(i) => {
                    a.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    SnfResult { d: a, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(rows: &[&[i64]]) -> Vec<BigInt> {
        let m = IntMatrix::from_i64(rows);
        let s = snf(&m);
        assert!(s.verify(&m));
        s.d.diagonal()
    }

    #[test]
    fn identity_is_fixed() {
        let m = IntMatrix::identity(3);
        let s = snf(&m);
        assert_eq!(s.d, m);
        assert!(s.verify(&m));
    }

    #[test]
    fn diag_2_3_becomes_1_6() {
        assert_eq!(diag_of(&[&[2, 0], &[0, 3]]), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn two_by_two_example() {
        assert_eq!(diag_of(&[&[2, 4], &[6, 8]]), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn rectangular_and_zero() {
        assert_eq!(diag_of(&[&[0, 0, 0]]), vec![BigInt::zero()]);
        assert_eq!(
            diag_of(&[&[2, -2], &[0, 0], &[4, -4]]),
            vec![BigInt::from(2), BigInt::zero()]
        );
        let empty = IntMatrix::zeros(0, 3);
        assert!(snf(&empty).verify(&empty));
    }
}
