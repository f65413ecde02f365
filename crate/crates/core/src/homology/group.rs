use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::snf::snf;
use crate::matrix::{serialize_bigint, IntMatrix};

/// `Z^free_rank ⊕ Z/d_1 ⊕ … ⊕ Z/d_k` with `2 <= d_1 | d_2 | … | d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FgAbelianGroup {
    pub free_rank: usize,
    pub invariant_factors: Vec<BigInt>,
}

impl FgAbelianGroup {
    pub fn free(n: usize) -> Self {
        FgAbelianGroup {
            free_rank: n,
            invariant_factors: Vec::new(),
        }
    }

    /// From the diagonal of a Smith form of a relation matrix on `generators`
    /// generators.
    pub fn from_diagonal(generators: usize, diagonal: &[BigInt]) -> Self {
        let nonzero: Vec<BigInt> = diagonal.iter().filter(|x| !x.is_zero()).map(|x| x.abs()).collect();
        FgAbelianGroup {
            free_rank: generators - nonzero.len(),
            invariant_factors: nonzero.into_iter().filter(|x| !x.is_one()).collect(),
        }
    }

    /// Cyclic orders of the canonical decomposition, with 0 for each free
    /// summand.
    pub fn cyclic_orders(&self) -> Vec<BigInt> {
        let mut v = self.invariant_factors.clone();
        v.extend(std::iter::repeat_n(BigInt::zero(), self.free_rank));
        v
    }

    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    pub fn factors_u64(&self) -> Vec<u64> {
        self.invariant_factors
            .iter()
            .map(|x| u64::try_from(x).unwrap_or(u64::MAX))
            .collect()
    }
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

struct Factors<'a>(&'a [BigInt]);

impl Serialize for Factors<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for x in self.0 {
            seq.serialize_element(&Big(x))?;
        }
        seq.end()
    }
}

struct Big<'a>(&'a BigInt);

impl Serialize for Big<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_bigint(self.0, s)
    }
}

impl Serialize for FgAbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FgAbelianGroup", 2)?;
        st.serialize_field("free_rank", &self.free_rank)?;
        st.serialize_field("invariant_factors", &Factors(&self.invariant_factors))?;
        st.end()
    }
}

/// `Z^generators` modulo the span of `relations`.
pub fn group_from_presentation(generators: usize, relations: &[Vec<BigInt>]) -> FgAbelianGroup {
    if relations.is_empty() {
        return FgAbelianGroup::free(generators);
    }
    for r in relations {
        assert_eq!(r.len(), generators, "relation of the wrong length");
    }
    let m = IntMatrix::from_rows(relations);
    FgAbelianGroup::from_diagonal(generators, &snf(&m).d.diagonal())
}
