use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// `p / r` in `Q/Z`, kept reduced with `0 <= p < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorsionLabel {
    pub num: u64,
    pub den: u64,
}

impl TorsionLabel {
    pub const ZERO: TorsionLabel = TorsionLabel { num: 0, den: 1 };

    /// # Panics
    /// If `den` is 0.
    pub fn new(num: i128, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let d = den as i128;
        let p = num.rem_euclid(d);
        let g = p.gcd(&d).max(1);
        TorsionLabel {
            num: (p / g) as u64,
            den: (d / g) as u64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn scale(self, k: i128) -> Self {
        TorsionLabel::new(self.num as i128 * k, self.den)
    }

    /// Additive order in `Q/Z`.
    pub fn order(&self) -> u64 {
        self.den
    }
}

impl Add for TorsionLabel {
    type Output = TorsionLabel;

    fn add(self, o: TorsionLabel) -> TorsionLabel {
        let l = self.den.lcm(&o.den);
        let p = self.num as i128 * (l / self.den) as i128 + o.num as i128 * (l / o.den) as i128;
        TorsionLabel::new(p, l)
    }
}

impl std::iter::Sum for TorsionLabel {
    fn sum<I: Iterator<Item = TorsionLabel>>(it: I) -> Self {
        it.fold(TorsionLabel::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for TorsionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            f.write_str("0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_mod_one() {
        assert_eq!(TorsionLabel::new(6, 4), TorsionLabel { num: 1, den: 2 });
        assert_eq!(TorsionLabel::new(-1, 4), TorsionLabel { num: 3, den: 4 });
        assert!(TorsionLabel::new(4, 4).is_zero());
        let q = TorsionLabel::new(1, 4);
        assert!((0..4).map(|_| q).sum::<TorsionLabel>().is_zero());
        assert_eq!(TorsionLabel::new(1, 2) + TorsionLabel::new(1, 3), TorsionLabel::new(5, 6));
        assert_eq!(q.to_string(), "1/4");
    }
}
