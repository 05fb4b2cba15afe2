//! Dyadic integers `N = 2^n`, used as Littlewood-Paley block indices and
//! Galerkin regularization levels.

use serde::{Deserialize, Serialize};

/// A dyadic integer `2^n`, stored by exponent.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Dyadic(u32);

impl Dyadic {
    pub const ONE: Dyadic = Dyadic(0);

    pub fn from_exponent(n: u32) -> Dyadic {
        Dyadic(n)
    }

    /// Constructs from an exact power of two.
    pub fn from_value(v: u64) -> Option<Dyadic> {
        if v.is_power_of_two() {
            Some(Dyadic(v.trailing_zeros()))
        } else {
            None
        }
    }

    pub fn exponent(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        (1u64 << self.0) as f64
    }

    pub fn value_u64(self) -> u64 {
        1u64 << self.0
    }

    pub fn double(self) -> Dyadic {
        Dyadic(self.0 + 1)
    }

    /// Halves, saturating at 1.
    pub fn halve(self) -> Dyadic {
        Dyadic(self.0.saturating_sub(1))
    }

    /// Smallest dyadic integer `>= x` (and `>= 1`).
    pub fn ceil(x: f64) -> Dyadic {
        if x <= 1.0 {
            return Dyadic(0);
        }
        let mut n = 0u32;
        while ((1u64 << n) as f64) < x && n < 62 {
            n += 1;
        }
        Dyadic(n)
    }

    /// Smallest dyadic integer `>= (11/10) * max_freq`; the block range
    /// `1..=covering` captures all content at frequencies `<= max_freq`.
    pub fn covering(max_freq: f64) -> Dyadic {
        Dyadic::ceil(1.1 * max_freq.abs())
    }

    /// Iterates `lo, 2*lo, ..., hi` inclusive.
    pub fn range_inclusive(lo: Dyadic, hi: Dyadic) -> impl Iterator<Item = Dyadic> {
        (lo.0..=hi.0).map(Dyadic)
    }

    /// `N^sigma`, the window side length adapted to a symbol of order `sigma + 1`.
    pub fn window_scale(self, sigma: f64) -> f64 {
        self.value().powf(sigma)
    }
}

impl std::fmt::Display for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value_u64())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.value_u64())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u64::deserialize(d)?;
        Dyadic::from_value(v)
            .ok_or_else(|| serde::de::Error::custom(format!("{v} is not a power of two")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_and_covering() {
        assert_eq!(Dyadic::ceil(0.3), Dyadic::ONE);
        assert_eq!(Dyadic::ceil(1.0), Dyadic::ONE);
        assert_eq!(Dyadic::ceil(1.5).value_u64(), 2);
        assert_eq!(Dyadic::ceil(64.0).value_u64(), 64);
        assert_eq!(Dyadic::ceil(64.01).value_u64(), 128);
        // 1.1 * 64 = 70.4 -> 128
        assert_eq!(Dyadic::covering(64.0).value_u64(), 128);
        assert_eq!(Dyadic::covering(0.3).value_u64(), 1);
    }

    #[test]
    fn range_iterates_all_blocks() {
        let blocks: Vec<u64> =
            Dyadic::range_inclusive(Dyadic::ONE, Dyadic::from_value(16).unwrap())
                .map(|d| d.value_u64())
                .collect();
        assert_eq!(blocks, vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn serde_roundtrip() {
        let d = Dyadic::from_value(64).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, "64");
        let back: Dyadic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
