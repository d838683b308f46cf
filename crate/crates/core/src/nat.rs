//! Natural numbers with a machine-word fast path.
//!
//! Values produced during evaluation are almost always small, but program
//! codes computed at run time routinely exceed 64 bits. `Nat` keeps the
//! common case allocation-free and falls back to `BigUint` otherwise. The
//! representation is canonical: `Big` only ever holds values above
//! `u64::MAX`, so the derived `Eq`, `Hash` and `Ord` are numeric.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nat {
    Small(u64),
    Big(Arc<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    pub fn from_big(value: BigUint) -> Nat {
        match value.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(Arc::new(value)),
        }
    }

    fn from_u128(value: u128) -> Nat {
        match u64::try_from(value) {
            Ok(v) => Nat::Small(v),
            Err(_) => Nat::Big(Arc::new(BigUint::from(value))),
        }
    }

    pub fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    /// Number of significant bits (0 for zero).
    pub fn bits(&self) -> u64 {
        match self {
            Nat::Small(v) => 64 - u64::from(v.leading_zeros()),
            Nat::Big(b) => b.bits(),
        }
    }

    pub fn succ(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_add(1) {
                Some(s) => Nat::Small(s),
                None => Nat::from_big(BigUint::from(*v) + 1u32),
            },
            Nat::Big(b) => Nat::from_big(&**b + 1u32),
        }
    }

    /// Truncated predecessor: `pred(0) = 0`.
    pub fn pred(&self) -> Nat {
        match self {
            Nat::Small(v) => Nat::Small(v.saturating_sub(1)),
            Nat::Big(b) => Nat::from_big(&**b - 1u32),
        }
    }

    pub fn add(&self, other: &Nat) -> Nat {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::from_u128(u128::from(*a) + u128::from(*b)),
            _ => Nat::from_big(self.to_big() + other.to_big()),
        }
    }

    /// Truncated subtraction.
    pub fn monus(&self, other: &Nat) -> Nat {
        if self <= other {
            return Nat::ZERO;
        }
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a - b),
            _ => Nat::from_big(self.to_big() - other.to_big()),
        }
    }

    pub fn mul_small(&self, k: u64) -> Nat {
        match self {
            Nat::Small(a) => Nat::from_u128(u128::from(*a) * u128::from(k)),
            Nat::Big(b) => Nat::from_big(&**b * k),
        }
    }

    /// `(self / d, self % d)` for a machine-word divisor.
    pub fn div_rem_small(&self, d: u64) -> (Nat, u64) {
        match self {
            Nat::Small(a) => (Nat::Small(a / d), a % d),
            Nat::Big(b) => {
                let (q, r) = b.div_rem(&BigUint::from(d));
                (
                    Nat::from_big(q),
                    r.to_u64().expect("remainder below divisor"),
                )
            }
        }
    }
}

/// Cantor pairing `⟨i, j⟩ = (i + j)(i + j + 1) / 2 + j`.
pub fn pair(i: &Nat, j: &Nat) -> Nat {
    if let (Nat::Small(a), Nat::Small(b)) = (i, j) {
        let s = u128::from(*a) + u128::from(*b);
        if let Some(t) = s.checked_mul(s + 1) {
            return Nat::from_u128(t / 2 + u128::from(*b));
        }
    }
    let s = i.to_big() + j.to_big();
    let t = (&s * (&s + 1u32)) >> 1u32;
    Nat::from_big(t + j.to_big())
}

/// Inverse of [`pair`].
pub fn unpair(z: &Nat) -> (Nat, Nat) {
    match z {
        Nat::Small(v) => {
            let v = u128::from(*v);
            let mut w = (((8 * v + 1) as f64).sqrt() as u128).saturating_sub(1) / 2;
            while (w + 1) * (w + 2) / 2 <= v {
                w += 1;
            }
            while w * (w + 1) / 2 > v {
                w -= 1;
            }
            let j = v - w * (w + 1) / 2;
            (Nat::from_u128(w - j), Nat::from_u128(j))
        }
        Nat::Big(b) => {
            let b = &**b;
            let root = ((b << 3u32) + BigUint::one()).sqrt();
            let w = (root - BigUint::one()) >> 1u32;
            let t = (&w * (&w + 1u32)) >> 1u32;
            let j = b - t;
            let i = &w - &j;
            (Nat::from_big(i), Nat::from_big(j))
        }
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(u64::from(v))
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat::Small(v as u64)
    }
}

impl From<BigUint> for Nat {
    fn from(v: BigUint) -> Self {
        Nat::from_big(v)
    }
}

impl PartialEq<u64> for Nat {
    fn eq(&self, other: &u64) -> bool {
        matches!(self, Nat::Small(v) if v == other)
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNatError;

impl fmt::Display for ParseNatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("not a natural number")
    }
}

impl std::error::Error for ParseNatError {}

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError);
        }
        BigUint::from_str(s)
            .map(Nat::from_big)
            .map_err(|_| ParseNatError)
    }
}

impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Nat::Small(v) => serializer.serialize_u64(*v),
            Nat::Big(b) => serializer.serialize_str(&b.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Nat::Small(v)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Zero for Nat {
    fn zero() -> Self {
        Nat::ZERO
    }

    fn is_zero(&self) -> bool {
        Nat::is_zero(self)
    }
}

impl std::ops::Add for Nat {
    type Output = Nat;

    fn add(self, rhs: Nat) -> Nat {
        Nat::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pairing_small_values() {
        assert_eq!(pair(&0u64.into(), &0u64.into()), 0u64);
        assert_eq!(pair(&1u64.into(), &0u64.into()), 1u64);
        assert_eq!(pair(&0u64.into(), &1u64.into()), 2u64);
        assert_eq!(pair(&2u64.into(), &0u64.into()), 3u64);
        assert_eq!(pair(&15u64.into(), &3u64.into()), 174u64);
    }

    #[test]
    fn pairing_enumerates_diagonals() {
        let mut z = 0u64;
        for s in 0..40u64 {
            for j in 0..=s {
                let (a, b) = unpair(&Nat::from(z));
                assert_eq!((a, b), (Nat::from(s - j), Nat::from(j)));
                z += 1;
            }
        }
    }

    #[test]
    fn pairing_crosses_into_big() {
        let a = Nat::from(u64::MAX);
        let b = Nat::from(12345u64);
        let z = pair(&a, &b);
        assert!(matches!(z, Nat::Big(_)));
        assert_eq!(unpair(&z), (a, b));
    }

    #[test]
    fn canonical_representation() {
        let big = Nat::from_big(BigUint::from(7u32));
        assert_eq!(big, Nat::Small(7));
        let huge = Nat::from(u64::MAX).succ();
        assert!(matches!(huge, Nat::Big(_)));
        assert_eq!(huge.pred(), Nat::from(u64::MAX));
        assert!(Nat::from(u64::MAX) < huge);
    }

    proptest! {
        #[test]
        fn unpair_inverts_pair(a in any::<u64>(), b in any::<u64>()) {
            let (x, y) = (Nat::from(a), Nat::from(b));
            prop_assert_eq!(unpair(&pair(&x, &y)), (x, y));
        }

        #[test]
        fn pair_inverts_unpair(z in any::<u64>()) {
            let z = Nat::from(z);
            let (a, b) = unpair(&z);
            prop_assert_eq!(pair(&a, &b), z);
        }

        #[test]
        fn monus_and_add(a in any::<u64>(), b in any::<u64>()) {
            let (x, y) = (Nat::from(a), Nat::from(b));
            prop_assert_eq!(x.add(&y).monus(&y), x.clone());
            prop_assert_eq!(x.monus(&y), Nat::from(a.saturating_sub(b)));
        }
    }
}
