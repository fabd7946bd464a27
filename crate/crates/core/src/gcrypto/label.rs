use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use serde::{Deserialize, Serialize};

use super::aes::Aes128;

/// A 128-bit wire label. The least-significant bit is the point-and-permute
/// select bit. Byte serialization is little-endian.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub u128);

impl Label {
    pub const ZERO: Label = Label(0);

    pub fn lsb(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(b: [u8; 16]) -> Self {
        Label(u128::from_le_bytes(b))
    }

    /// Selects `self` when `bit` is false, else `self ^ other`.
    #[inline]
    pub fn xor_if(self, bit: bool, other: Label) -> Label {
        Label(self.0 ^ (other.0 & (bit as u128).wrapping_neg()))
    }
}

impl BitXor for Label {
    type Output = Label;
    #[inline]
    fn bitxor(self, rhs: Label) -> Label {
        Label(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for Label {
    #[inline]
    fn bitxor_assign(&mut self, rhs: Label) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({:032x})", self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// The global FreeXOR offset R. Its lsb is always 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalDelta(Label);

impl GlobalDelta {
    pub fn label(self) -> Label {
        self.0
    }

    /// Rebuilds R from its serialized form; `None` if the lsb is clear.
    pub fn from_label(l: Label) -> Option<Self> {
        l.lsb().then_some(GlobalDelta(l))
    }
}

const DOMAIN_DELTA: u128 = 1;
const DOMAIN_WIRE: u128 = 2;

/// Counter-mode PRF keyed by the run seed. Its AES calls are not part of the
/// gate hash accounting.
#[derive(Clone)]
pub(crate) struct LabelPrf {
    aes: Aes128,
}

impl LabelPrf {
    pub(crate) fn new(seed: u128) -> Self {
        LabelPrf {
            aes: Aes128::new(&seed.to_le_bytes()),
        }
    }

    fn block(&self, domain: u128, counter: u64) -> Label {
        let input = (domain << 64) | counter as u128;
        Label::from_bytes(self.aes.encrypt(&input.to_le_bytes()))
    }

    pub(crate) fn delta(&self) -> GlobalDelta {
        GlobalDelta(Label(self.block(DOMAIN_DELTA, 0).0 | 1))
    }

    pub(crate) fn wire(&self, wire: u64) -> Label {
        self.block(DOMAIN_WIRE, wire)
    }
}

/// Derives R deterministically from `seed`.
pub fn gen_delta(seed: u128) -> GlobalDelta {
    LabelPrf::new(seed).delta()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn delta_is_deterministic_and_odd() {
        assert_eq!(gen_delta(7), gen_delta(7));
        let mut seen = HashSet::new();
        for s in 0..1000u128 {
            let d = gen_delta(s.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            assert!(d.label().lsb());
            seen.insert(d.label());
        }
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn xor_if_selects() {
        let (a, b) = (Label(0b1100), Label(0b1010));
        assert_eq!(a.xor_if(false, b), a);
        assert_eq!(a.xor_if(true, b), Label(0b0110));
    }

    #[test]
    fn bytes_round_trip() {
        let l = Label(0x0102_0304_0506_0708_090a_0b0c_0d0e_0f10);
        assert_eq!(l.to_bytes()[0], 0x10);
        assert_eq!(Label::from_bytes(l.to_bytes()), l);
    }
}
