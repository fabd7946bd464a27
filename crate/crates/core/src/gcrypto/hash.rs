//! Tweakable correlation-robust hash with re-keying:
//! `H(x, t) = AES_t(sigma(x)) ^ sigma(x)`, with a full key expansion per tweak.

use std::cell::Cell;

use super::aes::Aes128;
use super::label::Label;

thread_local! {
    static HASH_CALLS: Cell<u64> = const { Cell::new(0) };
    static KEY_EXPANSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Per-thread tallies of gate hash invocations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HashCounters {
    pub hash_calls: u64,
    pub key_expansions: u64,
}

impl std::ops::Sub for HashCounters {
    type Output = HashCounters;
    fn sub(self, rhs: Self) -> Self {
        HashCounters {
            hash_calls: self.hash_calls - rhs.hash_calls,
            key_expansions: self.key_expansions - rhs.key_expansions,
        }
    }
}

pub fn hash_counters() -> HashCounters {
    HashCounters {
        hash_calls: HASH_CALLS.with(Cell::get),
        key_expansions: KEY_EXPANSIONS.with(Cell::get),
    }
}

pub fn reset_hash_counters() {
    HASH_CALLS.with(|c| c.set(0));
    KEY_EXPANSIONS.with(|c| c.set(0));
}

/// The linear orthomorphism `sigma(hi || lo) = (hi ^ lo) || hi`.
pub fn sigma(x: Label) -> Label {
    let hi = (x.0 >> 64) as u64;
    let lo = x.0 as u64;
    Label(((hi ^ lo) as u128) << 64 | hi as u128)
}

/// AES keyed by one tweak. Construction counts as one key expansion and each
/// [`TweakCipher::hash`] as one hash call.
pub struct TweakCipher {
    aes: Aes128,
}

impl TweakCipher {
    pub fn new(tweak: u128) -> Self {
        KEY_EXPANSIONS.with(|c| c.set(c.get() + 1));
        TweakCipher {
            aes: Aes128::new(&tweak.to_le_bytes()),
        }
    }

    pub fn hash(&self, x: Label) -> Label {
        HASH_CALLS.with(|c| c.set(c.get() + 1));
        let s = sigma(x);
        Label::from_bytes(self.aes.encrypt(&s.to_bytes())) ^ s
    }
}

pub fn tccr_hash(x: Label, tweak: u128) -> Label {
    TweakCipher::new(tweak).hash(x)
}
