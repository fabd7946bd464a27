use serde::{Deserialize, Serialize};

use super::hash::TweakCipher;
use super::label::{GlobalDelta, Label};

/// The two ciphertexts of a half-gate AND. Serialized as 32 bytes, `t_g` first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GarbledTable {
    pub t_g: Label,
    pub t_e: Label,
}

impl GarbledTable {
    pub const BYTES: usize = 32;

    pub fn to_bytes(self) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[..16].copy_from_slice(&self.t_g.to_bytes());
        out[16..].copy_from_slice(&self.t_e.to_bytes());
        out
    }

    pub fn from_bytes(b: &[u8; 32]) -> Self {
        let half = |r: std::ops::Range<usize>| Label::from_bytes(b[r].try_into().unwrap());
        GarbledTable {
            t_g: half(0..16),
            t_e: half(16..32),
        }
    }
}

fn tweaks(gate_index: u64) -> (u128, u128) {
    let j = 2 * gate_index as u128;
    (j, j + 1)
}

/// Garbles one AND gate from the zero labels of its inputs. Returns the
/// output zero label and the table.
pub fn garble_and(delta: GlobalDelta, wa0: Label, wb0: Label, gate_index: u64) -> (Label, GarbledTable) {
    let r = delta.label();
    let (j, j2) = tweaks(gate_index);
    let (pa, pb) = (wa0.lsb(), wb0.lsb());

    let hg = TweakCipher::new(j);
    let (ha0, ha1) = (hg.hash(wa0), hg.hash(wa0 ^ r));
    let t_g = (ha0 ^ ha1).xor_if(pb, r);
    let wg0 = ha0.xor_if(pa, t_g);

    let he = TweakCipher::new(j2);
    let (hb0, hb1) = (he.hash(wb0), he.hash(wb0 ^ r));
    let t_e = hb0 ^ hb1 ^ wa0;
    let we0 = hb0.xor_if(pb, t_e ^ wa0);

    (wg0 ^ we0, GarbledTable { t_g, t_e })
}

/// Evaluates one AND gate on active labels.
pub fn eval_and(wa: Label, wb: Label, table: &GarbledTable, gate_index: u64) -> Label {
    let (j, j2) = tweaks(gate_index);
    let wg = TweakCipher::new(j).hash(wa).xor_if(wa.lsb(), table.t_g);
    let we = TweakCipher::new(j2).hash(wb).xor_if(wb.lsb(), table.t_e ^ wa);
    wg ^ we
}

#[inline]
pub fn free_xor(wa: Label, wb: Label) -> Label {
    wa ^ wb
}
