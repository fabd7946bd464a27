//! Table-driven AES-128 (encryption only).
//!
//! Blocks and keys are 16-byte arrays in the standard FIPS-197 byte order.

const fn xtime(b: u8) -> u8 {
    (b << 1) ^ if b & 0x80 != 0 { 0x1b } else { 0 }
}

const fn build_sbox() -> [u8; 256] {
    // Walk the multiplicative group with generator 3 (p) and its inverse (q),
    // applying the affine transform to the inverse.
    let mut sbox = [0u8; 256];
    let (mut p, mut q) = (1u8, 1u8);
    loop {
        p = p ^ xtime(p);
        q ^= q << 1;
        q ^= q << 2;
        q ^= q << 4;
        if q & 0x80 != 0 {
            q ^= 0x09;
        }
        sbox[p as usize] =
            q ^ q.rotate_left(1) ^ q.rotate_left(2) ^ q.rotate_left(3) ^ q.rotate_left(4) ^ 0x63;
        if p == 1 {
            break;
        }
    }
    sbox[0] = 0x63;
    sbox
}

static SBOX: [u8; 256] = build_sbox();

const fn build_te0() -> [u32; 256] {
    let sbox = build_sbox();
    let mut t = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let s = sbox[i];
        t[i] = (xtime(s) as u32) << 24 | (s as u32) << 16 | (s as u32) << 8 | (xtime(s) ^ s) as u32;
        i += 1;
    }
    t
}

static TE0: [u32; 256] = build_te0();

const RCON: [u32; 10] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36];

fn sub_word(w: u32) -> u32 {
    let b = w.to_be_bytes();
    u32::from_be_bytes([
        SBOX[b[0] as usize],
        SBOX[b[1] as usize],
        SBOX[b[2] as usize],
        SBOX[b[3] as usize],
    ])
}

/// Expanded AES-128 key schedule (44 round-key words).
#[derive(Clone)]
pub struct Aes128 {
    rk: [u32; 44],
}

impl Aes128 {
    pub fn new(key: &[u8; 16]) -> Self {
        let mut rk = [0u32; 44];
        for i in 0..4 {
            rk[i] = u32::from_be_bytes([key[4 * i], key[4 * i + 1], key[4 * i + 2], key[4 * i + 3]]);
        }
        for i in 4..44 {
            let mut t = rk[i - 1];
            if i % 4 == 0 {
                t = sub_word(t.rotate_left(8)) ^ (RCON[i / 4 - 1] << 24);
            }
            rk[i] = rk[i - 4] ^ t;
        }
        Aes128 { rk }
    }

    pub fn encrypt(&self, block: &[u8; 16]) -> [u8; 16] {
        let rk = &self.rk;
        let word = |i: usize| {
            u32::from_be_bytes([block[4 * i], block[4 * i + 1], block[4 * i + 2], block[4 * i + 3]])
        };
        let mut s = [word(0) ^ rk[0], word(1) ^ rk[1], word(2) ^ rk[2], word(3) ^ rk[3]];
        let te = |x: u32, rot: u32| TE0[x as usize & 0xff].rotate_right(rot);
        for round in 1..10 {
            let k = &rk[4 * round..4 * round + 4];
            let mut t = [0u32; 4];
            for c in 0..4 {
                t[c] = te(s[c] >> 24, 0)
                    ^ te(s[(c + 1) % 4] >> 16, 8)
                    ^ te(s[(c + 2) % 4] >> 8, 16)
                    ^ te(s[(c + 3) % 4], 24)
                    ^ k[c];
            }
            s = t;
        }
        let mut out = [0u8; 16];
        for c in 0..4 {
            let b = |x: u32, shift: u32| SBOX[((x >> shift) & 0xff) as usize] as u32;
            let w = (b(s[c], 24) << 24
                | b(s[(c + 1) % 4], 16) << 16
                | b(s[(c + 2) % 4], 8) << 8
                | b(s[(c + 3) % 4], 0))
                ^ rk[40 + c];
            out[4 * c..4 * c + 4].copy_from_slice(&w.to_be_bytes());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fips197_appendix_c1() {
        let key: [u8; 16] = core::array::from_fn(|i| i as u8);
        let pt: [u8; 16] = core::array::from_fn(|i| (i as u8) * 0x11);
        let ct = Aes128::new(&key).encrypt(&pt);
        assert_eq!(hex::encode(ct), "69c4e0d86a7b0430d8cdb78070b4c55a");
    }

    #[test]
    fn sbox_corners() {
        assert_eq!(SBOX[0x00], 0x63);
        assert_eq!(SBOX[0x53], 0xed);
        assert_eq!(SBOX[0xff], 0x16);
    }
}
