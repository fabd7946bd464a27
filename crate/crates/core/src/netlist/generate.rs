//! Synthetic circuit families used for testing and benchmarking.

use std::fmt;
use std::str::FromStr;

use super::{Circuit, Gate, GateOp, NetlistError, WireId};

/// Incrementally builds a circuit; `finish` relocates outputs to the
/// trailing wire ids so the result is valid Bristol.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    next: u32,
    input_groups: Vec<u32>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a new input value of `bits` wires. Must precede every gate.
    pub fn input(&mut self, bits: u32) -> Vec<WireId> {
        assert!(self.gates.is_empty(), "inputs must be declared before gates");
        let start = self.next;
        self.next += bits;
        self.input_groups.push(bits);
        (start..self.next).collect()
    }

    fn push(&mut self, op: GateOp, ins: &[WireId]) -> WireId {
        let out = self.next;
        self.next += 1;
        self.gates.push(Gate::new(op, ins, out));
        out
    }

    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(GateOp::And, &[a, b])
    }

    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(GateOp::Xor, &[a, b])
    }

    pub fn inv(&mut self, a: WireId) -> WireId {
        self.push(GateOp::Inv, &[a])
    }

    pub fn gate(&mut self, op: GateOp, a: WireId, b: WireId) -> WireId {
        match op {
            GateOp::Inv => self.inv(a),
            _ => self.push(op, &[a, b]),
        }
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    /// Finalizes the circuit. Outputs that are primary inputs or repeated are
    /// buffered through a double inversion.
    pub fn finish(mut self, output_groups: &[Vec<WireId>]) -> Result<Circuit, NetlistError> {
        let n_in: u32 = self.input_groups.iter().sum();
        let mut flat: Vec<WireId> = output_groups.iter().flatten().copied().collect();
        let mut taken = vec![false; self.next as usize];
        for o in flat.iter_mut() {
            if *o < n_in || taken[*o as usize] {
                let t = self.inv(*o);
                *o = self.inv(t);
                taken.resize(self.next as usize, false);
            }
            taken[*o as usize] = true;
        }

        // Non-output gate wires keep their relative order; outputs go last.
        let mut remap: Vec<WireId> = (0..self.next).collect();
        let mut next = n_in;
        for g in &self.gates {
            if !taken[g.output as usize] {
                remap[g.output as usize] = next;
                next += 1;
            }
        }
        for &o in &flat {
            remap[o as usize] = next;
            next += 1;
        }
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let ins: Vec<WireId> = g.inputs().iter().map(|&w| remap[w as usize]).collect();
                Gate::new(g.op, &ins, remap[g.output as usize])
            })
            .collect();
        let outputs = flat.iter().map(|&o| remap[o as usize]).collect();
        let groups = output_groups.iter().map(|g| g.len() as u32).collect();
        Circuit::new(self.next, self.input_groups, groups, outputs, gates)
    }
}

/// Generator families. Inputs and outputs are little-endian bit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenKind {
    /// `len` dependent gates over two inputs; `op = None` alternates AND/XOR.
    Chain { len: usize, op: Option<GateOp> },
    /// `width` independent gates.
    Parallel { op: GateOp, width: usize },
    /// Balanced XOR reduction of `inputs` wires.
    XorTree { inputs: usize },
    /// Ripple-carry adder with `bits + 1` output bits.
    Adder { bits: usize },
    /// `n x n` matrix product of `bits`-bit entries (mod 2^bits) built from
    /// shift-add multipliers feeding adder trees.
    MatmulLike { n: usize, bits: usize },
    /// `count` independent chains of `len` gates, emitted chain after chain.
    Chains {
        count: usize,
        len: usize,
        op: Option<GateOp>,
    },
    /// `blocks` consecutive blocks of `width` gates, each block reading the
    /// previous one; emitted block after block.
    Blocks { blocks: usize, width: usize },
    /// A `width x depth` grid where node (l, j) reads (l-1, j) and
    /// (l-1, j-1), emitted column after column. Long chains whose wires
    /// fan out to the neighbouring chain.
    FanoutChains { width: usize, depth: usize },
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = |o: &Option<GateOp>| match o {
            Some(o) => format!(":{}", o.tag().to_ascii_lowercase()),
            None => String::new(),
        };
        match self {
            GenKind::Chain { len, op: o } => write!(f, "chain:{len}{}", op(o)),
            GenKind::Parallel { op: o, width } => {
                write!(f, "parallel:{}:{width}", o.tag().to_ascii_lowercase())
            }
            GenKind::XorTree { inputs } => write!(f, "xor_tree:{inputs}"),
            GenKind::Adder { bits } => write!(f, "adder:{bits}"),
            GenKind::MatmulLike { n, bits } => write!(f, "matmul:{n}:{bits}"),
            GenKind::Chains { count, len, op: o } => write!(f, "chains:{count}:{len}{}", op(o)),
            GenKind::Blocks { blocks, width } => write!(f, "blocks:{blocks}:{width}"),
            GenKind::FanoutChains { width, depth } => write!(f, "fanout:{width}:{depth}"),
        }
    }
}

impl FromStr for GenKind {
    type Err = NetlistError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NetlistError::UnsupportedKind(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize, NetlistError> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad)
        };
        let op = |i: usize| -> Result<GateOp, NetlistError> {
            parts
                .get(i)
                .and_then(|p| GateOp::from_tag(&p.to_ascii_uppercase()))
                .ok_or_else(bad)
        };
        let opt_op = |i: usize| -> Result<Option<GateOp>, NetlistError> {
            if parts.len() > i {
                op(i).map(Some)
            } else {
                Ok(None)
            }
        };
        let kind = match parts[0] {
            "chain" if parts.len() <= 3 => GenKind::Chain {
                len: num(1)?,
                op: opt_op(2)?,
            },
            "parallel" if parts.len() == 3 => GenKind::Parallel {
                op: op(1)?,
                width: num(2)?,
            },
            "xor_tree" if parts.len() == 2 => GenKind::XorTree { inputs: num(1)? },
            "adder" if parts.len() == 2 => GenKind::Adder { bits: num(1)? },
            "matmul" | "matmul_like" if parts.len() == 3 => GenKind::MatmulLike {
                n: num(1)?,
                bits: num(2)?,
            },
            "chains" if parts.len() <= 4 => GenKind::Chains {
                count: num(1)?,
                len: num(2)?,
                op: opt_op(3)?,
            },
            "blocks" if parts.len() == 3 => GenKind::Blocks {
                blocks: num(1)?,
                width: num(2)?,
            },
            "fanout" if parts.len() == 3 => GenKind::FanoutChains {
                width: num(1)?,
                depth: num(2)?,
            },
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

fn chain_op(op: Option<GateOp>, i: usize) -> GateOp {
    op.unwrap_or(if i % 2 == 0 { GateOp::And } else { GateOp::Xor })
}

fn add_truncated(b: &mut CircuitBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut carry: Option<WireId> = None;
    for i in 0..n {
        match carry {
            None => {
                out.push(b.xor(x[i], y[i]));
                if i + 1 < n {
                    carry = Some(b.and(x[i], y[i]));
                }
            }
            Some(c) => {
                let t1 = b.xor(x[i], c);
                out.push(b.xor(t1, y[i]));
                if i + 1 < n {
                    let t2 = b.xor(y[i], c);
                    let t = b.and(t1, t2);
                    carry = Some(b.xor(c, t));
                }
            }
        }
    }
    out
}

fn ripple_add(b: &mut CircuitBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let mut out = Vec::with_capacity(x.len() + 1);
    let mut carry: Option<WireId> = None;
    for i in 0..x.len() {
        match carry {
            None => {
                out.push(b.xor(x[i], y[i]));
                carry = Some(b.and(x[i], y[i]));
            }
            Some(c) => {
                let t1 = b.xor(x[i], c);
                let t2 = b.xor(y[i], c);
                out.push(b.xor(t1, y[i]));
                let t = b.and(t1, t2);
                carry = Some(b.xor(c, t));
            }
        }
    }
    out.extend(carry);
    out
}

fn multiply_truncated(b: &mut CircuitBuilder, x: &[WireId], y: &[WireId]) -> Vec<WireId> {
    let n = x.len();
    let mut acc: Vec<WireId> = x.iter().map(|&xi| b.and(xi, y[0])).collect();
    for s in 1..n {
        let pp: Vec<WireId> = x[..n - s].iter().map(|&xi| b.and(xi, y[s])).collect();
        let sum = add_truncated(b, &acc[s..], &pp);
        acc.splice(s.., sum);
    }
    acc
}

pub fn gen_test_circuit(kind: &GenKind) -> Result<Circuit, NetlistError> {
    let positive = |v: usize| {
        if v == 0 {
            Err(NetlistError::Invalid(format!("{kind}: size parameters must be positive")))
        } else {
            Ok(())
        }
    };
    let mut b = CircuitBuilder::new();
    let outputs: Vec<Vec<WireId>> = match *kind {
        GenKind::Chain { len, op } => {
            positive(len)?;
            let x = b.input(2);
            let mut w = b.gate(chain_op(op, 0), x[0], x[1]);
            for i in 1..len {
                w = b.gate(chain_op(op, i), w, x[i % 2]);
            }
            vec![vec![w]]
        }
        GenKind::Parallel { op, width } => {
            positive(width)?;
            let x = b.input((width * op.arity()) as u32);
            let outs = (0..width)
                .map(|i| match op {
                    GateOp::Inv => b.inv(x[i]),
                    _ => b.gate(op, x[2 * i], x[2 * i + 1]),
                })
                .collect();
            vec![outs]
        }
        GenKind::XorTree { inputs } => {
            positive(inputs)?;
            if inputs < 2 {
                return Err(NetlistError::Invalid("xor_tree needs at least 2 inputs".into()));
            }
            let mut layer = b.input(inputs as u32);
            while layer.len() > 1 {
                let mut next: Vec<WireId> =
                    layer.chunks_exact(2).map(|p| b.xor(p[0], p[1])).collect();
                if layer.len() % 2 == 1 {
                    next.push(*layer.last().unwrap());
                }
                layer = next;
            }
            vec![layer]
        }
        GenKind::Adder { bits } => {
            positive(bits)?;
            let x = b.input(bits as u32);
            let y = b.input(bits as u32);
            vec![ripple_add(&mut b, &x, &y)]
        }
        GenKind::MatmulLike { n, bits } => {
            positive(n)?;
            positive(bits)?;
            let a: Vec<Vec<WireId>> = (0..n * n).map(|_| b.input(bits as u32)).collect();
            let m: Vec<Vec<WireId>> = (0..n * n).map(|_| b.input(bits as u32)).collect();
            let mut outs = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut terms: Vec<Vec<WireId>> = (0..n)
                        .map(|k| multiply_truncated(&mut b, &a[i * n + k], &m[k * n + j]))
                        .collect();
                    while terms.len() > 1 {
                        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
                        let mut it = terms.chunks(2);
                        for pair in &mut it {
                            match pair {
                                [x, y] => next.push(add_truncated(&mut b, x, y)),
                                [x] => next.push(x.clone()),
                                _ => unreachable!(),
                            }
                        }
                        terms = next;
                    }
                    outs.push(terms.pop().unwrap());
                }
            }
            outs
        }
        GenKind::Chains { count, len, op } => {
            positive(count)?;
            positive(len)?;
            let x = b.input(2 * count as u32);
            let mut outs = Vec::with_capacity(count);
            for c in 0..count {
                let (x0, x1) = (x[2 * c], x[2 * c + 1]);
                let mut w = b.gate(op.unwrap_or(GateOp::And), x0, x1);
                for i in 1..len {
                    let other = if i % 2 == 0 { x0 } else { x1 };
                    w = b.gate(op.unwrap_or(GateOp::And), w, other);
                }
                outs.push(w);
            }
            vec![outs]
        }
        GenKind::Blocks { blocks, width } => {
            positive(blocks)?;
            positive(width)?;
            let mut prev = b.input(width as u32);
            for blk in 0..blocks {
                let op = chain_op(None, blk);
                prev = (0..width)
                    .map(|j| b.gate(op, prev[j], prev[(j + 1) % width]))
                    .collect();
            }
            vec![prev]
        }
        GenKind::FanoutChains { width, depth } => {
            positive(width)?;
            positive(depth)?;
            let x = b.input(width as u32);
            let edge = b.input(1)[0];
            // columns[j][l] = node (l, j)
            let mut columns: Vec<Vec<WireId>> = Vec::with_capacity(width);
            for j in 0..width {
                let mut col = Vec::with_capacity(depth);
                for l in 0..depth {
                    let up = if l == 0 { x[j] } else { col[l - 1] };
                    let left = match (l, j) {
                        (_, 0) => edge,
                        (0, _) => x[j - 1],
                        _ => columns[j - 1][l - 1],
                    };
                    col.push(b.gate(chain_op(None, l), up, left));
                }
                columns.push(col);
            }
            vec![columns.iter().map(|c| c[depth - 1]).collect()]
        }
    };
    b.finish(&outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{level_schedule, plaintext_evaluate};

    fn bits(v: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| (v >> i) & 1 == 1).collect()
    }

    fn value(b: &[bool]) -> u64 {
        b.iter().enumerate().map(|(i, &x)| (x as u64) << i).sum()
    }

    #[test]
    fn chain_shape() {
        let c = gen_test_circuit(&GenKind::Chain { len: 5, op: None }).unwrap();
        assert_eq!(c.gates().len(), 5);
        assert_eq!(level_schedule(&c).1.num_levels, 5);
    }

    #[test]
    fn parallel_and_profile() {
        let c = gen_test_circuit(&GenKind::Parallel {
            op: GateOp::And,
            width: 64,
        })
        .unwrap();
        let (_, st) = level_schedule(&c);
        assert_eq!(c.gates().len(), 64);
        assert_eq!(st.num_levels, 1);
        assert_eq!(st.and_fraction, 1.0);
    }

    #[test]
    fn matmul_matches_integer_product() {
        let (n, w) = (3usize, 6usize);
        let c = gen_test_circuit(&GenKind::MatmulLike { n, bits: w }).unwrap();
        let mask = (1u64 << w) - 1;
        let a: Vec<u64> = (0..n * n).map(|i| (i as u64 * 37 + 11) & mask).collect();
        let m: Vec<u64> = (0..n * n).map(|i| (i as u64 * 53 + 5) & mask).collect();
        let input: Vec<bool> = a.iter().chain(&m).flat_map(|&v| bits(v, w)).collect();
        let out = plaintext_evaluate(&c, &input).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = (0..n).map(|k| a[i * n + k] * m[k * n + j]).sum::<u64>() & mask;
                let idx = (i * n + j) * w;
                assert_eq!(value(&out[idx..idx + w]), expect);
            }
        }
    }

    #[test]
    fn fanout_levels_match_rows() {
        let c = gen_test_circuit(&GenKind::FanoutChains { width: 4, depth: 6 }).unwrap();
        let (lv, st) = level_schedule(&c);
        assert_eq!(st.num_levels, 6);
        assert!(st.gates_per_level.iter().all(|&g| g == 4));
        // column-major emission: first six gates form column 0
        assert_eq!(&lv[..6], &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn builder_buffers_input_outputs() {
        let mut b = CircuitBuilder::new();
        let x = b.input(2);
        let c = b.finish(&[vec![x[1], x[0], x[1]]]).unwrap();
        assert_eq!(plaintext_evaluate(&c, &[true, false]).unwrap(), vec![false, true, false]);
    }

    #[test]
    fn kind_round_trips_through_text() {
        for s in [
            "chain:20",
            "chain:4:and",
            "parallel:and:64",
            "xor_tree:8",
            "adder:8",
            "matmul:4:8",
            "chains:4:10",
            "blocks:3:8",
            "fanout:8:32",
        ] {
            assert_eq!(s.parse::<GenKind>().unwrap().to_string(), s);
        }
        assert!("sorter:3".parse::<GenKind>().is_err());
        assert!("chain:0".parse::<GenKind>().map(|k| gen_test_circuit(&k)).unwrap().is_err());
    }
}
