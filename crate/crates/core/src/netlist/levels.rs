use serde::Serialize;

use super::{Circuit, GateOp};

/// Summary of the ASAP dependence levels of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub num_levels: u32,
    /// `gates_per_level[l]` counts gates at level `l + 1`.
    pub gates_per_level: Vec<u64>,
    pub and_fraction: f64,
    /// Average instruction-level parallelism: gates / levels.
    pub avg_ilp: f64,
}

/// ASAP levels: primary inputs sit at level 0 and every gate at one more
/// than its deepest producer.
pub fn level_schedule(c: &Circuit) -> (Vec<u32>, LevelStats) {
    let mut wire_level = vec![0u32; c.num_wires() as usize];
    let mut levels = Vec::with_capacity(c.gates().len());
    let mut gates_per_level: Vec<u64> = Vec::new();
    for g in c.gates() {
        let lvl = 1 + g.inputs().iter().map(|&w| wire_level[w as usize]).max().unwrap_or(0);
        wire_level[g.output as usize] = lvl;
        levels.push(lvl);
        if gates_per_level.len() < lvl as usize {
            gates_per_level.resize(lvl as usize, 0);
        }
        gates_per_level[lvl as usize - 1] += 1;
    }
    let n = c.gates().len();
    let num_levels = gates_per_level.len() as u32;
    let ands = c.gates().iter().filter(|g| g.op == GateOp::And).count();
    let stats = LevelStats {
        num_levels,
        gates_per_level,
        and_fraction: if n == 0 { 0.0 } else { ands as f64 / n as f64 },
        avg_ilp: if num_levels == 0 {
            0.0
        } else {
            n as f64 / num_levels as f64
        },
    };
    (levels, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{gen_test_circuit, GenKind};

    #[test]
    fn chain_levels() {
        let c = gen_test_circuit(&GenKind::Chain { len: 7, op: None }).unwrap();
        let (lv, st) = level_schedule(&c);
        assert_eq!(st.num_levels, 7);
        assert_eq!(lv, (1..=7).collect::<Vec<_>>());
    }

    #[test]
    fn xor_tree_depth() {
        let c = gen_test_circuit(&GenKind::XorTree { inputs: 8 }).unwrap();
        let (_, st) = level_schedule(&c);
        assert_eq!(c.gates().len(), 7);
        assert_eq!(st.num_levels, 3);
        assert_eq!(st.gates_per_level, vec![4, 2, 1]);
    }

    #[test]
    fn parallel_block() {
        let c = gen_test_circuit(&GenKind::Parallel {
            op: GateOp::And,
            width: 64,
        })
        .unwrap();
        let (_, st) = level_schedule(&c);
        assert_eq!(st.num_levels, 1);
        assert_eq!(st.avg_ilp, 64.0);
        assert_eq!(st.and_fraction, 1.0);
    }

    #[test]
    fn empty_circuit() {
        let c = Circuit::new(2, vec![2], vec![2], vec![0, 1], vec![]).unwrap();
        let (lv, st) = level_schedule(&c);
        assert!(lv.is_empty());
        assert_eq!(st.num_levels, 0);
        assert_eq!(st.avg_ilp, 0.0);
    }
}
