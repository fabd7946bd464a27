use crate::isa::{Opcode, Program};

use super::window::WindowModel;
use super::CompileError;

/// ASAP level of every instruction; inputs sit at level 0.
pub fn program_levels(p: &Program) -> Result<Vec<u32>, CompileError> {
    if p.oor_addrs.is_some() {
        return Err(CompileError::AlreadyLowered);
    }
    let mut level_of = vec![0u32; p.max_address() as usize + 1];
    let mut levels = Vec::with_capacity(p.len());
    for (ins, &out) in p.instructions.iter().zip(&p.output_addrs) {
        let lvl = if ins.op == Opcode::Nop {
            0
        } else {
            1 + level_of[ins.in0 as usize].max(level_of[ins.in1 as usize])
        };
        level_of[out as usize] = lvl;
        levels.push(lvl);
    }
    Ok(levels)
}

fn permute(p: &Program, order: &[usize], pass: String) -> Program {
    let mut q = p.clone();
    q.instructions = order.iter().map(|&i| p.instructions[i]).collect();
    q.output_addrs = order.iter().map(|&i| p.output_addrs[i]).collect();
    q.meta.passes.push(pass);
    q
}

/// Stable sort of the whole program by dependence level.
pub fn reorder_full(p: &Program) -> Result<Program, CompileError> {
    let levels = program_levels(p)?;
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&i| levels[i]);
    Ok(permute(p, &order, "full".into()))
}

/// Level sort within consecutive segments of `segment_size` instructions.
/// Levels are local to the segment: operands produced earlier count as
/// level 0.
pub fn reorder_segment(p: &Program, segment_size: usize) -> Result<Program, CompileError> {
    if segment_size == 0 {
        return Err(CompileError::Pass("segment size must be at least 1".into()));
    }
    if p.oor_addrs.is_some() {
        return Err(CompileError::AlreadyLowered);
    }
    let mut local = vec![0u32; p.max_address() as usize + 1];
    let mut order = Vec::with_capacity(p.len());
    let mut seg_levels = Vec::with_capacity(segment_size.min(p.len()));
    for start in (0..p.len()).step_by(segment_size) {
        let end = (start + segment_size).min(p.len());
        seg_levels.clear();
        for k in start..end {
            let ins = &p.instructions[k];
            let lvl = if ins.op == Opcode::Nop {
                0
            } else {
                1 + local[ins.in0 as usize].max(local[ins.in1 as usize])
            };
            local[p.output_addrs[k] as usize] = lvl;
            seg_levels.push(lvl);
        }
        let mut idx: Vec<usize> = (start..end).collect();
        idx.sort_by_key(|&k| seg_levels[k - start]);
        order.extend(idx);
        // wires from this segment are level 0 for the next one
        for k in start..end {
            local[p.output_addrs[k] as usize] = 0;
        }
    }
    let mut q = permute(p, &order, format!("segment:{segment_size}"));
    q.meta.segment_size = Some(segment_size);
    Ok(q)
}

/// Renames instruction outputs to `num_inputs + 1 + k` and rewrites every
/// operand through the old-to-new map.
pub fn rename_wires(p: &Program) -> Program {
    let mut map: Vec<u32> = (0..=p.max_address()).collect();
    for (k, &old) in p.output_addrs.iter().enumerate() {
        map[old as usize] = p.num_inputs + 1 + k as u32;
    }
    let mut q = p.clone();
    for ins in &mut q.instructions {
        ins.in0 = map[ins.in0 as usize];
        ins.in1 = map[ins.in1 as usize];
    }
    for a in q.output_addrs.iter_mut().chain(q.outputs.iter_mut()) {
        *a = map[*a as usize];
    }
    if let Some(oor) = &mut q.oor_addrs {
        for a in oor {
            *a = map[*a as usize];
        }
    }
    q.meta.passes.push("rename".into());
    q
}

/// Eliminates spent wires: an output stays live only when it is a circuit
/// output or some consumer lies two or more halves above it.
pub fn mark_live(p: &Program, w: &WindowModel) -> Result<Program, CompileError> {
    if !p.is_renamed() {
        return Err(CompileError::NotRenamed);
    }
    let n_in = p.num_inputs as u64;
    let mut live = vec![false; p.len()];
    for &o in &p.outputs {
        if o as u64 > n_in {
            live[(o as u64 - n_in - 1) as usize] = true;
        }
    }
    for (ops, &out) in p.resolved_operands()?.iter().zip(&p.output_addrs) {
        for &a in ops {
            if a as u64 > n_in && w.is_oor(a as u64, out as u64) {
                live[(a as u64 - n_in - 1) as usize] = true;
            }
        }
    }
    let mut q = p.clone();
    for (ins, l) in q.instructions.iter_mut().zip(live) {
        ins.live = l;
    }
    q.meta.passes.push("esw".into());
    q.meta.window_capacity = Some(w.capacity());
    q.meta.live_marked = true;
    Ok(q)
}

/// Replaces out-of-range operands with 0 and records their addresses in
/// consumption order (in0 before in1).
pub fn lower_oor(p: &Program, w: &WindowModel) -> Result<Program, CompileError> {
    if !p.is_renamed() {
        return Err(CompileError::NotRenamed);
    }
    if p.oor_addrs.is_some() {
        return Err(CompileError::AlreadyLowered);
    }
    let n_in = p.num_inputs as u64;
    let mut q = p.clone();
    let mut oor = Vec::new();
    for k in 0..q.len() {
        let out = q.output_addrs[k] as u64;
        if q.instructions[k].op == Opcode::Nop {
            continue;
        }
        let mut ops = q.instructions[k].operands();
        for a in ops.iter_mut() {
            let addr = *a as u64;
            if w.is_oor(addr, out) {
                if addr > n_in && !p.instructions[(addr - n_in - 1) as usize].live {
                    return Err(CompileError::SpentOor { pos: k, addr: *a });
                }
                oor.push(*a);
                *a = 0;
            }
        }
        q.instructions[k].in0 = ops[0];
        q.instructions[k].in1 = ops[1];
    }
    q.oor_addrs = Some(oor);
    q.meta.passes.push("oor".into());
    q.meta.window_capacity = Some(w.capacity());
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::check_window;
    use crate::isa::{assemble, interpret, Instruction};
    use crate::netlist::gen_test_circuit;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn program(kind: &str) -> Program {
        assemble(&gen_test_circuit(&kind.parse().unwrap()).unwrap())
    }

    fn same_semantics(a: &Program, b: &Program, rng: &mut ChaCha8Rng) {
        for _ in 0..20 {
            let bits: Vec<bool> = (0..a.num_circuit_inputs()).map(|_| rng.gen()).collect();
            assert_eq!(interpret(a, &bits).unwrap(), interpret(b, &bits).unwrap());
        }
    }

    #[test]
    fn full_keeps_trivial_orders() {
        for kind in ["parallel:and:64", "chain:5"] {
            let p = program(kind);
            assert_eq!(reorder_full(&p).unwrap().instructions, p.instructions);
        }
    }

    #[test]
    fn full_interleaves_depth_first_chains() {
        // emitted A1 A2 A3 A4 B1 B2 B3 B4; level order pairs A_i with B_i
        let p = program("chains:2:4:and");
        let levels = program_levels(&p).unwrap();
        let q = reorder_full(&p).unwrap();
        let ql = program_levels(&q).unwrap();
        assert!(ql.windows(2).all(|w| w[0] <= w[1]));
        let mut expect = levels.clone();
        expect.sort();
        assert_eq!(ql, expect);
        assert_eq!(&q.output_addrs[..2], &[p.output_addrs[0], p.output_addrs[4]]);
    }

    #[test]
    fn segment_extremes() {
        let p = program("matmul:2:4");
        assert_eq!(reorder_segment(&p, p.len()).unwrap().instructions, reorder_full(&p).unwrap().instructions);
        assert_eq!(reorder_segment(&p, 1).unwrap().instructions, p.instructions);
        assert!(reorder_segment(&p, 0).is_err());
    }

    #[test]
    fn rename_is_a_fixpoint_on_baseline() {
        let p = program("adder:8");
        assert_eq!(rename_wires(&p).instructions, p.instructions);
    }

    #[test]
    fn shuffle_then_rename_preserves_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = program("matmul:2:3");
        for _ in 0..5 {
            // random topological order: repeatedly pick any ready instruction
            let levels = program_levels(&p).unwrap();
            let mut keyed: Vec<(u32, u32, usize)> =
                (0..p.len()).map(|k| (levels[k], rng.gen(), k)).collect();
            keyed.shuffle(&mut rng);
            keyed.sort();
            let order: Vec<usize> = keyed.iter().map(|x| x.2).collect();
            let q = rename_wires(&permute(&p, &order, "shuffle".into()));
            assert!(q.is_renamed());
            same_semantics(&p, &q, &mut rng);
        }
    }

    /// Hand-built program: two inputs, outputs at 3..; window of 8 (H = 4).
    fn hand(instrs: &[(u32, u32)], outputs: &[u32]) -> Program {
        Program {
            instructions: instrs
                .iter()
                .map(|&(in0, in1)| Instruction {
                    op: Opcode::Xor,
                    in0,
                    in1,
                    live: true,
                })
                .collect(),
            output_addrs: (0..instrs.len() as u32).map(|k| 3 + k).collect(),
            num_inputs: 2,
            input_groups: vec![2],
            output_groups: vec![outputs.len() as u32],
            one_wire: None,
            outputs: outputs.to_vec(),
            oor_addrs: None,
            meta: Default::default(),
        }
    }

    #[test]
    fn same_half_reuse_is_spent() {
        let w = WindowModel::new(8).unwrap();
        let p = hand(&[(1, 2), (3, 1)], &[4]);
        let q = mark_live(&p, &w).unwrap();
        assert!(!q.instructions[0].live);
        assert!(q.instructions[1].live);
    }

    #[test]
    fn two_halves_up_is_live_and_oor() {
        let w = WindowModel::new(8).unwrap();
        // addresses 3..=14: producer 3 (half 0) consumed by output 13 (half 3)
        let mut instrs = vec![(1, 2)];
        for a in 3..13 {
            instrs.push((a, a));
        }
        instrs[10] = (12, 3);
        let p = hand(&instrs, &[13]);
        let q = lower_oor(&mark_live(&p, &w).unwrap(), &w).unwrap();
        assert!(q.instructions[0].live);
        assert_eq!(q.oor_addrs.as_deref(), Some(&[3][..]));
        assert_eq!(q.instructions[10].in1, 0);
        check_window(&q, &w).unwrap();
        assert_eq!(q.instructions.iter().filter(|i| i.live).count(), 2);
    }

    #[test]
    fn program_inside_initial_window_has_no_oor() {
        let w = WindowModel::new(1 << 10).unwrap();
        let p = program("adder:16");
        let q = lower_oor(&mark_live(&p, &w).unwrap(), &w).unwrap();
        assert!(q.oor_addrs.unwrap().is_empty());
        assert_eq!(q.instructions.iter().filter(|i| i.live).count(), 17);
    }

    #[test]
    fn spent_oor_is_rejected() {
        let w = WindowModel::new(8).unwrap();
        let mut instrs = vec![(1, 2)];
        for a in 3..13 {
            instrs.push((a, a));
        }
        instrs[10] = (12, 3);
        let mut p = hand(&instrs, &[13]);
        p.instructions[0].live = false;
        assert!(matches!(lower_oor(&p, &w), Err(CompileError::SpentOor { pos: 10, addr: 3 })));
    }

    #[test]
    fn passes_preserve_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = WindowModel::new(32).unwrap();
        for kind in ["adder:16", "matmul:2:4", "fanout:6:20", "chains:3:30", "xor_tree:64"] {
            let p = program(kind);
            for q in [reorder_full(&p).unwrap(), reorder_segment(&p, 16).unwrap(), p.clone()] {
                let r = lower_oor(&mark_live(&rename_wires(&q), &w).unwrap(), &w).unwrap();
                check_window(&r, &w).unwrap();
                same_semantics(&p, &r, &mut rng);
            }
        }
    }

    #[test]
    fn lowered_programs_cannot_be_reordered() {
        let w = WindowModel::new(8).unwrap();
        let p = lower_oor(&program("chain:40"), &w).unwrap();
        assert_eq!(reorder_full(&p).unwrap_err(), CompileError::AlreadyLowered);
    }
}
