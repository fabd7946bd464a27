//! Classic Bristol circuit format.
//!
//! ```text
//! <num_gates> <num_wires>
//! <num_input_values> <bits_per_input...>
//! <num_output_values> <bits_per_output...>
//!
//! <n_in> <n_out> <in_wire...> <out_wire> <AND|XOR|INV>
//! ```
//!
//! Inputs occupy wires `0..sum(bits_per_input)` and outputs are the last
//! `sum(bits_per_output)` wires.

use std::fmt::Write as _;

use super::{Circuit, Gate, GateOp, NetlistError, WireId};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_ascii_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

fn number(tok: &Token<'_>, line: usize) -> Result<u32, NetlistError> {
    tok.text.parse::<u32>().map_err(|_| NetlistError::Syntax {
        line,
        column: tok.column,
        message: format!("expected a non-negative integer, found `{}`", tok.text),
    })
}

fn expect_len(toks: &[Token<'_>], n: usize, line: usize, what: &str) -> Result<(), NetlistError> {
    if toks.len() < n {
        let column = toks.last().map(|t| t.column + t.text.len()).unwrap_or(1);
        return Err(NetlistError::Syntax {
            line,
            column,
            message: format!("{what}: expected {n} fields, found {}", toks.len()),
        });
    }
    if toks.len() > n {
        return Err(NetlistError::Syntax {
            line,
            column: toks[n].column,
            message: format!("{what}: unexpected trailing field `{}`", toks[n].text),
        });
    }
    Ok(())
}

/// Parses a value-group header line. A line holding only the count is read
/// as that many single-bit values.
fn groups(toks: &[Token<'_>], line: usize, what: &str) -> Result<Vec<u32>, NetlistError> {
    if toks.is_empty() {
        return Err(NetlistError::Syntax {
            line,
            column: 1,
            message: format!("{what}: missing value count"),
        });
    }
    let count = number(&toks[0], line)? as usize;
    if toks.len() == 1 {
        return Ok(vec![1; count]);
    }
    expect_len(toks, count + 1, line, what)?;
    toks[1..].iter().map(|t| number(t, line)).collect()
}

pub fn parse_bristol(text: &str) -> Result<Circuit, NetlistError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, tokens(l)))
        .filter(|(_, t)| !t.is_empty());

    let eof = |what: &str| NetlistError::Syntax {
        line: text.lines().count() + 1,
        column: 1,
        message: format!("unexpected end of input, expected {what}"),
    };

    let (ln, head) = lines.next().ok_or_else(|| eof("header"))?;
    expect_len(&head, 2, ln, "header")?;
    let num_gates = number(&head[0], ln)? as usize;
    let num_wires = number(&head[1], ln)?;

    let (ln, toks) = lines.next().ok_or_else(|| eof("input declaration"))?;
    let input_groups = groups(&toks, ln, "input declaration")?;
    let (ln, toks) = lines.next().ok_or_else(|| eof("output declaration"))?;
    let output_groups = groups(&toks, ln, "output declaration")?;

    let n_in: u64 = input_groups.iter().map(|&b| b as u64).sum();
    let n_out: u64 = output_groups.iter().map(|&b| b as u64).sum();
    if n_in > num_wires as u64 || n_out > num_wires as u64 {
        return Err(NetlistError::Semantic {
            line: ln,
            message: format!("{n_in} inputs / {n_out} outputs exceed {num_wires} wires"),
        });
    }

    let mut defined = vec![false; num_wires as usize];
    defined[..n_in as usize].iter_mut().for_each(|d| *d = true);
    let mut gates = Vec::with_capacity(num_gates);
    let mut last_line = ln;

    for (ln, toks) in lines {
        last_line = ln;
        if toks.len() < 4 {
            return Err(NetlistError::Syntax {
                line: ln,
                column: toks.last().map(|t| t.column + t.text.len()).unwrap_or(1),
                message: "gate line too short".into(),
            });
        }
        let n_ins = number(&toks[0], ln)? as usize;
        let n_outs = number(&toks[1], ln)? as usize;
        expect_len(&toks, 2 + n_ins + n_outs + 1, ln, "gate")?;
        let tag = &toks[toks.len() - 1];
        let op = GateOp::from_tag(tag.text).ok_or_else(|| NetlistError::Semantic {
            line: ln,
            message: format!("unsupported gate `{}`", tag.text),
        })?;
        if n_ins != op.arity() || n_outs != 1 {
            return Err(NetlistError::Semantic {
                line: ln,
                message: format!("{op} takes {} inputs and 1 output, got {n_ins}/{n_outs}", op.arity()),
            });
        }
        let mut ins: Vec<WireId> = Vec::with_capacity(2);
        for t in &toks[2..2 + n_ins] {
            let w = number(t, ln)?;
            if w >= num_wires || !defined[w as usize] {
                return Err(NetlistError::Semantic {
                    line: ln,
                    message: format!("wire {w} used before definition"),
                });
            }
            ins.push(w);
        }
        let out = number(&toks[2 + n_ins], ln)?;
        if out >= num_wires {
            return Err(NetlistError::Semantic {
                line: ln,
                message: format!("output wire {out} out of range (num_wires = {num_wires})"),
            });
        }
        if defined[out as usize] {
            return Err(NetlistError::Semantic {
                line: ln,
                message: format!("wire {out} defined more than once"),
            });
        }
        defined[out as usize] = true;
        gates.push(Gate::new(op, &ins, out));
    }

    if gates.len() != num_gates {
        return Err(NetlistError::Semantic {
            line: last_line,
            message: format!("header declares {num_gates} gates, found {}", gates.len()),
        });
    }

    let outputs: Vec<WireId> = (num_wires - n_out as u32..num_wires).collect();
    Circuit::new(num_wires, input_groups, output_groups, outputs, gates).map_err(|e| {
        NetlistError::Semantic {
            line: last_line,
            message: e.to_string(),
        }
    })
}

/// Serializes a circuit. Fails only when the outputs are not the trailing
/// wires, which classic Bristol cannot express.
pub fn write_bristol(c: &Circuit) -> Result<String, NetlistError> {
    let n_out = c.outputs().len() as u32;
    let expected = c.num_wires() - n_out..c.num_wires();
    if !c.outputs().iter().copied().eq(expected) {
        return Err(NetlistError::NotBristol(
            "outputs must be the last wires in ascending order".into(),
        ));
    }
    let mut s = String::new();
    let join = |g: &[u32]| {
        let mut line = g.len().to_string();
        for b in g {
            line.push(' ');
            line.push_str(&b.to_string());
        }
        line
    };
    let _ = writeln!(s, "{} {}", c.gates().len(), c.num_wires());
    let _ = writeln!(s, "{}", join(c.input_groups()));
    let _ = writeln!(s, "{}", join(c.output_groups()));
    if !c.gates().is_empty() {
        s.push('\n');
    }
    for g in c.gates() {
        let ins = g.inputs();
        let _ = write!(s, "{} 1", ins.len());
        for w in ins {
            let _ = write!(s, " {w}");
        }
        let _ = writeln!(s, " {} {}", g.output, g.op);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_circuit() {
        let c = parse_bristol("1 3\n2 1 1\n1 1\n2 1 0 1 2 AND\n").unwrap();
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.gates()[0].op, GateOp::And);
        assert_eq!(c.inputs(), 0..2);
        assert_eq!(c.outputs(), &[2]);
    }

    #[test]
    fn count_only_output_line() {
        let c = parse_bristol("1 3\n2 1 1\n1\n2 1 0 1 2 AND\n").unwrap();
        assert_eq!(c.output_groups(), &[1]);
    }

    #[test]
    fn use_before_definition() {
        let err = parse_bristol("2 6\n1 2\n1 1\n2 1 0 5 4 AND\n2 1 0 1 5 XOR\n").unwrap_err();
        assert!(matches!(err, NetlistError::Semantic { line: 4, .. }), "{err}");
    }

    #[test]
    fn multiply_defined() {
        let err = parse_bristol("2 3\n1 2\n1 1\n2 1 0 1 2 AND\n2 1 0 1 2 XOR\n").unwrap_err();
        assert!(matches!(err, NetlistError::Semantic { line: 5, .. }), "{err}");
    }

    #[test]
    fn unsupported_tag() {
        let err = parse_bristol("1 3\n1 2\n1 1\n2 1 0 1 2 OR\n").unwrap_err();
        assert!(err.to_string().contains("unsupported gate"));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_bristol("1 3\n1 2\n1 1\n2 1 0 x 2 AND\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Syntax {
                line: 4,
                column: 7,
                message: "expected a non-negative integer, found `x`".into()
            }
        );
    }

    #[test]
    fn gate_count_mismatch() {
        assert!(parse_bristol("2 3\n1 2\n1 1\n2 1 0 1 2 AND\n").is_err());
    }

    #[test]
    fn empty_gate_circuit_writes_header_only() {
        let c = Circuit::new(2, vec![1, 1], vec![2], vec![0, 1], vec![]).unwrap();
        assert_eq!(write_bristol(&c).unwrap(), "0 2\n2 1 1\n1 2\n");
    }

    #[test]
    fn one_gate_line() {
        let c = Circuit::new(2, vec![1], vec![1], vec![1], vec![Gate::inv(0, 1)]).unwrap();
        let text = write_bristol(&c).unwrap();
        assert_eq!(text.lines().filter(|l| l.ends_with("INV")).count(), 1);
        assert_eq!(parse_bristol(&text).unwrap(), c);
    }

    #[test]
    fn non_trailing_outputs_rejected() {
        let c = Circuit::new(3, vec![2], vec![1], vec![0], vec![Gate::and(0, 1, 2)]).unwrap();
        assert!(matches!(write_bristol(&c), Err(NetlistError::NotBristol(_))));
    }
}
