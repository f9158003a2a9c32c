//! Unit-cost RAM with accumulators `A`, `B` and an unbounded register file.
//!
//! ```text
//! LA c       # A := c, c >= 0
//! LB c       # B := c, c >= 0
//! AOP op     # A := A op B
//! BOP op     # B := A op B
//! MAB        # B := A
//! MBA        # A := B
//! LOAD       # A := R_A, A >= 0
//! STORE      # R_A := B, A >= 0
//! JEQ i j    # goto i if A = B, else goto j
//! HALT
//! ```
//!
//! `op` is one of `+ - * /`; the basic operation set only admits `+` and
//! `-`. Division rounds toward negative infinity. Inputs go to `R_1 ..
//! R_p` and the output is read from `A`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{words, MachineError, Result, RunResult};
use crate::numeric::Int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RamOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RamOp {
    fn symbol(self) -> &'static str {
        match self {
            RamOp::Add => "+",
            RamOp::Sub => "-",
            RamOp::Mul => "*",
            RamOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OpSet {
    /// `{+, -}`
    #[default]
    Basic,
    /// `{+, -, *, /}`
    Full,
}

impl OpSet {
    pub fn allows(self, op: RamOp) -> bool {
        matches!(op, RamOp::Add | RamOp::Sub) || self == OpSet::Full
    }
}

impl FromStr for OpSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<OpSet, String> {
        match s {
            "basic" => Ok(OpSet::Basic),
            "full" => Ok(OpSet::Full),
            other => Err(format!("unknown operation set `{other}` (expected basic or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RamInstr {
    LoadA(Int),
    LoadB(Int),
    OpA(RamOp),
    OpB(RamOp),
    MoveAB,
    MoveBA,
    Load,
    Store,
    Jeq(usize, usize),
    Halt,
}

impl fmt::Display for RamInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RamInstr::LoadA(c) => write!(f, "LA {c}"),
            RamInstr::LoadB(c) => write!(f, "LB {c}"),
            RamInstr::OpA(op) => write!(f, "AOP {}", op.symbol()),
            RamInstr::OpB(op) => write!(f, "BOP {}", op.symbol()),
            RamInstr::MoveAB => write!(f, "MAB"),
            RamInstr::MoveBA => write!(f, "MBA"),
            RamInstr::Load => write!(f, "LOAD"),
            RamInstr::Store => write!(f, "STORE"),
            RamInstr::Jeq(i, j) => write!(f, "JEQ {i} {j}"),
            RamInstr::Halt => write!(f, "HALT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RamProgram {
    pub instructions: Vec<RamInstr>,
    pub opset: OpSet,
}

impl fmt::Display for RamProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

/// Parse RAM program text, rejecting operations outside `opset`.
pub fn load_ram(text: &str, opset: OpSet) -> Result<RamProgram> {
    let mut instructions = Vec::new();
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let Some(w) = words(raw) else { continue };
        let err = |message: String| MachineError::Parse { line, message };
        let arity = |n: usize| {
            if w.len() == n + 1 {
                Ok(())
            } else {
                Err(err(format!("{} takes {n} operand(s)", w[0])))
            }
        };
        let constant = |s: &str| match s.parse::<Int>() {
            Ok(c) if !c.is_negative() => Ok(c),
            _ => Err(err(format!("bad constant `{s}` (natural numbers only)"))),
        };
        let op = |s: &str| {
            let op = match s {
                "+" => RamOp::Add,
                "-" => RamOp::Sub,
                "*" => RamOp::Mul,
                "/" => RamOp::Div,
                other => return Err(err(format!("unknown operation `{other}`"))),
            };
            if opset.allows(op) {
                Ok(op)
            } else {
                Err(err(format!("operation `{s}` is not in the basic operation set")))
            }
        };
        let label = |s: &str| s.parse::<usize>().map_err(|_| MachineError::BadLabel { line, label: s.to_string() });
        let ins = match w[0] {
            "LA" => {
                arity(1)?;
                RamInstr::LoadA(constant(w[1])?)
            }
            "LB" => {
                arity(1)?;
                RamInstr::LoadB(constant(w[1])?)
            }
            "AOP" => {
                arity(1)?;
                RamInstr::OpA(op(w[1])?)
            }
            "BOP" => {
                arity(1)?;
                RamInstr::OpB(op(w[1])?)
            }
            "MAB" | "MBA" | "LOAD" | "STORE" | "HALT" => {
                arity(0)?;
                match w[0] {
                    "MAB" => RamInstr::MoveAB,
                    "MBA" => RamInstr::MoveBA,
                    "LOAD" => RamInstr::Load,
                    "STORE" => RamInstr::Store,
                    _ => RamInstr::Halt,
                }
            }
            "JEQ" => {
                arity(2)?;
                RamInstr::Jeq(label(w[1])?, label(w[2])?)
            }
            other => return Err(err(format!("unknown instruction `{other}`"))),
        };
        instructions.push(ins);
        lines.push(line);
    }
    let n = instructions.len();
    for (ins, &line) in instructions.iter().zip(&lines) {
        if let RamInstr::Jeq(i, j) = ins {
            if let Some(bad) = [i, j].into_iter().find(|&&p| p >= n) {
                return Err(MachineError::BadLabel { line, label: bad.to_string() });
            }
        }
    }
    Ok(RamProgram { instructions, opset })
}

fn apply(op: RamOp, a: &Int, b: &Int, pc: usize) -> Result<Int> {
    Ok(match op {
        RamOp::Add => a + b,
        RamOp::Sub => a - b,
        RamOp::Mul => a * b,
        RamOp::Div if b.is_zero() => return Err(MachineError::DivByZero { pc }),
        RamOp::Div => a.div_floor(b),
    })
}

fn address(a: &Int, pc: usize) -> Result<BigUint> {
    a.to_biguint().ok_or_else(|| MachineError::NegativeAddress { pc, address: a.clone() })
}

/// Run for at most `max_steps` instructions; the output is `A`.
pub fn run_ram(prog: &RamProgram, inputs: &[Int], max_steps: u64) -> Result<RunResult> {
    let mut regs: HashMap<BigUint, Int> = HashMap::new();
    for (i, v) in inputs.iter().enumerate() {
        regs.insert(BigUint::from(i + 1), v.clone());
    }
    let (mut a, mut b) = (Int::zero(), Int::zero());
    let mut pc = 0;
    let mut steps = 0;
    let mut halted = false;
    while steps < max_steps {
        let Some(ins) = prog.instructions.get(pc) else {
            halted = true;
            break;
        };
        steps += 1;
        let mut next = pc + 1;
        match ins {
            RamInstr::LoadA(c) => a = c.clone(),
            RamInstr::LoadB(c) => b = c.clone(),
            RamInstr::OpA(op) => a = apply(*op, &a, &b, pc)?,
            RamInstr::OpB(op) => b = apply(*op, &a, &b, pc)?,
            RamInstr::MoveAB => b = a.clone(),
            RamInstr::MoveBA => a = b.clone(),
            RamInstr::Load => a = regs.get(&address(&a, pc)?).cloned().unwrap_or_default(),
            RamInstr::Store => {
                regs.insert(address(&a, pc)?, b.clone());
            }
            RamInstr::Jeq(i, j) => next = if a == b { *i } else { *j },
            RamInstr::Halt => {
                halted = true;
                break;
            }
        }
        pc = next;
    }
    Ok(RunResult { output: a, steps, halted })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(v: i64) -> Int {
        Int::from(v)
    }

    #[test]
    fn double_via_accumulators() {
        let p = load_ram("LA 5\nMAB\nAOP +\nHALT\n", OpSet::Basic).unwrap();
        let r = run_ram(&p, &[], 100).unwrap();
        assert_eq!(r, RunResult { output: i(10), steps: 4, halted: true });
    }

    #[test]
    fn opset_is_checked_at_load() {
        assert!(matches!(load_ram("LA 2\nAOP *\nHALT", OpSet::Basic), Err(MachineError::Parse { line: 2, .. })));
        assert!(load_ram("LA 2\nAOP *\nHALT", OpSet::Full).is_ok());
    }

    #[test]
    fn division() {
        let p = load_ram("LA 1\nLB 0\nAOP /\nHALT", OpSet::Full).unwrap();
        assert_eq!(run_ram(&p, &[], 10).unwrap_err(), MachineError::DivByZero { pc: 2 });
        let p = load_ram("LA 0\nLB 7\nAOP -\nLB 2\nAOP /\nHALT", OpSet::Full).unwrap();
        assert_eq!(run_ram(&p, &[], 10).unwrap().output, i(-4));
    }

    #[test]
    fn indirect_addressing() {
        // R_1 holds a pointer; copy R_{R_1} to R_9 and read it back
        let text = "LA 1\nLOAD\nLOAD\nMAB\nLA 9\nSTORE\nLA 0\nLA 9\nLOAD\nHALT\n";
        let p = load_ram(text, OpSet::Basic).unwrap();
        let r = run_ram(&p, &[i(3), i(0), i(42)], 100).unwrap();
        assert_eq!(r.output, i(42));
        let p = load_ram("LA 0\nLB 1\nAOP -\nLOAD\nHALT", OpSet::Basic).unwrap();
        assert!(matches!(run_ram(&p, &[], 10), Err(MachineError::NegativeAddress { pc: 3, .. })));
    }

    #[test]
    fn jumps_and_step_limit() {
        let text = "LA 3\nLB 3\nJEQ 4 3\nHALT\nLA 7\nHALT\n";
        let p = load_ram(text, OpSet::Basic).unwrap();
        assert_eq!(p.to_string(), text);
        assert_eq!(run_ram(&p, &[], 100).unwrap(), RunResult { output: i(7), steps: 5, halted: true });
        let p = load_ram(&text.replace("LB 3", "LB 2"), OpSet::Basic).unwrap();
        assert_eq!(run_ram(&p, &[], 100).unwrap(), RunResult { output: i(3), steps: 4, halted: true });
        assert!(matches!(load_ram("JEQ 0 5\n", OpSet::Basic), Err(MachineError::BadLabel { line: 1, .. })));
        let spin = load_ram("JEQ 0 0\n", OpSet::Basic).unwrap();
        assert_eq!(run_ram(&spin, &[], 25).unwrap(), RunResult { output: i(0), steps: 25, halted: false });
    }

    #[test]
    fn constants_are_natural() {
        assert!(load_ram("LA -3\n", OpSet::Basic).is_err());
        assert!(load_ram("LA 12345678901234567890123\n", OpSet::Basic).is_ok());
    }
}
