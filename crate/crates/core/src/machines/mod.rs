//! Register machine and RAM simulators.
//!
//! Register machine programs are lines of
//!
//! ```text
//! ADD j k    # R_j := R_j + R_k
//! SUB j k    # R_j := R_j - R_k
//! SET j c    # R_j := c, c in {0, 1}
//! JZ j p     # goto p if R_j = 0
//! HALT
//! ```
//!
//! with 0-based line labels counting instructions only (blank and
//! comment lines are skipped). Inputs go to `R_1 .. R_p`, the output is
//! read from `R_0`. Executing `HALT` counts as a step.

pub mod ram;

use std::fmt;

use num_traits::Zero;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::numeric::Int;

pub use ram::{load_ram, run_ram, OpSet, RamInstr, RamOp, RamProgram};

/// Highest register index accepted in program text.
pub const MAX_REGISTER: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: register {register} out of range")]
    BadRegister { line: usize, register: String },
    #[error("line {line}: jump target {label} is not an instruction label")]
    BadLabel { line: usize, label: String },
    #[error("line {line}: constant {value} is not 0 or 1")]
    BadConstant { line: usize, value: String },
    #[error("{got} inputs do not fit a machine with {available} input registers")]
    TooManyInputs { available: usize, got: usize },
    #[error("division by zero at instruction {pc}")]
    DivByZero { pc: usize },
    #[error("negative address {address} at instruction {pc}")]
    NegativeAddress { pc: usize, address: Int },
}

pub type Result<T> = std::result::Result<T, MachineError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Add(usize, usize),
    Sub(usize, usize),
    Set(usize, u8),
    Jz(usize, usize),
    Halt,
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Add(j, k) => write!(f, "ADD {j} {k}"),
            Instr::Sub(j, k) => write!(f, "SUB {j} {k}"),
            Instr::Set(j, c) => write!(f, "SET {j} {c}"),
            Instr::Jz(j, p) => write!(f, "JZ {j} {p}"),
            Instr::Halt => write!(f, "HALT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineProgram {
    instructions: Vec<Instr>,
    num_registers: usize,
}

/// Split a program line into its instruction words, dropping comments.
/// Returns `None` for blank lines.
pub(crate) fn words(raw: &str) -> Option<Vec<&str>> {
    let content = raw.split('#').next().unwrap_or("").trim();
    (!content.is_empty()).then(|| content.split_whitespace().collect())
}

impl MachineProgram {
    /// Validate a list of instructions. Register count is one more than
    /// the highest index used, and at least one (`R_0`).
    pub fn new(instructions: Vec<Instr>) -> Result<MachineProgram> {
        let n = instructions.len();
        let mut num_registers = 1;
        for (line, ins) in instructions.iter().enumerate() {
            let regs: Vec<usize> = match ins {
                Instr::Add(j, k) | Instr::Sub(j, k) => vec![*j, *k],
                Instr::Set(j, c) => {
                    if *c > 1 {
                        return Err(MachineError::BadConstant { line, value: c.to_string() });
                    }
                    vec![*j]
                }
                Instr::Jz(j, p) => {
                    if *p >= n {
                        return Err(MachineError::BadLabel { line, label: p.to_string() });
                    }
                    vec![*j]
                }
                Instr::Halt => vec![],
            };
            for r in regs {
                if r > MAX_REGISTER {
                    return Err(MachineError::BadRegister { line, register: r.to_string() });
                }
                num_registers = num_registers.max(r + 1);
            }
        }
        Ok(MachineProgram { instructions, num_registers })
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// `k + 1` for registers `R_0 .. R_k`.
    pub fn num_registers(&self) -> usize {
        self.num_registers
    }

    /// SHA-256 of the canonical text, lowercase hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for MachineProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

/// Parse and validate program text; `line` in errors is 1-based.
pub fn load_program(text: &str) -> Result<MachineProgram> {
    let mut instructions = Vec::new();
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let Some(w) = words(raw) else { continue };
        let parse_err = |message: String| MachineError::Parse { line, message };
        let operand = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| parse_err(format!("bad operand `{s}`")))
        };
        let arity = |n: usize| -> Result<()> {
            if w.len() == n + 1 {
                Ok(())
            } else {
                Err(parse_err(format!("{} takes {n} operand(s)", w[0])))
            }
        };
        let register = |s: &str| -> Result<usize> {
            let r = operand(s)?;
            if r > MAX_REGISTER {
                Err(MachineError::BadRegister { line, register: s.to_string() })
            } else {
                Ok(r)
            }
        };
        let ins = match w[0] {
            "ADD" | "SUB" => {
                arity(2)?;
                let (j, k) = (register(w[1])?, register(w[2])?);
                if w[0] == "ADD" {
                    Instr::Add(j, k)
                } else {
                    Instr::Sub(j, k)
                }
            }
            "SET" => {
                arity(2)?;
                let j = register(w[1])?;
                match w[2] {
                    "0" => Instr::Set(j, 0),
                    "1" => Instr::Set(j, 1),
                    other => {
                        return Err(MachineError::BadConstant { line, value: other.to_string() });
                    }
                }
            }
            "JZ" => {
                arity(2)?;
                let j = register(w[1])?;
                let p = w[2]
                    .parse::<usize>()
                    .map_err(|_| MachineError::BadLabel { line, label: w[2].to_string() })?;
                Instr::Jz(j, p)
            }
            "HALT" => {
                arity(0)?;
                Instr::Halt
            }
            other => return Err(parse_err(format!("unknown instruction `{other}`"))),
        };
        instructions.push(ins);
        lines.push(line);
    }
    // relabel validation errors with source lines
    MachineProgram::new(instructions).map_err(|e| match e {
        MachineError::BadLabel { line, label } => MachineError::BadLabel { line: lines[line], label },
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineConfig {
    pub pc: usize,
    pub registers: Vec<Int>,
}

impl MachineConfig {
    /// `pc = 0`, `R_1 .. R_p` from `inputs`, every other register zero.
    pub fn initial(prog: &MachineProgram, inputs: &[Int]) -> Result<MachineConfig> {
        let k = prog.num_registers();
        if inputs.len() > k - 1 {
            return Err(MachineError::TooManyInputs { available: k - 1, got: inputs.len() });
        }
        let mut registers = vec![Int::zero(); k];
        registers[1..=inputs.len()].clone_from_slice(inputs);
        Ok(MachineConfig { pc: 0, registers })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub output: Int,
    pub steps: u64,
    pub halted: bool,
}

/// Step-by-step execution of a register machine.
#[derive(Debug, Clone)]
pub struct Machine<'a> {
    prog: &'a MachineProgram,
    config: MachineConfig,
    steps: u64,
    halted: bool,
}

impl<'a> Machine<'a> {
    pub fn new(prog: &'a MachineProgram, inputs: &[Int]) -> Result<Machine<'a>> {
        let config = MachineConfig::initial(prog, inputs)?;
        Ok(Machine { prog, config, steps: 0, halted: false })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn halted(&self) -> bool {
        self.halted
    }

    /// Execute one instruction. Returns `false` without counting a step
    /// once the machine has halted or run off the end of the program.
    pub fn step(&mut self) -> bool {
        if self.halted {
            return false;
        }
        let Some(&ins) = self.prog.instructions.get(self.config.pc) else {
            self.halted = true;
            return false;
        };
        let r = &mut self.config.registers;
        match ins {
            Instr::Add(j, k) => {
                let v = r[k].clone();
                r[j] += v;
                self.config.pc += 1;
            }
            Instr::Sub(j, k) => {
                let v = r[k].clone();
                r[j] -= v;
                self.config.pc += 1;
            }
            Instr::Set(j, c) => {
                r[j] = Int::from(c);
                self.config.pc += 1;
            }
            Instr::Jz(j, p) => {
                self.config.pc = if r[j].is_zero() { p } else { self.config.pc + 1 };
            }
            Instr::Halt => self.halted = true,
        }
        self.steps += 1;
        true
    }

    pub fn result(&self) -> RunResult {
        RunResult { output: self.config.registers[0].clone(), steps: self.steps, halted: self.halted }
    }
}

/// Run for at most `max_steps` instructions.
pub fn run(prog: &MachineProgram, inputs: &[Int], max_steps: u64) -> Result<RunResult> {
    let mut m = Machine::new(prog, inputs)?;
    while m.steps() < max_steps && m.step() {}
    Ok(m.result())
}

/// Configurations after `0, 1, ..` steps, up to halting or `max_steps`.
pub fn trace(prog: &MachineProgram, inputs: &[Int], max_steps: u64) -> Result<Vec<MachineConfig>> {
    let mut m = Machine::new(prog, inputs)?;
    let mut out = vec![m.config().clone()];
    while m.steps() < max_steps && m.step() {
        out.push(m.config().clone());
    }
    Ok(out)
}
