//! Register machine programs compiled to linear length-ODEs.
//!
//! The compiled system has state `R0 .. Rk inst`, derivative along
//! `len(t)` and parameters `x1 .. xk`. Each derivative is a selector sum
//!
//! ```text
//! d inst = sum_l (prod_{i<l} sg(inst - i)) * cosg(inst - l) * next_l
//! ```
//!
//! where the selector is `1` exactly when `inst = l`, so one length-ODE
//! step performs one machine instruction. Every term mentions `inst` and
//! the registers at most once outside `sg`, so the system decomposes as
//! `A f + B` with `A`, `B` essentially constant.

use num_traits::Zero;
use thiserror::Error;

use crate::expr::{linear_decompose, Expr, LinearForm};
use crate::funclib;
use crate::machines::{Instr, Machine, MachineError, MachineProgram};
use crate::numeric::{self, Int};
use crate::ode::{DerivVar, EvalReport, OdeError, OdeSystem, Solver, StepOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("{got} inputs for a program with {available} input registers")]
    TooManyInputs { available: usize, got: usize },
    #[error("step budget {0} is too large to evaluate")]
    BudgetTooLarge(u64),
}

pub type Result<T> = std::result::Result<T, CompileError>;

/// Running-time exponent `c` and the growth constant of the guard
/// `len(G) + T (T + len(y)) * growth_constant`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompilerConfig {
    pub time_exponent: u32,
    pub growth_constant: u64,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        CompilerConfig { time_exponent: 2, growth_constant: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledSystem {
    pub system: OdeSystem,
    pub program: MachineProgram,
    /// The decomposition `A f + B` of the right-hand side.
    pub linear: LinearForm,
}

fn reg(i: usize) -> String {
    format!("R{i}")
}

fn selector(l: usize) -> Expr {
    let inst = || Expr::var("inst");
    let prefix = (0..l).map(|i| Expr::sg(Expr::sub(inst(), Expr::int(i as u64))));
    let here = Expr::cosg(Expr::sub(inst(), Expr::int(l as u64)));
    Expr::product(prefix.chain(std::iter::once(here)))
}

/// Change of `inst` made by instruction `l`.
fn next_inst(ins: &Instr) -> Expr {
    match ins {
        Instr::Add(..) | Instr::Sub(..) | Instr::Set(..) => Expr::one(),
        Instr::Jz(j, p) => Expr::ifz(
            Expr::var(reg(*j)),
            Expr::sub(Expr::int(*p as u64), Expr::var("inst")),
            Expr::one(),
        ),
        Instr::Halt => Expr::zero(),
    }
}

/// Change of register `h` made by instruction `l`.
fn next_reg(ins: &Instr, h: usize) -> Expr {
    match *ins {
        Instr::Add(j, k) if j == h => Expr::var(reg(k)),
        Instr::Sub(j, k) if j == h => Expr::neg(Expr::var(reg(k))),
        Instr::Set(j, c) if j == h => Expr::sub(Expr::int(c), Expr::var(reg(j))),
        _ => Expr::zero(),
    }
}

fn selector_sum(prog: &MachineProgram, next: impl Fn(&Instr) -> Expr) -> Expr {
    Expr::sum(
        prog.instructions()
            .iter()
            .enumerate()
            .map(|(l, ins)| Expr::mul(selector(l), next(ins))),
    )
}

/// Translate a program into its linear length-ODE.
pub fn compile_rm(prog: &MachineProgram) -> CompiledSystem {
    let k = prog.num_registers();
    let mut state: Vec<String> = (0..k).map(reg).collect();
    state.push("inst".into());
    let params: Vec<String> = (1..k).map(|i| format!("x{i}")).collect();
    let mut init = vec![Expr::zero()];
    init.extend(params.iter().map(Expr::var));
    init.push(Expr::zero());
    let mut rhs: Vec<Expr> = (0..k).map(|h| selector_sum(prog, |ins| next_reg(ins, h))).collect();
    rhs.push(selector_sum(prog, next_inst));

    let header = vec![
        format!("register machine program, sha256 {}", prog.digest()),
        String::new(),
    ]
    .into_iter()
    .chain(prog.to_string().lines().map(|l| format!("  {l}")))
    .collect();
    let system = OdeSystem::new("compiled", state, params, DerivVar::Length("t".into()), init, rhs, None)
        .expect("compiled systems are well formed")
        .with_header(header);
    let linear = linear_decompose(&system.rhs, &system.state).expect("compiled systems are essentially linear");
    CompiledSystem { system, program: prog.clone(), linear }
}

impl CompiledSystem {
    /// `R0 .. Rk` followed by `inst`.
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Number of input parameters `x1 .. xk`.
    pub fn arity(&self) -> usize {
        self.system.params.len()
    }

    /// Inputs padded with zeros to the parameter count.
    pub fn params(&self, inputs: &[Int]) -> Result<Vec<Int>> {
        if inputs.len() > self.arity() {
            return Err(CompileError::TooManyInputs { available: self.arity(), got: inputs.len() });
        }
        let mut y = inputs.to_vec();
        y.resize(self.arity(), Int::zero());
        Ok(y)
    }

    /// The system in file form, headed by the program digest.
    pub fn to_file_string(&self) -> String {
        self.system.to_string()
    }
}

/// Sum of the binary lengths of the inputs.
pub fn total_length(inputs: &[Int]) -> u64 {
    inputs.iter().map(numeric::length).sum()
}

/// `len(B^(c)(2^l - 1))` for `B(n) = 2^(len(n)^2)`: `T_1 = l^2 + 1`,
/// `T_(i+1) = T_i^2 + 1`, saturating at `u64::MAX`.
pub fn bound_steps(total_len: u64, c: u32) -> u64 {
    let mut t = total_len;
    for _ in 0..c.max(1) {
        t = t.saturating_mul(t).saturating_add(1);
    }
    t
}

/// `len(G) + T (T + len(y)) * growth_constant`, saturating.
pub fn growth_guard(inputs: &[Int], steps: u64, config: &CompilerConfig) -> u64 {
    let l = total_length(inputs);
    steps
        .saturating_add(l)
        .saturating_mul(steps)
        .saturating_mul(config.growth_constant)
        .saturating_add(l)
}

/// Solve the compiled system for `steps` jump steps with the configured
/// growth guard. The output is `values[0]`, the register `R0`.
pub fn run_compiled(cs: &CompiledSystem, inputs: &[Int], steps: u64, config: &CompilerConfig) -> Result<EvalReport> {
    let y = cs.params(inputs)?;
    let guard = growth_guard(&y, steps, config);
    match Solver::standard().solve_linear_fast(&cs.system, steps, &y, guard) {
        Err(OdeError::NotEssentiallyLinear(e)) => unreachable!("compiled system failed to decompose: {e}"),
        other => Ok(other?),
    }
}

/// Result of comparing the compiled system with the simulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lockstep {
    pub steps_checked: u64,
    /// First step at which the states differ.
    pub mismatch: Option<u64>,
    pub machine_halted: bool,
}

/// Step the compiled system and the simulator together for up to `steps`
/// steps (stopping early when the machine halts) comparing all registers
/// and `inst` against `pc` after every step. After a halt the system must
/// stay put; the comparison continues for `settle` further steps.
pub fn lockstep(cs: &CompiledSystem, inputs: &[Int], steps: u64, settle: u64) -> Result<Lockstep> {
    let y = cs.params(inputs)?;
    let solver = Solver::standard();
    let opts = StepOptions { linear: true, guard: None };
    let mut ode = solver.stepper(&cs.system, &y, opts)?;
    let mut machine = Machine::new(&cs.program, inputs)?;
    let agree = |state: &[Int], m: &Machine| {
        let cfg = m.config();
        state[..cfg.registers.len()] == cfg.registers[..] && state[cfg.registers.len()] == Int::from(cfg.pc)
    };
    if !agree(ode.state(), &machine) {
        return Ok(Lockstep { steps_checked: 0, mismatch: Some(0), machine_halted: false });
    }
    let mut checked = 0;
    let mut extra = 0;
    while checked < steps {
        if !machine.step() {
            if extra == settle {
                break;
            }
            extra += 1;
        }
        ode.step()?;
        checked += 1;
        if !agree(ode.state(), &machine) {
            return Ok(Lockstep { steps_checked: checked, mismatch: Some(checked), machine_halted: machine.halted() });
        }
    }
    Ok(Lockstep { steps_checked: checked, mismatch: None, machine_halted: machine.halted() })
}

/// `f(y) = R0(h(y), y)`: the compiled system `g` evaluated at the point
/// `h(y) = B^(c)(2^len(y) - 1)`, `B(n) = 2^(len(n)^2)` computed by the
/// length-ODE of `pow2_lenprod`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SllForm {
    pub g: CompiledSystem,
    pub h: OdeSystem,
    pub c: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SllEval {
    pub output: Int,
    /// `len(h(y))`, the number of steps of `g`.
    pub steps: u64,
    pub report: EvalReport,
}

/// Largest `len(h(y))` [`SllForm::eval`] will run.
pub const MAX_SLL_STEPS: u64 = 1 << 22;

pub fn package_sll(cs: &CompiledSystem, c: u32) -> SllForm {
    SllForm { g: cs.clone(), h: funclib::pow2_lenprod_system(), c: c.max(1) }
}

impl SllForm {
    /// `h(y)`, computed by `c` applications of the bound ODE.
    pub fn bound(&self, inputs: &[Int]) -> Result<Int> {
        let solver = Solver::standard();
        let mut n = numeric::all_ones(total_length(inputs));
        for _ in 0..self.c {
            if numeric::length(&n) > MAX_SLL_STEPS {
                return Err(CompileError::BudgetTooLarge(numeric::length(&n)));
            }
            n = solver.solve_lode_fast(&self.h, &n, std::slice::from_ref(&n))?.values.remove(0);
        }
        Ok(n)
    }

    pub fn eval(&self, inputs: &[Int], config: &CompilerConfig) -> Result<SllEval> {
        let h = self.bound(inputs)?;
        let steps = numeric::length(&h);
        if steps > MAX_SLL_STEPS {
            return Err(CompileError::BudgetTooLarge(steps));
        }
        let report = run_compiled(&self.g, inputs, steps, config)?;
        Ok(SllEval { output: report.values[0].clone(), steps, report })
    }
}
