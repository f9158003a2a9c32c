use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use dode::compiler::{self, CompilerConfig};
use dode::funclib;
use dode::machines::{self, OpSet};
use dode::numeric::parse_int;
use dode::ode::{self, Kind, OdeSystem, Solver, StepOptions};
use dode::Int;

mod verify;

#[derive(Parser)]
#[command(name = "dode", version, about = "Discrete ODEs over the integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a library function and print its value.
    Eval {
        #[arg(long = "fn", value_name = "NAME")]
        name: String,
        #[arg(long, value_name = "CSV", value_parser = parse_csv, allow_hyphen_values = true)]
        args: Csv,
    },
    /// Solve a system file at a point (`--x`) or for a number of steps (`--T`).
    #[command(group(ArgGroup::new("at").required(true).args(["x", "steps"])))]
    Solve {
        #[arg(long, value_name = "FILE")]
        system: PathBuf,
        #[arg(long, value_name = "N", value_parser = parse_natural)]
        x: Option<Int>,
        #[arg(long = "T", value_name = "N")]
        steps: Option<u64>,
        #[arg(long, value_name = "CSV", value_parser = parse_csv, allow_hyphen_values = true, default_value = "")]
        inputs: Csv,
        /// Abort once a component needs more than this many bits.
        #[arg(long, value_name = "BITS")]
        guard: Option<u64>,
        /// Print every state component, not just the first.
        #[arg(long)]
        all: bool,
    },
    /// Run a register machine (or RAM) program.
    Simulate {
        #[arg(long, value_name = "FILE")]
        program: PathBuf,
        #[arg(long, value_name = "CSV", value_parser = parse_csv, allow_hyphen_values = true, default_value = "")]
        inputs: Csv,
        #[arg(long, value_name = "N", default_value_t = 1_000_000)]
        max_steps: u64,
        #[arg(long)]
        ram: bool,
        #[arg(long, value_enum, default_value_t = Ops::Full, requires = "ram")]
        opset: Ops,
    },
    /// Compile a register machine program to a system file.
    Compile {
        #[arg(long, value_name = "FILE")]
        program: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Running-time exponent used for the step bound.
        #[arg(long, value_name = "N", default_value_t = 2)]
        c: u32,
    },
    /// Run the self-checks against brute-force oracles.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        /// Cases per suite.
        #[arg(long, value_name = "N", default_value_t = 200)]
        limit: usize,
    },
    /// Report the cost of a library function on an input of the given length.
    Bench {
        #[arg(long = "fn", value_name = "NAME")]
        name: String,
        #[arg(long, value_name = "N")]
        bits: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Ops {
    Basic,
    Full,
}

#[derive(Clone, Debug)]
struct Csv(Vec<Int>);

fn parse_csv(text: &str) -> Result<Csv, String> {
    if text.trim().is_empty() {
        return Ok(Csv(Vec::new()));
    }
    text.split(',')
        .map(|s| parse_int(s.trim()).ok_or_else(|| format!("`{}` is not a decimal integer", s.trim())))
        .collect::<Result<_, _>>()
        .map(Csv)
}

fn parse_natural(text: &str) -> Result<Int, String> {
    match parse_int(text.trim()) {
        Some(v) if v >= Int::default() => Ok(v),
        _ => Err(format!("`{text}` is not a natural number")),
    }
}

/// An error attributable to a flag; exits with status 2.
#[derive(Debug)]
struct Usage {
    flag: &'static str,
    message: String,
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for '{}': {}", self.flag, self.message)
    }
}

impl std::error::Error for Usage {}

fn usage(flag: &'static str, message: impl Into<String>) -> anyhow::Error {
    Usage { flag, message: message.into() }.into()
}

fn read(path: &Path, flag: &'static str) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| usage(flag, format!("cannot read {}: {e}", path.display())))
}

fn print_values(values: &[Int], all: bool) {
    let shown = if all { values } else { &values[..1] };
    for v in shown {
        println!("{v}");
    }
}

fn eval(name: &str, args: &[Int]) -> anyhow::Result<()> {
    if !funclib::FUNCTIONS.iter().any(|(n, _)| *n == name) {
        let known: Vec<&str> = funclib::FUNCTIONS.iter().map(|(n, _)| *n).collect();
        return Err(usage("--fn", format!("unknown function `{name}` (known: {})", known.join(", "))));
    }
    let c = funclib::call(name, args)?;
    println!("{}", c.value);
    Ok(())
}

fn solve_params(sys: &OdeSystem, inputs: &[Int]) -> anyhow::Result<Vec<Int>> {
    if inputs.len() > sys.params.len() {
        return Err(usage(
            "--inputs",
            format!("{} values for {} parameters ({})", inputs.len(), sys.params.len(), sys.params.join(", ")),
        ));
    }
    let mut y = inputs.to_vec();
    y.resize(sys.params.len(), Int::default());
    Ok(y)
}

/// Solve a parsed system; shared by the file and in-memory paths.
fn solve_system(sys: &OdeSystem, x: Option<&Int>, steps: Option<u64>, inputs: &[Int], guard: Option<u64>) -> anyhow::Result<Vec<Int>> {
    let solver = Solver::standard();
    let y = solve_params(sys, inputs)?;
    let report = match (x, steps) {
        (Some(x), _) if sys.deriv.is_plain() => {
            let n = x.to_u64().ok_or_else(|| usage("--x", "too large for step-by-step evaluation"))?;
            solver.solve_naive_guarded(sys, n, &y, guard)?
        }
        (Some(x), _) => solver.solve_lode_fast(sys, x, &y)?,
        (None, Some(t)) if matches!(sys.kind, Kind::Linear | Kind::LinearLengthOde) => {
            let guard = guard.unwrap_or_else(|| compiler::growth_guard(&y, t, &CompilerConfig::default()));
            solver.solve_linear_fast(sys, t, &y, guard)?
        }
        (None, Some(t)) => {
            let mut stepper = solver.stepper(sys, &y, StepOptions { linear: false, guard })?;
            while stepper.steps() < t {
                if !stepper.step()? {
                    bail!("jump points ran out after {} steps", stepper.steps());
                }
            }
            stepper.into_report()
        }
        (None, None) => unreachable!("clap requires --x or --T"),
    };
    Ok(report.values)
}

fn solve(path: &Path, x: Option<&Int>, steps: Option<u64>, inputs: &[Int], guard: Option<u64>, all: bool) -> anyhow::Result<()> {
    let text = read(path, "--system")?;
    let sys = ode::parse_system(&text).with_context(|| format!("{}", path.display()))?;
    let values = solve_system(&sys, x, steps, inputs, guard)?;
    print_values(&values, all);
    Ok(())
}

fn simulate(path: &Path, inputs: &[Int], max_steps: u64, ram: Option<OpSet>) -> anyhow::Result<()> {
    let text = read(path, "--program")?;
    let result = match ram {
        Some(opset) => machines::run_ram(&machines::load_ram(&text, opset)?, inputs, max_steps)?,
        None => machines::run(&machines::load_program(&text)?, inputs, max_steps)?,
    };
    println!("{}", result.output);
    println!("steps={}", result.steps);
    if !result.halted {
        bail!("no halt within {max_steps} steps");
    }
    Ok(())
}

fn compile(program: &Path, out: &Path, c: u32) -> anyhow::Result<()> {
    let text = read(program, "--program")?;
    let prog = machines::load_program(&text)?;
    let cs = compiler::compile_rm(&prog);
    fs::write(out, cs.to_file_string()).with_context(|| format!("cannot write {}", out.display()))?;
    println!("components={} params={} c={c}", cs.dim(), cs.arity());
    Ok(())
}

fn bench(name: &str, bits: u64) -> anyhow::Result<()> {
    let arity = funclib::FUNCTIONS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| usage("--fn", format!("unknown function `{name}`")))?;
    let x = funclib::with_bits(bits);
    let mut args = vec![x];
    if arity == 2 {
        args.push(Int::from(3));
    }
    let c = funclib::call(name, &args)?;
    println!("steps={}", c.steps);
    println!("max_bits={}", c.max_bits);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval { name, args } => eval(&name, &args.0),
        Command::Solve { system, x, steps, inputs, guard, all } => solve(&system, x.as_ref(), steps, &inputs.0, guard, all),
        Command::Simulate { program, inputs, max_steps, ram, opset } => {
            let opset = ram.then_some(match opset {
                Ops::Basic => OpSet::Basic,
                Ops::Full => OpSet::Full,
            });
            simulate(&program, &inputs.0, max_steps, opset)
        }
        Command::Compile { program, out, c } => compile(&program, &out, c),
        Command::Verify { suite, limit } => verify::run(suite, limit),
        Command::Bench { name, bits } => bench(&name, bits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
