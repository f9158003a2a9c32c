//! Functions programmed as discrete ODEs.
//!
//! Each function builds its [`OdeSystem`] (exposed through the `*_system`
//! builders) and solves it; the result carries the exact step count and
//! the largest intermediate bit length. Arguments that must be natural
//! numbers are checked.

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::calculus::IntFn;
use crate::expr::{parse_expr, EvalError, Expr, FnRegistry, NativeFn};
use crate::numeric::{self, Int};
use crate::ode::{DerivVar, EvalReport, LSpecRegistry, OdeError, OdeSystem, Solver, StepOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error("division by zero")]
    DivByZero,
    #[error("argument `{0}` must be a natural number")]
    Negative(&'static str),
    #[error("argument `{0}` is too large")]
    TooLarge(&'static str),
    #[error("no zero of g reached within {cap} steps")]
    CapExceeded { cap: u64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

pub type Result<T> = std::result::Result<T, FuncError>;

/// A function value with the cost of computing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Computed {
    pub value: Int,
    pub steps: u64,
    pub max_bits: u64,
}

impl Computed {
    fn from_report(r: EvalReport) -> Computed {
        let value = r.values.into_iter().next().expect("systems have at least one component");
        Computed { value, steps: r.steps, max_bits: r.max_bits }
    }
}

fn p(text: &str) -> Expr {
    parse_expr(text).expect("built-in expression")
}

fn natural(x: &Int, name: &'static str) -> Result<()> {
    if x.is_negative() {
        Err(FuncError::Negative(name))
    } else {
        Ok(())
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Wrap a calculus function as a callable for `Call` nodes.
fn native(name: &str, f: IntFn) -> NativeFn {
    let name = name.to_string();
    NativeFn::new(Some(f.arity()), move |args| {
        f.eval(args).map_err(|e| EvalError::Domain { name: name.clone(), message: e.to_string() })
    })
}

fn solver_with(extra: &[(&str, IntFn)]) -> Solver {
    let mut functions = FnRegistry::base();
    for (name, f) in extra {
        functions.insert(*name, native(name, f.clone()));
    }
    Solver::new(functions, LSpecRegistry::standard())
}

/// Binary search for `max{z : h(z) <= v}` as a length-ODE in `s`:
/// `G(0) = x`, `G' = -sg(d) p + sg(-d) p` with `d = h(G) - v` and
/// `p = 2^(len(x) - len(s) - 1)`. `h_of_g` is `h(G)`, `target` is `v`.
pub fn dichotomy_system(name: &str, h_of_g: Expr, target: Expr, params: &[&str]) -> OdeSystem {
    let d = Expr::sub(h_of_g, target);
    let step = p("pow2(len(x) - len(s) - 1)");
    let rhs = Expr::sub(
        Expr::mul(Expr::sg(Expr::neg(d.clone())), step.clone()),
        Expr::mul(Expr::sg(d), step),
    );
    OdeSystem::new(
        name,
        strings(&["G"]),
        strings(params),
        DerivVar::Length("s".into()),
        vec![p("x")],
        vec![rhs],
        None,
    )
    .expect("dichotomy system is well formed")
}

/// Run a dichotomy system up to `s = x` and step back once if the search
/// ended just above the answer.
fn dichotomy(solver: &Solver, sys: &OdeSystem, x: &Int, params: &[Int], overshoots: impl Fn(&Int) -> Result<bool>) -> Result<Computed> {
    let r = solver.solve_lode_fast(sys, x, params)?;
    let mut out = Computed::from_report(r);
    if overshoots(&out.value)? {
        out.value -= 1;
    }
    Ok(out)
}

/// `max{z : h(z) <= f(x)}` for `h` nondecreasing on the integers.
pub fn some_h(h: &IntFn, f: &IntFn, x: &Int) -> Result<Computed> {
    natural(x, "x")?;
    let solver = solver_with(&[("h", h.clone()), ("f", f.clone())]);
    let sys = dichotomy_system("some_h", p("h(G)"), p("f(x)"), &["x"]);
    let v = f.at(x).map_err(|e| OdeError::Eval(EvalError::Domain { name: "f".into(), message: e.to_string() }))?;
    dichotomy(&solver, &sys, x, std::slice::from_ref(x), |s| {
        let hs = h.at(s).map_err(|e| OdeError::Eval(EvalError::Domain { name: "h".into(), message: e.to_string() }))?;
        Ok(hs > v)
    })
}

/// The sign-preserving square `z |z|`, nondecreasing on all integers.
const SIGNED_SQUARE: &str = "G*G*(sg(G) - sg(0 - G))";

pub fn isqrt_system() -> OdeSystem {
    dichotomy_system("isqrt", p(SIGNED_SQUARE), p("x"), &["x"])
}

/// `floor(sqrt(x))`.
pub fn isqrt(x: &Int) -> Result<Computed> {
    natural(x, "x")?;
    let solver = Solver::standard();
    dichotomy(&solver, &isqrt_system(), x, std::slice::from_ref(x), |s| {
        // ifz(sg(S*S - x), S, S - 1)
        Ok(!numeric::sg(&(s * s - x)).is_zero())
    })
}

pub fn idiv_system() -> OdeSystem {
    dichotomy_system("idiv", p("G*y"), p("x"), &["x", "y"])
}

/// `floor(x / y)` for `y >= 1`.
pub fn idiv(x: &Int, y: &Int) -> Result<Computed> {
    natural(x, "x")?;
    if y.is_zero() {
        return Err(FuncError::DivByZero);
    }
    natural(y, "y")?;
    let solver = Solver::standard();
    dichotomy(&solver, &idiv_system(), x, &[x.clone(), y.clone()], |s| {
        Ok(!numeric::sg(&(s * y - x)).is_zero())
    })
}

/// Strip the most significant bit while `len(F) > len(y)`.
pub fn suffix_system() -> OdeSystem {
    OdeSystem::new(
        "suffix",
        strings(&["F"]),
        strings(&["x", "y"]),
        DerivVar::Length("s".into()),
        vec![p("x")],
        vec![p("0 - sg(len(F) - len(y))*pow2(len(F) - 1)")],
        None,
    )
    .expect("suffix system is well formed")
}

/// `x mod 2^len(y)`.
pub fn suffix(x: &Int, y: &Int) -> Result<Computed> {
    natural(x, "x")?;
    natural(y, "y")?;
    let r = Solver::standard().solve_lode_fast(&suffix_system(), x, &[x.clone(), y.clone()])?;
    Ok(Computed::from_report(r))
}

pub fn pow2_len_system() -> OdeSystem {
    OdeSystem::from_text("pow2_len", &["f"], &[], DerivVar::Length("x".into()), &["1"], &["f"])
        .expect("pow2_len system is well formed")
}

/// `2^len(x)`.
pub fn pow2_len(x: &Int) -> Result<Computed> {
    natural(x, "x")?;
    let r = Solver::standard().solve_lode_fast(&pow2_len_system(), x, &[])?;
    Ok(Computed::from_report(r))
}

pub fn pow2_len_sq_system() -> OdeSystem {
    let deriv = DerivVar::Named { var: "x".into(), spec: "len_sq".into() };
    OdeSystem::from_text("pow2_len_sq", &["f"], &[], deriv, &["1"], &["f"]).expect("pow2_len_sq system is well formed")
}

/// `2^(len(x)^2)`, in `len(x)^2` steps of the level time.
pub fn pow2_len_sq(x: &Int) -> Result<Computed> {
    natural(x, "x")?;
    if numeric::length(x) > 1 << 12 {
        return Err(FuncError::TooLarge("x"));
    }
    let r = Solver::standard().solve_alternative_view(&pow2_len_sq_system(), x, &[])?;
    Ok(Computed::from_report(r))
}

pub fn pow2_lenprod_system() -> OdeSystem {
    OdeSystem::from_text(
        "pow2_lenprod",
        &["f"],
        &["y"],
        DerivVar::Length("x".into()),
        &["1"],
        &["f*(pow2(len(y)) - 1)"],
    )
    .expect("pow2_lenprod system is well formed")
}

/// `2^(len(x) len(y))`.
pub fn pow2_lenprod(x: &Int, y: &Int) -> Result<Computed> {
    natural(x, "x")?;
    natural(y, "y")?;
    let r = Solver::standard().solve_lode_fast(&pow2_lenprod_system(), x, std::slice::from_ref(y))?;
    Ok(Computed::from_report(r))
}

fn param_names(count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("y{i}")).collect()
}

fn g_call(first: &str, params: &[String]) -> Expr {
    let mut args = vec![Expr::var(first)];
    args.extend(params.iter().map(Expr::var));
    Expr::call("g", args)
}

fn check_g(g: &IntFn, y: &[Int]) -> Result<()> {
    if g.arity() != y.len() + 1 {
        return Err(OdeError::DimensionMismatch { what: "arguments of g", expected: g.arity(), got: y.len() + 1 }.into());
    }
    Ok(())
}

/// `f(0) = 0`, `f' = g(x, y)`: the strict bounded sum `sum_{z<x} g(z, y)`.
pub fn bounded_sum_system(params: usize) -> OdeSystem {
    let names = param_names(params);
    OdeSystem::new("bounded_sum", strings(&["f"]), names.clone(), DerivVar::Plain("x".into()), vec![Expr::zero()], vec![g_call("x", &names)], None)
        .expect("bounded sum system is well formed")
}

pub fn bounded_sum(g: &IntFn, x: u64, y: &[Int]) -> Result<Computed> {
    check_g(g, y)?;
    let solver = solver_with(&[("g", g.clone())]);
    let r = solver.solve_naive(&bounded_sum_system(y.len()), x, y)?;
    Ok(Computed::from_report(r))
}

/// `f(0) = 1`, `f' = f (g(x, y) - 1)`: the strict bounded product.
pub fn bounded_product_system(params: usize) -> OdeSystem {
    let names = param_names(params);
    let rhs = Expr::mul(Expr::var("f"), Expr::sub(g_call("x", &names), Expr::one()));
    OdeSystem::new("bounded_product", strings(&["f"]), names, DerivVar::Plain("x".into()), vec![Expr::one()], vec![rhs], None)
        .expect("bounded product system is well formed")
}

pub fn bounded_product(g: &IntFn, x: u64, y: &[Int]) -> Result<Computed> {
    check_g(g, y)?;
    let solver = solver_with(&[("g", g.clone())]);
    let r = solver.solve_naive(&bounded_product_system(y.len()), x, y)?;
    Ok(Computed::from_report(r))
}

/// `F(0) = f(0)`, `F' = ifz(sg(F - f(t+1)), 0, f(t+1) - F)`: the running
/// minimum over the scanned prefix.
pub fn f_min_system() -> OdeSystem {
    OdeSystem::from_text(
        "f_min",
        &["F"],
        &[],
        DerivVar::Plain("t".into()),
        &["f(0)"],
        &["ifz(sg(F - f(t + 1)), 0, f(t + 1) - F)"],
    )
    .expect("f_min system is well formed")
}

/// `min{f(t) : 0 <= t <= x}`.
pub fn f_min(f: &IntFn, x: u64) -> Result<Computed> {
    let solver = solver_with(&[("f", f.clone())]);
    let r = solver.solve_naive(&f_min_system(), x, &[])?;
    Ok(Computed::from_report(r))
}

/// `f(0) = 0`, `f' = ifnz(g(f, y), 1, 0)`: count up until `g` vanishes.
pub fn smin_system(params: usize) -> OdeSystem {
    let names = param_names(params);
    let rhs = Expr::ifnz(g_call("f", &names), Expr::one(), Expr::zero());
    OdeSystem::new("smin", strings(&["f"]), names, DerivVar::Plain("x".into()), vec![Expr::zero()], vec![rhs], None)
        .expect("minimization system is well formed")
}

/// `min{k : g(k, y) = 0}`, observed as the stabilised value of the ODE
/// within `cap` steps. `CapExceeded` means no zero was reached within the
/// budget, not that none exists.
pub fn smin_ode(g: &IntFn, y: &[Int], cap: u64) -> Result<Computed> {
    check_g(g, y)?;
    let solver = solver_with(&[("g", g.clone())]);
    let sys = smin_system(y.len());
    let mut stepper = solver.stepper(&sys, y, StepOptions::default())?;
    let at_zero = |f: &Int| -> Result<bool> {
        let mut args = vec![f.clone()];
        args.extend_from_slice(y);
        let v = g.eval(&args).map_err(|e| OdeError::Eval(EvalError::Domain { name: "g".into(), message: e.to_string() }))?;
        Ok(v.is_zero())
    };
    loop {
        if at_zero(&stepper.state()[0])? {
            let report = stepper.into_report();
            return Ok(Computed::from_report(report));
        }
        if stepper.steps() >= cap {
            return Err(FuncError::CapExceeded { cap });
        }
        stepper.step()?;
    }
}

fn domain(name: &str, e: FuncError) -> EvalError {
    EvalError::Domain { name: name.to_string(), message: e.to_string() }
}

/// Base functions plus `isqrt`, `idiv`, `suffix`, `pow2_len`,
/// `pow2_len_sq` and `pow2_lenprod`, each computed by its ODE.
pub fn registry() -> FnRegistry {
    type Unary = fn(&Int) -> Result<Computed>;
    type Binary = fn(&Int, &Int) -> Result<Computed>;
    let mut reg = FnRegistry::base();
    let unary: [(&str, Unary); 3] = [("isqrt", isqrt), ("pow2_len", pow2_len), ("pow2_len_sq", pow2_len_sq)];
    for (name, f) in unary {
        reg.insert(name, NativeFn::new(Some(1), move |a| f(&a[0]).map(|c| c.value).map_err(|e| domain(name, e))));
    }
    let binary: [(&str, Binary); 3] = [("idiv", idiv), ("suffix", suffix), ("pow2_lenprod", pow2_lenprod)];
    for (name, f) in binary {
        reg.insert(name, NativeFn::new(Some(2), move |a| f(&a[0], &a[1]).map(|c| c.value).map_err(|e| domain(name, e))));
    }
    reg
}

/// Names accepted by [`call`], with their arities.
pub const FUNCTIONS: [(&str, usize); 7] = [
    ("len", 1),
    ("isqrt", 1),
    ("idiv", 2),
    ("suffix", 2),
    ("pow2_len", 1),
    ("pow2_len_sq", 1),
    ("pow2_lenprod", 2),
];

/// Evaluate a library function by name, reporting its cost.
pub fn call(name: &str, args: &[Int]) -> Result<Computed> {
    let arity = FUNCTIONS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| OdeError::Eval(EvalError::UnknownFunction(name.to_string())))?;
    if args.len() != arity {
        return Err(OdeError::Eval(EvalError::Arity { name: name.to_string(), expected: arity, got: args.len() }).into());
    }
    match name {
        "len" => Ok(Computed { value: numeric::length_int(&args[0]), steps: 0, max_bits: numeric::length(&args[0]) }),
        "isqrt" => isqrt(&args[0]),
        "idiv" => idiv(&args[0], &args[1]),
        "suffix" => suffix(&args[0], &args[1]),
        "pow2_len" => pow2_len(&args[0]),
        "pow2_len_sq" => pow2_len_sq(&args[0]),
        _ => pow2_lenprod(&args[0], &args[1]),
    }
}

/// Smallest `x` with the given bit length, handy for cost measurements.
pub fn with_bits(bits: u64) -> Int {
    if bits == 0 {
        Int::zero()
    } else {
        Int::from(1) << (bits - 1).to_usize().unwrap_or(usize::MAX)
    }
}
