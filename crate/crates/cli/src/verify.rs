//! `verify`: randomized and exhaustive checks against brute-force oracles.

use std::time::{Duration, Instant};

use anyhow::bail;
use clap::ValueEnum;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dode::calculus::{check_identity, Identity, IntFn, Window};
use dode::compiler::{compile_rm, lockstep};
use dode::funclib;
use dode::machines::load_program;
use dode::ode::{DerivVar, OdeSystem, Solver};
use dode::Int;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Calculus,
    Ode,
    Funclib,
    Compiler,
    All,
}

const SUITES: [Suite; 4] = [Suite::Calculus, Suite::Ode, Suite::Funclib, Suite::Compiler];

const PROGRAMS: [(&str, &str); 5] = [
    ("add", include_str!("../../../programs/add.rm")),
    ("copy", include_str!("../../../programs/copy.rm")),
    ("double", include_str!("../../../programs/double.rm")),
    ("max", include_str!("../../../programs/max.rm")),
    ("triangular", include_str!("../../../programs/triangular.rm")),
];

struct Tally {
    suite: Suite,
    cases: usize,
    failures: Vec<String>,
    elapsed: Duration,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn int(v: i64) -> Int {
    Int::from(v)
}

fn rng(suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(suite as u64 + 1)
}

fn table(r: &mut ChaCha8Rng, start: i64, len: usize) -> IntFn {
    IntFn::table(start, (0..len).map(|_| int(r.gen_range(-1000..=1000))).collect())
}

fn calculus(t: &mut Tally, limit: usize) {
    let mut r = rng(Suite::Calculus);
    for n in 0..limit {
        let id = Identity::ALL[n % Identity::ALL.len()];
        let (fns, window) = match id.signature() {
            (0, _) => (vec![], Window::new(vec![-20..=20, 1..=5])),
            (1, 2) => (vec![table(&mut r, 0, 12)], Window::square(0..=11)),
            (2, 2) => (vec![table(&mut r, 0, 12), table(&mut r, 0, 12)], Window::square(0..=11)),
            (3, _) => {
                let bound = || IntFn::table(0, (0..12).map(|k| int(k % 5)).collect());
                let f = IntFn::closed(2, |a| &a[0] * &a[0] - &a[1] * 3);
                (vec![bound(), IntFn::unary(|x| x % 7 + 4), f], Window::line(0..=10))
            }
            (2, _) if id == Identity::CompositionDerivative => {
                let g = IntFn::table(0, (0..12).map(|_| int(r.gen_range(0..20))).collect());
                (vec![table(&mut r, 0, 21), g], Window::line(0..=10))
            }
            (2, _) => (vec![table(&mut r, 0, 12), table(&mut r, 0, 12)], Window::line(0..=10)),
            _ => (vec![table(&mut r, 0, 12)], Window::line(1..=10)),
        };
        match check_identity(id.name(), &fns, &window) {
            Ok(report) => t.check(report.holds(), || format!("{}: {:?}", id.name(), report.counterexample)),
            Err(e) => t.check(false, || format!("{}: {e}", id.name())),
        }
    }
}

fn ode(t: &mut Tally, limit: usize) {
    let mut r = rng(Suite::Ode);
    let solver = Solver::standard();
    for _ in 0..limit {
        let a = r.gen_range(-2..=2);
        let b = r.gen_range(-3..=3);
        let rhs = format!("({a} + sg(x - 3))*f + {b}*x");
        let sys = OdeSystem::plain(&["f"], &[], &["1"], &[&rhs]).expect("well formed");
        let x = r.gen_range(0..30u64);
        // f(t+1) = (1 + a + sg(t - 3)) f(t) + b t
        let mut want = Int::one();
        for s in 0..x as i64 {
            let sg = i64::from(s > 3);
            want = want * (1 + a + sg) + b * s;
        }
        let naive = solver.solve_naive(&sys, x, &[]).map(|r| r.values);
        let closed = solver.solve_linear_closed_form(&sys, x, &[]);
        t.check(
            naive.as_ref().ok() == Some(&vec![want.clone()]) && closed.as_ref().ok() == Some(&vec![want.clone()]),
            || format!("`{rhs}` at {x}: naive {naive:?}, closed {closed:?}, oracle {want}"),
        );
        let y: u64 = r.gen_range(0..1 << 20);
        let jumps = solver.jump_set(&DerivVar::Length("x".into()), &Int::from(y), &[]);
        let want: Vec<Int> = (0..64 - y.leading_zeros()).map(|k| Int::from((1u64 << k) - 1)).collect();
        t.check(jumps.as_ref().ok() == Some(&want), || format!("jump set below {y}: {jumps:?}"));
    }
}

fn funclib(t: &mut Tally, limit: usize) {
    let mut r = rng(Suite::Funclib);
    for _ in 0..limit {
        let x: u64 = r.gen_range(0..1 << 40);
        let y: u64 = r.gen_range(1..1 << 12);
        let len = |v: u64| 64 - v.leading_zeros();
        let root = {
            let mut s = (x as f64).sqrt() as u64;
            while s * s > x {
                s -= 1;
            }
            while (s + 1) * (s + 1) <= x {
                s += 1;
            }
            s
        };
        let cases: [(&str, Vec<u64>, Int); 5] = [
            ("isqrt", vec![x], Int::from(root)),
            ("idiv", vec![x, y], Int::from(x / y)),
            ("suffix", vec![x, y], Int::from(x & ((1 << len(y)) - 1))),
            ("pow2_len", vec![x], Int::one() << len(x)),
            ("pow2_lenprod", vec![x, y], Int::one() << (len(x) * len(y))),
        ];
        for (name, args, want) in cases {
            let ints: Vec<Int> = args.iter().map(|&a| Int::from(a)).collect();
            let got = funclib::call(name, &ints);
            let ok = got.as_ref().is_ok_and(|c| c.value == want && c.steps == u64::from(len(x)));
            t.check(ok, || format!("{name}{args:?}: {got:?}, oracle {want}"));
        }
    }
}

fn compiler(t: &mut Tally, limit: usize) {
    let per_program = limit.div_ceil(PROGRAMS.len()).max(1);
    for (name, text) in PROGRAMS {
        let prog = load_program(text).expect("bundled program");
        let cs = compile_rm(&prog);
        let inputs = cs.arity().min(2);
        for n in 0..per_program {
            let point: Vec<Int> = (0..inputs).map(|k| Int::from((n / 5usize.pow(k as u32)) % 5 + n / 25)).collect();
            let got = lockstep(&cs, &point, 100_000, 2);
            let ok = got.as_ref().is_ok_and(|l| l.mismatch.is_none() && l.machine_halted);
            t.check(ok, || format!("{name}{point:?}: {got:?}"));
        }
    }
}

fn run_suite(suite: Suite, limit: usize) -> Tally {
    let mut t = Tally { suite, cases: 0, failures: Vec::new(), elapsed: Duration::ZERO };
    let start = Instant::now();
    match suite {
        Suite::Calculus => calculus(&mut t, limit),
        Suite::Ode => ode(&mut t, limit),
        Suite::Funclib => funclib(&mut t, limit),
        Suite::Compiler => compiler(&mut t, limit),
        Suite::All => unreachable!("expanded by the caller"),
    }
    t.elapsed = start.elapsed();
    t
}

pub fn run(suite: Suite, limit: usize) -> anyhow::Result<()> {
    let suites: Vec<Suite> = if suite == Suite::All { SUITES.to_vec() } else { vec![suite] };
    let tallies: Vec<Tally> = std::thread::scope(|s| {
        let handles: Vec<_> = suites.iter().map(|&suite| s.spawn(move || run_suite(suite, limit))).collect();
        handles.into_iter().map(|h| h.join().expect("suite panicked")).collect()
    });
    println!("{:<10} {:>7} {:>9} {:>10}", "suite", "cases", "failures", "time");
    let mut failed = 0;
    for t in &tallies {
        let name = format!("{:?}", t.suite).to_lowercase();
        println!("{name:<10} {:>7} {:>9} {:>9.2}s", t.cases, t.failures.len(), t.elapsed.as_secs_f64());
        for f in t.failures.iter().take(5) {
            println!("  {f}");
        }
        failed += t.failures.len();
    }
    if failed > 0 {
        bail!("{failed} checks failed");
    }
    Ok(())
}
