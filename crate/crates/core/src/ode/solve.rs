//! Solvers: naive iteration, linear closed form, jump-sum and the
//! stepwise sum-product evaluation with a growth guard.

use num_traits::{ToPrimitive, Zero};

use super::lspec::LSpec;
use super::{DerivVar, Kind, LSpecRegistry, OdeError, OdeSystem, Result};
use crate::calculus::Matrix;
use crate::expr::{linear_decompose, Env, FnRegistry, LinearForm};
use crate::numeric::{self, Int};

/// Values at the requested point plus exact cost counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub values: Vec<Int>,
    /// Number of right-hand side evaluations.
    pub steps: u64,
    /// Largest bit length of any state component seen, initial values
    /// included.
    pub max_bits: u64,
}

impl EvalReport {
    /// The first component.
    pub fn value(&self) -> &Int {
        &self.values[0]
    }
}

fn max_bits(values: &[Int]) -> u64 {
    values.iter().map(numeric::length).max().unwrap_or(0)
}

/// Solves [`OdeSystem`]s against a function table and level functions.
#[derive(Clone, Debug, Default)]
pub struct Solver {
    functions: FnRegistry,
    lspecs: LSpecRegistry,
}

impl Solver {
    pub fn new(functions: FnRegistry, lspecs: LSpecRegistry) -> Solver {
        Solver { functions, lspecs }
    }

    /// Base functions (`len`, `pow2`) and the standard level functions.
    pub fn standard() -> Solver {
        Solver::new(FnRegistry::base(), LSpecRegistry::standard())
    }

    pub fn functions(&self) -> &FnRegistry {
        &self.functions
    }

    pub fn lspecs(&self) -> &LSpecRegistry {
        &self.lspecs
    }

    /// The level function of a system; `None` for a plain derivative.
    pub fn level_of(&self, deriv: &DerivVar) -> Result<Option<LSpec>> {
        match deriv {
            DerivVar::Plain(_) => Ok(None),
            DerivVar::Length(_) => Ok(Some(self.lspecs.get("len").cloned().unwrap_or_else(|_| LSpec::length()))),
            DerivVar::Named { spec, .. } => Ok(Some(self.lspecs.get(spec)?.clone())),
        }
    }

    fn env(&self, sys: &OdeSystem, y: &[Int]) -> Result<Env> {
        if y.len() != sys.params.len() {
            return Err(OdeError::DimensionMismatch { what: "parameters", expected: sys.params.len(), got: y.len() });
        }
        let mut env = Env::new(self.functions.clone());
        for (p, v) in sys.params.iter().zip(y) {
            env.bind(p.clone(), v.clone());
        }
        Ok(env)
    }

    fn initial(&self, sys: &OdeSystem, env: &Env) -> Result<Vec<Int>> {
        Ok(sys.init.iter().map(|e| env.eval(e)).collect::<std::result::Result<_, _>>()?)
    }

    /// Iterate the defining recurrence for `x` steps from the initial
    /// values. L-ODEs use `f(t+1) = f(t) + (L(t+1) - L(t)) * h(f(t), t, y)`
    /// at every `t`, jump or not.
    pub fn solve_naive(&self, sys: &OdeSystem, x: u64, y: &[Int]) -> Result<EvalReport> {
        self.solve_naive_guarded(sys, x, y, None)
    }

    /// [`solve_naive`](Self::solve_naive) aborting with `GrowthExceeded`
    /// once a component needs more than `guard` bits.
    pub fn solve_naive_guarded(
        &self,
        sys: &OdeSystem,
        x: u64,
        y: &[Int],
        guard: Option<u64>,
    ) -> Result<EvalReport> {
        let mut env = self.env(sys, y)?;
        let spec = self.level_of(&sys.deriv)?;
        let var = sys.deriv.var().to_string();
        let mut f = self.initial(sys, &env)?;
        let mut bits = max_bits(&f);
        check_guard(guard, bits, 0)?;
        env.bind(var.clone(), Int::zero());
        check_bounds(sys, &env, &f, 0)?;
        for t in 0..x {
            let point = Int::from(t);
            env.bind(var.clone(), point.clone());
            bind_state(&mut env, sys, &f);
            let h = sys.rhs.iter().map(|e| env.eval(e)).collect::<std::result::Result<Vec<_>, _>>()?;
            let dl = spec.as_ref().map(|s| s.delta(&point, y));
            for (fi, hi) in f.iter_mut().zip(h) {
                match &dl {
                    Some(dl) => *fi += dl * hi,
                    None => *fi += hi,
                }
            }
            let b = max_bits(&f);
            bits = bits.max(b);
            check_guard(guard, b, t + 1)?;
            env.bind(var.clone(), Int::from(t + 1));
            check_bounds(sys, &env, &f, t + 1)?;
        }
        Ok(EvalReport { values: f, steps: x, max_bits: bits })
    }

    /// Evaluate a linear system with state-free coefficients through its
    /// closed form: the falling exponential of `A` applied to `G` plus the
    /// sum of suffix products applied to `B`.
    pub fn solve_linear_closed_form(&self, sys: &OdeSystem, x: u64, y: &[Int]) -> Result<Vec<Int>> {
        if !sys.deriv.is_plain() {
            return Err(OdeError::Unsupported("closed form is for plain derivatives".into()));
        }
        let lin = linear_decompose(&sys.rhs, &sys.state)?;
        for (component, (row, b)) in lin.a.iter().zip(&lin.b).enumerate() {
            let uses_state = row
                .iter()
                .chain(std::iter::once(b))
                .any(|e| e.free_vars().iter().any(|v| sys.state.contains(v)));
            if uses_state {
                return Err(OdeError::StateDependentCoefficients { component });
            }
        }
        let env = self.env(sys, y)?;
        let g = self.initial(sys, &env)?;
        let var = sys.deriv.var();
        let at = |u: u64| {
            let mut env = env.clone();
            env.bind(var, Int::from(u));
            lin.eval(&env)
        };
        let a_at = |u| at(u).map(|(a, _)| Matrix::from_rows(a));
        let b_at = |u| at(u).map(|(_, b)| b);
        Ok(linear_closed_form(sys.dim(), a_at, b_at, &g, x)?)
    }

    /// Jump points of the system's level function below `x`.
    pub fn jump_set(&self, deriv: &DerivVar, x: &Int, y: &[Int]) -> Result<Vec<Int>> {
        match self.level_of(deriv)? {
            Some(spec) => spec.jump_set(x, y),
            None => {
                let n = x.to_u64().ok_or_else(|| OdeError::Unsupported(format!("x = {x} out of range")))?;
                Ok((0..n).map(Int::from).collect())
            }
        }
    }

    /// `f(x) = f(0) + sum_j dL(alpha(j)) * h(f(alpha(j)), alpha(j), y)` over
    /// the jump points below `x`; one right-hand side evaluation per jump.
    pub fn solve_lode_fast(&self, sys: &OdeSystem, x: &Int, y: &[Int]) -> Result<EvalReport> {
        let points = self.jump_set(&sys.deriv, x, y)?;
        let mut stepper = self.stepper_over(sys, y, StepOptions::default(), Some(points))?;
        while stepper.step()? {}
        Ok(stepper.into_report())
    }

    /// Change of variables: iterate `F' = h` from `L(0)` to `L(x)` and
    /// read off `f(x) = F(L(x))`. The derivation variable is bound to the
    /// internal time `u`.
    pub fn solve_alternative_view(&self, sys: &OdeSystem, x: &Int, y: &[Int]) -> Result<EvalReport> {
        let spec = self
            .level_of(&sys.deriv)?
            .ok_or_else(|| OdeError::Unsupported("the alternative view needs a level function".into()))?;
        let mut env = self.env(sys, y)?;
        let start = spec.level(&Int::zero(), y);
        let span = (spec.level(x, y) - &start)
            .to_u64()
            .ok_or_else(|| OdeError::Unsupported("level function is not nondecreasing".into()))?;
        let var = sys.deriv.var().to_string();
        let mut f = self.initial(sys, &env)?;
        let mut bits = max_bits(&f);
        for k in 0..span {
            env.bind(var.clone(), &start + k);
            bind_state(&mut env, sys, &f);
            for (fi, e) in f.iter_mut().zip(&sys.rhs) {
                *fi += env.eval(e)?;
            }
            bits = bits.max(max_bits(&f));
        }
        Ok(EvalReport { values: f, steps: span, max_bits: bits })
    }

    /// Run `f(t+1) = (1 + A) f(t) + B` for `t < steps`, `A` and `B`
    /// evaluated at the current state, in the time of the jump points.
    pub fn solve_linear_fast(&self, sys: &OdeSystem, steps: u64, y: &[Int], guard: u64) -> Result<EvalReport> {
        let opts = StepOptions { linear: true, guard: Some(guard) };
        let mut stepper = self.stepper(sys, y, opts)?;
        for done in 0..steps {
            if !stepper.step()? {
                return Err(OdeError::Unsupported(format!("jump set ended after {done} steps")));
            }
        }
        Ok(stepper.into_report())
    }

    /// Step-by-step evaluation along the jump points (every `t` for plain
    /// systems, `alpha(j)` otherwise).
    pub fn stepper<'a>(&'a self, sys: &'a OdeSystem, y: &[Int], opts: StepOptions) -> Result<Stepper<'a>> {
        self.stepper_over(sys, y, opts, None)
    }

    fn stepper_over<'a>(
        &'a self,
        sys: &'a OdeSystem,
        y: &[Int],
        opts: StepOptions,
        points: Option<Vec<Int>>,
    ) -> Result<Stepper<'a>> {
        let env = self.env(sys, y)?;
        let spec = self.level_of(&sys.deriv)?;
        if let (Some(spec), None) = (&spec, &points) {
            if !spec.has_enumerator() {
                return Err(OdeError::Unsupported(format!("`{}` has no jump enumerator", spec.name())));
            }
            spec.validate(&Int::from(u64::MAX), y)?;
        }
        let linear = if opts.linear { Some(linear_decompose(&sys.rhs, &sys.state)?) } else { None };
        let state = self.initial(sys, &env)?;
        let bits = max_bits(&state);
        check_guard(opts.guard, bits, 0)?;
        Ok(Stepper {
            sys,
            env,
            y: y.to_vec(),
            spec,
            points,
            linear,
            guard: opts.guard,
            state,
            steps: 0,
            max_bits: bits,
        })
    }
}

fn bind_state(env: &mut Env, sys: &OdeSystem, f: &[Int]) {
    for (name, v) in sys.state.iter().zip(f) {
        env.bind(name.clone(), v.clone());
    }
}

fn check_guard(guard: Option<u64>, bits: u64, step: u64) -> Result<()> {
    match guard {
        Some(g) if bits > g => Err(OdeError::GrowthExceeded { step, bits }),
        _ => Ok(()),
    }
}

fn check_bounds(sys: &OdeSystem, env: &Env, f: &[Int], step: u64) -> Result<()> {
    if let Kind::Bounded(bounds) = &sys.kind {
        for (component, (fi, b)) in f.iter().zip(bounds).enumerate() {
            if fi > &env.eval(b)? {
                return Err(OdeError::BoundViolated { step, component });
            }
        }
    }
    Ok(())
}

/// `f(x) = P_0 g + sum_{u<x} P_{u+1} B(u)` where
/// `P_u = (I + A(x-1)) ... (I + A(u))` and `P_x = I`.
pub fn linear_closed_form<E, FA, FB>(n: usize, mut a_at: FA, mut b_at: FB, g: &[Int], x: u64) -> std::result::Result<Vec<Int>, E>
where
    FA: FnMut(u64) -> std::result::Result<Matrix, E>,
    FB: FnMut(u64) -> std::result::Result<Vec<Int>, E>,
{
    let mut suffix = Matrix::identity(n);
    let mut acc = vec![Int::zero(); n];
    for u in (0..x).rev() {
        for (s, v) in acc.iter_mut().zip(suffix.mul_vec(&b_at(u)?)) {
            *s += v;
        }
        suffix = suffix.mul(&Matrix::identity(n).add(&a_at(u)?));
    }
    for (s, v) in acc.iter_mut().zip(suffix.mul_vec(g)) {
        *s += v;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOptions {
    /// Evaluate through the decomposition `A f + B` instead of the
    /// right-hand side itself.
    pub linear: bool,
    pub guard: Option<u64>,
}

/// Incremental evaluation, one right-hand side evaluation per step.
pub struct Stepper<'a> {
    sys: &'a OdeSystem,
    env: Env,
    y: Vec<Int>,
    spec: Option<LSpec>,
    points: Option<Vec<Int>>,
    linear: Option<LinearForm>,
    guard: Option<u64>,
    state: Vec<Int>,
    steps: u64,
    max_bits: u64,
}

impl Stepper<'_> {
    pub fn state(&self) -> &[Int] {
        &self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }

    fn point(&self, j: u64) -> Option<Int> {
        match (&self.points, &self.spec) {
            (Some(list), _) => usize::try_from(j).ok().and_then(|j| list.get(j)).cloned(),
            (None, None) => Some(Int::from(j)),
            (None, Some(spec)) => spec.alpha(j, &self.y),
        }
    }

    /// Advance one jump; `false` when the jump points are exhausted.
    pub fn step(&mut self) -> Result<bool> {
        let Some(point) = self.point(self.steps) else {
            return Ok(false);
        };
        let var = self.sys.deriv.var();
        self.env.bind(var, point.clone());
        bind_state(&mut self.env, self.sys, &self.state);
        let h = match &self.linear {
            Some(lin) => lin.apply(&self.env, &self.state)?,
            None => self
                .sys
                .rhs
                .iter()
                .map(|e| self.env.eval(e))
                .collect::<std::result::Result<Vec<_>, _>>()?,
        };
        let dl = self.spec.as_ref().map(|s| s.delta(&point, &self.y));
        for (fi, hi) in self.state.iter_mut().zip(h) {
            match &dl {
                Some(dl) => *fi += dl * hi,
                None => *fi += hi,
            }
        }
        self.steps += 1;
        let bits = max_bits(&self.state);
        self.max_bits = self.max_bits.max(bits);
        check_guard(self.guard, bits, self.steps)?;
        if matches!(self.sys.kind, Kind::Bounded(_)) {
            self.env.bind(var, Int::from(self.steps));
            check_bounds(self.sys, &self.env, &self.state, self.steps)?;
        }
        Ok(true)
    }

    pub fn into_report(self) -> EvalReport {
        EvalReport { values: self.state, steps: self.steps, max_bits: self.max_bits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn i(v: i64) -> Int {
        Int::from(v)
    }

    fn solver() -> Solver {
        Solver::standard()
    }

    #[test]
    fn naive_examples() {
        let s = OdeSystem::plain(&["f"], &[], &["0"], &["1"]).unwrap();
        let r = solver().solve_naive(&s, 7, &[]).unwrap();
        assert_eq!((r.values, r.steps), (vec![i(7)], 7));

        let sign = OdeSystem::plain(&["f"], &[], &["0"], &["0 - f + 1"]).unwrap();
        assert_eq!(solver().solve_naive(&sign, 0, &[]).unwrap().values, vec![i(0)]);
        for x in 1..=20 {
            assert_eq!(solver().solve_naive(&sign, x, &[]).unwrap().values, vec![i(1)]);
        }

        let exp = OdeSystem::plain(&["f"], &[], &["1"], &["f"]).unwrap();
        let r = solver().solve_naive(&exp, 10, &[]).unwrap();
        assert_eq!(r.values, vec![i(1024)]);
        assert_eq!(r.max_bits, 11);
    }

    #[test]
    fn bounded_systems_report_violations() {
        let s = OdeSystem::new(
            "b",
            vec!["f".into()],
            vec![],
            DerivVar::Plain("x".into()),
            vec![crate::parse_expr("0").unwrap()],
            vec![crate::parse_expr("2").unwrap()],
            Some(vec![crate::parse_expr("x + 5").unwrap()]),
        )
        .unwrap();
        assert_eq!(solver().solve_naive(&s, 5, &[]).unwrap().values, vec![i(10)]);
        assert_eq!(
            solver().solve_naive(&s, 10, &[]).unwrap_err(),
            OdeError::BoundViolated { step: 6, component: 0 }
        );
    }

    #[test]
    fn closed_form_examples() {
        let exp = OdeSystem::plain(&["f"], &[], &["1"], &["f"]).unwrap();
        assert_eq!(solver().solve_linear_closed_form(&exp, 6, &[]).unwrap(), vec![i(64)]);
        let int = OdeSystem::plain(&["f"], &[], &["0"], &["1"]).unwrap();
        assert_eq!(solver().solve_linear_closed_form(&int, 9, &[]).unwrap(), vec![i(9)]);
        let dep = OdeSystem::plain(&["f"], &[], &["1"], &["sg(f)*f"]).unwrap();
        assert_eq!(
            solver().solve_linear_closed_form(&dep, 3, &[]).unwrap_err(),
            OdeError::StateDependentCoefficients { component: 0 }
        );
    }

    #[test]
    fn closed_form_matches_naive_with_params() {
        let s = OdeSystem::plain(
            &["f", "g"],
            &["y"],
            &["y", "1 - y"],
            &["x*g - f + y", "sg(x - 3)*f + 2*g - x*x"],
        )
        .unwrap();
        for x in 0..30 {
            for y in [-3, 0, 4] {
                let naive = solver().solve_naive(&s, x, &[i(y)]).unwrap().values;
                assert_eq!(solver().solve_linear_closed_form(&s, x, &[i(y)]).unwrap(), naive);
            }
        }
    }

    fn pow2_len() -> OdeSystem {
        OdeSystem::from_text("p", &["f"], &[], DerivVar::Length("x".into()), &["1"], &["f"]).unwrap()
    }

    #[test]
    fn lode_fast_examples() {
        let r = solver().solve_lode_fast(&pow2_len(), &i(5), &[]).unwrap();
        assert_eq!((r.values, r.steps), (vec![i(8)], 3));
        let r = solver().solve_lode_fast(&pow2_len(), &i(0), &[]).unwrap();
        assert_eq!((r.values, r.steps), (vec![i(1)], 0));
        for x in 0..300u64 {
            let fast = solver().solve_lode_fast(&pow2_len(), &Int::from(x), &[]).unwrap();
            let naive = solver().solve_naive(&pow2_len(), x, &[]).unwrap();
            assert_eq!(fast.values, naive.values);
            assert_eq!(fast.steps, numeric::length(&Int::from(x)));
        }
    }

    #[test]
    fn lode_fast_on_other_levels() {
        for spec in ["len_sq", "isqrt"] {
            let deriv = DerivVar::Named { var: "x".into(), spec: spec.into() };
            let s = OdeSystem::from_text("q", &["f"], &["y"], deriv, &["y"], &["f + x - y"]).unwrap();
            for x in 0..200u64 {
                let y = [i(3)];
                let fast = solver().solve_lode_fast(&s, &Int::from(x), &y).unwrap();
                let naive = solver().solve_naive(&s, x, &y).unwrap();
                assert_eq!(fast.values, naive.values, "{spec} at {x}");
            }
        }
    }

    #[test]
    fn lode_values_only_depend_on_level() {
        let deriv = DerivVar::Named { var: "x".into(), spec: "isqrt".into() };
        let s = OdeSystem::from_text("q", &["f"], &[], deriv, &["2"], &["f*f - 1"]).unwrap();
        let solver = solver();
        let spec = LSpec::isqrt();
        let mut by_level = std::collections::HashMap::new();
        for x in 0..=120u64 {
            let v = solver.solve_naive(&s, x, &[]).unwrap().values;
            let level = spec.level(&Int::from(x), &[]);
            assert_eq!(by_level.entry(level).or_insert_with(|| v.clone()), &v);
        }
    }

    #[test]
    fn alternative_view_runs_in_level_time() {
        let deriv = DerivVar::Named { var: "x".into(), spec: "len_sq".into() };
        let s = OdeSystem::from_text("sq", &["f"], &[], deriv, &["1"], &["f"]).unwrap();
        for x in 0..200u64 {
            let r = solver().solve_alternative_view(&s, &Int::from(x), &[]).unwrap();
            let l = numeric::length(&Int::from(x));
            assert_eq!(r.values, vec![Int::one() << (l * l)]);
            assert_eq!(r.steps, l * l);
        }
    }

    #[test]
    fn linear_fast_and_guard() {
        let exp = OdeSystem::plain(&["f"], &[], &["1"], &["f"]).unwrap();
        let r = solver().solve_linear_fast(&exp, 10, &[], 64).unwrap();
        assert_eq!((r.values, r.steps), (vec![i(1024)], 10));
        assert_eq!(
            solver().solve_linear_fast(&exp, 100, &[], 8).unwrap_err(),
            OdeError::GrowthExceeded { step: 8, bits: 9 }
        );
        let sq = OdeSystem::plain(&["f"], &[], &["1"], &["f*f"]).unwrap();
        assert!(matches!(
            solver().solve_linear_fast(&sq, 3, &[], 64),
            Err(OdeError::NotEssentiallyLinear(_))
        ));
    }

    #[test]
    fn lenprod_via_linear_fast() {
        let s = OdeSystem::from_text(
            "lenprod",
            &["f"],
            &["y"],
            DerivVar::Length("x".into()),
            &["1"],
            &["f*(pow2(len(y)) - 1)"],
        )
        .unwrap();
        for x in [0u64, 1, 5, 77, 1023] {
            for y in [0u64, 3, 100, 1000] {
                let steps = numeric::length(&Int::from(x));
                let r = solver().solve_linear_fast(&s, steps, &[Int::from(y)], 10_000).unwrap();
                let expected = Int::one() << (steps * numeric::length(&Int::from(y)));
                assert_eq!(r.values, vec![expected]);
            }
        }
    }

    #[test]
    fn constant_level_never_moves() {
        let mut lspecs = LSpecRegistry::standard();
        lspecs.insert(LSpec::constant("flat"));
        let solver = Solver::new(FnRegistry::base(), lspecs);
        let deriv = DerivVar::Named { var: "x".into(), spec: "flat".into() };
        let s = OdeSystem::from_text("c", &["f"], &[], deriv, &["5"], &["f + 1"]).unwrap();
        let r = solver.solve_lode_fast(&s, &i(50), &[]).unwrap();
        assert_eq!((r.values, r.steps), (vec![i(5)], 0));
        assert_eq!(solver.solve_naive(&s, 50, &[]).unwrap().values, vec![i(5)]);
    }

    #[test]
    fn parameter_count_is_checked() {
        let s = OdeSystem::plain(&["f"], &["y"], &["y"], &["1"]).unwrap();
        assert!(matches!(
            solver().solve_naive(&s, 1, &[]),
            Err(OdeError::DimensionMismatch { what: "parameters", .. })
        ));
    }
}
