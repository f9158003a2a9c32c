//! Degree, essential constancy and essentially-linear decomposition.
//!
//! Degrees follow the sg-polynomial rules: a variable in the set has
//! degree 1, constants and other variables 0, `+`/`-` take the max, `*`
//! adds, and anything under `sg` or inside a call argument contributes 0.

use thiserror::Error;

use super::{Env, EvalError, Expr};
use crate::numeric::Int;

/// Total degree of `e` in the variables `vars`.
pub fn degree<S: AsRef<str>>(e: &Expr, vars: &[S]) -> u32 {
    let in_set = |name: &str| vars.iter().any(|v| v.as_ref() == name);
    degree_with(e, &in_set)
}

fn degree_with(e: &Expr, in_set: &dyn Fn(&str) -> bool) -> u32 {
    match e {
        Expr::Const(_) => 0,
        Expr::Var(v) => u32::from(in_set(v)),
        Expr::Add(a, b) | Expr::Sub(a, b) => degree_with(a, in_set).max(degree_with(b, in_set)),
        Expr::Mul(a, b) => degree_with(a, in_set) + degree_with(b, in_set),
        Expr::Sg(_) | Expr::Call(..) => 0,
    }
}

pub fn is_essentially_constant<S: AsRef<str>>(e: &Expr, vars: &[S]) -> bool {
    degree(e, vars) == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("component {component} is not essentially linear: a product term has state degree {degree}")]
pub struct NotEssentiallyLinear {
    pub component: usize,
    pub degree: u32,
}

/// `u = A * f + B` with every entry of `A` and `B` essentially constant in
/// the state `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub state: Vec<String>,
    /// Row `i` holds the coefficients of component `i`; zero entries are
    /// the literal `0`.
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Expr>,
}

impl LinearForm {
    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Evaluate `A` (dense, row-major) and `B` in `env`.
    pub fn eval(&self, env: &Env) -> Result<(Vec<Vec<Int>>, Vec<Int>), EvalError> {
        let a = self
            .a
            .iter()
            .map(|row| row.iter().map(|e| eval_or_zero(e, env)).collect())
            .collect::<Result<Vec<Vec<Int>>, _>>()?;
        let b = self.b.iter().map(|e| eval_or_zero(e, env)).collect::<Result<_, _>>()?;
        Ok((a, b))
    }

    /// Evaluate `A * f + B` for the state values `f`.
    pub fn apply(&self, env: &Env, f: &[Int]) -> Result<Vec<Int>, EvalError> {
        let mut out = Vec::with_capacity(self.dim());
        for (row, b) in self.a.iter().zip(&self.b) {
            let mut acc = eval_or_zero(b, env)?;
            for (coef, fj) in row.iter().zip(f) {
                if !coef.is_zero_const() {
                    acc += env.eval(coef)? * fj;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

fn eval_or_zero(e: &Expr, env: &Env) -> Result<Int, EvalError> {
    if e.is_zero_const() {
        Ok(Int::default())
    } else {
        env.eval(e)
    }
}

/// Rewrite each component of `u` as `sum_j A_ij * f_j + B_i`.
///
/// Products are distributed only when one side has state degree 0; a
/// product of two state-dependent factors is rejected.
pub fn linear_decompose<S: AsRef<str>>(
    u: &[Expr],
    state: &[S],
) -> Result<LinearForm, NotEssentiallyLinear> {
    let state: Vec<String> = state.iter().map(|s| s.as_ref().to_string()).collect();
    let mut a = Vec::with_capacity(u.len());
    let mut b = Vec::with_capacity(u.len());
    for (component, e) in u.iter().enumerate() {
        let lin = decompose(e, &state).map_err(|degree| NotEssentiallyLinear { component, degree })?;
        a.push(lin.coeffs.into_iter().map(|c| c.unwrap_or_else(Expr::zero)).collect());
        b.push(lin.constant.unwrap_or_else(Expr::zero));
    }
    Ok(LinearForm { state, a, b })
}

/// Partial linear form; `None` stands for a zero coefficient.
struct Lin {
    coeffs: Vec<Option<Expr>>,
    constant: Option<Expr>,
}

impl Lin {
    fn constant(k: usize, e: Expr) -> Lin {
        Lin { coeffs: vec![None; k], constant: Some(e) }
    }

    fn combine(self, other: Lin, negate_other: bool) -> Lin {
        let join = |x: Option<Expr>, y: Option<Expr>| match (x, y) {
            (x, None) => x,
            (None, Some(y)) if negate_other => Some(Expr::neg(y)),
            (None, y) => y,
            (Some(x), Some(y)) if negate_other => Some(Expr::sub(x, y)),
            (Some(x), Some(y)) => Some(Expr::add(x, y)),
        };
        Lin {
            coeffs: self.coeffs.into_iter().zip(other.coeffs).map(|(x, y)| join(x, y)).collect(),
            constant: join(self.constant, other.constant),
        }
    }

    fn scale(self, factor: &Expr) -> Lin {
        let times = |c: Option<Expr>| {
            c.map(|c| if c.is_one_const() { factor.clone() } else { Expr::mul(factor.clone(), c) })
        };
        Lin {
            coeffs: self.coeffs.into_iter().map(times).collect(),
            constant: times(self.constant),
        }
    }
}

fn decompose(e: &Expr, state: &[String]) -> Result<Lin, u32> {
    let k = state.len();
    match e {
        Expr::Var(v) => match state.iter().position(|s| s == v) {
            Some(j) => {
                let mut coeffs = vec![None; k];
                coeffs[j] = Some(Expr::one());
                Ok(Lin { coeffs, constant: None })
            }
            None => Ok(Lin::constant(k, e.clone())),
        },
        Expr::Const(_) | Expr::Sg(_) | Expr::Call(..) => Ok(Lin::constant(k, e.clone())),
        Expr::Add(p, q) => Ok(decompose(p, state)?.combine(decompose(q, state)?, false)),
        Expr::Sub(p, q) => Ok(decompose(p, state)?.combine(decompose(q, state)?, true)),
        Expr::Mul(p, q) => {
            let dp = degree(p, state);
            let dq = degree(q, state);
            if dp == 0 {
                Ok(decompose(q, state)?.scale(p))
            } else if dq == 0 {
                Ok(decompose(p, state)?.scale(q))
            } else {
                Err(dp + dq)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, FnRegistry};
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn degree_example() {
        let e = p("x*sg((x*x-z)*y)+y*y*y");
        assert_eq!(degree(&e, &["x"]), 1);
        assert_eq!(degree(&e, &["z"]), 0);
        assert_eq!(degree(&e, &["y"]), 3);
        assert_eq!(degree(&p("sg(x*x*x)"), &["x"]), 0);
        assert_eq!(degree(&p("5"), &["x"]), 0);
        assert_eq!(degree(&p("len(x*x)*x"), &["x"]), 1);
    }

    #[test]
    fn essential_constancy() {
        assert!(is_essentially_constant(&p("sg(x*x-z)*z*z+w"), &["x"]));
        assert!(!is_essentially_constant(&p("x+1"), &["x"]));
        assert!(is_essentially_constant(&p("sg(f)*sg(g)"), &["f", "g"]));
    }

    #[test]
    fn decompose_target_form() {
        let lin = linear_decompose(&[p("sg(t)*f + t*t")], &["f"]).unwrap();
        assert_eq!(lin.a, vec![vec![p("sg(t)")]]);
        assert_eq!(lin.b, vec![p("t*t")]);
    }

    #[test]
    fn decompose_conditional() {
        let u = p("ifz(x, y, z)");
        let lin = linear_decompose(&[u.clone()], &["y", "z"]).unwrap();
        for row in &lin.a {
            for c in row {
                assert!(is_essentially_constant(c, &["y", "z"]));
            }
        }
        assert!(is_essentially_constant(&lin.b[0], &["y", "z"]));
        let reg = FnRegistry::base();
        for (x, y, z) in [(0, 3, 8), (5, 3, 8), (-1, -2, 4)] {
            let env = Env::new(reg.clone()).with("x", x).with("y", y).with("z", z);
            let f = [Int::from(y), Int::from(z)];
            assert_eq!(lin.apply(&env, &f).unwrap()[0], env.eval(&u).unwrap());
        }
    }

    #[test]
    fn decompose_rejects_quadratic() {
        let err = linear_decompose(&[p("f"), p("f*f")], &["f"]).unwrap_err();
        assert_eq!(err, NotEssentiallyLinear { component: 1, degree: 2 });
        assert!(linear_decompose(&[p("(f+1)*(g-1)")], &["f", "g"]).is_err());
        // state inside sg or a call is degree 0
        assert!(linear_decompose(&[p("f*sg(f) + len(g)*g")], &["f", "g"]).is_ok());
    }

    fn arb_linear_expr() -> impl Strategy<Value = Expr> {
        let opaque = prop_oneof![
            (-9i64..9).prop_map(Expr::int),
            Just(Expr::var("y")),
            Just(p("sg(f - y)")),
            Just(p("len(g)")),
        ];
        let leaf = prop_oneof![
            opaque.clone(),
            Just(Expr::var("f")),
            Just(Expr::var("g")),
        ];
        leaf.prop_recursive(4, 32, 2, move |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
                (opaque.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                (inner.clone(), opaque.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                inner.clone().prop_map(Expr::sg),
            ]
        })
    }

    fn big() -> impl Strategy<Value = Int> {
        (any::<bool>(), any::<u64>()).prop_map(|(neg, m)| if neg { -Int::from(m) } else { Int::from(m) })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn decomposition_is_sound(
            e in arb_linear_expr(),
            envs in prop::collection::vec((big(), big(), big()), 5),
        ) {
            let lin = linear_decompose(std::slice::from_ref(&e), &["f", "g"]).unwrap();
            for row in &lin.a {
                for c in row {
                    prop_assert!(is_essentially_constant(c, &["f", "g"]));
                }
            }
            for (f, g, y) in envs {
                let env = Env::new(FnRegistry::base())
                    .with("f", f.clone()).with("g", g.clone()).with("y", y);
                let direct = env.eval(&e).unwrap();
                prop_assert_eq!(lin.apply(&env, &[f, g]).unwrap()[0].clone(), direct);
            }
        }

        #[test]
        fn degree_rules_hold_node_by_node(e in crate::expr::tests::arb_expr()) {
            let vars = ["x", "f"];
            let d = degree(&e, &vars);
            let expected = match &e {
                Expr::Const(_) => 0,
                Expr::Var(v) => u32::from(vars.contains(&v.as_str())),
                Expr::Add(a, b) | Expr::Sub(a, b) => degree(a, &vars).max(degree(b, &vars)),
                Expr::Mul(a, b) => degree(a, &vars) + degree(b, &vars),
                Expr::Sg(_) | Expr::Call(..) => 0,
            };
            prop_assert_eq!(d, expected);
        }
    }
}
