//! The sg-polynomial expression language.
//!
//! Expressions are built from integer constants, variables, `+`, `-`, `*`,
//! the sign function `sg` and calls to registered auxiliary functions
//! (`len`, `pow2`, library functions). The static analyses in
//! [`analysis`] compute degrees and essentially-linear decompositions; the
//! evaluator in [`eval`] computes exact values.

pub mod analysis;
pub mod eval;
pub mod parse;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::numeric::Int;

pub use analysis::{degree, is_essentially_constant, linear_decompose, LinearForm, NotEssentiallyLinear};
pub use eval::{eval_expr, Env, EvalError, FnRegistry, NativeFn};
pub use parse::{parse_expr, ParseError};

/// An sg-polynomial expression tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Int),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sg(Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn int(v: impl Into<Int>) -> Expr {
        Expr::Const(v.into())
    }

    pub fn zero() -> Expr {
        Expr::Const(Int::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Int::one())
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Call(name.into(), args)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn sg(a: Expr) -> Expr {
        Expr::Sg(Box::new(a))
    }

    /// `0 - a`; the grammar has no unary minus.
    pub fn neg(a: Expr) -> Expr {
        Expr::sub(Expr::zero(), a)
    }

    /// `(1 - sg(a)) * (1 - sg(0 - a))`: one exactly when `a == 0`.
    pub fn cosg(a: Expr) -> Expr {
        Expr::mul(
            Expr::sub(Expr::one(), Expr::sg(a.clone())),
            Expr::sub(Expr::one(), Expr::sg(Expr::neg(a))),
        )
    }

    /// `z + cosg(c) * (y - z)`: `y` when `c == 0`, `z` otherwise.
    pub fn ifz(c: Expr, y: Expr, z: Expr) -> Expr {
        Expr::add(z.clone(), Expr::mul(Expr::cosg(c), Expr::sub(y, z)))
    }

    /// `y + cosg(c) * (z - y)`: `y` when `c != 0`, `z` otherwise.
    pub fn ifnz(c: Expr, y: Expr, z: Expr) -> Expr {
        Expr::add(y.clone(), Expr::mul(Expr::cosg(c), Expr::sub(z, y)))
    }

    /// Sum of the given terms, `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(Expr::add)
            .unwrap_or_else(Expr::zero)
    }

    /// Product of the given factors, `1` when empty.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        factors
            .into_iter()
            .reduce(Expr::mul)
            .unwrap_or_else(Expr::one)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Free variable names, including those under `sg` and call arguments.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Sg(a) => a.collect_vars(out),
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Names of every called function.
    pub fn called_functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_calls(&mut out);
        out
    }

    fn collect_calls(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_calls(out);
                b.collect_calls(out);
            }
            Expr::Sg(a) => a.collect_calls(out),
            Expr::Call(name, args) => {
                out.insert(name.clone());
                args.iter().for_each(|a| a.collect_calls(out));
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => 1 + a.size() + b.size(),
            Expr::Sg(a) => 1 + a.size(),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 0,
            Expr::Mul(..) => 1,
            _ => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " + ")?;
                b.fmt_at(f, 1)
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " - ")?;
                b.fmt_at(f, 1)
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, "*")?;
                b.fmt_at(f, 2)
            }
            Expr::Sg(a) => {
                write!(f, "sg(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    a.fmt_at(f, 0)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Prints in the concrete grammar accepted by [`parse_expr`]; the output
/// parses back to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-50i64..50).prop_map(Expr::int),
            prop::sample::select(vec!["x", "y", "z", "f"]).prop_map(Expr::var),
        ];
        leaf.prop_recursive(5, 40, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
                inner.clone().prop_map(Expr::sg),
                inner.clone().prop_map(|a| Expr::call("len", vec![a])),
            ]
        })
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let e = parse_expr("x*sg((x*x-z)*y)+y*y*y").unwrap();
        assert_eq!(e.to_string(), "x*sg((x*x - z)*y) + y*y*y");
        let e = parse_expr("a-(b-c)").unwrap();
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = parse_expr("a*(b*c)").unwrap();
        assert_eq!(e.to_string(), "a*(b*c)");
        assert_eq!(parse_expr("x*-3").unwrap().to_string(), "x*-3");
    }

    #[test]
    fn free_vars_see_through_sg_and_calls() {
        let e = parse_expr("sg(a) + len(b*c) + 2").unwrap();
        let vars: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(vars, ["a", "b", "c"]);
        assert_eq!(
            e.called_functions().into_iter().collect::<Vec<_>>(),
            ["len"]
        );
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_expr(&text).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
