//! Exact evaluation of expressions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::Expr;
use crate::numeric::{self, Int};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("function `{name}` failed: {message}")]
    Domain { name: String, message: String },
}

type FnBody = dyn Fn(&[Int]) -> Result<Int, EvalError> + Send + Sync;

/// A registered auxiliary function callable from `Call` nodes.
#[derive(Clone)]
pub struct NativeFn {
    arity: Option<usize>,
    body: Arc<FnBody>,
}

impl NativeFn {
    /// `arity = None` accepts any number of arguments.
    pub fn new<F>(arity: Option<usize>, body: F) -> Self
    where
        F: Fn(&[Int]) -> Result<Int, EvalError> + Send + Sync + 'static,
    {
        NativeFn { arity, body: Arc::new(body) }
    }

    pub fn arity(&self) -> Option<usize> {
        self.arity
    }

    pub fn call(&self, name: &str, args: &[Int]) -> Result<Int, EvalError> {
        if let Some(expected) = self.arity {
            if expected != args.len() {
                return Err(EvalError::Arity { name: name.to_string(), expected, got: args.len() });
            }
        }
        (self.body)(args)
    }
}

impl fmt::Debug for NativeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NativeFn").field("arity", &self.arity).finish_non_exhaustive()
    }
}

/// Name-to-function table consulted by `Call` nodes.
#[derive(Clone, Debug, Default)]
pub struct FnRegistry {
    fns: HashMap<String, NativeFn>,
}

impl FnRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `len` (binary length) and `pow2` (floor of `2^n`).
    pub fn base() -> Self {
        let mut reg = Self::empty();
        reg.insert("len", NativeFn::new(Some(1), |a| Ok(numeric::length_int(&a[0]))));
        reg.insert(
            "pow2",
            NativeFn::new(Some(1), |a| {
                numeric::pow2(&a[0]).ok_or_else(|| EvalError::Domain {
                    name: "pow2".into(),
                    message: format!("exponent {} too large", a[0]),
                })
            }),
        );
        reg
    }

    pub fn insert(&mut self, name: impl Into<String>, f: NativeFn) {
        self.fns.insert(name.into(), f);
    }

    /// Builder-style [`insert`](Self::insert).
    pub fn with(mut self, name: impl Into<String>, f: NativeFn) -> Self {
        self.insert(name, f);
        self
    }

    pub fn get(&self, name: &str) -> Option<&NativeFn> {
        self.fns.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fns.contains_key(name)
    }

    pub fn call(&self, name: &str, args: &[Int]) -> Result<Int, EvalError> {
        self.get(name)
            .ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?
            .call(name, args)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fns.keys().map(String::as_str)
    }
}

/// Variable bindings plus the function table.
#[derive(Clone, Debug, Default)]
pub struct Env {
    bindings: HashMap<String, Int>,
    functions: FnRegistry,
}

impl Env {
    pub fn new(functions: FnRegistry) -> Self {
        Env { bindings: HashMap::new(), functions }
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Int) -> &mut Self {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<Int>) -> Self {
        self.bind(name, value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&Int> {
        self.bindings.get(name)
    }

    pub fn functions(&self) -> &FnRegistry {
        &self.functions
    }

    pub fn eval(&self, e: &Expr) -> Result<Int, EvalError> {
        Ok(match e {
            Expr::Const(c) => c.clone(),
            Expr::Var(v) => self
                .bindings
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?,
            Expr::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Expr::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Expr::Mul(a, b) => {
                let lhs = self.eval(a)?;
                // sg-guarded products are common; skip the other side when zero.
                if num_traits::Zero::is_zero(&lhs) {
                    self.check_closed(b)?;
                    lhs
                } else {
                    lhs * self.eval(b)?
                }
            }
            Expr::Sg(a) => numeric::sg(&self.eval(a)?),
            Expr::Call(name, args) => {
                let f = self
                    .functions
                    .get(name)
                    .ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                let values = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                f.call(name, &values)?
            }
        })
    }

    /// Short-circuited subtrees must still be well-formed in this env.
    fn check_closed(&self, e: &Expr) -> Result<(), EvalError> {
        match e {
            Expr::Const(_) => Ok(()),
            Expr::Var(v) if self.bindings.contains_key(v) => Ok(()),
            Expr::Var(v) => Err(EvalError::UnboundVariable(v.clone())),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                self.check_closed(a)?;
                self.check_closed(b)
            }
            Expr::Sg(a) => self.check_closed(a),
            Expr::Call(name, args) => {
                if !self.functions.contains(name) {
                    return Err(EvalError::UnknownFunction(name.clone()));
                }
                args.iter().try_for_each(|a| self.check_closed(a))
            }
        }
    }
}

/// Evaluate `e` under `env`.
pub fn eval_expr(e: &Expr, env: &Env) -> Result<Int, EvalError> {
    env.eval(e)
}
