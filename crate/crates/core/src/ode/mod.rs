//! Initial value problems over the naturals.
//!
//! An [`OdeSystem`] describes `f(0, y) = G(y)` and `f' = h(f, x, y)` where
//! the derivative is taken either in `x` itself or along a level function
//! `L` (an L-ODE): `f(x+1) = f(x) + (L(x+1) - L(x)) * h(f(x), x, y)`.
//! [`Solver`] provides the naive iteration, the closed form of linear
//! systems, jump sets and the fast evaluation paths.

mod file;
mod lspec;
mod solve;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::expr::{linear_decompose, EvalError, Expr, NotEssentiallyLinear};
use crate::numeric::Int;

pub use file::{parse_system, FileError};
pub use lspec::{LSpec, LSpecRegistry};
pub use solve::{linear_closed_form, EvalReport, Solver, StepOptions, Stepper};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("component {component} exceeds its bound at step {step}")]
    BoundViolated { step: u64, component: usize },
    #[error("growth guard tripped at step {step}: a component needs {bits} bits")]
    GrowthExceeded { step: u64, bits: u64 },
    #[error(transparent)]
    NotEssentiallyLinear(#[from] NotEssentiallyLinear),
    #[error("coefficients of component {component} depend on the state")]
    StateDependentCoefficients { component: usize },
    #[error("jump enumerator of `{spec}` disagrees with a scan at point {point}")]
    EnumeratorMismatch { spec: String, point: u64 },
    #[error("unknown level function `{0}`")]
    UnknownLSpec(String),
    #[error("`{spec}` has no jump enumerator and x = {x} is too large to scan")]
    ScanTooLarge { spec: String, x: Int },
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, OdeError>;

/// The variable the derivative is taken in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivVar {
    /// `f'(x)`, the plain forward difference.
    Plain(String),
    /// `f'` along `L(x) = len(x)`.
    Length(String),
    /// `f'` along a registered level function.
    Named { var: String, spec: String },
}

impl DerivVar {
    pub fn var(&self) -> &str {
        match self {
            DerivVar::Plain(v) | DerivVar::Length(v) | DerivVar::Named { var: v, .. } => v,
        }
    }

    pub fn is_plain(&self) -> bool {
        matches!(self, DerivVar::Plain(_))
    }
}

impl fmt::Display for DerivVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivVar::Plain(v) => write!(f, "{v}"),
            DerivVar::Length(v) => write!(f, "len({v})"),
            DerivVar::Named { var, spec } => write!(f, "{spec}({var})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Plain,
    Linear,
    /// Componentwise upper bounds `i(x, y)`.
    Bounded(Vec<Expr>),
    LOde,
    LinearLengthOde,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeSystem {
    pub name: String,
    pub state: Vec<String>,
    pub params: Vec<String>,
    pub deriv: DerivVar,
    pub init: Vec<Expr>,
    pub rhs: Vec<Expr>,
    pub kind: Kind,
    /// Comment lines kept ahead of the system in its file form.
    pub header: Vec<String>,
}

impl OdeSystem {
    /// Build a system, inferring the most specific kind: `Bounded` when
    /// bounds are given, otherwise `Linear`/`LinearLengthOde` when the
    /// right-hand side decomposes, else `Plain`/`LOde`.
    pub fn new(
        name: impl Into<String>,
        state: Vec<String>,
        params: Vec<String>,
        deriv: DerivVar,
        init: Vec<Expr>,
        rhs: Vec<Expr>,
        bounds: Option<Vec<Expr>>,
    ) -> Result<OdeSystem> {
        let decomposes = linear_decompose(&rhs, &state).is_ok();
        let kind = match (&deriv, bounds) {
            (_, Some(b)) => Kind::Bounded(b),
            (DerivVar::Plain(_), None) if decomposes => Kind::Linear,
            (DerivVar::Plain(_), None) => Kind::Plain,
            (DerivVar::Length(_), None) if decomposes => Kind::LinearLengthOde,
            (_, None) => Kind::LOde,
        };
        OdeSystem { name: name.into(), state, params, deriv, init, rhs, kind, header: Vec::new() }
            .validated()
    }

    /// Shorthand for a plain system in `x` given as text expressions.
    pub fn plain(state: &[&str], params: &[&str], init: &[&str], rhs: &[&str]) -> Result<OdeSystem> {
        OdeSystem::from_text("sys", state, params, DerivVar::Plain("x".into()), init, rhs)
    }

    /// Shorthand for a system built from text expressions.
    pub fn from_text(
        name: &str,
        state: &[&str],
        params: &[&str],
        deriv: DerivVar,
        init: &[&str],
        rhs: &[&str],
    ) -> Result<OdeSystem> {
        let parse = |items: &[&str]| {
            items
                .iter()
                .map(|s| crate::expr::parse_expr(s).map_err(|e| OdeError::Malformed(format!("`{s}`: {e}"))))
                .collect::<Result<Vec<_>>>()
        };
        OdeSystem::new(
            name,
            state.iter().map(|s| s.to_string()).collect(),
            params.iter().map(|s| s.to_string()).collect(),
            deriv,
            parse(init)?,
            parse(rhs)?,
            None,
        )
    }

    /// Replace the inferred kind, re-checking its invariants.
    pub fn with_kind(mut self, kind: Kind) -> Result<OdeSystem> {
        self.kind = kind;
        self.validated()
    }

    pub fn with_header(mut self, header: Vec<String>) -> OdeSystem {
        self.header = header;
        self
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    fn validated(self) -> Result<OdeSystem> {
        let k = self.state.len();
        for (what, got) in [("initial values", self.init.len()), ("derivatives", self.rhs.len())] {
            if got != k {
                return Err(OdeError::DimensionMismatch { what, expected: k, got });
            }
        }
        let mut seen = BTreeSet::new();
        let var = self.deriv.var();
        for name in self.state.iter().chain(&self.params).chain(std::iter::once(&var.to_string())) {
            if !seen.insert(name.clone()) {
                return Err(OdeError::Malformed(format!("name `{name}` declared twice")));
            }
        }
        let mut rhs_scope: BTreeSet<&str> = self.state.iter().map(String::as_str).collect();
        rhs_scope.extend(self.params.iter().map(String::as_str));
        rhs_scope.insert(var);
        let init_scope: BTreeSet<&str> = self.params.iter().map(String::as_str).collect();
        let mut bound_scope = init_scope.clone();
        bound_scope.insert(var);
        let check = |e: &Expr, scope: &BTreeSet<&str>, what: &str| {
            match e.free_vars().into_iter().find(|v| !scope.contains(v.as_str())) {
                Some(v) => Err(OdeError::Malformed(format!("{what} uses undeclared variable `{v}`"))),
                None => Ok(()),
            }
        };
        for e in &self.init {
            check(e, &init_scope, "an initial value")?;
        }
        for e in &self.rhs {
            check(e, &rhs_scope, "a derivative")?;
        }
        match &self.kind {
            Kind::Linear => {
                linear_decompose(&self.rhs, &self.state)?;
            }
            Kind::LinearLengthOde => {
                if !matches!(self.deriv, DerivVar::Length(_)) {
                    return Err(OdeError::Malformed("a linear length-ODE must be taken wrt len(x)".into()));
                }
                linear_decompose(&self.rhs, &self.state)?;
            }
            Kind::Bounded(bounds) => {
                if !self.deriv.is_plain() {
                    return Err(OdeError::Malformed("bounded systems are taken wrt a plain variable".into()));
                }
                if bounds.len() != k {
                    return Err(OdeError::DimensionMismatch { what: "bounds", expected: k, got: bounds.len() });
                }
                for e in bounds {
                    check(e, &bound_scope, "a bound")?;
                }
            }
            Kind::Plain if !self.deriv.is_plain() => {
                return Err(OdeError::Malformed("a plain system is taken wrt a plain variable".into()));
            }
            Kind::LOde if self.deriv.is_plain() => {
                return Err(OdeError::Malformed("an L-ODE needs a level function".into()));
            }
            Kind::Plain | Kind::LOde => {}
        }
        Ok(self)
    }
}
