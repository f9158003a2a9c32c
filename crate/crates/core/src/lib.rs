//! Exact discrete ordinary differential equations over the integers.
//!
//! The crate is organised bottom-up:
//!
//! * [`numeric`]: integer conventions (`length`, `sg`, `cosg`, `ifz`).
//! * [`expr`]: the sg-polynomial expression language, its evaluator and
//!   the degree / essential-linearity analyses.
//! * [`calculus`]: discrete derivative, integral, falling powers and
//!   falling exponentials, plus an identity checker.
//! * [`ode`]: initial value problems, naive and fast solvers, jump sets
//!   and the system file format.
//! * [`funclib`]: functions programmed as ODEs (integer square root,
//!   division, suffix, powers of two, bounded sums and products,
//!   minimization).
//! * [`machines`]: register machine and RAM simulators.
//! * [`compiler`]: register machine programs compiled to linear
//!   length-ODE systems.

pub mod calculus;
pub mod compiler;
pub mod expr;
pub mod funclib;
pub mod machines;
pub mod numeric;
pub mod ode;

pub use expr::{parse_expr, Env, Expr, FnRegistry};
pub use numeric::Int;
