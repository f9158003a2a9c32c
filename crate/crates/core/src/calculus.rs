//! Discrete calculus over the integers.
//!
//! `delta` is the forward difference `f(x+1) - f(x)`, `dint` the signed
//! discrete integral, `falling_power` and `falling_exp` the discrete
//! analogues of powers and exponentials. [`check_identity`] evaluates both
//! sides of a named calculus identity over a finite box and reports the
//! first counterexample, if any.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{Env, EvalError, Expr, FnRegistry};
use crate::numeric::Int;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("point {0:?} is outside the function's domain window")]
    OutsideDomain(Vec<Int>),
    #[error("function takes {expected} argument(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("bad arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, CalculusError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Table,
    Expression,
}

type Body = dyn Fn(&[Int]) -> Result<Int> + Send + Sync;

/// A total function on a declared window, `Z^arity -> Z`.
#[derive(Clone)]
pub struct IntFn {
    arity: usize,
    provenance: Provenance,
    body: Arc<Body>,
}

impl fmt::Debug for IntFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntFn")
            .field("arity", &self.arity)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl IntFn {
    pub fn closed<F>(arity: usize, body: F) -> IntFn
    where
        F: Fn(&[Int]) -> Int + Send + Sync + 'static,
    {
        IntFn { arity, provenance: Provenance::ClosedForm, body: Arc::new(move |a| Ok(body(a))) }
    }

    /// Unary closed form, for the common case.
    pub fn unary<F>(body: F) -> IntFn
    where
        F: Fn(&Int) -> Int + Send + Sync + 'static,
    {
        IntFn::closed(1, move |a| body(&a[0]))
    }

    /// Unary table over the window `start .. start + values.len()`.
    pub fn table(start: i64, values: Vec<Int>) -> IntFn {
        let values = Arc::new(values);
        IntFn {
            arity: 1,
            provenance: Provenance::Table,
            body: Arc::new(move |a| {
                let idx = (&a[0] - start).to_usize().filter(|&i| i < values.len());
                idx.map(|i| values[i].clone())
                    .ok_or_else(|| CalculusError::OutsideDomain(a.to_vec()))
            }),
        }
    }

    /// Binary table over `rows x cols` starting at `(row_start, col_start)`.
    pub fn table2(row_start: i64, col_start: i64, values: Vec<Vec<Int>>) -> IntFn {
        let values = Arc::new(values);
        IntFn {
            arity: 2,
            provenance: Provenance::Table,
            body: Arc::new(move |a| {
                let r = (&a[0] - row_start).to_usize().filter(|&i| i < values.len());
                let c = (&a[1] - col_start).to_usize();
                r.zip(c)
                    .and_then(|(r, c)| values[r].get(c).cloned())
                    .ok_or_else(|| CalculusError::OutsideDomain(a.to_vec()))
            }),
        }
    }

    /// An expression in the variables `vars`, in order.
    pub fn from_expr(expr: Expr, vars: Vec<String>, functions: FnRegistry) -> IntFn {
        let arity = vars.len();
        IntFn {
            arity,
            provenance: Provenance::Expression,
            body: Arc::new(move |a| {
                let mut env = Env::new(functions.clone());
                for (v, x) in vars.iter().zip(a) {
                    env.bind(v.clone(), x.clone());
                }
                Ok(env.eval(&expr)?)
            }),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&self, args: &[Int]) -> Result<Int> {
        if args.len() != self.arity {
            return Err(CalculusError::Arity { expected: self.arity, got: args.len() });
        }
        (self.body)(args)
    }

    pub fn at(&self, x: &Int) -> Result<Int> {
        self.eval(std::slice::from_ref(x))
    }

    pub fn at_i(&self, x: i64) -> Result<Int> {
        self.at(&Int::from(x))
    }

    fn derived<F>(&self, body: F) -> IntFn
    where
        F: Fn(&[Int]) -> Result<Int> + Send + Sync + 'static,
    {
        IntFn { arity: self.arity, provenance: self.provenance, body: Arc::new(body) }
    }
}

/// Forward difference in the first argument.
pub fn delta(f: &IntFn) -> IntFn {
    delta_in(f, 0)
}

/// Forward difference in argument `slot`, other arguments held fixed.
pub fn delta_in(f: &IntFn, slot: usize) -> IntFn {
    assert!(slot < f.arity, "slot {slot} out of range for arity {}", f.arity);
    let inner = f.clone();
    f.derived(move |a| {
        let mut next = a.to_vec();
        next[slot] += 1;
        Ok(inner.eval(&next)? - inner.eval(a)?)
    })
}

/// Signed discrete integral of a closure over `[a, b)`.
///
/// `sum_{x=a}^{b-1} f(x)` when `a < b`, `0` when `a == b` and
/// `-dint(f, b, a)` when `a > b`.
pub fn dint_by<F>(f: F, a: &Int, b: &Int) -> Result<Int>
where
    F: Fn(&Int) -> Result<Int>,
{
    if a > b {
        return Ok(-dint_by(f, b, a)?);
    }
    let mut acc = Int::zero();
    let mut x = a.clone();
    while &x < b {
        acc += f(&x)?;
        x += 1;
    }
    Ok(acc)
}

pub fn dint(f: &IntFn, a: &Int, b: &Int) -> Result<Int> {
    dint_by(|x| f.at(x), a, b)
}

/// The primitive `F(x) = c + dint(f, 0, x)`, so that `delta(F) = f`.
pub fn primitive(f: &IntFn, c: Int) -> IntFn {
    let inner = f.clone();
    IntFn {
        arity: 1,
        provenance: f.provenance,
        body: Arc::new(move |a| Ok(&c + dint(&inner, &Int::zero(), &a[0])?)),
    }
}

/// `x (x-1) ... (x-m+1)`; `1` for `m = 0`.
pub fn falling_power(x: &Int, m: u32) -> Int {
    (0..m).fold(Int::one(), |acc, k| acc * (x - k))
}

/// `prod_{t=0}^{x-1} (1 + delta(U)(t))`; `1` for `x = 0`.
pub fn falling_exp(u: &IntFn, x: u64) -> Result<Int> {
    let du = delta(u);
    let mut acc = Int::one();
    for t in 0..x {
        acc *= Int::one() + du.at(&Int::from(t))?;
    }
    Ok(acc)
}

/// Matrix falling exponential `(I + dU(x-1)) ... (I + dU(0))` where
/// `delta_u(t)` yields the square matrix `dU(t)`.
pub fn falling_exp_matrix<F, E>(n: usize, delta_u: F, x: u64) -> std::result::Result<Matrix, E>
where
    F: Fn(u64) -> std::result::Result<Matrix, E>,
{
    let mut acc = Matrix::identity(n);
    for t in 0..x {
        let step = Matrix::identity(n).add(&delta_u(t)?);
        acc = step.mul(&acc);
    }
    Ok(acc)
}

/// Dense integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.get(i, k) * &v[k]).sum())
            .collect()
    }
}

/// The identities [`check_identity`] knows how to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `(fg)' = f' g(x+1) + f g'` and `(fg)' = f(x+1) g' + f' g`.
    ProductRule,
    /// `dint(F', a, b) = F(b) - F(a)`.
    FundamentalTheorem,
    /// `dint(u v', a, b) = [u v]_a^b - dint(u' v(x+1), a, b)`.
    IntegrationByParts,
    /// `f(g(x))' = dint(f'(g(x) + k), k = 0 .. g'(x))`.
    CompositionDerivative,
    /// `(x^(m falling))' = m x^(m-1 falling)`.
    FallingPowerDerivative,
    /// `(U falling-exp x)' = U'(x) (U falling-exp x)`.
    FallingExpDerivative,
    /// Derivative of `F(x) = dint(f(x, t), t = a(x) .. b(x))`.
    ParamIntegralDerivative,
    /// Left derivative is minus the right derivative one step back.
    LeftRightDerivative,
    /// `delta(primitive(f)) = f`.
    PrimitiveDerivative,
}

impl Identity {
    pub const ALL: [Identity; 9] = [
        Identity::ProductRule,
        Identity::FundamentalTheorem,
        Identity::IntegrationByParts,
        Identity::CompositionDerivative,
        Identity::FallingPowerDerivative,
        Identity::FallingExpDerivative,
        Identity::ParamIntegralDerivative,
        Identity::LeftRightDerivative,
        Identity::PrimitiveDerivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::ProductRule => "product_rule",
            Identity::FundamentalTheorem => "fundamental_theorem",
            Identity::IntegrationByParts => "integration_by_parts",
            Identity::CompositionDerivative => "composition_derivative",
            Identity::FallingPowerDerivative => "falling_power_derivative",
            Identity::FallingExpDerivative => "falling_exp_derivative",
            Identity::ParamIntegralDerivative => "param_integral_derivative",
            Identity::LeftRightDerivative => "left_right_derivative",
            Identity::PrimitiveDerivative => "primitive_derivative",
        }
    }

    /// Number of function arguments and window dimensions expected.
    pub fn signature(self) -> (usize, usize) {
        match self {
            Identity::ProductRule | Identity::CompositionDerivative => (2, 1),
            Identity::FundamentalTheorem => (1, 2),
            Identity::IntegrationByParts => (2, 2),
            Identity::FallingPowerDerivative => (0, 2),
            Identity::FallingExpDerivative
            | Identity::LeftRightDerivative
            | Identity::PrimitiveDerivative => (1, 1),
            Identity::ParamIntegralDerivative => (3, 1),
        }
    }
}

impl FromStr for Identity {
    type Err = CalculusError;

    fn from_str(s: &str) -> Result<Identity> {
        Identity::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| CalculusError::UnknownIdentity(s.to_string()))
    }
}

/// A finite integer box, one inclusive range per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub ranges: Vec<RangeInclusive<i64>>,
}

impl Window {
    pub fn new(ranges: Vec<RangeInclusive<i64>>) -> Window {
        Window { ranges }
    }

    pub fn line(range: RangeInclusive<i64>) -> Window {
        Window { ranges: vec![range] }
    }

    pub fn square(range: RangeInclusive<i64>) -> Window {
        Window { ranges: vec![range.clone(), range] }
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let total: usize = self.ranges.iter().map(|r| r.clone().count()).product();
        (0..total).map(move |mut idx| {
            let mut point = vec![0; self.ranges.len()];
            for (d, r) in self.ranges.iter().enumerate().rev() {
                let len = r.clone().count();
                point[d] = r.start() + (idx % len) as i64;
                idx /= len;
            }
            point
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub point: Vec<Int>,
    pub lhs: Int,
    pub rhs: Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub identity: Identity,
    pub points_checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl Report {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluate both sides of the named identity at every point of `window`.
pub fn check_identity(name: &str, fns: &[IntFn], window: &Window) -> Result<Report> {
    let identity: Identity = name.parse()?;
    let (nfns, ndims) = identity.signature();
    if fns.len() != nfns || window.ranges.len() != ndims {
        return Err(CalculusError::BadArguments(format!(
            "{} takes {nfns} function(s) and a {ndims}-dimensional window, got {} and {}",
            identity.name(),
            fns.len(),
            window.ranges.len()
        )));
    }
    let mut points_checked = 0;
    for point in window.points() {
        let point: Vec<Int> = point.into_iter().map(Int::from).collect();
        let (lhs, rhs) = sides(identity, fns, &point)?;
        points_checked += 1;
        if lhs != rhs {
            return Ok(Report {
                identity,
                points_checked,
                counterexample: Some(Counterexample { point, lhs, rhs }),
            });
        }
    }
    Ok(Report { identity, points_checked, counterexample: None })
}

fn sides(identity: Identity, fns: &[IntFn], p: &[Int]) -> Result<(Int, Int)> {
    let one = Int::one();
    match identity {
        Identity::ProductRule => {
            let (f, g) = (&fns[0], &fns[1]);
            let x = &p[0];
            let x1 = x + &one;
            let (fx, fx1, gx, gx1) = (f.at(x)?, f.at(&x1)?, g.at(x)?, g.at(&x1)?);
            let lhs = &fx1 * &gx1 - &fx * &gx;
            let df = &fx1 - &fx;
            let dg = &gx1 - &gx;
            let first = &df * &gx1 + &fx * &dg;
            let second = &fx1 * &dg + &df * &gx;
            // a disagreement between the two right-hand forms is reported
            // against the first
            if first != second {
                return Ok((lhs, second));
            }
            Ok((lhs, first))
        }
        Identity::FundamentalTheorem => {
            let big_f = &fns[0];
            let df = delta(big_f);
            let (a, b) = (&p[0], &p[1]);
            Ok((dint(&df, a, b)?, big_f.at(b)? - big_f.at(a)?))
        }
        Identity::IntegrationByParts => {
            let (u, v) = (&fns[0], &fns[1]);
            let (du, dv) = (delta(u), delta(v));
            let (a, b) = (&p[0], &p[1]);
            let lhs = dint_by(|x| Ok(u.at(x)? * dv.at(x)?), a, b)?;
            let bracket = u.at(b)? * v.at(b)? - u.at(a)? * v.at(a)?;
            let rest = dint_by(|x| Ok(du.at(x)? * v.at(&(x + 1))?), a, b)?;
            Ok((lhs, bracket - rest))
        }
        Identity::CompositionDerivative => {
            let (f, g) = (&fns[0], &fns[1]);
            let df = delta(f);
            let x = &p[0];
            let gx = g.at(x)?;
            let gx1 = g.at(&(x + 1))?;
            let lhs = f.at(&gx1)? - f.at(&gx)?;
            let rhs = dint_by(|k| df.at(&(&gx + k)), &Int::zero(), &(&gx1 - &gx))?;
            Ok((lhs, rhs))
        }
        Identity::FallingPowerDerivative => {
            let x = &p[0];
            let m = p[1]
                .to_u32()
                .filter(|&m| m >= 1)
                .ok_or_else(|| CalculusError::BadArguments("falling power exponent must be >= 1".into()))?;
            let lhs = falling_power(&(x + 1), m) - falling_power(x, m);
            Ok((lhs, Int::from(m) * falling_power(x, m - 1)))
        }
        Identity::FallingExpDerivative => {
            let u = &fns[0];
            let x = p[0]
                .to_u64()
                .ok_or_else(|| CalculusError::BadArguments("falling exponential needs x >= 0".into()))?;
            let lhs = falling_exp(u, x + 1)? - falling_exp(u, x)?;
            let rhs = delta(u).at(&p[0])? * falling_exp(u, x)?;
            Ok((lhs, rhs))
        }
        Identity::ParamIntegralDerivative => {
            let (a, b, f) = (&fns[0], &fns[1], &fns[2]);
            let x = &p[0];
            let x1 = x + &one;
            let big_f = |x: &Int| dint_by(|t| f.eval(&[x.clone(), t.clone()]), &a.at(x)?, &b.at(x)?);
            let lhs = big_f(&x1)? - big_f(x)?;
            let (ax, ax1, bx, bx1) = (a.at(x)?, a.at(&x1)?, b.at(x)?, b.at(&x1)?);
            let partial = dint_by(
                |t| Ok(f.eval(&[x1.clone(), t.clone()])? - f.eval(&[x.clone(), t.clone()])?),
                &ax,
                &bx,
            )?;
            let lower = dint_by(|t| f.eval(&[x1.clone(), &ax1 + t]), &Int::zero(), &(&ax - &ax1))?;
            let upper = dint_by(|t| f.eval(&[x1.clone(), &bx + t]), &Int::zero(), &(&bx1 - &bx))?;
            Ok((lhs, partial + lower + upper))
        }
        Identity::LeftRightDerivative => {
            let f = &fns[0];
            let x = &p[0];
            let left = f.at(&(x - 1))? - f.at(x)?;
            let right_back = f.at(x)? - f.at(&(x - 1))?;
            Ok((left, -right_back))
        }
        Identity::PrimitiveDerivative => {
            let f = &fns[0];
            let big_f = primitive(f, Int::from(7));
            Ok((delta(&big_f).at(&p[0])?, f.at(&p[0])?))
        }
    }
}

/// `true` when `x` is a natural number (used by callers validating windows).
pub fn is_natural(x: &Int) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(v: i64) -> Int {
        Int::from(v)
    }

    #[test]
    fn delta_examples() {
        let sq = IntFn::unary(|x| x * x);
        assert_eq!(delta(&sq).at_i(3).unwrap(), i(7));
        let pow2 = IntFn::unary(|x| Int::one() << x.to_u32().unwrap());
        let d = delta(&pow2);
        for x in 0..=10 {
            assert_eq!(d.at_i(x).unwrap(), pow2.at_i(x).unwrap());
        }
        let c = IntFn::unary(|_| i(42));
        assert!((-5..5).all(|x| delta(&c).at_i(x).unwrap().is_zero()));
    }

    #[test]
    fn dint_conventions() {
        let id = IntFn::unary(|x| x.clone());
        assert_eq!(dint(&id, &i(0), &i(4)).unwrap(), i(6));
        assert_eq!(dint(&id, &i(17), &i(17)).unwrap(), i(0));
        assert_eq!(dint(&id, &i(4), &i(0)).unwrap(), i(-6));
    }

    #[test]
    fn falling_power_examples() {
        assert_eq!(falling_power(&i(5), 3), i(60));
        assert_eq!(falling_power(&i(-9), 0), i(1));
        assert_eq!(falling_power(&i(2), 4), i(0));
    }

    #[test]
    fn falling_exp_examples() {
        let id = IntFn::unary(|x| x.clone());
        assert_eq!(falling_exp(&id, 5).unwrap(), i(32));
        assert_eq!(falling_exp(&IntFn::unary(|x| x * x * x), 0).unwrap(), i(1));
        assert_eq!(falling_exp(&IntFn::unary(|x| x * 2), 3).unwrap(), i(27));
    }

    #[test]
    fn falling_exp_matrix_orders_factors() {
        // dU(t) = [[0,1],[0,0]] * t; the product is order sensitive only
        // through t, check against explicit multiplication.
        let du = |t: u64| -> std::result::Result<Matrix, ()> {
            Ok(Matrix::from_rows(vec![vec![i(0), i(t as i64)], vec![i(t as i64), i(0)]]))
        };
        let got = falling_exp_matrix(2, du, 3).unwrap();
        let step = |t: i64| Matrix::from_rows(vec![vec![i(1), i(t)], vec![i(t), i(1)]]);
        let expected = step(2).mul(&step(1)).mul(&step(0));
        assert_eq!(got, expected);
        assert_eq!(falling_exp_matrix(2, du, 0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn identity_examples() {
        let cube = IntFn::unary(|x| x * x * x);
        let r = check_identity("fundamental_theorem", &[cube], &Window::square(-10..=10)).unwrap();
        assert!(r.holds());
        assert_eq!(r.points_checked, 441);

        let f = IntFn::unary(|x| x.clone());
        let g = IntFn::unary(|x| x * x);
        assert!(check_identity("product_rule", &[f, g], &Window::line(-10..=10)).unwrap().holds());

        let a = IntFn::unary(|x| x.clone());
        let b = IntFn::unary(|x| x * 2);
        let f = IntFn::closed(2, |v| &v[0] + &v[1]);
        let r = check_identity("param_integral_derivative", &[a, b, f], &Window::line(0..=10)).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn identity_detects_wrong_rule() {
        // a deliberately broken "product rule" (f' g + f g') fails on x*x^2
        let f = IntFn::unary(|x| x.clone());
        let g = IntFn::unary(|x| x * x);
        let naive = |x: i64| {
            let (x0, x1) = (i(x), i(x + 1));
            let df = f.at(&x1).unwrap() - f.at(&x0).unwrap();
            let dg = g.at(&x1).unwrap() - g.at(&x0).unwrap();
            df * g.at(&x0).unwrap() + f.at(&x0).unwrap() * dg
        };
        let fg = IntFn::unary(|x| x * x * x);
        assert_ne!(delta(&fg).at_i(3).unwrap(), naive(3));
    }

    #[test]
    fn identity_errors() {
        assert_eq!(
            check_identity("chain_rule", &[], &Window::line(0..=1)).unwrap_err(),
            CalculusError::UnknownIdentity("chain_rule".into())
        );
        assert!(matches!(
            check_identity("product_rule", &[], &Window::line(0..=1)),
            Err(CalculusError::BadArguments(_))
        ));
        let t = IntFn::table(0, vec![i(1), i(2)]);
        assert!(matches!(
            check_identity("left_right_derivative", &[t], &Window::line(0..=3)),
            Err(CalculusError::OutsideDomain(_))
        ));
    }

    #[test]
    fn tables_respect_their_window() {
        let t = IntFn::table(-2, vec![i(5), i(6), i(7)]);
        assert_eq!(t.at_i(-2).unwrap(), i(5));
        assert_eq!(t.at_i(0).unwrap(), i(7));
        assert!(t.at_i(1).is_err());
        assert!(t.at_i(-3).is_err());
        let t2 = IntFn::table2(0, 1, vec![vec![i(1), i(2)], vec![i(3), i(4)]]);
        assert_eq!(t2.eval(&[i(1), i(2)]).unwrap(), i(4));
        assert!(t2.eval(&[i(1), i(0)]).is_err());
    }

    #[test]
    fn window_points_cover_the_box() {
        let w = Window::new(vec![0..=1, 5..=7]);
        let pts: Vec<_> = w.points().collect();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0, 5]);
        assert_eq!(pts[5], vec![1, 7]);
    }

    proptest::proptest! {
        #[test]
        fn falling_power_derivative_law(x in -1000i64..1000, m in 1u32..=8) {
            let lhs = falling_power(&i(x + 1), m) - falling_power(&i(x), m);
            proptest::prop_assert_eq!(lhs, Int::from(m) * falling_power(&i(x), m - 1));
        }

        #[test]
        fn falling_exp_derivative_on_tables(values in proptest::collection::vec(-50i64..50, 12), x in 0u64..10) {
            let u = IntFn::table(0, values.into_iter().map(Int::from).collect());
            let lhs = falling_exp(&u, x + 1).unwrap() - falling_exp(&u, x).unwrap();
            let rhs = delta(&u).at(&Int::from(x)).unwrap() * falling_exp(&u, x).unwrap();
            proptest::prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn primitive_inverts_delta(values in proptest::collection::vec(-1000i64..1000, 20), x in 0i64..19) {
            let f = IntFn::table(0, values.into_iter().map(Int::from).collect());
            let big_f = primitive(&f, i(3));
            proptest::prop_assert_eq!(delta(&big_f).at_i(x).unwrap(), f.at_i(x).unwrap());
        }
    }
}
