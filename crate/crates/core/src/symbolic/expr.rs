use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use super::chart::{Chart, Coord};

/// Supplies numeric values for chart coordinates during evaluation.
pub trait Valuation {
    fn value(&self, c: Coord) -> Option<f64>;
}

/// A dense slice covers every coordinate whose index is in range.
impl Valuation for [f64] {
    fn value(&self, c: Coord) -> Option<f64> {
        self.get(c.0).copied()
    }
}

impl Valuation for Vec<f64> {
    fn value(&self, c: Coord) -> Option<f64> {
        self.as_slice().value(c)
    }
}

/// A partial assignment of values to chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    values: Vec<Option<f64>>,
}

impl Point {
    pub fn empty(chart: &Chart) -> Point {
        Point { values: vec![None; chart.dim()] }
    }

    pub fn set(&mut self, c: Coord, value: f64) -> &mut Self {
        self.values[c.0] = Some(value);
        self
    }

    pub fn with(mut self, c: Coord, value: f64) -> Self {
        self.set(c, value);
        self
    }

    pub fn clear(&mut self, c: Coord) {
        self.values[c.0] = None;
    }

    pub fn get(&self, c: Coord) -> Option<f64> {
        self.values.get(c.0).copied().flatten()
    }
}

impl Valuation for Point {
    fn value(&self, c: Coord) -> Option<f64> {
        self.get(c)
    }
}

/// The operation that left the analytic domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    NonFinite,
}

impl fmt::Display for Singularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Singularity::DivisionByZero => "division by zero",
            Singularity::LogOfNonPositive => "logarithm of a non-positive number",
            Singularity::SqrtOfNegative => "square root of a negative number",
            Singularity::NonFinite => "non-finite intermediate value",
        })
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("no value supplied for coordinate #{}", .0.index())]
    MissingCoordinate(Coord),
    #[error("{kind} in subexpression `{subexpr}`")]
    Singularity { kind: Singularity, subexpr: Expr },
}

impl EvalError {
    /// Same as `Display`, but with coordinate names taken from `chart`.
    pub fn describe(&self, chart: &Chart) -> String {
        match self {
            EvalError::MissingCoordinate(c) => {
                format!("no value supplied for coordinate `{}`", chart.name(*c))
            }
            EvalError::Singularity { kind, subexpr } => {
                format!("{kind} in subexpression `{}`", subexpr.display(chart))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Coord),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Sqrt(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
    Atan(Expr),
    Neg(Expr),
}

/// Immutable symbolic expression over chart coordinates.
///
/// Cloning is cheap (shared tree). Constructors only perform local cleanup:
/// constant folding and the identities `0*e`, `1*e`, `e+0`, `e-0`, `e/1`,
/// `e^0`, `e^1`, `--e`, with constant factors gathered on the left of
/// products and cancelled across quotients.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn finite_const(x: f64) -> Option<Expr> {
    x.is_finite().then(|| Expr::constant(x))
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Expr {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(c: Coord) -> Expr {
        Expr(Arc::new(Node::Var(c)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Structural zero test; a non-trivial expression may still evaluate to 0.
    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == 0.0 => b.clone(),
            (_, Some(y)) if y == 0.0 => a.clone(),
            _ => match &*b.0 {
                Node::Neg(inner) => Expr::sub(a, inner),
                _ => Expr(Arc::new(Node::Add(a.clone(), b.clone()))),
            },
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a.clone(),
            _ => match &*b.0 {
                Node::Neg(inner) => Expr::add(a, inner),
                _ => Expr(Arc::new(Node::Sub(a.clone(), b.clone()))),
            },
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::zero(),
            (Some(x), _) if x == 1.0 => b.clone(),
            (_, Some(y)) if y == 1.0 => a.clone(),
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            // constants gather on the left
            (None, Some(_)) => Expr::mul(b, a),
            (Some(x), None) => match &*b.0 {
                Node::Mul(k, rest) if k.as_const().is_some() => Expr::mul(&Expr::constant(x * k.as_const().unwrap()), rest),
                Node::Neg(inner) => Expr::mul(&Expr::constant(-x), inner),
                _ => Expr(Arc::new(Node::Mul(a.clone(), b.clone()))),
            },
            (None, None) => match (&*a.0, &*b.0) {
                (Node::Neg(i), _) => Expr::neg(&Expr::mul(i, b)),
                (_, Node::Neg(i)) => Expr::neg(&Expr::mul(a, i)),
                _ => Expr(Arc::new(Node::Mul(a.clone(), b.clone()))),
            },
        }
    }

    /// Leading constant factor and the rest: `k * e -> (k, e)`, `-e -> (-1, e)`.
    fn split_factor(&self) -> (f64, Expr) {
        match &*self.0 {
            Node::Mul(k, rest) if k.as_const().is_some() => (k.as_const().unwrap(), rest.clone()),
            Node::Neg(inner) => {
                let (k, rest) = inner.split_factor();
                (-k, rest)
            }
            _ => (1.0, self.clone()),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
            (Some(x), _) if x == 0.0 => Expr::zero(),
            (_, Some(y)) if y == 1.0 => a.clone(),
            (None, Some(y)) if y != 0.0 => Expr::mul(&Expr::constant(1.0 / y), a),
            _ => {
                let (kn, num) = a.split_factor();
                let (kd, den) = b.split_factor();
                if (kn, kd) == (1.0, 1.0) || kd == 0.0 {
                    Expr(Arc::new(Node::Div(a.clone(), b.clone())))
                } else {
                    Expr::mul(&Expr::constant(kn / kd), &Expr(Arc::new(Node::Div(num, den))))
                }
            }
        }
    }

    pub fn pow(a: &Expr, n: i32) -> Expr {
        match (n, a.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => a.clone(),
            (_, Some(x)) if x != 0.0 || n > 0 => Expr::constant(x.powi(n)),
            _ => Expr(Arc::new(Node::Pow(a.clone(), n))),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match &*a.0 {
            Node::Const(x) => Expr::constant(if *x == 0.0 { 0.0 } else { -x }),
            Node::Neg(inner) => inner.clone(),
            _ => Expr(Arc::new(Node::Neg(a.clone()))),
        }
    }

    pub fn sqrt(a: &Expr) -> Expr {
        match a.as_const() {
            Some(x) if x >= 0.0 => Expr::constant(x.sqrt()),
            _ => Expr(Arc::new(Node::Sqrt(a.clone()))),
        }
    }

    pub fn ln(a: &Expr) -> Expr {
        match a.as_const() {
            Some(x) if x > 0.0 => Expr::constant(x.ln()),
            _ => Expr(Arc::new(Node::Ln(a.clone()))),
        }
    }

    pub fn sin(a: &Expr) -> Expr {
        match a.as_const().and_then(|x| finite_const(x.sin())) {
            Some(c) => c,
            None => Expr(Arc::new(Node::Sin(a.clone()))),
        }
    }

    pub fn cos(a: &Expr) -> Expr {
        match a.as_const().and_then(|x| finite_const(x.cos())) {
            Some(c) => c,
            None => Expr(Arc::new(Node::Cos(a.clone()))),
        }
    }

    pub fn atan(a: &Expr) -> Expr {
        match a.as_const().and_then(|x| finite_const(x.atan())) {
            Some(c) => c,
            None => Expr(Arc::new(Node::Atan(a.clone()))),
        }
    }

    pub fn scale(&self, k: f64) -> Expr {
        Expr::mul(&Expr::constant(k), self)
    }

    /// Coordinates referenced anywhere in the tree.
    pub fn coords(&self) -> BTreeSet<Coord> {
        let mut out = BTreeSet::new();
        self.collect_coords(&mut out);
        out
    }

    fn collect_coords(&self, out: &mut BTreeSet<Coord>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Var(c) => {
                out.insert(*c);
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_coords(out);
                b.collect_coords(out);
            }
            Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Atan(a)
            | Node::Neg(a) => a.collect_coords(out),
        }
    }

    pub fn depends_on(&self, c: Coord) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(d) => *d == c,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(c) || b.depends_on(c)
            }
            Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Atan(a)
            | Node::Neg(a) => a.depends_on(c),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Atan(a)
            | Node::Neg(a) => 1 + a.size(),
        }
    }

    /// Exact partial derivative; all chart coordinates are independent.
    pub fn diff(&self, c: Coord) -> Expr {
        if !self.depends_on(c) {
            return Expr::zero();
        }
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(d) => {
                if *d == c {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => Expr::add(&a.diff(c), &b.diff(c)),
            Node::Sub(a, b) => Expr::sub(&a.diff(c), &b.diff(c)),
            Node::Mul(a, b) => Expr::add(
                &Expr::mul(&a.diff(c), b),
                &Expr::mul(a, &b.diff(c)),
            ),
            Node::Div(a, b) => {
                let da = a.diff(c);
                let db = b.diff(c);
                if db.is_zero() {
                    Expr::div(&da, b)
                } else {
                    Expr::div(
                        &Expr::sub(&Expr::mul(&da, b), &Expr::mul(a, &db)),
                        &Expr::pow(b, 2),
                    )
                }
            }
            Node::Pow(a, n) => Expr::mul(
                &Expr::mul(&Expr::constant(*n as f64), &Expr::pow(a, n - 1)),
                &a.diff(c),
            ),
            Node::Sqrt(a) => Expr::div(&a.diff(c), &Expr::mul(&Expr::constant(2.0), self)),
            Node::Ln(a) => Expr::div(&a.diff(c), a),
            Node::Sin(a) => Expr::mul(&Expr::cos(a), &a.diff(c)),
            Node::Cos(a) => Expr::neg(&Expr::mul(&Expr::sin(a), &a.diff(c))),
            Node::Atan(a) => Expr::div(
                &a.diff(c),
                &Expr::add(&Expr::one(), &Expr::pow(a, 2)),
            ),
            Node::Neg(a) => Expr::neg(&a.diff(c)),
        }
    }

    /// Replaces every coordinate for which `f` returns a value.
    pub fn substitute<F>(&self, f: &F) -> Expr
    where
        F: Fn(Coord) -> Option<Expr>,
    {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(c) => f(*c).unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => Expr::add(&a.substitute(f), &b.substitute(f)),
            Node::Sub(a, b) => Expr::sub(&a.substitute(f), &b.substitute(f)),
            Node::Mul(a, b) => Expr::mul(&a.substitute(f), &b.substitute(f)),
            Node::Div(a, b) => Expr::div(&a.substitute(f), &b.substitute(f)),
            Node::Pow(a, n) => Expr::pow(&a.substitute(f), *n),
            Node::Sqrt(a) => Expr::sqrt(&a.substitute(f)),
            Node::Ln(a) => Expr::ln(&a.substitute(f)),
            Node::Sin(a) => Expr::sin(&a.substitute(f)),
            Node::Cos(a) => Expr::cos(&a.substitute(f)),
            Node::Atan(a) => Expr::atan(&a.substitute(f)),
            Node::Neg(a) => Expr::neg(&a.substitute(f)),
        }
    }

    pub fn eval<V: Valuation + ?Sized>(&self, env: &V) -> Result<f64, EvalError> {
        let singular = |kind| EvalError::Singularity { kind, subexpr: self.clone() };
        let value = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(c) => env.value(*c).ok_or(EvalError::MissingCoordinate(*c))?,
            Node::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Node::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Node::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Node::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den == 0.0 {
                    return Err(singular(Singularity::DivisionByZero));
                }
                num / den
            }
            Node::Pow(a, n) => {
                let base = a.eval(env)?;
                if base == 0.0 && *n < 0 {
                    return Err(singular(Singularity::DivisionByZero));
                }
                base.powi(*n)
            }
            Node::Sqrt(a) => {
                let x = a.eval(env)?;
                if x < 0.0 {
                    return Err(singular(Singularity::SqrtOfNegative));
                }
                x.sqrt()
            }
            Node::Ln(a) => {
                let x = a.eval(env)?;
                if x <= 0.0 {
                    return Err(singular(Singularity::LogOfNonPositive));
                }
                x.ln()
            }
            Node::Sin(a) => a.eval(env)?.sin(),
            Node::Cos(a) => a.eval(env)?.cos(),
            Node::Atan(a) => a.eval(env)?.atan(),
            Node::Neg(a) => -a.eval(env)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(singular(Singularity::NonFinite))
        }
    }

    /// Text form using the coordinate names of `chart`; re-parses to an
    /// expression with identical values.
    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, chart: Some(chart) }
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if *c < 0.0 => 3,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Formatter returned by [`Expr::display`].
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: Option<&'a Chart>,
}

impl ExprDisplay<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay { expr: e, chart: self.chart }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let func = |f: &mut fmt::Formatter<'_>, name: &str, a: &Expr| {
            write!(f, "{name}({})", self.child(a))
        };
        match self.expr.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(c) => match self.chart {
                Some(chart) => f.write_str(chart.name(*c)),
                None => write!(f, "#{}", c.index()),
            },
            Node::Add(a, b) => {
                self.write_operand(f, a, 1)?;
                f.write_str(" + ")?;
                self.write_operand(f, b, 2)
            }
            Node::Sub(a, b) => {
                self.write_operand(f, a, 1)?;
                f.write_str(" - ")?;
                self.write_operand(f, b, 2)
            }
            Node::Mul(a, b) => {
                self.write_operand(f, a, 2)?;
                f.write_str(" * ")?;
                self.write_operand(f, b, 3)
            }
            Node::Div(a, b) => {
                self.write_operand(f, a, 2)?;
                f.write_str(" / ")?;
                self.write_operand(f, b, 4)
            }
            Node::Pow(a, n) => {
                self.write_operand(f, a, 5)?;
                write!(f, "^{n}")
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                self.write_operand(f, a, 3)
            }
            Node::Sqrt(a) => func(f, "sqrt", a),
            Node::Ln(a) => func(f, "ln", a),
            Node::Sin(a) => func(f, "sin", a),
            Node::Cos(a) => func(f, "cos", a),
            Node::Atan(a) => func(f, "atan", a),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        ExprDisplay { expr: self, chart: None }.fmt(f)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $ctor:path) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(self, rhs)
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(self, &rhs)
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(self, &Expr::constant(rhs))
            }
        }
    };
}

binary_op!(Add, add, Expr::add);
binary_op!(Sub, sub, Expr::sub);
binary_op!(Mul, mul, Expr::mul);
binary_op!(Div, div, Expr::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Result of comparing a symbolic derivative with a central difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCheck {
    pub analytic: f64,
    pub numeric: f64,
    pub abs_err: f64,
}

/// Compares `diff(e, c)` at `pt` with `(e(pt + h) - e(pt - h)) / 2h`.
///
/// This is the independent oracle for [`Expr::diff`]: it only uses `eval`.
pub fn fd_check(e: &Expr, c: Coord, pt: &Point, h: f64) -> Result<FdCheck, EvalError> {
    let center = pt.get(c).ok_or(EvalError::MissingCoordinate(c))?;
    let analytic = e.diff(c).eval(pt)?;
    let plus = e.eval(&pt.clone().with(c, center + h))?;
    let minus = e.eval(&pt.clone().with(c, center - h))?;
    let numeric = (plus - minus) / (2.0 * h);
    Ok(FdCheck { analytic, numeric, abs_err: (analytic - numeric).abs() })
}
