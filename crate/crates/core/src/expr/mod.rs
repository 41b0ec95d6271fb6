//! Scalar symbolic expressions over chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted tree. All constructors
//! apply constant folding and identity elimination (`x + 0`, `x * 1`,
//! `x * 0`, `--x`), so trees produced by [`Expr::diff`] stay small enough
//! for repeated differentiation. No further canonicalization is attempted:
//! two expressions are compared by evaluating them, not by normal form.
//!
//! Grammar accepted by [`parse_expr`]:
//!
//! ```text
//! sum     := term (('+' | '-') term)*
//! term    := ('-' | '+') term | product
//! product := power (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := primary ('^' exponent)?
//! exponent:= '-' exponent | power          (must fold to a constant)
//! primary := number | ident | func '(' sum ')' | '(' sum ')'
//! ident   := [a-zA-Z][a-zA-Z0-9_]*
//! func    := exp | log | sin | cos | sqrt
//! ```
//!
//! `^` binds tighter than `*` and is right associative; a leading minus
//! applies to the whole product that follows it, so `-b*x5` parses as
//! `neg(mul(b, x5))`.

mod parser;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;

pub use parser::parse_expr;

/// Named parameter values, e.g. `{"b": 1.0, "c": 0.5}`.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Exp => Ok(x.exp()),
            Func::Log if x <= 0.0 => Err(EvalError::Domain(format!("log of non-positive value {x}"))),
            Func::Log => Ok(x.ln()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Sqrt if x < 0.0 => Err(EvalError::Domain(format!("sqrt of negative value {x}"))),
            Func::Sqrt => Ok(x.sqrt()),
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    /// Chart coordinate; `index` is its position in the chart's coordinate list.
    Coord { index: usize, name: String },
    Param(String),
    Neg(Expr),
    Func(Func, Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Power with a constant exponent.
    Pow(Expr, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Expr {
        Expr::wrap(Node::Const(value))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn coord(index: usize, name: impl Into<String>) -> Expr {
        Expr::wrap(Node::Coord { index, name: name.into() })
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::wrap(Node::Param(name.into()))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Expr::wrap(Node::Add(self.clone(), rhs.clone())),
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (_, Some(b)) if b == 0.0 => self.clone(),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            _ => Expr::wrap(Node::Sub(self.clone(), rhs.clone())),
        }
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (Some(a), _) if a == -1.0 => rhs.neg(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            _ => Expr::wrap(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 && !rhs.is_zero() => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Expr::wrap(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn powf(&self, exponent: f64) -> Expr {
        if exponent == 0.0 {
            return Expr::one();
        }
        if exponent == 1.0 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            let v = c.powf(exponent);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        Expr::wrap(Node::Pow(self.clone(), exponent))
    }

    pub fn apply(&self, func: Func) -> Expr {
        if let Some(c) = self.as_const() {
            if let Ok(v) = func.apply(c) {
                if v.is_finite() {
                    return Expr::constant(v);
                }
            }
        }
        Expr::wrap(Node::Func(func, self.clone()))
    }

    pub fn exp(&self) -> Expr {
        self.apply(Func::Exp)
    }

    pub fn log(&self) -> Expr {
        self.apply(Func::Log)
    }

    pub fn sin(&self) -> Expr {
        self.apply(Func::Sin)
    }

    pub fn cos(&self) -> Expr {
        self.apply(Func::Cos)
    }

    pub fn sqrt(&self) -> Expr {
        self.apply(Func::Sqrt)
    }

    pub fn scale(&self, k: f64) -> Expr {
        Expr::constant(k).mul(self)
    }

    /// Exact partial derivative with respect to the coordinate named `coord`.
    pub fn diff(&self, coord: &str) -> Expr {
        self.diff_by(&|_, name| name == coord)
    }

    /// Exact partial derivative with respect to the coordinate at `index`.
    pub fn diff_index(&self, index: usize) -> Expr {
        self.diff_by(&|i, _| i == index)
    }

    fn diff_by(&self, is_var: &dyn Fn(usize, &str) -> bool) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Coord { index, name } => {
                if is_var(*index, name) {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => a.diff_by(is_var).neg(),
            Node::Add(a, b) => a.diff_by(is_var).add(&b.diff_by(is_var)),
            Node::Sub(a, b) => a.diff_by(is_var).sub(&b.diff_by(is_var)),
            Node::Mul(a, b) => {
                let da = a.diff_by(is_var);
                let db = b.diff_by(is_var);
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.diff_by(is_var);
                let db = b.diff_by(is_var);
                if db.is_zero() {
                    return da.div(b);
                }
                da.mul(b).sub(&a.mul(&db)).div(&b.mul(b))
            }
            Node::Pow(a, p) => {
                let da = a.diff_by(is_var);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::constant(*p).mul(&a.powf(p - 1.0)).mul(&da)
            }
            Node::Func(func, a) => {
                let da = a.diff_by(is_var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match func {
                    Func::Exp => self.clone(),
                    Func::Log => return da.div(a),
                    Func::Sin => a.cos(),
                    Func::Cos => a.sin().neg(),
                    Func::Sqrt => return da.div(&self.scale(2.0)),
                };
                outer.mul(&da)
            }
        }
    }

    /// Replaces every parameter found in `params` by its value and refolds.
    pub fn bind_params(&self, params: &Params) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Coord { .. } => self.clone(),
            Node::Param(name) => match params.get(name) {
                Some(v) => Expr::constant(*v),
                None => self.clone(),
            },
            Node::Neg(a) => a.bind_params(params).neg(),
            Node::Add(a, b) => a.bind_params(params).add(&b.bind_params(params)),
            Node::Sub(a, b) => a.bind_params(params).sub(&b.bind_params(params)),
            Node::Mul(a, b) => a.bind_params(params).mul(&b.bind_params(params)),
            Node::Div(a, b) => a.bind_params(params).div(&b.bind_params(params)),
            Node::Pow(a, p) => a.bind_params(params).powf(*p),
            Node::Func(f, a) => a.bind_params(params).apply(*f),
        }
    }

    /// Evaluates with coordinates given positionally.
    pub fn eval_coords(&self, coords: &[f64], params: &Params) -> Result<f64, EvalError> {
        let value = match self.node() {
            Node::Const(c) => *c,
            Node::Coord { index, name } => *coords
                .get(*index)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Node::Param(name) => *params.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Node::Neg(a) => -a.eval_coords(coords, params)?,
            Node::Add(a, b) => a.eval_coords(coords, params)? + b.eval_coords(coords, params)?,
            Node::Sub(a, b) => a.eval_coords(coords, params)? - b.eval_coords(coords, params)?,
            Node::Mul(a, b) => a.eval_coords(coords, params)? * b.eval_coords(coords, params)?,
            Node::Div(a, b) => {
                let den = b.eval_coords(coords, params)?;
                if den == 0.0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                a.eval_coords(coords, params)? / den
            }
            Node::Pow(a, p) => {
                let base = a.eval_coords(coords, params)?;
                if base < 0.0 && p.fract() != 0.0 {
                    return Err(EvalError::Domain(format!("{base} raised to non-integer power {p}")));
                }
                if base == 0.0 && *p < 0.0 {
                    return Err(EvalError::Domain("zero raised to a negative power".into()));
                }
                base.powf(*p)
            }
            Node::Func(f, a) => f.apply(a.eval_coords(coords, params)?)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::Domain(format!("non-finite value in {self}")))
        }
    }

    pub fn eval(&self, point: &Point, params: &Params) -> Result<f64, EvalError> {
        self.eval_coords(point.values(), params)
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Coord { .. } | Node::Param(_) => 1,
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Collects the names of unbound parameters.
    pub fn collect_params(&self, out: &mut std::collections::BTreeSet<String>) {
        match self.node() {
            Node::Const(_) | Node::Coord { .. } => {}
            Node::Param(name) => {
                out.insert(name.clone());
            }
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => a.collect_params(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// True if no coordinate appears in the tree.
    pub fn is_coordinate_free(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => true,
            Node::Coord { .. } => false,
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => a.is_coordinate_free(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_coordinate_free() && b.is_coordinate_free()
            }
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; parsing it back yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Coord { name, .. } | Node::Param(name) => write!(f, "{name}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, p) => {
                write!(f, "({a} ^ ")?;
                write_const(f, *p)?;
                write!(f, ")")
            }
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inner(&self, &rhs)
            }
        }
        impl<'a> std::ops::$trait<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: &'a Expr) -> Expr {
                Expr::$inner(self, rhs)
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$inner(&self, &Expr::constant(rhs))
            }
        }
    };
}

impl_binop!(Add, add, add);
impl_binop!(Sub, sub, sub);
impl_binop!(Mul, mul, mul);
impl_binop!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::constant(v)
    }
}

/// Free-function form of [`Expr::diff`].
pub fn diff_expr(e: &Expr, coord: &str) -> Expr {
    e.diff(coord)
}

/// Free-function form of [`Expr::eval`].
pub fn eval_expr(e: &Expr, p: &Point, params: &Params) -> Result<f64, EvalError> {
    e.eval(p, params)
}

/// A point of a chart: one value per coordinate, in chart order.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    names: Arc<[String]>,
    values: Vec<f64>,
}

impl Point {
    pub fn new(names: Arc<[String]>, values: Vec<f64>) -> Result<Point, EvalError> {
        if names.len() != values.len() {
            let missing = names.get(values.len()).cloned().unwrap_or_else(|| "<extra value>".into());
            return Err(EvalError::Unbound(missing));
        }
        Ok(Point { names, values })
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Point {
        Point {
            names: pairs.iter().map(|(n, _)| n.to_string()).collect(),
            values: pairs.iter().map(|(_, v)| *v).collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Copy with coordinate `index` shifted by `h`.
    pub fn shifted(&self, index: usize, h: f64) -> Point {
        let mut values = self.values.clone();
        values[index] += h;
        Point { names: self.names.clone(), values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords() -> Vec<String> {
        (1..=5).map(|i| format!("x{i}")).collect()
    }

    fn p(text: &str) -> Expr {
        parse_expr(text, &coords(), &["b".to_string(), "c".to_string()]).unwrap()
    }

    #[test]
    fn folding_identities() {
        let x = Expr::coord(0, "x1");
        assert_eq!(x.add(&Expr::zero()), x);
        assert_eq!(x.mul(&Expr::one()), x);
        assert!(x.mul(&Expr::zero()).is_zero());
        assert_eq!(x.neg().neg(), x);
        assert_eq!(Expr::constant(2.0).mul(&Expr::constant(3.0)).as_const(), Some(6.0));
    }

    #[test]
    fn derivative_of_model_metric_component() {
        let g = p("exp(2*b*x5)");
        let d5 = g.diff("x5");
        let d1 = g.diff("x1");
        assert!(d1.is_zero());
        let params = Params::from([("b".to_string(), 1.0)]);
        let at = Point::from_pairs(&[("x1", 0.0), ("x2", 0.0), ("x3", 0.0), ("x4", 0.0), ("x5", 0.5)]);
        let expected = p("2*b*exp(2*b*x5)").eval(&at, &params).unwrap();
        assert!((d5.eval(&at, &params).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 2.0 * 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn log_derivative_of_exponential_warping_is_constant() {
        let t = vec!["t".to_string()];
        let sigma = parse_expr("exp(b*t)", &t, &["b".to_string()]).unwrap();
        let ratio = sigma.diff("t").div(&sigma);
        let params = Params::from([("b".to_string(), 0.7)]);
        for tv in [-0.4, 0.0, 0.3] {
            let v = ratio.eval_coords(&[tv], &params).unwrap();
            assert!((v - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn eval_domain_and_unbound_errors() {
        let e = p("log(x1)");
        let params = Params::new();
        let at = Point::from_pairs(&[("x1", -1.0), ("x2", 0.0), ("x3", 0.0), ("x4", 0.0), ("x5", 0.0)]);
        assert!(matches!(e.eval(&at, &params), Err(EvalError::Domain(_))));
        assert!(matches!(p("sqrt(x1)").eval(&at, &params), Err(EvalError::Domain(_))));
        assert!(matches!(p("b*x2").eval(&at, &params), Err(EvalError::Unbound(_))));
    }

    #[test]
    fn model_component_is_one_at_origin() {
        let params = Params::from([("b".to_string(), 1.0)]);
        let v = p("exp(2*b*x5)").eval_coords(&[0.0; 5], &params).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn bind_params_folds_constants() {
        let e = p("sqrt(1+c)*x1");
        let bound = e.bind_params(&Params::from([("c".to_string(), 3.0)]));
        match bound.node() {
            Node::Mul(a, _) => assert_eq!(a.as_const(), Some(2.0)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
