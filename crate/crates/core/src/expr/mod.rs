//! A small closed-form expression language for scalar, vector and matrix
//! valued smooth functions of `k` real inputs `x0 .. x(k-1)`.
//!
//! Expressions are parsed once into an immutable [`ExprFn`] that evaluates
//! numerically and differentiates symbolically. The grammar is documented in
//! `docs/dsl.md` at the repository root.

mod diff;
mod eval;
mod parse;
mod print;
mod shape;
pub mod smooth;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use shape::Shape;

/// Scalar builtins applied with call syntax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    /// `beta` (order 0) and its derivatives `dbeta1`, `dbeta2`, ...
    Beta(u8),
}

impl Func {
    pub fn name(self) -> String {
        match self {
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Tan => "tan".into(),
            Func::Exp => "exp".into(),
            Func::Log => "log".into(),
            Func::Sqrt => "sqrt".into(),
            Func::Beta(0) => "beta".into(),
            Func::Beta(k) => format!("dbeta{k}"),
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "beta" => Func::Beta(0),
            _ => {
                let k: u8 = name.strip_prefix("dbeta")?.parse().ok()?;
                if k == 0 {
                    return None;
                }
                Func::Beta(k)
            }
        })
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Vector(Vec<Expr>),
    Matrix(Vec<Vec<Expr>>),
    Expm(Box<Expr>),
    Inv(Box<Expr>),
    Transpose(Box<Expr>),
    Det(Box<Expr>),
    Trace(Box<Expr>),
    Zeros(usize, usize),
    /// `blk(A, B, C, D)` = `[[A, B], [C, D]]` as a block matrix.
    Block(Box<[Expr; 4]>),
    Slice {
        of: Box<Expr>,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    /// Entry of a matrix, or of a vector when `col` is `None`.
    Elem {
        of: Box<Expr>,
        row: usize,
        col: Option<usize>,
    },
}

/// Numeric value of an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
}

impl Value {
    pub fn shape(&self) -> Shape {
        match self {
            Value::Scalar(_) => Shape::Scalar,
            Value::Vector(v) => Shape::Vector(v.len()),
            Value::Matrix(m) => Shape::Matrix(m.nrows(), m.ncols()),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            _ => None,
        }
    }
}

/// A parsed, shape-checked function `R^arity -> shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprFn {
    arity: usize,
    shape: Shape,
    root: Expr,
}

impl ExprFn {
    /// Parse `src` and check that it has the declared shape.
    pub fn parse(src: &str, arity: usize, shape: Shape) -> Result<ExprFn> {
        let f = ExprFn::parse_any(src, arity)?;
        if f.shape != shape {
            return Err(Error::Shape {
                offset: Some(0),
                message: format!("expression has shape {} but {} was declared", f.shape, shape),
            });
        }
        Ok(f)
    }

    /// Parse `src`, inferring its shape.
    pub fn parse_any(src: &str, arity: usize) -> Result<ExprFn> {
        ExprFn::parse_with(src, arity, &BTreeMap::new())
    }

    /// Like [`ExprFn::parse_any`], with named scalar constants. Constants are
    /// folded into numbers, so printing shows their values.
    pub fn parse_with(src: &str, arity: usize, constants: &BTreeMap<String, f64>) -> Result<ExprFn> {
        let (root, shape) = parse::parse(src, arity, constants)?;
        Ok(ExprFn { arity, shape, root })
    }

    /// Wrap an already-built tree, checking arity and shapes.
    pub fn from_expr(root: Expr, arity: usize) -> Result<ExprFn> {
        let shape = shape::infer(&root, arity)?;
        Ok(ExprFn { arity, shape, root })
    }

    pub fn constant_scalar(value: f64, arity: usize) -> ExprFn {
        ExprFn { arity, shape: Shape::Scalar, root: Expr::Num(value) }
    }

    pub fn constant_vector(values: &[f64], arity: usize) -> ExprFn {
        ExprFn {
            arity,
            shape: Shape::Vector(values.len()),
            root: Expr::Vector(values.iter().map(|&v| Expr::Num(v)).collect()),
        }
    }

    pub fn constant_matrix(m: &DMatrix<f64>, arity: usize) -> ExprFn {
        let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Expr::Num(m[(i, j)])).collect()).collect();
        ExprFn { arity, shape: Shape::Matrix(m.nrows(), m.ncols()), root: Expr::Matrix(rows) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn expr(&self) -> &Expr {
        &self.root
    }

    pub fn into_expr(self) -> Expr {
        self.root
    }

    pub fn eval(&self, point: &[f64]) -> Result<Value> {
        if point.len() != self.arity {
            return Err(Error::Domain(format!("expected {} inputs, got {}", self.arity, point.len())));
        }
        eval::eval(&self.root, point)
    }

    pub fn eval_scalar(&self, point: &[f64]) -> Result<f64> {
        match self.eval(point)? {
            Value::Scalar(x) => Ok(x),
            v => Err(Error::shape(format!("expected a scalar, got {}", v.shape()))),
        }
    }

    pub fn eval_vector(&self, point: &[f64]) -> Result<DVector<f64>> {
        match self.eval(point)? {
            Value::Vector(v) => Ok(v),
            Value::Scalar(x) => Ok(DVector::from_element(1, x)),
            v => Err(Error::shape(format!("expected a vector, got {}", v.shape()))),
        }
    }

    pub fn eval_matrix(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        match self.eval(point)? {
            Value::Matrix(m) => Ok(m),
            Value::Scalar(x) => Ok(DMatrix::from_element(1, 1, x)),
            v => Err(Error::shape(format!("expected a matrix, got {}", v.shape()))),
        }
    }

    /// Exact partial derivative with respect to input `index`.
    pub fn diff(&self, index: usize) -> Result<ExprFn> {
        if index >= self.arity {
            return Err(Error::Arity { name: format!("x{index}"), arity: self.arity });
        }
        let root = diff::derivative(&self.root, index, self.arity)?;
        Ok(ExprFn { arity: self.arity, shape: self.shape, root })
    }

    /// Substitute input `j` by `inputs[j]`; the result takes `new_arity` inputs.
    pub fn compose(&self, inputs: &[Expr], new_arity: usize) -> Result<ExprFn> {
        if inputs.len() != self.arity {
            return Err(Error::shape(format!(
                "composition needs {} inner expressions, got {}",
                self.arity,
                inputs.len()
            )));
        }
        let root = substitute(&self.root, inputs);
        ExprFn::from_expr(root, new_arity)
    }

    /// Component expressions of a vector-valued function.
    pub fn components(&self) -> Result<Vec<Expr>> {
        match (&self.root, self.shape) {
            (Expr::Vector(items), _) => Ok(items.clone()),
            (_, Shape::Vector(n)) => {
                Ok((0..n).map(|i| Expr::Elem { of: Box::new(self.root.clone()), row: i, col: None }).collect())
            }
            (_, Shape::Scalar) => Ok(vec![self.root.clone()]),
            (_, s) => Err(Error::shape(format!("components of a {s} value"))),
        }
    }

    /// Whether the value depends on input `index`.
    pub fn depends_on(&self, index: usize) -> bool {
        depends_on(&self.root, index)
    }
}

impl fmt::Display for ExprFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

pub(crate) fn depends_on(e: &Expr, index: usize) -> bool {
    let mut found = false;
    visit(e, &mut |n| {
        if let Expr::Var(j) = n {
            if *j == index {
                found = true;
            }
        }
    });
    found
}

fn visit(e: &Expr, f: &mut impl FnMut(&Expr)) {
    f(e);
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Zeros(..) => {}
        Expr::Neg(a)
        | Expr::Call(_, a)
        | Expr::Expm(a)
        | Expr::Inv(a)
        | Expr::Transpose(a)
        | Expr::Det(a)
        | Expr::Trace(a)
        | Expr::Slice { of: a, .. }
        | Expr::Elem { of: a, .. } => visit(a, f),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            visit(a, f);
            visit(b, f);
        }
        Expr::Vector(items) => items.iter().for_each(|x| visit(x, f)),
        Expr::Matrix(rows) => rows.iter().flatten().for_each(|x| visit(x, f)),
        Expr::Block(parts) => parts.iter().for_each(|x| visit(x, f)),
    }
}

pub(crate) fn substitute(e: &Expr, inputs: &[Expr]) -> Expr {
    let s = |a: &Expr| Box::new(substitute(a, inputs));
    match e {
        Expr::Num(x) => Expr::Num(*x),
        Expr::Var(j) => inputs[*j].clone(),
        Expr::Neg(a) => Expr::Neg(s(a)),
        Expr::Add(a, b) => Expr::Add(s(a), s(b)),
        Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
        Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
        Expr::Div(a, b) => Expr::Div(s(a), s(b)),
        Expr::Pow(a, b) => Expr::Pow(s(a), s(b)),
        Expr::Call(func, a) => Expr::Call(*func, s(a)),
        Expr::Vector(items) => Expr::Vector(items.iter().map(|x| substitute(x, inputs)).collect()),
        Expr::Matrix(rows) => {
            Expr::Matrix(rows.iter().map(|r| r.iter().map(|x| substitute(x, inputs)).collect()).collect())
        }
        Expr::Expm(a) => Expr::Expm(s(a)),
        Expr::Inv(a) => Expr::Inv(s(a)),
        Expr::Transpose(a) => Expr::Transpose(s(a)),
        Expr::Det(a) => Expr::Det(s(a)),
        Expr::Trace(a) => Expr::Trace(s(a)),
        Expr::Zeros(r, c) => Expr::Zeros(*r, *c),
        Expr::Block(parts) => Expr::Block(Box::new([
            substitute(&parts[0], inputs),
            substitute(&parts[1], inputs),
            substitute(&parts[2], inputs),
            substitute(&parts[3], inputs),
        ])),
        Expr::Slice { of, row, col, rows, cols } => {
            Expr::Slice { of: s(of), row: *row, col: *col, rows: *rows, cols: *cols }
        }
        Expr::Elem { of, row, col } => Expr::Elem { of: s(of), row: *row, col: *col },
    }
}

/// Expression helpers used when building derived functions.
pub mod build {
    use super::{Expr, Func};

    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(j: usize) -> Expr {
        Expr::Var(j)
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

    pub fn beta(a: Expr) -> Expr {
        Expr::Call(Func::Beta(0), Box::new(a))
    }

    pub fn inv(a: Expr) -> Expr {
        Expr::Inv(Box::new(a))
    }

    /// `a * x + b` for a scalar input expression `x`.
    pub fn affine(a: f64, x: Expr, b: f64) -> Expr {
        let scaled = if a == 1.0 { x } else { mul(num(a), x) };
        if b == 0.0 {
            scaled
        } else {
            add(scaled, num(b))
        }
    }
}
