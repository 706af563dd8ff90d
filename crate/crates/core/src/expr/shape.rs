use std::fmt;

use super::Expr;
use crate::error::{Error, Result};

/// Static shape of an expression value. Vectors are columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

impl Shape {
    pub fn square(n: usize) -> Shape {
        Shape::Matrix(n, n)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => write!(f, "scalar"),
            Shape::Vector(n) => write!(f, "vector({n})"),
            Shape::Matrix(r, c) => write!(f, "matrix({r}x{c})"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

pub(crate) fn binary(op: BinOp, a: Shape, b: Shape) -> Result<Shape, String> {
    use Shape::*;
    match op {
        BinOp::Add | BinOp::Sub => {
            if a == b {
                Ok(a)
            } else {
                Err(format!("cannot add/subtract {a} and {b}"))
            }
        }
        BinOp::Mul => match (a, b) {
            (Scalar, s) | (s, Scalar) => Ok(s),
            (Matrix(r, k), Matrix(k2, c)) if k == k2 => Ok(Matrix(r, c)),
            (Matrix(r, k), Vector(k2)) if k == k2 => Ok(Vector(r)),
            _ => Err(format!("cannot multiply {a} by {b}")),
        },
        BinOp::Div => match b {
            Scalar => Ok(a),
            _ => Err(format!("cannot divide by {b}")),
        },
        BinOp::Pow => match (a, b) {
            (Scalar, Scalar) => Ok(Scalar),
            _ => Err(format!("power needs scalar operands, got {a} and {b}")),
        },
    }
}

pub(crate) fn square_arg(what: &str, s: Shape) -> Result<usize, String> {
    match s {
        Shape::Matrix(r, c) if r == c => Ok(r),
        _ => Err(format!("{what} needs a square matrix, got {s}")),
    }
}

pub(crate) fn block(parts: [Shape; 4]) -> Result<Shape, String> {
    let dims = |s: Shape| match s {
        Shape::Matrix(r, c) => Ok((r, c)),
        other => Err(format!("blk needs matrix blocks, got {other}")),
    };
    let (a, b, c, d) = (dims(parts[0])?, dims(parts[1])?, dims(parts[2])?, dims(parts[3])?);
    if a.0 != b.0 || c.0 != d.0 || a.1 != c.1 || b.1 != d.1 {
        return Err(format!(
            "blk blocks do not line up: {}x{}, {}x{}, {}x{}, {}x{}",
            a.0, a.1, b.0, b.1, c.0, c.1, d.0, d.1
        ));
    }
    Ok(Shape::Matrix(a.0 + c.0, a.1 + b.1))
}

pub(crate) fn slice(of: Shape, row: usize, col: usize, rows: usize, cols: usize) -> Result<Shape, String> {
    match of {
        Shape::Matrix(r, c) if row + rows <= r && col + cols <= c && rows > 0 && cols > 0 => {
            Ok(Shape::Matrix(rows, cols))
        }
        _ => Err(format!("slice({row},{col},{rows},{cols}) out of bounds for {of}")),
    }
}

pub(crate) fn elem(of: Shape, row: usize, col: Option<usize>) -> Result<Shape, String> {
    match (of, col) {
        (Shape::Vector(n), None) if row < n => Ok(Shape::Scalar),
        (Shape::Matrix(r, c), Some(j)) if row < r && j < c => Ok(Shape::Scalar),
        _ => Err(format!("element index out of bounds for {of}")),
    }
}

/// Shape of a constructed tree, validating input indices against `arity`.
pub(crate) fn infer(e: &Expr, arity: usize) -> Result<Shape> {
    let sh = |msg: String| Error::shape(msg);
    Ok(match e {
        Expr::Num(_) => Shape::Scalar,
        Expr::Var(j) => {
            if *j >= arity {
                return Err(Error::Arity { name: format!("x{j}"), arity });
            }
            Shape::Scalar
        }
        Expr::Neg(a) => infer(a, arity)?,
        Expr::Add(a, b) => binary(BinOp::Add, infer(a, arity)?, infer(b, arity)?).map_err(sh)?,
        Expr::Sub(a, b) => binary(BinOp::Sub, infer(a, arity)?, infer(b, arity)?).map_err(sh)?,
        Expr::Mul(a, b) => binary(BinOp::Mul, infer(a, arity)?, infer(b, arity)?).map_err(sh)?,
        Expr::Div(a, b) => binary(BinOp::Div, infer(a, arity)?, infer(b, arity)?).map_err(sh)?,
        Expr::Pow(a, b) => binary(BinOp::Pow, infer(a, arity)?, infer(b, arity)?).map_err(sh)?,
        Expr::Call(func, a) => match infer(a, arity)? {
            Shape::Scalar => Shape::Scalar,
            s => return Err(sh(format!("{} needs a scalar argument, got {s}", func.name()))),
        },
        Expr::Vector(items) => {
            for x in items {
                if infer(x, arity)? != Shape::Scalar {
                    return Err(sh("vector entries must be scalars".into()));
                }
            }
            Shape::Vector(items.len())
        }
        Expr::Matrix(rows) => {
            let cols = rows.first().map_or(0, |r| r.len());
            if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
                return Err(sh("matrix rows must be non-empty and of equal length".into()));
            }
            for x in rows.iter().flatten() {
                if infer(x, arity)? != Shape::Scalar {
                    return Err(sh("matrix entries must be scalars".into()));
                }
            }
            Shape::Matrix(rows.len(), cols)
        }
        Expr::Expm(a) | Expr::Inv(a) => Shape::square(square_arg("matrix function", infer(a, arity)?).map_err(sh)?),
        Expr::Det(a) | Expr::Trace(a) => {
            square_arg("det/trace", infer(a, arity)?).map_err(sh)?;
            Shape::Scalar
        }
        Expr::Transpose(a) => match infer(a, arity)? {
            Shape::Matrix(r, c) => Shape::Matrix(c, r),
            s => return Err(sh(format!("transpose needs a matrix, got {s}"))),
        },
        Expr::Zeros(r, c) => Shape::Matrix(*r, *c),
        Expr::Block(parts) => block([
            infer(&parts[0], arity)?,
            infer(&parts[1], arity)?,
            infer(&parts[2], arity)?,
            infer(&parts[3], arity)?,
        ])
        .map_err(sh)?,
        Expr::Slice { of, row, col, rows, cols } => slice(infer(of, arity)?, *row, *col, *rows, *cols).map_err(sh)?,
        Expr::Elem { of, row, col } => elem(infer(of, arity)?, *row, *col).map_err(sh)?,
    })
}
