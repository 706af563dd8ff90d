use nalgebra::{DMatrix, DVector};

use super::smooth;
use super::{Expr, Func, Value};
use crate::error::{Error, Result};
use crate::lie::expm;

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(domain(format!("{what} produced a non-finite value")))
    }
}

fn scalar(e: &Expr, p: &[f64]) -> Result<f64> {
    match eval(e, p)? {
        Value::Scalar(x) => Ok(x),
        v => Err(Error::shape(format!("expected scalar, got {}", v.shape()))),
    }
}

fn matrix(e: &Expr, p: &[f64]) -> Result<DMatrix<f64>> {
    match eval(e, p)? {
        Value::Matrix(m) => Ok(m),
        v => Err(Error::shape(format!("expected matrix, got {}", v.shape()))),
    }
}

fn map(v: Value, f: impl Fn(f64) -> f64) -> Value {
    match v {
        Value::Scalar(x) => Value::Scalar(f(x)),
        Value::Vector(x) => Value::Vector(x.map(f)),
        Value::Matrix(x) => Value::Matrix(x.map(f)),
    }
}

pub(crate) fn eval(e: &Expr, p: &[f64]) -> Result<Value> {
    use Value::*;
    Ok(match e {
        Expr::Num(x) => Scalar(*x),
        Expr::Var(j) => Scalar(p[*j]),
        Expr::Neg(a) => map(eval(a, p)?, |x| -x),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let sign = if matches!(e, Expr::Add(..)) { 1.0 } else { -1.0 };
            match (eval(a, p)?, eval(b, p)?) {
                (Scalar(x), Scalar(y)) => Scalar(x + sign * y),
                (Vector(x), Vector(y)) => Vector(x + y * sign),
                (Matrix(x), Matrix(y)) => Matrix(x + y * sign),
                _ => return Err(Error::shape("operand shapes differ")),
            }
        }
        Expr::Mul(a, b) => match (eval(a, p)?, eval(b, p)?) {
            (Scalar(x), v) | (v, Scalar(x)) => map(v, |y| x * y),
            (Matrix(x), Matrix(y)) => Matrix(x * y),
            (Matrix(x), Vector(y)) => Vector(x * y),
            _ => return Err(Error::shape("incompatible product")),
        },
        Expr::Div(a, b) => {
            let d = scalar(b, p)?;
            if d == 0.0 {
                return Err(domain("division by zero"));
            }
            map(eval(a, p)?, |x| x / d)
        }
        Expr::Pow(a, b) => {
            let (x, y) = (scalar(a, p)?, scalar(b, p)?);
            if x < 0.0 && y.fract() != 0.0 {
                return Err(domain(format!("negative base {x} with non-integer exponent {y}")));
            }
            if x == 0.0 && y < 0.0 {
                return Err(domain("zero raised to a negative power"));
            }
            let v = if y.fract() == 0.0 && y.abs() <= 64.0 { x.powi(y as i32) } else { x.powf(y) };
            Scalar(finite(v, "power")?)
        }
        Expr::Call(func, a) => {
            let x = scalar(a, p)?;
            Scalar(match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => finite(x.tan(), "tan")?,
                Func::Exp => finite(x.exp(), "exp")?,
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain(format!("log of non-positive value {x}")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain(format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
                Func::Beta(k) => smooth::beta_derivative(*k as usize, x),
            })
        }
        Expr::Vector(items) => {
            let vals = items.iter().map(|x| scalar(x, p)).collect::<Result<Vec<_>>>()?;
            Vector(DVector::from_vec(vals))
        }
        Expr::Matrix(rows) => {
            let (r, c) = (rows.len(), rows[0].len());
            let mut m = DMatrix::zeros(r, c);
            for (i, row) in rows.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    m[(i, j)] = scalar(x, p)?;
                }
            }
            Matrix(m)
        }
        Expr::Expm(a) => Matrix(expm(&matrix(a, p)?)),
        Expr::Inv(a) => {
            let m = matrix(a, p)?;
            Matrix(m.try_inverse().ok_or_else(|| domain("inverse of a singular matrix"))?)
        }
        Expr::Transpose(a) => Matrix(matrix(a, p)?.transpose()),
        Expr::Det(a) => Scalar(matrix(a, p)?.determinant()),
        Expr::Trace(a) => Scalar(matrix(a, p)?.trace()),
        Expr::Zeros(r, c) => Matrix(DMatrix::zeros(*r, *c)),
        Expr::Block(parts) => {
            let a = matrix(&parts[0], p)?;
            let b = matrix(&parts[1], p)?;
            let c = matrix(&parts[2], p)?;
            let d = matrix(&parts[3], p)?;
            let (r0, c0) = a.shape();
            let mut m = DMatrix::zeros(r0 + c.nrows(), c0 + b.ncols());
            m.view_mut((0, 0), a.shape()).copy_from(&a);
            m.view_mut((0, c0), b.shape()).copy_from(&b);
            m.view_mut((r0, 0), c.shape()).copy_from(&c);
            m.view_mut((r0, c0), d.shape()).copy_from(&d);
            Matrix(m)
        }
        Expr::Slice { of, row, col, rows, cols } => {
            Matrix(matrix(of, p)?.view((*row, *col), (*rows, *cols)).into_owned())
        }
        Expr::Elem { of, row, col } => match (eval(of, p)?, col) {
            (Vector(v), None) => Scalar(v[*row]),
            (Matrix(m), Some(c)) => Scalar(m[(*row, *c)]),
            _ => return Err(Error::shape("element access on the wrong shape")),
        },
    })
}
