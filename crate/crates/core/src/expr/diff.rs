//! Symbolic partial derivatives. `None` stands for an identically zero
//! derivative so that constant subtrees do not bloat the result.

use super::shape::infer;
use super::{Expr, Func, Shape};
use crate::error::Result;

type D = Option<Expr>;

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), _) if *x == 1.0 => b,
        (_, Expr::Num(y)) if *y == 1.0 => a,
        _ => Expr::Mul(bx(a), bx(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(bx(other)),
    }
}

fn sum(a: D, b: D) -> D {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(Expr::Add(bx(a), bx(b))),
    }
}

fn difference(a: D, b: D) -> D {
    match (a, b) {
        (a, None) => a,
        (None, Some(b)) => Some(neg(b)),
        (Some(a), Some(b)) => Some(Expr::Sub(bx(a), bx(b))),
    }
}

fn zero_like(e: &Expr, arity: usize) -> Result<Expr> {
    Ok(match infer(e, arity)? {
        Shape::Scalar => Expr::Num(0.0),
        Shape::Vector(n) => Expr::Vector(vec![Expr::Num(0.0); n]),
        Shape::Matrix(r, c) => Expr::Zeros(r, c),
    })
}

fn square_size(e: &Expr, arity: usize) -> Result<usize> {
    match infer(e, arity)? {
        Shape::Matrix(n, _) => Ok(n),
        _ => Ok(1),
    }
}

pub(crate) fn derivative(e: &Expr, index: usize, arity: usize) -> Result<Expr> {
    match d(e, index, arity)? {
        Some(x) => Ok(x),
        None => zero_like(e, arity),
    }
}

fn d(e: &Expr, j: usize, arity: usize) -> Result<D> {
    let de = |a: &Expr| d(a, j, arity);
    Ok(match e {
        Expr::Num(_) | Expr::Zeros(..) => None,
        Expr::Var(k) => (*k == j).then_some(Expr::Num(1.0)),
        Expr::Neg(a) => de(a)?.map(neg),
        Expr::Add(a, b) => sum(de(a)?, de(b)?),
        Expr::Sub(a, b) => difference(de(a)?, de(b)?),
        Expr::Mul(a, b) => sum(de(a)?.map(|da| mul(da, (**b).clone())), de(b)?.map(|db| mul((**a).clone(), db))),
        Expr::Div(a, b) => {
            let left = de(a)?.map(|da| Expr::Div(bx(da), b.clone()));
            let right =
                de(b)?.map(|db| Expr::Div(bx(mul((**a).clone(), db)), bx(Expr::Pow(b.clone(), bx(Expr::Num(2.0))))));
            difference(left, right)
        }
        Expr::Pow(a, b) => {
            let (da, db) = (de(a)?, de(b)?);
            match db {
                None if matches!(**b, Expr::Num(c) if c == 0.0) => None,
                None => da.map(|da| {
                    let lowered = match &**b {
                        Expr::Num(c) => Expr::Num(c - 1.0),
                        other => Expr::Sub(bx(other.clone()), bx(Expr::Num(1.0))),
                    };
                    mul(mul((**b).clone(), Expr::Pow(a.clone(), bx(lowered))), da)
                }),
                Some(db) => {
                    let log_term = mul(db, Expr::Call(Func::Log, a.clone()));
                    let base_term = da.map(|da| Expr::Div(bx(mul((**b).clone(), da)), a.clone()));
                    let inner = sum(Some(log_term), base_term).expect("non-empty sum");
                    Some(mul(e.clone(), inner))
                }
            }
        }
        Expr::Call(func, a) => de(a)?.map(|da| {
            let arg = a.clone();
            let outer = match func {
                Func::Sin => Expr::Call(Func::Cos, arg),
                Func::Cos => neg(Expr::Call(Func::Sin, arg)),
                Func::Tan => {
                    Expr::Div(bx(Expr::Num(1.0)), bx(Expr::Pow(bx(Expr::Call(Func::Cos, arg)), bx(Expr::Num(2.0)))))
                }
                Func::Exp => e.clone(),
                Func::Log => Expr::Div(bx(Expr::Num(1.0)), arg),
                Func::Sqrt => Expr::Div(bx(Expr::Num(0.5)), bx(e.clone())),
                Func::Beta(k) => Expr::Call(Func::Beta(k + 1), arg),
            };
            mul(outer, da)
        }),
        Expr::Vector(items) => {
            let parts = items.iter().map(de).collect::<Result<Vec<_>>>()?;
            if parts.iter().all(Option::is_none) {
                None
            } else {
                Some(Expr::Vector(parts.into_iter().map(|p| p.unwrap_or(Expr::Num(0.0))).collect()))
            }
        }
        Expr::Matrix(rows) => {
            let parts =
                rows.iter().map(|r| r.iter().map(de).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
            if parts.iter().flatten().all(Option::is_none) {
                None
            } else {
                Some(Expr::Matrix(
                    parts.into_iter().map(|r| r.into_iter().map(|p| p.unwrap_or(Expr::Num(0.0))).collect()).collect(),
                ))
            }
        }
        Expr::Expm(m) => match de(m)? {
            None => None,
            Some(dm) => {
                // d/dx expm(M) is the upper-right block of expm([[M, M'], [0, M]]).
                let n = square_size(m, arity)?;
                let big = Expr::Block(Box::new([(**m).clone(), dm, Expr::Zeros(n, n), (**m).clone()]));
                Some(Expr::Slice { of: bx(Expr::Expm(bx(big))), row: 0, col: n, rows: n, cols: n })
            }
        },
        Expr::Inv(m) => de(m)?.map(|dm| neg(mul(mul(e.clone(), dm), e.clone()))),
        Expr::Transpose(m) => de(m)?.map(|dm| Expr::Transpose(bx(dm))),
        Expr::Det(m) => de(m)?.map(|dm| mul(e.clone(), Expr::Trace(bx(mul(Expr::Inv(m.clone()), dm))))),
        Expr::Trace(m) => de(m)?.map(|dm| Expr::Trace(bx(dm))),
        Expr::Block(parts) => {
            let ds = parts.iter().map(de).collect::<Result<Vec<_>>>()?;
            if ds.iter().all(Option::is_none) {
                None
            } else {
                let mut out = Vec::with_capacity(4);
                for (p, dp) in parts.iter().zip(ds) {
                    out.push(match dp {
                        Some(x) => x,
                        None => zero_like(p, arity)?,
                    });
                }
                let out: [Expr; 4] = out.try_into().expect("four blocks");
                Some(Expr::Block(Box::new(out)))
            }
        }
        Expr::Slice { of, row, col, rows, cols } => {
            de(of)?.map(|x| Expr::Slice { of: bx(x), row: *row, col: *col, rows: *rows, cols: *cols })
        }
        Expr::Elem { of, row, col } => de(of)?.map(|x| Expr::Elem { of: bx(x), row: *row, col: *col }),
    })
}
