use std::fmt::{self, Display, Formatter, Write};

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Num(x) if x.is_sign_negative() => UNARY,
        Expr::Pow(..) => POWER,
        _ => ATOM,
    }
}

fn child(out: &mut Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(out, "({e})")
    } else {
        write!(out, "{e}")
    }
}

fn number(x: f64) -> String {
    // Debug formatting round-trips exactly and uses exponents for extremes.
    let s = format!("{x:?}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn list<'a>(out: &mut Formatter<'_>, items: impl IntoIterator<Item = &'a Expr>) -> fmt::Result {
    out.write_char('[')?;
    for (k, x) in items.into_iter().enumerate() {
        if k > 0 {
            out.write_str(", ")?;
        }
        write!(out, "{x}")?;
    }
    out.write_char(']')
}

impl Display for Expr {
    fn fmt(&self, out: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => out.write_str(&number(*x)),
            Expr::Var(j) => write!(out, "x{j}"),
            Expr::Neg(a) => {
                out.write_char('-')?;
                child(out, a, UNARY)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                child(out, a, SUM)?;
                out.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                child(out, b, PRODUCT)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                child(out, a, PRODUCT)?;
                out.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                child(out, b, UNARY)
            }
            Expr::Pow(a, b) => {
                child(out, a, ATOM)?;
                out.write_char('^')?;
                child(out, b, POWER)
            }
            Expr::Call(func, a) => write!(out, "{}({a})", func.name()),
            Expr::Vector(items) => list(out, items),
            Expr::Matrix(rows) => {
                out.write_char('[')?;
                for (k, row) in rows.iter().enumerate() {
                    if k > 0 {
                        out.write_str(", ")?;
                    }
                    list(out, row)?;
                }
                out.write_char(']')
            }
            Expr::Expm(a) => write!(out, "expm({a})"),
            Expr::Inv(a) => write!(out, "inv({a})"),
            Expr::Transpose(a) => write!(out, "transpose({a})"),
            Expr::Det(a) => write!(out, "det({a})"),
            Expr::Trace(a) => write!(out, "trace({a})"),
            Expr::Zeros(r, c) => write!(out, "zeros({r}, {c})"),
            Expr::Block(p) => write!(out, "blk({}, {}, {}, {})", p[0], p[1], p[2], p[3]),
            Expr::Slice { of, row, col, rows, cols } => {
                write!(out, "slice({of}, {row}, {col}, {rows}, {cols})")
            }
            Expr::Elem { of, row, col: Some(c) } => write!(out, "elem({of}, {row}, {c})"),
            Expr::Elem { of, row, col: None } => write!(out, "elem({of}, {row})"),
        }
    }
}
