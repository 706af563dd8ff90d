use std::collections::BTreeMap;

use super::shape::{self, BinOp, Shape};
use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while let Some(c) = self.peek_char() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if "+-*/^()[],".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(Error::Syntax { offset: start, expected: vec!["a token".into()] })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i > s
        };
        let mut any = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            any |= digits(&mut i);
        }
        if !any {
            return Err(Error::Syntax { offset: start, expected: vec!["digit".into()] });
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) {
                i = j;
            } else {
                return Err(Error::Syntax { offset: j, expected: vec!["exponent digits".into()] });
            }
        }
        self.pos = i;
        let value: f64 =
            self.src[start..i].parse().map_err(|_| Error::Syntax { offset: start, expected: vec!["number".into()] })?;
        Ok((Tok::Num(value), start))
    }
}

struct Parser<'c> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arity: usize,
    constants: &'c BTreeMap<String, f64>,
}

type Node = (Expr, Shape);

const ATOM_START: &[&str] = &["number", "input", "function", "(", "[", "-"];

pub(crate) fn parse(src: &str, arity: usize, constants: &BTreeMap<String, f64>) -> Result<(Expr, Shape)> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, at: 0, arity, constants };
    let node = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(node)
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::End {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, expected: &[&str]) -> Error {
        Error::Syntax { offset: self.offset(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&[&c.to_string()]))
        }
    }

    fn combine(&self, op: BinOp, at: usize, a: Node, b: Node) -> Result<Node> {
        let s = shape::binary(op, a.1, b.1).map_err(|message| Error::Shape { offset: Some(at), message })?;
        let (l, r) = (Box::new(a.0), Box::new(b.0));
        let e = match op {
            BinOp::Add => Expr::Add(l, r),
            BinOp::Sub => Expr::Sub(l, r),
            BinOp::Mul => Expr::Mul(l, r),
            BinOp::Div => Expr::Div(l, r),
            BinOp::Pow => Expr::Pow(l, r),
        };
        Ok((e, s))
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let at = self.offset();
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = self.combine(op, at, lhs, rhs)?;
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let at = self.offset();
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = self.combine(op, at, lhs, rhs)?;
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            let (e, s) = self.unary()?;
            return Ok(match e {
                Expr::Num(x) => (Expr::Num(-x), s),
                e => (Expr::Neg(Box::new(e)), s),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        let at = self.offset();
        if self.eat('^') {
            let exponent = self.unary()?;
            return self.combine(BinOp::Pow, at, base, exponent);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok((Expr::Num(x), Shape::Scalar))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Sym('[') => self.literal(),
            Tok::Ident(name) => {
                self.bump();
                if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if !name[1..].starts_with('+') && idx < self.arity {
                        return Ok((Expr::Var(idx), Shape::Scalar));
                    }
                    return Err(Error::Arity { name, arity: self.arity });
                }
                if name == "pi" {
                    return Ok((Expr::Num(std::f64::consts::PI), Shape::Scalar));
                }
                if self.peek() != &Tok::Sym('(') {
                    if let Some(v) = self.constants.get(&name) {
                        return Ok((Expr::Num(*v), Shape::Scalar));
                    }
                    return Err(Error::Arity { name, arity: self.arity });
                }
                self.call(&name, at)
            }
            _ => Err(self.syntax(ATOM_START)),
        }
    }

    fn args(&mut self) -> Result<Vec<(Node, usize)>> {
        self.expect('(')?;
        let mut out = Vec::new();
        loop {
            let at = self.offset();
            out.push((self.expr()?, at));
            if self.eat(',') {
                continue;
            }
            self.expect(')')?;
            return Ok(out);
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Node> {
        let args = self.args()?;
        let shape_err = |message: String| Error::Shape { offset: Some(at), message };
        let arity_is = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(shape_err(format!("{name} takes {n} argument(s), got {}", args.len())))
            }
        };
        let index = |k: usize| -> Result<usize> {
            let ((e, _), off) = &args[k];
            match e {
                Expr::Num(x) if *x >= 0.0 && x.fract() == 0.0 => Ok(*x as usize),
                _ => Err(Error::Syntax { offset: *off, expected: vec!["non-negative integer".into()] }),
            }
        };
        if let Some(func) = Func::from_name(name) {
            arity_is(1)?;
            let ((e, s), _) = args.into_iter().next().unwrap();
            if s != Shape::Scalar {
                return Err(shape_err(format!("{name} needs a scalar argument, got {s}")));
            }
            return Ok((Expr::Call(func, Box::new(e)), Shape::Scalar));
        }
        match name {
            "expm" | "inv" | "det" | "trace" | "transpose" => {
                arity_is(1)?;
                let ((e, s), _) = args.into_iter().next().unwrap();
                let b = Box::new(e);
                match name {
                    "transpose" => match s {
                        Shape::Matrix(r, c) => Ok((Expr::Transpose(b), Shape::Matrix(c, r))),
                        s => Err(shape_err(format!("transpose needs a matrix, got {s}"))),
                    },
                    _ => {
                        let n = shape::square_arg(name, s).map_err(shape_err)?;
                        Ok(match name {
                            "expm" => (Expr::Expm(b), Shape::square(n)),
                            "inv" => (Expr::Inv(b), Shape::square(n)),
                            "det" => (Expr::Det(b), Shape::Scalar),
                            _ => (Expr::Trace(b), Shape::Scalar),
                        })
                    }
                }
            }
            "zeros" => {
                arity_is(2)?;
                let (r, c) = (index(0)?, index(1)?);
                if r == 0 || c == 0 {
                    return Err(shape_err("zeros needs positive dimensions".into()));
                }
                Ok((Expr::Zeros(r, c), Shape::Matrix(r, c)))
            }
            "blk" => {
                arity_is(4)?;
                let mut parts = args.into_iter().map(|((e, s), _)| (e, s));
                let p: Vec<(Expr, Shape)> = parts.by_ref().collect();
                let s = shape::block([p[0].1, p[1].1, p[2].1, p[3].1]).map_err(shape_err)?;
                let [a, b, c, d]: [(Expr, Shape); 4] = p.try_into().unwrap();
                Ok((Expr::Block(Box::new([a.0, b.0, c.0, d.0])), s))
            }
            "slice" => {
                arity_is(5)?;
                let (row, col, rows, cols) = (index(1)?, index(2)?, index(3)?, index(4)?);
                let ((e, s), _) = args.into_iter().next().unwrap();
                let out = shape::slice(s, row, col, rows, cols).map_err(shape_err)?;
                Ok((Expr::Slice { of: Box::new(e), row, col, rows, cols }, out))
            }
            "elem" => {
                if args.len() != 2 && args.len() != 3 {
                    return Err(shape_err(format!("elem takes 2 or 3 arguments, got {}", args.len())));
                }
                let row = index(1)?;
                let col = if args.len() == 3 { Some(index(2)?) } else { None };
                let ((e, s), _) = args.into_iter().next().unwrap();
                let out = shape::elem(s, row, col).map_err(shape_err)?;
                Ok((Expr::Elem { of: Box::new(e), row, col }, out))
            }
            _ => Err(Error::Syntax { offset: at, expected: vec!["known function name".into()] }),
        }
    }

    fn scalar_list(&mut self) -> Result<Vec<Expr>> {
        let mut items = Vec::new();
        loop {
            let at = self.offset();
            let (e, s) = self.expr()?;
            if s != Shape::Scalar {
                return Err(Error::Shape {
                    offset: Some(at),
                    message: format!("literal entries must be scalars, got {s}"),
                });
            }
            items.push(e);
            if self.eat(',') {
                continue;
            }
            self.expect(']')?;
            return Ok(items);
        }
    }

    fn literal(&mut self) -> Result<Node> {
        let at = self.offset();
        self.expect('[')?;
        if self.peek() != &Tok::Sym('[') {
            let items = self.scalar_list()?;
            let n = items.len();
            return Ok((Expr::Vector(items), Shape::Vector(n)));
        }
        let mut rows = Vec::new();
        loop {
            self.expect('[')?;
            rows.push(self.scalar_list()?);
            if self.eat(',') {
                continue;
            }
            self.expect(']')?;
            break;
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape { offset: Some(at), message: "matrix rows differ in length".into() });
        }
        let n = rows.len();
        Ok((Expr::Matrix(rows), Shape::Matrix(n, cols)))
    }
}
