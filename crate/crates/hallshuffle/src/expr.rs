//! Tiny expression grammar shared by scalar and rational-function parsing.
//!
//! Integers, identifiers, `+ - * / ^` and parentheses. Exponents are signed
//! integer literals (`t^-1`).

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_bigint::BigInt;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Something an [`Expr`] can be evaluated into.
pub trait Target: Sized {
    fn int(n: &BigInt) -> Result<Self>;
    fn var(name: &str) -> Result<Self>;
    fn add(self, o: Self) -> Result<Self>;
    fn sub(self, o: Self) -> Result<Self>;
    fn mul(self, o: Self) -> Result<Self>;
    fn div(self, o: Self) -> Result<Self>;
    fn neg(self) -> Result<Self>;
    fn pow(self, e: i64) -> Result<Self>;
}

impl Expr {
    pub fn eval<T: Target>(&self) -> Result<T> {
        Ok(match self {
            Expr::Int(n) => T::int(n)?,
            Expr::Var(v) => T::var(v)?,
            Expr::Neg(a) => a.eval::<T>()?.neg()?,
            Expr::Add(a, b) => a.eval::<T>()?.add(b.eval()?)?,
            Expr::Sub(a, b) => a.eval::<T>()?.sub(b.eval()?)?,
            Expr::Mul(a, b) => a.eval::<T>()?.mul(b.eval()?)?,
            Expr::Div(a, b) => a.eval::<T>()?.div(b.eval()?)?,
            Expr::Pow(a, e) => a.eval::<T>()?.pow(*e)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && (b[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = s[st..i].parse().map_err(|_| Error::parse(format!("col {st}"), "bad integer"))?;
            out.push((st, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((st, Tok::Ident(String::from(&s[st..i]))));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::parse(format!("col {i}"), format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }
    fn col(&self) -> String {
        format!("col {}", self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len))
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }
    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: i64 = i64::try_from(&n).map_err(|_| Error::parse(self.col(), "exponent too large"))?;
                    return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }));
                }
                _ => return Err(Error::parse(self.col(), "expected integer exponent")),
            }
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::parse(self.col(), "expected `)`"));
                }
                Ok(e)
            }
            _ => Err(Error::parse(self.col(), "expected a number, a variable or `(`")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::parse("col 0", "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, len: s.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(p.col(), "trailing input"));
    }
    Ok(e)
}
