//! Expression grammar shared by couplings, frequencies and numeric quantities.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Pow;

use crate::error::{Result, TcgError};

use super::cq::{q_to_f64, CQ};
use super::freq::FreqExpr;
use super::scalar::{ScalarExpr, TAU, TIME};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            let mut text = s[start..i].to_string();
            // scientific exponent, only when followed by digits
            if i + 1 < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'-' || b[j] == b'+') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    text = s[start..j].to_string();
                    i = j;
                }
            }
            out.push((Tok::Num(parse_decimal(&text).ok_or_else(|| TcgError::parse(s, start, "bad number"))?), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(s[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(TcgError::parse(s, i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Exact rational from decimal text with optional exponent.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(k) => (&text[..k], text[k + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = match mant.find('.') {
        Some(k) => (&mant[..k], &mant[k + 1..]),
        None => (mant, ""),
    };
    if frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = exp - frac.len() as i32;
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= Pow::pow(&ten, scale as u32);
    } else {
        r /= Pow::pow(&ten, (-scale) as u32);
    }
    Some(r)
}

#[derive(Clone, Debug)]
enum Node {
    Num(BigRational),
    Ident(String, usize),
    Call(String, Vec<Node>, usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>, usize),
    Pow(Box<Node>, i32),
    Paren(Box<Node>),
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    k: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Parser {
            src,
            toks: tokenize(src)?,
            k: 0,
        })
    }

    fn pos(&self) -> usize {
        self.toks.get(self.k).map(|t| t.1).unwrap_or(self.src.len())
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.k).map(|t| &t.0)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(TcgError::parse(self.src, self.pos(), msg))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.k += 1;
            true
        } else {
            false
        }
    }

    fn full(mut self) -> Result<Node> {
        if self.toks.is_empty() {
            return self.err("empty expression");
        }
        let n = self.expr()?;
        if self.k != self.toks.len() {
            return self.err("trailing input");
        }
        Ok(n)
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let p = self.pos();
            if self.eat('+') {
                lhs = Node::Bin('+', Box::new(lhs), Box::new(self.term()?), p);
            } else if self.eat('-') {
                lhs = Node::Bin('-', Box::new(lhs), Box::new(self.term()?), p);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let is_num = |n: &Node| match n {
            Node::Num(_) => true,
            Node::Neg(a) => matches!(**a, Node::Num(_)),
            _ => false,
        };
        let mut lhs = self.unary()?;
        let mut last_num = is_num(&lhs);
        loop {
            let p = self.pos();
            if self.eat('*') {
                let rhs = self.unary()?;
                last_num = is_num(&rhs);
                lhs = Node::Bin('*', Box::new(lhs), Box::new(rhs), p);
            } else if self.eat('/') {
                let rhs = self.unary()?;
                last_num = is_num(&rhs);
                lhs = Node::Bin('/', Box::new(lhs), Box::new(rhs), p);
            } else if last_num && matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Op('('))) {
                // implicit product such as `2pi` or `0.2ns`
                lhs = Node::Bin('*', Box::new(lhs), Box::new(self.power()?), p);
                last_num = false;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Num(n)) if n.is_integer() => {
                    self.k += 1;
                    let v: i32 = n
                        .to_integer()
                        .try_into()
                        .or_else(|_| self.err("exponent too large"))?;
                    return Ok(Node::Pow(Box::new(base), if neg { -v } else { v }));
                }
                _ => return self.err("malformed power: expected an integer exponent"),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let p = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.k += 1;
                Ok(Node::Num(n))
            }
            Some(Tok::Ident(name)) => {
                self.k += 1;
                if self.eat('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    Ok(Node::Call(name, args, p))
                } else {
                    Ok(Node::Ident(name, p))
                }
            }
            Some(Tok::Op('(')) => {
                self.k += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(Node::Paren(Box::new(e)))
            }
            _ => self.err("expected a number, symbol or `(`"),
        }
    }
}

/// How an identifier is interpreted inside a symbolic expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Real,
    Complex,
    Frequency,
}

fn to_scalar(src: &str, n: &Node, kind: &dyn Fn(&str) -> SymbolKind) -> Result<ScalarExpr> {
    Ok(match n {
        Node::Num(r) => ScalarExpr::constant(CQ::real(r.clone())),
        Node::Ident(name, pos) => match name.as_str() {
            "i" => ScalarExpr::i(),
            TAU | TIME => ScalarExpr::symbol(name),
            "pi" => return Err(TcgError::parse(src, *pos, "`pi` is only allowed in numeric values")),
            _ => match kind(name) {
                SymbolKind::Real => ScalarExpr::symbol(name),
                SymbolKind::Complex => ScalarExpr::complex_symbol(name, false),
                SymbolKind::Frequency => ScalarExpr::freq(&FreqExpr::symbol(name)),
            },
        },
        Node::Call(fname, args, pos) => {
            if args.len() != 1 {
                return Err(TcgError::parse(src, *pos, "expected one argument"));
            }
            let inner = to_scalar(src, &args[0], kind)?;
            match fname.as_str() {
                "f" => {
                    let w = if inner.is_zero() {
                        FreqExpr::zero()
                    } else {
                        inner
                            .as_linear_freq()
                            .ok_or_else(|| TcgError::parse(src, *pos, "filter argument must be a frequency"))?
                    };
                    ScalarExpr::filter(&w)
                }
                "conj" => inner.conj(),
                _ => return Err(TcgError::parse(src, *pos, format!("unknown function `{fname}`"))),
            }
        }
        Node::Neg(a) => -&to_scalar(src, a, kind)?,
        Node::Paren(a) => {
            let e = to_scalar(src, a, kind)?;
            match e.as_linear_freq() {
                Some(w) => ScalarExpr::freq(&w),
                None => e,
            }
        }
        Node::Pow(a, p) => {
            let b = to_scalar(src, a, kind)?;
            if *p >= 0 {
                b.pow(*p as u32)
            } else {
                b.inverse()
                    .map_err(|e| TcgError::parse(src, 0, e.to_string()))?
                    .pow(p.unsigned_abs())
            }
        }
        Node::Bin(op, a, b, pos) => {
            let x = to_scalar(src, a, kind)?;
            let y = to_scalar(src, b, kind)?;
            match op {
                '+' => &x + &y,
                '-' => &x - &y,
                '*' => &x * &y,
                '/' => &x * &y.inverse().map_err(|e| TcgError::parse(src, *pos, e.to_string()))?,
                _ => unreachable!(),
            }
        }
    })
}

/// Parses a symbolic coupling such as `g/2` or `-1/2*chi*f(wa - wc)`.
pub fn parse_scalar(src: &str, kind: &dyn Fn(&str) -> SymbolKind) -> Result<ScalarExpr> {
    let node = Parser::new(src)?.full()?;
    to_scalar(src, &node, kind)
}

/// Parses a frequency such as `wc - wa`, `-2*wp` or `5/6*wd`.
pub fn parse_freq(src: &str) -> Result<FreqExpr> {
    let node = Parser::new(src)?.full()?;
    let e = to_scalar(src, &node, &|_| SymbolKind::Frequency)?;
    if e.is_zero() {
        return Ok(FreqExpr::zero());
    }
    e.as_linear_freq()
        .ok_or_else(|| TcgError::parse(src, 0, "not a rational combination of frequency symbols"))
}

fn unit(name: &str) -> Option<f64> {
    Some(match name {
        "pi" => std::f64::consts::PI,
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        "THz" => 1e12,
        "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        "fs" => 1e-15,
        _ => return None,
    })
}

fn to_number(src: &str, n: &Node, lookup: &dyn Fn(&str) -> Option<Complex64>) -> Result<Complex64> {
    Ok(match n {
        Node::Num(r) => Complex64::new(q_to_f64(r), 0.0),
        Node::Ident(name, pos) => {
            if name == "i" {
                Complex64::i()
            } else if let Some(u) = unit(name) {
                Complex64::new(u, 0.0)
            } else {
                lookup(name).ok_or_else(|| TcgError::parse(src, *pos, format!("unknown name `{name}`")))?
            }
        }
        Node::Call(f, _, pos) => return Err(TcgError::parse(src, *pos, format!("unknown function `{f}`"))),
        Node::Neg(a) => -to_number(src, a, lookup)?,
        Node::Paren(a) => to_number(src, a, lookup)?,
        Node::Pow(a, p) => to_number(src, a, lookup)?.powi(*p),
        Node::Bin(op, a, b, _) => {
            let x = to_number(src, a, lookup)?;
            let y = to_number(src, b, lookup)?;
            match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => x / y,
                _ => unreachable!(),
            }
        }
    })
}

/// Numeric value with unit suffixes, e.g. `2pi*2GHz`, `0.2ns`, `2i`.
pub fn parse_quantity(src: &str) -> Result<Complex64> {
    parse_quantity_with(src, &|_| None)
}

pub fn parse_quantity_with(src: &str, lookup: &dyn Fn(&str) -> Option<Complex64>) -> Result<Complex64> {
    let node = Parser::new(src)?.full()?;
    to_number(src, &node, lookup)
}

pub fn parse_real_quantity(src: &str) -> Result<f64> {
    let v = parse_quantity(src)?;
    if v.im != 0.0 {
        return Err(TcgError::parse(src, 0, "expected a real value"));
    }
    Ok(v.re)
}

pub fn is_reserved(name: &str) -> bool {
    matches!(name, "i" | "pi" | "f" | "conj" | TAU | TIME) || unit(name).is_some()
}
