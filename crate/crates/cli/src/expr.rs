//! Arithmetic expressions for kernels and test functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names: the variables `u`, `x`, `t` and the coordinates `x1..x9`, `t1..t9`;
//! the constants `pi` and `e`; the functions `abs`, `exp`, `ln`, `sqrt`,
//! `sin`, `cos`.

use std::fmt;

use hausdorff::Point;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {column} of {source_text:?}")]
pub struct ParseError {
    pub message: String,
    pub column: usize,
    pub source_text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    U,
    X,
    T,
    XCoord(usize),
    TCoord(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Abs,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Values bound to the variables during evaluation.
#[derive(Clone, Debug, Default)]
pub struct Bindings<'a> {
    pub u: Option<&'a Point>,
    pub x: Option<&'a Point>,
}

/// A scalar view of a point: the value itself, an index as a real, or the
/// Euclidean norm of a vector with two or more coordinates.
fn scalar_of(p: &Point) -> f64 {
    p.scalar().unwrap_or_else(|| p.coords().iter().map(|c| c * c).sum::<f64>().sqrt())
}

fn coord_of(p: &Point, i: usize) -> f64 {
    match p {
        Point::Vector(v) => v.get(i - 1).copied().unwrap_or(f64::NAN),
        _ if i == 1 => scalar_of(p),
        _ => f64::NAN,
    }
}

/// A parsed expression. Equality and serialization go through the source text.
#[derive(Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source,
            chars: source.char_indices().collect(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// True when any of `vars` occurs in the expression.
    pub fn uses(&self, vars: &[Var]) -> bool {
        fn walk(n: &Node, vars: &[Var]) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(v) => vars.contains(v),
                Node::Neg(a) | Node::Call(_, a) => walk(a, vars),
                Node::Bin(_, a, b) => walk(a, vars) || walk(b, vars),
            }
        }
        walk(&self.root, vars)
    }

    /// `x` and `t` name the same slot, so the same text works for kernels
    /// (`Φ(u, x)`) and for test functions (`f(t)`).
    pub fn eval(&self, b: &Bindings) -> f64 {
        eval(&self.root, b)
    }
}

fn eval(n: &Node, b: &Bindings) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(v) => match v {
            Var::U => b.u.map_or(f64::NAN, scalar_of),
            Var::X | Var::T => b.x.map_or(f64::NAN, scalar_of),
            Var::XCoord(i) | Var::TCoord(i) => b.x.map_or(f64::NAN, |p| coord_of(p, *i)),
        },
        Node::Neg(a) => -eval(a, b),
        Node::Bin(op, l, r) => {
            let (l, r) = (eval(l, b), eval(r, b));
            match op {
                '+' => l + r,
                '-' => l - r,
                '*' => l * r,
                '/' => l / r,
                _ => l.powf(r),
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, b);
            match f {
                Func::Abs => v.abs(),
                Func::Exp => v.exp(),
                Func::Ln => v.ln(),
                Func::Sqrt => v.sqrt(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            message: message.to_string(),
            column: self.pos + 1,
            source_text: self.src.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                '+'
            } else if self.eat('-') {
                '-'
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                '*'
            } else if self.eat('/') {
                '/'
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn slice(&self, start: usize, end: usize) -> &str {
        let from = self.chars[start].0;
        let to = self.chars.get(end).map_or(self.src.len(), |c| c.0);
        &self.src[from..to]
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = self.slice(start, self.pos);
        text.parse::<f64>().map(Node::Num).map_err(|_| {
            let mut e = self.error(&format!("bad number {text:?}"));
            e.column = start + 1;
            e
        })
    }

    fn name(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name = self.slice(start, self.pos).to_string();
        let func = match name.as_str() {
            "abs" => Some(Func::Abs),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        };
        if let Some(f) = func {
            if !self.eat('(') {
                return Err(self.error(&format!("expected '(' after {name}")));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(Node::Call(f, Box::new(arg)));
        }
        let var = match name.as_str() {
            "u" => Var::U,
            "x" => Var::X,
            "t" => Var::T,
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            _ => {
                let coord = |prefix: char| {
                    name.strip_prefix(prefix)
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|i| (1..=9).contains(i))
                };
                if let Some(i) = coord('x') {
                    Var::XCoord(i)
                } else if let Some(i) = coord('t') {
                    Var::TCoord(i)
                } else {
                    let mut e = self.error(&format!("unknown name {name:?}"));
                    e.column = start + 1;
                    return Err(e);
                }
            }
        };
        Ok(Node::Var(var))
    }
}
