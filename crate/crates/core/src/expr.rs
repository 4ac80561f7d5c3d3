//! Expression trees for nonlinear vector fields.
//!
//! The grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-')? atom ('^' integer)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt | cbrt
//! ```
//!
//! Expressions evaluate two ways: exact floating point at a state vector
//! ([`Expr::eval_point`]) and soundly over a box ([`Expr::eval_interval`]).
//! `cbrt(e^p)` is normalised at parse time to the rational power
//! `e^{p/3}`, which keeps interval enclosures tight at the non-Lipschitz
//! point of `∛(x²)`: the composite `cbrt ∘ sq` loses the correlation
//! between the two factors around zero, the magnitude form does not.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::interval::{DomainError, Interval, SQRT_CLAMP};
use crate::math;

/// Literal exponent of a power node. Rational exponents require an odd
/// denominator (only 1 and 3 have surface syntax, via `^` and `cbrt`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Int(i32),
    Ratio { num: i32, den: u32 },
}

/// AST of a scalar expression over state variables `Var(0..n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Cbrt(Box<Expr>),
}

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}")]
    Syntax { offset: usize },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unsupported function `{name}` at byte {offset}")]
    UnsupportedFunction { name: String, offset: usize },
}

/// Parse `text` against an ordered list of variable names.
pub fn parse<S: AsRef<str>>(text: &str, variables: &[S]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        vars: variables,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(ParseError::Syntax { offset: p.pos });
    }
    Ok(e)
}

struct Parser<'a, S> {
    bytes: &'a [u8],
    pos: usize,
    vars: &'a [S],
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                acc = Expr::Div(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let negated = self.eat(b'-');
        let mut e = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            let n = self.integer()?;
            e = normalize_pow(e, n);
        }
        Ok(if negated { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(ParseError::Syntax { offset: self.pos });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(ParseError::Syntax { offset: self.pos }),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        // Optional exponent part of a float literal.
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax { offset: start })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = Box::new(self.expr()?);
            self.skip_ws();
            if !self.eat(b')') {
                return Err(ParseError::Syntax { offset: self.pos });
            }
            return match name {
                "sin" => Ok(Expr::Sin(arg)),
                "cos" => Ok(Expr::Cos(arg)),
                "exp" => Ok(Expr::Exp(arg)),
                "sqrt" => Ok(Expr::Sqrt(arg)),
                "cbrt" => Ok(normalize_cbrt(*arg)),
                _ => Err(ParseError::UnsupportedFunction {
                    name: name.to_string(),
                    offset: start,
                }),
            };
        }
        match self.vars.iter().position(|v| v.as_ref() == name) {
            Some(i) => Ok(Expr::Var(i)),
            None => Err(ParseError::UnknownVariable {
                name: name.to_string(),
                offset: start,
            }),
        }
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'-')) {
            self.pos += 1;
        }
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Err(ParseError::Syntax { offset: self.pos });
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        core::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::Syntax { offset: start })
    }
}

fn normalize_pow(base: Expr, n: i32) -> Expr {
    Expr::Pow(Box::new(base), Exponent::Int(n))
}

/// `cbrt(e^p)` becomes `e^{p/3}`, which is pointwise equal but tighter
/// under interval evaluation; bare `cbrt(e)` is kept as-is.
fn normalize_cbrt(arg: Expr) -> Expr {
    match arg {
        Expr::Pow(base, Exponent::Int(p)) => Expr::Pow(base, Exponent::Ratio { num: p, den: 3 }),
        other => Expr::Cbrt(Box::new(other)),
    }
}

fn pow_ratio_point(v: f64, p: i32, q: u32) -> Result<f64, DomainError> {
    if p < 0 {
        let d = pow_ratio_point(v, -p, q)?;
        if d == 0.0 {
            return Err(DomainError::new("negative rational power of zero"));
        }
        return Ok(1.0 / d);
    }
    let e = f64::from(p) / f64::from(q);
    let m = math::powf(v.abs(), e);
    Ok(if p % 2 == 0 || v >= 0.0 { m } else { -m })
}

impl Expr {
    /// Exact floating evaluation at a state vector.
    pub fn eval_point(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval_point(x)?,
            Expr::Add(a, b) => a.eval_point(x)? + b.eval_point(x)?,
            Expr::Sub(a, b) => a.eval_point(x)? - b.eval_point(x)?,
            Expr::Mul(a, b) => a.eval_point(x)? * b.eval_point(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_point(x)?;
                if d == 0.0 {
                    return Err(DomainError::new("division by zero"));
                }
                a.eval_point(x)? / d
            }
            Expr::Pow(e, Exponent::Int(n)) => {
                let v = e.eval_point(x)?;
                if *n < 0 && v == 0.0 {
                    return Err(DomainError::new("negative power of zero"));
                }
                math::powi(v, *n)
            }
            Expr::Pow(e, Exponent::Ratio { num, den }) => {
                pow_ratio_point(e.eval_point(x)?, *num, *den)?
            }
            Expr::Sin(e) => math::sin(e.eval_point(x)?),
            Expr::Cos(e) => math::cos(e.eval_point(x)?),
            Expr::Exp(e) => math::exp(e.eval_point(x)?),
            Expr::Sqrt(e) => {
                let v = e.eval_point(x)?;
                if v < SQRT_CLAMP {
                    return Err(DomainError::new("sqrt of a negative value"));
                }
                math::sqrt(v.max(0.0))
            }
            Expr::Cbrt(e) => math::cbrt(e.eval_point(x)?),
        })
    }

    /// Sound enclosure over a box: for every point `p` in `x`,
    /// `eval_point(p)` lies within the result.
    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval, DomainError> {
        Ok(match self {
            Expr::Const(c) => Interval::point(*c),
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => e.eval_interval(x)?.neg(),
            Expr::Add(a, b) => a.eval_interval(x)?.add(b.eval_interval(x)?),
            Expr::Sub(a, b) => a.eval_interval(x)?.sub(b.eval_interval(x)?),
            Expr::Mul(a, b) => a.eval_interval(x)?.mul(b.eval_interval(x)?),
            Expr::Div(a, b) => a.eval_interval(x)?.div(b.eval_interval(x)?)?,
            Expr::Pow(e, Exponent::Int(n)) => e.eval_interval(x)?.pow_int(*n)?,
            Expr::Pow(e, Exponent::Ratio { num, den }) => {
                e.eval_interval(x)?.pow_ratio(*num, *den)?
            }
            Expr::Sin(e) => e.eval_interval(x)?.sin(),
            Expr::Cos(e) => e.eval_interval(x)?.cos(),
            Expr::Exp(e) => e.eval_interval(x)?.exp(),
            Expr::Sqrt(e) => e.eval_interval(x)?.sqrt()?,
            Expr::Cbrt(e) => e.eval_interval(x)?.cbrt(),
        })
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) | Expr::Sqrt(e)
            | Expr::Cbrt(e) | Expr::Pow(e, _) => e.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            // A negative literal prints with a leading minus, so it binds
            // like a negation for parenthesisation purposes.
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, names: Option<&[String]>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(i) => match names {
                Some(ns) => write!(f, "{}", ns[*i])?,
                None => write!(f, "x{i}")?,
            },
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, names, 4)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, names, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, names, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, names, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, names, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, names, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, names, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, names, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, names, 3)?;
            }
            Expr::Pow(e, Exponent::Int(n)) => {
                e.fmt_prec(f, names, 5)?;
                write!(f, "^{n}")?;
            }
            Expr::Pow(e, Exponent::Ratio { num, den }) => {
                debug_assert_eq!(*den, 3, "only cube roots have surface syntax");
                write!(f, "cbrt(")?;
                e.fmt_prec(f, names, 5)?;
                write!(f, "^{num})")?;
            }
            Expr::Sin(e) => fmt_call(f, "sin", e, names)?,
            Expr::Cos(e) => fmt_call(f, "cos", e, names)?,
            Expr::Exp(e) => fmt_call(f, "exp", e, names)?,
            Expr::Sqrt(e) => fmt_call(f, "sqrt", e, names)?,
            Expr::Cbrt(e) => fmt_call(f, "cbrt", e, names)?,
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Render with the given variable names; the output reparses to an
    /// equal tree.
    pub fn to_text(&self, names: &[String]) -> String {
        struct W<'a>(&'a Expr, &'a [String]);
        impl fmt::Display for W<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_prec(f, Some(self.1), 0)
            }
        }
        format!("{}", W(self, names))
    }
}

fn fmt_call(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    arg: &Expr,
    names: Option<&[String]>,
) -> fmt::Result {
    write!(f, "{name}(")?;
    arg.fmt_prec(f, names, 0)?;
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, None, 0)
    }
}
