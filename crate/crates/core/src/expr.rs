//! Surface syntax for polynomials and vector fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' INT)?
//! atom   := NUM | NUM '/' NUM | x<k> | p<k> | '(' expr ')'
//!         | D_H(expr) | D_K(expr) | D_HO(expr) | D_KO(expr)
//!         | D(i, j; expr) | div(expr) | div_lambda(rat; expr)
//!         | bracket(expr, expr)
//! ```
//!
//! `p<k>` is `∂_k`. Indices are global (`1..=m+n`). A product may have at
//! most one vector-field factor, and it must be the rightmost one, which is
//! the form the printer produces.
//!
//! ```
//! use cartan::expr;
//! use cartan::{Family, FamilyConfig};
//!
//! let k = FamilyConfig::new(Family::K, 5, 4).unwrap();
//! assert_eq!(expr::eval_str("D_K(1)", &k).unwrap().to_string(), "2*p5");
//! ```

use std::fmt;

use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::{Family, FamilyConfig};
use crate::scalar::{self, Scalar};
use crate::superpoly::{Parity, SuperPoly};
use crate::vectorfield::{self, VectorField};

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    DH,
    DK,
    DHO,
    DKO,
    Div,
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::DH => "D_H",
            Op::DK => "D_K",
            Op::DHO => "D_HO",
            Op::DKO => "D_KO",
            Op::Div => "div",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(Scalar),
    Var(usize),
    Partial(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Apply(Op, Box<Expr>),
    Dij(usize, usize, Box<Expr>),
    DivLambda(Scalar, Box<Expr>),
    Bracket(Box<Expr>, Box<Expr>),
}

/// A parsed expression; `offset` is the byte where it starts.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    fn new(kind: ExprKind, offset: usize) -> Self {
        Expr { kind, offset }
    }
}

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Poly(SuperPoly),
    Field(VectorField),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Poly(p) => write!(f, "{p}"),
            Value::Field(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Scalar),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: String| Error::Parse { offset, message };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b',' => out.push((Tok::Comma, i)),
            b';' => out.push((Tok::Semi, i)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut end = i;
                if i < bytes.len() && bytes[i] == b'/' {
                    let mut j = i + 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == i + 1 {
                        return Err(err(i, "expected a denominator after `/`".into()));
                    }
                    end = j;
                }
                let value = scalar::parse(&text[start..end])
                    .map_err(|_| err(start, "zero denominator".into()))?;
                out.push((Tok::Num(value), start));
                i = end;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().expect("in bounds");
                return Err(err(i, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let off = lhs.offset;
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::new(ExprKind::Add(Box::new(lhs), Box::new(rhs)), off);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::new(ExprKind::Sub(Box::new(lhs), Box::new(rhs)), off);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            let off = lhs.offset;
            lhs = Expr::new(ExprKind::Mul(Box::new(lhs), Box::new(rhs)), off);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            let (_, off) = self.bump();
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), off));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            (Tok::Num(k), off) => {
                let e = k
                    .is_integer()
                    .then(|| k.to_integer().to_u32())
                    .flatten()
                    .ok_or(Error::Parse {
                        offset: off,
                        message: "exponent must be a non-negative integer".into(),
                    })?;
                let o = base.offset;
                Ok(Expr::new(ExprKind::Pow(Box::new(base), e), o))
            }
            (_, off) => Err(Error::Parse {
                offset: off,
                message: "expected an exponent".into(),
            }),
        }
    }

    fn index(&mut self) -> Result<usize> {
        match self.bump() {
            (Tok::Num(k), off) => k
                .is_integer()
                .then(|| k.to_integer().to_usize())
                .flatten()
                .filter(|&i| i > 0)
                .ok_or(Error::Parse {
                    offset: off,
                    message: "expected a positive index".into(),
                }),
            (_, off) => Err(Error::Parse {
                offset: off,
                message: "expected an index".into(),
            }),
        }
    }

    fn signed_rational(&mut self) -> Result<Scalar> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            (Tok::Num(v), _) => Ok(if neg { -v } else { v }),
            (_, off) => Err(Error::Parse {
                offset: off,
                message: "expected a rational".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, off) = self.bump();
        let kind = match tok {
            Tok::Num(v) => ExprKind::Num(v),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Expr::new(inner.kind, off));
            }
            Tok::Ident(name) => self.named(&name, off)?,
            Tok::End => {
                return Err(Error::Parse {
                    offset: off,
                    message: "unexpected end of input".into(),
                })
            }
            _ => {
                return Err(Error::Parse {
                    offset: off,
                    message: "expected an operand".into(),
                })
            }
        };
        Ok(Expr::new(kind, off))
    }

    fn named(&mut self, name: &str, off: usize) -> Result<ExprKind> {
        let numbered = |prefix: char| -> Option<usize> {
            let rest = name.strip_prefix(prefix)?;
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0')
            {
                return None;
            }
            rest.parse().ok()
        };
        if let Some(k) = numbered('x') {
            return Ok(ExprKind::Var(k));
        }
        if let Some(k) = numbered('p') {
            return Ok(ExprKind::Partial(k));
        }
        let op = match name {
            "D_H" => Some(Op::DH),
            "D_K" => Some(Op::DK),
            "D_HO" => Some(Op::DHO),
            "D_KO" => Some(Op::DKO),
            "div" => Some(Op::Div),
            _ => None,
        };
        if op.is_none() && !matches!(name, "D" | "div_lambda" | "bracket") {
            return Err(Error::Parse {
                offset: off,
                message: format!("unknown name `{name}`"),
            });
        }
        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
        let kind = match (op, name) {
            (Some(op), _) => ExprKind::Apply(op, Box::new(self.expr()?)),
            (None, "D") => {
                let i = self.index()?;
                self.expect(Tok::Comma, "`,`")?;
                let j = self.index()?;
                self.expect(Tok::Semi, "`;`")?;
                ExprKind::Dij(i, j, Box::new(self.expr()?))
            }
            (None, "div_lambda") => {
                let l = self.signed_rational()?;
                self.expect(Tok::Semi, "`;`")?;
                ExprKind::DivLambda(l, Box::new(self.expr()?))
            }
            _ => {
                let a = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.expr()?;
                ExprKind::Bracket(Box::new(a), Box::new(b))
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(kind)
    }
}

/// Parses `text` without reference to a configuration.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

fn at(offset: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            offset,
            message: other.to_string(),
        },
    }
}

fn semantic<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

/// Evaluates under `config`. Semantic errors carry the offset of the
/// offending subexpression.
pub fn evaluate(e: &Expr, config: &FamilyConfig) -> Result<Value> {
    let sig = config.signature();
    let off = e.offset;
    let poly = |x: &Expr| -> Result<SuperPoly> {
        match evaluate(x, config)? {
            Value::Poly(p) => Ok(p),
            Value::Field(_) => semantic(x.offset, "expected a polynomial, found a vector field"),
        }
    };
    let field = |x: &Expr| -> Result<VectorField> {
        match evaluate(x, config)? {
            Value::Field(v) => Ok(v),
            Value::Poly(p) if p.is_zero() => Ok(VectorField::zero(sig)),
            Value::Poly(_) => semantic(x.offset, "expected a vector field, found a polynomial"),
        }
    };
    let homogeneous = |p: SuperPoly, x: &Expr| -> Result<SuperPoly> {
        p.homogeneous_parity().map_err(at(x.offset))?;
        Ok(p)
    };
    Ok(match &e.kind {
        ExprKind::Num(v) => Value::Poly(SuperPoly::constant(sig, v.clone())),
        ExprKind::Var(k) => Value::Poly(SuperPoly::var(sig, *k).map_err(at(off))?),
        ExprKind::Partial(k) => Value::Field(VectorField::partial(sig, *k).map_err(at(off))?),
        ExprKind::Neg(a) => match evaluate(a, config)? {
            Value::Poly(p) => Value::Poly(p.neg()),
            Value::Field(v) => Value::Field(v.neg()),
        },
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            let minus = matches!(e.kind, ExprKind::Sub(..));
            match (evaluate(a, config)?, evaluate(b, config)?) {
                (Value::Poly(x), Value::Poly(y)) => {
                    Value::Poly(if minus { x.sub(&y) } else { x.add(&y) }?)
                }
                (Value::Field(x), Value::Field(y)) => {
                    Value::Field(if minus { x.sub(&y) } else { x.add(&y) }?)
                }
                (Value::Field(x), Value::Poly(y)) if y.is_zero() => Value::Field(x),
                (Value::Poly(x), Value::Field(y)) if x.is_zero() => {
                    Value::Field(if minus { y.neg() } else { y })
                }
                _ => return semantic(b.offset, "cannot add a polynomial and a vector field"),
            }
        }
        ExprKind::Mul(a, b) => match (evaluate(a, config)?, evaluate(b, config)?) {
            (Value::Poly(x), Value::Poly(y)) => Value::Poly(x.mul(&y)?),
            (Value::Poly(x), Value::Field(y)) => Value::Field(y.mul_left(&x)?),
            (Value::Field(_), _) => {
                return semantic(
                    b.offset,
                    "a vector field can only be the rightmost factor of a product",
                )
            }
        },
        ExprKind::Pow(a, k) => {
            let base = poly(a)?;
            let mut acc = SuperPoly::one(sig);
            for _ in 0..*k {
                acc = acc.mul(&base)?;
            }
            Value::Poly(acc)
        }
        ExprKind::Apply(op, a) => {
            let maps = config.maps();
            match op {
                Op::Div => Value::Poly(field(a)?.div().map_err(at(a.offset))?),
                Op::DH => Value::Field(
                    vectorfield::d_h(&homogeneous(poly(a)?, a)?, maps).map_err(at(off))?,
                ),
                Op::DK => Value::Field(
                    vectorfield::d_k(&homogeneous(poly(a)?, a)?, maps).map_err(at(off))?,
                ),
                Op::DHO => Value::Field(
                    vectorfield::d_ho(&homogeneous(poly(a)?, a)?, maps).map_err(at(off))?,
                ),
                Op::DKO => Value::Field(
                    vectorfield::d_ko(&homogeneous(poly(a)?, a)?, maps).map_err(at(off))?,
                ),
            }
        }
        ExprKind::Dij(i, j, a) => {
            Value::Field(vectorfield::d_ij(*i, *j, &homogeneous(poly(a)?, a)?).map_err(at(off))?)
        }
        ExprKind::DivLambda(l, a) => Value::Poly(
            vectorfield::div_lambda(&homogeneous(poly(a)?, a)?, l, config.maps())
                .map_err(at(off))?,
        ),
        ExprKind::Bracket(a, b) => {
            let (x, y) = (field(a)?, field(b)?);
            x.homogeneous_parity().map_err(at(a.offset))?;
            y.homogeneous_parity().map_err(at(b.offset))?;
            Value::Field(x.bracket(&y).map_err(at(off))?)
        }
    })
}

/// `parse` followed by `evaluate`.
pub fn eval_str(text: &str, config: &FamilyConfig) -> Result<Value> {
    evaluate(&parse(text)?, config)
}

/// Header comment naming the odd indices of `config`.
pub fn odd_header(config: &FamilyConfig) -> String {
    let sig = config.signature();
    let odd: Vec<String> = (sig.m() + 1..=sig.vars())
        .map(|k| format!("x{k}"))
        .collect();
    format!("# {}: odd indeterminates {}", config.label(), odd.join(" "))
}

fn prec(e: &ExprKind) -> u8 {
    match e {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) => 2,
        ExprKind::Neg(..) => 3,
        ExprKind::Pow(..) => 4,
        ExprKind::Num(v) if v.is_negative() => 3,
        ExprKind::Num(v) if !v.denom().is_one() => 4,
        _ => 5,
    }
}

struct Wrap<'a>(&'a Expr, u8);

impl fmt::Display for Wrap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(&self.0.kind) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints an expression so that [`parse`] gives it back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{}", scalar::display(v)),
            ExprKind::Var(k) => write!(f, "x{k}"),
            ExprKind::Partial(k) => write!(f, "p{k}"),
            ExprKind::Neg(a) => write!(f, "-{}", Wrap(a, 3)),
            ExprKind::Add(a, b) => write!(f, "{} + {}", Wrap(a, 1), Wrap(b, 2)),
            ExprKind::Sub(a, b) => write!(f, "{} - {}", Wrap(a, 1), Wrap(b, 2)),
            ExprKind::Mul(a, b) => write!(f, "{}*{}", Wrap(a, 2), Wrap(b, 3)),
            ExprKind::Pow(a, k) => write!(f, "{}^{k}", Wrap(a, 5)),
            ExprKind::Apply(op, a) => write!(f, "{}({a})", op.name()),
            ExprKind::Dij(i, j, a) => write!(f, "D({i},{j}; {a})"),
            ExprKind::DivLambda(l, a) => write!(f, "div_lambda({}; {a})", scalar::display(l)),
            ExprKind::Bracket(a, b) => write!(f, "bracket({a}, {b})"),
        }
    }
}

/// A deterministic random expression that evaluates without error under
/// `config`: a homogeneous polynomial or vector field built from the
/// operators available to the family.
pub fn random_expr(config: &FamilyConfig, seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parity = if rng.gen_bool(0.5) {
        Parity::Even
    } else {
        Parity::Odd
    };
    if rng.gen_bool(0.5) {
        random_poly(config, &mut rng, parity, 2)
    } else {
        random_field(config, &mut rng, parity, 2)
    }
}

fn num(v: Scalar) -> Expr {
    Expr::new(ExprKind::Num(v), 0)
}

fn random_scalar<R: Rng>(rng: &mut R) -> Scalar {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-4i64..=4);
    }
    scalar::ratio(v, rng.gen_range(1i64..=3))
}

/// A monomial of the requested parity as a product of variables.
fn random_monomial<R: Rng>(config: &FamilyConfig, rng: &mut R, parity: Parity) -> Expr {
    let sig = config.signature();
    let mut factors: Vec<Expr> = Vec::new();
    let evens = rng.gen_range(0..=2);
    for _ in 0..evens {
        let k = rng.gen_range(1..=sig.m());
        let e = rng.gen_range(1u32..=2);
        let v = Expr::new(ExprKind::Var(k), 0);
        factors.push(if e == 1 {
            v
        } else {
            Expr::new(ExprKind::Pow(Box::new(v), e), 0)
        });
    }
    let mut odd_count = rng.gen_range(0..=2usize.min(sig.n()));
    if (odd_count % 2 == 1) != parity.is_odd() {
        odd_count = if odd_count == 0 { 1 } else { odd_count - 1 };
    }
    for _ in 0..odd_count {
        factors.push(Expr::new(
            ExprKind::Var(rng.gen_range(sig.m() + 1..=sig.vars())),
            0,
        ));
    }
    let mut it = factors.into_iter();
    let Some(first) = it.next() else {
        return num(scalar::int(1));
    };
    it.fold(first, |acc, x| {
        Expr::new(ExprKind::Mul(Box::new(acc), Box::new(x)), 0)
    })
}

fn random_poly<R: Rng>(config: &FamilyConfig, rng: &mut R, parity: Parity, depth: u32) -> Expr {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..4) };
    match choice {
        1 => {
            let a = random_poly(config, rng, parity, depth - 1);
            let b = random_poly(config, rng, parity, depth - 1);
            let kind = if rng.gen_bool(0.5) {
                ExprKind::Add(Box::new(a), Box::new(b))
            } else {
                ExprKind::Sub(Box::new(a), Box::new(b))
            };
            Expr::new(kind, 0)
        }
        2 if matches!(config.family(), Family::W | Family::S) => {
            // div of a homogeneous field has the field's parity
            let v = random_field(config, rng, parity, depth - 1);
            Expr::new(ExprKind::Apply(Op::Div, Box::new(v)), 0)
        }
        2 if matches!(config.family(), Family::KO | Family::SKO) => {
            let f = random_poly(config, rng, parity + Parity::Odd, depth - 1);
            Expr::new(ExprKind::DivLambda(config.lambda().clone(), Box::new(f)), 0)
        }
        3 => {
            let a = random_poly(config, rng, Parity::Even, depth - 1);
            let b = random_poly(config, rng, parity, depth - 1);
            Expr::new(ExprKind::Mul(Box::new(a), Box::new(b)), 0)
        }
        _ => {
            let m = random_monomial(config, rng, parity);
            let c = random_scalar(rng);
            if c.is_one() {
                m
            } else {
                Expr::new(ExprKind::Mul(Box::new(num(c)), Box::new(m)), 0)
            }
        }
    }
}

fn random_field<R: Rng>(config: &FamilyConfig, rng: &mut R, parity: Parity, depth: u32) -> Expr {
    let sig = config.signature();
    let family = config.family();
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..5) };
    match choice {
        1 => {
            let a = random_field(config, rng, parity, depth - 1);
            let b = random_field(config, rng, parity, depth - 1);
            Expr::new(ExprKind::Add(Box::new(a), Box::new(b)), 0)
        }
        2 => {
            let pa = if rng.gen_bool(0.5) {
                Parity::Even
            } else {
                Parity::Odd
            };
            let a = random_field(config, rng, pa, depth - 1);
            let b = random_field(config, rng, pa + parity, depth - 1);
            Expr::new(ExprKind::Bracket(Box::new(a), Box::new(b)), 0)
        }
        3 if family.has_generating_operator() => {
            let op = match family {
                Family::H => Op::DH,
                Family::K => Op::DK,
                Family::HO | Family::SHO => Op::DHO,
                _ => Op::DKO,
            };
            let fp = vectorfield::d_x_parity(family, parity);
            Expr::new(
                ExprKind::Apply(op, Box::new(random_poly(config, rng, fp, depth - 1))),
                0,
            )
        }
        3 | 4 => {
            let i = rng.gen_range(1..=sig.vars());
            let j = rng.gen_range(1..=sig.vars());
            let fp = parity + sig.parity_of(i) + sig.parity_of(j);
            Expr::new(
                ExprKind::Dij(i, j, Box::new(random_poly(config, rng, fp, depth - 1))),
                0,
            )
        }
        _ => {
            let r = rng.gen_range(1..=sig.vars());
            let p = Expr::new(ExprKind::Partial(r), 0);
            let cp = parity + sig.parity_of(r);
            if rng.gen_bool(0.2) && cp == Parity::Even {
                return p;
            }
            let coeff = random_poly(config, rng, cp, 0);
            Expr::new(ExprKind::Mul(Box::new(coeff), Box::new(p)), 0)
        }
    }
}
