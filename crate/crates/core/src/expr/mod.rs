//! A small expression language for building exact elements and polynomials.
//!
//! ```text
//! program := ("let" ident "=" expr ";")* expr
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" ["-"] integer)?
//! atom    := integer | ident | "x" | "(" expr ")"
//! ```
//!
//! Whitespace is ignored. `x` is the polynomial variable; rationals are
//! written as quotients such as `1/3`. Polynomials may be divided by elements
//! but not by other polynomials, and only raised to non-negative powers.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::rings::{Context, Elem, Poly, Structure};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var,
    Name(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub bindings: Vec<(String, Expr)>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { offset, message: message.into() })
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                s.push(d);
                chars.next();
            }
            out.push((i, Tok::Int(s.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_alphanumeric() || *d == '_') {
                s.push(d);
                chars.next();
            }
            out.push((i, Tok::Ident(s)));
        } else if "+-*/^()=;".contains(c) {
            out.push((i, Tok::Sym(c)));
            chars.next();
        } else {
            return err(i, format!("unexpected character {c:?}"));
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.offset(), format!("expected {c:?}"))
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut bindings = Vec::new();
        while *self.peek() == Tok::Ident("let".into()) {
            self.bump();
            let at = self.offset();
            let name = match self.bump() {
                Tok::Ident(s) if s != "x" && s != "let" => s,
                _ => return err(at, "expected a name after let"),
            };
            self.expect('=')?;
            let e = self.expr()?;
            self.expect(';')?;
            bindings.push((name, e));
        }
        let body = self.expr()?;
        if *self.peek() != Tok::End {
            return err(self.offset(), "unexpected trailing input");
        }
        Ok(Program { bindings, body })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(e);
            };
            e = Expr::Bin(op, Box::new(e), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(e);
            };
            e = Expr::Bin(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => {
                let n: i64 = n.try_into().or_else(|_| err(at, "exponent too large"))?;
                Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }))
            }
            _ => err(at, "expected an integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::Int(n)),
            Tok::Ident(s) if s == "x" => Ok(Expr::Var),
            Tok::Ident(s) if s == "let" => err(at, "let is only allowed at the start"),
            Tok::Ident(s) => Ok(Expr::Name(s)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => err(at, "unexpected end of input"),
            Tok::Sym(c) => err(at, format!("unexpected {c:?}")),
        }
    }
}

pub fn parse(src: &str) -> Result<Program> {
    Parser { toks: lex(src)?, pos: 0 }.program()
}

/// An exact element or polynomial produced by evaluating a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Elem(Elem),
    Poly(Poly),
}

struct Lower<'a> {
    cx: &'a mut Context,
    s: Structure,
    env: HashMap<String, Value>,
}

impl Lower<'_> {
    fn as_poly(&mut self, v: Value) -> Result<Poly> {
        match v {
            Value::Poly(f) => Ok(f),
            Value::Elem(e) => self.cx.poly(self.s, &[e]),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value> {
        Ok(match e {
            Expr::Int(n) => Value::Elem(self.cx.int(self.s, n.clone())?),
            Expr::Var => Value::Poly(self.cx.poly_from_ints(self.s, &[0, 1])?),
            Expr::Name(s) => *self
                .env
                .get(s)
                .ok_or_else(|| Error::InvalidArgument(format!("unbound name {s}")))?,
            Expr::Neg(a) => match self.eval(a)? {
                Value::Elem(x) => Value::Elem(self.cx.neg(x)?),
                Value::Poly(f) => {
                    let m = self.cx.int(self.s, -1)?;
                    Value::Poly(self.cx.poly_scale(f, m)?)
                }
            },
            Expr::Pow(a, k) => match self.eval(a)? {
                Value::Elem(x) => Value::Elem(self.cx.pow(x, *k)?),
                Value::Poly(f) => {
                    if *k < 0 {
                        return Err(Error::InvalidArgument("negative power of a polynomial".into()));
                    }
                    let mut acc = self.cx.poly_from_ints(self.s, &[1])?;
                    let mut base = f;
                    let mut k = *k;
                    while k > 0 {
                        if k & 1 == 1 {
                            acc = self.cx.poly_mul(acc, base)?;
                        }
                        k >>= 1;
                        if k > 0 {
                            base = self.cx.poly_mul(base, base)?;
                        }
                    }
                    Value::Poly(acc)
                }
            },
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match (a, b) {
                    (Value::Elem(x), Value::Elem(y)) => Value::Elem(match op {
                        Op::Add => self.cx.add(x, y)?,
                        Op::Sub => self.cx.sub(x, y)?,
                        Op::Mul => self.cx.mul(x, y)?,
                        Op::Div => self.cx.div(x, y)?,
                    }),
                    (Value::Poly(f), Value::Elem(c)) if *op == Op::Div => {
                        let one = self.cx.int(self.s, 1)?;
                        let inv = self.cx.div(one, c)?;
                        Value::Poly(self.cx.poly_scale(f, inv)?)
                    }
                    (_, Value::Poly(_)) if *op == Op::Div => {
                        return Err(Error::InvalidArgument("division by a polynomial".into()))
                    }
                    (a, b) => {
                        let (f, g) = (self.as_poly(a)?, self.as_poly(b)?);
                        Value::Poly(match op {
                            Op::Add => self.cx.poly_add(f, g)?,
                            Op::Sub => self.cx.poly_sub(f, g)?,
                            _ => self.cx.poly_mul(f, g)?,
                        })
                    }
                }
            }
        })
    }
}

/// Parses `src` and builds its value over `s`.
pub fn evaluate(cx: &mut Context, s: Structure, src: &str) -> Result<Value> {
    let prog = parse(src)?;
    let mut l = Lower { cx, s, env: HashMap::new() };
    for (name, e) in &prog.bindings {
        let v = l.eval(e)?;
        l.env.insert(name.clone(), v);
    }
    l.eval(&prog.body)
}

pub fn element(cx: &mut Context, s: Structure, src: &str) -> Result<Elem> {
    match evaluate(cx, s, src)? {
        Value::Elem(x) => Ok(x),
        Value::Poly(_) => Err(Error::InvalidArgument("expected an element, found a polynomial".into())),
    }
}

/// Parses a polynomial; constants become polynomials of degree zero.
pub fn polynomial(cx: &mut Context, s: Structure, src: &str) -> Result<Poly> {
    match evaluate(cx, s, src)? {
        Value::Poly(f) => Ok(f),
        Value::Elem(x) => cx.poly(s, &[x]),
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use proptest::prelude::*;

    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn grammar() {
        let p = parse("let a = 1/3; a^2 - -a").unwrap();
        assert_eq!(p.bindings.len(), 1);
        assert!(matches!(p.body, Expr::Bin(Op::Sub, _, _)));
        assert_eq!(parse(" ( 12 ) ").unwrap().body, Expr::Int(12.into()));
        assert_eq!(parse("2^-3").unwrap().body, Expr::Pow(Box::new(Expr::Int(2.into())), -3));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let off = |s: &str| match parse(s) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("{other:?}"),
        };
        assert_eq!(off("1 +"), 3);
        assert_eq!(off("(1"), 2);
        assert_eq!(off("1 $ 2"), 2);
        assert_eq!(off("let x = 1; x"), 4);
        assert_eq!(off("2^x"), 2);
        assert_eq!(off("1 2"), 2);
    }

    #[test]
    fn elements_and_polynomials() {
        let mut cx = Context::new();
        let s = cx.prime_field(5).unwrap();
        let e = element(&mut cx, s, "let a = 1/3; let b = a*a; (b - 2)/5 + 7^-1").unwrap();
        let expect = cx.rational(s, (q(1, 9) - q(2, 1)) / q(5, 1) + q(1, 7)).unwrap();
        for n in 1..=5 {
            let (a, b) = (cx.approx_elt(e, n).unwrap(), cx.approx_elt(expect, n).unwrap());
            assert!(a.weakly_equals(&b).unwrap());
        }
        let f = polynomial(&mut cx, s, "(x - 1)^2 * 3 - x/2").unwrap();
        let g = cx.poly_from_rationals(s, &[q(3, 1), q(-13, 2), q(3, 1)]).unwrap();
        assert_eq!(cx.degree_bound(f), 2);
        let (a, b) = (cx.approx_poly(f, 4).unwrap(), cx.approx_poly(g, 4).unwrap());
        assert!(a.weakly_equals(&b).unwrap());
        assert!(element(&mut cx, s, "x + 1").is_err());
        assert!(evaluate(&mut cx, s, "1 / x").is_err());
        assert!(evaluate(&mut cx, s, "x^-1").is_err());
        assert!(evaluate(&mut cx, s, "y").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn integer_programs_match_arithmetic(a in -50i64..50, b in -50i64..50, c in 1i64..9) {
            let mut cx = Context::new();
            let s = cx.prime_field(3).unwrap();
            let src = format!("let u = {a}; let v = ({b}); u*v - v^{c} + -u");
            let x = element(&mut cx, s, &src).unwrap();
            let want = a * b - b.pow(c as u32) - a;
            let expect = cx.int(s, want).unwrap();
            let (l, r) = (cx.approx_elt(x, 4).unwrap(), cx.approx_elt(expect, 4).unwrap());
            prop_assert!(l.weakly_equals(&r).unwrap());
        }
    }
}
