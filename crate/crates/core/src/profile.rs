//! A small expression language for initial profiles and nonlinearities.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 'x' | 'w' | 'i' | 'pi' | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `x` and `w` both denote the single free variable. Powers of complex
//! bases use the principal branch `exp(b Log a)`; integer exponents use
//! repeated multiplication and have no branch cut.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{as_integer_exponent, seed1, DualValue, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The imaginary unit.
    I,
    Pi,
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

/// A parsed expression in one variable. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileAst {
    root: Expr,
}

impl ProfileAst {
    pub fn new(root: Expr) -> Self {
        Self { root }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Evaluate at `x` over any [`Scalar`]; nest duals for derivatives.
    pub fn eval<S: Scalar>(&self, x: S) -> Result<S> {
        let v = eval_node(&self.root, x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Singularity(format!("non-finite value at x = {}", x.base())))
        }
    }

    pub fn eval_complex(&self, x: Complex64) -> Result<Complex64> {
        self.eval(x)
    }

    /// The profile `x -> self(x - shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let arg = if shift >= 0.0 {
            Expr::Sub(Box::new(Expr::Var), Box::new(Expr::Num(shift)))
        } else {
            Expr::Add(Box::new(Expr::Var), Box::new(Expr::Num(-shift)))
        };
        Self::new(substitute(&self.root, &arg))
    }

    /// The profile `x -> factor * self(x)`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let c = complex_literal(factor);
        Self::new(Expr::Mul(Box::new(c), Box::new(self.root.clone())))
    }

    /// Whether the expression contains the free variable.
    pub fn depends_on_variable(&self) -> bool {
        contains_var(&self.root)
    }
}

/// Value and exact first derivative of `ast` at `x`.
pub fn eval_dual(ast: &ProfileAst, x: Complex64) -> Result<DualValue> {
    ast.eval(seed1(x))
}

pub fn parse(src: &str) -> Result<ProfileAst> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
    };
    let root = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(Error::Syntax {
            offset: t.offset,
            message: format!("unexpected {}", t.kind.describe()),
        });
    }
    Ok(ProfileAst::new(root))
}

impl FromStr for ProfileAst {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl Serialize for ProfileAst {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProfileAst {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

fn contains_var(e: &Expr) -> bool {
    match e {
        Expr::Var => true,
        Expr::Num(_) | Expr::I | Expr::Pi => false,
        Expr::Neg(a) | Expr::Exp(a) => contains_var(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            contains_var(a) || contains_var(b)
        }
    }
}

fn substitute(e: &Expr, with: &Expr) -> Expr {
    let s = |a: &Expr| Box::new(substitute(a, with));
    match e {
        Expr::Var => with.clone(),
        Expr::Num(_) | Expr::I | Expr::Pi => e.clone(),
        Expr::Neg(a) => Expr::Neg(s(a)),
        Expr::Exp(a) => Expr::Exp(s(a)),
        Expr::Add(a, b) => Expr::Add(s(a), s(b)),
        Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
        Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
        Expr::Div(a, b) => Expr::Div(s(a), s(b)),
        Expr::Pow(a, b) => Expr::Pow(s(a), s(b)),
    }
}

fn complex_literal(c: Complex64) -> Expr {
    let re = Expr::Num(c.re.abs());
    let re = if c.re < 0.0 { Expr::Neg(Box::new(re)) } else { re };
    if c.im == 0.0 {
        return re;
    }
    let im = Expr::Mul(Box::new(Expr::Num(c.im.abs())), Box::new(Expr::I));
    if c.im < 0.0 {
        Expr::Sub(Box::new(re), Box::new(im))
    } else {
        Expr::Add(Box::new(re), Box::new(im))
    }
}

fn constant_value(e: &Expr) -> Option<Complex64> {
    if contains_var(e) {
        return None;
    }
    eval_node::<Complex64>(e, Complex64::new(0.0, 0.0)).ok()
}

fn eval_node<S: Scalar>(e: &Expr, x: S) -> Result<S> {
    Ok(match e {
        Expr::Num(v) => S::real(*v),
        Expr::I => S::constant(Complex64::new(0.0, 1.0)),
        Expr::Pi => S::real(std::f64::consts::PI),
        Expr::Var => x,
        Expr::Neg(a) => -eval_node(a, x)?,
        Expr::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        Expr::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        Expr::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        Expr::Div(a, b) => {
            let den = eval_node(b, x)?;
            if den.base() == Complex64::new(0.0, 0.0) {
                return Err(Error::Singularity(format!("division by zero at x = {}", x.base())));
            }
            eval_node(a, x)? / den
        }
        Expr::Exp(a) => eval_node(a, x)?.exp(),
        Expr::Pow(a, b) => {
            let base = eval_node(a, x)?;
            let zero = base.base() == Complex64::new(0.0, 0.0);
            match constant_value(b) {
                Some(p) => match as_integer_exponent(p) {
                    Some(n) if n < 0 && zero => return Err(Error::Singularity(format!("0^{n} at x = {}", x.base()))),
                    Some(n) => base.powi(n),
                    None if zero => {
                        return Err(Error::Singularity(format!("0^{p} (branch point) at x = {}", x.base())))
                    }
                    None => base.powc(p),
                },
                None => {
                    if zero {
                        return Err(Error::Singularity(format!("0^(variable exponent) at x = {}", x.base())));
                    }
                    (eval_node(b, x)? * base.ln()).exp()
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// printing

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Neg(_) => PREC_NEG,
        Expr::Pow(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(v) => write!(f, "{v:?}"),
        Expr::I => write!(f, "i"),
        Expr::Pi => write!(f, "pi"),
        Expr::Var => write!(f, "x"),
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_wrapped(f, a, prec(a) < PREC_NEG)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(..)) { "+" } else { "-" };
            write_wrapped(f, a, prec(a) < PREC_ADD)?;
            write!(f, " {op} ")?;
            // a leading unary minus on the right operand would read as `a - -b`
            write_wrapped(f, b, prec(b) <= PREC_ADD || prec(b) == PREC_NEG)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            let op = if matches!(e, Expr::Mul(..)) { "*" } else { "/" };
            write_wrapped(f, a, prec(a) < PREC_MUL)?;
            write!(f, "{op}")?;
            write_wrapped(f, b, prec(b) <= PREC_MUL || prec(b) == PREC_NEG)
        }
        Expr::Pow(a, b) => {
            write_wrapped(f, a, prec(a) <= PREC_POW)?;
            write!(f, "^")?;
            write_wrapped(f, b, prec(b) < PREC_NEG)
        }
    }
}

impl fmt::Display for ProfileAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.root)
    }
}

// ---------------------------------------------------------------------------
// lexing and parsing

#[derive(Clone, Debug, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token { kind, offset: start });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: TokenKind::Num(v),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let ch = src[start..].chars().next().unwrap_or('?');
        return Err(Error::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek().map(|t| &t.kind == kind).unwrap_or(false)
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end)
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        if self.at(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| t.kind.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {}, found {found}", kind.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.at(&TokenKind::Plus) {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.at(&TokenKind::Minus) {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.at(&TokenKind::Star) {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.at(&TokenKind::Slash) {
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.at(&TokenKind::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.at(&TokenKind::Caret) {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return Err(Error::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "x" | "w" => Ok(Expr::Var),
                "i" => Ok(Expr::I),
                "pi" => Ok(Expr::Pi),
                "exp" => {
                    self.expect(TokenKind::LParen)?;
                    let e = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Expr::Exp(Box::new(e)))
                }
                _ => Err(Error::UnknownIdentifier {
                    name,
                    offset: tok.offset,
                }),
            },
            other => Err(Error::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cauchy_at_origin() {
        let ast = parse("1/(1+x^2)").unwrap();
        assert_eq!(ast.eval_complex(c(0.0)).unwrap(), c(1.0));
    }

    #[test]
    fn cauchy_dual_at_one() {
        let d = eval_dual(&parse("1/(1+x^2)").unwrap(), c(1.0)).unwrap();
        assert_relative_eq!(d.value.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(d.derivative.re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn even_function_vanishes_at_origin() {
        let d = eval_dual(&parse("-12*x^2/(1+x^2)^5").unwrap(), c(0.0)).unwrap();
        assert_eq!(d.value.norm(), 0.0);
        assert_eq!(d.derivative.norm(), 0.0);
    }

    #[test]
    fn gaussian_with_phase() {
        let ast = parse("exp(-x^2 - i*pi/4)").unwrap();
        let v = ast.eval_complex(c(0.0)).unwrap();
        let expect = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        assert!((v - expect).norm() < 1e-15);
        let v = ast.eval_complex(c(1.0)).unwrap();
        assert!((v - expect * (-1.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let ast = parse("exp(-x^2)").unwrap();
        let x = 0.7;
        let h = 1e-6;
        let fd = (ast.eval_complex(c(x + h)).unwrap() - ast.eval_complex(c(x - h)).unwrap()) / (2.0 * h);
        let d = eval_dual(&ast, c(x)).unwrap();
        assert!((d.derivative - fd).norm() < 1e-8);
    }

    #[test]
    fn unbalanced_parenthesis_reports_offset() {
        match parse("1/(1+x^2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        match parse("sin(x)") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "sin");
                assert_eq!(offset, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse("  "), Err(Error::Syntax { offset: 0, .. })));
    }

    #[test]
    fn precedence() {
        let eval = |s: &str| parse(s).unwrap().eval_complex(c(2.0)).unwrap().re;
        assert_eq!(eval("-x^2"), -4.0);
        assert_eq!(eval("2^3^2"), 512.0);
        assert_eq!(eval("2^-1"), 0.5);
        assert_eq!(eval("1 - x - 1"), -2.0);
        assert_eq!(eval("8/x/2"), 2.0);
        assert_eq!(eval("1 + 2*x^2"), 9.0);
        assert_eq!(eval("(-x)^2"), 4.0);
    }

    #[test]
    fn singularities_are_errors() {
        let ast = parse("1/x").unwrap();
        assert!(matches!(ast.eval_complex(c(0.0)), Err(Error::Singularity(_))));
        let ast = parse("x^-2").unwrap();
        assert!(matches!(ast.eval_complex(c(0.0)), Err(Error::Singularity(_))));
        let ast = parse("x^0.5").unwrap();
        assert!(eval_dual(&ast, c(0.0)).is_err());
        // integer powers of zero are fine
        let ast = parse("x^3").unwrap();
        assert_eq!(eval_dual(&ast, c(0.0)).unwrap().derivative, c(0.0));
    }

    #[test]
    fn principal_branch_fractional_power() {
        let ast = parse("x^(1/2)").unwrap();
        let v = ast.eval_complex(c(-4.0)).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn shift_and_scale() {
        let ast = parse("1/(1+x^2)").unwrap();
        let s = ast.shifted(-1.5);
        assert_relative_eq!(s.eval_complex(c(-1.5)).unwrap().re, 1.0);
        let k = ast.scaled(Complex64::new(0.0, -2.0));
        assert!((k.eval_complex(c(0.0)).unwrap() - Complex64::new(0.0, -2.0)).norm() < 1e-15);
        assert_eq!(parse(&s.to_string()).unwrap(), s);
        assert_eq!(parse(&k.to_string()).unwrap(), k);
    }

    #[test]
    fn catalog_profiles_round_trip() {
        for src in [
            "1/(1+x^2)",
            "-12*x^2/(1+x^2)^5",
            "exp(-x^2 - i*pi/4)",
            "x/(1+x^2)",
            "exp(i*pi/4)/(x^2+1)",
            "1/(1+(x-1)^2) + 1/(1+(x+1)^2)",
            "-4*x*exp(-2*x^2)",
            "w^2",
        ] {
            let ast = parse(src).unwrap();
            assert_eq!(parse(&ast.to_string()).unwrap(), ast, "{src} -> {ast}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::I),
            Just(Expr::Pi),
            Just(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Exp(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let ast = ProfileAst::new(e);
            let printed = ast.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), ast);
        }
    }

    const BUILTIN: [&str; 7] = [
        "1/(1+x^2)",
        "-12*x^2/(1+x^2)^5",
        "exp(-x^2 - i*pi/4)",
        "x/(1+x^2)",
        "exp(i*pi/4)/(x^2+1)",
        "1/(1+(x-1)^2) + 1/(1+(x+1)^2)",
        "-3*x*(1-x^2)^2/(1+x^2)^5",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn dual_derivative_matches_finite_difference(x in -5.0f64..5.0) {
            let h = 1e-5;
            for src in BUILTIN {
                let ast = parse(src).unwrap();
                let d = eval_dual(&ast, c(x)).unwrap();
                let fd = (ast.eval_complex(c(x + h)).unwrap() - ast.eval_complex(c(x - h)).unwrap()) / (2.0 * h);
                prop_assert!((d.derivative - fd).norm() <= 1e-6 * (1.0 + d.derivative.norm()), "{src} at {x}");
            }
        }
    }
}
