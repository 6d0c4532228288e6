//! Polynomial and trigonometric expression trees over chart coordinates.
//!
//! Metric components, potentials and test tensors are stored as [`Expr`]
//! trees so they can be evaluated on plain floats or on [`Jet`]s, which
//! gives exact derivatives without a general symbolic engine.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Powi(Arc<Expr>, i32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Ln(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn sin(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.sin()),
            e => Expr::Sin(Arc::new(e)),
        }
    }

    pub fn cos(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.cos()),
            e => Expr::Cos(Arc::new(e)),
        }
    }

    pub fn exp(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.exp()),
            e => Expr::Exp(Arc::new(e)),
        }
    }

    pub fn ln(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.ln()),
            e => Expr::Ln(Arc::new(e)),
        }
    }

    pub fn sqrt(self) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.sqrt()),
            e => Expr::Sqrt(Arc::new(e)),
        }
    }

    pub fn powi(self, k: i32) -> Expr {
        match (self, k) {
            (_, 0) => Expr::one(),
            (e, 1) => e,
            (Expr::Const(v), k) => Expr::Const(v.powi(k)),
            (e, k) => Expr::Powi(Arc::new(e), k),
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a)
            | Expr::Powi(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::Sqrt(a) => a.max_var(),
        }
    }

    /// Renames variable `i` to `offset + i`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map_vars(&|i| Expr::Var(i + offset))
    }

    /// Substitutes every variable through `f`.
    pub fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        let un = |a: &Arc<Expr>| a.map_vars(f);
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => f(*i),
            Expr::Add(a, b) => un(a) + un(b),
            Expr::Sub(a, b) => un(a) - un(b),
            Expr::Mul(a, b) => un(a) * un(b),
            Expr::Div(a, b) => un(a) / un(b),
            Expr::Neg(a) => -un(a),
            Expr::Powi(a, k) => un(a).powi(*k),
            Expr::Sin(a) => un(a).sin(),
            Expr::Cos(a) => un(a).cos(),
            Expr::Exp(a) => un(a).exp(),
            Expr::Ln(a) => un(a).ln(),
            Expr::Sqrt(a) => un(a).sqrt(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Powi(a, k) => a.eval(x).powi(*k),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
        }
    }

    /// Evaluates on seeded coordinate jets; `vars` must all share dim and order.
    pub fn eval_jet(&self, vars: &[Jet]) -> Jet {
        let (dim, order) = vars
            .first()
            .map(|v| (v.dim(), v.order()))
            .expect("eval_jet needs at least one variable");
        self.eval_jet_in(vars, dim, order)
    }

    fn eval_jet_in(&self, vars: &[Jet], dim: usize, order: usize) -> Jet {
        let go = |e: &Arc<Expr>| e.eval_jet_in(vars, dim, order);
        match self {
            Expr::Const(v) => Jet::constant(dim, order, *v),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Add(a, b) => match (a.as_const(), b.as_const()) {
                (Some(c), _) => go(b) + c,
                (_, Some(c)) => go(a) + c,
                _ => go(a) + go(b),
            },
            Expr::Sub(a, b) => match b.as_const() {
                Some(c) => go(a) + (-c),
                None => go(a) - go(b),
            },
            Expr::Mul(a, b) => match (a.as_const(), b.as_const()) {
                (Some(c), _) => go(b) * c,
                (_, Some(c)) => go(a) * c,
                _ => go(a) * go(b),
            },
            Expr::Div(a, b) => match b.as_const() {
                Some(c) => go(a) * (1.0 / c),
                None => go(a) * go(b).recip(),
            },
            Expr::Neg(a) => -go(a),
            Expr::Powi(a, k) => go(a).powi(*k),
            Expr::Sin(a) => go(a).sin(),
            Expr::Cos(a) => go(a).cos(),
            Expr::Exp(a) => go(a).exp(),
            Expr::Ln(a) => go(a).ln(),
            Expr::Sqrt(a) => go(a).sqrt(),
        }
    }

    /// Parses an infix expression; `names` maps identifiers to variable indices.
    pub fn parse(src: &str, names: &[&str]) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src,
            pos: 0,
            names,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Builds a polynomial from `(coefficient, exponents)` terms.
    pub fn polynomial(terms: &[(f64, Vec<u32>)]) -> Expr {
        terms.iter().fold(Expr::zero(), |acc, (coef, powers)| {
            let mono = powers
                .iter()
                .enumerate()
                .fold(Expr::c(*coef), |m, (i, &k)| m * Expr::var(i).powi(k as i32));
            acc + mono
        })
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (Expr::Const(z), e) | (e, Expr::Const(z)) if z == 0.0 => e,
            (a, b) => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
            (e, Expr::Const(z)) if z == 0.0 => e,
            (Expr::Const(z), e) if z == 0.0 => -e,
            (a, b) => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
            (Expr::Const(z), _) | (_, Expr::Const(z)) if z == 0.0 => Expr::zero(),
            (Expr::Const(o), e) | (e, Expr::Const(o)) if o == 1.0 => e,
            (a, b) => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a / b),
            (Expr::Const(z), _) if z == 0.0 => Expr::zero(),
            (e, Expr::Const(o)) if o == 1.0 => e,
            (a, b) => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(a) => Expr::Const(-a),
            Expr::Neg(e) => (*e).clone(),
            e => Expr::Neg(Arc::new(e)),
        }
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        Expr::c(rhs) * self
    }
}

impl Add<f64> for Expr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::c(rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/({b})"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Powi(a, k) => write!(f, "({a})^{k}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at column {column} in `{source_text}`")]
pub struct ParseError {
    pub message: String,
    pub column: usize,
    pub source_text: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            message: message.to_string(),
            column: self.pos + 1,
            source_text: self.src.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let neg = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let k: i32 = self.src[start..self.pos]
                .parse()
                .map_err(|_| self.error("expected integer exponent"))?;
            return Ok(base.powi(if neg { -k } else { k }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
                {
                    let c = self.peek().unwrap();
                    self.pos += 1;
                    if (c == 'e' || c == 'E') && matches!(self.peek(), Some('-') | Some('+')) {
                        self.pos += 1;
                    }
                }
                self.src[start..self.pos]
                    .parse::<f64>()
                    .map(Expr::c)
                    .map_err(|_| self.error("malformed number"))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let ident = &self.src[start..self.pos];
                let func: Option<fn(Expr) -> Expr> = match ident {
                    "sin" => Some(Expr::sin),
                    "cos" => Some(Expr::cos),
                    "exp" => Some(Expr::exp),
                    "ln" => Some(Expr::ln),
                    "sqrt" => Some(Expr::sqrt),
                    _ => None,
                };
                if let Some(func) = func {
                    if !self.eat('(') {
                        return Err(self.error("expected `(` after function name"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.error("expected `)`"));
                    }
                    return Ok(func(arg));
                }
                if ident == "pi" {
                    return Ok(Expr::c(std::f64::consts::PI));
                }
                match self.names.iter().position(|n| *n == ident) {
                    Some(i) => Ok(Expr::var(i)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier `{ident}`")))
                    }
                }
            }
            _ => Err(self.error("expected a number, coordinate, function or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_precedence() {
        let e = Expr::parse("1 + 2*x^2 - y/4", &["x", "y"]).unwrap();
        assert_abs_diff_eq!(e.eval(&[3.0, 8.0]), 1.0 + 18.0 - 2.0);
        let e = Expr::parse("-x^2", &["x"]).unwrap();
        assert_abs_diff_eq!(e.eval(&[3.0]), -9.0);
        let e = Expr::parse("sin(th)^2 + cos(th)^2", &["th"]).unwrap();
        assert_abs_diff_eq!(e.eval(&[0.37]), 1.0, epsilon = 1e-15);
        let e = Expr::parse("2.5e-1 * pi", &[]).unwrap();
        assert_abs_diff_eq!(e.eval(&[]), 0.25 * std::f64::consts::PI);
        let e = Expr::parse("x^-2", &["x"]).unwrap();
        assert_abs_diff_eq!(e.eval(&[2.0]), 0.25);
    }

    #[test]
    fn rejects_unknown_identifier() {
        let err = Expr::parse("x + z", &["x", "y"]).unwrap_err();
        assert!(err.message.contains("`z`"));
        assert_eq!(err.column, 5);
        assert!(Expr::parse("x^1.5", &["x"]).is_err());
        assert!(Expr::parse("(x", &["x"]).is_err());
    }

    #[test]
    fn constant_folding_keeps_trees_small() {
        let x = Expr::var(0);
        assert!((x.clone() * Expr::zero()).is_zero());
        assert_eq!(x.clone() * Expr::one(), x);
        assert_eq!(Expr::zero() + x.clone(), x);
    }

    #[test]
    fn polynomial_terms() {
        // 3 x y^2 - 1
        let p = Expr::polynomial(&[(3.0, vec![1, 2]), (-1.0, vec![])]);
        assert_abs_diff_eq!(p.eval(&[2.0, 0.5]), 0.5);
    }

    #[test]
    fn jet_evaluation_matches_float() {
        let e = Expr::parse("exp(x)*sin(y) / (1 + x^2) + sqrt(2 + y)", &["x", "y"]).unwrap();
        let p = [0.3, -0.7];
        let j = e.eval_jet(&Jet::seed(&p, 3));
        assert_abs_diff_eq!(j.value(), e.eval(&p), epsilon = 1e-15);
    }

    #[test]
    fn shift_vars_reindexes() {
        let e = Expr::parse("x*y", &["x", "y"]).unwrap().shift_vars(2);
        assert_eq!(e.max_var(), Some(3));
        assert_abs_diff_eq!(e.eval(&[0.0, 0.0, 2.0, 5.0]), 10.0);
    }
}
