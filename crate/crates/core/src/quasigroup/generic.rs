//! Arbitrary maps `x_{n+1} = F(x_1, ..., x_n)` given as expression trees.
//!
//! Text form is prefix notation: `(/ (+ (pow x1 2) x2) (+ x1 x2))`.
//! `+` and `*` are variadic, `-` is binary or unary, `/` is binary and
//! `pow` takes an integer exponent.

use std::fmt;

use crate::error::{Error, Result};
use crate::quasigroup::jet::Jet2;
use crate::quasigroup::DEFAULT_EPS_SING;
use crate::scalar::{parse_rational, rational_to_f64};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 1-based variable index.
    Var(usize),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(k) => *k,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::max_var).max().unwrap_or(0),
            Expr::Sub(a, b) | Expr::Div(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_var(),
        }
    }

    fn has_var_zero(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(k) => *k == 0,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(Expr::has_var_zero),
            Expr::Sub(a, b) | Expr::Div(a, b) => a.has_var_zero() || b.has_var_zero(),
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_var_zero(),
        }
    }
}

/// Generic map of a fixed arity.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericMap {
    arity: usize,
    root: Expr,
    eps_sing: f64,
}

impl GenericMap {
    pub fn new(arity: usize, root: Expr) -> Result<Self> {
        if root.has_var_zero() || root.max_var() > arity {
            return Err(Error::InvalidArgument(format!(
                "expression references a variable outside x1..x{arity}"
            )));
        }
        Ok(GenericMap {
            arity,
            root,
            eps_sing: DEFAULT_EPS_SING,
        })
    }

    pub fn parse(arity: usize, text: &str) -> Result<Self> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let root = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::parse(
                format!("token {pos}"),
                format!("unexpected trailing input {:?}", tokens[pos]),
            ));
        }
        Self::new(arity, root)
    }

    pub fn with_eps_sing(mut self, eps: f64) -> Self {
        self.eps_sing = eps;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        // A jet with arbitrary directions carries the value unchanged.
        self.jet_eval(p, (1, 1)).map(|j| j.value)
    }

    /// Forward propagation of a two-direction second-order jet.
    pub fn jet_eval(&self, p: &[f64], dirs: (usize, usize)) -> Result<Jet2> {
        if p.len() != self.arity {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, map has arity {}",
                p.len(),
                self.arity
            )));
        }
        self.jet_node(&self.root, p, dirs)
    }

    fn jet_node(&self, e: &Expr, p: &[f64], dirs: (usize, usize)) -> Result<Jet2> {
        Ok(match e {
            Expr::Const(c) => Jet2::constant(*c, dirs),
            Expr::Var(k) => Jet2::variable(p[k - 1], *k, dirs),
            Expr::Add(xs) => {
                let mut acc = Jet2::constant(0.0, dirs);
                for x in xs {
                    acc = acc + self.jet_node(x, p, dirs)?;
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = Jet2::constant(1.0, dirs);
                for x in xs {
                    acc = acc * self.jet_node(x, p, dirs)?;
                }
                acc
            }
            Expr::Sub(a, b) => self.jet_node(a, p, dirs)? - self.jet_node(b, p, dirs)?,
            Expr::Neg(a) => -self.jet_node(a, p, dirs)?,
            Expr::Div(a, b) => {
                let den = self.jet_node(b, p, dirs)?;
                self.guard(den.value)?;
                self.jet_node(a, p, dirs)? * den.recip()
            }
            Expr::Pow(a, k) => {
                let base = self.jet_node(a, p, dirs)?;
                if *k < 0 {
                    self.guard(base.value)?;
                }
                base.powi(*k)
            }
        })
    }

    fn guard(&self, den: f64) -> Result<()> {
        if den.abs() < self.eps_sing || !den.is_finite() {
            Err(Error::SingularPoint {
                denominator: den,
                threshold: self.eps_sing,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, op: &str, xs: &[&Expr]) -> fmt::Result {
            write!(f, "({op}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Add(xs) => list(f, "+", &xs.iter().collect::<Vec<_>>()),
            Expr::Mul(xs) => list(f, "*", &xs.iter().collect::<Vec<_>>()),
            Expr::Sub(a, b) => list(f, "-", &[a, b]),
            Expr::Neg(a) => list(f, "-", &[a]),
            Expr::Div(a, b) => list(f, "/", &[a, b]),
            Expr::Pow(a, k) => write!(f, "(pow {a} {k})"),
        }
    }
}

impl fmt::Display for GenericMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Expr> {
    let at = *pos;
    let tok = tokens
        .get(at)
        .ok_or_else(|| Error::parse(format!("token {at}"), "unexpected end of expression"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let op = tokens
                .get(*pos)
                .ok_or_else(|| Error::parse(format!("token {}", *pos), "missing operator"))?
                .clone();
            let op_pos = *pos;
            *pos += 1;
            let mut args = Vec::new();
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                if *pos >= tokens.len() {
                    return Err(Error::parse(format!("token {at}"), "unclosed parenthesis"));
                }
                args.push(parse_expr(tokens, pos)?);
            }
            *pos += 1;
            build_node(&op, op_pos, args)
        }
        ")" => Err(Error::parse(format!("token {at}"), "unexpected ')'")),
        atom => parse_atom(atom, at),
    }
}

fn build_node(op: &str, op_pos: usize, mut args: Vec<Expr>) -> Result<Expr> {
    let field = format!("token {op_pos}");
    let arity_err = |want: &str| Error::parse(field.clone(), format!("'{op}' expects {want}"));
    match op {
        "+" if !args.is_empty() => Ok(Expr::Add(args)),
        "*" if !args.is_empty() => Ok(Expr::Mul(args)),
        "+" | "*" => Err(arity_err("at least one argument")),
        "-" => match args.len() {
            1 => Ok(Expr::Neg(Box::new(args.remove(0)))),
            2 => {
                let b = args.pop().unwrap_or(Expr::Const(0.0));
                let a = args.pop().unwrap_or(Expr::Const(0.0));
                Ok(Expr::Sub(Box::new(a), Box::new(b)))
            }
            _ => Err(arity_err("one or two arguments")),
        },
        "/" if args.len() == 2 => {
            let b = args.pop().unwrap_or(Expr::Const(1.0));
            let a = args.pop().unwrap_or(Expr::Const(0.0));
            Ok(Expr::Div(Box::new(a), Box::new(b)))
        }
        "/" => Err(arity_err("two arguments")),
        "pow" => match args.as_slice() {
            [_, Expr::Const(k)] if k.fract() == 0.0 && k.abs() <= f64::from(i32::MAX) => {
                let k = *k as i32;
                Ok(Expr::Pow(Box::new(args.remove(0)), k))
            }
            _ => Err(arity_err("a base and an integer exponent")),
        },
        other => Err(Error::parse(field, format!("unknown operator {other:?}"))),
    }
}

fn parse_atom(atom: &str, at: usize) -> Result<Expr> {
    if let Some(idx) = atom.strip_prefix('x') {
        return idx
            .parse::<usize>()
            .map(Expr::Var)
            .map_err(|_| Error::parse(format!("token {at}"), format!("bad variable {atom:?}")));
    }
    if let Ok(v) = atom.parse::<f64>() {
        return Ok(Expr::Const(v));
    }
    parse_rational(atom)
        .map(|r| Expr::Const(rational_to_f64(&r)))
        .map_err(|m| Error::parse(format!("token {at}"), m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_jet() {
        let m = GenericMap::parse(2, "(* x1 x2)").unwrap();
        let j = m.jet_eval(&[3.0, 5.0], (1, 2)).unwrap();
        assert_eq!((j.value, j.d_i, j.d_j, j.d_ij), (15.0, 5.0, 3.0, 1.0));
    }

    #[test]
    fn linear_map_has_no_mixed_partial() {
        let m = GenericMap::parse(2, "(+ x1 x2)").unwrap();
        assert_eq!(m.jet_eval(&[0.3, -7.0], (1, 2)).unwrap().d_ij, 0.0);
    }

    #[test]
    fn division_by_near_zero_is_flagged() {
        let m = GenericMap::parse(2, "(/ 1 (- x1 x2))").unwrap();
        assert!(matches!(
            m.eval(&[1.0, 1.0]),
            Err(Error::SingularPoint { .. })
        ));
        assert_eq!(m.eval(&[3.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn parse_print_round_trip() {
        let text = "(/ (+ (pow x1 2) x2 -1/2) (- (+ x1 x2)))";
        let m = GenericMap::parse(2, text).unwrap();
        let again = GenericMap::parse(2, &m.to_string()).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.eval(&[2.0, 1.0]).unwrap(), -(4.5 / 3.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GenericMap::parse(2, "(+ x1 x3)").is_err());
        assert!(GenericMap::parse(2, "(+ x0 x1)").is_err());
        assert!(GenericMap::parse(2, "(+ x1 x2").is_err());
        assert!(GenericMap::parse(2, "(pow x1 1.5)").is_err());
        assert!(GenericMap::parse(2, "(% x1 x2)").is_err());
        assert!(GenericMap::parse(2, "x1 x2").is_err());
    }
}
