//! Scalar expression language used by scenario files.
//!
//! Grammar (EBNF), whitespace ignored:
//!
//! ```text
//! expr   = term  { ("+" | "-") term } ;
//! term   = unary { ("*" | "/") unary } ;
//! unary  = "-" unary | power ;
//! power  = atom [ "^" [ "-" ] INTEGER ] ;
//! atom   = NUMBER | "x" | "y" | "pi" | "sqrt3"
//!        | ("sin" | "cos" | "sqrt" | "abs") "(" expr ")"
//!        | "(" expr ")" ;
//! NUMBER = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ]
//!        | "." digit { digit } [ exponent ] ;
//! ```
//!
//! Exponents are integer literals so that differentiation never needs `log`.

pub(crate) mod diff;
mod parse;

pub(crate) use diff as diff_helpers;

use std::fmt;

use thiserror::Error;

pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected one of [{}], found {found}", .expected.join(", "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("`{0}` is not differentiable")]
    NotDifferentiable(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    Sqrt3,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::Sqrt3 => 3f64.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn x() -> Self {
        Expr::Var(Var::X)
    }

    pub fn y() -> Self {
        Expr::Var(Var::Y)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Const(c) => c.value(),
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Func(f, a) => {
                let v = a.eval(x, y)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Abs => v.abs(),
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(ExprError::SqrtOfNegative(v));
                        }
                        v.sqrt()
                    }
                }
            }
            Expr::Bin(op, a, b) => {
                let l = a.eval(x, y)?;
                let r = b.eval(x, y)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(ExprError::DivisionByZero);
                        }
                        l / r
                    }
                }
            }
            Expr::Pow(a, n) => {
                let v = a.eval(x, y)?;
                if *n < 0 && v == 0.0 {
                    return Err(ExprError::DivisionByZero);
                }
                v.powi(*n)
            }
        })
    }

    pub fn eval_at(&self, p: crate::geometry::Vec2) -> Result<f64, ExprError> {
        self.eval(p.x, p.y)
    }

    /// Symbolic partial derivative.
    pub fn differentiate(&self, var: Var) -> Result<Expr, ExprError> {
        diff::derivative(self, var)
    }

    /// True if the expression does not reference `x` or `y`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.depends_on(var),
            Expr::Bin(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    pub fn contains_abs(&self) -> bool {
        match self {
            Expr::Func(Func::Abs, _) => true,
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.contains_abs(),
            Expr::Bin(_, a, b) => a.contains_abs() || b.contains_abs(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::Sqrt3) => f.write_str("sqrt3"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let own = self.precedence();
                write_operand(f, a, a.precedence() < own)?;
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                f.write_str(sym)?;
                write_operand(f, b, b.precedence() <= own)
            }
            Expr::Pow(a, n) => {
                write_operand(f, a, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, y: f64) -> f64 {
        parse(s).unwrap().eval(x, y).unwrap()
    }

    #[test]
    fn stripe_component_at_origin() {
        let v = ev("(y-2)*(y-1)*(-3/5+sin(x)^2)", 0.0, 0.0);
        assert!((v - (-6.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn basic_evaluations() {
        assert_eq!(ev("x", 2.5, 0.0), 2.5);
        assert!((ev("sin(x)^2", std::f64::consts::FRAC_PI_2, 0.0) - 1.0).abs() < 1e-15);
        assert!((ev("cos(x)*(-sqrt(3)*cos(y)+sin(y))", 0.0, 0.0) + 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(ev("2^3", 7.0, -1.0), 8.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("10-4-3", 0.0, 0.0), 3.0);
        assert_eq!(ev("12/3/2", 0.0, 0.0), 2.0);
        assert_eq!(ev("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("sqrt3*sqrt3", 0.0, 0.0).round(), 3.0);
    }

    #[test]
    fn division_by_zero_is_an_eval_error() {
        let e = parse("1/0").unwrap();
        assert_eq!(e.eval(0.0, 0.0), Err(ExprError::DivisionByZero));
        assert!(matches!(parse("sqrt(x)").unwrap().eval(-1.0, 0.0), Err(ExprError::SqrtOfNegative(_))));
    }

    #[test]
    fn print_parse_fixed_point() {
        for s in [
            "(y-2)*(y-1)*(-3/5+sin(x)^2)",
            "--3",
            "(-3)^2",
            "a",
            "x-(y-x)",
            "x/(y*x)",
            "-(x+y)^-2",
            "1e-7*x",
            "cos(x)*(-sqrt3*cos(y)+sin(y))",
        ] {
            let Ok(e) = parse(s) else { continue };
            let p1 = e.to_string();
            let p2 = parse(&p1).unwrap().to_string();
            assert_eq!(p1, p2, "source {s}");
        }
    }

    #[test]
    fn derivative_examples() {
        let e = parse("sin(x)^2").unwrap();
        let d = e.differentiate(Var::X).unwrap();
        let x = 0.3;
        assert!((d.eval(x, 0.0).unwrap() - 2.0 * x.sin() * x.cos()).abs() < 1e-14);
        let dy = parse("y").unwrap().differentiate(Var::Y).unwrap();
        assert_eq!(dy, Expr::Num(1.0));
        assert!(matches!(
            parse("abs(x)").unwrap().differentiate(Var::X),
            Err(ExprError::NotDifferentiable("abs"))
        ));
    }

    #[test]
    fn middle_component_derivative_matches_central_difference() {
        let e = parse("(y-2)*(y-1)*(-3/5+sin(x)^2)").unwrap();
        let d = e.differentiate(Var::X).unwrap();
        let h = 1e-5;
        let cd = (e.eval(0.5 + h, 0.5).unwrap() - e.eval(0.5 - h, 0.5).unwrap()) / (2.0 * h);
        assert!((d.eval(0.5, 0.5).unwrap() - cd).abs() < 1e-6);
    }
}
