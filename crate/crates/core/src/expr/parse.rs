use super::{BinOp, Constant, Expr, ExprError, Func, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let v = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                offset: start,
                expected: vec!["number".into()],
                found: format!("`{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((start, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax {
                offset: start,
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
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
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            let literal = matches!(self.peek(), Tok::Num(_))
                && !matches!(self.toks.get(self.pos + 1), Some((_, Tok::Sym('^'))));
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Num(v) if literal && v.is_sign_positive() => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= 64.0 => {
                self.bump();
                let n = v as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
            }
            _ => Err(self.error(&["integer exponent"])),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                let func = match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "sqrt3" => return Ok(Expr::Const(Constant::Sqrt3)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    _ => return Err(ExprError::UnknownIdentifier { name, offset }),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Func(func, Box::new(arg)))
            }
            _ => Err(self.error(&["number", "x", "y", "pi", "sqrt3", "function", "`(`", "`-`"])),
        }
    }
}

/// Parse an expression. Deterministic; never panics on arbitrary input.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1 + * 2") {
            Err(ExprError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(!expected.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x^y"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x^1.5"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x y"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse(""), Err(ExprError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("tan(x)"),
            Err(ExprError::UnknownIdentifier { name: "tan".into(), offset: 0 })
        );
        assert!(matches!(parse("2*z"), Err(ExprError::UnknownIdentifier { offset: 2, .. })));
    }

    #[test]
    fn non_ascii_input_is_an_error_not_a_panic() {
        assert!(parse("x + ü").is_err());
        assert!(parse("√3").is_err());
    }
}
