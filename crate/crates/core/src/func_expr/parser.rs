//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' integer)?
//! atom  := number | 't' | 's' | 'pi' | fn '(' expr ')'
//!        | 'ind' '(' expr ',' expr [',' ('t' | 's')] ')' | '(' expr ')'
//! fn    := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Division is accepted only by a nonzero constant and folds into a scale.
//! Products with a constant fold into `Scale`, constant subtrees fold into
//! `Const`. `ind` bounds must be constant; `inf` is accepted there only.

use super::{FuncExpr, Var};
use crate::domain_sets::LebesgueSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Lexer> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit()) {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{text}`") })?;
            toks.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            toks.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allow_inf: bool,
}

fn mul_fold(a: FuncExpr, b: FuncExpr) -> FuncExpr {
    match (a, b) {
        (FuncExpr::Const(x), FuncExpr::Const(y)) => FuncExpr::Const(x * y),
        (FuncExpr::Const(c), e) | (e, FuncExpr::Const(c)) => match e {
            FuncExpr::Scale(d, inner) => FuncExpr::Scale(c * d, inner),
            other => FuncExpr::Scale(c, Box::new(other)),
        },
        (a, b) => FuncExpr::mul(a, b),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.at(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<FuncExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = match (lhs, rhs) {
                        (FuncExpr::Const(a), FuncExpr::Const(b)) => FuncExpr::Const(a + b),
                        (a, b) => FuncExpr::add(a, b),
                    };
                }
                Tok::Op('-') => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = match (lhs, rhs) {
                        (FuncExpr::Const(a), FuncExpr::Const(b)) => FuncExpr::Const(a - b),
                        (a, b) => FuncExpr::sub(a, b),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<FuncExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = mul_fold(lhs, rhs);
                }
                Tok::Op('/') => {
                    let pos = self.at();
                    self.bump();
                    match self.unary()? {
                        FuncExpr::Const(c) if c != 0.0 && c.is_finite() => lhs = mul_fold(lhs, FuncExpr::Const(1.0 / c)),
                        _ => return Err(Error::Syntax { pos, msg: "division is only allowed by a nonzero constant".into() }),
                    }
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<FuncExpr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let e = self.unary()?;
            return Ok(mul_fold(FuncExpr::Const(-1.0), e));
        }
        self.power()
    }

    fn power(&mut self) -> Result<FuncExpr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let pos = self.at();
            match self.bump() {
                Tok::Num(n) if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => {
                    let n = n as u32;
                    return Ok(match base {
                        FuncExpr::Const(c) => FuncExpr::Const(c.powi(n as i32)),
                        b => FuncExpr::pow(b, n),
                    });
                }
                _ => return Err(Error::Syntax { pos, msg: "exponent must be a nonnegative integer literal".into() }),
            }
        }
        Ok(base)
    }

    fn constant_arg(&mut self) -> Result<f64> {
        let pos = self.at();
        let saved = self.allow_inf;
        self.allow_inf = true;
        let e = self.expr();
        self.allow_inf = saved;
        match e? {
            FuncExpr::Const(c) if !c.is_nan() => Ok(c),
            _ => Err(Error::Syntax { pos, msg: "indicator bounds must be constants".into() }),
        }
    }

    fn atom(&mut self) -> Result<FuncExpr> {
        let pos = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(FuncExpr::Const(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(FuncExpr::t()),
                "s" => Ok(FuncExpr::s()),
                "pi" => Ok(FuncExpr::Const(std::f64::consts::PI)),
                "inf" if self.allow_inf => Ok(FuncExpr::Const(f64::INFINITY)),
                "sin" | "cos" | "exp" => {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(match (name.as_str(), arg) {
                        ("sin", FuncExpr::Const(c)) => FuncExpr::Const(c.sin()),
                        ("cos", FuncExpr::Const(c)) => FuncExpr::Const(c.cos()),
                        ("exp", FuncExpr::Const(c)) => FuncExpr::Const(c.exp()),
                        ("sin", a) => FuncExpr::sin(a),
                        ("cos", a) => FuncExpr::cos(a),
                        (_, a) => FuncExpr::exp(a),
                    })
                }
                "ind" => {
                    self.expect('(')?;
                    let lo = self.constant_arg()?;
                    self.expect(',')?;
                    let hi = self.constant_arg()?;
                    let mut var = Var::T;
                    if *self.peek() == Tok::Op(',') {
                        self.bump();
                        let vpos = self.at();
                        var = match self.bump() {
                            Tok::Ident(v) if v == "t" => Var::T,
                            Tok::Ident(v) if v == "s" => Var::S,
                            _ => return Err(Error::Syntax { pos: vpos, msg: "expected `t` or `s`".into() }),
                        };
                    }
                    self.expect(')')?;
                    if lo > hi {
                        return Err(Error::Syntax { pos, msg: format!("empty indicator interval [{lo}, {hi}]") });
                    }
                    Ok(FuncExpr::Indicator { var, set: LebesgueSet::interval(lo, hi)? })
                }
                _ => Err(Error::UnknownIdentifier { name, pos }),
            },
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(Error::Syntax { pos, msg: format!("unexpected `{c}`") }),
        }
    }
}

/// Parses an expression in the variables `t` and `s`.
pub fn parse_expr(src: &str) -> Result<FuncExpr> {
    let lexer = lex(src)?;
    let mut p = Parser { toks: lexer.toks, pos: 0, allow_inf: false };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax { pos: p.at(), msg: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expr("sin(t") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_expr("2 + foo(t)") {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "foo");
                assert_eq!(pos, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("t/s").is_err());
        assert!(parse_expr("t/0").is_err());
        assert!(parse_expr("t^1.5").is_err());
        assert!(parse_expr("ind(t,1)").is_err());
        assert!(parse_expr("inf").is_err());
        assert!(parse_expr("t t").is_err());
    }

    #[test]
    fn folding() {
        assert_eq!(parse_expr("2*3").unwrap(), FuncExpr::Const(6.0));
        assert_eq!(parse_expr("-t").unwrap(), FuncExpr::scale(-1.0, FuncExpr::t()));
        assert_eq!(parse_expr("2*t*3").unwrap(), FuncExpr::scale(6.0, FuncExpr::t()));
        assert_eq!(parse_expr("2^3").unwrap(), FuncExpr::Const(8.0));
        assert_eq!(parse_expr("1e-3").unwrap(), FuncExpr::Const(1e-3));
        let e = parse_expr("-t^2").unwrap();
        assert_eq!(e.eval(3.0), -9.0);
        let ind = parse_expr("ind(0, inf)").unwrap();
        assert_eq!(ind.eval(1e300), 1.0);
    }
}
