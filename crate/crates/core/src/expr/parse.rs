use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownFunction(String),
    /// A function name appeared without an argument list.
    MissingArgument(String),
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token {t:?}"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number {s:?}"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function {s:?}"),
            ParseErrorKind::MissingArgument(s) => write!(f, "function {s:?} needs an argument list"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
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

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(v) => alloc::format!("{v}"),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".to_string(),
            Tok::Minus => "-".to_string(),
            Tok::Star => "*".to_string(),
            Tok::Slash => "/".to_string(),
            Tok::Caret => "^".to_string(),
            Tok::LParen => "(".to_string(),
            Tok::RParen => ")".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<alloc::vec::Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = alloc::vec::Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part: e, E, optionally signed, must be followed by a digit
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
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError { kind: ParseErrorKind::InvalidNumber(text.to_string()), offset: start })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), offset: start });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: alloc::vec::Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => ParseError { kind: ParseErrorKind::UnexpectedToken(t.text()), offset: self.offset() },
            None => ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: self.end },
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Arc::new(self.factor()?)));
        }
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if let Some(Tok::LParen) = self.peek() {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError { kind: ParseErrorKind::UnknownFunction(name.clone()), offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Arc::new(arg)));
                }
                if Func::from_name(&name).is_some() {
                    return Err(ParseError { kind: ParseErrorKind::MissingArgument(name), offset });
                }
                if name == "x" {
                    Ok(Expr::X)
                } else {
                    Ok(Expr::Param(Arc::from(name.as_str())))
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses `text` under the expression grammar.
///
/// Precedence from tightest: `^` (right-associative), unary minus, `* /`,
/// `+ -` (left-associative). `x` is the independent variable; every other
/// identifier not followed by `(` is a parameter.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParamEnv;

    fn p(name: &str) -> Arc<Expr> {
        Arc::new(Expr::Param(Arc::from(name)))
    }

    #[test]
    fn variable() {
        assert_eq!(parse("x").unwrap(), Expr::X);
    }

    #[test]
    fn damping_factor_tree() {
        let e = parse("mu*(beta - x^2)").unwrap();
        let expected = Expr::Mul(
            p("mu"),
            Arc::new(Expr::Sub(p("beta"), Arc::new(Expr::Pow(Arc::new(Expr::X), Arc::new(Expr::Const(2.0)))))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn exponential_factor() {
        let e = parse("exp(mu*beta*x/2)").unwrap();
        assert!(matches!(e, Expr::Call(Func::Exp, _)));
        let env = ParamEnv::new().with("mu", 2.0).with("beta", 0.5);
        for &x in &[0.0, 0.3, 1.7, -2.0] {
            let got = e.eval(x, &env).unwrap();
            let want = (2.0f64 * 0.5 * x / 2.0).exp();
            assert!((got - want).abs() <= 1e-15 * want);
        }
    }

    #[test]
    fn precedence() {
        // power binds tighter than unary minus
        assert_eq!(
            parse("-x^2").unwrap(),
            Expr::Neg(Arc::new(Expr::Pow(Arc::new(Expr::X), Arc::new(Expr::Const(2.0)))))
        );
        // power is right associative
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, &ParamEnv::new()).unwrap(), 512.0);
        // subtraction is left associative
        assert_eq!(parse("1-2-3").unwrap().eval(0.0, &ParamEnv::new()).unwrap(), -4.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0, &ParamEnv::new()).unwrap(), 1.0);
        assert_eq!(parse("2*-3").unwrap().eval(0.0, &ParamEnv::new()).unwrap(), -6.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0, &ParamEnv::new()).unwrap(), 0.5);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse("2E+2").unwrap(), Expr::Const(200.0));
        assert_eq!(parse(".25").unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse("x + $").unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::UnexpectedChar('$'), offset: 4 });

        let err = parse("2 * foo(x)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
        assert_eq!(err.offset, 4);

        let err = parse("(x + 1").unwrap_err();
        assert_eq!(err, ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: 6 });

        let err = parse("x x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedToken("x".into()));
        assert_eq!(err.offset, 2);

        assert_eq!(parse("1..2").unwrap_err().kind, ParseErrorKind::InvalidNumber("1..2".into()));
        assert_eq!(parse("sin + 1").unwrap_err().kind, ParseErrorKind::MissingArgument("sin".into()));
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
    }
}
