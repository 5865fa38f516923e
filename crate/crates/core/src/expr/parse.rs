use std::fmt;

use num_complex::Complex64;

use super::{ComplexExpr, Func};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    NonIntegerExponent,
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error at offset {}: {msg}", self.offset),
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at offset {}", self.offset)
            }
            ParseErrorKind::NonIntegerExponent => {
                write!(f, "exponent at offset {} is not an integer constant", self.offset)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
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
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number {x}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn syntax(offset: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax(msg.into()),
        offset,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k];
        let start = k;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                k += 1;
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
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                if k < bytes.len() && bytes[k] == b'.' {
                    k += 1;
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                }
                if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                    let mut j = k + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        k = j;
                    } else {
                        return Err(syntax(j, "malformed exponent in number"));
                    }
                }
                let text = &src[start..k];
                let x: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                if !x.is_finite() {
                    return Err(syntax(start, format!("number `{text}` overflows")));
                }
                out.push((Tok::Num(x), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                    k += 1;
                }
                out.push((Tok::Ident(src[start..k].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
        k += 1;
    }
    out.push((Tok::End, src.len()));
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
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", describe(&want), describe(self.peek())),
            ))
        }
    }

    fn expr(&mut self) -> Result<ComplexExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ComplexExpr::add(&lhs, &rhs);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ComplexExpr::sub(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ComplexExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = ComplexExpr::mul(&lhs, &rhs);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = ComplexExpr::div(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ComplexExpr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let a = self.unary()?;
                Ok(ComplexExpr::neg(&a))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ComplexExpr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        let n = exponent
            .as_lit()
            .filter(|c| c.im == 0.0 && c.re.fract() == 0.0)
            .filter(|c| c.re >= i32::MIN as f64 && c.re <= i32::MAX as f64)
            .map(|c| c.re as i32)
            .ok_or(ParseError {
                kind: ParseErrorKind::NonIntegerExponent,
                offset: at,
            })?;
        Ok(ComplexExpr::pow(&base, n))
    }

    fn primary(&mut self) -> Result<ComplexExpr, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(x) => Ok(ComplexExpr::real(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(ComplexExpr::z()),
                "zbar" => Ok(ComplexExpr::zbar()),
                "i" => Ok(ComplexExpr::lit(Complex64::new(0.0, 1.0))),
                other => match Func::from_name(other) {
                    Some(f) => {
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(ComplexExpr::call(f, &arg))
                    }
                    None => Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        offset: at,
                    }),
                },
            },
            other => Err(syntax(at, format!("expected an operand, found {}", describe(&other)))),
        }
    }
}

/// Parses an expression in `z` and `zbar`.
///
/// Precedence from loosest to tightest: `+ -`, `* /`, unary minus, `^`.
/// `^` is right-associative and its right operand must fold to an integer.
pub fn parse(source: &str) -> Result<ComplexExpr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.offset(),
            format!("unexpected {} after expression", describe(p.peek())),
        ));
    }
    Ok(e)
}
