//! Recursive-descent parser for polynomial germ expressions.
//!
//! Grammar:
//!
//! ```text
//! expression := term (('+' | '-') term)*
//! term       := factor ('*' factor)*
//! factor     := ('+' | '-') factor | base ('^' uint)?
//! base       := var | number | '(' expression ')'
//! ```

use crate::error::{Error, Result};
use crate::jets::Jet;

use super::var_index;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let v = lit
                    .parse::<f64>()
                    .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{lit}`") })?;
                out.push((start, Token::Num(v)));
                continue;
            }
            _ if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
                continue;
            }
            _ => return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{c}`") }),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    m: usize,
    order: u32,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].1
    }

    fn pos(&self) -> usize {
        self.tokens[self.cursor].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.cursor].1.clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        t
    }

    fn nvars(&self) -> usize {
        2 * self.m - 1
    }

    fn expression(&mut self) -> Result<Jet<f64>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Token::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Jet<f64>> {
        let mut acc = self.factor()?;
        while *self.peek() == Token::Star {
            self.bump();
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Jet<f64>> {
        match self.peek() {
            Token::Minus => {
                self.bump();
                return Ok(-&self.factor()?);
            }
            Token::Plus => {
                self.bump();
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let k = match self.bump() {
            Token::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => v as u32,
            _ => return Err(Error::Syntax { pos, msg: "exponent must be an unsigned integer".into() }),
        };
        let mut out = Jet::one(self.nvars(), self.order);
        for _ in 0..k {
            out = &out * &base;
        }
        Ok(out)
    }

    fn base(&mut self) -> Result<Jet<f64>> {
        let pos = self.pos();
        match self.bump() {
            Token::Num(v) => Ok(Jet::constant(self.nvars(), self.order, v)),
            Token::Ident(name) => match var_index(self.m, &name) {
                Some(i) => Ok(Jet::var(self.nvars(), self.order, i)),
                None => Err(Error::UnknownVariable { name, pos }),
            },
            Token::LParen => {
                let inner = self.expression()?;
                let close = self.pos();
                match self.bump() {
                    Token::RParen => Ok(inner),
                    _ => Err(Error::Syntax { pos: close, msg: "expected `)`".into() }),
                }
            }
            Token::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }
}

/// Expands an expression into a jet in the `2m-1` germ variables.
pub fn parse_expression(text: &str, m: usize, order: u32) -> Result<Jet<f64>> {
    if m < 2 {
        return Err(Error::InvalidGerm(format!("m = {m}, need m >= 2")));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, cursor: 0, m, order };
    let jet = p.expression()?;
    if *p.peek() != Token::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(jet)
}
