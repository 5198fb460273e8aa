// Copyright 2026 The slhforge Authors
// SPDX-License-Identifier: Apache-2.0

use super::ast::Span;
use super::{ErrorKind, NetlistError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number { value: f64, imaginary: bool },
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Series,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { value, imaginary } => {
                format!("number `{}{}`", value, if *imaginary { "i" } else { "" })
            }
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Series => "<|",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, NetlistError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal.parse().map_err(|_| NetlistError {
                kind: ErrorKind::Syntax,
                span,
                message: format!("invalid number `{literal}`"),
            })?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_');
            if imaginary {
                i += 1;
            }
            Tok::Number { value, imaginary }
        } else if c == '"' {
            i += 1;
            let content_start = i;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(NetlistError {
                    kind: ErrorKind::Syntax,
                    span,
                    message: "unterminated string literal".into(),
                });
            }
            let s: String = chars[content_start..i].iter().collect();
            i += 1;
            Tok::Str(s)
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '<' if chars.get(i) == Some(&'|') => {
                    i += 1;
                    Tok::Series
                }
                other => {
                    return Err(NetlistError {
                        kind: ErrorKind::Syntax,
                        span,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        };
        col += i - start;
        tokens.push(Token { tok, span });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(tokens)
}
