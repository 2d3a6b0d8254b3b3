// SPDX-License-Identifier: Apache-2.0

use super::ast::CSpan;
use super::{CError, CErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CTok {
    Ident(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct CToken {
    pub tok: CTok,
    pub span: CSpan,
}

const PUNCT: &[&str] = &[
    "<<=", ">>=", "->", "++", "--", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "==", "!=", "<=", ">=", "<<", ">>",
    "&&", "||", "{", "}", "(", ")", "[", "]", ";", ",", "=", "<", ">", "+", "-", "*", "/", "%", "!", "~", "&", "|",
    "^", "?", ":", ".",
];

pub fn tokenize(text: &str) -> Result<Vec<CToken>, CError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let at_line_start = |out: &Vec<CToken>, line: u32| out.last().is_none_or(|t: &CToken| t.span.line < line);
    while i < chars.len() {
        let c = chars[i];
        let span = CSpan { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            col += 2;
            loop {
                if i >= chars.len() {
                    return Err(CError::new(CErrorKind::Syntax, "unterminated comment", span));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    i += 2;
                    col += 2;
                    break;
                }
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        } else if c == '#' && at_line_start(&out, line) {
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            let directive: String = chars[start..i].iter().collect();
            if !directive.trim_start_matches('#').trim_start().starts_with("include") {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, "preprocessor directives are not supported", span));
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += (i - start) as u32;
            let raw: String = chars[start..i].iter().collect();
            let digits = raw.trim_end_matches(['u', 'U', 'l', 'L']);
            let value = if let Some(h) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
                u64::from_str_radix(h, 16)
            } else {
                digits.parse()
            }
            .map_err(|_| CError::new(CErrorKind::Syntax, format!("invalid integer literal `{raw}`"), span))?;
            out.push(CToken { tok: CTok::Int(value), span });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += (i - start) as u32;
            out.push(CToken { tok: CTok::Ident(chars[start..i].iter().collect()), span });
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return Err(CError::new(CErrorKind::Syntax, format!("unexpected character `{c}`"), span));
            };
            i += p.len();
            col += p.len() as u32;
            out.push(CToken { tok: CTok::Punct(p), span });
        }
    }
    out.push(CToken { tok: CTok::Eof, span: CSpan { line, col } });
    Ok(out)
}
