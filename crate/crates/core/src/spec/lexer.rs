// SPDX-License-Identifier: Apache-2.0

use super::ast::Span;
use super::fault::{FaultKind, SpecFault};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    Int { value: u64, hex: bool },
    Str,
    Newline,
    Op(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest first so that `<<` wins over `<`.
const OPS: &[&str] = &[
    "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "+=", "-=", "->", "(", ")", "[", "]", ",", ".", ":", "=", "<", ">",
    "+", "-", "*", "/", "%", "|", "&", "^", "~", "@", ";",
];

/// Python-flavoured tokenizer. Newlines inside brackets are whitespace;
/// indentation is not significant because a spec has a single flat body.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SpecFault> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut depth = 0i32;
    let err = |line, col, msg: String| SpecFault::new(FaultKind::ParseError, msg, Span::new(line, col));

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                // A line ending in an operator continues onto the next one.
                let dangling = matches!(out.last(), Some(Token { tok: Tok::Op(o), .. }) if !matches!(*o, ")" | "]" | ":"));
                if depth == 0 && !dangling && !matches!(out.last(), None | Some(Token { tok: Tok::Newline, .. })) {
                    out.push(Token { tok: Tok::Newline, span });
                }
                i += 1;
                line += 1;
                col = 1;
            }
            '\\' if chars.get(i + 1) == Some(&'\n') => {
                i += 2;
                line += 1;
                col = 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '"' | '\'' => {
                let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                let quote_len = if triple { 3 } else { 1 };
                let mut j = i + quote_len;
                let (mut l, mut cl) = (line, col + quote_len as u32);
                loop {
                    if j >= chars.len() {
                        return Err(err(span.line, span.col, "unterminated string literal".into()));
                    }
                    if chars[j] == c && (!triple || (chars.get(j + 1) == Some(&c) && chars.get(j + 2) == Some(&c))) {
                        j += quote_len;
                        cl += quote_len as u32;
                        break;
                    }
                    if chars[j] == '\n' {
                        if !triple {
                            return Err(err(span.line, span.col, "unterminated string literal".into()));
                        }
                        l += 1;
                        cl = 1;
                    } else {
                        cl += 1;
                    }
                    j += 1;
                }
                i = j;
                line = l;
                col = cl;
                out.push(Token { tok: Tok::Str, span });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let hex = c == '0' && matches!(chars.get(i + 1), Some('x' | 'X'));
                if hex {
                    i += 2;
                }
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let raw: String = chars[start..i].iter().filter(|c| **c != '_').collect();
                col += (i - start) as u32;
                let parsed = if hex { u64::from_str_radix(&raw[2..], 16) } else { raw.parse::<u64>() };
                let value = parsed.map_err(|_| err(span.line, span.col, format!("invalid integer literal `{raw}`")))?;
                out.push(Token { tok: Tok::Int { value, hex }, span });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += (i - start) as u32;
                out.push(Token { tok: Tok::Name(chars[start..i].iter().collect()), span });
            }
            _ => {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                let Some(op) = OPS.iter().find(|op| rest.starts_with(**op)) else {
                    return Err(err(line, col, format!("unexpected character `{c}`")));
                };
                match *op {
                    "(" | "[" => depth += 1,
                    ")" | "]" => depth -= 1,
                    _ => {}
                }
                advance(op.len(), &mut i, &mut col);
                out.push(Token { tok: Tok::Op(op), span });
            }
        }
    }
    if depth > 0 {
        return Err(err(line, col, "unclosed bracket at end of input".into()));
    }
    if !matches!(out.last(), None | Some(Token { tok: Tok::Newline, .. })) {
        out.push(Token { tok: Tok::Newline, span: Span::new(line, col) });
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_newlines() {
        assert_eq!(
            toks("a <<= b\n"),
            vec![Tok::Name("a".into()), Tok::Op("<<"), Tok::Op("="), Tok::Name("b".into()), Tok::Newline, Tok::Eof]
        );
        assert_eq!(
            toks("f(a,\n  b)\n"),
            vec![
                Tok::Name("f".into()),
                Tok::Op("("),
                Tok::Name("a".into()),
                Tok::Op(","),
                Tok::Name("b".into()),
                Tok::Op(")"),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn literals_and_comments() {
        assert_eq!(
            toks("0x1000 # base\n42"),
            vec![Tok::Int { value: 0x1000, hex: true }, Tok::Newline, Tok::Int { value: 42, hex: false }, Tok::Newline, Tok::Eof]
        );
        assert_eq!(toks("\"\"\"doc\nstring\"\"\"\n"), vec![Tok::Str, Tok::Newline, Tok::Eof]);
    }

    #[test]
    fn spans_track_lines() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!((t[2].span.line, t[2].span.col), (2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(tokenize("a $ b").is_err());
        assert!(tokenize("f(a").is_err());
    }
}
