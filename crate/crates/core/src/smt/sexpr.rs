// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SExprError {
    #[error("unbalanced parentheses in solver output")]
    Unbalanced,
    #[error("unexpected model shape: {0}")]
    Shape(String),
    #[error("cannot parse bitvector literal `{0}`")]
    Literal(String),
}

pub fn parse_all(text: &str) -> Result<Vec<SExpr>, SExprError> {
    let mut stack: Vec<Vec<SExpr>> = vec![vec![]];
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(vec![]);
            }
            ')' => {
                chars.next();
                let done = stack.pop().ok_or(SExprError::Unbalanced)?;
                stack.last_mut().ok_or(SExprError::Unbalanced)?.push(SExpr::List(done));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                chars.next();
                let mut s = String::from("\"");
                for c in chars.by_ref() {
                    s.push(c);
                    if c == '"' {
                        break;
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                for c in chars.by_ref() {
                    if c == '|' {
                        break;
                    }
                    s.push(c);
                }
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SExprError::Unbalanced);
    }
    Ok(stack.pop().unwrap())
}

/// Parses `#x..`, `#b..`, `(_ bvN w)`, `true` and `false`.
pub fn literal_value(e: &SExpr) -> Result<u64, SExprError> {
    let bad = || SExprError::Literal(format!("{e:?}"));
    match e {
        SExpr::Atom(a) if a == "true" => Ok(1),
        SExpr::Atom(a) if a == "false" => Ok(0),
        SExpr::Atom(a) => {
            if let Some(h) = a.strip_prefix("#x") {
                u64::from_str_radix(h, 16).map_err(|_| bad())
            } else if let Some(b) = a.strip_prefix("#b") {
                u64::from_str_radix(b, 2).map_err(|_| bad())
            } else {
                Err(bad())
            }
        }
        SExpr::List(xs) => match xs.as_slice() {
            [SExpr::Atom(u), SExpr::Atom(v), SExpr::Atom(_)] if u == "_" && v.starts_with("bv") => {
                v[2..].parse().map_err(|_| bad())
            }
            _ => Err(bad()),
        },
    }
}

/// Extracts constant assignments from a `(get-model)` response. Accepts both
/// the `(model (define-fun ...) ...)` and bare `((define-fun ...) ...)` forms.
pub fn parse_model(text: &str) -> Result<BTreeMap<String, u64>, SExprError> {
    let mut out = BTreeMap::new();
    for top in parse_all(text)? {
        let SExpr::List(items) = top else { continue };
        let items = match items.first() {
            Some(SExpr::Atom(a)) if a == "model" => &items[1..],
            _ => &items[..],
        };
        for item in items {
            let SExpr::List(parts) = item else {
                return Err(SExprError::Shape(format!("{item:?}")));
            };
            match parts.as_slice() {
                [SExpr::Atom(head), SExpr::Atom(name), SExpr::List(params), _sort, value] if head == "define-fun" => {
                    // Solvers may echo defined helper terms; only constants carry literals.
                    if let (true, Ok(v)) = (params.is_empty(), literal_value(value)) {
                        out.insert(name.clone(), v);
                    }
                }
                _ => return Err(SExprError::Shape(format!("{item:?}"))),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_forms() {
        let v = |s: &str| literal_value(&parse_all(s).unwrap()[0]).unwrap();
        assert_eq!(v("#x00000000000000ff"), 255);
        assert_eq!(v("#b101"), 5);
        assert_eq!(v("(_ bv42 64)"), 42);
        assert_eq!(v("true"), 1);
    }

    #[test]
    fn z3_style_model() {
        let text = "(\n  (define-fun arg_pid () (_ BitVec 64)\n    #x0000000000000002)\n  (define-fun procs_2_ppid () (_ BitVec 64)\n    (_ bv1 64))\n)\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m["arg_pid"], 2);
        assert_eq!(m["procs_2_ppid"], 1);
    }

    #[test]
    fn wrapped_model_and_comments() {
        let text = "(model ; comment\n (define-fun x () (_ BitVec 8) #x07))";
        assert_eq!(parse_model(text).unwrap()["x"], 7);
    }

    #[test]
    fn unbalanced() {
        assert_eq!(parse_all("((a)"), Err(SExprError::Unbalanced));
    }
}
