// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::ast::*;
use super::parser::parse_c_expr;
use super::{CError, CErrorKind};

const DEFAULT_HELPERS: &str = include_str!("../../data/helpers.txt");
const MAX_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelperKind {
    Expr,
    Ptr,
    Ghost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Helper {
    pub kind: HelperKind,
    pub name: String,
    pub params: Vec<String>,
    pub body: Option<CExpr>,
}

#[derive(Debug, Clone, Default)]
pub struct HelperTable {
    helpers: BTreeMap<String, Helper>,
}

impl HelperTable {
    pub fn parse(text: &str) -> Result<Self, CError> {
        let mut helpers = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let span = CSpan { line: n as u32 + 1, col: 1 };
            let bad = |m: &str| CError::new(CErrorKind::Syntax, format!("helpers: {m}"), span);
            let (kind, rest) = line.split_once(char::is_whitespace).ok_or_else(|| bad("missing helper kind"))?;
            let kind = match kind {
                "expr" => HelperKind::Expr,
                "ptr" => HelperKind::Ptr,
                "ghost" => HelperKind::Ghost,
                other => return Err(bad(&format!("unknown helper kind `{other}`"))),
            };
            let (sig, body) = match rest.split_once('=') {
                Some((s, b)) => (s.trim(), Some(b.trim())),
                None => (rest.trim(), None),
            };
            let (name, params) = sig
                .strip_suffix(')')
                .and_then(|s| s.split_once('('))
                .ok_or_else(|| bad("expected `name(params)`"))?;
            let params: Vec<String> =
                params.split(',').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect();
            let body = match (kind, body) {
                (HelperKind::Ghost, None) => None,
                (HelperKind::Ghost, Some(_)) => return Err(bad("ghost helpers have no body")),
                (_, None) => return Err(bad("missing `= body`")),
                (_, Some(b)) => Some(parse_c_expr(b).map_err(|e| CError { line: span.line, ..e })?),
            };
            let name = name.trim().to_string();
            helpers.insert(name.clone(), Helper { kind, name, params, body });
        }
        Ok(HelperTable { helpers })
    }

    pub fn get(&self, name: &str) -> Option<&Helper> {
        self.helpers.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.helpers.keys().map(String::as_str)
    }
}

impl HelperTable {
    /// The helper library shipped with the crate.
    pub fn bundled() -> &'static HelperTable {
        use std::sync::OnceLock;
        static TABLE: OnceLock<HelperTable> = OnceLock::new();
        TABLE.get_or_init(|| HelperTable::parse(DEFAULT_HELPERS).expect("bundled helpers parse"))
    }
}

/// Expands every helper call; ghost calls are dropped and recorded.
pub fn inline_helpers(ast: &ImplAst, helpers: &HelperTable) -> Result<ImplAst, CError> {
    let mut out = ast.clone();
    out.body.clear();
    for stmt in &ast.body {
        let s = match stmt {
            CStmt::HelperCall { name, args, span } => match helpers.get(name) {
                Some(h) if h.kind == HelperKind::Ghost => {
                    if h.params.len() != args.len() {
                        return Err(arity_error(h, args.len(), *span));
                    }
                    out.dropped_ghosts.push(name.clone());
                    continue;
                }
                Some(_) => {
                    return Err(CError::new(
                        CErrorKind::UnsupportedConstruct,
                        format!("result of `{name}` is discarded"),
                        *span,
                    ))
                }
                None => return Err(CError::new(CErrorKind::UnknownHelper, format!("unknown helper `{name}`"), *span)),
            },
            CStmt::ErrorCheck { cond, errno, span } => {
                CStmt::ErrorCheck { cond: expand(cond, helpers, 0)?, errno: errno.clone(), span: *span }
            }
            CStmt::Assign { target, op, value, span } => CStmt::Assign {
                target: expand(target, helpers, 0)?,
                op: *op,
                value: expand(value, helpers, 0)?,
                span: *span,
            },
            CStmt::Bind { name, op, value, span } => {
                CStmt::Bind { name: name.clone(), op: *op, value: expand(value, helpers, 0)?, span: *span }
            }
            CStmt::ReturnZero { .. } => stmt.clone(),
        };
        out.body.push(s);
    }
    Ok(out)
}

fn arity_error(h: &Helper, got: usize, span: CSpan) -> CError {
    CError::new(
        CErrorKind::Syntax,
        format!("`{}` takes {} argument(s), got {got}", h.name, h.params.len()),
        span,
    )
}

fn expand(e: &CExpr, helpers: &HelperTable, depth: usize) -> Result<CExpr, CError> {
    Ok(match e {
        CExpr::Int(_) | CExpr::Name(..) => e.clone(),
        CExpr::Call(name, args, span) => {
            let h = helpers
                .get(name)
                .ok_or_else(|| CError::new(CErrorKind::UnknownHelper, format!("unknown helper `{name}`"), *span))?;
            if h.kind == HelperKind::Ghost {
                return Err(CError::new(
                    CErrorKind::UnsupportedConstruct,
                    format!("`{name}` has no value"),
                    *span,
                ));
            }
            if h.params.len() != args.len() {
                return Err(arity_error(h, args.len(), *span));
            }
            if depth >= MAX_DEPTH {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, "helper expansion too deep", *span));
            }
            let args: Vec<CExpr> = args.iter().map(|a| expand(a, helpers, depth)).collect::<Result<_, _>>()?;
            let body = substitute(h.body.as_ref().unwrap(), &h.params, &args);
            expand(&body, helpers, depth + 1)?
        }
        CExpr::Arrow(b, f, s) => CExpr::Arrow(Box::new(expand(b, helpers, depth)?), f.clone(), *s),
        CExpr::Index(b, i, s) => {
            CExpr::Index(Box::new(expand(b, helpers, depth)?), Box::new(expand(i, helpers, depth)?), *s)
        }
        CExpr::Unary(op, a) => CExpr::Unary(*op, Box::new(expand(a, helpers, depth)?)),
        CExpr::Binary(op, a, b) => {
            CExpr::Binary(*op, Box::new(expand(a, helpers, depth)?), Box::new(expand(b, helpers, depth)?))
        }
    })
}

fn substitute(e: &CExpr, params: &[String], args: &[CExpr]) -> CExpr {
    match e {
        CExpr::Name(n, _) => match params.iter().position(|p| p == n) {
            Some(i) => args[i].clone(),
            None => e.clone(),
        },
        CExpr::Int(_) => e.clone(),
        CExpr::Call(n, xs, s) => CExpr::Call(n.clone(), xs.iter().map(|x| substitute(x, params, args)).collect(), *s),
        CExpr::Arrow(b, f, s) => CExpr::Arrow(Box::new(substitute(b, params, args)), f.clone(), *s),
        CExpr::Index(b, i, s) => {
            CExpr::Index(Box::new(substitute(b, params, args)), Box::new(substitute(i, params, args)), *s)
        }
        CExpr::Unary(op, a) => CExpr::Unary(*op, Box::new(substitute(a, params, args))),
        CExpr::Binary(op, a, b) => {
            CExpr::Binary(*op, Box::new(substitute(a, params, args)), Box::new(substitute(b, params, args)))
        }
    }
}
