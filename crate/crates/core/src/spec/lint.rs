// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kernel::{Field, MapKind};

use super::ast::*;
use super::fault::FaultKind;
use super::inventory::Inventory;
use super::parser::{parse_spec, DUAL_ACCESS_MSG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub category: u8,
    pub severity: Severity,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// Guide categories a static lint can detect.
pub const LINT_CATEGORIES: [u8; 6] = [3, 4, 5, 6, 11, 14];

fn finding(category: u8, severity: Severity, span: Span, message: impl Into<String>) -> LintFinding {
    LintFinding { category, severity, line: span.line, col: span.col, message: message.into() }
}

/// Lints source text. A parse failure caused by a parenthesized write is
/// reported as a map-field finding; other parse failures produce none.
pub fn lint_source(text: &str, inventory: &Inventory) -> Vec<LintFinding> {
    match parse_spec(text) {
        Ok(ast) => lint_spec(&ast, inventory),
        Err(f) if f.kind == FaultKind::ParseError && f.message == DUAL_ACCESS_MSG => {
            vec![finding(4, Severity::Error, Span::new(f.line, f.col), "map field written with parentheses; use brackets")]
        }
        Err(_) => vec![],
    }
}

pub fn lint_spec(ast: &SpecAst, inventory: &Inventory) -> Vec<LintFinding> {
    let state = ast.state_param().unwrap_or("old").to_string();
    let mut bound: BTreeSet<String> = ast.params.iter().map(|p| p.name.clone()).collect();
    for s in &ast.body {
        if let Stmt::Assign { target: Expr { kind: ExprKind::Name(n), .. }, .. } = s {
            bound.insert(n.clone());
        }
    }
    for n in ["dt", "z3", "util"] {
        bound.insert(n.to_string());
    }
    let mut out = Vec::new();

    for stmt in &ast.body {
        match stmt {
            Stmt::Assign { target, value, span } | Stmt::AugAssign { target, value, span, .. } => {
                if !matches!(target.kind, ExprKind::Name(_)) {
                    if root_name(target) == Some(state.as_str()) {
                        out.push(finding(
                            3,
                            Severity::Error,
                            *span,
                            format!("write to `{state}`; updates go to the copy `new = {state}.copy()`"),
                        ));
                    }
                    lint_target_indices(target, &bound, inventory, &mut out);
                }
                lint_expr(value, &bound, inventory, &mut out);
            }
            Stmt::Return { values, span } => {
                for v in values {
                    lint_expr(v, &bound, inventory, &mut out);
                }
                let wrapped = values.get(1).is_some_and(|v| match &v.kind {
                    ExprKind::Call(f, _) => f.dotted_name().as_deref() == Some("util.If"),
                    _ => false,
                });
                if values.len() != 2 {
                    out.push(finding(3, Severity::Error, *span, "return `cond, util.If(cond, new, old)`"));
                } else if !wrapped {
                    out.push(finding(
                        3,
                        Severity::Warning,
                        values[1].span,
                        "post-state should be returned as `util.If(cond, new, old)`",
                    ));
                }
            }
        }
    }
    out.sort_by_key(|a| (a.line, a.col, a.category));
    out.dedup();
    out
}

fn root_name(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Name(n) => Some(n),
        ExprKind::Attr(b, _) | ExprKind::Index(b, _) | ExprKind::Call(b, _) => root_name(b),
        _ => None,
    }
}

fn lint_target_indices(t: &Expr, bound: &BTreeSet<String>, inv: &Inventory, out: &mut Vec<LintFinding>) {
    match &t.kind {
        ExprKind::Index(b, i) => {
            lint_expr(i, bound, inv, out);
            lint_target_indices(b, bound, inv, out);
        }
        ExprKind::Attr(b, attr) => {
            check_ptr_name(attr, t.span, out);
            lint_target_indices(b, bound, inv, out);
        }
        _ => {}
    }
}

fn check_ptr_name(attr: &str, span: Span, out: &mut Vec<LintFinding>) {
    if attr.contains("ptr") && Field::lookup(None, attr).is_none() {
        let known: Vec<&str> = Field::ALL.iter().map(|f| f.name()).filter(|n| n.contains("ptr")).collect();
        out.push(finding(
            11,
            Severity::Error,
            span,
            format!("unknown state pointer `{attr}`; the pointer fields are: {}", known.join(", ")),
        ));
    }
}

fn is_constant_like(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
        && name.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn lint_expr(e: &Expr, bound: &BTreeSet<String>, inv: &Inventory, out: &mut Vec<LintFinding>) {
    e.walk(&mut |x| match &x.kind {
        ExprKind::Name(n) if !bound.contains(n) && is_constant_like(n) => {
            out.push(finding(6, Severity::Error, x.span, format!("bare constant `{n}`; constants use the dt namespace")));
        }
        ExprKind::Binary(op @ (BinOp::And | BinOp::Or), ..) => {
            let z = if *op == BinOp::And { "z3.And" } else { "z3.Or" };
            out.push(finding(5, Severity::Error, x.span, format!("Python `{}` on Z3 terms; use {z}", op.symbol())));
        }
        ExprKind::Unary(UnOp::Not, _) => {
            out.push(finding(5, Severity::Error, x.span, "Python `not` on Z3 terms; use z3.Not"));
        }
        ExprKind::Binary(op @ (BinOp::Div | BinOp::Mod | BinOp::Shr | BinOp::BitXor), ..) => {
            out.push(finding(
                5,
                Severity::Error,
                x.span,
                format!("operator `{}` has signed or unsupported semantics on bitvectors", op.symbol()),
            ));
        }
        ExprKind::Attr(_, attr) => check_ptr_name(attr, x.span, out),
        ExprKind::Index(b, _) => {
            if let ExprKind::Attr(_, f) = &b.kind {
                if matches!(f.as_str(), "data" | "offs") {
                    out.push(finding(4, Severity::Error, x.span, format!("map field `{f}` is read with parentheses: `{f}(i)`")));
                }
            }
        }
        ExprKind::Call(f, _) => {
            if let ExprKind::Attr(_, m) = &f.kind {
                if MapKind::from_name(m).is_some() {
                    out.push(finding(4, Severity::Error, x.span, format!("`{m}` is indexed with brackets: `{m}[i]`")));
                }
            }
            if let Some(name) = f.dotted_name() {
                let namespaced = name.starts_with("z3.") || name.starts_with("util.");
                if namespaced && !inv.contains(&name) {
                    out.push(finding(5, Severity::Error, x.span, format!("`{name}` is not part of the available Z3 API")));
                } else if !name.contains('.') && !bound.contains(&name) && !inv.contains(&name) {
                    out.push(finding(14, Severity::Error, x.span, format!("`{name}` is not an available helper")));
                }
            }
        }
        _ => {}
    });
}
