// SPDX-License-Identifier: Apache-2.0

use super::ast::*;

pub fn print_spec(ast: &SpecAst) -> String {
    let params: Vec<&str> = ast.params.iter().map(|p| p.name.as_str()).collect();
    let mut out = format!("def {}({}):\n", ast.name, params.join(", "));
    for stmt in &ast.body {
        out.push_str("    ");
        match stmt {
            Stmt::Assign { target, value, .. } => {
                out.push_str(&format!("{} = {}", print_expr(target), print_expr(value)));
            }
            Stmt::AugAssign { target, op, value, .. } => {
                let sym = match op {
                    AugOp::Add => "+=",
                    AugOp::Sub => "-=",
                };
                out.push_str(&format!("{} {sym} {}", print_expr(target), print_expr(value)));
            }
            Stmt::Return { values, .. } => {
                let vs: Vec<String> = values.iter().map(print_expr).collect();
                out.push_str(&format!("return {}", vs.join(", ")));
            }
        }
        out.push('\n');
    }
    out
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Unary(UnOp::Not, _) => 3,
        ExprKind::Unary(..) => 11,
        ExprKind::Tuple(_) => 12,
        _ => 12,
    }
}

fn wrap(e: &Expr, paren: bool) -> String {
    let s = print_expr(e);
    if paren {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Name(n) => n.clone(),
        ExprKind::Int { value, hex: true } => format!("{value:#x}"),
        ExprKind::Int { value, hex: false } => value.to_string(),
        ExprKind::Bool(b) => if *b { "True" } else { "False" }.into(),
        ExprKind::Attr(base, attr) => {
            let paren = level(base) < 12 || matches!(base.kind, ExprKind::Int { .. });
            format!("{}.{attr}", wrap(base, paren))
        }
        ExprKind::Index(base, idx) => format!("{}[{}]", wrap(base, level(base) < 12), print_expr(idx)),
        ExprKind::Call(f, args) => {
            let a: Vec<String> = args.iter().map(print_expr).collect();
            format!("{}({})", wrap(f, level(f) < 12), a.join(", "))
        }
        ExprKind::Unary(UnOp::Not, a) => format!("not {}", wrap(a, level(a) < 3)),
        ExprKind::Unary(UnOp::Neg, a) => format!("-{}", wrap(a, level(a) < 11)),
        ExprKind::Unary(UnOp::Invert, a) => format!("~{}", wrap(a, level(a) < 11)),
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let (lp, rp) = if op.is_comparison() { (level(a) <= p, level(b) <= p) } else { (level(a) < p, level(b) <= p) };
            format!("{} {} {}", wrap(a, lp), op.symbol(), wrap(b, rp))
        }
        ExprKind::Tuple(xs) => {
            let items: Vec<String> = xs.iter().map(print_expr).collect();
            if items.len() == 1 {
                format!("({},)", items[0])
            } else {
                format!("({})", items.join(", "))
            }
        }
    }
}
