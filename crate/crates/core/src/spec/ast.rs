// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

/// Source location. Two spans always compare equal so that ASTs can be
/// compared structurally across reformatting.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    BitOr,
    BitXor,
    BitAnd,
    Shl,
    Shr,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::BitAnd => "&",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }

    /// Python binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 4,
            BinOp::BitOr => 5,
            BinOp::BitXor => 6,
            BinOp::BitAnd => 7,
            BinOp::Shl | BinOp::Shr => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 10,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
    Invert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Name(String),
    Int { value: u64, hex: bool },
    Bool(bool),
    Attr(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Tuple(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// `z3.And` for `Attr(Name(z3), And)`, `is_pid_valid` for a bare name.
    pub fn dotted_name(&self) -> Option<String> {
        match &self.kind {
            ExprKind::Name(n) => Some(n.clone()),
            ExprKind::Attr(base, attr) => base.dotted_name().map(|b| format!("{b}.{attr}")),
            _ => None,
        }
    }

    /// Pre-order walk over every subexpression.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Name(_) | ExprKind::Int { .. } | ExprKind::Bool(_) => {}
            ExprKind::Attr(b, _) => b.walk(f),
            ExprKind::Index(b, i) => {
                b.walk(f);
                i.walk(f);
            }
            ExprKind::Call(c, args) => {
                c.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::Unary(_, a) => a.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Tuple(xs) => xs.iter().for_each(|a| a.walk(f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign { target: Expr, value: Expr, span: Span },
    AugAssign { target: Expr, op: AugOp, value: Expr, span: Span },
    Return { values: Vec<Expr>, span: Span },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Assign { span, .. } | Stmt::AugAssign { span, .. } | Stmt::Return { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub span: Span,
}

/// A parsed specification: one `def` whose first parameter binds the
/// pre-state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecAst {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl SpecAst {
    pub fn state_param(&self) -> Option<&str> {
        self.params.first().map(|p| p.name.as_str())
    }

    pub fn arg_names(&self) -> Vec<&str> {
        self.params.iter().skip(1).map(|p| p.name.as_str()).collect()
    }

    /// The statement that copies the pre-state, if any.
    pub fn copy_stmt(&self) -> Option<&Stmt> {
        self.body.iter().find(|s| matches!(s, Stmt::Assign { value, .. } if is_copy_call(value)))
    }

    /// Assignments whose target is not a plain local name.
    pub fn writes(&self) -> Vec<&Stmt> {
        self.body
            .iter()
            .filter(|s| match s {
                Stmt::Assign { target, .. } => !matches!(target.kind, ExprKind::Name(_)),
                Stmt::AugAssign { .. } => true,
                Stmt::Return { .. } => false,
            })
            .collect()
    }

    pub fn return_stmt(&self) -> Option<&Stmt> {
        self.body.iter().rev().find(|s| matches!(s, Stmt::Return { .. }))
    }
}

pub fn is_copy_call(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Call(f, args) if args.is_empty() => matches!(&f.kind, ExprKind::Attr(_, m) if m == "copy"),
        _ => false,
    }
}
