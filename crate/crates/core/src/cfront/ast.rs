// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CSpan {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CBinOp {
    LogOr,
    LogAnd,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Shl,
    Shr,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CUnOp {
    Not,
    Neg,
    BitNot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CExpr {
    Int(u64),
    Name(String, CSpan),
    Call(String, Vec<CExpr>, CSpan),
    Arrow(Box<CExpr>, String, CSpan),
    Index(Box<CExpr>, Box<CExpr>, CSpan),
    Unary(CUnOp, Box<CExpr>),
    Binary(CBinOp, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a CExpr)) {
        f(self);
        match self {
            CExpr::Int(_) | CExpr::Name(..) => {}
            CExpr::Call(_, args, _) => args.iter().for_each(|a| a.walk(f)),
            CExpr::Arrow(b, _, _) => b.walk(f),
            CExpr::Index(b, i, _) => {
                b.walk(f);
                i.walk(f);
            }
            CExpr::Unary(_, a) => a.walk(f),
            CExpr::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CStmt {
    /// `if (cond) return -ERR;`
    ErrorCheck { cond: CExpr, errno: String, span: CSpan },
    /// A store into kernel state.
    Assign { target: CExpr, op: AssignOp, value: CExpr, span: CSpan },
    /// Assignment to a declared local (scalar or struct pointer).
    Bind { name: String, op: AssignOp, value: CExpr, span: CSpan },
    /// A helper invoked for its effect.
    HelperCall { name: String, args: Vec<CExpr>, span: CSpan },
    ReturnZero { span: CSpan },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CParam {
    pub ty: String,
    pub name: String,
    pub span: CSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DeclType {
    Scalar(String),
    StructPtr(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CDecl {
    pub ty: DeclType,
    pub name: String,
    pub span: CSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImplAst {
    pub name: String,
    pub params: Vec<CParam>,
    pub locals: Vec<CDecl>,
    pub body: Vec<CStmt>,
    /// Spec-invisible helpers removed by inlining.
    pub dropped_ghosts: Vec<String>,
}

impl ImplAst {
    pub fn count(&self, pred: impl Fn(&CStmt) -> bool) -> usize {
        self.body.iter().filter(|s| pred(s)).count()
    }
}
