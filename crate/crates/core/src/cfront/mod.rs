// SPDX-License-Identifier: Apache-2.0

//! Frontend for the restricted C subset used by syscall implementations.

pub mod ast;
mod helpers;
pub mod ir;
mod lexer;
mod lower;
mod parser;

use std::fmt;

use serde::Serialize;

pub use ast::{CSpan, CStmt, ImplAst};
pub use helpers::{inline_helpers, Helper, HelperKind, HelperTable};
pub use ir::{Expr, IrFunction, IrItem};
pub use lower::{field_is_signed, lower_to_ir};
pub use parser::{parse_c_expr, parse_impl};

use crate::kernel::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CErrorKind {
    Syntax,
    UnsupportedConstruct,
    UnknownHelper,
    Domain,
    Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct CError {
    pub kind: CErrorKind,
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl CError {
    pub fn new(kind: CErrorKind, message: impl Into<String>, span: CSpan) -> Self {
        CError { kind, message: message.into(), line: span.line, col: span.col }
    }
}

impl fmt::Display for CError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}:{}: {}", self.kind, self.line, self.col, self.message)
    }
}

/// Parse, inline with the bundled helpers, and lower.
pub fn compile_impl(text: &str, kernel: &Kernel) -> Result<IrFunction, CError> {
    let ast = parse_impl(text)?;
    let inlined = inline_helpers(&ast, HelperTable::bundled())?;
    lower_to_ir(&inlined, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET_RUNNABLE: &str = "int sys_set_runnable(pid_t pid)
{
    struct proc *proc;

    if (!is_pid_valid(pid))
        return -ESRCH;
    proc = get_proc(pid);
    if (proc->ppid != current)
        return -EACCES;
    if (proc->state != PROC_EMBRYO)
        return -EINVAL;
    proc->state = PROC_RUNNABLE;
    proc_ready_add(proc);
    return 0;
}
";

    fn kernel() -> Kernel {
        Kernel::default()
    }

    #[test]
    fn statement_shape() {
        let ast = parse_impl(SET_RUNNABLE).unwrap();
        assert_eq!(ast.count(|s| matches!(s, CStmt::ErrorCheck { .. })), 3);
        assert_eq!(ast.count(|s| matches!(s, CStmt::Assign { .. })), 1);
        assert_eq!(ast.count(|s| matches!(s, CStmt::HelperCall { .. })), 1);
        assert_eq!(ast.count(|s| matches!(s, CStmt::Bind { .. })), 1);
        assert!(matches!(ast.body.last(), Some(CStmt::ReturnZero { .. })));
    }

    #[test]
    fn inline_is_idempotent() {
        let ast = parse_impl(SET_RUNNABLE).unwrap();
        let once = inline_helpers(&ast, HelperTable::bundled()).unwrap();
        let twice = inline_helpers(&once, HelperTable::bundled()).unwrap();
        assert_eq!(once.body, twice.body);
        assert_eq!(once.dropped_ghosts, vec!["proc_ready_add".to_string()]);
    }

    #[test]
    fn lowers_to_checks_and_updates() {
        let ir = compile_impl(SET_RUNNABLE, &kernel()).unwrap();
        let checks = ir.items.iter().filter(|i| matches!(i, IrItem::Check { .. })).count();
        assert_eq!(checks, 3);
        assert_eq!(ir.items.len(), 4);
        assert_eq!(ir.ghosts, vec!["proc_ready_add"]);
    }

    fn kind_of(src: &str) -> CErrorKind {
        compile_impl(src, &kernel()).unwrap_err().kind
    }

    #[test]
    fn rejects_outside_subset() {
        let wrap = |body: &str| format!("int f(pid_t pid) {{ struct proc *p; uint64_t x; {body} return 0; }}");
        assert_eq!(kind_of(&wrap("while (pid) return -EINVAL;")), CErrorKind::UnsupportedConstruct);
        assert_eq!(kind_of(&wrap("x = (uint64_t)pid;")), CErrorKind::UnsupportedConstruct);
        assert_eq!(kind_of(&wrap("x = *pid;")), CErrorKind::UnsupportedConstruct);
        assert_eq!(kind_of(&wrap("x = pid % 2;")), CErrorKind::UnsupportedConstruct);
        assert_eq!(kind_of(&wrap("x = pid / 2;")), CErrorKind::UnsupportedConstruct);
        assert_eq!(kind_of(&wrap("x = frobnicate(pid);")), CErrorKind::UnknownHelper);
        assert_eq!(kind_of(&wrap("p = get_proc(pid); p->bogus = 1;")), CErrorKind::Domain);
        assert_eq!(kind_of(&wrap("if (pid) return -ENOTREAL;")), CErrorKind::Domain);
        assert_eq!(kind_of(&wrap("if (pid) { x = 1; }")), CErrorKind::UnsupportedConstruct);
    }

    #[test]
    fn stale_local_is_rejected() {
        let src = "int f(pn_t pn) {
            struct page *page; pid_t owner;
            page = get_page(pn);
            owner = page->owner;
            page->owner = 0;
            page->refcnt = owner;
            return 0;
        }";
        let e = compile_impl(src, &kernel()).unwrap_err();
        assert_eq!(e.kind, CErrorKind::UnsupportedConstruct);
        assert!(e.message.contains("owner"));
    }

    #[test]
    fn signedness_follows_declared_types() {
        let ir = compile_impl("int f(off_t off, size_t n) { if (off < 0) return -EINVAL; if (n < 3) return -EINVAL; return 0; }", &kernel())
            .unwrap();
        let ops: Vec<_> = ir
            .items
            .iter()
            .map(|i| match i {
                IrItem::Check { fail: Expr::Cmp(op, ..), .. } => *op,
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        use crate::smt::CmpOp;
        assert_eq!(ops, vec![CmpOp::Slt, CmpOp::Ult]);
    }

    #[test]
    fn helper_file_errors() {
        assert!(HelperTable::parse("macro x() = 1").is_err());
        assert!(HelperTable::parse("ghost g() = 1").is_err());
        assert!(HelperTable::parse("expr f(a) = a +").is_err());
        let t = HelperTable::parse("expr twice(a) = a + a\n").unwrap();
        assert_eq!(t.get("twice").unwrap().params, vec!["a"]);
    }
}
