// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{mask, Constant, Field, Kernel, MapKind};
use crate::smt::{BvOp, CmpOp};

use super::ast::*;
use super::ir::{Expr, IrFunction, IrItem};
use super::{CError, CErrorKind};

const SIGNED_TYPES: &[&str] = &["int", "long", "pid_t", "fd_t", "ssize_t", "off_t", "int64_t"];

/// Signedness of a field as declared in the kernel's C structs.
pub fn field_is_signed(f: Field) -> bool {
    matches!(f, Field::Current | Field::ProcState | Field::ProcPpid | Field::ProcIpcFrom | Field::ProcOffs | Field::PageType | Field::PageOwner)
}

#[derive(Debug, Clone)]
enum Val {
    Bool(Expr),
    Word(Expr, bool),
    Ptr(MapKind, Expr),
}

#[derive(Debug, Clone)]
struct Binding {
    val: Val,
    deps: BTreeSet<Field>,
    at: usize,
}

struct Lowerer<'a> {
    kernel: &'a Kernel,
    params: BTreeMap<String, (usize, bool)>,
    decls: BTreeMap<String, DeclType>,
    bound: BTreeMap<String, Binding>,
    written: Vec<Field>,
}

/// Lowers an inlined implementation to a flat list of checks and updates.
pub fn lower_to_ir(ast: &ImplAst, kernel: &Kernel) -> Result<IrFunction, CError> {
    let mut lw = Lowerer { kernel, params: BTreeMap::new(), decls: BTreeMap::new(), bound: BTreeMap::new(), written: vec![] };
    for (i, p) in ast.params.iter().enumerate() {
        if lw.params.insert(p.name.clone(), (i, SIGNED_TYPES.contains(&p.ty.as_str()))).is_some() {
            return Err(CError::new(CErrorKind::Syntax, format!("duplicate parameter `{}`", p.name), p.span));
        }
    }
    for d in &ast.locals {
        if let DeclType::StructPtr(s) = &d.ty {
            if !matches!(s.as_str(), "proc" | "page") {
                return Err(CError::new(CErrorKind::Domain, format!("unknown struct `{s}`"), d.span));
            }
        }
        if lw.params.contains_key(&d.name) || lw.decls.insert(d.name.clone(), d.ty.clone()).is_some() {
            return Err(CError::new(CErrorKind::Syntax, format!("redeclaration of `{}`", d.name), d.span));
        }
    }
    let mut items = Vec::new();
    for stmt in &ast.body {
        match stmt {
            CStmt::ErrorCheck { cond, errno, span } => {
                let code = kernel
                    .constants
                    .errno(errno)
                    .ok_or_else(|| CError::new(CErrorKind::Domain, format!("unknown error code `{errno}`"), *span))?;
                let fail = lw.boolean(cond)?;
                items.push(IrItem::Check { fail, errno: errno.clone(), code, line: span.line });
            }
            CStmt::Assign { target, op, value, span } => {
                let (field, indices) = lw.lvalue(target, *span)?;
                let rhs = lw.word(value)?.0;
                let value = lw.compound(*op, Expr::Read { field, indices: indices.clone() }, rhs);
                lw.written.push(field);
                items.push(IrItem::Update { field, indices, value, line: span.line });
            }
            CStmt::Bind { name, op, value, span } => lw.bind(name, *op, value, *span)?,
            CStmt::HelperCall { name, span, .. } => {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, format!("call to `{name}` must be inlined first"), *span))
            }
            CStmt::ReturnZero { .. } => {}
        }
    }
    Ok(IrFunction {
        name: ast.name.clone(),
        params: ast.params.iter().map(|p| p.name.clone()).collect(),
        param_types: ast.params.iter().map(|p| p.ty.clone()).collect(),
        items,
        ghosts: ast.dropped_ghosts.clone(),
    })
}

impl Lowerer<'_> {
    fn compound(&self, op: AssignOp, old: Expr, rhs: Expr) -> Expr {
        match op {
            AssignOp::Set => rhs,
            AssignOp::Add => Expr::bin(BvOp::Add, old, rhs),
            AssignOp::Sub => Expr::bin(BvOp::Sub, old, rhs),
            AssignOp::Or => Expr::bin(BvOp::Or, old, rhs),
        }
    }

    fn bind(&mut self, name: &str, op: AssignOp, value: &CExpr, span: CSpan) -> Result<(), CError> {
        let ty = self
            .decls
            .get(name)
            .cloned()
            .ok_or_else(|| CError::new(CErrorKind::UnsupportedConstruct, format!("assignment to parameter `{name}`"), span))?;
        let v = self.value(value)?;
        let val = match (&ty, v) {
            (DeclType::StructPtr(s), Val::Ptr(map, idx)) => {
                if map.name().trim_end_matches('s') != s {
                    return Err(CError::new(CErrorKind::Type, format!("`{name}` points to struct {s}, not a {} entry", map.name()), span));
                }
                if op != AssignOp::Set {
                    return Err(CError::new(CErrorKind::UnsupportedConstruct, "pointer arithmetic is not supported", span));
                }
                Val::Ptr(map, idx)
            }
            (DeclType::StructPtr(_), _) => {
                return Err(CError::new(CErrorKind::Type, format!("`{name}` must be bound to a struct pointer"), span))
            }
            (DeclType::Scalar(_), Val::Ptr(..)) => {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, "pointer-to-integer conversion", span))
            }
            (DeclType::Scalar(t), v) => {
                let signed = SIGNED_TYPES.contains(&t.as_str());
                let rhs = to_word(v).0;
                let e = if op == AssignOp::Set {
                    rhs
                } else {
                    let cur = self.local(name, span)?;
                    self.compound(op, to_word(cur).0, rhs)
                };
                Val::Word(e, signed)
            }
        };
        let deps = match &val {
            Val::Bool(e) | Val::Word(e, _) | Val::Ptr(_, e) => e.reads(),
        };
        self.bound.insert(name.to_string(), Binding { val, deps, at: self.written.len() });
        Ok(())
    }

    fn local(&self, name: &str, span: CSpan) -> Result<Val, CError> {
        let b = self
            .bound
            .get(name)
            .ok_or_else(|| CError::new(CErrorKind::Type, format!("`{name}` is used before it is assigned"), span))?;
        if let Some(f) = self.written[b.at..].iter().find(|f| b.deps.contains(f)) {
            return Err(CError::new(
                CErrorKind::UnsupportedConstruct,
                format!("`{name}` depends on `{}`, which is updated before this use", f.name()),
                span,
            ));
        }
        Ok(b.val.clone())
    }

    fn lvalue(&mut self, target: &CExpr, span: CSpan) -> Result<(Field, Vec<Expr>), CError> {
        match target {
            CExpr::Name(n, s) => match Field::lookup(None, n) {
                Some(f) if !self.params.contains_key(n) && !self.decls.contains_key(n) => Ok((f, vec![])),
                _ => Err(CError::new(CErrorKind::Domain, format!("`{n}` is not assignable kernel state"), *s)),
            },
            CExpr::Arrow(base, fname, s) => {
                let (map, idx) = self.pointer(base)?;
                let f = self.field(map, fname, *s)?;
                if f.is_submap() {
                    return Err(CError::new(CErrorKind::Type, format!("`{fname}` is an array; index it"), *s));
                }
                Ok((f, vec![idx]))
            }
            CExpr::Index(base, i, s) => {
                let CExpr::Arrow(pb, fname, fs) = &**base else {
                    return Err(CError::new(CErrorKind::UnsupportedConstruct, "unsupported assignment target", *s));
                };
                let (map, idx) = self.pointer(pb)?;
                let f = self.field(map, fname, *fs)?;
                if !f.is_submap() {
                    return Err(CError::new(CErrorKind::Type, format!("`{fname}` is not an array"), *s));
                }
                let j = self.word(i)?.0;
                Ok((f, vec![idx, j]))
            }
            _ => Err(CError::new(CErrorKind::UnsupportedConstruct, "unsupported assignment target", span)),
        }
    }

    fn field(&self, map: MapKind, name: &str, span: CSpan) -> Result<Field, CError> {
        Field::lookup(Some(map), name).ok_or_else(|| {
            CError::new(CErrorKind::Domain, format!("struct {} has no field `{name}`", map.name().trim_end_matches('s')), span)
        })
    }

    fn pointer(&mut self, e: &CExpr) -> Result<(MapKind, Expr), CError> {
        match self.value(e)? {
            Val::Ptr(m, i) => Ok((m, i)),
            _ => Err(CError::new(CErrorKind::Type, "`->` applied to a non-pointer", span_of(e))),
        }
    }

    fn boolean(&mut self, e: &CExpr) -> Result<Expr, CError> {
        match self.value(e)? {
            Val::Bool(b) => Ok(b),
            Val::Word(w, _) => Ok(Expr::not(Expr::eq(w, Expr::Word(0)))),
            Val::Ptr(..) => Err(CError::new(CErrorKind::UnsupportedConstruct, "pointer used as a condition", span_of(e))),
        }
    }

    fn word(&mut self, e: &CExpr) -> Result<(Expr, bool), CError> {
        match self.value(e)? {
            Val::Ptr(..) => Err(CError::new(CErrorKind::UnsupportedConstruct, "pointer used as an integer", span_of(e))),
            v => Ok(to_word(v)),
        }
    }

    fn value(&mut self, e: &CExpr) -> Result<Val, CError> {
        let width = self.kernel.schema.width;
        match e {
            CExpr::Int(v) => Ok(Val::Word(Expr::Word(v & mask(width)), true)),
            CExpr::Name(n, span) => {
                if let Some((i, signed)) = self.params.get(n) {
                    return Ok(Val::Word(Expr::Arg(*i), *signed));
                }
                if self.decls.contains_key(n) {
                    return self.local(n, *span);
                }
                if let Some(f) = Field::lookup(None, n) {
                    return Ok(Val::Word(Expr::Read { field: f, indices: vec![] }, field_is_signed(f)));
                }
                match self.kernel.constants.lookup_unqualified(n) {
                    Some((full, c)) if !full.starts_with("errno.") && !matches!(c, Constant::Sort(_)) => {
                        Ok(Val::Word(Expr::Word(c.value() & mask(width)), true))
                    }
                    _ => Err(CError::new(CErrorKind::Domain, format!("undeclared identifier `{n}`"), *span)),
                }
            }
            CExpr::Call(n, _, span) => {
                Err(CError::new(CErrorKind::UnsupportedConstruct, format!("call to `{n}` must be inlined first"), *span))
            }
            CExpr::Index(base, i, span) => {
                if let CExpr::Name(m, _) = &**base {
                    if let Some(map) = MapKind::from_name(m) {
                        let idx = self.word(i)?.0;
                        return Ok(Val::Ptr(map, idx));
                    }
                }
                let CExpr::Arrow(pb, fname, fs) = &**base else {
                    return Err(CError::new(CErrorKind::UnsupportedConstruct, "indexing is only supported on struct arrays", *span));
                };
                let (map, idx) = self.pointer(pb)?;
                let f = self.field(map, fname, *fs)?;
                if !f.is_submap() {
                    return Err(CError::new(CErrorKind::Type, format!("`{fname}` is not an array"), *span));
                }
                let j = self.word(i)?.0;
                Ok(Val::Word(Expr::Read { field: f, indices: vec![idx, j] }, field_is_signed(f)))
            }
            CExpr::Arrow(base, fname, span) => {
                let (map, idx) = self.pointer(base)?;
                let f = self.field(map, fname, *span)?;
                if f.is_submap() {
                    return Err(CError::new(CErrorKind::UnsupportedConstruct, format!("array `{fname}` used without an index"), *span));
                }
                Ok(Val::Word(Expr::Read { field: f, indices: vec![idx] }, field_is_signed(f)))
            }
            CExpr::Unary(op, a) => match op {
                CUnOp::Not => Ok(Val::Bool(Expr::not(self.boolean(a)?))),
                CUnOp::Neg => {
                    let (w, s) = self.word(a)?;
                    Ok(Val::Word(Expr::Neg(Box::new(w)), s))
                }
                CUnOp::BitNot => {
                    let (w, s) = self.word(a)?;
                    Ok(Val::Word(Expr::bin(BvOp::Sub, Expr::Neg(Box::new(w)), Expr::Word(1)), s))
                }
            },
            CExpr::Binary(op, a, b) => self.binary(*op, a, b),
        }
    }

    fn binary(&mut self, op: CBinOp, a: &CExpr, b: &CExpr) -> Result<Val, CError> {
        use CBinOp::*;
        match op {
            LogAnd | LogOr => {
                let (x, y) = (self.boolean(a)?, self.boolean(b)?);
                return Ok(Val::Bool(if op == LogAnd { Expr::and(vec![x, y]) } else { Expr::or(vec![x, y]) }));
            }
            Mod | Shr | BitXor => {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, format!("operator {op:?} is not supported"), span_of(a)))
            }
            _ => {}
        }
        let (x, sx) = self.word(a)?;
        let (y, sy) = self.word(b)?;
        let signed = sx && sy;
        let cmp = |strict: bool, swap: bool| -> Val {
            let op = match (signed, strict) {
                (true, true) => CmpOp::Slt,
                (true, false) => CmpOp::Sle,
                (false, true) => CmpOp::Ult,
                (false, false) => CmpOp::Ule,
            };
            let (l, r) = if swap { (y.clone(), x.clone()) } else { (x.clone(), y.clone()) };
            Val::Bool(Expr::cmp(op, l, r))
        };
        Ok(match op {
            Eq => Val::Bool(Expr::eq(x, y)),
            Ne => Val::Bool(Expr::not(Expr::eq(x, y))),
            Lt => cmp(true, false),
            Le => cmp(false, false),
            Gt => cmp(true, true),
            Ge => cmp(false, true),
            Add => Val::Word(Expr::bin(BvOp::Add, x, y), signed),
            Sub => Val::Word(Expr::bin(BvOp::Sub, x, y), signed),
            Mul => Val::Word(Expr::bin(BvOp::Mul, x, y), signed),
            Div if signed => {
                return Err(CError::new(CErrorKind::UnsupportedConstruct, "signed division is not supported", span_of(a)))
            }
            Div => Val::Word(Expr::bin(BvOp::UDiv, x, y), false),
            Shl => Val::Word(Expr::bin(BvOp::Shl, x, y), sx),
            BitOr => Val::Word(Expr::bin(BvOp::Or, x, y), signed),
            BitAnd => Val::Word(Expr::bin(BvOp::And, x, y), signed),
            LogAnd | LogOr | Mod | Shr | BitXor => unreachable!(),
        })
    }
}

fn to_word(v: Val) -> (Expr, bool) {
    match v {
        Val::Bool(b) => (Expr::ite(b, Expr::Word(1), Expr::Word(0)), true),
        Val::Word(w, s) => (w, s),
        Val::Ptr(..) => unreachable!("pointers are rejected before conversion"),
    }
}

fn span_of(e: &CExpr) -> CSpan {
    let mut span = CSpan::default();
    e.walk(&mut |x| {
        if span == CSpan::default() {
            if let CExpr::Name(_, s) | CExpr::Call(_, _, s) | CExpr::Arrow(_, _, s) | CExpr::Index(_, _, s) = x {
                span = *s;
            }
        }
    });
    span
}
