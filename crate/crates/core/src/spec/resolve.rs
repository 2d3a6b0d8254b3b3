// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::kernel::{Constant, Field, Kernel, MapKind};
use crate::smt::{BvOp, CmpOp};

use super::ast::*;
use super::fault::{FaultKind, SpecFault};
use super::inventory::{ApiOp, Inventory};
use super::typed::*;

/// Type-checks a parsed spec against the kernel schema, constant table and
/// API inventory, producing its resolved form.
pub fn typecheck_spec(ast: &SpecAst, kernel: &Kernel, inventory: &Inventory) -> Result<Spec, SpecFault> {
    let mut r = Resolver {
        kernel,
        inventory,
        width: kernel.schema.width,
        state_param: ast.state_param().unwrap_or("old").to_string(),
        args: ast.arg_names().iter().map(|s| s.to_string()).collect(),
        locals: HashMap::new(),
        copy_name: None,
        writes: Vec::new(),
    };
    let mut ret = None;
    for stmt in &ast.body {
        match stmt {
            Stmt::Assign { target, value, span } => r.assign(target, value, *span)?,
            Stmt::AugAssign { target, op, value, span } => {
                let (field, indices) = r.write_target(target)?;
                let current = SpecExpr::Read { ver: StateVer::New(r.writes.len()), field, indices: indices.clone() };
                let rhs = r.expr(value)?;
                let rhs = r.to_bv(rhs, r.width, value.span)?;
                let op = match op {
                    AugOp::Add => BvOp::Add,
                    AugOp::Sub => BvOp::Sub,
                };
                let v = SpecExpr::Bin(op, Box::new(current), Box::new(rhs));
                r.writes.push(SpecWrite { field, indices, value: v, line: span.line });
            }
            Stmt::Return { values, span } => ret = Some((values, *span)),
        }
    }
    let (values, span) = ret.expect("parser guarantees a trailing return");
    if values.len() != 2 {
        return Err(tyerr("the spec must return exactly two values: `cond, util.If(cond, new, old)`", span));
    }
    let guard = r.expr(&values[0])?;
    let guard = r.to_bool(guard, values[0].span)?;
    let post = match r.expr(&values[1])? {
        Val::State(StateVer::Old) => PostState::Direct(StateSel::Old),
        Val::State(StateVer::New(_)) => PostState::Direct(StateSel::New),
        Val::StateIf(c, a, b) => PostState::If(c, a, b),
        _ => return Err(tyerr("the second return value must be a state, e.g. `util.If(cond, new, old)`", values[1].span)),
    };
    Ok(Spec {
        name: ast.name.clone(),
        state_param: r.state_param,
        params: r.args,
        width: r.width,
        guard,
        writes: r.writes,
        post,
    })
}

#[derive(Debug, Clone)]
enum Val {
    Bool(SpecExpr),
    Bv(SpecExpr, u32),
    Int(u64),
    Sort(u32),
    Module(String),
    State(StateVer),
    Map(StateVer, MapKind),
    Record(StateVer, MapKind, SpecExpr),
    SubMap(StateVer, Field, SpecExpr),
    StateIf(SpecExpr, StateSel, StateSel),
}

impl Val {
    fn describe(&self) -> String {
        match self {
            Val::Bool(_) => "Bool".into(),
            Val::Bv(_, w) => format!("BitVec({w})"),
            Val::Int(_) => "int".into(),
            Val::Sort(w) => format!("BitVecSort({w})"),
            Val::Module(m) => format!("namespace `{m}`"),
            Val::State(_) | Val::StateIf(..) => "a kernel state".into(),
            Val::Map(_, m) => format!("the `{}` map", m.name()),
            Val::Record(_, m, _) => format!("a `{}` entry", m.name()),
            Val::SubMap(_, f, _) => format!("the `{}` map field", f.name()),
        }
    }
}

fn tyerr(msg: impl Into<String>, span: Span) -> SpecFault {
    SpecFault::new(FaultKind::TypeSortError, msg, span)
}

fn apierr(msg: impl Into<String>, span: Span) -> SpecFault {
    SpecFault::new(FaultKind::ApiReferenceError, msg, span)
}

fn domerr(msg: impl Into<String>, span: Span) -> SpecFault {
    SpecFault::new(FaultKind::DomainError, msg, span)
}

struct Resolver<'a> {
    kernel: &'a Kernel,
    inventory: &'a Inventory,
    width: u32,
    state_param: String,
    args: Vec<String>,
    locals: HashMap<String, Val>,
    copy_name: Option<String>,
    writes: Vec<SpecWrite>,
}

impl Resolver<'_> {
    fn assign(&mut self, target: &Expr, value: &Expr, span: Span) -> Result<(), SpecFault> {
        if let ExprKind::Name(name) = &target.kind {
            if *name == self.state_param || self.args.contains(name) || Some(name) == self.copy_name.as_ref() {
                return Err(tyerr(format!("cannot rebind `{name}`"), span));
            }
            if is_copy_call(value) {
                let ExprKind::Call(f, _) = &value.kind else { unreachable!() };
                let ExprKind::Attr(base, _) = &f.kind else { unreachable!() };
                if !matches!(self.expr(base)?, Val::State(StateVer::Old)) {
                    return Err(tyerr("only the pre-state can be copied", value.span));
                }
                if self.copy_name.is_some() {
                    return Err(tyerr("the state is copied more than once", span));
                }
                self.copy_name = Some(name.clone());
                return Ok(());
            }
            let v = self.expr(value)?;
            if matches!(v, Val::State(_) | Val::Map(..) | Val::Record(..) | Val::SubMap(..) | Val::Module(_)) {
                return Err(tyerr(format!("cannot bind {} to a local; copy the state with `.copy()`", v.describe()), span));
            }
            self.locals.insert(name.clone(), v);
            return Ok(());
        }
        let (field, indices) = self.write_target(target)?;
        let v = self.expr(value)?;
        let v = self.to_bv(v, self.width, value.span)?;
        self.writes.push(SpecWrite { field, indices, value: v, line: span.line });
        Ok(())
    }

    /// Resolves an assignment target rooted at the copied state.
    fn write_target(&mut self, target: &Expr) -> Result<(Field, Vec<SpecExpr>), SpecFault> {
        let span = target.span;
        let mut chain = Vec::new();
        let mut cur = target;
        let root = loop {
            match &cur.kind {
                ExprKind::Attr(base, attr) => {
                    chain.push((Some(attr.as_str()), None));
                    cur = base;
                }
                ExprKind::Index(base, idx) => {
                    chain.push((None, Some(idx.as_ref())));
                    cur = base;
                }
                ExprKind::Name(n) => break n.as_str(),
                _ => return Err(tyerr("invalid assignment target", span)),
            }
        };
        chain.reverse();
        if root == self.state_param {
            return Err(tyerr(
                format!("`{root}` is the pre-state and cannot be written; write to the copy made with `{root}.copy()`"),
                span,
            ));
        }
        if Some(root) != self.copy_name.as_deref() {
            if root == "new" {
                return Err(apierr("undefined name `new`; create it with `new = old.copy()`", span));
            }
            return Err(tyerr(format!("`{root}` is not a state copy"), span));
        }
        let mut indices = Vec::new();
        let mut map: Option<MapKind> = None;
        let mut field: Option<Field> = None;
        for (attr, idx) in chain {
            match (attr, idx, map, field) {
                (Some(a), None, None, None) => {
                    if let Some(m) = MapKind::from_name(a) {
                        map = Some(m);
                    } else if let Some(f) = Field::lookup(None, a) {
                        field = Some(f);
                    } else {
                        return Err(self.unknown_field(a, None, span));
                    }
                }
                (None, Some(i), Some(_), None) if indices.is_empty() => {
                    let v = self.expr(i)?;
                    indices.push(self.to_bv(v, self.width, i.span)?);
                }
                (Some(a), None, Some(m), None) if indices.len() == 1 => match Field::lookup(Some(m), a) {
                    Some(f) => field = Some(f),
                    None => return Err(self.unknown_field(a, Some(m), span)),
                },
                (None, Some(i), _, Some(f)) if f.is_submap() && indices.len() == 1 => {
                    let v = self.expr(i)?;
                    indices.push(self.to_bv(v, self.width, i.span)?);
                }
                (None, Some(_), _, Some(f)) => {
                    return Err(tyerr(format!("`{}` is not a map and cannot be subscripted", f.name()), span))
                }
                _ => return Err(tyerr("malformed state path on the left of `=`", span)),
            }
        }
        match field {
            Some(f) if f.arity() == indices.len() => Ok((f, indices)),
            Some(f) => Err(tyerr(format!("`{}` needs {} index(es) to be written", f.name(), f.arity()), span)),
            None => Err(tyerr("cannot assign a whole map or entry; write individual fields", span)),
        }
    }

    fn unknown_field(&self, name: &str, map: Option<MapKind>, span: Span) -> SpecFault {
        let place = map.map_or("the kernel state".to_string(), |m| format!("`{}` entries", m.name()));
        domerr(format!("no field `{name}` in {place}"), span)
    }

    fn to_bool(&self, v: Val, span: Span) -> Result<SpecExpr, SpecFault> {
        match v {
            Val::Bool(e) => Ok(e),
            other => Err(tyerr(format!("Sort mismatch: expected Bool, found {}", other.describe()), span)),
        }
    }

    fn to_bv(&self, v: Val, width: u32, span: Span) -> Result<SpecExpr, SpecFault> {
        match v {
            Val::Bv(e, w) if w == width => Ok(e),
            Val::Int(i) => Ok(SpecExpr::Lit { value: i & crate::kernel::mask(width), width }),
            other => Err(tyerr(format!("Sort mismatch: expected BitVec({width}), found {}", other.describe()), span)),
        }
    }

    /// Brings two operands to a common bitvector width. `Ok(None)` means
    /// both are plain integers.
    fn unify(&self, a: Val, b: Val, span: Span) -> Result<Option<(SpecExpr, SpecExpr, u32)>, SpecFault> {
        match (&a, &b) {
            (Val::Int(_), Val::Int(_)) => Ok(None),
            (Val::Bv(_, w), _) | (_, Val::Bv(_, w)) => {
                let w = *w;
                Ok(Some((self.to_bv(a, w, span)?, self.to_bv(b, w, span)?, w)))
            }
            _ => Err(tyerr(
                format!("Sort mismatch: expected BitVec({}), found {} and {}", self.width, a.describe(), b.describe()),
                span,
            )),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Val, SpecFault> {
        let span = e.span;
        match &e.kind {
            ExprKind::Bool(b) => Ok(Val::Bool(SpecExpr::Bool(*b))),
            ExprKind::Int { value, .. } => Ok(Val::Int(*value)),
            ExprKind::Name(n) => self.name(n, span),
            ExprKind::Tuple(_) => Err(tyerr("tuples are only allowed in the return statement", span)),
            ExprKind::Attr(base, attr) => {
                let b = self.expr(base)?;
                self.attr(b, attr, span)
            }
            ExprKind::Index(base, idx) => {
                let b = self.expr(base)?;
                match b {
                    Val::Map(ver, m) => {
                        let i = self.expr(idx)?;
                        let i = self.to_bv(i, self.width, idx.span)?;
                        Ok(Val::Record(ver, m, i))
                    }
                    Val::SubMap(_, f, _) => Err(tyerr(
                        format!("map field `{}` is read with parentheses, `{}(i)`; brackets are only for writes", f.name(), f.name()),
                        span,
                    )),
                    other => Err(tyerr(format!("{} cannot be subscripted", other.describe()), span)),
                }
            }
            ExprKind::Call(callee, args) => self.call(callee, args, span),
            ExprKind::Unary(op, a) => {
                let v = self.expr(a)?;
                match (op, v) {
                    (UnOp::Not, _) => Err(tyerr("Python `not` does not build a Z3 formula; use z3.Not", span)),
                    (UnOp::Neg, Val::Int(i)) => Ok(Val::Int(i.wrapping_neg())),
                    (UnOp::Neg, Val::Bv(x, w)) => Ok(Val::Bv(SpecExpr::Neg(Box::new(x)), w)),
                    (UnOp::Invert, Val::Int(i)) => Ok(Val::Int(!i)),
                    (UnOp::Invert, Val::Bv(x, w)) => Ok(Val::Bv(
                        SpecExpr::Bin(BvOp::Sub, Box::new(SpecExpr::Neg(Box::new(x))), Box::new(SpecExpr::Lit { value: 1, width: w })),
                        w,
                    )),
                    (_, other) => Err(tyerr(format!("Sort mismatch: expected BitVec({}), found {}", self.width, other.describe()), span)),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let va = self.expr(a)?;
                let vb = self.expr(b)?;
                self.binary(*op, va, vb, span)
            }
        }
    }

    fn name(&mut self, n: &str, span: Span) -> Result<Val, SpecFault> {
        if n == self.state_param {
            return Ok(Val::State(StateVer::Old));
        }
        if Some(n) == self.copy_name.as_deref() {
            return Ok(Val::State(StateVer::New(self.writes.len())));
        }
        if let Some(i) = self.args.iter().position(|a| a == n) {
            return Ok(Val::Bv(SpecExpr::Arg { index: i, width: self.width }, self.width));
        }
        if let Some(v) = self.locals.get(n) {
            return Ok(v.clone());
        }
        if matches!(n, "dt" | "z3" | "util") {
            return Ok(Val::Module(n.to_string()));
        }
        if let Some((full, _)) = self.kernel.constants.lookup_unqualified(n) {
            return Err(apierr(format!("undefined name `{n}`; constants live in the dt namespace (`dt.{full}`)"), span));
        }
        Err(apierr(format!("undefined name `{n}`"), span))
    }

    fn attr(&mut self, base: Val, attr: &str, span: Span) -> Result<Val, SpecFault> {
        match base {
            Val::Module(m) if m == "dt" || m.starts_with("dt.") => {
                let path = if m == "dt" { attr.to_string() } else { format!("{}.{attr}", &m[3..]) };
                match self.kernel.constants.get(&path) {
                    Some(Constant::Int(v)) => Ok(Val::Int(v)),
                    Some(Constant::Word(v)) => Ok(Val::Bv(SpecExpr::Lit { value: v, width: self.width }, self.width)),
                    Some(Constant::Sort(w)) => Ok(Val::Sort(w)),
                    None if m == "dt" && self.kernel.constants.iter().any(|(k, _)| k.starts_with(&format!("{attr}."))) => {
                        Ok(Val::Module(format!("dt.{attr}")))
                    }
                    None => Err(apierr(format!("unknown constant `{m}.{attr}`"), span)),
                }
            }
            Val::Module(m) => Err(apierr(format!("`{m}.{attr}` is not in the API inventory"), span)),
            Val::State(ver) => {
                if let Some(mk) = MapKind::from_name(attr) {
                    return Ok(Val::Map(ver, mk));
                }
                if attr == "copy" {
                    return Err(tyerr("`.copy()` may only appear as `new = old.copy()`", span));
                }
                match Field::lookup(None, attr) {
                    Some(f) => Ok(Val::Bv(SpecExpr::Read { ver, field: f, indices: vec![] }, self.width)),
                    None => Err(self.unknown_field(attr, None, span)),
                }
            }
            Val::Record(ver, m, idx) => match Field::lookup(Some(m), attr) {
                Some(f) if f.is_submap() => Ok(Val::SubMap(ver, f, idx)),
                Some(f) => Ok(Val::Bv(SpecExpr::Read { ver, field: f, indices: vec![idx] }, self.width)),
                None => Err(self.unknown_field(attr, Some(m), span)),
            },
            Val::Map(_, m) => Err(tyerr(format!("index `{}` with brackets before accessing `.{attr}`", m.name()), span)),
            other => Err(tyerr(format!("{} has no attribute `{attr}`", other.describe()), span)),
        }
    }

    fn call(&mut self, callee: &Expr, args: &[Expr], span: Span) -> Result<Val, SpecFault> {
        // Field reads: `sub(i)` on map fields, `scalar()` on scalar fields.
        if let ExprKind::Attr(base, attr) = &callee.kind {
            let is_namespace = matches!(&base.kind, ExprKind::Name(n) if matches!(n.as_str(), "z3" | "util" | "dt"));
            if !is_namespace {
                let b = self.expr(base)?;
                let f = self.attr(b, attr, callee.span)?;
                return match (f, args.len()) {
                    (Val::SubMap(ver, field, idx), 1) => {
                        let i = self.expr(&args[0])?;
                        let i = self.to_bv(i, self.width, args[0].span)?;
                        Ok(Val::Bv(SpecExpr::Read { ver, field, indices: vec![idx, i] }, self.width))
                    }
                    (v @ Val::Bv(SpecExpr::Read { .. }, _), 0) => Ok(v),
                    (Val::Map(_, m), _) => Err(tyerr(
                        format!("`{}` is indexed with brackets, `{}[i]`", m.name(), m.name()),
                        span,
                    )),
                    (other, _) => Err(tyerr(format!("{} is not callable with {} argument(s)", other.describe(), args.len()), span)),
                };
            }
        }
        let Some(name) = callee.dotted_name() else {
            return Err(tyerr("expression is not callable", span));
        };
        if let Some(local) = self.locals.get(&name) {
            return Err(tyerr(format!("{} is not callable", local.describe()), span));
        }
        let Some(func) = self.inventory.get(&name).cloned() else {
            if name.starts_with("z3.") || name.starts_with("util.") {
                return Err(apierr(format!("`{name}` is not in the API inventory"), span));
            }
            if name.starts_with("dt.") {
                return Err(tyerr(format!("constant `{name}` is not callable"), span));
            }
            return Err(apierr(format!("unknown helper `{name}`; it is not among the available helpers"), span));
        };
        if !func.accepts(args.len()) {
            return Err(tyerr(format!("`{name}` does not take {} argument(s)", args.len()), span));
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push((self.expr(a)?, a.span));
        }
        let w = self.width;
        let bools = |r: &Self, vals: Vec<(Val, Span)>| -> Result<Vec<SpecExpr>, SpecFault> {
            vals.into_iter().map(|(v, s)| r.to_bool(v, s)).collect()
        };
        let two_bv = |r: &Self, mut vals: Vec<(Val, Span)>| -> Result<(SpecExpr, SpecExpr, u32), SpecFault> {
            let (b, _) = vals.pop().unwrap();
            let (a, _) = vals.pop().unwrap();
            r.unify(a, b, span)?
                .ok_or_else(|| tyerr(format!("`{name}` needs at least one BitVec argument"), span))
        };
        Ok(match func.op {
            ApiOp::And => Val::Bool(SpecExpr::And(bools(self, vals)?)),
            ApiOp::Or => Val::Bool(SpecExpr::Or(bools(self, vals)?)),
            ApiOp::Not => Val::Bool(SpecExpr::Not(Box::new(bools(self, vals)?.remove(0)))),
            ApiOp::Implies => {
                let mut b = bools(self, vals)?;
                let q = b.pop().unwrap();
                let p = b.pop().unwrap();
                Val::Bool(SpecExpr::Implies(Box::new(p), Box::new(q)))
            }
            ApiOp::Ult | ApiOp::Ule | ApiOp::Ugt | ApiOp::Uge | ApiOp::Slt | ApiOp::Sle | ApiOp::Sgt | ApiOp::Sge => {
                let (a, b, _) = two_bv(self, vals)?;
                Val::Bool(compare(func.op, a, b))
            }
            ApiOp::Udiv => {
                let (a, b, w) = two_bv(self, vals)?;
                Val::Bv(SpecExpr::Bin(BvOp::UDiv, Box::new(a), Box::new(b)), w)
            }
            ApiOp::BitVecVal => {
                let (width_val, wspan) = vals.pop().unwrap();
                let (value, vspan) = vals.pop().unwrap();
                let width = match width_val {
                    Val::Int(n) if (1..=64).contains(&n) => n as u32,
                    Val::Sort(n) => n,
                    other => return Err(tyerr(format!("BitVecVal width must be an integer or sort, found {}", other.describe()), wspan)),
                };
                match value {
                    Val::Int(v) => Val::Bv(SpecExpr::Lit { value: v & crate::kernel::mask(width), width }, width),
                    other => return Err(tyerr(format!("BitVecVal value must be an integer, found {}", other.describe()), vspan)),
                }
            }
            ApiOp::If => {
                let (b, bspan) = vals.pop().unwrap();
                let (a, _) = vals.pop().unwrap();
                let (c, cspan) = vals.pop().unwrap();
                let c = self.to_bool(c, cspan)?;
                match (a, b) {
                    (Val::State(x), Val::State(y)) => Val::StateIf(c, sel(x), sel(y)),
                    (Val::Bool(x), Val::Bool(y)) => Val::Bool(SpecExpr::Ite(Box::new(c), Box::new(x), Box::new(y))),
                    (a, b) => match self.unify(a, b, bspan)? {
                        Some((x, y, w)) => Val::Bv(SpecExpr::Ite(Box::new(c), Box::new(x), Box::new(y)), w),
                        None => return Err(tyerr("util.If branches must be Z3 values", bspan)),
                    },
                }
            }
            ApiOp::IsPidValid | ApiOp::IsPnValid | ApiOp::IsFdValid | ApiOp::IsIdxValid => {
                let (v, s) = vals.pop().unwrap();
                let x = self.to_bv(v, w, s)?;
                let consts = &self.kernel.constants;
                let lit = |name: &str| SpecExpr::Lit { value: consts.lookup(name).unwrap_or(0), width: w };
                let zero = SpecExpr::Lit { value: 0, width: w };
                let bx = || Box::new(x.clone());
                Val::Bool(match func.op {
                    ApiOp::IsPidValid => SpecExpr::And(vec![
                        SpecExpr::Cmp(CmpOp::Slt, Box::new(zero), bx()),
                        SpecExpr::Cmp(CmpOp::Slt, bx(), Box::new(lit("NPROC"))),
                    ]),
                    ApiOp::IsPnValid => SpecExpr::Cmp(CmpOp::Ult, bx(), Box::new(lit("NPAGE"))),
                    ApiOp::IsFdValid => SpecExpr::And(vec![
                        SpecExpr::Cmp(CmpOp::Sle, Box::new(zero), bx()),
                        SpecExpr::Cmp(CmpOp::Slt, bx(), Box::new(lit("NOFILE"))),
                    ]),
                    _ => SpecExpr::Cmp(CmpOp::Ult, bx(), Box::new(lit("PAGE_WORDS"))),
                })
            }
        })
    }

    fn binary(&mut self, op: BinOp, a: Val, b: Val, span: Span) -> Result<Val, SpecFault> {
        match op {
            BinOp::And | BinOp::Or => {
                let z = if op == BinOp::And { "z3.And" } else { "z3.Or" };
                return Err(tyerr(format!("Python `{}` does not build a Z3 formula; use {z}", op.symbol()), span));
            }
            BinOp::Div | BinOp::Mod | BinOp::Shr | BinOp::BitXor => {
                let hint = if op == BinOp::Div { "; use z3.UDiv for unsigned division" } else { "" };
                return Err(tyerr(format!("operator `{}` is not supported on kernel words{hint}", op.symbol()), span));
            }
            _ => {}
        }
        if op == BinOp::Eq || op == BinOp::Ne {
            let eq = match (a, b) {
                (Val::Bool(x), Val::Bool(y)) => SpecExpr::Eq(Box::new(x), Box::new(y)),
                (Val::Int(x), Val::Int(y)) => SpecExpr::Bool(x == y),
                (a, b) => {
                    let (x, y, _) = self.unify(a, b, span)?.expect("non-int operands");
                    SpecExpr::Eq(Box::new(x), Box::new(y))
                }
            };
            return Ok(Val::Bool(if op == BinOp::Ne { SpecExpr::Not(Box::new(eq)) } else { eq }));
        }
        if let (Val::Int(x), Val::Int(y)) = (&a, &b) {
            let (x, y) = (*x, *y);
            return Ok(match op {
                BinOp::Lt => Val::Bool(SpecExpr::Bool(x < y)),
                BinOp::Gt => Val::Bool(SpecExpr::Bool(x > y)),
                BinOp::Le => Val::Bool(SpecExpr::Bool(x <= y)),
                BinOp::Ge => Val::Bool(SpecExpr::Bool(x >= y)),
                BinOp::Add => Val::Int(x.wrapping_add(y)),
                BinOp::Sub => Val::Int(x.wrapping_sub(y)),
                BinOp::Mul => Val::Int(x.wrapping_mul(y)),
                BinOp::Shl => Val::Int(if y >= 64 { 0 } else { x << y }),
                BinOp::BitOr => Val::Int(x | y),
                BinOp::BitAnd => Val::Int(x & y),
                _ => unreachable!(),
            });
        }
        let (x, y, w) = self.unify(a, b, span)?.expect("non-int operands");
        let (x, y) = (Box::new(x), Box::new(y));
        Ok(match op {
            BinOp::Lt => Val::Bool(SpecExpr::Cmp(CmpOp::Slt, x, y)),
            BinOp::Le => Val::Bool(SpecExpr::Cmp(CmpOp::Sle, x, y)),
            BinOp::Gt => Val::Bool(SpecExpr::Cmp(CmpOp::Slt, y, x)),
            BinOp::Ge => Val::Bool(SpecExpr::Cmp(CmpOp::Sle, y, x)),
            BinOp::Add => Val::Bv(SpecExpr::Bin(BvOp::Add, x, y), w),
            BinOp::Sub => Val::Bv(SpecExpr::Bin(BvOp::Sub, x, y), w),
            BinOp::Mul => Val::Bv(SpecExpr::Bin(BvOp::Mul, x, y), w),
            BinOp::Shl => Val::Bv(SpecExpr::Bin(BvOp::Shl, x, y), w),
            BinOp::BitOr => Val::Bv(SpecExpr::Bin(BvOp::Or, x, y), w),
            BinOp::BitAnd => Val::Bv(SpecExpr::Bin(BvOp::And, x, y), w),
            _ => unreachable!(),
        })
    }
}

fn sel(v: StateVer) -> StateSel {
    match v {
        StateVer::Old => StateSel::Old,
        StateVer::New(_) => StateSel::New,
    }
}

fn compare(op: ApiOp, a: SpecExpr, b: SpecExpr) -> SpecExpr {
    let (a, b) = (Box::new(a), Box::new(b));
    match op {
        ApiOp::Ult => SpecExpr::Cmp(CmpOp::Ult, a, b),
        ApiOp::Ule => SpecExpr::Cmp(CmpOp::Ule, a, b),
        ApiOp::Ugt => SpecExpr::Cmp(CmpOp::Ult, b, a),
        ApiOp::Uge => SpecExpr::Cmp(CmpOp::Ule, b, a),
        ApiOp::Slt => SpecExpr::Cmp(CmpOp::Slt, a, b),
        ApiOp::Sle => SpecExpr::Cmp(CmpOp::Sle, a, b),
        ApiOp::Sgt => SpecExpr::Cmp(CmpOp::Slt, b, a),
        ApiOp::Sge => SpecExpr::Cmp(CmpOp::Sle, b, a),
        _ => unreachable!("not a comparison"),
    }
}
