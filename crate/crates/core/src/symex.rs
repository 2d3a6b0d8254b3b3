// SPDX-License-Identifier: Apache-2.0

//! Path enumeration over the lowered implementation.

use serde::Serialize;

use crate::cfront::{Expr, IrFunction, IrItem};
use crate::kernel::{mask, Field, KernelState, Schema};
use crate::smt::CmpOp;

/// A store resolved against the pre-state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathUpdate {
    pub field: Field,
    pub indices: Vec<Expr>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    /// Path condition over the pre-state.
    pub guard: Expr,
    /// C return value as a kernel word (0 or `-errno`).
    pub status: u64,
    pub errno: Option<String>,
    /// Empty on error paths.
    pub updates: Vec<PathUpdate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImplBehavior {
    pub name: String,
    pub params: Vec<String>,
    pub param_types: Vec<String>,
    pub paths: Vec<Path>,
}

impl ImplBehavior {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn success(&self) -> &Path {
        self.paths.iter().find(|p| p.status == 0).expect("every behavior has a success path")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteOutcome {
    pub status: u64,
    pub errno: Option<String>,
    pub post: KernelState,
}

/// Builds one path per check plus the fall-through success path. Reads are
/// rewritten over the updates that precede them, so every guard and value
/// refers to the pre-state only.
pub fn execute(ir: &IrFunction, schema: &Schema) -> ImplBehavior {
    let mut paths = Vec::new();
    let mut passed: Vec<Expr> = Vec::new();
    let mut updates: Vec<PathUpdate> = Vec::new();
    for item in &ir.items {
        match item {
            IrItem::Check { fail, errno, code, .. } => {
                let c = resolve(fail, &updates, schema);
                let mut g = passed.clone();
                g.push(c.clone());
                paths.push(Path {
                    guard: Expr::and(g),
                    status: code.wrapping_neg() & mask(schema.width),
                    errno: Some(errno.clone()),
                    updates: vec![],
                });
                passed.push(Expr::not(c));
            }
            IrItem::Update { field, indices, value, .. } => {
                let indices = indices.iter().map(|i| resolve(i, &updates, schema)).collect();
                let value = resolve(value, &updates, schema);
                updates.push(PathUpdate { field: *field, indices, value });
            }
        }
    }
    paths.push(Path { guard: Expr::and(passed), status: 0, errno: None, updates });
    ImplBehavior { name: ir.name.clone(), params: ir.params.clone(), param_types: ir.param_types.clone(), paths }
}

fn in_bounds(schema: &Schema, field: Field, idx: &[Expr]) -> Expr {
    let dims = schema.dims(field);
    Expr::and(idx.iter().zip(dims).map(|(i, d)| Expr::cmp(CmpOp::Ult, i.clone(), Expr::Word(d))).collect())
}

fn resolve(e: &Expr, updates: &[PathUpdate], schema: &Schema) -> Expr {
    let r = |x: &Expr| resolve(x, updates, schema);
    match e {
        Expr::Bool(_) | Expr::Word(_) | Expr::Arg(_) => e.clone(),
        Expr::Read { field, indices } => {
            let idx: Vec<Expr> = indices.iter().map(r).collect();
            let mut acc = Expr::Read { field: *field, indices: idx.clone() };
            for u in updates.iter().filter(|u| u.field == *field) {
                if idx.is_empty() {
                    acc = u.value.clone();
                    continue;
                }
                let mut hit: Vec<Expr> = idx.iter().zip(&u.indices).map(|(a, b)| Expr::eq(a.clone(), b.clone())).collect();
                hit.push(in_bounds(schema, *field, &u.indices));
                acc = Expr::ite(Expr::and(hit), u.value.clone(), acc);
            }
            acc
        }
        Expr::Not(a) => Expr::not(r(a)),
        Expr::And(xs) => Expr::and(xs.iter().map(r).collect()),
        Expr::Or(xs) => Expr::or(xs.iter().map(r).collect()),
        Expr::Eq(a, b) => Expr::eq(r(a), r(b)),
        Expr::Cmp(op, a, b) => Expr::cmp(*op, r(a), r(b)),
        Expr::Bin(op, a, b) => Expr::bin(*op, r(a), r(b)),
        Expr::Neg(a) => Expr::Neg(Box::new(r(a))),
        Expr::Ite(c, a, b) => Expr::ite(r(c), r(a), r(b)),
    }
}

/// Indices of the paths whose guard holds; exactly one for a well-formed behavior.
pub fn true_paths(b: &ImplBehavior, s: &KernelState, args: &[u64]) -> Vec<usize> {
    b.paths.iter().enumerate().filter(|(_, p)| p.guard.eval(s, args) != 0).map(|(i, _)| i).collect()
}

/// Runs the behavior on a concrete state. Out-of-domain stores are dropped.
///
/// # Panics
/// If the path guards are not mutually exclusive and exhaustive at `s`.
pub fn concretize(b: &ImplBehavior, s: &KernelState, args: &[u64]) -> ConcreteOutcome {
    assert_eq!(args.len(), b.arity(), "`{}` takes {} argument(s)", b.name, b.arity());
    let hits = true_paths(b, s, args);
    assert!(hits.len() == 1, "`{}`: {} path guards hold, expected exactly one", b.name, hits.len());
    let path = &b.paths[hits[0]];
    let mut post = s.clone();
    for u in &path.updates {
        let idx: Vec<u64> = u.indices.iter().map(|i| i.eval(s, args)).collect();
        post.set(u.field, &idx, u.value.eval(s, args));
    }
    ConcreteOutcome { status: path.status, errno: path.errno.clone(), post }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfront::compile_impl;
    use crate::kernel::Kernel;

    const SRC: &str = "int f(pid_t pid) {
        struct proc *p;
        if (!is_pid_valid(pid)) return -ESRCH;
        p = get_proc(pid);
        p->state = PROC_RUNNABLE;
        if (p->state != PROC_RUNNABLE) return -EINVAL;
        p->ppid = current;
        return 0;
    }";

    #[test]
    fn n_checks_give_n_plus_one_paths() {
        let k = Kernel::default();
        let b = execute(&compile_impl(SRC, &k).unwrap(), &k.schema);
        assert_eq!(b.paths.len(), 3);
        assert_eq!(b.paths[0].status, 3u64.wrapping_neg());
        assert!(b.paths[..2].iter().all(|p| p.updates.is_empty()));
    }

    #[test]
    fn reads_see_earlier_updates() {
        let k = Kernel::default();
        let b = execute(&compile_impl(SRC, &k).unwrap(), &k.schema);
        let s = KernelState::canonical(&k.config);
        let out = concretize(&b, &s, &[2]);
        assert_eq!(out.status, 0);
        assert_eq!(out.post.read(Field::ProcState, &[2]).unwrap(), 2);
        assert_eq!(out.post.read(Field::ProcPpid, &[2]).unwrap(), s.read(Field::Current, &[]).unwrap());
        let bad = concretize(&b, &s, &[9]);
        assert_eq!(bad.errno.as_deref(), Some("ESRCH"));
        assert_eq!(bad.post, s);
    }
}
