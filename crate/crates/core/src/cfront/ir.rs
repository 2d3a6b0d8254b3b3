// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::Serialize;

use crate::bv;
use crate::kernel::{mask, Field, KernelState, Schema};
use crate::smt::{BvOp, CmpOp, TermId, TermPool};

/// Side-effect-free expression over the kernel state at a program point and
/// the syscall arguments. Words are kernel-width; booleans evaluate to 0/1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Bool(bool),
    Word(u64),
    Arg(usize),
    Read { field: Field, indices: Vec<Expr> },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Bin(BvOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Bool(b) => Expr::Bool(!b),
            Expr::Not(inner) => *inner,
            other => Expr::Not(Box::new(other)),
        }
    }

    pub fn and(items: Vec<Expr>) -> Expr {
        let items: Vec<Expr> = items.into_iter().filter(|e| *e != Expr::Bool(true)).collect();
        if items.contains(&Expr::Bool(false)) {
            return Expr::Bool(false);
        }
        match items.len() {
            0 => Expr::Bool(true),
            1 => items.into_iter().next().unwrap(),
            _ => Expr::And(items),
        }
    }

    pub fn or(items: Vec<Expr>) -> Expr {
        let items: Vec<Expr> = items.into_iter().filter(|e| *e != Expr::Bool(false)).collect();
        if items.contains(&Expr::Bool(true)) {
            return Expr::Bool(true);
        }
        match items.len() {
            0 => Expr::Bool(false),
            1 => items.into_iter().next().unwrap(),
            _ => Expr::Or(items),
        }
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Eq(Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn bin(op: BvOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        match c {
            Expr::Bool(true) => a,
            Expr::Bool(false) => b,
            c => Expr::Ite(Box::new(c), Box::new(a), Box::new(b)),
        }
    }

    pub fn is_bool(&self) -> bool {
        match self {
            Expr::Bool(_) | Expr::Not(_) | Expr::And(_) | Expr::Or(_) | Expr::Eq(..) | Expr::Cmp(..) => true,
            Expr::Ite(_, a, _) => a.is_bool(),
            _ => false,
        }
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Bool(_) | Expr::Word(_) | Expr::Arg(_) => {}
            Expr::Read { indices, .. } => indices.iter().for_each(|i| i.walk(f)),
            Expr::Not(a) | Expr::Neg(a) => a.walk(f),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.walk(f)),
            Expr::Eq(a, b) | Expr::Cmp(_, a, b) | Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Ite(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Fields this expression reads.
    pub fn reads(&self) -> BTreeSet<Field> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Read { field, .. } = e {
                out.insert(*field);
            }
        });
        out
    }

    /// Concrete value; out-of-domain reads yield 0.
    pub fn eval(&self, s: &KernelState, args: &[u64]) -> u64 {
        let w = s.schema().width;
        let b = |x: bool| u64::from(x);
        match self {
            Expr::Bool(x) => b(*x),
            Expr::Word(v) => *v & mask(w),
            Expr::Arg(i) => args[*i],
            Expr::Read { field, indices } => {
                let idx: Vec<u64> = indices.iter().map(|i| i.eval(s, args)).collect();
                s.read_or_zero(*field, &idx)
            }
            Expr::Not(a) => b(a.eval(s, args) == 0),
            Expr::And(xs) => b(xs.iter().map(|x| x.eval(s, args)).fold(true, |acc, v| acc & (v != 0))),
            Expr::Or(xs) => b(xs.iter().map(|x| x.eval(s, args)).fold(false, |acc, v| acc | (v != 0))),
            Expr::Eq(x, y) => b(x.eval(s, args) == y.eval(s, args)),
            Expr::Cmp(op, x, y) => {
                let (x, y) = (x.eval(s, args), y.eval(s, args));
                b(match op {
                    CmpOp::Ult => x < y,
                    CmpOp::Ule => x <= y,
                    CmpOp::Slt => bv::slt(x, y, w),
                    CmpOp::Sle => bv::sle(x, y, w),
                })
            }
            Expr::Bin(op, x, y) => {
                let (x, y) = (x.eval(s, args), y.eval(s, args));
                match op {
                    BvOp::Add => bv::add(x, y, w),
                    BvOp::Sub => bv::sub(x, y, w),
                    BvOp::Mul => bv::mul(x, y, w),
                    BvOp::UDiv => bv::udiv(x, y, w),
                    BvOp::Shl => bv::shl(x, y, w),
                    BvOp::Or => x | y,
                    BvOp::And => x & y,
                }
            }
            Expr::Neg(a) => bv::neg(a.eval(s, args), w),
            Expr::Ite(c, x, y) => {
                if c.eval(s, args) != 0 {
                    x.eval(s, args)
                } else {
                    y.eval(s, args)
                }
            }
        }
    }

    /// Term over pre-state cell symbols; reads become if-then-else chains
    /// over the field's index tuples, defaulting to 0.
    pub fn to_term(&self, pool: &mut TermPool, schema: &Schema, pre: &[TermId], args: &[TermId]) -> TermId {
        let w = schema.width;
        match self {
            Expr::Bool(x) => pool.bool(*x),
            Expr::Word(v) => pool.bv(*v & mask(w), w),
            Expr::Arg(i) => args[*i],
            Expr::Read { field, indices } => {
                let idx: Vec<TermId> = indices.iter().map(|i| i.to_term(pool, schema, pre, args)).collect();
                read_term(pool, schema, pre, *field, &idx)
            }
            Expr::Not(a) => {
                let a = a.to_term(pool, schema, pre, args);
                pool.not(a)
            }
            Expr::And(xs) => {
                let ts: Vec<TermId> = xs.iter().map(|x| x.to_term(pool, schema, pre, args)).collect();
                pool.and(ts)
            }
            Expr::Or(xs) => {
                let ts: Vec<TermId> = xs.iter().map(|x| x.to_term(pool, schema, pre, args)).collect();
                pool.or(ts)
            }
            Expr::Eq(a, b) => {
                let (a, b) = (a.to_term(pool, schema, pre, args), b.to_term(pool, schema, pre, args));
                pool.eq(a, b)
            }
            Expr::Cmp(op, a, b) => {
                let (a, b) = (a.to_term(pool, schema, pre, args), b.to_term(pool, schema, pre, args));
                pool.cmp(*op, a, b)
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.to_term(pool, schema, pre, args), b.to_term(pool, schema, pre, args));
                pool.bin(*op, a, b)
            }
            Expr::Neg(a) => {
                let a = a.to_term(pool, schema, pre, args);
                pool.neg(a)
            }
            Expr::Ite(c, a, b) => {
                let c = c.to_term(pool, schema, pre, args);
                let (a, b) = (a.to_term(pool, schema, pre, args), b.to_term(pool, schema, pre, args));
                pool.ite(c, a, b)
            }
        }
    }
}

/// Conjunction of `idx[k] == tuple[k]`.
pub fn index_match(pool: &mut TermPool, width: u32, idx: &[TermId], tuple: &[u64]) -> TermId {
    let eqs: Vec<TermId> = idx
        .iter()
        .zip(tuple)
        .map(|(i, t)| {
            let c = pool.bv(*t, width);
            pool.eq(*i, c)
        })
        .collect();
    pool.and(eqs)
}

pub fn read_term(pool: &mut TermPool, schema: &Schema, cells: &[TermId], field: Field, idx: &[TermId]) -> TermId {
    let mut acc = pool.bv(0, schema.width);
    for t in schema.index_tuples(field).iter().rev() {
        let off = schema.offset(field, t).unwrap();
        let hit = index_match(pool, schema.width, idx, t);
        acc = pool.ite(hit, cells[off], acc);
    }
    acc
}

/// One step of the flattened implementation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IrItem {
    /// Return `-errno` when `fail` holds.
    Check { fail: Expr, errno: String, code: u64, line: u32 },
    Update { field: Field, indices: Vec<Expr>, value: Expr, line: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrFunction {
    pub name: String,
    pub params: Vec<String>,
    /// Declared C type of each parameter.
    pub param_types: Vec<String>,
    pub items: Vec<IrItem>,
    pub ghosts: Vec<String>,
}
