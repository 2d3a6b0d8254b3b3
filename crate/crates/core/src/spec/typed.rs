// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use crate::kernel::Field;
use crate::smt::{BvOp, CmpOp};

/// Which state a read observes: the pre-state, or the copy after the
/// first `k` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StateVer {
    Old,
    New(usize),
}

/// Resolved, width-checked specification expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum SpecExpr {
    Bool(bool),
    Lit { value: u64, width: u32 },
    Arg { index: usize, width: u32 },
    Read { ver: StateVer, field: Field, indices: Vec<SpecExpr> },
    Not(Box<SpecExpr>),
    And(Vec<SpecExpr>),
    Or(Vec<SpecExpr>),
    Implies(Box<SpecExpr>, Box<SpecExpr>),
    Eq(Box<SpecExpr>, Box<SpecExpr>),
    Cmp(CmpOp, Box<SpecExpr>, Box<SpecExpr>),
    Bin(BvOp, Box<SpecExpr>, Box<SpecExpr>),
    Neg(Box<SpecExpr>),
    Ite(Box<SpecExpr>, Box<SpecExpr>, Box<SpecExpr>),
}

impl SpecExpr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a SpecExpr)) {
        f(self);
        match self {
            SpecExpr::Bool(_) | SpecExpr::Lit { .. } | SpecExpr::Arg { .. } => {}
            SpecExpr::Read { indices, .. } => indices.iter().for_each(|i| i.walk(f)),
            SpecExpr::Not(a) | SpecExpr::Neg(a) => a.walk(f),
            SpecExpr::And(xs) | SpecExpr::Or(xs) => xs.iter().for_each(|x| x.walk(f)),
            SpecExpr::Implies(a, b) | SpecExpr::Eq(a, b) | SpecExpr::Cmp(_, a, b) | SpecExpr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            SpecExpr::Ite(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecWrite {
    pub field: Field,
    pub indices: Vec<SpecExpr>,
    pub value: SpecExpr,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateSel {
    Old,
    New,
}

/// Second component of the returned pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PostState {
    Direct(StateSel),
    If(SpecExpr, StateSel, StateSel),
}

/// A type-checked specification ready for evaluation or encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Spec {
    pub name: String,
    pub state_param: String,
    pub params: Vec<String>,
    pub width: u32,
    pub guard: SpecExpr,
    pub writes: Vec<SpecWrite>,
    pub post: PostState,
}

impl Spec {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// Top-level conjuncts of the guard (nested `And`s are not flattened).
    pub fn guard_conjuncts(&self) -> Vec<&SpecExpr> {
        match &self.guard {
            SpecExpr::And(xs) => xs.iter().collect(),
            g => vec![g],
        }
    }
}
