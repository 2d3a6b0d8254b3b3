// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bv;
use crate::kernel::mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(u32),
}

impl Sort {
    fn smt(self) -> String {
        match self {
            Sort::Bool => "Bool".into(),
            Sort::Bv(w) => format!("(_ BitVec {w})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Ult,
    Ule,
    Slt,
    Sle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BvOp {
    Add,
    Sub,
    Mul,
    UDiv,
    Shl,
    Or,
    And,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Bool(bool),
    Bv(u64, u32),
    Var(u32),
    Not(TermId),
    And(Vec<TermId>),
    Or(Vec<TermId>),
    Implies(TermId, TermId),
    Xor(TermId, TermId),
    Eq(TermId, TermId),
    Ite(TermId, TermId, TermId),
    Cmp(CmpOp, TermId, TermId),
    Bin(BvOp, TermId, TermId),
    Neg(TermId),
}

/// Hash-consed arena of QF_BV terms. Children always precede parents, so
/// node order is a topological order.
#[derive(Debug, Default, Clone)]
pub struct TermPool {
    nodes: Vec<Node>,
    sorts: Vec<Sort>,
    dedup: HashMap<Node, TermId>,
    vars: Vec<(String, Sort, TermId)>,
}

impl TermPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t.index()]
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.sorts[t.index()]
    }

    fn width(&self, t: TermId) -> u32 {
        match self.sort(t) {
            Sort::Bv(w) => w,
            Sort::Bool => panic!("expected a bitvector term"),
        }
    }

    fn intern(&mut self, node: Node, sort: Sort) -> TermId {
        if let Some(id) = self.dedup.get(&node) {
            return *id;
        }
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.sorts.push(sort);
        self.dedup.insert(node, id);
        id
    }

    pub fn bool(&mut self, b: bool) -> TermId {
        self.intern(Node::Bool(b), Sort::Bool)
    }

    pub fn tt(&mut self) -> TermId {
        self.bool(true)
    }

    pub fn ff(&mut self) -> TermId {
        self.bool(false)
    }

    pub fn bv(&mut self, value: u64, width: u32) -> TermId {
        self.intern(Node::Bv(value & mask(width), width), Sort::Bv(width))
    }

    /// Declares a fresh free symbol.
    pub fn var(&mut self, name: impl Into<String>, sort: Sort) -> TermId {
        let idx = self.vars.len() as u32;
        let id = self.intern(Node::Var(idx), sort);
        self.vars.push((name.into(), sort, id));
        id
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, Sort, TermId)> {
        self.vars.iter().map(|(n, s, t)| (n.as_str(), *s, *t))
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn as_bool(&self, t: TermId) -> Option<bool> {
        match self.node(t) {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_bv(&self, t: TermId) -> Option<u64> {
        match self.node(t) {
            Node::Bv(v, _) => Some(*v),
            _ => None,
        }
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.node(a).clone() {
            Node::Bool(b) => self.bool(!b),
            Node::Not(x) => x,
            _ => self.intern(Node::Not(a), Sort::Bool),
        }
    }

    pub fn and(&mut self, items: impl IntoIterator<Item = TermId>) -> TermId {
        let mut kept = Vec::new();
        for t in items {
            match self.as_bool(t) {
                Some(true) => {}
                Some(false) => return self.ff(),
                None => {
                    if !kept.contains(&t) {
                        kept.push(t)
                    }
                }
            }
        }
        match kept.len() {
            0 => self.tt(),
            1 => kept[0],
            _ => self.intern(Node::And(kept), Sort::Bool),
        }
    }

    pub fn or(&mut self, items: impl IntoIterator<Item = TermId>) -> TermId {
        let mut kept = Vec::new();
        for t in items {
            match self.as_bool(t) {
                Some(false) => {}
                Some(true) => return self.tt(),
                None => {
                    if !kept.contains(&t) {
                        kept.push(t)
                    }
                }
            }
        }
        match kept.len() {
            0 => self.ff(),
            1 => kept[0],
            _ => self.intern(Node::Or(kept), Sort::Bool),
        }
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.as_bool(a), self.as_bool(b)) {
            (Some(false), _) | (_, Some(true)) => self.tt(),
            (Some(true), _) => b,
            (_, Some(false)) => self.not(a),
            _ => self.intern(Node::Implies(a, b), Sort::Bool),
        }
    }

    pub fn xor(&mut self, a: TermId, b: TermId) -> TermId {
        match (self.as_bool(a), self.as_bool(b)) {
            (Some(x), Some(y)) => self.bool(x != y),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            (Some(true), _) => self.not(b),
            (_, Some(true)) => self.not(a),
            _ if a == b => self.ff(),
            _ => self.intern(Node::Xor(a, b), Sort::Bool),
        }
    }

    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        assert_eq!(self.sort(a), self.sort(b), "sort mismatch in eq");
        if a == b {
            return self.tt();
        }
        match (self.node(a), self.node(b)) {
            (Node::Bv(x, _), Node::Bv(y, _)) => {
                let r = x == y;
                self.bool(r)
            }
            (Node::Bool(x), Node::Bool(y)) => {
                let r = x == y;
                self.bool(r)
            }
            _ => {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                self.intern(Node::Eq(a, b), Sort::Bool)
            }
        }
    }

    pub fn ne(&mut self, a: TermId, b: TermId) -> TermId {
        let e = self.eq(a, b);
        self.not(e)
    }

    pub fn ite(&mut self, c: TermId, a: TermId, b: TermId) -> TermId {
        assert_eq!(self.sort(a), self.sort(b), "sort mismatch in ite");
        match self.as_bool(c) {
            Some(true) => a,
            Some(false) => b,
            None if a == b => a,
            None => {
                let sort = self.sort(a);
                self.intern(Node::Ite(c, a, b), sort)
            }
        }
    }

    pub fn cmp(&mut self, op: CmpOp, a: TermId, b: TermId) -> TermId {
        let w = self.width(a);
        assert_eq!(w, self.width(b), "width mismatch in comparison");
        if let (Some(x), Some(y)) = (self.as_bv(a), self.as_bv(b)) {
            let r = match op {
                CmpOp::Ult => x < y,
                CmpOp::Ule => x <= y,
                CmpOp::Slt => bv::slt(x, y, w),
                CmpOp::Sle => bv::sle(x, y, w),
            };
            return self.bool(r);
        }
        self.intern(Node::Cmp(op, a, b), Sort::Bool)
    }

    pub fn ult(&mut self, a: TermId, b: TermId) -> TermId {
        self.cmp(CmpOp::Ult, a, b)
    }

    pub fn bin(&mut self, op: BvOp, a: TermId, b: TermId) -> TermId {
        let w = self.width(a);
        assert_eq!(w, self.width(b), "width mismatch in {op:?}");
        if let (Some(x), Some(y)) = (self.as_bv(a), self.as_bv(b)) {
            let r = match op {
                BvOp::Add => bv::add(x, y, w),
                BvOp::Sub => bv::sub(x, y, w),
                BvOp::Mul => bv::mul(x, y, w),
                BvOp::UDiv => bv::udiv(x, y, w),
                BvOp::Shl => bv::shl(x, y, w),
                BvOp::Or => x | y,
                BvOp::And => x & y,
            };
            return self.bv(r, w);
        }
        let zero_right = self.as_bv(b) == Some(0);
        if zero_right && matches!(op, BvOp::Add | BvOp::Sub | BvOp::Or | BvOp::Shl) {
            return a;
        }
        if self.as_bv(a) == Some(0) && matches!(op, BvOp::Add | BvOp::Or) {
            return b;
        }
        self.intern(Node::Bin(op, a, b), Sort::Bv(w))
    }

    pub fn neg(&mut self, a: TermId) -> TermId {
        let w = self.width(a);
        match self.as_bv(a) {
            Some(x) => self.bv(bv::neg(x, w), w),
            None => self.intern(Node::Neg(a), Sort::Bv(w)),
        }
    }

    /// Evaluates every node up to the largest root under a full assignment
    /// of the declared variables (booleans as 0/1).
    pub fn eval_many(&self, roots: &[TermId], env: &[u64]) -> Vec<u64> {
        assert_eq!(env.len(), self.vars.len(), "assignment must cover every variable");
        let Some(top) = roots.iter().map(|r| r.index()).max() else {
            return vec![];
        };
        let mut vals = vec![0u64; top + 1];
        for i in 0..=top {
            let v = |t: &TermId| vals[t.index()];
            let w = match self.sorts[i] {
                Sort::Bv(w) => w,
                Sort::Bool => 1,
            };
            let r = match &self.nodes[i] {
                Node::Bool(b) => u64::from(*b),
                Node::Bv(x, _) => *x,
                Node::Var(k) => env[*k as usize],
                Node::Not(a) => 1 - v(a),
                Node::And(xs) => u64::from(xs.iter().all(|x| v(x) == 1)),
                Node::Or(xs) => u64::from(xs.iter().any(|x| v(x) == 1)),
                Node::Implies(a, b) => u64::from(v(a) == 0 || v(b) == 1),
                Node::Xor(a, b) => v(a) ^ v(b),
                Node::Eq(a, b) => u64::from(v(a) == v(b)),
                Node::Ite(c, a, b) => {
                    if v(c) == 1 {
                        v(a)
                    } else {
                        v(b)
                    }
                }
                Node::Cmp(op, a, b) => {
                    let cw = self.width(*a);
                    u64::from(match op {
                        CmpOp::Ult => v(a) < v(b),
                        CmpOp::Ule => v(a) <= v(b),
                        CmpOp::Slt => bv::slt(v(a), v(b), cw),
                        CmpOp::Sle => bv::sle(v(a), v(b), cw),
                    })
                }
                Node::Bin(op, a, b) => {
                    let (x, y) = (v(a), v(b));
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
                Node::Neg(a) => bv::neg(v(a), w),
            };
            vals[i] = r;
        }
        roots.iter().map(|r| vals[r.index()]).collect()
    }

    pub fn eval(&self, root: TermId, env: &[u64]) -> u64 {
        self.eval_many(&[root], env)[0]
    }

    fn children(&self, t: TermId) -> Vec<TermId> {
        match self.node(t) {
            Node::Bool(_) | Node::Bv(..) | Node::Var(_) => vec![],
            Node::Not(a) | Node::Neg(a) => vec![*a],
            Node::And(xs) | Node::Or(xs) => xs.clone(),
            Node::Implies(a, b) | Node::Xor(a, b) | Node::Eq(a, b) | Node::Cmp(_, a, b) | Node::Bin(_, a, b) => {
                vec![*a, *b]
            }
            Node::Ite(c, a, b) => vec![*c, *a, *b],
        }
    }

    /// Renders an SMT-LIB 2 script: every declared variable, shared
    /// subterms as `define-fun`s, one assertion per root.
    pub fn to_smtlib(&self, logic: &str, asserts: &[TermId], trailer: &[&str]) -> String {
        let mut reachable = vec![false; self.nodes.len()];
        let mut refs = vec![0u32; self.nodes.len()];
        let mut stack: Vec<TermId> = asserts.to_vec();
        while let Some(t) = stack.pop() {
            if reachable[t.index()] {
                continue;
            }
            reachable[t.index()] = true;
            for c in self.children(t) {
                refs[c.index()] += 1;
                stack.push(c);
            }
        }
        let shared: Vec<bool> = (0..self.nodes.len())
            .map(|i| reachable[i] && refs[i] > 1 && !self.children(TermId(i as u32)).is_empty())
            .collect();

        let mut out = String::new();
        let _ = writeln!(out, "(set-logic {logic})");
        let _ = writeln!(out, "(set-option :produce-models true)");
        for (name, sort, _) in &self.vars {
            let _ = writeln!(out, "(declare-const {name} {})", sort.smt());
        }
        for i in 0..self.nodes.len() {
            if shared[i] {
                let body = self.render(TermId(i as u32), &shared, true);
                let _ = writeln!(out, "(define-fun t{i} () {} {body})", self.sorts[i].smt());
            }
        }
        for a in asserts {
            let _ = writeln!(out, "(assert {})", self.render(*a, &shared, true));
        }
        for line in trailer {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    fn render(&self, t: TermId, shared: &[bool], top: bool) -> String {
        if shared[t.index()] && !top {
            return format!("t{}", t.index());
        }
        let r = |x: &TermId| self.render(*x, shared, false);
        let list = |head: &str, xs: &[TermId]| {
            let parts: Vec<String> = xs.iter().map(r).collect();
            format!("({head} {})", parts.join(" "))
        };
        match self.node(t) {
            Node::Bool(b) => b.to_string(),
            Node::Bv(v, w) => format!("(_ bv{v} {w})"),
            Node::Var(k) => self.vars[*k as usize].0.clone(),
            Node::Not(a) => list("not", &[*a]),
            Node::And(xs) => list("and", xs),
            Node::Or(xs) => list("or", xs),
            Node::Implies(a, b) => list("=>", &[*a, *b]),
            Node::Xor(a, b) => list("xor", &[*a, *b]),
            Node::Eq(a, b) => list("=", &[*a, *b]),
            Node::Ite(c, a, b) => list("ite", &[*c, *a, *b]),
            Node::Cmp(op, a, b) => {
                let head = match op {
                    CmpOp::Ult => "bvult",
                    CmpOp::Ule => "bvule",
                    CmpOp::Slt => "bvslt",
                    CmpOp::Sle => "bvsle",
                };
                list(head, &[*a, *b])
            }
            Node::Bin(op, a, b) => {
                let head = match op {
                    BvOp::Add => "bvadd",
                    BvOp::Sub => "bvsub",
                    BvOp::Mul => "bvmul",
                    BvOp::UDiv => "bvudiv",
                    BvOp::Shl => "bvshl",
                    BvOp::Or => "bvor",
                    BvOp::And => "bvand",
                };
                list(head, &[*a, *b])
            }
            Node::Neg(a) => list("bvneg", &[*a]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_hash_consing() {
        let mut p = TermPool::new();
        let x = p.var("x", Sort::Bv(64));
        let one = p.bv(1, 64);
        let a = p.bin(BvOp::Add, x, one);
        let b = p.bin(BvOp::Add, x, one);
        assert_eq!(a, b);
        let two = p.bv(2, 64);
        let three = p.bin(BvOp::Add, one, two);
        assert_eq!(p.as_bv(three), Some(3));
        let e = p.eq(a, a);
        assert_eq!(p.as_bool(e), Some(true));
        let t = p.tt();
        let f = p.ff();
        assert_eq!(p.and([t, e]), t);
        assert_eq!(p.and([t, f, e]), f);
    }

    #[test]
    fn nested_and_is_not_flattened() {
        let mut p = TermPool::new();
        let x = p.var("x", Sort::Bool);
        let y = p.var("y", Sort::Bool);
        let z = p.var("z", Sort::Bool);
        let inner = p.and([x, y]);
        let outer = p.and([inner, z]);
        assert!(matches!(p.node(outer), Node::And(xs) if xs.len() == 2));
    }

    #[test]
    fn eval_matches_semantics() {
        let mut p = TermPool::new();
        let x = p.var("x", Sort::Bv(8));
        let y = p.var("y", Sort::Bv(8));
        let lt = p.cmp(CmpOp::Slt, x, y);
        let d = p.bin(BvOp::UDiv, x, y);
        assert_eq!(p.eval(lt, &[0xFF, 0]), 1);
        assert_eq!(p.eval(d, &[7, 0]), 0xFF);
        let c = p.ite(lt, x, y);
        assert_eq!(p.eval(c, &[3, 9]), 3);
    }

    #[test]
    fn script_is_deterministic_and_shares_subterms() {
        let build = || {
            let mut p = TermPool::new();
            let x = p.var("x", Sort::Bv(64));
            let one = p.bv(1, 64);
            let s = p.bin(BvOp::Add, x, one);
            let m = p.bin(BvOp::Mul, s, s);
            let zero = p.bv(0, 64);
            let goal = p.eq(m, zero);
            p.to_smtlib("QF_BV", &[goal], &["(check-sat)"])
        };
        let a = build();
        assert_eq!(a, build());
        assert!(a.contains("(declare-const x (_ BitVec 64))"));
        assert!(a.contains("(define-fun t"));
        assert!(a.ends_with("(check-sat)\n"));
    }
}
