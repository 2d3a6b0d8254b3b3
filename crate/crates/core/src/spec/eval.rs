// SPDX-License-Identifier: Apache-2.0

use crate::bv;
use crate::kernel::{mask, KernelState};
use crate::smt::{BvOp, CmpOp};

use super::ast::Span;
use super::fault::{FaultKind, SpecFault};
use super::typed::*;

/// Concrete interpretation of a spec: `(φ, S′)` with S′ equal to the input
/// whenever φ is false. An out-of-domain index anywhere in the spec reads 0
/// or drops the write; if φ holds, it is reported as a DomainError.
pub fn eval_spec(spec: &Spec, s: &KernelState, args: &[u64]) -> Result<(bool, KernelState), SpecFault> {
    if args.len() != spec.arity() {
        return Err(SpecFault::new(
            FaultKind::DomainError,
            format!("`{}` takes {} argument(s), got {}", spec.name, spec.arity(), args.len()),
            Span::default(),
        ));
    }
    let mut ev = Evaluator { spec, args, states: vec![s.clone()], oob: false, oob_line: 0 };
    let phi = ev.eval(&spec.guard) == 1;
    if !phi {
        return Ok((false, s.clone()));
    }
    ev.ensure_version(spec.writes.len());
    let take_new = match &spec.post {
        PostState::Direct(sel) => *sel == StateSel::New,
        PostState::If(c, a, b) => {
            if ev.eval(c) == 1 {
                *a == StateSel::New
            } else {
                *b == StateSel::New
            }
        }
    };
    if ev.oob {
        return Err(SpecFault::new(
            FaultKind::DomainError,
            "index out of domain while the guard holds",
            Span::new(ev.oob_line, 0),
        ));
    }
    let post = if take_new { ev.states.pop().unwrap() } else { s.clone() };
    Ok((true, post))
}

struct Evaluator<'a> {
    spec: &'a Spec,
    args: &'a [u64],
    states: Vec<KernelState>,
    oob: bool,
    oob_line: u32,
}

impl Evaluator<'_> {
    fn ensure_version(&mut self, k: usize) {
        while self.states.len() <= k {
            let i = self.states.len() - 1;
            let w = &self.spec.writes[i];
            let idx: Vec<u64> = w.indices.iter().map(|e| self.eval(e)).collect();
            let v = self.eval(&w.value);
            let mut next = self.states[i].clone();
            if !next.set(w.field, &idx, v) {
                self.oob = true;
                self.oob_line = w.line;
            }
            self.states.push(next);
        }
    }

    /// Every subexpression is evaluated (no short-circuit), so that the
    /// out-of-domain flag covers all accesses.
    fn eval(&mut self, e: &SpecExpr) -> u64 {
        match e {
            SpecExpr::Bool(b) => u64::from(*b),
            SpecExpr::Lit { value, .. } => *value,
            SpecExpr::Arg { index, width } => self.args[*index] & mask(*width),
            SpecExpr::Read { ver, field, indices } => {
                let idx: Vec<u64> = indices.iter().map(|i| self.eval(i)).collect();
                let k = match ver {
                    StateVer::Old => 0,
                    StateVer::New(k) => {
                        self.ensure_version(*k);
                        *k
                    }
                };
                let state = if *ver == StateVer::Old { &self.states[0] } else { &self.states[k] };
                match state.read(*field, &idx) {
                    Ok(v) => v,
                    Err(_) => {
                        self.oob = true;
                        0
                    }
                }
            }
            SpecExpr::Not(a) => 1 - self.eval(a),
            SpecExpr::And(xs) => {
                let vals: Vec<u64> = xs.iter().map(|x| self.eval(x)).collect();
                u64::from(vals.iter().all(|v| *v == 1))
            }
            SpecExpr::Or(xs) => {
                let vals: Vec<u64> = xs.iter().map(|x| self.eval(x)).collect();
                u64::from(vals.contains(&1))
            }
            SpecExpr::Implies(a, b) => {
                let (a, b) = (self.eval(a), self.eval(b));
                u64::from(a == 0 || b == 1)
            }
            SpecExpr::Eq(a, b) => {
                let (a, b) = (self.eval(a), self.eval(b));
                u64::from(a == b)
            }
            SpecExpr::Cmp(op, a, b) => {
                let w = width_of(a, self.spec.width);
                let (x, y) = (self.eval(a), self.eval(b));
                u64::from(match op {
                    CmpOp::Ult => x < y,
                    CmpOp::Ule => x <= y,
                    CmpOp::Slt => bv::slt(x, y, w),
                    CmpOp::Sle => bv::sle(x, y, w),
                })
            }
            SpecExpr::Bin(op, a, b) => {
                let w = width_of(a, self.spec.width);
                let (x, y) = (self.eval(a), self.eval(b));
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
            SpecExpr::Neg(a) => {
                let w = width_of(a, self.spec.width);
                let x = self.eval(a);
                bv::neg(x, w)
            }
            SpecExpr::Ite(c, a, b) => {
                let (c, a, b) = (self.eval(c), self.eval(a), self.eval(b));
                if c == 1 {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// Bit width of a bitvector-valued expression; state reads are words.
pub fn width_of(e: &SpecExpr, word: u32) -> u32 {
    match e {
        SpecExpr::Lit { width, .. } | SpecExpr::Arg { width, .. } => *width,
        SpecExpr::Read { .. } => word,
        SpecExpr::Bin(_, a, _) | SpecExpr::Neg(a) | SpecExpr::Ite(_, a, _) => width_of(a, word),
        _ => 1,
    }
}
