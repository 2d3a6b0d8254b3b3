// SPDX-License-Identifier: Apache-2.0

use crate::kernel::{Field, Schema};
use crate::smt::{TermId, TermPool};

use super::typed::*;

/// Symbolic image of a spec over symbolic pre-state cells and arguments.
#[derive(Debug, Clone)]
pub struct SpecEncoding {
    /// φ.
    pub guard: TermId,
    /// Post-state cell values: the selected state when φ holds, the pre-state otherwise.
    pub post: Vec<TermId>,
    /// φ together with some out-of-domain access.
    pub fault: TermId,
}

pub fn encode_spec(spec: &Spec, schema: &Schema, pool: &mut TermPool, pre: &[TermId], args: &[TermId]) -> SpecEncoding {
    assert_eq!(pre.len(), schema.num_cells(), "one term per state cell");
    assert_eq!(args.len(), spec.arity(), "one term per argument");
    let mut enc = Encoder { schema, pool, versions: vec![pre.to_vec()], args, oob: Vec::new(), width: spec.width };
    for w in &spec.writes {
        let idx: Vec<TermId> = w.indices.iter().map(|e| enc.term(e)).collect();
        let value = enc.term(&w.value);
        enc.note_access(w.field, &idx);
        let mut next = enc.versions.last().unwrap().clone();
        for t in schema.index_tuples(w.field) {
            let off = schema.offset(w.field, &t).unwrap();
            let hit = enc.index_match(&idx, &t);
            next[off] = enc.pool.ite(hit, value, next[off]);
        }
        enc.versions.push(next);
    }
    let guard = enc.term(&spec.guard);
    let n = spec.writes.len();
    let selected: Vec<TermId> = match &spec.post {
        PostState::Direct(StateSel::Old) => pre.to_vec(),
        PostState::Direct(StateSel::New) => enc.versions[n].clone(),
        PostState::If(c, a, b) => {
            let c = enc.term(c);
            let pick = |s: &StateSel, enc: &Encoder| match s {
                StateSel::Old => pre.to_vec(),
                StateSel::New => enc.versions[n].clone(),
            };
            let (a, b) = (pick(a, &enc), pick(b, &enc));
            a.iter().zip(&b).map(|(x, y)| enc.pool.ite(c, *x, *y)).collect()
        }
    };
    let post = selected.iter().zip(pre).map(|(s, p)| enc.pool.ite(guard, *s, *p)).collect();
    let any_oob = enc.pool.or(enc.oob.clone());
    let fault = enc.pool.and([guard, any_oob]);
    SpecEncoding { guard, post, fault }
}

struct Encoder<'a> {
    schema: &'a Schema,
    pool: &'a mut TermPool,
    versions: Vec<Vec<TermId>>,
    args: &'a [TermId],
    oob: Vec<TermId>,
    width: u32,
}

impl Encoder<'_> {
    fn index_match(&mut self, idx: &[TermId], tuple: &[u64]) -> TermId {
        let eqs: Vec<TermId> = idx
            .iter()
            .zip(tuple)
            .map(|(i, t)| {
                let c = self.pool.bv(*t, self.width);
                self.pool.eq(*i, c)
            })
            .collect();
        self.pool.and(eqs)
    }

    fn note_access(&mut self, field: Field, idx: &[TermId]) {
        let outs: Vec<TermId> = idx
            .iter()
            .zip(self.schema.dims(field))
            .map(|(i, d)| {
                let dim = self.pool.bv(d, self.width);
                let inside = self.pool.ult(*i, dim);
                self.pool.not(inside)
            })
            .collect();
        let o = self.pool.or(outs);
        self.oob.push(o);
    }

    fn term(&mut self, e: &SpecExpr) -> TermId {
        match e {
            SpecExpr::Bool(b) => self.pool.bool(*b),
            SpecExpr::Lit { value, width } => self.pool.bv(*value, *width),
            SpecExpr::Arg { index, .. } => self.args[*index],
            SpecExpr::Read { ver, field, indices } => {
                let idx: Vec<TermId> = indices.iter().map(|i| self.term(i)).collect();
                self.note_access(*field, &idx);
                let k = match ver {
                    StateVer::Old => 0,
                    StateVer::New(k) => *k,
                };
                let mut acc = self.pool.bv(0, self.width);
                for t in self.schema.index_tuples(*field).into_iter().rev() {
                    let off = self.schema.offset(*field, &t).unwrap();
                    let hit = self.index_match(&idx, &t);
                    acc = self.pool.ite(hit, self.versions[k][off], acc);
                }
                acc
            }
            SpecExpr::Not(a) => {
                let a = self.term(a);
                self.pool.not(a)
            }
            SpecExpr::And(xs) => {
                let ts: Vec<TermId> = xs.iter().map(|x| self.term(x)).collect();
                self.pool.and(ts)
            }
            SpecExpr::Or(xs) => {
                let ts: Vec<TermId> = xs.iter().map(|x| self.term(x)).collect();
                self.pool.or(ts)
            }
            SpecExpr::Implies(a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.pool.implies(a, b)
            }
            SpecExpr::Eq(a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.pool.eq(a, b)
            }
            SpecExpr::Cmp(op, a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.pool.cmp(*op, a, b)
            }
            SpecExpr::Bin(op, a, b) => {
                let (a, b) = (self.term(a), self.term(b));
                self.pool.bin(*op, a, b)
            }
            SpecExpr::Neg(a) => {
                let a = self.term(a);
                self.pool.neg(a)
            }
            SpecExpr::Ite(c, a, b) => {
                let (c, a, b) = (self.term(c), self.term(a), self.term(b));
                self.pool.ite(c, a, b)
            }
        }
    }
}

