// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::cfront::ir::index_match;
use crate::kernel::{KernelState, Schema};
use crate::smt::{declare_args, declare_state, CmpOp, TermId, TermPool};
use crate::spec::{encode_spec, Spec};
use crate::symex::ImplBehavior;

/// Mismatch formula over per-cell pre-state symbols and argument symbols.
#[derive(Debug, Clone)]
pub struct EquivQuery {
    pub pool: TermPool,
    pub pre: Vec<TermId>,
    pub args: Vec<TermId>,
    pub arg_names: Vec<String>,
    pub mismatch: TermId,
}

impl EquivQuery {
    /// Reads a concrete point back out of a solver model; absent symbols are 0.
    pub fn model_point(&self, model: &BTreeMap<String, u64>, schema: &Schema) -> (KernelState, Vec<u64>) {
        let cells = schema.cells().iter().map(|c| model.get(&Schema::cell_symbol(c)).copied().unwrap_or(0)).collect();
        let state = KernelState::from_cells(*schema, cells).expect("cell count matches schema");
        let args = self.arg_names.iter().map(|n| model.get(&format!("arg_{n}")).copied().unwrap_or(0)).collect();
        (state, args)
    }
}

pub fn build_query(b: &ImplBehavior, spec: &Spec, schema: &Schema) -> EquivQuery {
    let mut pool = TermPool::new();
    let pre = declare_state(&mut pool, schema);
    let args = declare_args(&mut pool, &b.params, schema.width);
    let w = schema.width;

    let current = pre[schema.offset(crate::kernel::Field::Current, &[]).unwrap()];
    let zero = pool.bv(0, w);
    let nproc = pool.bv(schema.nproc, w);
    let lo = pool.cmp(CmpOp::Slt, zero, current);
    let hi = pool.cmp(CmpOp::Slt, current, nproc);
    let assume = pool.and([lo, hi]);

    let success = b.success();
    let impl_ok = success.guard.to_term(&mut pool, schema, &pre, &args);
    let mut applied = pre.clone();
    for u in &success.updates {
        let idx: Vec<TermId> = u.indices.iter().map(|i| i.to_term(&mut pool, schema, &pre, &args)).collect();
        let value = u.value.to_term(&mut pool, schema, &pre, &args);
        for t in schema.index_tuples(u.field) {
            let off = schema.offset(u.field, &t).unwrap();
            let hit = index_match(&mut pool, w, &idx, &t);
            applied[off] = pool.ite(hit, value, applied[off]);
        }
    }

    let enc = encode_spec(spec, schema, &mut pool, &pre, &args);
    let differs: Vec<TermId> = applied.iter().zip(&enc.post).map(|(a, s)| pool.ne(*a, *s)).collect();
    let any_differs = pool.or(differs);
    let status_mismatch = pool.xor(impl_ok, enc.guard);
    let both_ok_differ = pool.and([impl_ok, enc.guard, any_differs]);
    let body = pool.or([status_mismatch, enc.fault, both_ok_differ]);
    let mismatch = pool.and([assume, body]);
    EquivQuery { pool, pre, args, arg_names: b.params.clone(), mismatch }
}

/// SMT-LIB 2 text for the query: QF_BV, one `check-sat`, `get-model`.
pub fn emit_smtlib(q: &EquivQuery) -> String {
    q.pool.to_smtlib("QF_BV", &[q.mismatch], &["(check-sat)", "(get-model)"])
}
