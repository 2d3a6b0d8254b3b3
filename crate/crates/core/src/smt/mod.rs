// SPDX-License-Identifier: Apache-2.0

//! QF_BV terms, SMT-LIB 2 emission and the external solver driver.

pub mod sexpr;
pub mod solver;
pub mod term;

pub use solver::{run_solver, SolverConfig, SolverError, SolverResponse};
pub use term::{BvOp, CmpOp, Node, Sort, TermId, TermPool};

use crate::kernel::Schema;

/// Declares one bitvector symbol per state cell, in flat cell order.
pub fn declare_state(pool: &mut TermPool, schema: &Schema) -> Vec<TermId> {
    schema
        .cells()
        .iter()
        .map(|c| pool.var(Schema::cell_symbol(c), Sort::Bv(schema.width)))
        .collect()
}

/// Declares `arg_<name>` symbols for syscall arguments.
pub fn declare_args(pool: &mut TermPool, names: &[String], width: u32) -> Vec<TermId> {
    names.iter().map(|n| pool.var(format!("arg_{n}"), Sort::Bv(width))).collect()
}
