// SPDX-License-Identifier: Apache-2.0

//! The specification language: a closed Python/Z3-flavoured grammar with
//! its own parser, checker, linter, evaluator and symbolic encoder.

pub mod ast;
mod encode;
mod eval;
mod fault;
mod inventory;
mod lexer;
mod lint;
mod parser;
mod printer;
mod resolve;
mod typed;

pub use ast::{SpecAst, Span};
pub use encode::{encode_spec, SpecEncoding};
pub use eval::eval_spec;
pub use fault::{FaultKind, SpecFault};
pub use inventory::{ApiFunction, ApiOp, Inventory};
pub use lint::{lint_source, lint_spec, LintFinding, Severity, LINT_CATEGORIES};
pub use parser::{parse_spec, DUAL_ACCESS_MSG};
pub use printer::{print_expr, print_spec};
pub use resolve::typecheck_spec;
pub use typed::{PostState, Spec, SpecExpr, SpecWrite, StateSel, StateVer};

use crate::kernel::Kernel;

/// Parses and type-checks in one step.
pub fn load_spec(text: &str, kernel: &Kernel, inventory: &Inventory) -> Result<Spec, SpecFault> {
    let ast = parse_spec(text)?;
    typecheck_spec(&ast, kernel, inventory)
}
