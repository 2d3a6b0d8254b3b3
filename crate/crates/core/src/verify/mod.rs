// SPDX-License-Identifier: Apache-2.0

//! Equivalence checking between an implementation behavior and a spec.

mod cache;
mod diff;
mod judge;
mod query;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use cache::VerdictCache;
pub use diff::{differential_check, disagreement, sample_args, sample_state, DiffOutcome};
pub use judge::{judge_task, oracle_pattern, TaskVerdict, VariantImpl, VariantOutcome};
pub use query::{build_query, emit_smtlib, EquivQuery};

use crate::kernel::{Kernel, KernelState, Schema};
use crate::smt::{run_solver, SolverConfig, SolverError, SolverResponse};
use crate::spec::{eval_spec, load_spec, FaultKind, Inventory, Spec, SpecFault, Span};
use crate::symex::{concretize, ImplBehavior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    Counterexample,
    SpecFaulted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Smt,
    Diff,
    Both,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smt" => Ok(Backend::Smt),
            "diff" => Ok(Backend::Diff),
            "both" => Ok(Backend::Both),
            other => Err(format!("unknown backend `{other}` (expected smt, diff or both)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub backend: Backend,
    pub solver: SolverConfig,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { backend: Backend::Smt, solver: SolverConfig::from_env(), samples: 10_000, seed: 42 }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("witness does not replay for `{0}`: the encoding and the evaluators disagree")]
    Replay(String),
    #[error("oracle spec faults: {0}")]
    OracleFault(SpecFault),
    #[error("backends disagree on `{0}`: the solver proved equivalence but sampling found a divergence")]
    BackendDisagreement(String),
}

/// Concrete evidence of divergence at (S*, a*).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub args: Vec<u64>,
    pub state: KernelState,
    pub impl_status: u64,
    pub impl_errno: Option<String>,
    pub impl_post: KernelState,
    /// `Err` when the spec faults at the witness.
    pub spec: Result<(bool, KernelState), SpecFault>,
}

impl Witness {
    /// Cells on which the two post-states differ (when both succeed).
    pub fn differing_cells(&self) -> Vec<String> {
        match &self.spec {
            Ok((true, post)) if self.impl_status == 0 => {
                self.impl_post.diff(post).iter().map(Schema::cell_symbol).collect()
            }
            _ => vec![],
        }
    }

    pub fn to_json(&self, arg_names: &[String]) -> Value {
        let args: BTreeMap<&str, u64> = arg_names.iter().map(String::as_str).zip(self.args.iter().copied()).collect();
        let spec = match &self.spec {
            Ok((phi, post)) => json!({ "guard": phi, "post_diff": post.diff(&self.state).iter().map(Schema::cell_symbol).collect::<Vec<_>>() }),
            Err(f) => json!({ "fault": f }),
        };
        json!({
            "args": args,
            "state": self.state.to_json(),
            "impl": {
                "status": self.impl_status,
                "errno": self.impl_errno,
                "post_diff": self.impl_post.diff(&self.state).iter().map(Schema::cell_symbol).collect::<Vec<_>>(),
            },
            "spec": spec,
            "differing_cells": self.differing_cells(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub fault: Option<SpecFault>,
    /// The SMT-LIB script the verdict came from, when the solver ran.
    pub smt_script: Option<String>,
}

impl VerifyOutcome {
    fn verified() -> Self {
        VerifyOutcome { verdict: Verdict::Verified, witness: None, fault: None, smt_script: None }
    }

    fn counterexample(w: Witness) -> Self {
        VerifyOutcome { verdict: Verdict::Counterexample, witness: Some(w), fault: None, smt_script: None }
    }

    pub fn faulted(f: SpecFault) -> Self {
        VerifyOutcome { verdict: Verdict::SpecFaulted, witness: None, fault: Some(f), smt_script: None }
    }

    fn with_script(mut self, script: String) -> Self {
        self.smt_script = Some(script);
        self
    }
}

/// Runs both sides at a concrete point; `Some` iff they diverge.
pub fn replay(b: &ImplBehavior, spec: &Spec, state: &KernelState, args: &[u64]) -> Option<Witness> {
    let imp = concretize(b, state, args);
    let sp = eval_spec(spec, state, args);
    let diverges = match &sp {
        Err(_) => true,
        Ok((phi, post)) => (imp.status == 0) != *phi || (*phi && imp.post != *post),
    };
    diverges.then(|| Witness {
        args: args.to_vec(),
        state: state.clone(),
        impl_status: imp.status,
        impl_errno: imp.errno,
        impl_post: imp.post,
        spec: sp,
    })
}

fn arity_fault(b: &ImplBehavior, spec: &Spec) -> Option<SpecFault> {
    (spec.arity() != b.arity()).then(|| {
        SpecFault::new(
            FaultKind::DomainError,
            format!("`{}` takes {} argument(s) but the implementation takes {}", spec.name, spec.arity(), b.arity()),
            Span::default(),
        )
    })
}

fn check_smt(b: &ImplBehavior, spec: &Spec, kernel: &Kernel, cfg: &VerifyConfig) -> Result<VerifyOutcome, VerifyError> {
    let q = build_query(b, spec, &kernel.schema);
    let script = emit_smtlib(&q);
    let outcome = match run_solver(&cfg.solver, &script)? {
        SolverResponse::Unsat => VerifyOutcome::verified(),
        SolverResponse::Sat(model) => {
            let (state, args) = q.model_point(&model, &kernel.schema);
            let w = replay(b, spec, &state, &args).ok_or_else(|| VerifyError::Replay(b.name.clone()))?;
            VerifyOutcome::counterexample(w)
        }
    };
    Ok(outcome.with_script(script))
}

/// Decides equivalence of a typed spec against a behavior.
pub fn check_equiv(b: &ImplBehavior, spec: &Spec, kernel: &Kernel, cfg: &VerifyConfig) -> Result<VerifyOutcome, VerifyError> {
    if let Some(f) = arity_fault(b, spec) {
        return Ok(VerifyOutcome::faulted(f));
    }
    match cfg.backend {
        Backend::Smt => check_smt(b, spec, kernel, cfg),
        Backend::Diff => Ok(match differential_check(b, spec, &kernel.schema, cfg.samples, cfg.seed) {
            DiffOutcome::VerifiedSoFar => VerifyOutcome::verified(),
            DiffOutcome::Counterexample(w) => VerifyOutcome::counterexample(*w),
        }),
        Backend::Both => {
            let smt = check_smt(b, spec, kernel, cfg)?;
            let diff = differential_check(b, spec, &kernel.schema, cfg.samples, cfg.seed);
            if smt.verdict == Verdict::Verified && matches!(diff, DiffOutcome::Counterexample(_)) {
                return Err(VerifyError::BackendDisagreement(b.name.clone()));
            }
            Ok(smt)
        }
    }
}

/// Loads the spec text first; parse and type faults short-circuit.
pub fn check_equiv_text(
    b: &ImplBehavior,
    text: &str,
    kernel: &Kernel,
    inventory: &Inventory,
    cfg: &VerifyConfig,
) -> Result<VerifyOutcome, VerifyError> {
    match load_spec(text, kernel, inventory) {
        Ok(spec) => check_equiv(b, &spec, kernel, cfg),
        Err(f) => Ok(VerifyOutcome::faulted(f)),
    }
}
