// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::kernel::Kernel;
use crate::spec::{load_spec, Inventory, SpecFault};
use crate::symex::ImplBehavior;

use super::{check_equiv, Verdict, VerdictCache, VerifyConfig, VerifyError, VerifyOutcome};

/// One implementation variant of a syscall, identified by task id.
#[derive(Debug, Clone)]
pub struct VariantImpl {
    pub id: String,
    pub behavior: ImplBehavior,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantOutcome {
    pub variant: String,
    pub verdict: Verdict,
    pub expected: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskVerdict {
    pub task_id: String,
    pub pass: bool,
    pub outcomes: Vec<VariantOutcome>,
    pub fault: Option<SpecFault>,
    #[serde(skip)]
    pub details: Vec<VerifyOutcome>,
}

fn verify_all(
    text: &str,
    variants: &[VariantImpl],
    kernel: &Kernel,
    inventory: &Inventory,
    cfg: &VerifyConfig,
    cache: &VerdictCache,
) -> Result<Result<Vec<VerifyOutcome>, SpecFault>, VerifyError> {
    let spec = match load_spec(text, kernel, inventory) {
        Ok(s) => s,
        Err(f) => return Ok(Err(f)),
    };
    let mut out = Vec::with_capacity(variants.len());
    for v in variants {
        let key = VerdictCache::key(&v.behavior, text, cfg);
        let o = match cache.get(&key) {
            Some(o) => o,
            None => {
                let o = check_equiv(&v.behavior, &spec, kernel, cfg)?;
                cache.insert(key, o.clone());
                o
            }
        };
        if let (Verdict::SpecFaulted, Some(f)) = (o.verdict, &o.fault) {
            return Ok(Err(f.clone()));
        }
        out.push(o);
    }
    Ok(Ok(out))
}

/// The oracle spec's verdict on every variant.
pub fn oracle_pattern(
    oracle_text: &str,
    variants: &[VariantImpl],
    kernel: &Kernel,
    inventory: &Inventory,
    cfg: &VerifyConfig,
    cache: &VerdictCache,
) -> Result<Vec<Verdict>, VerifyError> {
    match verify_all(oracle_text, variants, kernel, inventory, cfg, cache)? {
        Ok(v) => Ok(v.iter().map(|o| o.verdict).collect()),
        Err(f) => Err(VerifyError::OracleFault(f)),
    }
}

/// Passes iff the generated spec loads and its verdict on every variant
/// matches the oracle's.
#[allow(clippy::too_many_arguments)]
pub fn judge_task(
    task_id: &str,
    gen_text: &str,
    variants: &[VariantImpl],
    pattern: &[Verdict],
    kernel: &Kernel,
    inventory: &Inventory,
    cfg: &VerifyConfig,
    cache: &VerdictCache,
) -> Result<TaskVerdict, VerifyError> {
    assert_eq!(variants.len(), pattern.len(), "one oracle verdict per variant");
    match verify_all(gen_text, variants, kernel, inventory, cfg, cache)? {
        Err(f) => Ok(TaskVerdict { task_id: task_id.into(), pass: false, outcomes: vec![], fault: Some(f), details: vec![] }),
        Ok(details) => {
            let outcomes: Vec<VariantOutcome> = variants
                .iter()
                .zip(&details)
                .zip(pattern)
                .map(|((v, o), e)| VariantOutcome { variant: v.id.clone(), verdict: o.verdict, expected: *e })
                .collect();
            let pass = outcomes.iter().all(|o| o.verdict == o.expected);
            Ok(TaskVerdict { task_id: task_id.into(), pass, outcomes, fault: None, details })
        }
    }
}
