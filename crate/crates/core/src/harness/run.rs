// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cfront::compile_impl;
use crate::corpus::SyscallDef;
use crate::kernel::Kernel;
use crate::prompt::{
    assemble_prompt, extract_spec_block, CompletionRequest, ModelConfig, PromptComponents, Provider, ProviderError, Usage,
};
use crate::spec::{lint_source, Inventory};
use crate::symex::execute;
use crate::taskgen::Task;
use crate::verify::{judge_task, oracle_pattern, Verdict, VariantImpl, VerdictCache, VerifyConfig, VerifyError};

use super::artifacts::{sha256_hex, write_atomic, ArtifactStore};
use super::classify::{classify_failure, FailedStage};
use super::report::{render_report, EvalReport, Method, ReportFormat, RunManifest, TaskRecord, VariantScope};
use super::HarnessError;

/// Shared, read-only inputs of a run.
pub struct EvalContext<'a> {
    pub corpus: &'a [SyscallDef],
    pub kernel: &'a Kernel,
    pub inventory: &'a Inventory,
    pub components: &'a PromptComponents,
    pub verify: VerifyConfig,
    pub cache: &'a VerdictCache,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub method: Method,
    pub seed: u64,
    pub jobs: usize,
    /// Record provider and solver failures instead of aborting.
    pub partial: bool,
    pub scope: VariantScope,
    pub run_dir: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { method: Method::Bodhi, seed: 0, jobs: 1, partial: false, scope: VariantScope::AllVariants, run_dir: None }
    }
}

/// Wall-clock measurements, kept out of the report so that reports are
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskTiming {
    pub task_id: String,
    pub approx_prompt_tokens: usize,
    pub completion_ms: u64,
    pub verify_ms: u64,
    pub total_ms: u64,
    pub usage: Option<Usage>,
}

#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: EvalReport,
    pub timings: Vec<TaskTiming>,
}

pub fn corpus_hash(corpus: &[SyscallDef]) -> String {
    let mut buf = String::new();
    for d in corpus {
        for part in [&d.name, &d.impl_c, &d.spec_py, &d.description] {
            buf.push_str(part);
            buf.push('\0');
        }
        buf.push_str(&serde_json::to_string(&d.sites).expect("sites serialize"));
        buf.push('\0');
    }
    sha256_hex(buf.as_bytes())
}

pub fn taskset_hash(tasks: &[Task]) -> String {
    sha256_hex(&serde_json::to_vec(tasks).expect("tasks serialize"))
}

pub fn prompt_hash(c: &PromptComponents) -> String {
    let guide = serde_json::to_string(&c.guide).expect("guide serializes");
    sha256_hex(format!("{}\0{}\0{}\0{}", c.system, c.programming_model, guide, c.few_shot_count).as_bytes())
}

/// Runs `f` over `0..n` on up to `jobs` threads. Results come back over a
/// channel to the calling thread, which alone writes the output slots.
/// Once `f` fails and `stop` is set, no further items are started.
fn par_map<T: Send, E: Send>(
    n: usize,
    jobs: usize,
    stop: bool,
    f: impl Fn(usize) -> Result<T, E> + Sync,
) -> Vec<Option<Result<T, E>>> {
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let mut out: Vec<Option<Result<T, E>>> = (0..n).map(|_| None).collect();
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, n.max(1)) {
            let tx = tx.clone();
            let (next, abort, f) = (&next, &abort, &f);
            s.spawn(move || loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = f(i);
                if stop && r.is_err() {
                    abort.store(true, Ordering::SeqCst);
                }
                if tx.send((i, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            out[i] = Some(r);
        }
    });
    out
}

struct Prepared {
    behaviors: Vec<crate::symex::ImplBehavior>,
    /// Task indices of each syscall's variants, in task order.
    groups: BTreeMap<String, Vec<usize>>,
    patterns: BTreeMap<String, Vec<Verdict>>,
}

fn prepare(tasks: &[Task], ctx: &EvalContext, cfg: &VerifyConfig, jobs: usize) -> Result<Prepared, HarnessError> {
    let mut behaviors = Vec::with_capacity(tasks.len());
    for t in tasks {
        let ir = compile_impl(&t.impl_c, ctx.kernel).map_err(|e| HarnessError::Compile { task_id: t.id.clone(), message: e.to_string() })?;
        behaviors.push(execute(&ir, &ctx.kernel.schema));
    }
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, t) in tasks.iter().enumerate() {
        groups.entry(t.syscall.clone()).or_default().push(i);
    }
    let names: Vec<&String> = groups.keys().collect();
    let results = par_map(names.len(), jobs, true, |k| {
        let name = names[k];
        let def = ctx.corpus.iter().find(|d| &d.name == name).ok_or_else(|| HarnessError::UnknownSyscall(name.clone()))?;
        let variants = variant_impls(tasks, &behaviors, &groups[name]);
        oracle_pattern(&def.spec_py, &variants, ctx.kernel, ctx.inventory, cfg, ctx.cache)
            .map_err(|e| HarnessError::Verify { task_id: format!("{name} (oracle)"), source: e })
    });
    let mut patterns = BTreeMap::new();
    for (name, r) in names.iter().zip(results) {
        if let Some(r) = r {
            patterns.insert((*name).clone(), r?);
        }
    }
    Ok(Prepared { behaviors, groups, patterns })
}

fn variant_impls(tasks: &[Task], behaviors: &[crate::symex::ImplBehavior], idx: &[usize]) -> Vec<VariantImpl> {
    idx.iter().map(|&i| VariantImpl { id: tasks[i].id.clone(), behavior: behaviors[i].clone() }).collect()
}

enum TaskFailure {
    /// Recorded as an infrastructure failure in a partial run.
    Infra(String),
    Abort(HarnessError),
}

fn infra_or_abort(partial: bool, e: HarnessError) -> TaskFailure {
    if partial {
        TaskFailure::Infra(e.to_string())
    } else {
        TaskFailure::Abort(e)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_task(
    i: usize,
    tasks: &[Task],
    prep: &Prepared,
    ctx: &EvalContext,
    cfg: &VerifyConfig,
    model: &ModelConfig,
    provider: &dyn Provider,
    opts: &EvalOptions,
    store: &ArtifactStore,
) -> Result<(TaskRecord, TaskTiming), HarnessError> {
    let t = &tasks[i];
    let start = Instant::now();
    let mut rec = TaskRecord {
        task_id: t.id.clone(),
        syscall: t.syscall.clone(),
        category: t.category,
        variant: t.variant,
        method: opts.method,
        model: model.id.clone(),
        pass: false,
        failure: None,
        spec_text: None,
        outcomes: vec![],
        fault: None,
        lint: vec![],
        infra_error: None,
        prompt_artifact: None,
        response_artifact: None,
        smt_artifacts: vec![],
        witness_artifacts: vec![],
    };
    let mut timing = TaskTiming {
        task_id: t.id.clone(),
        approx_prompt_tokens: 0,
        completion_ms: 0,
        verify_ms: 0,
        total_ms: 0,
        usage: None,
    };
    let outcome = (|| -> Result<(), TaskFailure> {
        let bundle = assemble_prompt(t, ctx.corpus, ctx.components, opts.method.includes_guide());
        let prompt = bundle.text();
        timing.approx_prompt_tokens = bundle.approx_tokens();
        rec.prompt_artifact = Some(store.put(&prompt, "prompt.md").map_err(|e| TaskFailure::Abort(e.into()))?);
        let req = CompletionRequest { task_id: &t.id, syscall: &t.syscall, prompt: &prompt, seed: opts.seed };
        let c0 = Instant::now();
        let completion = match provider.complete(&req) {
            Ok(c) => c,
            Err(ProviderError::Config(e)) => return Err(TaskFailure::Abort(e.into())),
            Err(e) => return Err(infra_or_abort(opts.partial, HarnessError::Provider { task_id: t.id.clone(), source: e })),
        };
        timing.completion_ms = c0.elapsed().as_millis() as u64;
        timing.usage = completion.usage;
        rec.response_artifact = Some(store.put(&completion.text, "response.txt").map_err(|e| TaskFailure::Abort(e.into()))?);
        let spec = match extract_spec_block(&completion.text) {
            Ok(s) => s,
            Err(_) => {
                rec.failure = Some(classify_failure(FailedStage::Extraction, t.category));
                return Ok(());
            }
        };
        rec.lint = lint_source(&spec, ctx.inventory);
        rec.spec_text = Some(spec.clone());
        let members = &prep.groups[&t.syscall];
        let pattern = &prep.patterns[&t.syscall];
        let (variants, pattern) = match opts.scope {
            super::VariantScope::AllVariants => (variant_impls(tasks, &prep.behaviors, members), pattern.clone()),
            super::VariantScope::OwnVariant => {
                let k = members.iter().position(|&m| m == i).expect("task belongs to its group");
                (variant_impls(tasks, &prep.behaviors, &[i]), vec![pattern[k]])
            }
        };
        let v0 = Instant::now();
        let verdict = judge_task(&t.id, &spec, &variants, &pattern, ctx.kernel, ctx.inventory, cfg, ctx.cache)
            .map_err(|e: VerifyError| infra_or_abort(opts.partial, HarnessError::Verify { task_id: t.id.clone(), source: e }))?;
        timing.verify_ms = v0.elapsed().as_millis() as u64;
        for (d, v) in verdict.details.iter().zip(&variants) {
            if let Some(script) = &d.smt_script {
                rec.smt_artifacts.push(store.put(script, "smt2").map_err(|e| TaskFailure::Abort(e.into()))?);
            }
            if let Some(w) = &d.witness {
                let json = serde_json::to_string_pretty(&w.to_json(&v.behavior.params)).expect("witness serializes");
                rec.witness_artifacts.push(store.put(&json, "witness.json").map_err(|e| TaskFailure::Abort(e.into()))?);
            }
        }
        rec.outcomes = verdict.outcomes;
        rec.pass = verdict.pass;
        rec.failure = match (&verdict.fault, verdict.pass) {
            (Some(f), _) => Some(classify_failure(FailedStage::Fault(f), t.category)),
            (None, false) => Some(classify_failure(FailedStage::Verdicts, t.category)),
            (None, true) => None,
        };
        rec.fault = verdict.fault;
        Ok(())
    })();
    match outcome {
        Ok(()) => {}
        Err(TaskFailure::Infra(m)) => rec.infra_error = Some(m),
        Err(TaskFailure::Abort(e)) => return Err(e),
    }
    timing.total_ms = start.elapsed().as_millis() as u64;
    Ok((rec, timing))
}

/// assemble -> complete -> extract -> load -> judge, per task.
pub fn run_eval(
    tasks: &[Task],
    ctx: &EvalContext,
    model: &ModelConfig,
    provider: &dyn Provider,
    opts: &EvalOptions,
) -> Result<EvalRun, HarnessError> {
    let cfg = ctx.verify.clone();
    let prep = prepare(tasks, ctx, &cfg, opts.jobs)?;
    let store = ArtifactStore::new(opts.run_dir.as_deref());
    let results = par_map(tasks.len(), opts.jobs, true, |i| run_task(i, tasks, &prep, ctx, &cfg, model, provider, opts, &store));
    let mut records = Vec::with_capacity(tasks.len());
    let mut timings = Vec::with_capacity(tasks.len());
    for r in results {
        match r {
            Some(Ok((rec, tm))) => {
                records.push(rec);
                timings.push(tm);
            }
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    if records.len() != tasks.len() {
        return Err(HarnessError::Incomplete);
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model: model.clone(),
        method: opts.method,
        seed: opts.seed,
        corpus_hash: corpus_hash(ctx.corpus),
        taskset_hash: taskset_hash(tasks),
        prompt_hash: prompt_hash(ctx.components),
        variant_scope: opts.scope,
        backend: serde_json::to_value(cfg.backend).unwrap().as_str().unwrap_or_default().to_string(),
        samples: cfg.samples,
        verify_seed: cfg.seed,
        partial: opts.partial,
    };
    Ok(EvalRun { report: EvalReport::new(manifest, records), timings })
}

/// Writes `manifest.json`, `report.{json,md,csv}` and `timings.jsonl`.
pub fn write_run(dir: &Path, run: &EvalRun) -> Result<(), HarnessError> {
    let manifest = serde_json::to_string_pretty(&run.report.manifest)? + "\n";
    write_atomic(&dir.join("manifest.json"), manifest.as_bytes())?;
    for f in [ReportFormat::Json, ReportFormat::Md, ReportFormat::Csv] {
        write_atomic(&dir.join(format!("report.{}", f.extension())), render_report(&run.report, f).as_bytes())?;
    }
    let mut timings = String::new();
    for t in &run.timings {
        timings.push_str(&serde_json::to_string(t)?);
        timings.push('\n');
    }
    write_atomic(&dir.join("timings.jsonl"), timings.as_bytes())?;
    Ok(())
}

pub fn load_report(dir: &Path) -> Result<EvalReport, HarnessError> {
    let path = if dir.is_dir() { dir.join("report.json") } else { dir.to_path_buf() };
    EvalReport::from_json(&std::fs::read_to_string(path)?)
}
