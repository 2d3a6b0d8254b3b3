// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;

use specforge_core::corpus::{corpus, find, SyscallCategory};
use specforge_core::harness::*;
use specforge_core::kernel::Kernel;
use specforge_core::prompt::{
    parse_schedule, EchoOracle, ModelConfig, PromptComponents, Provider, ProviderKind, Scripted,
};
use specforge_core::spec::Inventory;
use specforge_core::taskgen::{build_benchmark, Task};
use specforge_core::verify::{VerdictCache, VerifyConfig};

struct Env {
    kernel: Kernel,
    inventory: Inventory,
    components: PromptComponents,
    cache: &'static VerdictCache,
}

/// Solver verdicts are shared across tests; they depend only on the query.
fn shared_cache() -> &'static VerdictCache {
    static CACHE: std::sync::OnceLock<VerdictCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(VerdictCache::new)
}

impl Env {
    fn new() -> Self {
        Env { kernel: Kernel::default(), inventory: Inventory::default(), components: PromptComponents::bundled(), cache: shared_cache() }
    }

    fn ctx(&self) -> EvalContext<'_> {
        EvalContext {
            corpus: corpus(),
            kernel: &self.kernel,
            inventory: &self.inventory,
            components: &self.components,
            verify: VerifyConfig::default(),
            cache: self.cache,
        }
    }

    fn run(&self, tasks: &[Task], provider: &dyn Provider, opts: &EvalOptions) -> Result<EvalRun, HarnessError> {
        let model = ModelConfig::mock(provider.id(), ProviderKind::Scripted);
        run_eval(tasks, &self.ctx(), &model, provider, opts)
    }
}

fn tasks() -> Vec<Task> {
    build_benchmark(corpus(), 1).unwrap()
}

fn fence(s: &str) -> String {
    format!("```python\n{s}```\n")
}

fn noop_spec(syscall: &str) -> String {
    let def = find(syscall).unwrap();
    let head = def.spec_py.lines().find(|l| l.starts_with("def ")).unwrap();
    format!("{head}\n    cond = z3.And(True)\n    return cond, util.If(cond, old, old)\n")
}

fn scripted(pairs: impl IntoIterator<Item = (String, String)>) -> Scripted {
    Scripted::new(pairs.into_iter().collect::<BTreeMap<_, _>>())
}

fn opts(method: Method) -> EvalOptions {
    EvalOptions { method, ..EvalOptions::default() }
}

#[test]
fn echo_oracle_passes_everything_with_one_call_per_task() {
    let env = Env::new();
    let ts = tasks();
    let p = EchoOracle::new(corpus());
    let run = env.run(&ts, &p, &opts(Method::Bodhi)).unwrap();
    let r = &run.report;
    assert_eq!(r.aggregates.overall.pass, ts.len() as u64);
    assert_eq!(r.aggregates.overall.pass_at_1().to_string(), "100.00");
    let mut calls = p.log.calls();
    assert_eq!(calls.len(), ts.len());
    calls.sort();
    calls.dedup();
    assert_eq!(calls.len(), ts.len());
    let md = render_report(r, ReportFormat::Md);
    let row = md.lines().find(|l| l.starts_with("| bodhi |")).unwrap();
    assert_eq!(row.matches("100.00").count(), 7, "{row}");
    assert!(r.is_consistent());
}

#[test]
fn noop_spec_fails_everywhere() {
    let env = Env::new();
    let ts = tasks();
    // Independent check first: the no-op spec never reproduces an oracle
    // pattern, judged directly.
    for def in corpus() {
        let members: Vec<&Task> = ts.iter().filter(|t| t.syscall == def.name).collect();
        let variants: Vec<_> = members
            .iter()
            .map(|t| {
                let ir = specforge_core::cfront::compile_impl(&t.impl_c, &env.kernel).unwrap();
                specforge_core::verify::VariantImpl {
                    id: t.id.clone(),
                    behavior: specforge_core::symex::execute(&ir, &env.kernel.schema),
                }
            })
            .collect();
        let cfg = VerifyConfig::default();
        let pattern = specforge_core::verify::oracle_pattern(&def.spec_py, &variants, &env.kernel, &env.inventory, &cfg, env.cache).unwrap();
        let v = specforge_core::verify::judge_task("x", &noop_spec(&def.name), &variants, &pattern, &env.kernel, &env.inventory, &cfg, env.cache)
            .unwrap();
        assert!(!v.pass, "{}", def.name);
    }
    let p = scripted(ts.iter().map(|t| (t.id.clone(), fence(&noop_spec(&t.syscall)))));
    let run = env.run(&ts, &p, &opts(Method::Bodhi)).unwrap();
    let o = run.report.aggregates.overall;
    assert_eq!(o.pass_at_1().to_string(), "0.00");
    assert_eq!(o.semantic, ts.len() as u64);
}

#[test]
fn half_prose_gives_half_format_errors() {
    let env = Env::new();
    let ts: Vec<Task> = tasks().into_iter().take(46).collect();
    let p = scripted(ts.iter().enumerate().map(|(i, t)| {
        let text = if i % 2 == 0 { fence(&find(&t.syscall).unwrap().spec_py) } else { "It checks the pid and then updates it.".into() };
        (t.id.clone(), text)
    }));
    let o = env.run(&ts, &p, &opts(Method::Baseline)).unwrap().report.aggregates.overall;
    assert_eq!(o.pass_at_1().to_string(), "50.00");
    assert_eq!((o.format, o.syntax, o.semantic), (23, 23, 0));
}

fn fault_mix() -> (String, BTreeMap<String, u64>) {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/schedules/fault_mix.jsonl")).unwrap();
    let mut intents = BTreeMap::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        *intents.entry(v["intent"].as_str().unwrap().to_string()).or_insert(0) += 1;
    }
    (text, intents)
}

#[test]
fn shipped_fault_mix_counts() {
    let env = Env::new();
    let (text, want) = fault_mix();
    let p = Scripted::new(parse_schedule(&text).unwrap());
    let o = env.run(&tasks(), &p, &opts(Method::Bodhi)).unwrap().report.aggregates.overall;
    let got = BTreeMap::from([
        ("api_reference".to_string(), o.api_reference),
        ("format".to_string(), o.format),
        ("pass".to_string(), o.pass),
        ("semantic".to_string(), o.semantic),
        ("type_sort".to_string(), o.type_sort),
    ]);
    assert_eq!(got, want);
    assert_eq!(o.pass + o.syntax + o.semantic, o.total);
}

#[test]
fn reports_are_byte_identical_across_runs_and_job_counts() {
    let env = Env::new();
    let ts = tasks();
    let (text, _) = fault_mix();
    let mut outputs = Vec::new();
    for jobs in [1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let p = Scripted::new(parse_schedule(&text).unwrap());
        let o = EvalOptions { jobs, run_dir: Some(dir.path().to_path_buf()), ..opts(Method::Bodhi) };
        let run = env.run(&ts, &p, &o).unwrap();
        write_run(dir.path(), &run).unwrap();
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        outputs.push((read("report.json"), read("report.md"), read("report.csv"), read("manifest.json")));
        let rec = run.report.records.iter().find(|r| r.prompt_artifact.is_some()).unwrap();
        assert!(dir.path().join(rec.prompt_artifact.as_ref().unwrap()).exists());
        assert!(dir.path().join(rec.response_artifact.as_ref().unwrap()).exists());
        assert!(run.report.records.iter().flat_map(|r| &r.witness_artifacts).all(|w| dir.path().join(w).exists()));
        let smt: Vec<&String> = run.report.records.iter().flat_map(|r| &r.smt_artifacts).collect();
        assert!(!smt.is_empty() && smt.iter().all(|s| dir.path().join(s).exists()));
        assert_eq!(std::fs::read_to_string(dir.path().join("timings.jsonl")).unwrap().lines().count(), ts.len());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn json_round_trip() {
    let env = Env::new();
    let (text, _) = fault_mix();
    let p = Scripted::new(parse_schedule(&text).unwrap());
    let r = env.run(&tasks(), &p, &opts(Method::Bodhi)).unwrap().report;
    let back = EvalReport::from_json(&render_report(&r, ReportFormat::Json)).unwrap();
    assert_eq!(back, r);
    assert!(back.is_consistent());
    let csv = render_report(&r, ReportFormat::Csv);
    assert_eq!(csv.lines().count(), 1 + 7 + corpus().len());
}

fn is_ipc(t: &Task) -> bool {
    t.category == SyscallCategory::Ipc
}

#[test]
fn joined_runs_and_diff() {
    let env = Env::new();
    let ts = tasks();
    let oracle = |t: &Task| fence(&find(&t.syscall).unwrap().spec_py);
    let base = scripted(ts.iter().map(|t| (t.id.clone(), if is_ipc(t) { fence(&noop_spec(&t.syscall)) } else { oracle(t) })));
    let a = env.run(&ts, &base, &opts(Method::Baseline)).unwrap().report;
    let b = env.run(&ts, &EchoOracle::new(corpus()), &opts(Method::Bodhi)).unwrap().report;

    let d = diff_runs(&a, &b).unwrap();
    let flipped: Vec<&str> = d.flips.iter().map(|f| f.task_id.as_str()).collect();
    let ipc: Vec<&str> = ts.iter().filter(|t| is_ipc(t)).map(|t| t.id.as_str()).collect();
    assert_eq!(flipped, ipc);
    assert!(d.flips.iter().all(|f| !f.is_regression()));
    assert_eq!(diff_runs(&a, &a).unwrap().flips, vec![]);

    let md = render_joined_md(&a, &b).unwrap();
    for (ca, cb) in a.table_columns().iter().zip(b.table_columns()) {
        let want = cb.stats.pass_at_1().hundredths().unwrap() as i64 - ca.stats.pass_at_1().hundredths().unwrap() as i64;
        let row = md.lines().find(|l| l.starts_with(&format!("| {} |", ca.name))).unwrap();
        let cell = row.trim_end_matches(" |").rsplit("| ").next().unwrap();
        let got: f64 = cell.parse().unwrap();
        assert_eq!((got * 100.0).round() as i64, want, "{row}");
    }

    // One regression: sys_dup/correct goes from pass to fail.
    let regress = scripted(ts.iter().map(|t| {
        let text = if t.id == "sys_dup/correct" { fence(&noop_spec(&t.syscall)) } else { oracle(t) };
        (t.id.clone(), text)
    }));
    let c = env.run(&ts, &regress, &opts(Method::Bodhi)).unwrap().report;
    let d = diff_runs(&b, &c).unwrap();
    assert_eq!(d.flips.len(), 1);
    assert!(d.flips[0].is_regression());
    let dup = d.syscalls.iter().find(|s| s.syscall == "sys_dup").unwrap();
    assert_eq!(dup.delta, -1);
    assert!(render_diff_md(&d).contains("pass -> fail"));
}

#[test]
fn provider_failure_aborts_unless_partial() {
    let env = Env::new();
    let ts = tasks();
    let p = scripted(ts.iter().skip(1).map(|t| (t.id.clone(), fence(&find(&t.syscall).unwrap().spec_py))));
    assert!(matches!(env.run(&ts, &p, &opts(Method::Bodhi)), Err(HarnessError::Provider { .. })));
    let o = EvalOptions { partial: true, ..opts(Method::Bodhi) };
    let r = env.run(&ts, &p, &o).unwrap().report;
    let all = r.aggregates.overall;
    assert_eq!((all.infrastructure, all.pass, all.total), (1, 46, 47));
    assert_eq!(all.pass_at_1().to_string(), "100.00");
    let rec = &r.records[0];
    assert!(!rec.pass && rec.failure.is_none() && rec.infra_error.is_some());
}

#[test]
fn own_variant_scope() {
    let env = Env::new();
    let o = EvalOptions { scope: VariantScope::OwnVariant, ..opts(Method::Bodhi) };
    let r = env.run(&tasks(), &EchoOracle::new(corpus()), &o).unwrap().report;
    assert_eq!(r.aggregates.overall.pass_at_1().to_string(), "100.00");
    assert!(r.records.iter().all(|rec| rec.outcomes.len() == 1));
}

#[test]
fn mismatched_tasksets_refuse_to_diff() {
    let env = Env::new();
    let ts = tasks();
    let a = env.run(&ts[..6], &EchoOracle::new(corpus()), &opts(Method::Bodhi)).unwrap().report;
    let b = env.run(&ts[..7], &EchoOracle::new(corpus()), &opts(Method::Bodhi)).unwrap().report;
    assert!(matches!(diff_runs(&a, &b), Err(HarnessError::TasksetMismatch)));
}
