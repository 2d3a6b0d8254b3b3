// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a gating criterion fails.

mod support;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use specforge_core::cfront::compile_impl;
use specforge_core::corpus::{corpus, find};
use specforge_core::harness::*;
use specforge_core::kernel::{Field, Kernel, KernelState};
use specforge_core::prompt::{
    assemble_prompt, build_provider, parse_schedule, render_guide, EchoOracle, Guide, ModelConfig, ModelRegistry,
    PromptComponents, Provider, ProviderKind, Scripted, SegmentKind,
};
use specforge_core::spec::{lint_source, load_spec, parse_spec, Inventory};
use specforge_core::symex::{concretize, execute, ImplBehavior};
use specforge_core::taskgen::{build_benchmark, Task, Variant};
use specforge_core::verify::{
    check_equiv, differential_check, replay, DiffOutcome, VerdictCache, Verdict, VerifyConfig, VerifyOutcome,
};

type Check = Result<String, String>;

struct Env {
    kernel: Kernel,
    inventory: Inventory,
    components: PromptComponents,
    cache: VerdictCache,
    tasks: Vec<Task>,
}

impl Env {
    fn ctx(&self) -> EvalContext<'_> {
        EvalContext {
            corpus: corpus(),
            kernel: &self.kernel,
            inventory: &self.inventory,
            components: &self.components,
            verify: VerifyConfig::default(),
            cache: &self.cache,
        }
    }

    fn behavior(&self, c: &str) -> Result<ImplBehavior, String> {
        Ok(execute(&compile_impl(c, &self.kernel).map_err(|e| e.to_string())?, &self.kernel.schema))
    }

    /// SMT check of a spec text, memoised the way the harness keys it.
    fn smt(&self, b: &ImplBehavior, text: &str) -> Result<VerifyOutcome, String> {
        let cfg = VerifyConfig::default();
        let key = VerdictCache::key(b, text, &cfg);
        if let Some(o) = self.cache.get(&key) {
            return Ok(o);
        }
        let spec = load_spec(text, &self.kernel, &self.inventory).map_err(|f| f.to_string())?;
        let o = check_equiv(b, &spec, &self.kernel, &cfg).map_err(|e| e.to_string())?;
        self.cache.insert(key, o.clone());
        Ok(o)
    }

    fn run(&self, tasks: &[Task], provider: &dyn Provider, opts: &EvalOptions) -> Result<EvalRun, String> {
        let model = ModelConfig::mock(provider.id(), ProviderKind::Scripted);
        run_eval(tasks, &self.ctx(), &model, provider, opts).map_err(|e| e.to_string())
    }
}

fn fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fence(s: &str) -> String {
    format!("```python\n{s}```\n")
}

fn criterion_1(env: &Env) -> Check {
    let start = Instant::now();
    let (mut verified, mut cex) = (0, 0);
    for t in &env.tasks {
        let b = env.behavior(&t.impl_c)?;
        let spec_text = &find(&t.syscall).unwrap().spec_py;
        let o = env.smt(&b, spec_text)?;
        if t.variant == Variant::Correct {
            ensure(o.verdict == Verdict::Verified, || format!("{}: oracle pair gives {:?}", t.id, o.verdict))?;
            verified += 1;
        } else {
            ensure(o.verdict == Verdict::Counterexample, || format!("{}: bug variant gives {:?}", t.id, o.verdict))?;
            let w = o.witness.as_ref().ok_or_else(|| format!("{}: no witness", t.id))?;
            let spec = load_spec(spec_text, &env.kernel, &env.inventory).unwrap();
            ensure(replay(&b, &spec, &w.state, &w.args).as_ref() == Some(w), || format!("{}: witness does not replay", t.id))?;
            cex += 1;
        }
    }
    ensure(verified == corpus().len(), || format!("{verified} oracle pairs"))?;
    Ok(format!("{verified} oracle pairs Verified, {cex} variants refuted with replaying witnesses ({:.1?})", start.elapsed()))
}

fn criterion_2(env: &Env) -> Check {
    let start = Instant::now();
    let (mut pairs, mut diff_found) = (0, 0);
    for t in &env.tasks {
        let b = env.behavior(&t.impl_c)?;
        let spec_text = &find(&t.syscall).unwrap().spec_py;
        let spec = load_spec(spec_text, &env.kernel, &env.inventory).map_err(|f| f.to_string())?;
        let smt = env.smt(&b, spec_text)?;
        match differential_check(&b, &spec, &env.kernel.schema, 10_000, 42) {
            DiffOutcome::Counterexample(w) => {
                ensure(smt.verdict == Verdict::Counterexample, || format!("{}: sampling refutes a proved pair", t.id))?;
                ensure(replay(&b, &spec, &w.state, &w.args).is_some(), || format!("{}: sampled witness is spurious", t.id))?;
                diff_found += 1;
            }
            DiffOutcome::VerifiedSoFar => {}
        }
        if let Some(w) = &smt.witness {
            let again = replay(&b, &spec, &w.state, &w.args);
            ensure(again.as_ref().map(|a| a.differing_cells()) == Some(w.differing_cells()), || {
                format!("{}: solver witness divergence does not match on replay", t.id)
            })?;
        }
        pairs += 1;
    }
    Ok(format!("{pairs} pairs, 0 contradictions, sampling refuted {diff_found} ({:.1?})", start.elapsed()))
}

fn set_runnable_state(env: &Env, current: u64, pid: u64, ppid: u64, state: u64) -> KernelState {
    let mut s = KernelState::zeroed(env.kernel.schema);
    s.set(Field::Current, &[], current);
    s.set(Field::ProcPpid, &[pid], ppid);
    s.set(Field::ProcState, &[pid], state);
    s
}

fn criterion_3(env: &Env) -> Check {
    let spec_text = fixture("set_runnable_spec.py");
    parse_spec(&spec_text).map_err(|f| format!("parse: {f}"))?;
    let lint = lint_source(&spec_text, &env.inventory);
    ensure(lint.is_empty(), || format!("lint findings: {lint:?}"))?;
    load_spec(&spec_text, &env.kernel, &env.inventory).map_err(|f| format!("typecheck: {f}"))?;
    let b = env.behavior(&fixture("set_runnable.c"))?;
    let o = env.smt(&b, &spec_text)?;
    ensure(o.verdict == Verdict::Verified, || format!("original gives {:?}", o.verdict))?;

    let embryo = env.kernel.constants.lookup("proc_state.PROC_EMBRYO").map_err(|e| e.to_string())?;
    let errno = |s: &KernelState, pid: u64| concretize(&b, s, &[pid]).errno;
    let s = set_runnable_state(env, 1, 2, 1, embryo);
    ensure(errno(&s, 0).as_deref() == Some("ESRCH"), || "pid 0 is not rejected with ESRCH".into())?;
    ensure(errno(&set_runnable_state(env, 1, 2, 3, embryo), 2).as_deref() == Some("EACCES"), || {
        "a foreign child is not rejected with EACCES".into()
    })?;
    let ok = concretize(&b, &s, &[2]);
    ensure(ok.status == 0 && ok.post.read(Field::ProcState, &[2]).ok() != Some(embryo), || "own embryo child not made runnable".into())?;

    let mutated = fixture("set_runnable_no_ppid.c");
    ensure(!mutated.contains("ppid"), || "fixture still checks ppid".into())?;
    let o = env.smt(&env.behavior(&mutated)?, &spec_text)?;
    ensure(o.verdict == Verdict::Counterexample, || format!("mutated C gives {:?}", o.verdict))?;
    Ok("spec parses, lints clean, typechecks and Verifies; dropping the ppid check gives a Counterexample".into())
}

fn criterion_4(env: &Env) -> Check {
    let call_b = env.behavior(&find("call_proc").unwrap().impl_c)?;
    let or_alone = env.smt(&call_b, &fixture("call_proc_or_guard.py"))?;
    ensure(or_alone.verdict == Verdict::Verified, || "the disjunctive guard alone is not equivalent".into())?;
    let iommu_b = env.behavior(&find("sys_alloc_iommu_pt").unwrap().impl_c)?;
    let x86 = env.smt(&iommu_b, &fixture("iommu_x86_formula.py"))?;
    ensure(x86.verdict == Verdict::Counterexample, || format!("x86 formula gives {:?}", x86.verdict))?;

    let cases = [
        ("call_proc/correct", "call_proc_or_guard_no_caller.py", "SemanticError/DomainPattern"),
        ("sys_alloc_iommu_pt/correct", "iommu_x86_formula.py", "SemanticError/DomainPattern"),
        ("sys_alloc_iommu_pt/pointer", "iommu_paren_write.py", "SyntaxError/TypeSort"),
        ("sys_set_runnable/correct", "slt_set_runnable.py", "SyntaxError/ApiReference"),
    ];
    let tasks: Vec<Task> = env.tasks.iter().filter(|t| cases.iter().any(|c| c.0 == t.id)).cloned().collect();
    ensure(tasks.len() == cases.len(), || "case tasks missing from the benchmark".into())?;
    let p = Scripted::new(cases.iter().map(|(id, f, _)| (id.to_string(), fence(&fixture(f)))).collect());
    let run = env.run(&tasks, &p, &EvalOptions::default())?;
    let mut got = Vec::new();
    for (id, _, want) in cases {
        let r = run.report.records.iter().find(|r| r.task_id == id).unwrap();
        let label = r.failure.map(|f| f.label()).unwrap_or("pass");
        ensure(label == want, || format!("{id}: got {label}, want {want}"))?;
        got.push(label);
    }
    Ok(format!("classes {}", got.join(", ")))
}

fn criterion_5(_: &Env) -> Check {
    for (n, d, want) in [(123u64, 245u64, "50.20"), (237, 245, "96.73")] {
        let r = Ratio::new(n, d);
        ensure((r.num, r.den) == (n, d), || "ratio is not kept exactly".into())?;
        // Rounded independently from the exact quotient and remainder.
        let q = n * 10_000 / d;
        let rem = n * 10_000 % d;
        let h = if 2 * rem >= d { q + 1 } else { q };
        let oracle = format!("{}.{:02}", h / 100, h % 100);
        ensure(oracle == want && r.to_string() == want, || format!("{n}/{d}: got {r}, oracle {oracle}"))?;
    }
    Ok("123/245 -> 50.20, 237/245 -> 96.73".into())
}

fn counts(o: &Breakdown) -> BTreeMap<&'static str, u64> {
    BTreeMap::from([
        ("pass", o.pass),
        ("format", o.format),
        ("api_reference", o.api_reference),
        ("type_sort", o.type_sort),
        ("semantic", o.semantic),
    ])
}

fn criterion_6(env: &Env) -> Check {
    let start = Instant::now();
    let echo = EchoOracle::new(corpus());
    let r = env.run(&env.tasks, &echo, &EvalOptions::default())?.report;
    ensure(r.aggregates.overall.pass_at_1().to_string() == "100.00", || format!("echo-oracle Pass@1 {}", r.aggregates.overall.pass_at_1()))?;

    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/schedules/fault_mix.jsonl")).unwrap();
    let mut want: BTreeMap<&str, u64> = counts(&Breakdown::default()).into_keys().map(|k| (k, 0)).collect();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let intent = v["intent"].as_str().ok_or("schedule line without intent")?;
        *want.get_mut(intent).ok_or_else(|| format!("unknown intent {intent}"))? += 1;
    }
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let p = Scripted::new(parse_schedule(&text).map_err(|e| e.to_string())?);
        let opts = EvalOptions { run_dir: Some(dir.path().to_path_buf()), ..EvalOptions::default() };
        let run = env.run(&env.tasks, &p, &opts)?;
        let got = counts(&run.report.aggregates.overall);
        ensure(got == want, || format!("fault mix counts {got:?}, scheduled {want:?}"))?;
        write_run(dir.path(), &run).map_err(|e| e.to_string())?;
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        bytes.push([read("report.json"), read("report.md"), read("report.csv")]);
    }
    ensure(bytes[0] == bytes[1], || "reports differ between identical runs".into())?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:.1?}"))?;
    Ok(format!("echo 100.00, fault mix {want:?} reproduced, reports byte-identical ({took:.1?})"))
}

const GUIDE_TITLES: [&str; 15] = [
    "Specification template",
    "Pre-condition translation",
    "Post-condition patterns",
    "Map field syntax",
    "Operator rules",
    "Constant prefixes",
    "Page table PTE formulas",
    "Shadow metadata",
    "Reference counting",
    "TLB flush",
    "State pointers",
    "Field name mapping",
    "C helper functions",
    "Available helpers",
    "IPC system calls",
];

fn criterion_7(env: &Env) -> Check {
    let guide = render_guide(Guide::bundled(), None);
    let headings: Vec<&str> = guide.lines().filter_map(|l| l.strip_prefix("## ")).collect();
    let expected: Vec<String> = GUIDE_TITLES.iter().enumerate().map(|(i, t)| format!("{}. {t}", i + 1)).collect();
    ensure(headings == expected, || format!("guide headings {headings:?}"))?;
    let order = [SegmentKind::System, SegmentKind::ProgrammingModel, SegmentKind::FewShot, SegmentKind::Guide, SegmentKind::Target];
    for t in &env.tasks {
        let base = assemble_prompt(t, corpus(), &env.components, false);
        let bodhi = assemble_prompt(t, corpus(), &env.components, true);
        let kinds: Vec<SegmentKind> = bodhi.segments.iter().map(|s| s.kind).collect();
        ensure(kinds == order, || format!("{}: segment order {kinds:?}", t.id))?;
        ensure(bodhi.segment(SegmentKind::Guide).map(|s| s.text.as_str()) == Some(guide.as_str()), || format!("{}: guide segment differs", t.id))?;
        let (b, g) = (base.text(), bodhi.text());
        let target = &bodhi.segment(SegmentKind::Target).unwrap().text;
        let cut = b.len() - target.len();
        ensure(b.ends_with(target.as_str()), || format!("{}: baseline does not end with the target", t.id))?;
        let spliced = format!("{}{}{}", &b[..cut], guide, &b[cut..]);
        ensure(spliced == g, || format!("{}: prompts differ beyond the guide segment", t.id))?;
    }
    Ok(format!("{} tasks differ by exactly the guide; 15 headings in order", env.tasks.len()))
}

fn criterion_8(_: &Env) -> Check {
    let start = Instant::now();
    support::kernel_read_after_write(1000)?;
    support::encode_eval_agreement(1000)?;
    support::symex_paths_partition(1000)?;
    support::taskgen_deterministic()?;
    support::printer_round_trip()?;
    Ok(format!("all property suites green at 1000 cases ({:.1?})", start.elapsed()))
}

/// Runs only when SPECFORGE_LIVE_MODEL names a registry entry with a real
/// endpoint. Returns `None` when skipped.
fn criterion_9(env: &Env) -> Option<Check> {
    let id = std::env::var("SPECFORGE_LIVE_MODEL").ok()?;
    Some((|| {
        let path = std::env::var("SPECFORGE_MODELS").map(PathBuf::from).unwrap_or_else(|_| PathBuf::from("models.toml"));
        let reg = ModelRegistry::load(&path).map_err(|e| e.to_string())?;
        let cfg = reg.get(&id).ok_or_else(|| format!("no model `{id}` in {}", path.display()))?;
        let provider = build_provider(cfg, corpus()).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let tasks: Vec<Task> = env.tasks.iter().take(5).cloned().collect();
        let opts = EvalOptions { run_dir: Some(dir.path().to_path_buf()), partial: true, ..EvalOptions::default() };
        let run = run_eval(&tasks, &env.ctx(), cfg, provider.as_ref(), &opts).map_err(|e| e.to_string())?;
        write_run(dir.path(), &run).map_err(|e| e.to_string())?;
        let back = load_report(dir.path()).map_err(|e| e.to_string())?;
        ensure(back.is_consistent() && back.records.len() == 5, || "malformed report".into())?;
        let artifacts = back.records.iter().flat_map(|r| r.prompt_artifact.iter().chain(&r.response_artifact));
        ensure(artifacts.clone().count() > 0 && artifacts.into_iter().all(|a| dir.path().join(a).exists()), || "artifacts missing".into())?;
        Ok(format!("{id}: 5 tasks, Pass@1 {}", back.aggregates.overall.pass_at_1()))
    })())
}

fn main() {
    let env = Env {
        kernel: Kernel::default(),
        inventory: Inventory::default(),
        components: PromptComponents::bundled(),
        cache: VerdictCache::new(),
        tasks: build_benchmark(corpus(), 1).expect("benchmark builds"),
    };
    let gating: [(u32, &str, fn(&Env) -> Check); 8] = [
        (1, "oracle corpus soundness", criterion_1),
        (2, "backend agreement", criterion_2),
        (3, "set_runnable fidelity", criterion_3),
        (4, "qualitative case classes", criterion_4),
        (5, "metric arithmetic", criterion_5),
        (6, "mock end-to-end determinism", criterion_6),
        (7, "guide-toggle minimality", criterion_7),
        (8, "property suites", criterion_8),
    ];
    let mut failed = 0;
    for (n, name, f) in gating {
        match std::panic::catch_unwind(|| f(&env)).unwrap_or_else(|_| Err("panicked".into())) {
            Ok(detail) => println!("PASS {n} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why}");
            }
        }
    }
    match criterion_9(&env) {
        None => println!("SKIP 9 live-provider smoke (non-gating): SPECFORGE_LIVE_MODEL not set"),
        Some(Ok(detail)) => println!("PASS 9 live-provider smoke (non-gating): {detail}"),
        Some(Err(why)) => println!("FAIL 9 live-provider smoke (non-gating): {why}"),
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
}
