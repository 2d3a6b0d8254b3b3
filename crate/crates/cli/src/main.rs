// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use specforge_core::cfront::compile_impl;
use specforge_core::corpus::corpus;
use specforge_core::harness::{
    diff_runs, load_report, render_diff_md, render_joined_md, render_report, run_eval, write_atomic, write_run, EvalContext,
    EvalOptions, HarnessError, Method, ReportFormat, VariantScope,
};
use specforge_core::kernel::Kernel;
use specforge_core::prompt::{assemble_prompt, build_provider, ConfigError, ModelRegistry, PromptComponents, ProviderKind};
use specforge_core::spec::{lint_source, load_spec, Inventory, Severity};
use specforge_core::symex::execute;
use specforge_core::taskgen::{build_benchmark, load_taskset, validate_benchmark, write_taskset, Task};
use specforge_core::verify::{build_query, check_equiv, emit_smtlib, Backend, VerdictCache, Verdict, VerifyConfig};

#[derive(Parser)]
#[command(name = "specforge", version, about = "Syscall specification workbench: verify specs against C, run prompt evaluations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the task set (syscall x bug variant) from the corpus.
    GenTasks {
        #[arg(short, long, default_value = "tasks")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Check every task against its oracle spec before writing.
        #[arg(long)]
        validate: bool,
    },
    /// Render the prompt for one task.
    AssemblePrompt {
        #[arg(long)]
        task: String,
        #[arg(long)]
        no_guide: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        src: TaskSource,
        /// Directory with system.md, programming_model.md and guide.json.
        #[arg(long)]
        components: Option<PathBuf>,
    },
    /// Evaluate a model over the task set.
    Run(RunArgs),
    /// Check an implementation against a spec.
    Verify {
        implementation: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value = "smt")]
        backend: Backend,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the SMT-LIB query here.
        #[arg(long)]
        dump_smt: Option<PathBuf>,
        /// Write the symbolic paths of the implementation here as JSON.
        #[arg(long)]
        dump_behavior: Option<PathBuf>,
    },
    /// Static checks on spec files.
    Lint { specs: Vec<PathBuf> },
    /// Render a finished run.
    Report {
        run: PathBuf,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
        /// A second run to compare against (baseline first).
        #[arg(long)]
        join: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-task transitions between two runs.
    Diff {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct TaskSource {
    /// Task set directory from gen-tasks; defaults to the bundled corpus.
    #[arg(long)]
    tasks: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    task_seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "bodhi")]
    method: Method,
    /// Replay responses from a JSONL schedule instead of calling a model.
    #[arg(long)]
    mock: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model registry (TOML). Defaults to $SPECFORGE_MODELS or ./models.toml.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[command(flatten)]
    src: TaskSource,
    /// Only the first N tasks.
    #[arg(long)]
    limit: Option<usize>,
    /// Record provider and solver failures and leave them out of Pass@1.
    #[arg(long)]
    partial: bool,
    /// Judge each spec against its own variant only.
    #[arg(long)]
    own_variant: bool,
    #[arg(long, default_value = "smt")]
    backend: Backend,
    /// Run directory; defaults to runs/<model>-<method>-<seed>.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Run twice and fail if the per-task outcomes differ.
    #[arg(long)]
    check_determinism: bool,
}

/// Configuration problems exit with 2.
#[derive(Debug)]
struct ConfigProblem(anyhow::Error);

impl std::fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigProblem {}

fn config(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(ConfigProblem(e.into()))
}

fn load_tasks(src: &TaskSource) -> Result<Vec<Task>> {
    match &src.tasks {
        Some(dir) => load_taskset(dir).map_err(config),
        None => build_benchmark(corpus(), src.task_seed).map_err(config),
    }
}

fn registry(path: Option<&Path>) -> Result<ModelRegistry> {
    let path = path.map(Path::to_path_buf).or_else(|| std::env::var_os("SPECFORGE_MODELS").map(PathBuf::from)).or_else(|| {
        let p = PathBuf::from("models.toml");
        p.exists().then_some(p)
    });
    match path {
        Some(p) => ModelRegistry::load(&p).map_err(config),
        None => Ok(ModelRegistry::builtin()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(config)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let reg = registry(a.registry.as_deref())?;
    let mut model = reg.get(&a.model).cloned().ok_or_else(|| config(anyhow!("model `{}` is not in the registry", a.model)))?;
    if let Some(s) = &a.mock {
        model.provider = ProviderKind::Scripted;
        model.schedule = Some(s.clone());
    }
    let mut tasks = load_tasks(&a.src)?;
    if let Some(n) = a.limit {
        tasks.truncate(n);
    }
    let provider = build_provider(&model, corpus()).map_err(config)?;
    let kernel = Kernel::default();
    let inventory = Inventory::default();
    let components = PromptComponents::bundled();
    let cache = VerdictCache::new();
    let ctx = EvalContext {
        corpus: corpus(),
        kernel: &kernel,
        inventory: &inventory,
        components: &components,
        verify: VerifyConfig { backend: a.backend, ..VerifyConfig::default() },
        cache: &cache,
    };
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("runs/{}-{}-{}", model.id, a.method.as_str(), a.seed)));
    let opts = EvalOptions {
        method: a.method,
        seed: a.seed,
        jobs: a.jobs,
        partial: a.partial,
        scope: if a.own_variant { VariantScope::OwnVariant } else { VariantScope::AllVariants },
        run_dir: Some(dir.clone()),
    };
    let lift = |e: HarnessError| if e.is_config() { config(e) } else { e.into() };
    let run = run_eval(&tasks, &ctx, &model, provider.as_ref(), &opts).map_err(lift)?;
    write_run(&dir, &run)?;
    let o = run.report.aggregates.overall;
    println!(
        "{}: Pass@1 {}% ({}/{}), syntax {}, semantic {}, infrastructure {}",
        run.report.label(),
        o.pass_at_1(),
        o.pass,
        o.scored(),
        o.syntax,
        o.semantic,
        o.infrastructure
    );
    println!("wrote {}", dir.display());
    if a.check_determinism {
        let again = run_eval(&tasks, &ctx, &model, provider.as_ref(), &EvalOptions { run_dir: None, ..opts }).map_err(lift)?;
        let key = |r: &specforge_core::harness::EvalReport| r.records.iter().map(|x| (x.pass, x.failure)).collect::<Vec<_>>();
        if key(&again.report) != key(&run.report) {
            eprintln!("second run disagrees with the first; provider output is not deterministic");
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    implementation: &Path,
    spec: &Path,
    cfg: VerifyConfig,
    dump_smt: Option<&Path>,
    dump_behavior: Option<&Path>,
) -> Result<ExitCode> {
    let kernel = Kernel::default();
    let ir = compile_impl(&read(implementation)?, &kernel).map_err(|e| config(anyhow!("{}: {e}", implementation.display())))?;
    let behavior = execute(&ir, &kernel.schema);
    if let Some(p) = dump_behavior {
        write_atomic(p, (serde_json::to_string_pretty(&behavior)? + "\n").as_bytes())?;
    }
    let spec_text = read(spec)?;
    let loaded = match load_spec(&spec_text, &kernel, &Inventory::default()) {
        Ok(s) => s,
        Err(f) => {
            println!("SpecFaulted: {f}");
            return Ok(ExitCode::from(1));
        }
    };
    if let Some(p) = dump_smt {
        write_atomic(p, emit_smtlib(&build_query(&behavior, &loaded, &kernel.schema)).as_bytes())?;
    }
    let out = check_equiv(&behavior, &loaded, &kernel, &cfg)?;
    match out.verdict {
        Verdict::Verified => {
            println!("Verified");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Counterexample => {
            println!("Counterexample");
            if let Some(w) = &out.witness {
                println!("{}", serde_json::to_string_pretty(&w.to_json(&behavior.params))?);
            }
            Ok(ExitCode::from(1))
        }
        Verdict::SpecFaulted => {
            println!("SpecFaulted: {}", out.fault.map(|f| f.to_string()).unwrap_or_default());
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_lint(specs: &[PathBuf]) -> Result<ExitCode> {
    if specs.is_empty() {
        return Err(config(anyhow!("no spec files given")));
    }
    let inv = Inventory::default();
    let mut errors = 0;
    for p in specs {
        for f in lint_source(&read(p)?, &inv) {
            if f.severity == Severity::Error {
                errors += 1;
            }
            println!("{}:{}:{}: [{}] category {}: {}", p.display(), f.line, f.col, serde_json::to_value(f.severity)?.as_str().unwrap_or(""), f.category, f.message);
        }
    }
    Ok(if errors > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::GenTasks { out, seed, validate } => {
            let tasks = build_benchmark(corpus(), seed)?;
            if validate {
                validate_benchmark(&tasks, corpus(), &Kernel::default(), &Inventory::default(), &VerifyConfig::default())?;
            }
            write_taskset(&out, &tasks)?;
            println!("{} tasks written to {}", tasks.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::AssemblePrompt { task, no_guide, output, src, components } => {
            let tasks = load_tasks(&src)?;
            let t = tasks.iter().find(|t| t.id == task).ok_or_else(|| config(anyhow!("no task `{task}`")))?;
            let comps = match components {
                Some(d) => PromptComponents::load(&d).map_err(|e: ConfigError| config(e))?,
                None => PromptComponents::bundled(),
            };
            let bundle = assemble_prompt(t, corpus(), &comps, !no_guide);
            for s in &bundle.segments {
                eprintln!("{:>18}: ~{} tokens (approximate)", serde_json::to_value(s.kind)?.as_str().unwrap_or(""), s.approx_tokens);
            }
            emit(output.as_deref(), &bundle.text())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run(a) => cmd_run(a),
        Cmd::Verify { implementation, spec, backend, samples, seed, dump_smt, dump_behavior } => {
            let cfg = VerifyConfig { backend, samples, seed, ..VerifyConfig::default() };
            cmd_verify(&implementation, &spec, cfg, dump_smt.as_deref(), dump_behavior.as_deref())
        }
        Cmd::Lint { specs } => cmd_lint(&specs),
        Cmd::Report { run, format, join, output } => {
            let a = load_report(&run).map_err(config)?;
            let text = match join {
                Some(other) => render_joined_md(&a, &load_report(&other).map_err(config)?).map_err(config)?,
                None => render_report(&a, format),
            };
            emit(output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Diff { run_a, run_b, json } => {
            let d = diff_runs(&load_report(&run_a).map_err(config)?, &load_report(&run_b).map_err(config)?).map_err(config)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&d)?);
            } else {
                print!("{}", render_diff_md(&d));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigProblem>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
