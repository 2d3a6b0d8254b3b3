// SPDX-License-Identifier: Apache-2.0

//! Seeded bug injection and benchmark construction.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfront::compile_impl;
use crate::corpus::{BugClass, MutationOp, SyscallCategory, SyscallDef};
use crate::kernel::Kernel;
use crate::spec::{lint_source, load_spec, Inventory};
use crate::symex::execute;
use crate::verify::{check_equiv, Verdict, VerifyConfig, VerifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Variant {
    Bug(BugClass),
    Correct,
}

impl Variant {
    pub fn slug(self) -> &'static str {
        match self {
            Variant::Bug(c) => c.slug(),
            Variant::Correct => "correct",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            Variant::Bug(c) => c.column(),
            Variant::Correct => "Correct",
        }
    }

    /// Report column order: the five bug classes, then Correct.
    pub fn all() -> Vec<Variant> {
        BugClass::ALL.into_iter().map(Variant::Bug).chain([Variant::Correct]).collect()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.slug().to_string()
    }
}

impl TryFrom<String> for Variant {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        if s == "correct" {
            return Ok(Variant::Correct);
        }
        BugClass::from_slug(&s).map(Variant::Bug).ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub syscall: String,
    pub category: SyscallCategory,
    pub variant: Variant,
    pub impl_c: String,
    pub description: String,
}

impl Task {
    pub fn impl_path(&self) -> String {
        format!("impl/{}/{}.c", self.syscall, self.variant.slug())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InjectError {
    #[error("`{syscall}` has no {class} site")]
    NotApplicable { syscall: String, class: &'static str },
    #[error("`{syscall}`: site text `{text}` occurs {count} times (expected once)")]
    SiteMismatch { syscall: String, text: String, count: usize },
    #[error("`{syscall}`: `{text}` is not inside an error check")]
    NotACheck { syscall: String, text: String },
}

#[derive(Debug, Error)]
pub enum TaskgenError {
    #[error(transparent)]
    Inject(#[from] InjectError),
    #[error("{task}: {message}")]
    Invalid { task: String, message: String },
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("task set I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("task set format: {0}")]
    Format(#[from] serde_json::Error),
}

fn unique(def: &SyscallDef, text: &str) -> Result<usize, InjectError> {
    let count = def.impl_c.matches(text).count();
    if count != 1 {
        return Err(InjectError::SiteMismatch { syscall: def.name.clone(), text: text.to_string(), count });
    }
    Ok(def.impl_c.find(text).unwrap())
}

fn line_start(src: &str, pos: usize) -> usize {
    src[..pos].rfind('\n').map_or(0, |i| i + 1)
}

fn line_end(src: &str, pos: usize) -> usize {
    src[pos..].find('\n').map_or(src.len(), |i| pos + i + 1)
}

fn apply(def: &SyscallDef, op: &MutationOp) -> Result<String, InjectError> {
    let src = &def.impl_c;
    match op {
        MutationOp::Replace { from, to } => {
            let at = unique(def, from)?;
            Ok(format!("{}{}{}", &src[..at], to, &src[at + from.len()..]))
        }
        MutationOp::DeleteCheck { target } => {
            let at = unique(def, target)?;
            let start = line_start(src, at);
            let head = src[start..].trim_start();
            if !head.starts_with("if") {
                return Err(InjectError::NotACheck { syscall: def.name.clone(), text: target.clone() });
            }
            let semi = src[at..].find(';').map(|i| at + i).ok_or_else(|| InjectError::NotACheck {
                syscall: def.name.clone(),
                text: target.clone(),
            })?;
            let mut end = line_end(src, semi);
            if src[start..semi].contains('{') {
                if let Some(close) = src[end..].find('}') {
                    end = line_end(src, end + close);
                }
            }
            Ok(format!("{}{}", &src[..start], &src[end..]))
        }
        MutationOp::DeleteStmt { target } => {
            let at = unique(def, target)?;
            let start = line_start(src, at);
            Ok(format!("{}{}", &src[..start], &src[line_end(src, at)..]))
        }
    }
}

/// Applies one seeded mutation of the given class.
pub fn inject_bug(def: &SyscallDef, class: BugClass, seed: u64) -> Result<String, InjectError> {
    let sites = def.sites_for(class);
    if sites.is_empty() {
        return Err(InjectError::NotApplicable { syscall: def.name.clone(), class: class.slug() });
    }
    let pick = if sites.len() == 1 { 0 } else { ChaCha8Rng::seed_from_u64(seed).gen_range(0..sites.len()) };
    apply(def, &sites[pick].op)
}

/// All tasks for the corpus: per syscall, one per applicable class and one Correct.
pub fn build_benchmark(corpus: &[SyscallDef], seed: u64) -> Result<Vec<Task>, InjectError> {
    let mut tasks = Vec::new();
    for def in corpus {
        for v in Variant::all() {
            let impl_c = match v {
                Variant::Correct => def.impl_c.clone(),
                Variant::Bug(c) => match inject_bug(def, c, seed) {
                    Ok(t) => t,
                    Err(InjectError::NotApplicable { .. }) => continue,
                    Err(e) => return Err(e),
                },
            };
            tasks.push(Task {
                id: format!("{}/{}", def.name, v.slug()),
                syscall: def.name.clone(),
                category: def.category,
                variant: v,
                impl_c,
                description: def.description.clone(),
            });
        }
    }
    Ok(tasks)
}

/// Quality gate: oracle specs lint clean, Correct tasks verify and every
/// injected variant diverges from the oracle spec.
pub fn validate_benchmark(
    tasks: &[Task],
    corpus: &[SyscallDef],
    kernel: &Kernel,
    inventory: &Inventory,
    cfg: &VerifyConfig,
) -> Result<(), TaskgenError> {
    for t in tasks {
        let invalid = |m: String| TaskgenError::Invalid { task: t.id.clone(), message: m };
        let def = corpus.iter().find(|d| d.name == t.syscall).ok_or_else(|| invalid("syscall not in corpus".into()))?;
        let findings = lint_source(&def.spec_py, inventory);
        if !findings.is_empty() {
            return Err(invalid(format!("oracle spec has {} lint finding(s)", findings.len())));
        }
        let spec = load_spec(&def.spec_py, kernel, inventory).map_err(|f| invalid(format!("oracle spec: {f}")))?;
        let ir = compile_impl(&t.impl_c, kernel).map_err(|e| invalid(format!("implementation: {e}")))?;
        let outcome = check_equiv(&execute(&ir, &kernel.schema), &spec, kernel, cfg)?;
        let want = if t.variant == Variant::Correct { Verdict::Verified } else { Verdict::Counterexample };
        if outcome.verdict != want {
            return Err(invalid(format!("expected {want:?}, got {:?}", outcome.verdict)));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TaskLine {
    id: String,
    syscall: String,
    category: SyscallCategory,
    variant: Variant,
    impl_path: String,
    description: String,
}

/// One JSON object per line, in task order.
pub fn tasks_to_jsonl(tasks: &[Task]) -> String {
    let mut out = String::new();
    for t in tasks {
        let line = TaskLine {
            id: t.id.clone(),
            syscall: t.syscall.clone(),
            category: t.category,
            variant: t.variant,
            impl_path: t.impl_path(),
            description: t.description.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("task serializes"));
        out.push('\n');
    }
    out
}

/// Writes `tasks.jsonl` and the variant sources under `dir`.
pub fn write_taskset(dir: &Path, tasks: &[Task]) -> Result<(), TaskgenError> {
    for t in tasks {
        let p = dir.join(t.impl_path());
        std::fs::create_dir_all(p.parent().unwrap())?;
        std::fs::write(p, &t.impl_c)?;
    }
    std::fs::write(dir.join("tasks.jsonl"), tasks_to_jsonl(tasks))?;
    Ok(())
}

pub fn load_taskset(dir: &Path) -> Result<Vec<Task>, TaskgenError> {
    let text = std::fs::read_to_string(dir.join("tasks.jsonl"))?;
    let mut tasks = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let l: TaskLine = serde_json::from_str(line)?;
        let impl_c = std::fs::read_to_string(dir.join(&l.impl_path))?;
        tasks.push(Task { id: l.id, syscall: l.syscall, category: l.category, variant: l.variant, impl_c, description: l.description });
    }
    Ok(tasks)
}
