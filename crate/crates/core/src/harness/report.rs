// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::SyscallCategory;
use crate::prompt::ModelConfig;
use crate::spec::{LintFinding, SpecFault};
use crate::taskgen::Variant;
use crate::verify::VariantOutcome;

use super::classify::FailureClass;
use super::metrics::{compute_aggregates, format_hundredths, Aggregates, Breakdown, NamedBreakdown};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Bodhi,
}

impl Method {
    pub fn includes_guide(self) -> bool {
        self == Method::Bodhi
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Bodhi => "bodhi",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "bodhi" => Ok(Method::Bodhi),
            other => Err(format!("unknown method `{other}` (expected baseline or bodhi)")),
        }
    }
}

/// Which implementations a generated spec is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantScope {
    /// Every variant of the task's syscall.
    AllVariants,
    /// Only the task's own variant.
    OwnVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub model: ModelConfig,
    pub method: Method,
    pub seed: u64,
    pub corpus_hash: String,
    pub taskset_hash: String,
    pub prompt_hash: String,
    pub variant_scope: VariantScope,
    pub backend: String,
    pub samples: usize,
    pub verify_seed: u64,
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: String,
    pub syscall: String,
    pub category: SyscallCategory,
    pub variant: Variant,
    pub method: Method,
    pub model: String,
    pub pass: bool,
    pub failure: Option<FailureClass>,
    pub spec_text: Option<String>,
    pub outcomes: Vec<VariantOutcome>,
    pub fault: Option<SpecFault>,
    pub lint: Vec<LintFinding>,
    /// Set only for tasks excluded from a partial run.
    pub infra_error: Option<String>,
    pub prompt_artifact: Option<String>,
    pub response_artifact: Option<String>,
    pub smt_artifacts: Vec<String>,
    pub witness_artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub manifest: RunManifest,
    pub records: Vec<TaskRecord>,
    pub aggregates: Aggregates,
}

impl EvalReport {
    pub fn new(manifest: RunManifest, records: Vec<TaskRecord>) -> Self {
        let aggregates = compute_aggregates(&records);
        EvalReport { manifest, records, aggregates }
    }

    /// True when the stored aggregates match a fresh recomputation.
    pub fn is_consistent(&self) -> bool {
        compute_aggregates(&self.records) == self.aggregates
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn label(&self) -> String {
        format!("{} / {}", self.manifest.model.id, self.manifest.method.as_str())
    }

    /// Table columns followed by Total.
    pub fn table_columns(&self) -> Vec<NamedBreakdown> {
        let mut cols = self.aggregates.columns.clone();
        cols.push(NamedBreakdown { name: "Total".into(), stats: self.aggregates.overall });
        cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" => Ok(ReportFormat::Md),
            other => Err(format!("unknown format `{other}` (expected md, json or csv)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Md => "md",
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Md => render_md(report),
    }
}

const CSV_HEADER: [&str; 14] = [
    "scope",
    "name",
    "total",
    "scored",
    "pass",
    "syntax",
    "type_sort",
    "api_reference",
    "format",
    "semantic",
    "domain_pattern",
    "translation_logic",
    "infrastructure",
    "pass_at_1",
];

fn csv_row(scope: &str, name: &str, b: &Breakdown) -> Vec<String> {
    let mut row = vec![scope.to_string(), name.to_string()];
    row.extend(
        [b.total, b.scored(), b.pass, b.syntax, b.type_sort, b.api_reference, b.format, b.semantic, b.domain_pattern, b.translation_logic, b.infrastructure]
            .iter()
            .map(u64::to_string),
    );
    row.push(b.pass_at_1().to_string());
    row
}

fn render_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(CSV_HEADER).unwrap();
    for c in report.table_columns() {
        w.write_record(csv_row("column", &c.name, &c.stats)).unwrap();
    }
    for s in &report.aggregates.syscalls {
        w.write_record(csv_row("syscall", &s.name, &s.stats)).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", header.iter().map(|_| "---|").collect::<String>());
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn distribution(out: &mut String, b: &Breakdown) {
    let rows: Vec<Vec<String>> = [
        ("Pass", b.pass),
        ("Syntax", b.syntax),
        ("  Type/sort", b.type_sort),
        ("  API/reference", b.api_reference),
        ("  Format", b.format),
        ("Semantic", b.semantic),
        ("  Domain pattern", b.domain_pattern),
        ("  Translation logic", b.translation_logic),
        ("Infrastructure (excluded)", b.infrastructure),
    ]
    .iter()
    .map(|(n, c)| vec![n.to_string(), c.to_string()])
    .collect();
    table(out, &["Outcome".into(), "Tasks".into()], &rows);
}

fn render_md(report: &EvalReport) -> String {
    let m = &report.manifest;
    let mut out = format!("# Evaluation: {}\n\n", report.label());
    let _ = writeln!(
        out,
        "Model `{}` ({}), temperature {}, max tokens {}, seed {}. Corpus `{}`, task set `{}`.\n",
        m.model.model,
        serde_json::to_value(m.model.provider).unwrap().as_str().unwrap_or(""),
        m.model.temperature,
        m.model.max_tokens,
        m.seed,
        &m.corpus_hash[..12.min(m.corpus_hash.len())],
        &m.taskset_hash[..12.min(m.taskset_hash.len())],
    );
    out.push_str("## Pass@1 (%)\n\n");
    let cols = report.table_columns();
    let mut header = vec!["Method".to_string()];
    header.extend(cols.iter().map(|c| c.name.clone()));
    let mut row = vec![m.method.as_str().to_string()];
    row.extend(cols.iter().map(|c| c.stats.pass_at_1().to_string()));
    table(&mut out, &header, &[row]);
    out.push_str("## Outcomes\n\n");
    distribution(&mut out, &report.aggregates.overall);
    out.push_str("## Per syscall\n\n");
    let rows: Vec<Vec<String>> = report
        .aggregates
        .syscalls
        .iter()
        .map(|s| {
            let cat = report.records.iter().find(|r| r.syscall == s.name).map_or("", |r| r.category.label());
            vec![s.name.clone(), cat.to_string(), format!("{}/{}", s.stats.pass, s.stats.scored()), s.stats.pass_at_1().to_string()]
        })
        .collect();
    table(&mut out, &["Syscall".into(), "Category".into(), "Passed".into(), "Pass@1".into()], &rows);
    out.push_str("## Failed tasks\n\n");
    let failed: Vec<Vec<String>> = report
        .records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            let class = r.failure.map_or("Infrastructure".to_string(), |c| c.label().to_string());
            vec![r.task_id.clone(), class]
        })
        .collect();
    if failed.is_empty() {
        out.push_str("None.\n");
    } else {
        table(&mut out, &["Task".into(), "Class".into()], &failed);
        out.pop();
    }
    out
}

fn delta(a: &Breakdown, b: &Breakdown) -> String {
    match (a.pass_at_1().hundredths(), b.pass_at_1().hundredths()) {
        (Some(x), Some(y)) => {
            let d = y as i64 - x as i64;
            format!("{}{}", if d > 0 { "+" } else { "" }, format_hundredths(d))
        }
        _ => "-".into(),
    }
}

/// Side-by-side table of two runs over the same task set with a delta
/// column (second minus first).
pub fn render_joined_md(baseline: &EvalReport, bodhi: &EvalReport) -> Result<String, HarnessError> {
    if baseline.manifest.taskset_hash != bodhi.manifest.taskset_hash {
        return Err(HarnessError::TasksetMismatch);
    }
    let mut out = format!("# Comparison: {} vs {}\n\n## Pass@1 (%)\n\n", baseline.label(), bodhi.label());
    let header: Vec<String> =
        ["Column", baseline.manifest.method.as_str(), bodhi.manifest.method.as_str(), "Delta"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = baseline
        .table_columns()
        .iter()
        .zip(bodhi.table_columns())
        .map(|(a, b)| vec![a.name.clone(), a.stats.pass_at_1().to_string(), b.stats.pass_at_1().to_string(), delta(&a.stats, &b.stats)])
        .collect();
    table(&mut out, &header, &rows);
    out.push_str("## Per syscall\n\n");
    let d = diff_runs(baseline, bodhi)?;
    let rows: Vec<Vec<String>> = d
        .syscalls
        .iter()
        .map(|s| vec![s.syscall.clone(), format!("{}/{}", s.before, s.total), format!("{}/{}", s.after, s.total), format!("{:+}", s.delta)])
        .collect();
    table(&mut out, &header_of(&["Syscall", "Before", "After", "Delta"]), &rows);
    out.pop();
    Ok(out)
}

fn header_of(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyscallDelta {
    pub syscall: String,
    pub total: u64,
    pub before: u64,
    pub after: u64,
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub task_id: String,
    pub before: bool,
    pub after: bool,
}

impl Flip {
    pub fn is_regression(&self) -> bool {
        self.before && !self.after
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDiff {
    pub syscalls: Vec<SyscallDelta>,
    pub flips: Vec<Flip>,
}

/// Per-task transitions from run `a` to run `b`.
pub fn diff_runs(a: &EvalReport, b: &EvalReport) -> Result<RunDiff, HarnessError> {
    if a.manifest.taskset_hash != b.manifest.taskset_hash || a.records.len() != b.records.len() {
        return Err(HarnessError::TasksetMismatch);
    }
    let mut flips = Vec::new();
    for (x, y) in a.records.iter().zip(&b.records) {
        if x.task_id != y.task_id {
            return Err(HarnessError::TasksetMismatch);
        }
        if x.pass != y.pass {
            flips.push(Flip { task_id: x.task_id.clone(), before: x.pass, after: y.pass });
        }
    }
    let syscalls = a
        .aggregates
        .syscalls
        .iter()
        .zip(&b.aggregates.syscalls)
        .map(|(x, y)| SyscallDelta {
            syscall: x.name.clone(),
            total: x.stats.total,
            before: x.stats.pass,
            after: y.stats.pass,
            delta: y.stats.pass as i64 - x.stats.pass as i64,
        })
        .collect();
    Ok(RunDiff { syscalls, flips })
}

pub fn render_diff_md(d: &RunDiff) -> String {
    let mut out = String::from("# Run diff\n\n");
    let rows: Vec<Vec<String>> = d
        .syscalls
        .iter()
        .map(|s| vec![s.syscall.clone(), format!("{}/{}", s.before, s.total), format!("{}/{}", s.after, s.total), format!("{:+}", s.delta)])
        .collect();
    table(&mut out, &header_of(&["Syscall", "Before", "After", "Delta"]), &rows);
    if d.flips.is_empty() {
        out.push_str("No flipped tasks.\n");
        return out;
    }
    let rows: Vec<Vec<String>> = d
        .flips
        .iter()
        .map(|f| vec![f.task_id.clone(), if f.is_regression() { "pass -> fail" } else { "fail -> pass" }.to_string()])
        .collect();
    table(&mut out, &header_of(&["Task", "Transition"]), &rows);
    out.pop();
    out
}
