// SPDX-License-Identifier: Apache-2.0

//! End-to-end evaluation: prompts, completions, judging, failure classes
//! and reports.

mod artifacts;
mod classify;
mod metrics;
mod report;
mod run;

use thiserror::Error;

use crate::prompt::{ConfigError, ProviderError};
use crate::verify::VerifyError;

pub use artifacts::{sha256_hex, write_atomic, ArtifactStore};
pub use classify::{classify_failure, FailedStage, FailureClass, SemanticSub, SyntaxSub};
pub use metrics::{compute_aggregates, format_hundredths, Aggregates, Breakdown, NamedBreakdown, Ratio};
pub use report::{
    diff_runs, render_diff_md, render_joined_md, render_report, EvalReport, Flip, Method, ReportFormat, RunDiff, RunManifest,
    SyscallDelta, TaskRecord, VariantScope,
};
pub use run::{
    corpus_hash, load_report, prompt_hash, run_eval, taskset_hash, write_run, EvalContext, EvalOptions, EvalRun, TaskTiming,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{task_id}: {source}")]
    Provider { task_id: String, source: ProviderError },
    #[error("{task_id}: {source}")]
    Verify { task_id: String, source: VerifyError },
    #[error("{task_id}: implementation does not compile: {message}")]
    Compile { task_id: String, message: String },
    #[error("syscall `{0}` is not in the corpus")]
    UnknownSyscall(String),
    #[error("runs were made over different task sets")]
    TasksetMismatch,
    #[error("run stopped before every task finished")]
    Incomplete,
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Configuration problems map to exit code 2, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}
