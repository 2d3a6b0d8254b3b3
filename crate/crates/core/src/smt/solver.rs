// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::sexpr::{parse_model, SExprError};

pub const SOLVER_ENV: &str = "SPECFORGE_SOLVER";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("solver I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver answered `{0}`")]
    Unknown(String),
    #[error("unparseable solver output: {0}")]
    Output(String),
    #[error("model: {0}")]
    Model(#[from] SExprError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResponse {
    Unsat,
    Sat(BTreeMap<String, u64>),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub workdir: PathBuf,
}

impl SolverConfig {
    /// `$SPECFORGE_SOLVER` (whitespace-split) or `z3`; scripts go under the
    /// system temp directory.
    pub fn from_env() -> Self {
        let cmd = std::env::var(SOLVER_ENV).unwrap_or_else(|_| "z3".into());
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next().unwrap_or_else(|| "z3".into());
        Self {
            program,
            args: parts.collect(),
            timeout: DEFAULT_TIMEOUT,
            workdir: std::env::temp_dir().join("specforge-smt"),
        }
    }

    pub fn with_workdir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.workdir = dir.into();
        self
    }
}

pub fn script_name(script: &str) -> String {
    format!("{}.smt2", hex::encode(Sha256::digest(script.as_bytes())))
}

/// Writes the script under the work directory, content-addressed.
pub fn write_script(dir: &Path, script: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(script_name(script));
    if !path.exists() {
        let tmp = tempfile::NamedTempFile::new_in(dir)?;
        std::fs::write(tmp.path(), script)?;
        tmp.persist(&path).map_err(|e| e.error)?;
    }
    Ok(path)
}

pub fn run_solver(cfg: &SolverConfig, script: &str) -> Result<SolverResponse, SolverError> {
    let path = write_script(&cfg.workdir, script)?;
    let mut child = Command::new(&cfg.program)
        .args(&cfg.args)
        .arg(&path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn { command: cfg.program.clone(), source })?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SolverError::Timeout(cfg.timeout));
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let out = reader.join().unwrap_or_default();
    parse_response(&out)
}

pub fn parse_response(out: &str) -> Result<SolverResponse, SolverError> {
    let trimmed = out.trim_start();
    let (first, rest) = trimmed.split_once('\n').unwrap_or((trimmed, ""));
    match first.trim() {
        "unsat" => Ok(SolverResponse::Unsat),
        "sat" => Ok(SolverResponse::Sat(parse_model(rest)?)),
        "unknown" | "timeout" => Err(SolverError::Unknown(first.trim().into())),
        other => Err(SolverError::Output(other.chars().take(200).collect())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn responses() {
        assert_eq!(parse_response("unsat\n(error \"model not available\")\n").unwrap(), SolverResponse::Unsat);
        let sat = parse_response("sat\n(\n  (define-fun x () (_ BitVec 8) #x03)\n)\n").unwrap();
        assert_eq!(sat, SolverResponse::Sat([("x".to_string(), 3)].into()));
        assert!(matches!(parse_response("unknown\n"), Err(SolverError::Unknown(_))));
        assert!(matches!(parse_response("garbage"), Err(SolverError::Output(_))));
    }

    #[test]
    fn script_names_are_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_script(dir.path(), "(check-sat)\n").unwrap();
        let b = write_script(dir.path(), "(check-sat)\n").unwrap();
        assert_eq!(a, b);
        assert!(a.file_name().unwrap().to_str().unwrap().ends_with(".smt2"));
    }

    #[test]
    fn missing_solver_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig {
            program: "/nonexistent/solver".into(),
            args: vec![],
            timeout: DEFAULT_TIMEOUT,
            workdir: dir.path().into(),
        };
        assert!(matches!(run_solver(&cfg, "(check-sat)"), Err(SolverError::Spawn { .. })));
    }
}
