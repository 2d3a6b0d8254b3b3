// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::SyscallDef;

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    EchoOracle,
    Scripted,
    MutateK,
    #[serde(rename = "openai")]
    OpenAi,
    Anthropic,
}

impl ProviderKind {
    pub fn is_mock(self) -> bool {
        matches!(self, ProviderKind::EchoOracle | ProviderKind::Scripted | ProviderKind::MutateK)
    }
}

fn default_max_tokens() -> u32 {
    4096
}

fn default_retries() -> u32 {
    3
}

fn default_timeout() -> u64 {
    120
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub id: String,
    pub provider: ProviderKind,
    #[serde(default)]
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    /// JSONL schedule for the scripted mock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
    /// Mutations per response for mutate-k.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

impl ModelConfig {
    pub fn mock(id: &str, provider: ProviderKind) -> Self {
        ModelConfig {
            id: id.into(),
            provider,
            model: id.into(),
            endpoint: None,
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            api_key_env: None,
            schedule: None,
            k: None,
            retries: default_retries(),
            timeout_secs: default_timeout(),
        }
    }
}

/// Model registry file: a list of `[[model]]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelRegistry {
    #[serde(default)]
    pub model: Vec<ModelConfig>,
}

impl ModelRegistry {
    pub fn builtin() -> Self {
        let mut m1 = ModelConfig::mock("mutate-1", ProviderKind::MutateK);
        m1.k = Some(1);
        ModelRegistry {
            model: vec![
                ModelConfig::mock("echo-oracle", ProviderKind::EchoOracle),
                ModelConfig::mock("scripted", ProviderKind::Scripted),
                m1,
            ],
        }
    }

    /// Parses a registry file; built-in mocks are appended unless the file
    /// redefines their ids.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut reg: ModelRegistry = toml::from_str(text).map_err(|e| ConfigError::new("model registry", e.to_string()))?;
        for b in Self::builtin().model {
            if reg.get(&b.id).is_none() {
                reg.model.push(b);
            }
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn get(&self, id: &str) -> Option<&ModelConfig> {
        self.model.iter().find(|m| m.id == id)
    }
}

/// One independent single-message request.
#[derive(Debug, Clone)]
pub struct CompletionRequest<'a> {
    pub task_id: &'a str,
    pub syscall: &'a str,
    pub prompt: &'a str,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Usage>,
    pub latency_ms: u64,
    pub metadata: Value,
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Response(String),
    #[error("no scheduled response for task `{0}`")]
    Unscheduled(String),
    #[error("no oracle spec for syscall `{0}`")]
    NoOracle(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl ProviderError {
    pub fn is_config(&self) -> bool {
        matches!(self, ProviderError::Config(_))
    }
}

/// A completion backend. Implementations keep no conversation state; each
/// call is answered from the request alone.
pub trait Provider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, req: &CompletionRequest) -> Result<Completion, ProviderError>;
}

/// Task ids of every request a mock has answered, in arrival order.
#[derive(Debug, Default)]
pub struct CallLog(Mutex<Vec<String>>);

impl CallLog {
    fn record(&self, task_id: &str) {
        self.0.lock().unwrap().push(task_id.to_string());
    }

    pub fn calls(&self) -> Vec<String> {
        self.0.lock().unwrap().clone()
    }
}

fn fence(spec: &str) -> String {
    format!("```python\n{}\n```\n", spec.trim_end())
}

fn mock_completion(text: String, kind: &str) -> Completion {
    Completion { text, usage: None, latency_ms: 0, metadata: json!({ "provider": kind }) }
}

fn oracle_for<'a>(oracles: &'a BTreeMap<String, String>, syscall: &str) -> Result<&'a String, ProviderError> {
    oracles.get(syscall).ok_or_else(|| ProviderError::NoOracle(syscall.into()))
}

fn oracle_map(corpus: &[SyscallDef]) -> BTreeMap<String, String> {
    corpus.iter().map(|d| (d.name.clone(), d.spec_py.clone())).collect()
}

/// Answers every task with its syscall's oracle spec.
pub struct EchoOracle {
    oracles: BTreeMap<String, String>,
    pub log: CallLog,
}

impl EchoOracle {
    pub fn new(corpus: &[SyscallDef]) -> Self {
        EchoOracle { oracles: oracle_map(corpus), log: CallLog::default() }
    }
}

impl Provider for EchoOracle {
    fn id(&self) -> &str {
        "echo-oracle"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, ProviderError> {
        self.log.record(req.task_id);
        Ok(mock_completion(fence(oracle_for(&self.oracles, req.syscall)?), "echo-oracle"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub task_id: String,
    pub response_text: String,
}

/// Parses a JSONL schedule. Later lines override earlier ones.
pub fn parse_schedule(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let e: ScheduleEntry =
            serde_json::from_str(line).map_err(|e| ConfigError::new("schedule", format!("line {}: {e}", i + 1)))?;
        out.insert(e.task_id, e.response_text);
    }
    Ok(out)
}

pub fn schedule_to_jsonl(entries: &[ScheduleEntry]) -> String {
    entries.iter().map(|e| serde_json::to_string(e).expect("entry serializes") + "\n").collect()
}

/// Replays fixed response texts by task id.
pub struct Scripted {
    schedule: BTreeMap<String, String>,
    pub log: CallLog,
}

impl Scripted {
    pub fn new(schedule: BTreeMap<String, String>) -> Self {
        Scripted { schedule, log: CallLog::default() }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Ok(Self::new(parse_schedule(&text)?))
    }
}

impl Provider for Scripted {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, ProviderError> {
        self.log.record(req.task_id);
        let text = self.schedule.get(req.task_id).ok_or_else(|| ProviderError::Unscheduled(req.task_id.into()))?;
        Ok(mock_completion(text.clone(), "scripted"))
    }
}

type TextMutation = fn(&str) -> Option<String>;

fn flip_first_eq(s: &str) -> Option<String> {
    let at = s.find(" == ")?;
    Some(format!("{} != {}", &s[..at], &s[at + 4..]))
}

fn drop_last_write(s: &str) -> Option<String> {
    let lines: Vec<&str> = s.lines().collect();
    let at = lines.iter().rposition(|l| l.trim_start().starts_with("new.") && l.contains('='))?;
    let indent = |l: &str| l.len() - l.trim_start().len();
    // Continuation lines are indented deeper than the statement they extend.
    let end = at + 1 + lines[at + 1..].iter().take_while(|l| !l.trim().is_empty() && indent(l) > indent(lines[at])).count();
    let kept: Vec<&str> = lines[..at].iter().chain(&lines[end..]).copied().collect();
    Some(kept.join("\n") + "\n")
}

fn widen_ult(s: &str) -> Option<String> {
    s.contains("z3.ULT(").then(|| s.replacen("z3.ULT(", "z3.ULE(", 1))
}

fn swap_frame(s: &str) -> Option<String> {
    s.contains("util.If(cond, new, old)").then(|| s.replacen("util.If(cond, new, old)", "util.If(cond, old, new)", 1))
}

fn stale_read(s: &str) -> Option<String> {
    let at = s.find("= old.")?;
    let line_start = s[..at].rfind('\n').map_or(0, |i| i + 1);
    s[line_start..at].trim_start().starts_with("new.").then(|| format!("{}= new.{}", &s[..at], &s[at + 6..]))
}

const MUTATIONS: [TextMutation; 5] = [flip_first_eq, drop_last_write, widen_ult, swap_frame, stale_read];

fn task_seed(seed: u64, task_id: &str) -> u64 {
    let d = Sha256::digest(task_id.as_bytes());
    seed ^ u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Applies up to `k` distinct text mutations to `spec`, chosen by
/// (seed, task id).
pub fn mutate_spec(spec: &str, k: usize, seed: u64, task_id: &str) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, task_id));
    let mut order: Vec<usize> = (0..MUTATIONS.len()).collect();
    order.shuffle(&mut rng);
    let mut out = spec.to_string();
    let mut applied = 0;
    for i in order {
        if applied == k {
            break;
        }
        if let Some(m) = MUTATIONS[i](&out) {
            out = m;
            applied += 1;
        }
    }
    out
}

/// Oracle spec with `k` seeded mutations.
pub struct MutateK {
    oracles: BTreeMap<String, String>,
    k: usize,
    pub log: CallLog,
}

impl MutateK {
    pub fn new(corpus: &[SyscallDef], k: usize) -> Self {
        MutateK { oracles: oracle_map(corpus), k, log: CallLog::default() }
    }
}

impl Provider for MutateK {
    fn id(&self) -> &str {
        "mutate-k"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<Completion, ProviderError> {
        self.log.record(req.task_id);
        let spec = oracle_for(&self.oracles, req.syscall)?;
        Ok(mock_completion(fence(&mutate_spec(spec, self.k, req.seed, req.task_id)), "mutate-k"))
    }
}

/// OpenAI-compatible chat completions or the Anthropic messages API.
pub struct HttpProvider {
    cfg: ModelConfig,
    key: String,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(cfg: &ModelConfig) -> Result<Self, ConfigError> {
        let var = cfg.api_key_env.as_deref().ok_or_else(|| ConfigError::new(&cfg.id, "api_key_env is not set"))?;
        let key = std::env::var(var).map_err(|_| ConfigError::new(&cfg.id, format!("environment variable {var} is not set")))?;
        if cfg.endpoint.is_none() {
            return Err(ConfigError::new(&cfg.id, "endpoint is not set"));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpProvider { cfg: cfg.clone(), key, agent })
    }

    fn url(&self) -> String {
        let base = self.cfg.endpoint.as_deref().unwrap().trim_end_matches('/');
        match self.cfg.provider {
            ProviderKind::Anthropic => format!("{base}/v1/messages"),
            _ => format!("{base}/chat/completions"),
        }
    }

    fn body(&self, prompt: &str) -> Value {
        json!({
            "model": self.cfg.model,
            "max_tokens": self.cfg.max_tokens,
            "temperature": self.cfg.temperature,
            "messages": [{ "role": "user", "content": prompt }],
        })
    }

    fn send(&self, body: &Value) -> Result<(u16, Value), Attempt> {
        let req = self.agent.post(&self.url()).header("content-type", "application/json");
        let req = match self.cfg.provider {
            ProviderKind::Anthropic => req.header("x-api-key", &self.key).header("anthropic-version", "2023-06-01"),
            _ => req.header("authorization", &format!("Bearer {}", self.key)),
        };
        let mut resp = req.send_json(body).map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| Attempt::Retry(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(Attempt::Fatal(ProviderError::Status { status, body: text }));
        }
        let v = serde_json::from_str(&text).map_err(|e| Attempt::Fatal(ProviderError::Response(e.to_string())))?;
        Ok((status, v))
    }

    fn parse(&self, v: &Value) -> Result<(String, Option<Usage>), ProviderError> {
        let missing = || ProviderError::Response(format!("unexpected shape: {v}"));
        let u = |a: &str, b: &str| -> Option<Usage> {
            let usage = v.get("usage")?;
            Some(Usage { input_tokens: usage.get(a)?.as_u64()?, output_tokens: usage.get(b)?.as_u64()? })
        };
        match self.cfg.provider {
            ProviderKind::Anthropic => {
                let blocks = v.get("content").and_then(Value::as_array).ok_or_else(missing)?;
                let text: String = blocks
                    .iter()
                    .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
                    .filter_map(|b| b.get("text").and_then(Value::as_str))
                    .collect();
                Ok((text, u("input_tokens", "output_tokens")))
            }
            _ => {
                let text = v.pointer("/choices/0/message/content").and_then(Value::as_str).ok_or_else(missing)?;
                Ok((text.to_string(), u("prompt_tokens", "completion_tokens")))
            }
        }
    }
}

enum Attempt {
    Retry(String),
    Fatal(ProviderError),
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.cfg.id
    }

    /// Retries transport failures, 429 and 5xx with doubling backoff; a
    /// response that arrives is never retried, whatever it says.
    fn complete(&self, req: &CompletionRequest) -> Result<Completion, ProviderError> {
        let body = self.body(req.prompt);
        let start = Instant::now();
        let attempts = self.cfg.retries + 1;
        let mut last = String::new();
        for i in 0..attempts {
            if i > 0 {
                std::thread::sleep(Duration::from_millis(200 << (i - 1).min(6)));
            }
            match self.send(&body) {
                Ok((status, v)) => {
                    let (text, usage) = self.parse(&v)?;
                    let model = v.get("model").cloned().unwrap_or(Value::Null);
                    return Ok(Completion {
                        text,
                        usage,
                        latency_ms: start.elapsed().as_millis() as u64,
                        metadata: json!({ "provider": self.cfg.id, "status": status, "model": model, "attempts": i + 1 }),
                    });
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(m)) => last = m,
            }
        }
        Err(ProviderError::Transport { attempts, message: last })
    }
}

/// Instantiates the provider a config names.
pub fn build_provider(cfg: &ModelConfig, corpus: &[SyscallDef]) -> Result<Box<dyn Provider>, ConfigError> {
    Ok(match cfg.provider {
        ProviderKind::EchoOracle => Box::new(EchoOracle::new(corpus)),
        ProviderKind::Scripted => {
            let path = cfg.schedule.as_deref().ok_or_else(|| ConfigError::new(&cfg.id, "scripted provider needs a schedule"))?;
            Box::new(Scripted::from_file(path)?)
        }
        ProviderKind::MutateK => Box::new(MutateK::new(corpus, cfg.k.unwrap_or(1))),
        ProviderKind::OpenAi | ProviderKind::Anthropic => Box::new(HttpProvider::new(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus;
    use crate::prompt::extract_spec_block;

    fn req<'a>(task_id: &'a str, syscall: &'a str) -> CompletionRequest<'a> {
        CompletionRequest { task_id, syscall, prompt: "p", seed: 0 }
    }

    #[test]
    fn echo_returns_fenced_oracle() {
        let p = EchoOracle::new(corpus());
        let c = p.complete(&req("sys_dup/correct", "sys_dup")).unwrap();
        assert_eq!(extract_spec_block(&c.text).unwrap(), crate::corpus::find("sys_dup").unwrap().spec_py);
        assert_eq!(p.log.calls(), ["sys_dup/correct"]);
    }

    #[test]
    fn scripted_by_task_id() {
        let sched = "{\"task_id\":\"a/x\",\"response_text\":\"hello\"}\n\n{\"task_id\":\"b/y\",\"response_text\":\"bye\"}\n";
        let p = Scripted::new(parse_schedule(sched).unwrap());
        assert_eq!(p.complete(&req("b/y", "b")).unwrap().text, "bye");
        assert!(matches!(p.complete(&req("c/z", "c")), Err(ProviderError::Unscheduled(_))));
        assert_eq!(p.log.calls().len(), 2);
        assert!(parse_schedule("{nope").is_err());
    }

    #[test]
    fn mutate_is_seeded_and_changes_text() {
        let spec = &crate::corpus::find("sys_map_page").unwrap().spec_py;
        let a = mutate_spec(spec, 2, 7, "sys_map_page/leak");
        assert_eq!(a, mutate_spec(spec, 2, 7, "sys_map_page/leak"));
        assert_ne!(&a, spec);
        assert_eq!(mutate_spec(spec, 0, 7, "t"), *spec);
    }

    #[test]
    fn mutations_keep_specs_loadable() {
        let k = crate::kernel::Kernel::default();
        let inv = crate::spec::Inventory::default();
        for def in crate::corpus::corpus() {
            for m in MUTATIONS {
                if let Some(text) = m(&def.spec_py) {
                    crate::spec::load_spec(&text, &k, &inv).unwrap_or_else(|f| panic!("{}: {f}\n{text}", def.name));
                }
            }
        }
    }

    #[test]
    fn registry_parses_and_keeps_builtins() {
        let text = r#"
[[model]]
id = "gpt"
provider = "openai"
model = "gpt-4o"
endpoint = "https://api.openai.com/v1"
api_key_env = "OPENAI_API_KEY"
"#;
        let reg = ModelRegistry::from_toml(text).unwrap();
        let m = reg.get("gpt").unwrap();
        assert_eq!((m.temperature, m.max_tokens, m.retries), (0.0, 4096, 3));
        assert!(reg.get("echo-oracle").is_some());
        assert!(ModelRegistry::from_toml("[[model]]\nid = 1").is_err());
    }

    #[test]
    fn missing_credentials_is_config_error() {
        let mut cfg = ModelConfig::mock("x", ProviderKind::OpenAi);
        cfg.endpoint = Some("http://127.0.0.1:9".into());
        cfg.api_key_env = Some("SPECFORGE_TEST_UNSET_KEY".into());
        assert!(build_provider(&cfg, corpus()).is_err());
    }

    #[test]
    fn unreachable_endpoint_retries_then_fails() {
        std::env::set_var("SPECFORGE_TEST_DUMMY_KEY", "k");
        let mut cfg = ModelConfig::mock("x", ProviderKind::OpenAi);
        cfg.endpoint = Some("http://127.0.0.1:9".into());
        cfg.api_key_env = Some("SPECFORGE_TEST_DUMMY_KEY".into());
        cfg.retries = 2;
        cfg.timeout_secs = 2;
        let p = HttpProvider::new(&cfg).unwrap();
        match p.complete(&req("t/x", "t")) {
            Err(ProviderError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("expected transport failure, got {other:?}"),
        }
    }
}
