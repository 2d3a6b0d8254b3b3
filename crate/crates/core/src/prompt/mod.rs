// SPDX-License-Identifier: Apache-2.0

//! Translation guide data, prompt assembly, completion providers and
//! response extraction.

mod assemble;
mod extract;
mod guide;
mod provider;

use thiserror::Error;

pub use assemble::{
    approx_tokens, assemble_prompt, few_shot_for, PromptBundle, PromptComponents, Segment, SegmentKind, FEW_SHOT_COUNT,
};
pub use extract::{extract_spec_block, FormatError};
pub use guide::{render_guide, Guide, GuideCategory, GuideEntry, Tier, CATEGORY_TITLES};
pub use provider::{
    build_provider, mutate_spec, parse_schedule, schedule_to_jsonl, CallLog, Completion, CompletionRequest, EchoOracle,
    HttpProvider, ModelConfig, ModelRegistry, MutateK, Provider, ProviderError, ProviderKind, ScheduleEntry, Scripted, Usage,
};

/// A missing or malformed configuration input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{source_name}: {message}")]
pub struct ConfigError {
    pub source_name: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { source_name: source_name.into(), message: message.into() }
    }
}
