// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::SyscallDef;
use crate::taskgen::Task;

use super::guide::{render_guide, Guide};
use super::ConfigError;

/// Number of worked examples placed before the target.
pub const FEW_SHOT_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    System,
    ProgrammingModel,
    FewShot,
    Guide,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub text: String,
    /// Approximate: characters / 4.
    pub approx_tokens: usize,
}

impl Segment {
    fn new(kind: SegmentKind, text: String) -> Self {
        let approx_tokens = approx_tokens(&text);
        Segment { kind, text, approx_tokens }
    }
}

pub fn approx_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub task_id: String,
    pub segments: Vec<Segment>,
}

impl PromptBundle {
    pub fn text(&self) -> String {
        self.segments.iter().map(|s| s.text.as_str()).collect()
    }

    pub fn segment(&self, kind: SegmentKind) -> Option<&Segment> {
        self.segments.iter().find(|s| s.kind == kind)
    }

    pub fn approx_tokens(&self) -> usize {
        self.segments.iter().map(|s| s.approx_tokens).sum()
    }
}

/// Everything a prompt is built from besides the task itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptComponents {
    pub system: String,
    pub programming_model: String,
    pub guide: Guide,
    pub few_shot_count: usize,
}

fn read(dir: &Path, name: &str) -> Result<String, ConfigError> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))
}

impl PromptComponents {
    pub fn bundled() -> Self {
        PromptComponents {
            system: include_str!("../../data/prompt/system.md").to_string(),
            programming_model: include_str!("../../data/prompt/programming_model.md").to_string(),
            guide: Guide::bundled().clone(),
            few_shot_count: FEW_SHOT_COUNT,
        }
    }

    /// Reads `system.md`, `programming_model.md` and `guide.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, ConfigError> {
        Ok(PromptComponents {
            system: read(dir, "system.md")?,
            programming_model: read(dir, "programming_model.md")?,
            guide: Guide::from_json(&read(dir, "guide.json")?)?,
            few_shot_count: FEW_SHOT_COUNT,
        })
    }
}

/// Each segment ends with a blank line so that concatenation needs no
/// separators and dropping one segment leaves the others byte-identical.
fn block(text: &str) -> String {
    let t = text.trim_end();
    if t.is_empty() {
        String::new()
    } else {
        format!("{t}\n\n")
    }
}

/// Worked examples for a target: the first `n` corpus syscalls other than
/// the target itself.
pub fn few_shot_for<'a>(syscall: &str, corpus: &'a [SyscallDef], n: usize) -> Vec<&'a SyscallDef> {
    corpus.iter().filter(|d| d.name != syscall).take(n).collect()
}

fn render_few_shot(examples: &[&SyscallDef]) -> String {
    if examples.is_empty() {
        return String::new();
    }
    let mut out = String::from("# Examples\n\n");
    for d in examples {
        out.push_str(&format!(
            "## {}\n\n{}\n\n```c\n{}\n```\n\n```python\n{}\n```\n\n",
            d.name,
            d.description.trim_end(),
            d.impl_c.trim_end(),
            d.spec_py.trim_end()
        ));
    }
    out
}

fn render_target(task: &Task) -> String {
    format!(
        "# Task\n\nWrite the specification for `{}`.\n\n{}\n\n```c\n{}\n```\n",
        task.syscall,
        task.description.trim_end(),
        task.impl_c.trim_end()
    )
}

pub fn assemble_prompt(task: &Task, corpus: &[SyscallDef], components: &PromptComponents, include_guide: bool) -> PromptBundle {
    let examples = few_shot_for(&task.syscall, corpus, components.few_shot_count);
    let mut segments = vec![
        Segment::new(SegmentKind::System, block(&components.system)),
        Segment::new(SegmentKind::ProgrammingModel, block(&components.programming_model)),
        Segment::new(SegmentKind::FewShot, render_few_shot(&examples)),
    ];
    if include_guide {
        segments.push(Segment::new(SegmentKind::Guide, block(&render_guide(&components.guide, None))));
    }
    segments.push(Segment::new(SegmentKind::Target, render_target(task)));
    PromptBundle { task_id: task.id.clone(), segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus;
    use crate::taskgen::build_benchmark;

    fn tasks() -> Vec<Task> {
        build_benchmark(corpus(), 1).unwrap()
    }

    #[test]
    fn guide_toggle_is_one_segment() {
        let c = PromptComponents::bundled();
        for t in tasks() {
            let with = assemble_prompt(&t, corpus(), &c, true);
            let without = assemble_prompt(&t, corpus(), &c, false);
            let kinds: Vec<SegmentKind> = with.segments.iter().map(|s| s.kind).collect();
            assert_eq!(
                kinds,
                [SegmentKind::System, SegmentKind::ProgrammingModel, SegmentKind::FewShot, SegmentKind::Guide, SegmentKind::Target]
            );
            let guide = &with.segment(SegmentKind::Guide).unwrap().text;
            let cut = with.text().replacen(guide.as_str(), "", 1);
            assert_eq!(cut, without.text());
            assert!(without.segment(SegmentKind::Guide).is_none());
        }
    }

    #[test]
    fn deterministic() {
        let c = PromptComponents::bundled();
        let t = &tasks()[5];
        assert_eq!(assemble_prompt(t, corpus(), &c, true), assemble_prompt(t, corpus(), &c, true));
    }

    #[test]
    fn target_is_held_out_of_examples() {
        let c = PromptComponents::bundled();
        for t in tasks() {
            let b = assemble_prompt(&t, corpus(), &c, false);
            let fs = &b.segment(SegmentKind::FewShot).unwrap().text;
            assert!(!fs.contains(&format!("## {}\n", t.syscall)));
            assert_eq!(fs.matches("```python").count(), FEW_SHOT_COUNT);
        }
    }

    #[test]
    fn empty_few_shot_still_assembles() {
        let mut c = PromptComponents::bundled();
        c.few_shot_count = 0;
        let b = assemble_prompt(&tasks()[0], corpus(), &c, true);
        assert_eq!(b.segments.len(), 5);
        assert_eq!(b.segment(SegmentKind::FewShot).unwrap().text, "");
        assert!(b.text().ends_with("```\n"));
    }

    #[test]
    fn size_estimate_is_quarter_chars() {
        assert_eq!(approx_tokens(""), 0);
        assert_eq!(approx_tokens("abcde"), 2);
        let b = assemble_prompt(&tasks()[0], corpus(), &PromptComponents::bundled(), true);
        assert_eq!(b.approx_tokens(), b.segments.iter().map(|s| approx_tokens(&s.text)).sum::<usize>());
    }

    #[test]
    fn missing_component_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("system.md"), "sys").unwrap();
        let e = PromptComponents::load(dir.path()).unwrap_err();
        assert!(e.to_string().contains("programming_model.md"));
    }
}
