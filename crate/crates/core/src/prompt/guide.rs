// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Syntax,
    Domain,
    Completeness,
}

impl Tier {
    /// The tier a category id belongs to.
    pub fn of(id: u8) -> Option<Tier> {
        match id {
            1..=6 => Some(Tier::Syntax),
            7..=12 => Some(Tier::Domain),
            13..=15 => Some(Tier::Completeness),
            _ => None,
        }
    }
}

/// One source pattern and its spec counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideEntry {
    pub source: String,
    pub spec: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideCategory {
    pub id: u8,
    pub title: String,
    pub tier: Tier,
    #[serde(default)]
    pub summary: String,
    pub entries: Vec<GuideEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guide {
    pub categories: Vec<GuideCategory>,
}

/// Category titles in id order.
pub const CATEGORY_TITLES: [&str; 15] = [
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

impl Guide {
    pub fn from_json(text: &str) -> Result<Guide, ConfigError> {
        let g: Guide = serde_json::from_str(text).map_err(|e| ConfigError::new("guide", e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn bundled() -> &'static Guide {
        static G: std::sync::OnceLock<Guide> = std::sync::OnceLock::new();
        G.get_or_init(|| Guide::from_json(include_str!("../../data/guide.json")).expect("bundled guide is valid"))
    }

    /// Ids must be strictly increasing and each tier must agree with its id.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut last = 0;
        for c in &self.categories {
            if c.id <= last {
                return Err(ConfigError::new("guide", format!("category {} out of order", c.id)));
            }
            last = c.id;
            if Tier::of(c.id) != Some(c.tier) {
                return Err(ConfigError::new("guide", format!("category {} has tier {:?}", c.id, c.tier)));
            }
        }
        Ok(())
    }
}

fn fenced(lang: &str, body: &str) -> String {
    format!("```{lang}\n{}\n```\n", body.trim_end())
}

/// Markdown rendering. `None` renders every category; an empty selection
/// renders nothing at all.
pub fn render_guide(guide: &Guide, tiers: Option<&[Tier]>) -> String {
    let selected: Vec<&GuideCategory> =
        guide.categories.iter().filter(|c| tiers.is_none_or(|t| t.contains(&c.tier))).collect();
    if selected.is_empty() {
        return String::new();
    }
    let mut out = String::from("# Translation guide\n\n");
    for c in selected {
        out.push_str(&format!("## {}. {}\n\n", c.id, c.title));
        if !c.summary.is_empty() {
            out.push_str(&c.summary);
            out.push_str("\n\n");
        }
        for e in &c.entries {
            out.push_str("C:\n");
            out.push_str(&fenced("c", &e.source));
            out.push_str("Spec:\n");
            out.push_str(&fenced("python", &e.spec));
            if !e.note.is_empty() {
                out.push_str(&e.note);
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}
