// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::KernelError;

/// Dimensions of the miniature kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub word_width: u32,
    pub nproc: u64,
    pub npage: u64,
    pub nofile: u64,
    pub page_words: u64,
    pub page_size: u64,
    pub pte_addr_shift: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            word_width: 64,
            nproc: 4,
            npage: 4,
            nofile: 4,
            page_words: 4,
            page_size: 4096,
            pte_addr_shift: 12,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |msg: String| Err(KernelError::Config(msg));
        if self.word_width == 0 || self.word_width > 64 {
            return bad(format!("word_width must be in 1..=64, got {}", self.word_width));
        }
        let limit = mask(self.word_width);
        for (name, v) in [
            ("nproc", self.nproc),
            ("npage", self.npage),
            ("nofile", self.nofile),
            ("page_words", self.page_words),
        ] {
            if v < 2 {
                return bad(format!("{name} must be at least 2, got {v}"));
            }
            if v > limit {
                return bad(format!("{name} = {v} does not fit in {} bits", self.word_width));
            }
            // Maps are unrolled cell by cell; keep them desk-sized.
            if v > 64 {
                return bad(format!("{name} = {v} exceeds the unrolling limit of 64"));
            }
        }
        if !self.page_size.is_power_of_two() || self.page_size > limit {
            return bad(format!("page_size must be a power of two that fits the word, got {}", self.page_size));
        }
        if self.pte_addr_shift >= u64::from(self.word_width) {
            return bad(format!("pte_addr_shift {} out of range", self.pte_addr_shift));
        }
        Ok(())
    }

    /// Parses the flat `key = value` configuration format.
    pub fn parse(text: &str) -> Result<Self, KernelError> {
        let cfg: KernelConfig = toml::from_str(text).map_err(|e| KernelError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, KernelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KernelError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        format!(
            "word_width = {}\nnproc = {}\nnpage = {}\nnofile = {}\npage_words = {}\npage_size = {}\npte_addr_shift = {}\n",
            self.word_width, self.nproc, self.npage, self.nofile, self.page_words, self.page_size, self.pte_addr_shift
        )
    }
}

/// All-ones mask for a `width`-bit word.
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        KernelConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_key_values() {
        let cfg = KernelConfig::parse("word_width = 32\nnproc = 8\n").unwrap();
        assert_eq!(cfg.word_width, 32);
        assert_eq!(cfg.nproc, 8);
        assert_eq!(cfg.npage, 4);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(KernelConfig::parse("nproc = 1").is_err());
        assert!(KernelConfig::parse("page_size = 1000").is_err());
        assert!(KernelConfig::parse("word_width = 2\nnproc = 4").is_err());
        assert!(KernelConfig::parse("bogus = 3").is_err());
    }

    #[test]
    fn text_round_trips() {
        let cfg = KernelConfig { nproc: 6, ..Default::default() };
        assert_eq!(KernelConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
