// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::taskgen::Variant;

use super::classify::{FailureClass, SemanticSub, SyntaxSub};
use super::report::TaskRecord;

/// An exact fraction; shown as a percentage with two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    /// Percentage in hundredths, rounded half-up. `None` when empty.
    pub fn hundredths(self) -> Option<u64> {
        if self.den == 0 {
            return None;
        }
        let scaled = self.num as u128 * 10_000;
        let den = self.den as u128;
        Some(((2 * scaled + den) / (2 * den)) as u64)
    }
}

pub fn format_hundredths(h: i64) -> String {
    let sign = if h < 0 { "-" } else { "" };
    format!("{sign}{}.{:02}", h.unsigned_abs() / 100, h.unsigned_abs() % 100)
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hundredths() {
            Some(h) => f.write_str(&format_hundredths(h as i64)),
            None => f.write_str("-"),
        }
    }
}

/// Outcome counts over a set of records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    pub total: u64,
    pub pass: u64,
    /// Type/sort + API/reference + format.
    pub syntax: u64,
    pub type_sort: u64,
    pub api_reference: u64,
    pub format: u64,
    pub semantic: u64,
    pub domain_pattern: u64,
    pub translation_logic: u64,
    pub infrastructure: u64,
}

impl Breakdown {
    pub fn add(&mut self, r: &TaskRecord) {
        self.total += 1;
        if r.pass {
            self.pass += 1;
            return;
        }
        match r.failure {
            None => self.infrastructure += 1,
            Some(c) => {
                if c.is_syntax_bucket() {
                    self.syntax += 1;
                } else {
                    self.semantic += 1;
                }
                match c {
                    FailureClass::FormatError => self.format += 1,
                    FailureClass::SyntaxError(SyntaxSub::TypeSort) => self.type_sort += 1,
                    FailureClass::SyntaxError(SyntaxSub::ApiReference) => self.api_reference += 1,
                    FailureClass::SemanticError(SemanticSub::DomainPattern) => self.domain_pattern += 1,
                    FailureClass::SemanticError(SemanticSub::TranslationLogic) => self.translation_logic += 1,
                }
            }
        }
    }

    /// Tasks that count toward Pass@1: infrastructure failures are left out.
    pub fn scored(&self) -> u64 {
        self.total - self.infrastructure
    }

    pub fn pass_at_1(&self) -> Ratio {
        Ratio::new(self.pass, self.scored())
    }

    pub fn of<'a>(records: impl IntoIterator<Item = &'a TaskRecord>) -> Self {
        let mut b = Breakdown::default();
        for r in records {
            b.add(r);
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedBreakdown {
    pub name: String,
    pub stats: Breakdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregates {
    pub overall: Breakdown,
    /// Bug-class columns then Correct, in table order. Total is `overall`.
    pub columns: Vec<NamedBreakdown>,
    /// One row per syscall in first-appearance order.
    pub syscalls: Vec<NamedBreakdown>,
}

pub fn compute_aggregates(records: &[TaskRecord]) -> Aggregates {
    let columns = Variant::all()
        .into_iter()
        .map(|v| NamedBreakdown {
            name: v.column().to_string(),
            stats: Breakdown::of(records.iter().filter(|r| r.variant == v)),
        })
        .collect();
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.syscall.as_str()) {
            names.push(&r.syscall);
        }
    }
    let syscalls = names
        .into_iter()
        .map(|n| NamedBreakdown { name: n.to_string(), stats: Breakdown::of(records.iter().filter(|r| r.syscall == n)) })
        .collect();
    Aggregates { overall: Breakdown::of(records), columns, syscalls }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        assert_eq!(Ratio::new(123, 245).to_string(), "50.20");
        assert_eq!(Ratio::new(237, 245).to_string(), "96.73");
        assert_eq!(Ratio::new(0, 47).to_string(), "0.00");
        assert_eq!(Ratio::new(47, 47).to_string(), "100.00");
        assert_eq!(Ratio::new(1, 8).to_string(), "12.50");
        // 1/1600 = 0.0625% lies exactly on a half-hundredth boundary.
        assert_eq!(Ratio::new(1, 1600).hundredths(), Some(6));
        assert_eq!(Ratio::new(1, 0).to_string(), "-");
    }

    #[test]
    fn rounding_matches_exact_oracle() {
        // Truncated quotient plus one when the remainder is at least half.
        for d in 1..300u64 {
            for n in 0..=d {
                let (q, r) = (n * 10_000 / d, n * 10_000 % d);
                let exact = q + u64::from(2 * r >= d);
                assert_eq!(Ratio::new(n, d).hundredths(), Some(exact), "{n}/{d}");
            }
        }
    }

    #[test]
    fn signed_format() {
        assert_eq!(format_hundredths(-5), "-0.05");
        assert_eq!(format_hundredths(1234), "12.34");
    }
}
