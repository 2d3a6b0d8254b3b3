// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    ParseError,
    TypeSortError,
    ApiReferenceError,
    DomainError,
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultKind::ParseError => "ParseError",
            FaultKind::TypeSortError => "TypeSortError",
            FaultKind::ApiReferenceError => "ApiReferenceError",
            FaultKind::DomainError => "DomainError",
        })
    }
}

/// A spec that failed before verification could begin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind} at {}:{}: {message}", .line, .col)]
pub struct SpecFault {
    pub kind: FaultKind,
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl SpecFault {
    pub fn new(kind: FaultKind, message: impl Into<String>, span: Span) -> Self {
        SpecFault { kind, message: message.into(), line: span.line, col: span.col }
    }
}
