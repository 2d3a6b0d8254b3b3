// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::corpus::SyscallCategory;
use crate::spec::{FaultKind, SpecFault};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntaxSub {
    TypeSort,
    ApiReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemanticSub {
    DomainPattern,
    TranslationLogic,
}

/// Why a task failed. Format failures count toward the syntax bucket in
/// roll-ups but are kept distinct here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "top", content = "sub")]
pub enum FailureClass {
    FormatError,
    SyntaxError(SyntaxSub),
    SemanticError(SemanticSub),
}

impl FailureClass {
    pub fn is_syntax_bucket(self) -> bool {
        !matches!(self, FailureClass::SemanticError(_))
    }

    pub fn label(self) -> &'static str {
        match self {
            FailureClass::FormatError => "FormatError",
            FailureClass::SyntaxError(SyntaxSub::TypeSort) => "SyntaxError/TypeSort",
            FailureClass::SyntaxError(SyntaxSub::ApiReference) => "SyntaxError/ApiReference",
            FailureClass::SemanticError(SemanticSub::DomainPattern) => "SemanticError/DomainPattern",
            FailureClass::SemanticError(SemanticSub::TranslationLogic) => "SemanticError/TranslationLogic",
        }
    }
}

/// Where a failed task stopped.
#[derive(Debug, Clone, Copy)]
pub enum FailedStage<'a> {
    /// No fenced python block in the response.
    Extraction,
    /// The spec did not parse or typecheck.
    Fault(&'a SpecFault),
    /// The spec ran but its verdict pattern differs from the oracle's.
    Verdicts,
}

pub fn classify_failure(stage: FailedStage, category: SyscallCategory) -> FailureClass {
    match stage {
        FailedStage::Extraction => FailureClass::FormatError,
        FailedStage::Fault(f) => FailureClass::SyntaxError(match f.kind {
            FaultKind::ApiReferenceError => SyntaxSub::ApiReference,
            FaultKind::ParseError | FaultKind::TypeSortError | FaultKind::DomainError => SyntaxSub::TypeSort,
        }),
        FailedStage::Verdicts if category.is_domain_pattern() => FailureClass::SemanticError(SemanticSub::DomainPattern),
        FailedStage::Verdicts => FailureClass::SemanticError(SemanticSub::TranslationLogic),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fault(kind: FaultKind) -> SpecFault {
        SpecFault { kind, message: String::new(), line: 1, col: 1 }
    }

    #[test]
    fn totality() {
        use FaultKind::*;
        assert_eq!(classify_failure(FailedStage::Extraction, SyscallCategory::Ipc), FailureClass::FormatError);
        for (k, sub) in
            [(ParseError, SyntaxSub::TypeSort), (TypeSortError, SyntaxSub::TypeSort), (DomainError, SyntaxSub::TypeSort), (ApiReferenceError, SyntaxSub::ApiReference)]
        {
            assert_eq!(classify_failure(FailedStage::Fault(&fault(k)), SyscallCategory::File), FailureClass::SyntaxError(sub));
        }
        for (c, sub) in [
            (SyscallCategory::Ipc, SemanticSub::DomainPattern),
            (SyscallCategory::Iommu, SemanticSub::DomainPattern),
            (SyscallCategory::PageMapping, SemanticSub::DomainPattern),
            (SyscallCategory::PageReclaim, SemanticSub::DomainPattern),
            (SyscallCategory::Process, SemanticSub::TranslationLogic),
            (SyscallCategory::File, SemanticSub::TranslationLogic),
        ] {
            assert_eq!(classify_failure(FailedStage::Verdicts, c), FailureClass::SemanticError(sub));
        }
    }

    #[test]
    fn serde_shape() {
        let j = serde_json::to_string(&FailureClass::SyntaxError(SyntaxSub::ApiReference)).unwrap();
        assert_eq!(j, r#"{"top":"SyntaxError","sub":"ApiReference"}"#);
        assert_eq!(serde_json::to_string(&FailureClass::FormatError).unwrap(), r#"{"top":"FormatError"}"#);
        assert!(FailureClass::FormatError.is_syntax_bucket());
    }
}
