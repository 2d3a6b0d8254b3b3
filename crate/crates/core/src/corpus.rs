// SPDX-License-Identifier: Apache-2.0

//! The bundled syscall corpus: oracle implementations, oracle specs,
//! descriptions and bug-injection sites.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyscallCategory {
    Process,
    Ipc,
    PageMapping,
    PageReclaim,
    Iommu,
    File,
}

impl SyscallCategory {
    pub fn label(self) -> &'static str {
        match self {
            SyscallCategory::Process => "process",
            SyscallCategory::Ipc => "IPC",
            SyscallCategory::PageMapping => "page-mapping",
            SyscallCategory::PageReclaim => "page-reclaim",
            SyscallCategory::Iommu => "IOMMU",
            SyscallCategory::File => "file",
        }
    }

    /// Categories whose failures need specialised kernel patterns.
    pub fn is_domain_pattern(self) -> bool {
        matches!(self, SyscallCategory::Ipc | SyscallCategory::Iommu | SyscallCategory::PageMapping | SyscallCategory::PageReclaim)
    }
}

impl fmt::Display for SyscallCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BugClass {
    #[serde(rename = "pointer")]
    IncorrectPointerOp,
    #[serde(rename = "privilege")]
    IncorrectPrivilegeCheck,
    #[serde(rename = "leak")]
    MemoryLeak,
    #[serde(rename = "overflow")]
    BufferOverflow,
    #[serde(rename = "bounds")]
    MissingBoundsCheck,
}

impl BugClass {
    /// Report column order.
    pub const ALL: [BugClass; 5] = [
        BugClass::IncorrectPointerOp,
        BugClass::IncorrectPrivilegeCheck,
        BugClass::MemoryLeak,
        BugClass::BufferOverflow,
        BugClass::MissingBoundsCheck,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            BugClass::IncorrectPointerOp => "pointer",
            BugClass::IncorrectPrivilegeCheck => "privilege",
            BugClass::MemoryLeak => "leak",
            BugClass::BufferOverflow => "overflow",
            BugClass::MissingBoundsCheck => "bounds",
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            BugClass::IncorrectPointerOp => "Incorr. Ptr.",
            BugClass::IncorrectPrivilegeCheck => "Incorr. Priv.",
            BugClass::MemoryLeak => "Mem. Leak",
            BugClass::BufferOverflow => "Buf. Ovfl.",
            BugClass::MissingBoundsCheck => "Bounds Chk.",
        }
    }

    pub fn from_slug(s: &str) -> Option<BugClass> {
        BugClass::ALL.into_iter().find(|c| c.slug() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MutationOp {
    /// Replace the single occurrence of `from`.
    Replace { from: String, to: String },
    /// Remove the whole `if (...) return -E...;` containing `target`.
    DeleteCheck { target: String },
    /// Remove the statement line containing `target`.
    DeleteStmt { target: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub class: BugClass,
    #[serde(flatten)]
    pub op: MutationOp,
}

#[derive(Debug, Clone, Deserialize)]
struct SitesFile {
    category: SyscallCategory,
    #[serde(default)]
    site: Vec<Site>,
}

#[derive(Debug, Clone)]
pub struct SyscallDef {
    pub name: String,
    pub category: SyscallCategory,
    pub impl_c: String,
    pub spec_py: String,
    pub description: String,
    pub sites: Vec<Site>,
}

impl SyscallDef {
    /// Builds a definition from the four corpus files' contents.
    pub fn from_parts(name: &str, impl_c: &str, spec_py: &str, sites_toml: &str, description: &str) -> Result<Self, toml::de::Error> {
        let sites: SitesFile = toml::from_str(sites_toml)?;
        Ok(SyscallDef {
            name: name.to_string(),
            category: sites.category,
            impl_c: impl_c.to_string(),
            spec_py: spec_py.to_string(),
            description: description.trim().to_string(),
            sites: sites.site,
        })
    }

    pub fn sites_for(&self, class: BugClass) -> Vec<&Site> {
        self.sites.iter().filter(|s| s.class == class).collect()
    }
}

macro_rules! entry {
    ($name:literal) => {
        (
            $name,
            include_str!(concat!("../corpus/", $name, "/impl.c")),
            include_str!(concat!("../corpus/", $name, "/spec.py")),
            include_str!(concat!("../corpus/", $name, "/sites.toml")),
            include_str!(concat!("../corpus/", $name, "/desc.txt")),
        )
    };
}

const FILES: [(&str, &str, &str, &str, &str); 10] = [
    entry!("sys_set_runnable"),
    entry!("sys_set_ipc_from"),
    entry!("send_proc"),
    entry!("call_proc"),
    entry!("sys_alloc_page"),
    entry!("sys_reclaim_page"),
    entry!("sys_map_page"),
    entry!("sys_alloc_iommu_pt"),
    entry!("sys_lseek"),
    entry!("sys_dup"),
];

/// The bundled corpus, in its fixed order.
pub fn corpus() -> &'static [SyscallDef] {
    static CORPUS: OnceLock<Vec<SyscallDef>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        FILES
            .iter()
            .map(|(n, c, s, t, d)| SyscallDef::from_parts(n, c, s, t, d).unwrap_or_else(|e| panic!("corpus/{n}/sites.toml: {e}")))
            .collect()
    })
}

pub fn find(name: &str) -> Option<&'static SyscallDef> {
    corpus().iter().find(|d| d.name == name)
}
