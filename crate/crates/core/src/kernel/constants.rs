// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{KernelConfig, KernelError};

/// How a constant behaves in the spec language.
///
/// Scalar dimensions are plain integers that coerce to any word width,
/// enum members are full-width words, and `*_t` names denote sorts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Constant {
    Int(u64),
    Word(u64),
    Sort(u32),
}

impl Constant {
    pub fn value(self) -> u64 {
        match self {
            Constant::Int(v) | Constant::Word(v) => v,
            Constant::Sort(w) => u64::from(w),
        }
    }
}

pub const PROC_STATES: &[(&str, u64)] = &[
    ("PROC_UNUSED", 0),
    ("PROC_EMBRYO", 1),
    ("PROC_RUNNABLE", 2),
    ("PROC_RUNNING", 3),
    ("PROC_SLEEPING", 4),
    ("PROC_ZOMBIE", 5),
];

pub const PAGE_TYPES: &[(&str, u64)] = &[
    ("PAGE_TYPE_FREE", 0),
    ("PAGE_TYPE_FRAME", 1),
    ("PAGE_TYPE_X86_PT", 2),
    ("PAGE_TYPE_IOMMU_PT", 3),
];

pub const ERRNOS: &[(&str, u64)] = &[
    ("EPERM", 1),
    ("ENOENT", 2),
    ("ESRCH", 3),
    ("EBADF", 9),
    ("EAGAIN", 11),
    ("ENOMEM", 12),
    ("EACCES", 13),
    ("EBUSY", 16),
    ("EEXIST", 17),
    ("EINVAL", 22),
];

const SORTS: &[&str] = &["pid_t", "pn_t", "fd_t", "size_t", "off_t", "uint64_t", "uintptr_t"];

/// Named constants under the `dt` namespace, keyed by dotted name
/// (`NPROC`, `proc_state.PROC_RUNNING`, `errno.ESRCH`, `pid_t`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantTable {
    entries: BTreeMap<String, Constant>,
}

impl ConstantTable {
    pub fn new(config: &KernelConfig) -> Self {
        let mut entries = BTreeMap::new();
        for (name, v) in [
            ("NPROC", config.nproc),
            ("NPAGE", config.npage),
            ("NOFILE", config.nofile),
            ("PAGE_WORDS", config.page_words),
            ("PAGE_SIZE", config.page_size),
            ("PTE_ADDR_SHIFT", config.pte_addr_shift),
            ("DMAR_PTE_ADDR_SHIFT", config.pte_addr_shift),
        ] {
            entries.insert(name.to_string(), Constant::Int(v));
        }
        for (name, v) in PROC_STATES {
            entries.insert(format!("proc_state.{name}"), Constant::Word(*v));
        }
        for (name, v) in PAGE_TYPES {
            entries.insert(format!("page_type.{name}"), Constant::Word(*v));
        }
        for (name, v) in ERRNOS {
            entries.insert(format!("errno.{name}"), Constant::Int(*v));
        }
        for name in SORTS {
            entries.insert(name.to_string(), Constant::Sort(config.word_width));
        }
        ConstantTable { entries }
    }

    pub fn get(&self, name: &str) -> Option<Constant> {
        self.entries.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<u64, KernelError> {
        self.get(name)
            .map(Constant::value)
            .ok_or_else(|| KernelError::UnknownConstant(name.to_string()))
    }

    /// Resolves a bare C identifier such as `NPROC`, `PROC_EMBRYO` or `ESRCH`.
    pub fn lookup_unqualified(&self, name: &str) -> Option<(String, Constant)> {
        if let Some(c) = self.get(name) {
            return Some((name.to_string(), c));
        }
        self.entries
            .iter()
            .find(|(k, _)| k.rsplit_once('.').is_some_and(|(_, last)| last == name))
            .map(|(k, c)| (k.clone(), *c))
    }

    /// Dotted names of every member of an enum family, e.g. `proc_state`.
    pub fn family(&self, family: &str) -> Vec<(&str, u64)> {
        let prefix = format!("{family}.");
        self.entries
            .iter()
            .filter_map(|(k, c)| k.strip_prefix(&prefix).map(|m| (m, c.value())))
            .collect()
    }

    pub fn errno(&self, name: &str) -> Option<u64> {
        self.get(&format!("errno.{name}")).map(Constant::value)
    }

    pub fn errno_name(&self, code: u64) -> Option<&str> {
        self.entries.iter().find_map(|(k, c)| match (k.strip_prefix("errno."), c) {
            (Some(n), Constant::Int(v)) if *v == code => Some(n),
            _ => None,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Constant)> {
        self.entries.iter().map(|(k, c)| (k.as_str(), *c))
    }

    pub fn insert(&mut self, name: impl Into<String>, c: Constant) {
        self.entries.insert(name.into(), c);
    }

    pub fn remove(&mut self, name: &str) -> Option<Constant> {
        self.entries.remove(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ConstantTable {
        ConstantTable::new(&KernelConfig::default())
    }

    #[test]
    fn reference_values() {
        let t = table();
        assert_eq!(t.lookup("proc_state.PROC_RUNNING").unwrap(), 3);
        assert_eq!(t.lookup("page_type.PAGE_TYPE_FREE").unwrap(), 0);
    }

    #[test]
    fn unknown_constant() {
        assert!(matches!(
            table().lookup("proc_state.PROC_BOGUS"),
            Err(KernelError::UnknownConstant(n)) if n == "proc_state.PROC_BOGUS"
        ));
    }

    #[test]
    fn enum_members_are_distinct() {
        let t = table();
        for fam in ["proc_state", "page_type", "errno"] {
            let mut vals: Vec<u64> = t.family(fam).into_iter().map(|(_, v)| v).collect();
            let n = vals.len();
            vals.sort_unstable();
            vals.dedup();
            assert_eq!(vals.len(), n, "family {fam} has duplicate values");
        }
    }

    #[test]
    fn errno_codes_are_nonzero() {
        assert!(table().family("errno").iter().all(|(_, v)| *v != 0));
    }

    #[test]
    fn unqualified_lookup() {
        let t = table();
        assert_eq!(t.lookup_unqualified("PROC_EMBRYO").unwrap().1, Constant::Word(1));
        assert_eq!(t.lookup_unqualified("NPROC").unwrap().1, Constant::Int(4));
        assert_eq!(t.lookup_unqualified("ESRCH").unwrap().0, "errno.ESRCH");
        assert!(t.lookup_unqualified("NOPE").is_none());
    }
}
