// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

const DEFAULT_INVENTORY: &str = include_str!("../../data/api_inventory.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiOp {
    And,
    Or,
    Not,
    Implies,
    Ult,
    Ule,
    Ugt,
    Uge,
    Slt,
    Sle,
    Sgt,
    Sge,
    Udiv,
    BitVecVal,
    If,
    IsPidValid,
    IsPnValid,
    IsFdValid,
    IsIdxValid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiFunction {
    pub name: String,
    pub op: ApiOp,
    pub min_args: usize,
    #[serde(default)]
    pub max_args: Option<usize>,
}

impl ApiFunction {
    pub fn accepts(&self, n: usize) -> bool {
        n >= self.min_args && self.max_args.is_none_or(|m| n <= m)
    }
}

#[derive(Deserialize)]
struct InventoryFile {
    function: Vec<ApiFunction>,
}

/// The set of callable names available to specifications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inventory {
    functions: BTreeMap<String, ApiFunction>,
}

impl Inventory {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        let file: InventoryFile = toml::from_str(text)?;
        Ok(Inventory { functions: file.function.into_iter().map(|f| (f.name.clone(), f)).collect() })
    }

    pub fn get(&self, name: &str) -> Option<&ApiFunction> {
        self.functions.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn insert(&mut self, f: ApiFunction) {
        self.functions.insert(f.name.clone(), f);
    }

    pub fn remove(&mut self, name: &str) -> Option<ApiFunction> {
        self.functions.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    /// Bare (non-namespaced) helper names.
    pub fn helpers(&self) -> impl Iterator<Item = &str> {
        self.names().filter(|n| !n.contains('.'))
    }
}

impl Default for Inventory {
    fn default() -> Self {
        Inventory::parse(DEFAULT_INVENTORY).expect("shipped inventory parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_inventory() {
        let inv = Inventory::default();
        assert!(inv.contains("z3.ULT"));
        assert!(inv.contains("util.If"));
        assert!(!inv.contains("z3.SLT"));
        assert_eq!(inv.helpers().count(), 4);
        assert!(inv.get("z3.And").unwrap().accepts(5));
        assert!(!inv.get("z3.Not").unwrap().accepts(2));
    }
}
