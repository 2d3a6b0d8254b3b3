// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::symex::ImplBehavior;

use super::{VerifyConfig, VerifyOutcome};

/// Memoizes outcomes by (behavior, spec text, backend settings).
#[derive(Debug, Default)]
pub struct VerdictCache {
    entries: Mutex<HashMap<String, VerifyOutcome>>,
}

impl VerdictCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(b: &ImplBehavior, spec_text: &str, cfg: &VerifyConfig) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(b).expect("behavior serializes"));
        h.update([0]);
        h.update(spec_text.as_bytes());
        h.update([0]);
        h.update(format!("{:?}/{}/{}", cfg.backend, cfg.samples, cfg.seed).as_bytes());
        hex::encode(h.finalize())
    }

    pub fn get(&self, key: &str) -> Option<VerifyOutcome> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn insert(&self, key: String, outcome: VerifyOutcome) {
        self.entries.lock().unwrap().insert(key, outcome);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
