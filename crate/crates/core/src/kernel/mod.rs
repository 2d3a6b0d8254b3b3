// SPDX-License-Identifier: Apache-2.0

//! The miniature kernel state machine shared by spec evaluation and
//! symbolic execution.

mod config;
mod constants;
mod state;

use thiserror::Error;

pub use config::{mask, KernelConfig};
pub use constants::{Constant, ConstantTable, ERRNOS, PAGE_TYPES, PROC_STATES};
pub use state::{Field, FieldPath, KernelState, MapKind, Schema};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("index out of domain: {0}")]
    Domain(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("value {value:#x} does not fit in {width} bits")]
    Width { value: u64, width: u32 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed state: {0}")]
    Shape(String),
}

/// Convenience bundle of a configuration and everything derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub config: KernelConfig,
    pub schema: Schema,
    pub constants: ConstantTable,
}

impl Kernel {
    pub fn new(config: KernelConfig) -> Result<Self, KernelError> {
        config.validate()?;
        Ok(Kernel { schema: Schema::from(&config), constants: ConstantTable::new(&config), config })
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::new(KernelConfig::default()).expect("default config is valid")
    }
}
