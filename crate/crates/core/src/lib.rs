// SPDX-License-Identifier: Apache-2.0

pub mod bv;
pub mod cfront;
pub mod corpus;
pub mod harness;
pub mod kernel;
pub mod prompt;
pub mod smt;
pub mod spec;
pub mod symex;
pub mod taskgen;
pub mod verify;
