// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::{mask, Field, KernelState, Schema};
use crate::spec::Spec;
use crate::symex::ImplBehavior;

use super::{replay, Witness};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffOutcome {
    VerifiedSoFar,
    Counterexample(Box<Witness>),
}

fn word(rng: &mut impl Rng, width: u32) -> u64 {
    if rng.gen_ratio(3, 4) {
        rng.gen_range(0..=7)
    } else {
        rng.gen::<u64>() & mask(width)
    }
}

/// Random state: mostly small cell values so enum and id comparisons hit,
/// with `current` always a valid pid.
pub fn sample_state(rng: &mut impl Rng, schema: &Schema) -> KernelState {
    let cells = (0..schema.num_cells()).map(|_| word(rng, schema.width)).collect();
    let mut s = KernelState::from_cells(*schema, cells).expect("cell count matches schema");
    s.set(Field::Current, &[], rng.gen_range(1..schema.nproc));
    s
}

fn arg_bound(ty: &str, name: &str, schema: &Schema) -> Option<u64> {
    match ty {
        "pid_t" => Some(schema.nproc),
        "pn_t" => Some(schema.npage),
        "fd_t" => Some(schema.nofile),
        _ if name.contains("fd") => Some(schema.nofile),
        _ if name == "index" || name == "idx" => Some(schema.page_words),
        _ => None,
    }
}

/// Arguments; id-like parameters are in range half of the time.
pub fn sample_args(rng: &mut impl Rng, b: &ImplBehavior, schema: &Schema) -> Vec<u64> {
    b.params
        .iter()
        .zip(&b.param_types)
        .map(|(n, t)| match arg_bound(t, n, schema) {
            Some(bound) if rng.gen_bool(0.5) => rng.gen_range(0..bound),
            _ => word(rng, schema.width),
        })
        .collect()
}

pub fn disagreement(b: &ImplBehavior, spec: &Spec, state: &KernelState, args: &[u64]) -> Option<Witness> {
    replay(b, spec, state, args)
}

/// Seeded random testing of the implementation against the spec.
pub fn differential_check(b: &ImplBehavior, spec: &Spec, schema: &Schema, samples: usize, seed: u64) -> DiffOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let s = sample_state(&mut rng, schema);
        let args = sample_args(&mut rng, b, schema);
        if let Some(w) = replay(b, spec, &s, &args) {
            return DiffOutcome::Counterexample(Box::new(w));
        }
    }
    DiffOutcome::VerifiedSoFar
}
