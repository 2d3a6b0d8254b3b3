// SPDX-License-Identifier: Apache-2.0

//! Property checks shared by the property and acceptance targets. Each
//! returns the first failure as text.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specforge_core::cfront::compile_impl;
use specforge_core::corpus::corpus;
use specforge_core::kernel::{Kernel, KernelState, Schema};
use specforge_core::smt::{Sort, TermPool};
use specforge_core::spec::{encode_spec, eval_spec, load_spec, parse_spec, print_spec, Inventory};
use specforge_core::symex::{execute, true_paths, ImplBehavior};
use specforge_core::taskgen::{build_benchmark, tasks_to_jsonl, write_taskset};
use specforge_core::verify::{sample_args, sample_state};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn check(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>, what: &str) -> Result<(), String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn behavior(text: &str, k: &Kernel) -> ImplBehavior {
    execute(&compile_impl(text, k).expect("corpus implementation compiles"), &k.schema)
}

/// Writes are visible to the next read of the same cell, leave every other
/// cell alone, and never touch the state they were derived from.
pub fn kernel_read_after_write(cases: u32) -> Result<(), String> {
    let k = Kernel::default();
    let cells = k.schema.cells();
    let mask = k.schema.mask();
    let strat = (any::<u64>(), 0..cells.len(), any::<u64>(), 0..cells.len());
    check(
        runner(cases).run(&strat, |(seed, at, value, other)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = sample_state(&mut rng, &k.schema);
            let before = s.clone();
            let p = &cells[at];
            let v = value & mask;
            let t = s.write(p.field, &p.indices, v).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(t.read(p.field, &p.indices).unwrap(), v);
            if other != at {
                let q = &cells[other];
                prop_assert_eq!(t.read(q.field, &q.indices).unwrap(), s.read(q.field, &q.indices).unwrap());
            }
            prop_assert!(s == before, "source state changed");
            let mut c = s.clone();
            c.set(p.field, &p.indices, v ^ 1);
            prop_assert!(s == before, "copy shares storage with its source");
            Ok(())
        }),
        "kernel read-after-write",
    )
}

/// The symbolic encoding of each corpus spec, evaluated at a concrete point,
/// agrees with the direct evaluator on guard, fault and post-state.
pub fn encode_eval_agreement(cases: u32) -> Result<(), String> {
    let k = Kernel::default();
    let inv = Inventory::default();
    for d in corpus() {
        let spec = load_spec(&d.spec_py, &k, &inv).map_err(|f| format!("{}: {f}", d.name))?;
        let b = behavior(&d.impl_c, &k);
        let mut pool = TermPool::new();
        let pre: Vec<_> = k.schema.cells().iter().map(|c| pool.var(Schema::cell_symbol(c), Sort::Bv(k.schema.width))).collect();
        let args: Vec<_> = b.params.iter().map(|p| pool.var(format!("arg_{p}"), Sort::Bv(k.schema.width))).collect();
        let enc = encode_spec(&spec, &k.schema, &mut pool, &pre, &args);
        let mut roots = vec![enc.guard, enc.fault];
        roots.extend(&enc.post);
        check(
            runner(cases).run(&any::<u64>(), |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = sample_state(&mut rng, &k.schema);
                let a = sample_args(&mut rng, &b, &k.schema);
                let env: Vec<u64> = s.cells().iter().copied().chain(a.iter().copied()).collect();
                let vals = pool.eval_many(&roots, &env);
                match eval_spec(&spec, &s, &a) {
                    Err(_) => prop_assert_eq!(vals[1], 1, "evaluator faulted but encoding did not"),
                    Ok((phi, post)) => {
                        prop_assert_eq!(vals[1], 0, "encoding faulted but evaluator did not");
                        prop_assert_eq!(vals[0] == 1, phi);
                        prop_assert_eq!(&vals[2..], post.cells());
                    }
                }
                Ok(())
            }),
            &d.name,
        )?;
    }
    Ok(())
}

/// Exactly one path guard holds at every point, for every task variant.
pub fn symex_paths_partition(cases: u32) -> Result<(), String> {
    let k = Kernel::default();
    for t in build_benchmark(corpus(), 1).map_err(|e| e.to_string())? {
        let b = behavior(&t.impl_c, &k);
        check(
            runner(cases).run(&any::<u64>(), |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut s = sample_state(&mut rng, &k.schema);
                if rng.gen_bool(0.1) {
                    s = KernelState::canonical(&k.config);
                }
                let a = sample_args(&mut rng, &b, &k.schema);
                let hits = true_paths(&b, &s, &a);
                prop_assert_eq!(hits.len(), 1, "guards holding: {:?}", hits);
                Ok(())
            }),
            &t.id,
        )?;
    }
    Ok(())
}

/// Generating twice with one seed gives byte-identical task sets.
pub fn taskgen_deterministic() -> Result<(), String> {
    for seed in [0, 1, 7, 42] {
        let a = build_benchmark(corpus(), seed).map_err(|e| e.to_string())?;
        let b = build_benchmark(corpus(), seed).map_err(|e| e.to_string())?;
        if tasks_to_jsonl(&a) != tasks_to_jsonl(&b) || a != b {
            return Err(format!("seed {seed}: task sets differ"));
        }
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_taskset(da.path(), &a).map_err(|e| e.to_string())?;
        write_taskset(db.path(), &b).map_err(|e| e.to_string())?;
        for t in &a {
            let p = t.impl_path();
            if std::fs::read(da.path().join(&p)).unwrap() != std::fs::read(db.path().join(&p)).unwrap() {
                return Err(format!("seed {seed}: {p} differs"));
            }
        }
        if std::fs::read(da.path().join("tasks.jsonl")).unwrap() != std::fs::read(db.path().join("tasks.jsonl")).unwrap() {
            return Err(format!("seed {seed}: tasks.jsonl differs"));
        }
    }
    Ok(())
}

/// Printing a parsed spec and parsing it again is a fixed point.
pub fn printer_round_trip() -> Result<(), String> {
    for d in corpus() {
        let once = print_spec(&parse_spec(&d.spec_py).map_err(|f| f.to_string())?);
        let twice = print_spec(&parse_spec(&once).map_err(|f| format!("{}: reprint does not parse: {f}", d.name))?);
        if once != twice {
            return Err(format!("{}: printer is not stable", d.name));
        }
    }
    Ok(())
}
