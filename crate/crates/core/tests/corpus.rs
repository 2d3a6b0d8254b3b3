// SPDX-License-Identifier: Apache-2.0

use specforge_core::cfront::compile_impl;
use specforge_core::corpus::corpus;
use specforge_core::kernel::Kernel;
use specforge_core::spec::{lint_source, load_spec, Inventory};
use specforge_core::symex::execute;
use specforge_core::taskgen::{build_benchmark, validate_benchmark};
use specforge_core::verify::{Backend, VerifyConfig};

#[test]
fn every_oracle_spec_loads_and_lints_clean() {
    let k = Kernel::default();
    let inv = Inventory::default();
    for def in corpus() {
        load_spec(&def.spec_py, &k, &inv).unwrap_or_else(|f| panic!("{}: {f}", def.name));
        assert_eq!(lint_source(&def.spec_py, &inv), vec![], "{}", def.name);
    }
}

#[test]
fn every_implementation_compiles() {
    let k = Kernel::default();
    for def in corpus() {
        let ir = compile_impl(&def.impl_c, &k).unwrap_or_else(|e| panic!("{}: {e}", def.name));
        let b = execute(&ir, &k.schema);
        assert_eq!(b.paths.iter().filter(|p| p.status == 0).count(), 1);
    }
}

#[test]
fn benchmark_passes_quality_gate_with_sampling() {
    let k = Kernel::default();
    let tasks = build_benchmark(corpus(), 1).unwrap();
    let cfg = VerifyConfig { backend: Backend::Smt, ..VerifyConfig::default() };
    validate_benchmark(&tasks, corpus(), &k, &Inventory::default(), &cfg).unwrap();
}
