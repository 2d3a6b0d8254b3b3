// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use specforge_core::cfront::compile_impl;
use specforge_core::corpus::{corpus, find};
use specforge_core::kernel::{Kernel, Schema};
use specforge_core::prompt::{assemble_prompt, render_guide, Guide, PromptComponents};
use specforge_core::smt::{Sort, TermPool};
use specforge_core::spec::{encode_spec, load_spec, parse_spec, Inventory};
use specforge_core::symex::execute;
use specforge_core::taskgen::build_benchmark;
use specforge_core::verify::{build_query, differential_check, emit_smtlib};

const SYSCALL: &str = "sys_alloc_iommu_pt";

fn frontend(c: &mut Criterion) {
    let k = Kernel::default();
    let def = find(SYSCALL).unwrap();
    c.bench_function("compile_impl", |b| b.iter(|| compile_impl(black_box(&def.impl_c), &k).unwrap()));
    let ir = compile_impl(&def.impl_c, &k).unwrap();
    c.bench_function("symex_execute", |b| b.iter(|| execute(black_box(&ir), &k.schema)));
    c.bench_function("parse_spec", |b| b.iter(|| parse_spec(black_box(&def.spec_py)).unwrap()));
}

fn encoding(c: &mut Criterion) {
    let k = Kernel::default();
    let inv = Inventory::default();
    let def = find(SYSCALL).unwrap();
    let spec = load_spec(&def.spec_py, &k, &inv).unwrap();
    let behavior = execute(&compile_impl(&def.impl_c, &k).unwrap(), &k.schema);
    c.bench_function("encode_spec", |b| {
        b.iter(|| {
            let mut pool = TermPool::new();
            let pre: Vec<_> = k.schema.cells().iter().map(|p| pool.var(Schema::cell_symbol(p), Sort::Bv(k.schema.width))).collect();
            let args: Vec<_> = behavior.params.iter().map(|p| pool.var(format!("arg_{p}"), Sort::Bv(k.schema.width))).collect();
            encode_spec(&spec, &k.schema, &mut pool, &pre, &args)
        })
    });
    c.bench_function("emit_smtlib", |b| b.iter(|| emit_smtlib(&build_query(black_box(&behavior), &spec, &k.schema))));
    c.bench_function("differential_1000", |b| b.iter(|| differential_check(&behavior, &spec, &k.schema, 1000, 42)));
}

fn prompts(c: &mut Criterion) {
    let tasks = build_benchmark(corpus(), 1).unwrap();
    let components = PromptComponents::bundled();
    c.bench_function("render_guide", |b| b.iter(|| render_guide(black_box(Guide::bundled()), None)));
    c.bench_function("assemble_prompt_all_tasks", |b| {
        b.iter(|| tasks.iter().map(|t| assemble_prompt(t, corpus(), &components, true).text().len()).sum::<usize>())
    });
}

criterion_group!(benches, frontend, encoding, prompts);
criterion_main!(benches);
