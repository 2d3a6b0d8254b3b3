// SPDX-License-Identifier: Apache-2.0

//! Benchmarks live in `benches/`. Run them with `cargo bench -p specforge-bench`.
