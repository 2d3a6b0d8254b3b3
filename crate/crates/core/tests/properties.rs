// SPDX-License-Identifier: Apache-2.0

mod support;

#[test]
fn kernel_read_after_write_and_copy_independence() {
    support::kernel_read_after_write(1000).unwrap();
}

#[test]
fn spec_encoding_agrees_with_evaluator() {
    support::encode_eval_agreement(1000).unwrap();
}

#[test]
fn symex_guards_partition_inputs() {
    support::symex_paths_partition(1000).unwrap();
}

#[test]
fn taskgen_is_deterministic() {
    support::taskgen_deterministic().unwrap();
}

#[test]
fn printer_round_trip() {
    support::printer_round_trip().unwrap();
}
