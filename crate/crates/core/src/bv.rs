// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bitvector arithmetic with SMT-LIB semantics.

use crate::kernel::mask;

pub fn to_signed(v: u64, width: u32) -> i64 {
    if width >= 64 {
        v as i64
    } else {
        let shift = 64 - width;
        ((v << shift) as i64) >> shift
    }
}

pub fn add(a: u64, b: u64, w: u32) -> u64 {
    a.wrapping_add(b) & mask(w)
}

pub fn sub(a: u64, b: u64, w: u32) -> u64 {
    a.wrapping_sub(b) & mask(w)
}

pub fn mul(a: u64, b: u64, w: u32) -> u64 {
    a.wrapping_mul(b) & mask(w)
}

/// Unsigned division; division by zero yields all ones.
pub fn udiv(a: u64, b: u64, w: u32) -> u64 {
    if b == 0 {
        mask(w)
    } else {
        a / b
    }
}

/// Left shift; shifting by the width or more yields zero.
pub fn shl(a: u64, b: u64, w: u32) -> u64 {
    if b >= u64::from(w) {
        0
    } else {
        (a << b) & mask(w)
    }
}

pub fn neg(a: u64, w: u32) -> u64 {
    a.wrapping_neg() & mask(w)
}

pub fn slt(a: u64, b: u64, w: u32) -> bool {
    to_signed(a, w) < to_signed(b, w)
}

pub fn sle(a: u64, b: u64, w: u32) -> bool {
    to_signed(a, w) <= to_signed(b, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signedness() {
        assert!(slt(u64::MAX, 0, 64));
        assert!(!slt(0, u64::MAX, 64));
        assert!(slt(0xFF, 0, 8));
        assert!(!slt(0x7F, 0, 8));
        assert_eq!(to_signed(0x80, 8), -128);
    }

    #[test]
    fn edge_semantics() {
        assert_eq!(udiv(5, 0, 64), u64::MAX);
        assert_eq!(udiv(5, 0, 8), 0xFF);
        assert_eq!(shl(1, 64, 64), 0);
        assert_eq!(shl(1, 7, 8), 0x80);
        assert_eq!(shl(1, 8, 8), 0);
        assert_eq!(add(0xFF, 1, 8), 0);
        assert_eq!(neg(1, 8), 0xFF);
    }
}
