//! Floating-point operation accounting.
//!
//! A complex addition costs 2 flops and a complex multiplication 6. Rounding
//! to the nearest ring element is free. Counters are plain values owned by a
//! single selector invocation.

use std::ops::AddAssign;

pub const FLOPS_PER_COMPLEX_ADD: u64 = 2;
pub const FLOPS_PER_COMPLEX_MUL: u64 = 6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopCounter {
    pub complex_adds: u64,
    pub complex_muls: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.complex_adds += n;
    }

    #[inline]
    pub fn mul(&mut self, n: u64) {
        self.complex_muls += n;
    }

    /// `n` multiply-accumulate steps (one multiplication and one addition each).
    #[inline]
    pub fn mac(&mut self, n: u64) {
        self.complex_adds += n;
        self.complex_muls += n;
    }

    pub fn total_flops(&self) -> u64 {
        FLOPS_PER_COMPLEX_ADD * self.complex_adds + FLOPS_PER_COMPLEX_MUL * self.complex_muls
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.complex_adds += rhs.complex_adds;
        self.complex_muls += rhs.complex_muls;
    }
}
