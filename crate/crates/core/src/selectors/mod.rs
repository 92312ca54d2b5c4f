//! Coefficient selection algorithms.
//!
//! All selectors share one evaluation stage: candidate vectors are produced
//! by full-direction quantization of representative scaling factors,
//! deduplicated by their exact coordinates and scored by `aᴴMa`.

use std::collections::HashSet;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::rate::{mmse_alpha, rate_from_quadratic, Channel, CoeffVector, RateKernel};
use crate::rings::{default_tol, full_coords_into, ComplexScalar, RingId};

mod candidates;
mod clll;
mod exhaustive;
mod linear;
mod ll;

pub use candidates::{build_candidates, build_candidates_in, complex_exhaustive_two, complex_exhaustive_two_in, CandidateSet, SearchRegion};
pub use clll::{clll_select, reduce_basis, ReducedBasis, LLL_DELTA};
pub use exhaustive::{exhaustive_one, exhaustive_one_with_budget, exhaustive_work_estimate, DEFAULT_EXHAUSTIVE_BUDGET};
pub use linear::{linear_search, linear_search_traced, sample_order, LinearTrace, TraceStep};
pub use ll::ll_select;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub a_opt: CoeffVector,
    pub rate: f64,
    /// MMSE scaling factor of `a_opt`.
    pub alpha: ComplexScalar,
    /// Distinct coefficient vectors whose rate was evaluated.
    pub candidates_examined: u64,
    pub flops: FlopCounter,
}

/// Relative width within which two quadratic values count as a tie.
const TIE_REL: f64 = 1e-12;

/// Exact-key deduplicating argmin of `aᴴMa` with the lexicographic tie rule.
pub(crate) struct Evaluator<'a> {
    kernel: RateKernel<'a>,
    ring: RingId,
    seen: FxHashSet<Vec<(i64, i64)>>,
    best: Option<(f64, Vec<(i64, i64)>)>,
    evaluated: u64,
    pub flops: FlopCounter,
    per_comp: Vec<Vec<(i64, i64)>>,
    scratch: Vec<(i64, i64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ch: &'a Channel, ring: RingId) -> Self {
        Self {
            kernel: RateKernel::new(ch),
            ring,
            seen: FxHashSet::default(),
            best: None,
            evaluated: 0,
            flops: FlopCounter::new(),
            per_comp: vec![Vec::with_capacity(4); ch.users()],
            scratch: Vec::with_capacity(ch.users()),
        }
    }

    pub fn into_keys(self) -> HashSet<Vec<(i64, i64)>> {
        self.seen.into_iter().collect()
    }

    /// Quantizes `α·h` with the full-direction quantizer and evaluates every
    /// new nonzero vector of the Cartesian product.
    pub fn offer_alpha(&mut self, alpha: ComplexScalar) {
        self.collect(alpha);
        self.for_each_product(|ev, key| ev.offer_key(key));
    }

    /// Like `offer_alpha` but only records the keys.
    pub fn record_alpha(&mut self, alpha: ComplexScalar) {
        self.collect(alpha);
        self.for_each_product(|ev, key| ev.record_key(key));
    }

    pub fn record_key(&mut self, key: &[(i64, i64)]) {
        if !self.seen.contains(key) {
            self.seen.insert(key.to_vec());
        }
    }

    fn collect(&mut self, alpha: ComplexScalar) {
        let h = self.kernel.ch.h();
        self.flops.mul(h.len() as u64);
        for (l, hl) in h.iter().enumerate() {
            let z = alpha * hl;
            full_coords_into(self.ring, z, default_tol(z), &mut self.per_comp[l]);
        }
    }

    fn for_each_product(&mut self, mut f: impl FnMut(&mut Self, &[(i64, i64)])) {
        let n = self.per_comp.len();
        let mut idx = vec![0usize; n];
        loop {
            self.scratch.clear();
            for l in 0..n {
                self.scratch.push(self.per_comp[l][idx[l]]);
            }
            if self.scratch.iter().any(|&c| c != (0, 0)) {
                let key = std::mem::take(&mut self.scratch);
                f(self, &key);
                self.scratch = key;
            }
            let mut l = 0;
            loop {
                if l == n {
                    return;
                }
                idx[l] += 1;
                if idx[l] < self.per_comp[l].len() {
                    break;
                }
                idx[l] = 0;
                l += 1;
            }
        }
    }

    /// Evaluates `key` unless it was seen before; zero vectors are ignored.
    pub fn offer_key(&mut self, key: &[(i64, i64)]) {
        if key.iter().all(|&c| c == (0, 0)) || self.seen.contains(key) {
            return;
        }
        self.seen.insert(key.to_vec());
        self.evaluated += 1;
        let q = self.kernel.quadratic(key, self.ring, &mut self.flops);
        self.consider(q, key);
    }

    /// Records an externally computed `aᴴMa`, charged like a full evaluation.
    pub fn score(&mut self, q: f64, key: &[(i64, i64)]) {
        let n = key.len() as u64;
        self.evaluated += 1;
        self.flops.mac(2 * n);
        self.flops.mul(2);
        self.flops.add(1);
        self.consider(q, key);
    }

    fn consider(&mut self, q: f64, key: &[(i64, i64)]) {
        match &mut self.best {
            None => self.best = Some((q, key.to_vec())),
            Some((bq, bkey)) => {
                let tol = TIE_REL * bq.abs().max(q.abs());
                if q < *bq - tol || (q <= *bq + tol && key < bkey.as_slice()) {
                    *bq = q;
                    bkey.clear();
                    bkey.extend_from_slice(key);
                }
            }
        }
    }

    pub fn best_quadratic(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn finish(self, ch: &Channel) -> Result<SelectionResult> {
        let (q, key) = self
            .best
            .ok_or_else(|| Error::Internal("no nonzero candidate was evaluated".into()))?;
        let a_opt = CoeffVector::from_coords(self.ring, &key);
        let alpha = mmse_alpha(ch, &a_opt)?;
        Ok(SelectionResult {
            a_opt,
            rate: rate_from_quadratic(q),
            alpha,
            candidates_examined: self.evaluated,
            flops: self.flops,
        })
    }
}

pub(crate) fn check_gains(ch: &Channel) -> Result<()> {
    if ch.h().iter().any(|h| !(h.norm() > 0.0)) {
        return Err(Error::InvalidArgument("every channel gain must be nonzero".into()));
    }
    Ok(())
}

/// The unit vectors `e_l`, each of which is a valid nonzero candidate.
pub(crate) fn offer_unit_vectors(ev: &mut Evaluator<'_>, users: usize) {
    let mut key = vec![(0, 0); users];
    for l in 0..users {
        key[l] = (1, 0);
        ev.offer_key(&key);
        key[l] = (0, 0);
    }
}
