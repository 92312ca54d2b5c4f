//! Brute-force enumeration inside the norm ball `‖a‖ ≤ Φ = √(1 + SNR‖h‖²)`.

use num_complex::Complex64;

use super::{check_gains, offer_unit_vectors, Evaluator, SelectionResult};
use crate::error::{Error, Result};
use crate::rate::{Channel, RateKernel};
use crate::rings::{lattice_points_in_rect, RingElement, RingId};

/// Default cap on the estimated work `L·Φ^{2L}`.
pub const DEFAULT_EXHAUSTIVE_BUDGET: f64 = 1e9;

/// `L·Φ^{2L}` with `Φ² = 1 + SNR‖h‖²`.
pub fn exhaustive_work_estimate(ch: &Channel) -> f64 {
    let phi2 = 1.0 + ch.snr() * ch.norm_sq();
    ch.users() as f64 * phi2.powi(ch.users() as i32)
}

pub fn exhaustive_one(ch: &Channel, ring: RingId) -> Result<SelectionResult> {
    exhaustive_one_with_budget(ch, ring, DEFAULT_EXHAUSTIVE_BUDGET)
}

/// Enumerates every nonzero `a` in the ball, one vector per unit orbit (the
/// first nonzero component is an orbit representative).
///
/// Since `aᴴMa ≥ ‖a‖² / Φ²`, vectors with `‖a‖² > q_best·Φ²` cannot win; the
/// ball is shrunk accordingly as better vectors are found.
pub fn exhaustive_one_with_budget(ch: &Channel, ring: RingId, budget: f64) -> Result<SelectionResult> {
    check_gains(ch)?;
    let estimated = exhaustive_work_estimate(ch);
    if !(estimated <= budget) {
        return Err(Error::Budget { estimated, budget });
    }
    let phi2 = 1.0 + ch.snr() * ch.norm_sq();
    let mut ev = Evaluator::new(ch, ring);
    offer_unit_vectors(&mut ev, ch.users());

    let r = phi2.sqrt() + 1.0;
    let mut points: Vec<(i64, i64, i64)> = lattice_points_in_rect(ring, -r, r, -r, r)
        .into_iter()
        .map(|(c1, c2)| (RingElement::new(ring, c1, c2).norm_sq(), c1, c2))
        .filter(|&(n, _, _)| (n as f64) <= phi2)
        .collect();
    points.sort_unstable();

    let kernel = RateKernel::new(ch);
    let mut search = Search {
        ring,
        kernel: &kernel,
        points: &points,
        phi2,
        key: vec![(0, 0); ch.users()],
        ev: &mut ev,
    };
    search.descend(0, 0, Complex64::new(0.0, 0.0), false);
    ev.finish(ch)
}

struct Search<'s, 'a> {
    ring: RingId,
    kernel: &'s RateKernel<'a>,
    points: &'s [(i64, i64, i64)],
    phi2: f64,
    key: Vec<(i64, i64)>,
    ev: &'s mut Evaluator<'a>,
}

impl Search<'_, '_> {
    fn bound(&self) -> f64 {
        let q = self.ev.best_quadratic().unwrap_or(1.0).min(1.0);
        q * self.phi2 * (1.0 + 1e-9)
    }

    fn descend(&mut self, l: usize, norm: i64, s: Complex64, nonzero: bool) {
        let n = self.key.len();
        if l == n {
            if nonzero {
                let key = std::mem::take(&mut self.key);
                let q = norm as f64 - self.kernel.c * s.norm_sqr();
                self.ev.score(q, &key);
                self.key = key;
            }
            return;
        }
        let hl = self.kernel.ch.h()[l].conj();
        for i in 0..self.points.len() {
            let (pn, c1, c2) = self.points[i];
            if (norm + pn) as f64 > self.bound() {
                break;
            }
            if pn > 0 && !nonzero && !self.ring.in_orbit_sector(c1, c2) {
                continue;
            }
            self.key[l] = (c1, c2);
            let a = self.ring.embed_f64(c1 as f64, c2 as f64);
            self.descend(l + 1, norm + pn, s + hl * a, nonzero || pn > 0);
        }
        self.key[l] = (0, 0);
    }
}
