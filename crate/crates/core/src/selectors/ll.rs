//! Vertices and edge midpoints of the individual per-user cells, each user
//! bounded by `|a_l| ≤ Φ = √(1 + SNR‖h‖²)`. Every representative yields the
//! single vector `Q(αh)`; ties on cell boundaries follow the quantizer's rule.

use super::candidates::{cell_vertices_in, edge_midpoints_in};
use super::{check_gains, Evaluator, SelectionResult};
use crate::error::Result;
use crate::flops::FlopCounter;
use crate::geometry::AlphaSector;
use crate::rate::Channel;
use crate::rings::RingId;

pub fn ll_select(ch: &Channel, ring: RingId) -> Result<SelectionResult> {
    check_gains(ch)?;
    let phi = (1.0 + ch.snr() * ch.norm_sq()).sqrt();
    let mut flops = FlopCounter::new();
    let mut reps = Vec::new();
    for &h in ch.h() {
        let radius = (phi + ring.covering_radius()) / h.norm();
        let region = AlphaSector::new(radius, ring.phase_sector())?.region();
        cell_vertices_in(ring, h, &region, &mut flops, &mut reps);
        edge_midpoints_in(ring, h, &region, &mut flops, &mut reps);
    }
    let mut ev = Evaluator::new(ch, ring);
    ev.flops = flops;
    let mut key = Vec::with_capacity(ch.users());
    for alpha in reps {
        key.clear();
        key.extend(ch.h().iter().map(|h| ring.nearest_coords(alpha * h)));
        ev.flops.mul(ch.users() as u64);
        ev.offer_key(&key);
    }
    ev.finish(ch)
}
