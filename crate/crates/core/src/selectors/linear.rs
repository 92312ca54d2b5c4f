//! Uniform sampling of the scaling factor on the grid `Δ(k₁ + k₂i)`, visited
//! in ascending modulus.
//!
//! The effective noise at each sample drives the stopping rule; the vectors
//! `Q(αh)` met along the way are ranked by their MMSE rate.

use num_complex::Complex64;

use super::{check_gains, complex_exhaustive_two, Evaluator, SelectionResult};
use crate::error::{Error, Result};
use crate::rate::{Channel, RateKernel};
use crate::rings::{ComplexScalar, RingId};
use crate::thresholds::{Gamma, ThresholdTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub alpha: ComplexScalar,
    /// `|α|²σ²`
    pub scaled_noise: f64,
    /// Effective noise, `None` when `Q(αh)` is the zero vector.
    pub sigma_eff: Option<f64>,
    /// Best effective noise before this sample.
    pub best_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTrace {
    pub delta: f64,
    pub steps: Vec<TraceStep>,
    /// `|α|²σ²` of the first sample that was not evaluated.
    pub stopped_at: Option<f64>,
    /// Whether the exhaustive selector produced the result.
    pub fallback: bool,
}

/// Whether `k₁ + k₂i` has phase in `[0, 2π/|units|)`.
#[inline]
fn in_sector(ring: RingId, k1: i64, k2: i64) -> bool {
    match ring {
        RingId::GaussianZI => k1 > 0 && k2 >= 0,
        RingId::EisensteinZOmega => k1 > 0 && k2 >= 0 && k2 * k2 < 3 * k1 * k1,
    }
}

/// Grid indices with `0 < k₁² + k₂² ≤ max_norm2` in the phase sector, in
/// visiting order (modulus, then `k₁`, then `k₂`). The order does not depend
/// on the step size.
pub fn sample_order(ring: RingId, max_norm2: i64) -> Vec<(i64, i64)> {
    let m = (max_norm2 as f64).sqrt().ceil() as i64 + 1;
    let mut v: Vec<(i64, i64)> = (0..=m)
        .flat_map(|k1| (0..=m).map(move |k2| (k1, k2)))
        .filter(|&(k1, k2)| in_sector(ring, k1, k2) && k1 * k1 + k2 * k2 <= max_norm2)
        .collect();
    v.sort_by_key(|&(k1, k2)| (k1 * k1 + k2 * k2, k1, k2));
    v
}

/// Grid indices with `m² ≤ k₁² + k₂² < (m+1)²`, in visiting order.
fn shell(ring: RingId, m: i64, out: &mut Vec<(i64, i64)>) {
    out.clear();
    let (lo, hi) = (m * m, (m + 1) * (m + 1));
    for k1 in 1..=m + 1 {
        let rest_lo = lo - k1 * k1;
        let k2_lo = if rest_lo <= 0 { 0 } else { isqrt_ceil(rest_lo) };
        let mut k2 = k2_lo;
        while k1 * k1 + k2 * k2 < hi {
            if in_sector(ring, k1, k2) {
                out.push((k1, k2));
            }
            k2 += 1;
        }
    }
    out.sort_by_key(|&(k1, k2)| (k1 * k1 + k2 * k2, k1, k2));
}

fn isqrt_ceil(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

pub fn linear_search(ch: &Channel, ring: RingId, table: &ThresholdTable) -> Result<SelectionResult> {
    run(ch, ring, table, None)
}

pub fn linear_search_traced(ch: &Channel, ring: RingId, table: &ThresholdTable) -> Result<(SelectionResult, LinearTrace)> {
    let mut trace = LinearTrace { delta: 0.0, steps: Vec::new(), stopped_at: None, fallback: false };
    let r = run(ch, ring, table, Some(&mut trace))?;
    Ok((r, trace))
}

fn run(ch: &Channel, ring: RingId, table: &ThresholdTable, mut trace: Option<&mut LinearTrace>) -> Result<SelectionResult> {
    check_gains(ch)?;
    if table.ring != ring {
        return Err(Error::RingMismatch { table: table.ring.to_string(), requested: ring.to_string() });
    }
    let gamma = match table.lookup(ch.users(), ch.snr_db())? {
        Gamma::Value(g) => g,
        Gamma::Exhaustive => {
            if let Some(t) = trace.as_deref_mut() {
                t.fallback = true;
            }
            return complex_exhaustive_two(ch, ring);
        }
    };
    let delta = gamma * (ring.fundamental_area() / ch.max_gain_sq()).sqrt();
    if let Some(t) = trace.as_deref_mut() {
        t.delta = delta;
    }

    let kernel = RateKernel::new(ch);
    let mut ev = Evaluator::new(ch, ring);
    let sigma2 = ch.sigma2();
    let limit = ch.snr();
    let mut best_noise = f64::INFINITY;
    let mut examined = 0u64;
    let mut buf = Vec::new();
    let mut key = Vec::with_capacity(ch.users());
    let mut m = 0i64;
    'outer: loop {
        if (m as f64 * delta).powi(2) >= limit {
            break;
        }
        shell(ring, m, &mut buf);
        for &(k1, k2) in &buf {
            let alpha = Complex64::new(k1 as f64, k2 as f64) * delta;
            let scaled = alpha.norm_sqr() * sigma2;
            if alpha.norm_sqr() >= limit || scaled >= best_noise {
                if let Some(t) = trace.as_deref_mut() {
                    t.stopped_at = Some(scaled);
                }
                break 'outer;
            }
            let noise = kernel.effective_noise(alpha, ring, &mut key, &mut ev.flops);
            examined += 1;
            let zero = key.iter().all(|&c| c == (0, 0));
            if let Some(t) = trace.as_deref_mut() {
                t.steps.push(TraceStep { alpha, scaled_noise: scaled, sigma_eff: (!zero).then_some(noise), best_before: best_noise });
            }
            if !zero {
                best_noise = best_noise.min(noise);
                ev.offer_key(&key);
            }
        }
        m += 1;
    }

    if ev.best_quadratic().is_none() {
        if let Some(t) = trace.as_deref_mut() {
            t.fallback = true;
        }
        let mut r = complex_exhaustive_two(ch, ring)?;
        r.flops += ev.flops;
        r.candidates_examined += examined;
        return Ok(r);
    }
    let mut r = ev.finish(ch)?;
    r.candidates_examined = examined;
    Ok(r)
}
