//! Candidate representatives of the scaling factor and the optimal
//! exhaustive selector built on them.

use std::collections::HashSet;

use num_complex::Complex64;

use super::{check_gains, offer_unit_vectors, Evaluator, SelectionResult};
use crate::error::Result;
use crate::flops::FlopCounter;
use crate::geometry::{lattice_points_near, AlphaSector, ConvexCell};
use crate::rate::Channel;
use crate::rings::{default_tol, full_coords_into, ComplexScalar, RingId};

/// Where representatives are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchRegion {
    /// One unit-orbit sector of the disc `|α| < √SNR`, as its bounding polygon.
    Sector,
    /// The whole disc, as the box `[−√SNR, √SNR]²`.
    FullDisc,
}

impl SearchRegion {
    pub fn polygon(self, ch: &Channel, ring: RingId) -> ConvexCell {
        let r = ch.alpha_radius();
        match self {
            SearchRegion::Sector => AlphaSector::for_channel(ch, ring).region(),
            SearchRegion::FullDisc => ConvexCell::axis_box(-r, r, -r, r),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    /// Vertices of the individual per-user cells.
    pub alphas_si: Vec<ComplexScalar>,
    /// Crossings of cell edges of two distinct users.
    pub alphas_sii: Vec<ComplexScalar>,
    /// Where edge lines leave the search polygon, plus the polygon's corners.
    pub alphas_boundary: Vec<ComplexScalar>,
    /// Every distinct nonzero candidate vector, by exact coordinates.
    pub dedup_keys: HashSet<Vec<(i64, i64)>>,
}

/// Deep holes of the lattice as exact `(numerators, denominator)`: every cell
/// vertex is `a + n/den` for exactly one lattice point `a` and one entry here.
fn vertex_cosets(ring: RingId) -> (i64, &'static [(i64, i64)]) {
    match ring {
        RingId::GaussianZI => (2, &[(1, 1)]),
        RingId::EisensteinZOmega => (3, &[(2, 1), (1, 2)]),
    }
}

/// Edge midpoints `a + u/2`, one per edge.
fn midpoint_cosets(ring: RingId) -> &'static [(i64, i64)] {
    match ring {
        RingId::GaussianZI => &[(1, 0), (0, 1)],
        RingId::EisensteinZOmega => &[(1, 0), (1, 1), (0, 1)],
    }
}

/// Unit coordinates of the lattice step across each edge family, in the
/// order of `RingId::edge_families`.
fn family_steps(ring: RingId) -> &'static [(i64, i64)] {
    match ring {
        RingId::GaussianZI => &[(1, 0), (0, 1)],
        RingId::EisensteinZOmega => &[(1, 0), (1, 1), (0, 1)],
    }
}

fn slack(region: &ConvexCell) -> f64 {
    let (x0, x1, y0, y1) = region.bbox();
    1e-9 * [x0.abs(), x1.abs(), y0.abs(), y1.abs(), 1.0].into_iter().fold(0.0, f64::max)
}

/// Points `(a + n/den) / h_l` inside `region` for the given cosets.
pub(crate) fn coset_points(
    ring: RingId,
    h_l: ComplexScalar,
    region: &ConvexCell,
    den: i64,
    cosets: &[(i64, i64)],
    flops: &mut FlopCounter,
    out: &mut Vec<ComplexScalar>,
) {
    let tol = slack(region);
    let inv = h_l.inv();
    let d = den as f64;
    for (c1, c2) in lattice_points_near(ring, h_l, region) {
        for &(n1, n2) in cosets {
            let z = ring.embed_f64((den * c1 + n1) as f64 / d, (den * c2 + n2) as f64 / d);
            flops.add(1);
            flops.mul(1);
            let alpha = z * inv;
            if region.contains(alpha, tol) {
                out.push(alpha);
            }
        }
    }
}

pub(crate) fn cell_vertices_in(
    ring: RingId,
    h_l: ComplexScalar,
    region: &ConvexCell,
    flops: &mut FlopCounter,
    out: &mut Vec<ComplexScalar>,
) {
    let (den, cosets) = vertex_cosets(ring);
    coset_points(ring, h_l, region, den, cosets, flops, out);
}

pub(crate) fn edge_midpoints_in(
    ring: RingId,
    h_l: ComplexScalar,
    region: &ConvexCell,
    flops: &mut FlopCounter,
    out: &mut Vec<ComplexScalar>,
) {
    coset_points(ring, h_l, region, 2, midpoint_cosets(ring), flops, out);
}

/// One edge line of one user, clipped to the search polygon.
struct Chord {
    offset: f64,
    ends: (ComplexScalar, ComplexScalar),
}

/// A family of parallel edge lines `n · α = offset + spacing · k` of one user.
struct LineFamily {
    user: usize,
    normal: ComplexScalar,
    offset: f64,
    spacing: f64,
    step: (i64, i64),
    chords: Vec<Chord>,
}

#[inline]
fn dot(a: ComplexScalar, b: ComplexScalar) -> f64 {
    a.re * b.re + a.im * b.im
}

fn value_range(region: &ConvexCell, n: ComplexScalar) -> (f64, f64) {
    region
        .vertices
        .iter()
        .map(|&v| dot(n, v))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Integer `k` with `offset + spacing·k` in `[lo, hi]`, widened by a hair.
fn k_range(lo: f64, hi: f64, offset: f64, spacing: f64) -> (i64, i64) {
    let eps = 1e-9 * (1.0 + lo.abs().max(hi.abs())) / spacing;
    (((lo - offset) / spacing - eps).ceil() as i64, ((hi - offset) / spacing + eps).floor() as i64)
}

/// Segment of the line `n · p = c` inside `region` (closed, with slack).
fn chord_of(region: &ConvexCell, n: ComplexScalar, c: f64, tol: f64) -> Option<(ComplexScalar, ComplexScalar)> {
    let nn = n.norm_sqr();
    let p0 = n * (c / nn);
    let d = Complex64::new(-n.im, n.re) / nn.sqrt();
    let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for hp in &region.halfplanes {
        let md = dot(hp.normal, d);
        let rhs = hp.offset + tol - dot(hp.normal, p0);
        if md.abs() < 1e-15 {
            if rhs < 0.0 {
                return None;
            }
        } else if md > 0.0 {
            t_hi = t_hi.min(rhs / md);
        } else {
            t_lo = t_lo.max(rhs / md);
        }
    }
    if t_lo > t_hi {
        return None;
    }
    Some((p0 + d * t_lo, p0 + d * t_hi))
}

fn line_families(ch: &Channel, ring: RingId, region: &ConvexCell, flops: &mut FlopCounter) -> Vec<LineFamily> {
    let tol = slack(region);
    let mut out = Vec::new();
    for (user, &h) in ch.h().iter().enumerate() {
        for (fam, &step) in ring.edge_families().iter().zip(family_steps(ring)) {
            // Re(α·h·conj(u)) = x·w.re − y·w.im
            let w = h * fam.dir.conj();
            flops.mul(1);
            let normal = Complex64::new(w.re, -w.im);
            let (lo, hi) = value_range(region, normal);
            let (k0, k1) = k_range(lo, hi, fam.offset, fam.spacing);
            let mut chords = Vec::with_capacity((k1 - k0 + 1).max(0) as usize);
            for k in k0..=k1 {
                let offset = fam.offset + fam.spacing * k as f64;
                if let Some(ends) = chord_of(region, normal, offset, tol) {
                    chords.push(Chord { offset, ends });
                }
            }
            out.push(LineFamily { user, normal, offset: fam.offset, spacing: fam.spacing, step, chords });
        }
    }
    out
}

/// Whether `z` lies on the edge between lattice points `p` and `p + step`.
fn on_edge(ring: RingId, z: ComplexScalar, step: (i64, i64), buf: &mut Vec<(i64, i64)>) -> bool {
    full_coords_into(ring, z, default_tol(z), buf);
    buf.iter().any(|&(a, b)| {
        let q = (a + step.0, b + step.1);
        buf.contains(&q)
    })
}

/// Phase 1: representatives of the scaling factor inside `region`.
fn representatives(ch: &Channel, ring: RingId, region: &ConvexCell, flops: &mut FlopCounter) -> CandidateSet {
    let mut set = CandidateSet::default();
    for &h in ch.h() {
        cell_vertices_in(ring, h, region, flops, &mut set.alphas_si);
    }

    let families = line_families(ch, ring, region, flops);
    let filter_edges = !ring.edges_fill_lines();
    let mut buf = Vec::with_capacity(4);
    for (i, fa) in families.iter().enumerate() {
        for fb in &families[i + 1..] {
            if fb.user == fa.user {
                continue;
            }
            let (ha, hb) = (ch.h()[fa.user], ch.h()[fb.user]);
            let det = fa.normal.re * fb.normal.im - fa.normal.im * fb.normal.re;
            if det.abs() <= 1e-14 * fa.normal.norm() * fb.normal.norm() {
                continue;
            }
            for ca in &fa.chords {
                let (ea, eb) = (dot(fb.normal, ca.ends.0), dot(fb.normal, ca.ends.1));
                let (k0, k1) = k_range(ea.min(eb), ea.max(eb), fb.offset, fb.spacing);
                for k in k0..=k1 {
                    let cb = fb.offset + fb.spacing * k as f64;
                    let x = (ca.offset * fb.normal.im - cb * fa.normal.im) / det;
                    let y = (fa.normal.re * cb - fb.normal.re * ca.offset) / det;
                    flops.mul(2);
                    flops.add(2);
                    let alpha = Complex64::new(x, y);
                    if filter_edges {
                        flops.mul(2);
                        if !(on_edge(ring, alpha * ha, fa.step, &mut buf) && on_edge(ring, alpha * hb, fb.step, &mut buf)) {
                            continue;
                        }
                    }
                    set.alphas_sii.push(alpha);
                }
            }
        }
    }

    set.alphas_boundary.extend_from_slice(&region.vertices);
    for fam in &families {
        for c in &fam.chords {
            set.alphas_boundary.push(c.ends.0);
            set.alphas_boundary.push(c.ends.1);
        }
    }
    set
}

/// Moves points on the closing ray of the sector onto the opening ray.
fn fold_closing_ray(ring: RingId, region: SearchRegion, tol: f64) -> impl Fn(ComplexScalar) -> ComplexScalar {
    let dir = Complex64::from_polar(1.0, ring.phase_sector());
    let back = ring.generator_unit().embedding().conj();
    let active = region == SearchRegion::Sector;
    move |alpha| {
        if active && alpha.norm() > tol && (dir.re * alpha.im - dir.im * alpha.re) >= -tol {
            alpha * back
        } else {
            alpha
        }
    }
}

fn phase_one(ch: &Channel, ring: RingId, region: SearchRegion, flops: &mut FlopCounter) -> Result<CandidateSet> {
    check_gains(ch)?;
    let polygon = region.polygon(ch, ring);
    Ok(representatives(ch, ring, &polygon, flops))
}

/// Representatives and distinct candidate vectors over one unit-orbit sector.
pub fn build_candidates(ch: &Channel, ring: RingId) -> Result<CandidateSet> {
    build_candidates_in(ch, ring, SearchRegion::Sector)
}

pub fn build_candidates_in(ch: &Channel, ring: RingId, region: SearchRegion) -> Result<CandidateSet> {
    let mut flops = FlopCounter::new();
    let mut set = phase_one(ch, ring, region, &mut flops)?;
    let fold = fold_closing_ray(ring, region, slack(&region.polygon(ch, ring)));
    let mut ev = Evaluator::new(ch, ring);
    let users = ch.users();
    for l in 0..users {
        let mut key = vec![(0, 0); users];
        key[l] = (1, 0);
        ev.record_key(&key);
    }
    for &a in set.alphas_si.iter().chain(&set.alphas_sii).chain(&set.alphas_boundary) {
        ev.record_alpha(fold(a));
    }
    set.dedup_keys = ev.into_keys();
    Ok(set)
}

/// The rate-optimal nonzero coefficient vector.
pub fn complex_exhaustive_two(ch: &Channel, ring: RingId) -> Result<SelectionResult> {
    complex_exhaustive_two_in(ch, ring, SearchRegion::Sector)
}

pub fn complex_exhaustive_two_in(ch: &Channel, ring: RingId, region: SearchRegion) -> Result<SelectionResult> {
    let mut flops = FlopCounter::new();
    let set = phase_one(ch, ring, region, &mut flops)?;
    let fold = fold_closing_ray(ring, region, slack(&region.polygon(ch, ring)));
    let mut ev = Evaluator::new(ch, ring);
    ev.flops = flops;
    offer_unit_vectors(&mut ev, ch.users());
    for &a in set.alphas_si.iter().chain(&set.alphas_sii).chain(&set.alphas_boundary) {
        ev.offer_alpha(fold(a));
    }
    ev.finish(ch)
}
