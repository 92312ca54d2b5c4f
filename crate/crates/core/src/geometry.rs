//! Geometry of the α-plane: per-user quantization cells, their edge lines,
//! polygon clipping and the largest inscribed axis-aligned square.
//!
//! Points of the plane are carried as complex numbers (`re` = x, `im` = y).
//! A cell for user `l` and ring element `a_l` is the set of α with
//! `Q(α·h_l) = a_l`: the ring's Voronoi cell of `a_l`, mapped through
//! multiplication by `1/h_l`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rate::{Channel, CoeffVector};
use crate::rings::{lattice_points_in_rect, ComplexScalar, RingElement, RingId};

/// Vertices closer than this are merged after clipping.
pub const SNAP_TOL: f64 = 1e-9;
const PARALLEL_TOL: f64 = 1e-12;

#[inline]
fn dot(a: ComplexScalar, b: ComplexScalar) -> f64 {
    a.re * b.re + a.im * b.im
}

#[inline]
fn cross(a: ComplexScalar, b: ComplexScalar) -> f64 {
    a.re * b.im - a.im * b.re
}

/// The line `n · x = c` with a unit normal. As a half-plane it denotes `n · x ≤ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2D {
    pub normal: ComplexScalar,
    pub offset: f64,
}

impl Line2D {
    /// Normalizes `normal`; `None` for a zero normal.
    pub fn new(normal: ComplexScalar, offset: f64) -> Option<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return None;
        }
        Some(Self { normal: normal / n, offset: offset / n })
    }

    /// Signed distance of `p` (positive outside the half-plane).
    #[inline]
    pub fn eval(&self, p: ComplexScalar) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

pub fn line_intersection(l1: &Line2D, l2: &Line2D) -> Option<ComplexScalar> {
    let det = cross(l1.normal, l2.normal);
    if det.abs() <= PARALLEL_TOL {
        return None;
    }
    let x = (l1.offset * l2.normal.im - l2.offset * l1.normal.im) / det;
    let y = (l1.normal.re * l2.offset - l2.normal.re * l1.offset) / det;
    Some(Complex64::new(x, y))
}

/// A convex polygon with counterclockwise vertices and its bounding half-planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCell {
    pub vertices: Vec<ComplexScalar>,
    pub halfplanes: Vec<Line2D>,
}

impl ConvexCell {
    /// Builds a cell from counterclockwise vertices; one half-plane per edge.
    pub fn from_vertices(vertices: Vec<ComplexScalar>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("a cell needs at least three vertices".into()));
        }
        let halfplanes = edge_halfplanes(&vertices)
            .ok_or_else(|| Error::InvalidArgument("degenerate polygon edge".into()))?;
        Ok(Self { vertices, halfplanes })
    }

    pub fn axis_box(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self::from_vertices(vec![
            Complex64::new(xmin, ymin),
            Complex64::new(xmax, ymin),
            Complex64::new(xmax, ymax),
            Complex64::new(xmin, ymax),
        ])
        .expect("box with positive extent")
    }

    /// Number of edges `g`.
    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn centroid(&self) -> ComplexScalar {
        let n = self.vertices.len() as f64;
        self.vertices.iter().sum::<ComplexScalar>() / n
    }

    pub fn contains(&self, p: ComplexScalar, tol: f64) -> bool {
        self.halfplanes.iter().all(|hp| hp.eval(p) <= tol)
    }

    /// All edge turns are left turns.
    pub fn is_convex_ccw(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        (0..n).all(|i| cross(v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]) > 0.0)
    }

    /// Intersection with the half-plane `hp`; `None` when empty or degenerate.
    pub fn clip(&self, hp: &Line2D) -> Option<ConvexCell> {
        let verts = clip_polygon(&self.vertices, hp)?;
        Some(ConvexCell { halfplanes: edge_halfplanes(&verts)?, vertices: verts })
    }

    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        bbox_of(&self.vertices)
    }
}

fn bbox_of(v: &[ComplexScalar]) -> (f64, f64, f64, f64) {
    v.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(x0, x1, y0, y1), p| (x0.min(p.re), x1.max(p.re), y0.min(p.im), y1.max(p.im)),
    )
}

fn polygon_area(v: &[ComplexScalar]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn edge_halfplanes(v: &[ComplexScalar]) -> Option<Vec<Line2D>> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let d = v[(i + 1) % n] - v[i];
            // outward normal of a counterclockwise edge
            let normal = Complex64::new(d.im, -d.re);
            Line2D::new(normal, dot(normal, v[i]))
        })
        .collect()
}

/// Sutherland–Hodgman step for one half-plane, followed by vertex snapping.
fn clip_polygon(v: &[ComplexScalar], hp: &Line2D) -> Option<Vec<ComplexScalar>> {
    let n = v.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let dp = hp.eval(p);
        let dq = hp.eval(q);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    snap(&mut out);
    if out.len() < 3 || polygon_area(&out) <= SNAP_TOL * SNAP_TOL {
        return None;
    }
    Some(out)
}

fn snap(v: &mut Vec<ComplexScalar>) {
    let mut i = 0;
    while v.len() > 1 && i < v.len() {
        let j = (i + 1) % v.len();
        if (v[i] - v[j]).norm() < SNAP_TOL {
            v.remove(j);
        } else {
            i += 1;
        }
    }
}

/// Intersection of convex polygon `start` with a list of half-planes.
pub fn intersect_halfplanes(start: &ConvexCell, halfplanes: &[Line2D]) -> Option<ConvexCell> {
    let mut verts = start.vertices.clone();
    for hp in halfplanes {
        verts = clip_polygon(&verts, hp)?;
    }
    let mut all = start.halfplanes.clone();
    all.extend_from_slice(halfplanes);
    Some(ConvexCell { vertices: verts, halfplanes: all })
}

/// The region of useful scaling factors: modulus below `radius`, phase in
/// `[phase_lo, phase_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSector {
    pub radius: f64,
    pub phase_lo: f64,
    pub phase_hi: f64,
}

impl AlphaSector {
    pub fn new(radius: f64, phase_hi: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("sector radius must be positive, got {radius}")));
        }
        if !(phase_hi > 0.0 && phase_hi <= std::f64::consts::FRAC_PI_2 + 1e-15) {
            return Err(Error::InvalidArgument(format!("sector phase must be in (0, π/2], got {phase_hi}")));
        }
        Ok(Self { radius, phase_lo: 0.0, phase_hi })
    }

    /// Radius `√SNR`, phase width `2π / |units|`.
    pub fn for_channel(ch: &Channel, ring: RingId) -> Self {
        Self { radius: ch.alpha_radius(), phase_lo: 0.0, phase_hi: ring.phase_sector() }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..*self }
    }

    /// Axis-aligned bounding box of the circular sector.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let r = self.radius;
        let (s, c) = self.phase_hi.sin_cos();
        (r * c.min(0.0), r, 0.0, r * s)
    }

    /// The wedge between the two bounding rays, clipped to the bounding box.
    /// For a quarter sector this is the bounding box itself.
    pub fn region(&self) -> ConvexCell {
        let (x0, x1, y0, y1) = self.bounding_box();
        let bbox = ConvexCell::axis_box(x0, x1, y0, y1);
        let (s, c) = self.phase_hi.sin_cos();
        if c.abs() < 1e-15 {
            return bbox;
        }
        // keep points on the clockwise side of the closing ray
        let ray = Line2D::new(Complex64::new(-s, c), 0.0).expect("unit normal");
        bbox.clip(&ray).unwrap_or(bbox)
    }

    pub fn contains(&self, alpha: ComplexScalar) -> bool {
        if alpha.norm() >= self.radius {
            return false;
        }
        let ph = alpha.arg();
        ph >= self.phase_lo && ph < self.phase_hi
    }
}

/// The set of α with `Q(α·h_l) = a_l`.
pub fn cell_of(ring: RingId, h_l: ComplexScalar, a_l: RingElement) -> Result<ConvexCell> {
    if !(h_l.norm() > 0.0) {
        return Err(Error::InvalidArgument("cell of a zero channel gain".into()));
    }
    if a_l.ring != ring {
        return Err(Error::InvalidArgument(format!("{a_l} is not in {ring}")));
    }
    let inv = h_l.inv();
    let center = a_l.embedding();
    let vertices = ring.cell_vertex_offsets().into_iter().map(|off| (center + off) * inv).collect();
    // In the z-plane the cell is Re((z − a)·ū) ≤ 1/2 for every unit u. With
    // z = α·h this is Re(α · h·ū) ≤ Re(a·ū) + 1/2.
    let halfplanes = ring
        .units()
        .into_iter()
        .map(|u| {
            let ue = u.embedding();
            let w = h_l * ue.conj();
            let c = (center * ue.conj()).re + 0.5;
            Line2D::new(Complex64::new(w.re, -w.im), c).expect("nonzero gain")
        })
        .collect();
    Ok(ConvexCell { vertices, halfplanes })
}

/// Exact coordinates of the lattice points whose cell (for gain `h_l`) might
/// meet `region`: the region is mapped into the lattice plane and its bounding
/// box is widened by the covering radius.
pub(crate) fn lattice_points_near(ring: RingId, h_l: ComplexScalar, region: &ConvexCell) -> Vec<(i64, i64)> {
    let mapped: Vec<_> = region.vertices.iter().map(|v| v * h_l).collect();
    let (x0, x1, y0, y1) = bbox_of(&mapped);
    let m = ring.covering_radius() + 1e-9;
    lattice_points_in_rect(ring, x0 - m, x1 + m, y0 - m, y1 + m)
}

/// All cells for gain `h_l` that meet the sector's region (touching included).
pub fn cells_in_sector(
    ring: RingId,
    h_l: ComplexScalar,
    sector: &AlphaSector,
) -> Result<Vec<(RingElement, ConvexCell)>> {
    if !(h_l.norm() > 0.0) {
        return Err(Error::InvalidArgument("cells of a zero channel gain".into()));
    }
    let region = sector.region();
    let mut out = Vec::new();
    for (c1, c2) in lattice_points_near(ring, h_l, &region) {
        let a = RingElement::new(ring, c1, c2);
        let cell = cell_of(ring, h_l, a)?;
        if overlaps(&cell, &region) {
            out.push((a, cell));
        }
    }
    Ok(out)
}

/// Closed overlap test for two convex polygons (separating axis theorem).
fn overlaps(a: &ConvexCell, b: &ConvexCell) -> bool {
    let tol = 1e-12;
    let separated = |p: &ConvexCell, q: &ConvexCell| {
        p.halfplanes.iter().any(|hp| q.vertices.iter().all(|&v| hp.eval(v) > tol))
    };
    !separated(a, b) && !separated(b, a)
}

/// The convex region of α mapping to the whole vector `a`, bounded by the box
/// `[−R, R]²` of the sector radius; `None` when no α maps to `a`.
pub fn region_of_vector(
    ring: RingId,
    ch: &Channel,
    a: &CoeffVector,
    sector: &AlphaSector,
) -> Result<Option<ConvexCell>> {
    if a.len() != ch.users() {
        return Err(Error::InvalidArgument("coefficient length does not match channel".into()));
    }
    if a.is_zero() {
        return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
    }
    let r = sector.radius;
    let start = ConvexCell::axis_box(-r, r, -r, r);
    let mut halfplanes = Vec::with_capacity(ch.users() * ring.unit_count());
    for (&hl, &al) in ch.h().iter().zip(a.elements()) {
        halfplanes.extend(cell_of(ring, hl, al)?.halfplanes);
    }
    Ok(intersect_halfplanes(&start, &halfplanes))
}

/// Width and center of the largest axis-aligned square inside `cell`.
///
/// A square of width `d` centered at `m` fits iff `m` lies in the cell eroded
/// by the L∞ ball of radius `d/2`, i.e. every half-plane `n·x ≤ c` tightened
/// to `n·m ≤ c − (|n_x| + |n_y|)·d/2`. The width is found by bisection on the
/// nonemptiness of that eroded polygon.
pub fn largest_inscribed_axis_square(cell: &ConvexCell) -> (f64, ComplexScalar) {
    if cell.vertices.len() < 3 || cell.area() <= 1e-18 {
        return (0.0, cell.centroid());
    }
    let (x0, x1, y0, y1) = cell.bbox();
    let start = ConvexCell::axis_box(x0, x1, y0, y1);
    let eroded = |d: f64| -> Option<ConvexCell> {
        let hps: Vec<Line2D> = cell
            .halfplanes
            .iter()
            .map(|hp| Line2D {
                normal: hp.normal,
                offset: hp.offset - (hp.normal.re.abs() + hp.normal.im.abs()) * d / 2.0,
            })
            .collect();
        let mut verts = start.vertices.clone();
        for hp in &hps {
            verts = clip_polygon_loose(&verts, hp)?;
        }
        Some(ConvexCell { vertices: verts, halfplanes: hps })
    };
    let mut lo = 0.0;
    let mut hi = (x1 - x0).min(y1 - y0);
    let mut best = cell.centroid();
    if let Some(c) = eroded(hi) {
        return (hi, c.centroid());
    }
    for _ in 0..100 {
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match eroded(mid) {
            Some(c) => {
                lo = mid;
                best = c.centroid();
            }
            None => hi = mid,
        }
    }
    (lo, best)
}

/// Clipping that keeps degenerate (zero-area) results, used while probing
/// feasibility near the optimum.
fn clip_polygon_loose(v: &[ComplexScalar], hp: &Line2D) -> Option<Vec<ComplexScalar>> {
    let n = v.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let dp = hp.eval(p);
        let dq = hp.eval(q);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::quantize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    fn random_interior(cell: &ConvexCell, rng: &mut ChaCha8Rng) -> ComplexScalar {
        // random convex combination, pulled toward the centroid
        let w: Vec<f64> = cell.vertices.iter().map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = w.iter().sum();
        let p: ComplexScalar = cell.vertices.iter().zip(&w).map(|(v, wi)| v * (wi / s)).sum();
        cell.centroid() + (p - cell.centroid()) * 0.999
    }

    /// Grid-search oracle: largest axis square whose corners satisfy every
    /// half-plane, scanning centers on a grid of step `step`.
    fn grid_square(cell: &ConvexCell, step: f64) -> f64 {
        let (x0, x1, y0, y1) = cell.bbox();
        let mut best = 0.0f64;
        let nx = ((x1 - x0) / step) as usize + 1;
        let ny = ((y1 - y0) / step) as usize + 1;
        for i in 0..=nx {
            for j in 0..=ny {
                let m = c(x0 + i as f64 * step, y0 + j as f64 * step);
                // largest half-width allowed by each half-plane
                let mut half = f64::INFINITY;
                for hp in &cell.halfplanes {
                    let k = hp.normal.re.abs() + hp.normal.im.abs();
                    half = half.min((hp.offset - dot(hp.normal, m)) / k);
                }
                best = best.max(2.0 * half);
            }
        }
        best
    }

    #[test]
    fn unit_square_cell_at_origin() {
        let cell = cell_of(RingId::GaussianZI, c(1.0, 0.0), RingElement::zero(RingId::GaussianZI)).unwrap();
        let mut vs: Vec<_> = cell.vertices.iter().map(|v| (v.re, v.im)).collect();
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vs, vec![(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]);
        assert!(cell.is_convex_ccw());
        assert!((cell.area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotated_gain_rotates_cell() {
        let h = c(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let cell = cell_of(RingId::GaussianZI, h, RingElement::zero(RingId::GaussianZI)).unwrap();
        for v in &cell.vertices {
            assert!((v.norm() - FRAC_1_SQRT_2).abs() < 1e-14);
            // diamond: vertices on the axes
            assert!(v.re.abs() < 1e-14 || v.im.abs() < 1e-14);
        }
        assert!(cell.is_convex_ccw());
    }

    #[test]
    fn cell_membership_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for ring in RingId::ALL {
            for _ in 0..100 {
                let h = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let a = RingElement::new(ring, rng.random_range(-9..10), rng.random_range(-9..10));
                let cell = cell_of(ring, h, a).unwrap();
                assert!(cell.is_convex_ccw());
                assert!((cell.area() - ring.fundamental_area() / h.norm_sqr()).abs() < 1e-9 * cell.area());
                for v in &cell.vertices {
                    assert!(cell.contains(*v, 1e-9));
                }
                for _ in 0..100 {
                    let p = random_interior(&cell, &mut rng);
                    assert_eq!(quantize(ring, p * h).unwrap(), a);
                }
                let n = cell.vertices.len();
                for i in 0..n {
                    let (p, q) = (cell.vertices[i], cell.vertices[(i + 1) % n]);
                    let outward = c((q - p).im, -(q - p).re) / (q - p).norm();
                    for k in 0..20 {
                        let t = (k as f64 + 0.5) / 20.0;
                        let x = p + (q - p) * t + outward * 1e-6;
                        assert_ne!(quantize(ring, x * h).unwrap(), a);
                    }
                }
            }
        }
    }

    #[test]
    fn cell_of_rejects_zero_gain() {
        assert!(cell_of(RingId::GaussianZI, c(0.0, 0.0), RingElement::zero(RingId::GaussianZI)).is_err());
    }

    #[test]
    fn line_intersection_cases() {
        let x_axis = Line2D::new(c(0.0, 1.0), 0.0).unwrap();
        let y_axis = Line2D::new(c(1.0, 0.0), 0.0).unwrap();
        assert!(line_intersection(&x_axis, &y_axis).unwrap().norm() < 1e-15);
        let h2 = Line2D::new(c(0.0, 2.0), 3.0).unwrap();
        assert!(line_intersection(&x_axis, &h2).is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let l1 = Line2D::new(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), rng.random_range(-10.0..10.0)).unwrap();
            let l2 = Line2D::new(c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), rng.random_range(-10.0..10.0)).unwrap();
            if let Some(p) = line_intersection(&l1, &l2) {
                let scale = 1.0 + p.norm();
                assert!(l1.eval(p).abs() <= 1e-9 * scale && l2.eval(p).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn cells_in_quarter_disc() {
        let sector = AlphaSector::new(1.0, PI / 2.0).unwrap();
        let cells = cells_in_sector(RingId::GaussianZI, c(1.0, 0.0), &sector).unwrap();
        let got: Vec<_> = cells.iter().map(|(a, _)| (a.c1, a.c2)).collect();
        // oracle: brute force over a 5x5 grid with a direct overlap test
        let region = sector.region();
        for x in -2..=2 {
            for y in -2..=2 {
                let cell = cell_of(RingId::GaussianZI, c(1.0, 0.0), RingElement::new(RingId::GaussianZI, x, y)).unwrap();
                assert_eq!(got.contains(&(x, y)), overlaps(&cell, &region), "({x},{y})");
            }
        }
        for want in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            assert!(got.contains(&want));
        }
    }

    #[test]
    fn tiny_sector_sees_origin_cell() {
        let sector = AlphaSector::new(0.1, PI / 2.0).unwrap();
        let cells = cells_in_sector(RingId::GaussianZI, c(1.0, 0.0), &sector).unwrap();
        assert!(cells.iter().any(|(a, _)| a.is_zero()));
        assert!(cells.iter().all(|(a, _)| a.c1.abs() <= 1 && a.c2.abs() <= 1));
    }

    #[test]
    fn cell_count_scales_with_snr_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for ring in RingId::ALL {
            let h = c(rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0));
            let snrs = [1e2f64, 1e3, 1e4];
            let counts: Vec<f64> = snrs
                .iter()
                .map(|snr| {
                    let sector = AlphaSector::new(snr.sqrt(), ring.phase_sector()).unwrap();
                    cells_in_sector(ring, h, &sector).unwrap().len() as f64
                })
                .collect();
            // area of the region times cell density |h|² / A0, plus a boundary layer
            for (snr, n) in snrs.iter().zip(&counts) {
                let sector = AlphaSector::new(f64::sqrt(*snr), ring.phase_sector()).unwrap();
                let expect = sector.region().area() * h.norm_sqr() / ring.fundamental_area();
                assert!(*n >= expect, "{ring} snr {snr}: {n} vs {expect}");
                if *snr >= 1e4 {
                    assert!(n / expect - 1.0 < 0.1, "{ring} snr {snr}: {n} vs {expect}");
                }
            }
            let slope = (counts[2] / counts[1]).log10();
            assert!((slope - 1.0).abs() < 0.15, "{ring} slope {slope}");
        }
    }

    #[test]
    fn region_of_vector_examples() {
        let zi = RingId::GaussianZI;
        let ch = Channel::new(vec![c(1.0, 0.0)], 100.0).unwrap();
        let sector = AlphaSector::for_channel(&ch, zi);
        let r = region_of_vector(zi, &ch, &CoeffVector::from_coords(zi, &[(1, 0)]), &sector).unwrap().unwrap();
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert!((r.centroid() - c(1.0, 0.0)).norm() < 1e-12);

        let ch = Channel::new(vec![c(1.0, 0.0), c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)], 1e3).unwrap();
        let sector = AlphaSector::for_channel(&ch, zi);
        let a = CoeffVector::from_coords(zi, &[(2, 2), (0, 3)]);
        let r = region_of_vector(zi, &ch, &a, &sector).unwrap().unwrap();
        assert_eq!(r.edge_count(), 8);
        assert!(r.is_convex_ccw());
        let al = r.centroid();
        let q: Vec<_> = ch.h().iter().map(|h| quantize(zi, al * h).unwrap()).collect();
        assert_eq!(q, a.elements());

        let ch = Channel::new(vec![c(1.0, 0.0), c(0.9, 0.3)], 1e3).unwrap();
        let sector = AlphaSector::for_channel(&ch, zi);
        let bad = CoeffVector::from_coords(zi, &[(1, 0), (100, 0)]);
        assert!(region_of_vector(zi, &ch, &bad, &sector).unwrap().is_none());
    }

    #[test]
    fn region_area_bounded_by_strongest_user() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for ring in RingId::ALL {
            for _ in 0..200 {
                let h: Vec<_> = (0..3).map(|_| c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect();
                let ch = Channel::new(h, 100.0).unwrap();
                let al = c(rng.random_range(0.0..8.0), rng.random_range(0.0..8.0));
                let scaled: Vec<_> = ch.h().iter().map(|h| al * h).collect();
                let a = CoeffVector::new(ring, crate::rings::quantize_vector(ring, &scaled).unwrap()).unwrap();
                if a.is_zero() {
                    continue;
                }
                let sector = AlphaSector::for_channel(&ch, ring);
                let r = region_of_vector(ring, &ch, &a, &sector).unwrap().expect("α maps to a");
                assert!(r.is_convex_ccw());
                assert!(r.contains(al, 1e-9));
                assert!(r.area() <= ring.fundamental_area() / ch.max_gain_sq() + 1e-9);
            }
        }
    }

    #[test]
    fn inscribed_square_examples() {
        let sq = ConvexCell::axis_box(0.0, 1.0, 0.0, 1.0);
        let (w, m) = largest_inscribed_axis_square(&sq);
        assert!((w - 1.0).abs() < 1e-9);
        assert!((m - c(0.5, 0.5)).norm() < 1e-6);

        let diamond = cell_of(RingId::GaussianZI, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2), RingElement::zero(RingId::GaussianZI)).unwrap();
        let (w, _) = largest_inscribed_axis_square(&diamond);
        assert!((w - FRAC_1_SQRT_2).abs() < 1e-9);

        let hex = ConvexCell::from_vertices((0..6).map(|k| Complex64::from_polar(1.0, k as f64 * PI / 3.0)).collect()).unwrap();
        let (w, _) = largest_inscribed_axis_square(&hex);
        let oracle = grid_square(&hex, 1e-3);
        assert!((w - oracle).abs() < 1e-3, "{w} vs {oracle}");
    }

    #[test]
    fn inscribed_square_is_feasible_and_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            // random convex polygon: sorted random angles on a jittered ellipse
            let n = rng.random_range(3..9);
            let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (ax, ay) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
            let verts: Vec<_> = angles.iter().map(|t| c(ax * t.cos(), ay * t.sin())).collect();
            let Ok(cell) = ConvexCell::from_vertices(verts) else { continue };
            if !cell.is_convex_ccw() || cell.area() < 0.05 {
                continue;
            }
            let (w, m) = largest_inscribed_axis_square(&cell);
            for corner in [c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)] {
                assert!(cell.contains(m + corner * (w / 2.0), 1e-9));
            }
            let oracle = grid_square(&cell, 2e-3);
            assert!(w >= oracle - 1e-9 && w - oracle < 5e-3, "{w} vs {oracle}");
        }
    }

    #[test]
    fn degenerate_cell_has_zero_square() {
        let sliver = ConvexCell {
            vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 1e-20)],
            halfplanes: vec![],
        };
        assert_eq!(largest_inscribed_axis_square(&sliver).0, 0.0);
    }

    #[test]
    fn sector_regions() {
        let q = AlphaSector::new(2.0, PI / 2.0).unwrap();
        assert!((q.region().area() - 4.0).abs() < 1e-12);
        let s = AlphaSector::new(2.0, PI / 3.0).unwrap();
        let r = s.region();
        assert!(r.is_convex_ccw());
        // quadrilateral (0,0), (2,0), (2,√3), (1,√3)
        assert!((r.area() - 1.5 * 3f64.sqrt()).abs() < 1e-12);
        assert!(s.contains(c(1.0, 0.5)) && !s.contains(c(0.5, 1.0)) && !s.contains(c(2.0, 0.1)));
        assert!(AlphaSector::new(0.0, 1.0).is_err());
        assert!(AlphaSector::new(1.0, 2.0).is_err());
    }
}
