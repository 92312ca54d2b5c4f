//! Gaussian and Eisenstein integers: exact elements, nearest-point
//! quantization, units and the geometry constants of their Voronoi cells.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const HALF_SQRT3: f64 = SQRT3 / 2.0;

/// Relative tolerance used to decide that two lattice points are equally near.
pub const DEFAULT_FULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingId {
    /// ℤ[i], basis (1, i).
    GaussianZI,
    /// ℤ[ω], basis (1, ω) with ω = (−1 + √3 i)/2.
    EisensteinZOmega,
}

impl RingId {
    pub const ALL: [RingId; 2] = [RingId::GaussianZI, RingId::EisensteinZOmega];

    pub fn short_name(self) -> &'static str {
        match self {
            RingId::GaussianZI => "ZI",
            RingId::EisensteinZOmega => "ZW",
        }
    }

    pub fn from_short_name(s: &str) -> Option<RingId> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zi" | "z[i]" | "gaussian" | "gi" => Some(RingId::GaussianZI),
            "zw" | "z[w]" | "zomega" | "eisenstein" | "ei" => Some(RingId::EisensteinZOmega),
            _ => None,
        }
    }

    pub fn basis(self) -> (ComplexScalar, ComplexScalar) {
        match self {
            RingId::GaussianZI => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)),
            RingId::EisensteinZOmega => (Complex64::new(1.0, 0.0), Complex64::new(-0.5, HALF_SQRT3)),
        }
    }

    pub fn unit_count(self) -> usize {
        match self {
            RingId::GaussianZI => 4,
            RingId::EisensteinZOmega => 6,
        }
    }

    /// Area of the Voronoi cell of the origin.
    pub fn fundamental_area(self) -> f64 {
        match self {
            RingId::GaussianZI => 1.0,
            RingId::EisensteinZOmega => HALF_SQRT3,
        }
    }

    /// Largest distance from any point of the plane to its nearest lattice point.
    pub fn covering_radius(self) -> f64 {
        match self {
            RingId::GaussianZI => std::f64::consts::SQRT_2 / 2.0,
            RingId::EisensteinZOmega => SQRT3 / 3.0,
        }
    }

    /// Phase width of the sector that represents every unit orbit once.
    pub fn phase_sector(self) -> f64 {
        match self {
            RingId::GaussianZI => FRAC_PI_2,
            RingId::EisensteinZOmega => FRAC_PI_3,
        }
    }

    pub fn edge_direction_count(self) -> usize {
        match self {
            RingId::GaussianZI => 2,
            RingId::EisensteinZOmega => 3,
        }
    }

    pub fn units(self) -> Vec<RingElement> {
        let coords: &[(i64, i64)] = match self {
            RingId::GaussianZI => &[(1, 0), (0, 1), (-1, 0), (0, -1)],
            // 1, 1+ω, ω, −1, −1−ω, −ω  (counterclockwise from 1)
            RingId::EisensteinZOmega => &[(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)],
        };
        coords.iter().map(|&(c1, c2)| RingElement::new(self, c1, c2)).collect()
    }

    /// The unit of smallest positive phase (i for ℤ[i], 1+ω for ℤ[ω]).
    pub fn generator_unit(self) -> RingElement {
        match self {
            RingId::GaussianZI => RingElement::new(self, 0, 1),
            RingId::EisensteinZOmega => RingElement::new(self, 1, 1),
        }
    }

    /// Vertices of the origin's Voronoi cell (the z0/2 values), counterclockwise.
    pub fn cell_vertex_offsets(self) -> Vec<ComplexScalar> {
        let (den, keys) = self.vertex_offset_keys();
        keys.iter()
            .map(|&(n1, n2)| self.embed_f64(n1 as f64 / den as f64, n2 as f64 / den as f64))
            .collect()
    }

    /// Cell vertices as exact basis coordinates `(n1, n2) / den`.
    pub fn vertex_offset_keys(self) -> (i64, &'static [(i64, i64)]) {
        match self {
            RingId::GaussianZI => (2, &[(1, 1), (-1, 1), (-1, -1), (1, -1)]),
            RingId::EisensteinZOmega => (3, &[(2, 1), (1, 2), (-1, 1), (-2, -1), (-1, -2), (1, -1)]),
        }
    }

    /// Edge-line families of the Voronoi tiling. Every cell edge lies on a line
    /// `Re(z · conj(u)) = offset + spacing · k` for one of the returned families.
    pub fn edge_families(self) -> Vec<EdgeFamily> {
        match self {
            RingId::GaussianZI => vec![
                EdgeFamily { dir: Complex64::new(1.0, 0.0), spacing: 1.0, offset: 0.5 },
                EdgeFamily { dir: Complex64::new(0.0, 1.0), spacing: 1.0, offset: 0.5 },
            ],
            RingId::EisensteinZOmega => (0..3)
                .map(|k| EdgeFamily {
                    dir: Complex64::from_polar(1.0, k as f64 * FRAC_PI_3),
                    spacing: 0.5,
                    offset: 0.0,
                })
                .collect(),
        }
    }

    /// Whether every point on every family line is on a cell edge.
    pub fn edges_fill_lines(self) -> bool {
        matches!(self, RingId::GaussianZI)
    }

    pub fn spec(self) -> RingSpec {
        RingSpec {
            id: self,
            basis: self.basis(),
            units: self.units(),
            fundamental_area: self.fundamental_area(),
            cell_vertex_offsets: self.cell_vertex_offsets(),
            edge_direction_count: self.edge_direction_count(),
            phase_sector: self.phase_sector(),
        }
    }

    #[inline]
    pub(crate) fn embed_f64(self, c1: f64, c2: f64) -> ComplexScalar {
        match self {
            RingId::GaussianZI => Complex64::new(c1, c2),
            RingId::EisensteinZOmega => Complex64::new(c1 - 0.5 * c2, HALF_SQRT3 * c2),
        }
    }

    /// Coordinates of `z` in the ring basis.
    #[inline]
    pub fn coords(self, z: ComplexScalar) -> (f64, f64) {
        match self {
            RingId::GaussianZI => (z.re, z.im),
            RingId::EisensteinZOmega => {
                let c2 = z.im / HALF_SQRT3;
                (z.re + 0.5 * c2, c2)
            }
        }
    }

    /// Nearest lattice point in exact coordinates; no finiteness check.
    #[inline]
    pub(crate) fn nearest_coords(self, z: ComplexScalar) -> (i64, i64) {
        match self {
            // floor(x + 1/2) resolves exact half-integer ties upward, i.e. toward
            // the lexicographically larger embedding.
            RingId::GaussianZI => ((z.re + 0.5).floor() as i64, (z.im + 0.5).floor() as i64),
            RingId::EisensteinZOmega => {
                let (t1, t2) = self.coords(z);
                let (r1, r2) = (t1.round() as i64, t2.round() as i64);
                let cands = [(r1, r2), (r1 + 1, r2), (r1 - 1, r2), (r1, r2 + 1), (r1, r2 - 1)];
                let tie = 1e-12 * z.norm_sqr().max(1.0);
                let mut best = cands[0];
                let mut best_d = (z - self.embed_f64(best.0 as f64, best.1 as f64)).norm_sqr();
                for &c in &cands[1..] {
                    let e = self.embed_f64(c.0 as f64, c.1 as f64);
                    let d = (z - e).norm_sqr();
                    if d < best_d - tie {
                        best = c;
                        best_d = d;
                    } else if d <= best_d + tie {
                        let eb = self.embed_f64(best.0 as f64, best.1 as f64);
                        if (e.re, e.im) > (eb.re, eb.im) {
                            best = c;
                            best_d = best_d.min(d);
                        }
                    }
                }
                best
            }
        }
    }

    /// Exact unit-orbit test: is the phase of `(c1, c2)` in `[0, phase_sector)`?
    #[inline]
    pub(crate) fn in_orbit_sector(self, c1: i64, c2: i64) -> bool {
        match self {
            RingId::GaussianZI => c1 > 0 && c2 >= 0,
            RingId::EisensteinZOmega => c2 >= 0 && c1 > c2,
        }
    }
}

impl fmt::Display for RingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// One family of parallel edge lines `Re(z · conj(dir)) = offset + spacing · k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFamily {
    pub dir: ComplexScalar,
    pub spacing: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingSpec {
    pub id: RingId,
    pub basis: (ComplexScalar, ComplexScalar),
    pub units: Vec<RingElement>,
    pub fundamental_area: f64,
    pub cell_vertex_offsets: Vec<ComplexScalar>,
    pub edge_direction_count: usize,
    pub phase_sector: f64,
}

/// An element `c1·b1 + c2·b2` of ℤ[i] or ℤ[ω], stored by exact coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    pub ring: RingId,
    pub c1: i64,
    pub c2: i64,
}

impl RingElement {
    pub fn new(ring: RingId, c1: i64, c2: i64) -> Self {
        Self { ring, c1, c2 }
    }

    pub fn zero(ring: RingId) -> Self {
        Self::new(ring, 0, 0)
    }

    pub fn one(ring: RingId) -> Self {
        Self::new(ring, 1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn embedding(&self) -> ComplexScalar {
        self.ring.embed_f64(self.c1 as f64, self.c2 as f64)
    }

    /// Exact squared modulus of the embedding.
    pub fn norm_sq(&self) -> i64 {
        match self.ring {
            RingId::GaussianZI => self.c1 * self.c1 + self.c2 * self.c2,
            RingId::EisensteinZOmega => self.c1 * self.c1 - self.c1 * self.c2 + self.c2 * self.c2,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.norm_sq() == 1
    }

    /// The element of `{u · self}` whose phase lies in `[0, phase_sector)`.
    pub fn orbit_representative(&self) -> RingElement {
        if self.is_zero() {
            return *self;
        }
        let g = self.ring.generator_unit();
        let mut x = *self;
        for _ in 0..self.ring.unit_count() {
            if self.ring.in_orbit_sector(x.c1, x.c2) {
                return x;
            }
            x = x * g;
        }
        unreachable!("every nonzero element has a unit image in the sector")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.ring {
            RingId::GaussianZI => "i",
            RingId::EisensteinZOmega => "w",
        };
        match (self.c1, self.c2) {
            (c1, 0) => write!(f, "{c1}"),
            (0, c2) => write!(f, "{c2}{b}"),
            (c1, c2) if c2 < 0 => write!(f, "{c1}{c2}{b}"),
            (c1, c2) => write!(f, "{c1}+{c2}{b}"),
        }
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        RingElement::new(self.ring, self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        RingElement::new(self.ring, self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> Self {
        RingElement::new(self.ring, -self.c1, -self.c2)
    }
}

impl Mul for RingElement {
    type Output = RingElement;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        let (a, b, c, d) = (self.c1, self.c2, rhs.c1, rhs.c2);
        match self.ring {
            RingId::GaussianZI => RingElement::new(self.ring, a * c - b * d, a * d + b * c),
            // ω² = −1 − ω
            RingId::EisensteinZOmega => {
                RingElement::new(self.ring, a * c - b * d, a * d + b * c - b * d)
            }
        }
    }
}

fn check_finite(z: ComplexScalar) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite complex value {z}")))
    }
}

/// Nearest ring element to `z`. Ties go to the lexicographically largest
/// embedding (real part first, then imaginary part).
pub fn quantize(ring: RingId, z: ComplexScalar) -> Result<RingElement> {
    check_finite(z)?;
    let (c1, c2) = ring.nearest_coords(z);
    Ok(RingElement::new(ring, c1, c2))
}

/// All ring elements whose distance to `z` is within `tol` of the minimum.
///
/// The result is sorted and always contains `quantize(ring, z)`.
pub fn quantize_full(ring: RingId, z: ComplexScalar, tol: f64) -> Result<Vec<RingElement>> {
    check_finite(z)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut out = Vec::with_capacity(4);
    full_coords_into(ring, z, tol, &mut out);
    Ok(out.into_iter().map(|(c1, c2)| RingElement::new(ring, c1, c2)).collect())
}

/// `quantize_full` with the default relative tolerance `1e-9 · max(1, |z|)`.
pub fn quantize_full_default(ring: RingId, z: ComplexScalar) -> Result<Vec<RingElement>> {
    quantize_full(ring, z, default_tol(z))
}

#[inline]
pub(crate) fn default_tol(z: ComplexScalar) -> f64 {
    DEFAULT_FULL_TOL * z.norm_sqr().sqrt().max(1.0)
}

/// Coordinates of every lattice point within `tol` of the nearest distance.
///
/// Points tied with the nearest one are always among its Voronoi-relevant
/// neighbors (the 3x3 block for ℤ[i], the six units for ℤ[ω]).
pub(crate) fn full_coords_into(ring: RingId, z: ComplexScalar, tol: f64, out: &mut Vec<(i64, i64)>) {
    const ZI_NEIGHBORS: [(i64, i64); 9] =
        [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    const ZW_NEIGHBORS: [(i64, i64); 7] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];
    out.clear();
    let (n1, n2) = ring.nearest_coords(z);
    let offsets: &[(i64, i64)] = match ring {
        RingId::GaussianZI => &ZI_NEIGHBORS,
        RingId::EisensteinZOmega => &ZW_NEIGHBORS,
    };
    let mut dist2 = [0f64; 9];
    let mut dmin2 = f64::INFINITY;
    for (i, &(d1, d2)) in offsets.iter().enumerate() {
        let d = (z - ring.embed_f64((n1 + d1) as f64, (n2 + d2) as f64)).norm_sqr();
        dist2[i] = d;
        dmin2 = dmin2.min(d);
    }
    let cut = (dmin2.sqrt() + tol).powi(2);
    for (i, &(d1, d2)) in offsets.iter().enumerate() {
        if dist2[i] <= cut {
            out.push((n1 + d1, n2 + d2));
        }
    }
    out.sort_unstable();
}

pub fn quantize_vector(ring: RingId, v: &[ComplexScalar]) -> Result<Vec<RingElement>> {
    v.iter().map(|&z| quantize(ring, z)).collect()
}

pub fn units(ring: RingId) -> Vec<RingElement> {
    ring.units()
}

/// Exact coordinates of lattice points whose embedding falls in the given
/// axis-aligned rectangle (boundaries inclusive).
pub(crate) fn lattice_points_in_rect(
    ring: RingId,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    match ring {
        RingId::GaussianZI => {
            for y in ymin.ceil() as i64..=ymax.floor() as i64 {
                for x in xmin.ceil() as i64..=xmax.floor() as i64 {
                    out.push((x, y));
                }
            }
        }
        RingId::EisensteinZOmega => {
            let c2_lo = (ymin / HALF_SQRT3).ceil() as i64;
            let c2_hi = (ymax / HALF_SQRT3).floor() as i64;
            for c2 in c2_lo..=c2_hi {
                let shift = 0.5 * c2 as f64;
                for c1 in (xmin + shift).ceil() as i64..=(xmax + shift).floor() as i64 {
                    out.push((c1, c2));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    /// Brute-force nearest points over a neighborhood (oracle, independent of rounding).
    fn brute_nearest(ring: RingId, z: ComplexScalar, radius: f64) -> (f64, Vec<(i64, i64)>) {
        let pts = lattice_points_in_rect(ring, z.re - radius, z.re + radius, z.im - radius, z.im + radius);
        let dmin = pts
            .iter()
            .map(|&(a, b)| (z - ring.embed_f64(a as f64, b as f64)).norm())
            .fold(f64::INFINITY, f64::min);
        let mut near: Vec<_> = pts
            .into_iter()
            .filter(|&(a, b)| (z - ring.embed_f64(a as f64, b as f64)).norm() <= dmin + 1e-9)
            .collect();
        near.sort_unstable();
        (dmin, near)
    }

    #[test]
    fn quantize_examples() {
        let zi = RingId::GaussianZI;
        let zw = RingId::EisensteinZOmega;
        assert_eq!(quantize(zi, c(0.4, 0.6)).unwrap(), RingElement::new(zi, 0, 1));
        assert_eq!(quantize(zw, c(0.0, 0.0)).unwrap(), RingElement::zero(zw));
        // 1 + ω embeds at 0.5 + 0.866i
        let q = quantize(zw, c(0.5, 0.5)).unwrap();
        assert_eq!(q, RingElement::new(zw, 1, 1));
        let (_, near) = brute_nearest(zw, c(0.5, 0.5), 2.0);
        assert_eq!(near, vec![(1, 1)]);
    }

    #[test]
    fn quantize_rejects_nan() {
        assert!(matches!(
            quantize(RingId::GaussianZI, c(f64::NAN, 0.0)),
            Err(Error::InvalidInput(_))
        ));
        assert!(quantize_full(RingId::EisensteinZOmega, c(0.0, f64::INFINITY), 1e-9).is_err());
        assert!(quantize_vector(RingId::GaussianZI, &[c(0.0, 0.0), c(f64::NAN, 1.0)]).is_err());
    }

    #[test]
    fn quantize_full_examples() {
        let zi = RingId::GaussianZI;
        let got = quantize_full_default(zi, c(0.5, 1.5)).unwrap();
        let mut want: Vec<_> = [(1, 2), (1, 1), (0, 2), (0, 1)]
            .iter()
            .map(|&(a, b)| RingElement::new(zi, a, b))
            .collect();
        want.sort();
        assert_eq!(got, want);
        assert_eq!(quantize_full_default(zi, c(0.1, 0.2)).unwrap(), vec![RingElement::zero(zi)]);

        let zw = RingId::EisensteinZOmega;
        let vertex = c(0.0, SQRT3 / 3.0);
        let got = quantize_full_default(zw, vertex).unwrap();
        let (_, near) = brute_nearest(zw, vertex, 2.0);
        assert_eq!(got.iter().map(|e| (e.c1, e.c2)).collect::<Vec<_>>(), near);
        assert_eq!(got.len(), 3);
        assert!(got.contains(&RingElement::zero(zw)));
        assert!(got.contains(&RingElement::new(zw, 1, 1)));
    }

    #[test]
    fn quantize_full_rejects_bad_tol() {
        assert!(quantize_full(RingId::GaussianZI, c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn quantize_vector_examples() {
        let zi = RingId::GaussianZI;
        let got = quantize_vector(zi, &[c(0.9, 0.1), c(2.1, -1.9)]).unwrap();
        assert_eq!(got, vec![RingElement::new(zi, 1, 0), RingElement::new(zi, 2, -2)]);
        let got = quantize_vector(zi, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(got.iter().all(|e| e.is_zero()));
        let zw = RingId::EisensteinZOmega;
        let w = RingElement::new(zw, 0, 1);
        let got = quantize_vector(zw, &[c(1.0, 0.0), w.embedding()]).unwrap();
        assert_eq!(got, vec![RingElement::one(zw), w]);
    }

    #[test]
    fn units_are_closed_and_unimodular() {
        for ring in RingId::ALL {
            let us = units(ring);
            assert_eq!(us.len(), ring.unit_count());
            for u in &us {
                assert!((u.embedding().norm() - 1.0).abs() < 1e-12);
                for v in &us {
                    assert!(us.contains(&(*u * *v)), "{u} * {v} not a unit");
                }
            }
            let spec = ring.spec();
            assert!((spec.phase_sector - 2.0 * std::f64::consts::PI / spec.units.len() as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_constants() {
        let zi = RingId::GaussianZI.spec();
        assert_eq!(zi.fundamental_area, 1.0);
        assert_eq!(zi.edge_direction_count, 2);
        for v in &zi.cell_vertex_offsets {
            assert!((v.re.abs() - 0.5).abs() < 1e-15 && (v.im.abs() - 0.5).abs() < 1e-15);
        }
        let zw = RingId::EisensteinZOmega.spec();
        assert!((zw.fundamental_area - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(zw.edge_direction_count, 3);
        let want = [
            c(0.5, SQRT3 / 6.0),
            c(0.0, SQRT3 / 3.0),
            c(-0.5, SQRT3 / 6.0),
            c(-0.5, -SQRT3 / 6.0),
            c(0.0, -SQRT3 / 3.0),
            c(0.5, -SQRT3 / 6.0),
        ];
        for (v, w) in zw.cell_vertex_offsets.iter().zip(want) {
            assert!((v - w).norm() < 1e-14, "{v} vs {w}");
        }
    }

    #[test]
    fn idempotent_on_lattice_points() {
        for ring in RingId::ALL {
            for (c1, c2) in lattice_points_in_rect(ring, -100.0, 100.0, -100.0, 100.0) {
                let a = RingElement::new(ring, c1, c2);
                if a.embedding().norm() > 100.0 {
                    continue;
                }
                assert_eq!(quantize(ring, a.embedding()).unwrap(), a);
            }
        }
    }

    #[test]
    fn nearest_point_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ring in RingId::ALL {
            for _ in 0..10_000 {
                let z = c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let q = quantize(ring, z).unwrap();
                let d = (z - q.embedding()).norm();
                let (dmin, _) = brute_nearest(ring, z, 3.0);
                assert!(d <= dmin + 1e-12, "{ring} {z}: {d} > {dmin}");
                assert!(d <= ring.covering_radius() + 1e-12);
                let full = quantize_full_default(ring, z).unwrap();
                assert!(full.contains(&q));
                for e in &full {
                    assert!((z - e.embedding()).norm() <= dmin + default_tol(z) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn full_quantizer_counts_at_singular_points() {
        let zi = RingId::GaussianZI;
        assert_eq!(quantize_full_default(zi, c(3.5, -2.0)).unwrap().len(), 2);
        assert_eq!(quantize_full_default(zi, c(3.5, -2.5)).unwrap().len(), 4);
        let zw = RingId::EisensteinZOmega;
        // midpoint of 0 and 1: an edge point
        assert_eq!(quantize_full_default(zw, c(0.5, 0.0)).unwrap().len(), 2);
        for off in zw.cell_vertex_offsets() {
            let a = RingElement::new(zw, 4, -7).embedding();
            assert_eq!(quantize_full_default(zw, a + off).unwrap().len(), 3);
        }
    }

    #[test]
    fn ties_break_toward_larger_embedding() {
        let zi = RingId::GaussianZI;
        assert_eq!(quantize(zi, c(0.5, -0.5)).unwrap(), RingElement::new(zi, 1, 0));
        let zw = RingId::EisensteinZOmega;
        // equidistant from 0 and 1: prefer 1
        assert_eq!(quantize(zw, c(0.5, 0.0)).unwrap(), RingElement::one(zw));
    }

    #[test]
    fn orbit_representative_is_in_sector() {
        for ring in RingId::ALL {
            for (c1, c2) in lattice_points_in_rect(ring, -6.0, 6.0, -6.0, 6.0) {
                let a = RingElement::new(ring, c1, c2);
                if a.is_zero() {
                    continue;
                }
                let r = a.orbit_representative();
                let ph = r.embedding().arg();
                assert!(ph >= -1e-12 && ph < ring.phase_sector() - 1e-12, "{a} -> {r} phase {ph}");
                assert_eq!(r.norm_sq(), a.norm_sq());
            }
        }
    }

    #[test]
    fn eisenstein_norm_is_exact() {
        let zw = RingId::EisensteinZOmega;
        for (c1, c2) in lattice_points_in_rect(zw, -5.0, 5.0, -5.0, 5.0) {
            let a = RingElement::new(zw, c1, c2);
            assert!((a.norm_sq() as f64 - a.embedding().norm_sqr()).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_lines_contain_cell_edges() {
        // midpoint between a and a+u must lie on a family line
        for ring in RingId::ALL {
            let fams = ring.edge_families();
            for u in ring.units() {
                let a = RingElement::new(ring, 2, 3);
                let mid = (a.embedding() + (a + u).embedding()) * 0.5;
                let on_line = fams.iter().any(|f| {
                    let v = (mid * f.dir.conj()).re;
                    let k = (v - f.offset) / f.spacing;
                    (k - k.round()).abs() < 1e-12 && (u.embedding() * f.dir.conj()).im.abs() < 1e-12
                });
                assert!(on_line, "{ring} unit {u}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unit_multiplication_preserves_norm(c1 in -50i64..50, c2 in -50i64..50, zw in any::<bool>()) {
                let ring = if zw { RingId::EisensteinZOmega } else { RingId::GaussianZI };
                let a = RingElement::new(ring, c1, c2);
                for u in ring.units() {
                    let b = u * a;
                    prop_assert_eq!(b.norm_sq(), a.norm_sq());
                    prop_assert!(((u.embedding() * a.embedding()) - b.embedding()).norm() < 1e-9);
                }
            }

            #[test]
            fn quantize_commutes_with_units_up_to_ties(re in -20.0f64..20.0, im in -20.0f64..20.0, zw in any::<bool>()) {
                let ring = if zw { RingId::EisensteinZOmega } else { RingId::GaussianZI };
                let z = Complex64::new(re, im);
                let q = quantize(ring, z).unwrap();
                for u in ring.units() {
                    let qu = quantize(ring, u.embedding() * z).unwrap();
                    let du = (u.embedding() * z - qu.embedding()).norm();
                    let d = (z - q.embedding()).norm();
                    prop_assert!((du - d).abs() < 1e-9);
                }
            }
        }
    }
}
