//! Computation rate, MMSE scaling and effective noise for a channel and a
//! candidate coefficient vector.
//!
//! Rates are in bits per complex dimension. For a coefficient vector `a` the
//! rate is `log⁺(1 / aᴴMa)` with `M = I − SNR/(1 + SNR‖h‖²) · hhᴴ`, which is the
//! closed form of the effective-noise expression at the MMSE scaling factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::rings::{quantize_vector, ComplexScalar, RingElement, RingId};

/// A flat-fading channel vector with its operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    h: Vec<ComplexScalar>,
    snr: f64,
    power_p: f64,
    sigma2: f64,
}

impl Channel {
    /// Channel with unit signal power and noise variance `1 / snr`.
    pub fn new(h: Vec<ComplexScalar>, snr: f64) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidArgument(format!("SNR must be positive and finite, got {snr}")));
        }
        Self::with_power(h, 1.0, 1.0 / snr)
    }

    pub fn with_power(h: Vec<ComplexScalar>, power_p: f64, sigma2: f64) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidArgument("channel must have at least one user".into()));
        }
        if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("channel coefficients must be finite".into()));
        }
        if !(power_p > 0.0 && power_p.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "power and noise variance must be positive, got P={power_p}, sigma2={sigma2}"
            )));
        }
        Ok(Self { h, snr: power_p / sigma2, power_p, sigma2 })
    }

    pub fn from_db(h: Vec<ComplexScalar>, snr_db: f64) -> Result<Self> {
        Self::new(h, db_to_linear(snr_db))
    }

    pub fn h(&self) -> &[ComplexScalar] {
        &self.h
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }

    pub fn power_p(&self) -> f64 {
        self.power_p
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest `|h_l|²` over the users.
    pub fn max_gain_sq(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    }

    /// `√SNR`, the modulus bound on useful scaling factors.
    pub fn alpha_radius(&self) -> f64 {
        self.snr.sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A coefficient vector over one ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffVector {
    ring: RingId,
    a: Vec<RingElement>,
}

impl CoeffVector {
    pub fn new(ring: RingId, a: Vec<RingElement>) -> Result<Self> {
        if let Some(e) = a.iter().find(|e| e.ring != ring) {
            return Err(Error::InvalidArgument(format!("element {e} is not in {ring}")));
        }
        Ok(Self { ring, a })
    }

    pub fn from_coords(ring: RingId, coords: &[(i64, i64)]) -> Self {
        Self { ring, a: coords.iter().map(|&(c1, c2)| RingElement::new(ring, c1, c2)).collect() }
    }

    pub fn ring(&self) -> RingId {
        self.ring
    }

    pub fn elements(&self) -> &[RingElement] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|e| e.is_zero())
    }

    pub fn coords(&self) -> Vec<(i64, i64)> {
        self.a.iter().map(|e| (e.c1, e.c2)).collect()
    }

    pub fn embedding(&self) -> Vec<ComplexScalar> {
        self.a.iter().map(|e| e.embedding()).collect()
    }

    /// Exact squared norm `‖a‖²`.
    pub fn norm_sq(&self) -> i64 {
        self.a.iter().map(|e| e.norm_sq()).sum()
    }

    /// Componentwise product `u · a`.
    pub fn scaled(&self, u: RingElement) -> CoeffVector {
        Self { ring: self.ring, a: self.a.iter().map(|&e| u * e).collect() }
    }
}

impl std::fmt::Display for CoeffVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.a.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub rate: f64,
    pub alpha: ComplexScalar,
    pub sigma2_eff: f64,
    pub self_noise: f64,
    pub scaled_gaussian_noise: f64,
    /// Set when the induced coefficient vector is zero; the rate is then 0.
    pub zero_vector: bool,
}

fn check_pair(ch: &Channel, a: &CoeffVector) -> Result<()> {
    if a.len() != ch.users() {
        return Err(Error::InvalidArgument(format!(
            "coefficient length {} does not match {} users",
            a.len(),
            ch.users()
        )));
    }
    if a.is_zero() {
        return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
    }
    Ok(())
}

fn check_alpha(alpha: ComplexScalar) -> Result<()> {
    if alpha.re.is_finite() && alpha.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("scaling factor {alpha} is not finite")))
    }
}

/// `hᴴa`.
fn h_herm_a(h: &[ComplexScalar], a: &[ComplexScalar]) -> ComplexScalar {
    h.iter().zip(a).map(|(hl, al)| hl.conj() * al).sum()
}

pub fn mmse_alpha(ch: &Channel, a: &CoeffVector) -> Result<ComplexScalar> {
    check_pair(ch, a)?;
    let emb = a.embedding();
    let snr = ch.snr();
    Ok(h_herm_a(ch.h(), &emb) * snr / (1.0 + snr * ch.norm_sq()))
}

/// Noise decomposition `(self, scaled Gaussian)` at a given scaling factor.
fn noise_parts(ch: &Channel, alpha: ComplexScalar, a: &[ComplexScalar]) -> (f64, f64) {
    let mismatch: f64 = ch.h().iter().zip(a).map(|(hl, al)| (alpha * hl - al).norm_sqr()).sum();
    (ch.power_p() * mismatch, alpha.norm_sqr() * ch.sigma2())
}

#[inline]
pub(crate) fn rate_from_quadratic(q: f64) -> f64 {
    // M is positive definite, so q > 0 for every nonzero a
    (-q.max(f64::MIN_POSITIVE).log2()).max(0.0)
}

/// Rate of a coefficient vector at its MMSE scaling factor.
pub fn rate_of_pair(ch: &Channel, a: &CoeffVector) -> Result<RateResult> {
    check_pair(ch, a)?;
    let kernel = RateKernel::new(ch);
    let q = kernel.quadratic(&a.coords(), a.ring(), &mut FlopCounter::new());
    let alpha = mmse_alpha(ch, a)?;
    let (self_noise, scaled_gaussian_noise) = noise_parts(ch, alpha, &a.embedding());
    Ok(RateResult {
        rate: rate_from_quadratic(q),
        alpha,
        sigma2_eff: self_noise + scaled_gaussian_noise,
        self_noise,
        scaled_gaussian_noise,
        zero_vector: false,
    })
}

/// Rate of an explicit `(α, a)` pair: `log⁺(P / (|α|²σ² + P‖αh − a‖²))`.
pub fn rate_at_alpha(ch: &Channel, alpha: ComplexScalar, a: &CoeffVector) -> Result<RateResult> {
    check_alpha(alpha)?;
    if a.len() != ch.users() {
        return Err(Error::InvalidArgument("coefficient length does not match channel".into()));
    }
    let (self_noise, scaled_gaussian_noise) = noise_parts(ch, alpha, &a.embedding());
    let sigma2_eff = self_noise + scaled_gaussian_noise;
    let zero_vector = a.is_zero();
    let rate = if zero_vector { 0.0 } else { (ch.power_p() / sigma2_eff).log2().max(0.0) };
    Ok(RateResult { rate, alpha, sigma2_eff, self_noise, scaled_gaussian_noise, zero_vector })
}

/// Rate as a function of the scaling factor alone, with `a = Q(αh)`.
///
/// A zero induced vector yields rate 0 with `zero_vector` set.
pub fn rate_of_alpha(ch: &Channel, alpha: ComplexScalar, ring: RingId) -> Result<(RateResult, CoeffVector)> {
    check_alpha(alpha)?;
    let scaled: Vec<_> = ch.h().iter().map(|hl| alpha * hl).collect();
    let a = CoeffVector::new(ring, quantize_vector(ring, &scaled)?)?;
    let r = rate_at_alpha(ch, alpha, &a)?;
    Ok((r, a))
}

/// `|α|²σ² + P‖αh − Q(αh)‖²`.
pub fn effective_noise(ch: &Channel, alpha: ComplexScalar, ring: RingId) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(RateKernel::new(ch).effective_noise(alpha, ring, &mut Vec::new(), &mut FlopCounter::new()))
}

/// The matrix `M` of the quadratic form and its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct Gram {
    pub m: DMatrix<Complex64>,
    pub chol: DMatrix<Complex64>,
}

pub fn gram_matrix(ch: &Channel) -> Result<Gram> {
    let n = ch.users();
    let c = ch.snr() / (ch.snr() * ch.norm_sq() + 1.0);
    let h = ch.h();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        id - h[i] * h[j].conj() * c
    });
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::Internal("M is not numerically positive definite".into()))?
        .l();
    Ok(Gram { m, chol })
}

/// Precomputed per-channel state for the inner loops of the selectors.
#[derive(Debug, Clone)]
pub(crate) struct RateKernel<'a> {
    pub ch: &'a Channel,
    /// `SNR / (1 + SNR‖h‖²)`
    pub c: f64,
}

impl<'a> RateKernel<'a> {
    pub fn new(ch: &'a Channel) -> Self {
        let c = ch.snr() / (1.0 + ch.snr() * ch.norm_sq());
        Self { ch, c }
    }

    /// `aᴴMa = ‖a‖² − c·|hᴴa|²` for exact coordinates.
    #[inline]
    pub fn quadratic(&self, coords: &[(i64, i64)], ring: RingId, flops: &mut FlopCounter) -> f64 {
        let mut norm = 0.0;
        let mut s = Complex64::new(0.0, 0.0);
        for (hl, &(c1, c2)) in self.ch.h().iter().zip(coords) {
            let al = ring.embed_f64(c1 as f64, c2 as f64);
            s += hl.conj() * al;
            norm += al.norm_sqr();
        }
        let n = coords.len() as u64;
        // hᴴa and ‖a‖² as multiply-accumulates, then |·|², scaling and one subtraction
        flops.mac(2 * n);
        flops.mul(2);
        flops.add(1);
        norm - self.c * s.norm_sqr()
    }

    /// Effective noise at `α` with the nearest-point vector, which is written
    /// to `key`.
    #[inline]
    pub fn effective_noise(&self, alpha: ComplexScalar, ring: RingId, key: &mut Vec<(i64, i64)>, flops: &mut FlopCounter) -> f64 {
        let mut mismatch = 0.0;
        key.clear();
        for hl in self.ch.h() {
            let z = alpha * hl;
            let (c1, c2) = ring.nearest_coords(z);
            key.push((c1, c2));
            mismatch += (z - ring.embed_f64(c1 as f64, c2 as f64)).norm_sqr();
        }
        let n = self.ch.users() as u64;
        // αh (n muls), residual (n adds), squared norm (n macs), |α|²σ² (2 muls), final sum
        flops.mul(n + 2);
        flops.add(n + 1);
        flops.mac(n);
        alpha.norm_sqr() * self.ch.sigma2() + self.ch.power_p() * mismatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    fn zi(coords: &[(i64, i64)]) -> CoeffVector {
        CoeffVector::from_coords(RingId::GaussianZI, coords)
    }

    /// σ²_eff(α) for a fixed `a`, straight from the definition.
    fn sigma_eff(ch: &Channel, alpha: ComplexScalar, a: &CoeffVector) -> f64 {
        let (s, g) = noise_parts(ch, alpha, &a.embedding());
        s + g
    }

    #[test]
    fn mmse_alpha_examples() {
        let ch = Channel::new(vec![c(1.0, 0.0)], 10.0).unwrap();
        assert!((mmse_alpha(&ch, &zi(&[(1, 0)])).unwrap() - c(10.0 / 11.0, 0.0)).norm() < 1e-15);
        let ch = Channel::new(vec![c(1.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        assert!((mmse_alpha(&ch, &zi(&[(1, 0), (1, 0)])).unwrap() - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mmse_alpha_minimizes_effective_noise_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h: Vec<_> = (0..3).map(|_| c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))).collect();
            let ch = Channel::new(h, rng.random_range(1.0..100.0)).unwrap();
            let a = zi(&[(rng.random_range(-3..4), 1), (rng.random_range(-3..4), 0), (0, rng.random_range(-3..4))]);
            let am = mmse_alpha(&ch, &a).unwrap();
            let best = sigma_eff(&ch, am, &a);
            for i in -50..=50 {
                for j in -50..=50 {
                    let al = am + c(i as f64 * 1e-3, j as f64 * 1e-3);
                    assert!(sigma_eff(&ch, al, &a) >= best - 1e-12);
                }
            }
        }
    }

    #[test]
    fn mmse_alpha_errors() {
        let ch = Channel::new(vec![c(1.0, 0.0), c(0.5, 0.0)], 1.0).unwrap();
        assert!(matches!(mmse_alpha(&ch, &zi(&[(0, 0), (0, 0)])), Err(Error::InvalidArgument(_))));
        assert!(matches!(mmse_alpha(&ch, &zi(&[(1, 0)])), Err(Error::InvalidArgument(_))));
        assert!(rate_of_pair(&ch, &zi(&[(0, 0), (0, 0)])).is_err());
    }

    #[test]
    fn single_user_rate_is_capacity() {
        for snr in [0.1, 1.0, 10.0, 1000.0] {
            let ch = Channel::new(vec![c(1.0, 0.0)], snr).unwrap();
            let r = rate_of_pair(&ch, &zi(&[(1, 0)])).unwrap();
            assert!((r.rate - (1.0 + snr).log2()).abs() < 1e-12);
        }
        let ch = Channel::new(vec![c(1.0, 0.0)], 1.0).unwrap();
        assert!((rate_of_pair(&ch, &zi(&[(1, 0)])).unwrap().rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dual_formula_on_two_user_example() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ch = Channel::new(vec![c(1.0, 0.0), c(s, s)], 1e3).unwrap();
        let a = zi(&[(2, 2), (0, 3)]);
        let r5 = rate_of_pair(&ch, &a).unwrap();
        let r3 = rate_at_alpha(&ch, mmse_alpha(&ch, &a).unwrap(), &a).unwrap();
        assert!((r5.rate - r3.rate).abs() <= 1e-9 * r5.rate.max(1e-12));
        assert!((r5.sigma2_eff - r5.self_noise - r5.scaled_gaussian_noise).abs() <= 1e-15);
    }

    #[test]
    fn rate_of_alpha_examples() {
        let ch = Channel::new(vec![c(1.0, 0.0)], 10.0).unwrap();
        let (r, a) = rate_of_alpha(&ch, c(1.0, 0.0), RingId::GaussianZI).unwrap();
        assert_eq!(a, zi(&[(1, 0)]));
        // α = 1 is not the MMSE factor; the rate is log⁺(P / σ²) = log₂ SNR
        assert!((r.rate - 10f64.log2()).abs() < 1e-12);
        let (r, a) = rate_of_alpha(&ch, c(0.0, 0.0), RingId::GaussianZI).unwrap();
        assert!(a.is_zero() && r.zero_vector && r.rate == 0.0);
        assert!(rate_of_alpha(&ch, c(f64::NAN, 0.0), RingId::GaussianZI).is_err());
    }

    #[test]
    fn effective_noise_examples() {
        let ch = Channel::new(vec![c(1.0, 0.0)], 4.0).unwrap();
        assert_eq!(effective_noise(&ch, c(0.0, 0.0), RingId::GaussianZI).unwrap(), 0.0);
        assert!((effective_noise(&ch, c(1.0, 0.0), RingId::GaussianZI).unwrap() - ch.sigma2()).abs() < 1e-15);
    }

    #[test]
    fn effective_noise_argmin_is_rate_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h: Vec<_> = (0..4).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let ch = Channel::new(h, 200.0).unwrap();
        let mut best_noise = (f64::INFINITY, 0usize);
        let mut best_rate = (-1.0, 0usize);
        let mut first_nonzero = true;
        for i in 0..2000 {
            let al = c(rng.random_range(0.0..14.0), rng.random_range(0.0..14.0));
            let (r, a) = rate_of_alpha(&ch, al, RingId::GaussianZI).unwrap();
            if a.is_zero() {
                continue;
            }
            let n = effective_noise(&ch, al, RingId::GaussianZI).unwrap();
            if n < best_noise.0 {
                best_noise = (n, i);
            }
            if r.rate > best_rate.0 || first_nonzero {
                best_rate = (r.rate, i);
                first_nonzero = false;
            }
        }
        if best_rate.0 > 0.0 {
            assert_eq!(best_noise.1, best_rate.1);
        }
    }

    #[test]
    fn gram_examples() {
        let ch = Channel::new(vec![c(1.0, 0.0)], 1.0).unwrap();
        let g = gram_matrix(&ch).unwrap();
        assert!((g.m[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((g.chol[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);

        let ch = Channel::new(vec![c(1.0, 0.0), c(0.0, 0.0)], 1e-9).unwrap();
        let g = gram_matrix(&ch).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((g.m - id).norm() < 1e-6);
    }

    #[test]
    fn gram_eigenvalues_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let h: Vec<_> = (0..5).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
            let ch = Channel::new(h, rng.random_range(0.1..1e4)).unwrap();
            let g = gram_matrix(&ch).unwrap();
            let recon = &g.chol * g.chol.adjoint();
            assert!((&recon - &g.m).norm() <= 1e-9 * g.m.norm());
            let eig = nalgebra::SymmetricEigen::new(g.m.clone());
            for &ev in eig.eigenvalues.iter() {
                assert!(ev > 0.0 && ev <= 1.0 + 1e-12, "eigenvalue {ev}");
            }
        }
    }

    #[test]
    fn zero_rate_beyond_sqrt_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let h: Vec<_> = (0..3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let ch = Channel::new(h, rng.random_range(1.0..1000.0)).unwrap();
            let r = ch.alpha_radius() * rng.random_range(1.0..3.0);
            let al = Complex64::from_polar(r, rng.random_range(0.0..6.3));
            let (res, _) = rate_of_alpha(&ch, al, RingId::EisensteinZOmega).unwrap();
            assert_eq!(res.rate, 0.0);
        }
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::new(vec![], 1.0).is_err());
        assert!(Channel::new(vec![c(1.0, 0.0)], 0.0).is_err());
        assert!(Channel::new(vec![c(f64::NAN, 0.0)], 1.0).is_err());
        let ch = Channel::with_power(vec![c(1.0, 0.0)], 4.0, 2.0).unwrap();
        assert_eq!(ch.snr(), 2.0);
    }
}
