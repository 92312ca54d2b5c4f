//! Complex LLL reduction of the lattice generated by `Lᴴ` (with `M = LLᴴ`),
//! whose short vectors `Lᴴa` are the small values of `aᴴMa`.
//!
//! Size reduction rounds with the nearest-point quantizer of the ring, so the
//! same routine reduces ℤ[i]- and ℤ[ω]-lattices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_gains, Evaluator, SelectionResult};
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::rate::{gram_matrix, Channel};
use crate::rings::{RingElement, RingId};

pub const LLL_DELTA: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct ReducedBasis {
    /// Reduced basis vectors as columns.
    pub basis: DMatrix<Complex64>,
    /// `basis = input · transform`, exact and unimodular over the ring.
    pub transform: Vec<Vec<RingElement>>,
    pub iterations: usize,
}

impl ReducedBasis {
    pub fn transform_matrix(&self) -> DMatrix<Complex64> {
        let n = self.transform.len();
        DMatrix::from_fn(n, n, |i, j| self.transform[j][i].embedding())
    }
}

/// Gram–Schmidt vectors and coefficients `μ[k][j] = ⟨b*_j, b_k⟩ / ‖b*_j‖²`.
fn gram_schmidt(b: &[Vec<Complex64>], flops: &mut FlopCounter) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = b.len();
    let dim = b[0].len();
    let mut star: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut mu = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for k in 0..n {
        let mut v = b[k].clone();
        for j in 0..k {
            let ip: Complex64 = star[j].iter().zip(&b[k]).map(|(s, x)| s.conj() * x).sum();
            mu[k][j] = ip / norms[j];
            for (vi, si) in v.iter_mut().zip(&star[j]) {
                *vi -= mu[k][j] * si;
            }
            flops.mac(2 * dim as u64);
            flops.mul(1);
        }
        norms.push(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
        flops.mac(dim as u64);
        star.push(v);
    }
    (norms, mu)
}

/// LLL-reduces the columns of `basis` with Lovász parameter `delta`.
pub fn reduce_basis(basis: &DMatrix<Complex64>, ring: RingId, delta: f64, flops: &mut FlopCounter) -> Result<ReducedBasis> {
    let n = basis.ncols();
    if n == 0 || basis.nrows() == 0 {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("LLL delta must be in (1/4, 1], got {delta}")));
    }
    let mut b: Vec<Vec<Complex64>> = (0..n).map(|j| basis.column(j).iter().copied().collect()).collect();
    let mut t: Vec<Vec<RingElement>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { RingElement::one(ring) } else { RingElement::zero(ring) }).collect())
        .collect();
    let cap = 10_000 * n * n;
    let mut iterations = 0;
    let mut k = 1;
    while k < n {
        iterations += 1;
        if iterations > cap {
            return Err(Error::Internal(format!("LLL did not terminate within {cap} iterations")));
        }
        let (_, mu) = gram_schmidt(&b, flops);
        // size reduction of b_k, updating μ_k in place
        let mut mu_k = mu[k].clone();
        for j in (0..k).rev() {
            let (c1, c2) = ring.nearest_coords(mu_k[j]);
            if c1 == 0 && c2 == 0 {
                continue;
            }
            let r = RingElement::new(ring, c1, c2);
            let re = r.embedding();
            let (bj, tj) = (b[j].clone(), t[j].clone());
            for (x, y) in b[k].iter_mut().zip(&bj) {
                *x -= re * y;
            }
            for (x, &y) in t[k].iter_mut().zip(&tj) {
                *x = *x - r * y;
            }
            mu_k[j] -= re;
            for i in 0..j {
                mu_k[i] -= re * mu[j][i];
            }
            flops.mac((b[k].len() + j) as u64);
        }
        let (norms, _) = gram_schmidt(&b, flops);
        let lovasz = norms[k] >= (delta - mu_k[k - 1].norm_sqr()) * norms[k - 1];
        flops.mul(2);
        flops.add(1);
        if lovasz {
            k += 1;
        } else {
            b.swap(k, k - 1);
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    let rows = basis.nrows();
    let reduced = DMatrix::from_fn(rows, n, |i, j| b[j][i]);
    Ok(ReducedBasis { basis: reduced, transform: t, iterations })
}

/// Best column of the unimodular transform that reduces `Lᴴ`.
pub fn clll_select(ch: &Channel, ring: RingId) -> Result<SelectionResult> {
    check_gains(ch)?;
    let gram = gram_matrix(ch)?;
    let mut flops = FlopCounter::new();
    let n = ch.users() as u64;
    // Cholesky factorization
    flops.mac(n * n * n / 3 + n);
    let lh = gram.chol.adjoint();
    let red = reduce_basis(&lh, ring, LLL_DELTA, &mut flops)?;
    let mut ev = Evaluator::new(ch, ring);
    ev.flops = flops;
    for col in &red.transform {
        let key: Vec<(i64, i64)> = col.iter().map(|e| (e.c1, e.c2)).collect();
        ev.offer_key(&key);
    }
    ev.finish(ch)
}
