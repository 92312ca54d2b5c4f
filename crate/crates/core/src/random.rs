//! Seeded Rayleigh-fading channel draws.
//!
//! Every trial gets its own ChaCha8 stream: the generator is seeded from the
//! experiment seed and the stream number is the trial index, so trial `k`
//! draws the same channel regardless of how many trials run or in what order.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::rate::Channel;
use crate::rings::ComplexScalar;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `L` i.i.d. 𝒞𝒩(0, 1) gains (real and imaginary parts each of variance 1/2).
pub fn gen_gains<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Vec<ComplexScalar> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..users)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

pub fn gen_channel<R: Rng + ?Sized>(users: usize, snr: f64, rng: &mut R) -> Result<Channel> {
    Channel::new(gen_gains(users, rng), snr)
}

/// The channel of trial `trial` under `seed`.
pub fn trial_channel(seed: u64, trial: u64, users: usize, snr: f64) -> Result<Channel> {
    gen_channel(users, snr, &mut trial_rng(seed, trial))
}
