//! Seeded random channels and auxiliary chains for empirical validation
//! corpora. Everything here is deterministic given the RNG state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::Channel;
use crate::info::AuxChain;

/// A random probability vector with strictly positive entries.
pub fn random_pmf<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    // exponential draws normalize to a Dirichlet(1) sample
    let mut v: Vec<f64> = (0..dim)
        .map(|_| (-(1.0 - rng.gen::<f64>()).ln()).max(1e-12))
        .collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    v
}

/// A random channel with dense conditional rows.
pub fn random_channel<R: Rng>(
    rng: &mut R,
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    z_size: usize,
) -> Channel {
    let rows = x1_size * x2_size;
    let mut p = Vec::with_capacity(rows * y_size * z_size);
    for _ in 0..rows {
        p.extend(random_pmf(rng, y_size * z_size));
    }
    Channel::new(x1_size, x2_size, y_size, z_size, 0, p).expect("random channel is valid")
}

/// A random auxiliary chain compatible with the channel input alphabets.
pub fn random_aux_chain<R: Rng>(
    rng: &mut R,
    q1_size: usize,
    u1_size: usize,
    u2_size: usize,
    x1_size: usize,
    x2_size: usize,
) -> AuxChain {
    AuxChain {
        q1_size,
        u1_size,
        u2_size,
        pmf_q1: random_pmf(rng, q1_size),
        pmf_u1_given_q1: (0..q1_size).map(|_| random_pmf(rng, u1_size)).collect(),
        pmf_u2: random_pmf(rng, u2_size),
        pmf_x1_given_u1: (0..u1_size).map(|_| random_pmf(rng, x1_size)).collect(),
        pmf_x2_given_u2: (0..u2_size).map(|_| random_pmf(rng, x2_size)).collect(),
    }
}

/// The seeded generator used across validation corpora.
pub fn corpus_rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
