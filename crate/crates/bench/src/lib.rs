//! Shared inputs for the criterion benches.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random bits.
pub fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

/// Seeded unit-modulus symbols.
pub fn random_symbols(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect()
}

/// Noisy LLRs for a codeword, BPSK at the given noise deviation.
pub fn llrs_for(codeword: &[u8], sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    codeword
        .iter()
        .map(|&b| {
            let x = if b == 0 { 1.0 } else { -1.0 };
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
            let n = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            2.0 * (x + sigma * n) / (sigma * sigma)
        })
        .collect()
}
