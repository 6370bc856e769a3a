//! AWGN channel with Eb/N0 calibration.
//!
//! With unit average symbol energy, unit-energy taps and transmit gain
//! `sqrt(N_up)` (mean sample power 1), the per-dimension noise variance per
//! sample for a given Eb/N0 is
//!
//! ```text
//! σ² = N_up / (2 · r · log2(M) · Eb/N0)
//! ```
//!
//! After the matched filter removes the transmit gain, each symbol estimate
//! carries noise of variance `σ² / N_up` per dimension, i.e. `N0 / 2` with
//! `Es / N0 = r · log2(M) · Eb/N0`. Eb counts information bits.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::waveform::WaveformBuffer;

/// Parameters behind one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ebn0_db: f64,
    pub bits_per_symbol: f64,
    pub code_rate: f64,
    pub n_up: usize,
}

impl NoiseSpec {
    pub fn sigma(&self) -> Result<f64> {
        noise_sigma(self.ebn0_db, self.bits_per_symbol, self.code_rate, self.n_up)
    }

    /// Per-dimension noise variance of the matched-filter symbol estimates.
    pub fn symbol_variance(&self) -> Result<f64> {
        Ok(self.sigma()?.powi(2) / self.n_up as f64)
    }
}

/// Per-dimension noise standard deviation per sample.
pub fn noise_sigma(ebn0_db: f64, bits_per_symbol: f64, code_rate: f64, n_up: usize) -> Result<f64> {
    if !(bits_per_symbol > 0.0) || !(code_rate > 0.0) || n_up == 0 || !ebn0_db.is_finite() {
        return Err(Error::Domain(format!(
            "noise_sigma needs positive parameters (bits/sym {bits_per_symbol}, rate {code_rate}, N_up {n_up}, Eb/N0 {ebn0_db} dB)"
        )));
    }
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    Ok((n_up as f64 / (2.0 * code_rate * bits_per_symbol * ebn0)).sqrt())
}

/// Generator for one Monte Carlo stream. Streams with different
/// `(point, trial)` are independent for the same seed, so results do not
/// depend on how trials are scheduled across threads.
pub fn trial_rng(seed: u64, point: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

/// Adds complex white Gaussian noise of variance `sigma²` per dimension.
pub fn add_awgn_with<R: Rng + ?Sized>(samples: &mut [Complex64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for s in samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(re, im) * sigma;
    }
}

/// Deterministic given `(input, sigma, seed)`; `sigma = 0` returns the input.
pub fn add_awgn(mut wave: WaveformBuffer, sigma: f64, seed: u64) -> Result<WaveformBuffer> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_awgn_with(&mut wave.samples, sigma, &mut rng);
    Ok(wave)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_constellation, Scheme};
    use crate::metrics::theory::mpsk_ber;

    fn noise_buffer(n: usize) -> WaveformBuffer {
        WaveformBuffer::new(vec![Complex64::new(0.0, 0.0); n], 1.0, 1)
    }

    #[test]
    fn textbook_calibration() {
        let s = noise_sigma(0.0, 1.0, 1.0, 1).unwrap();
        assert!((s * s - 0.5).abs() < 1e-15);
        let s4 = noise_sigma(3.0, 4.0, 0.75, 4).unwrap();
        let s8 = noise_sigma(3.0, 4.0, 0.75, 8).unwrap();
        assert!((s8 * s8 / (s4 * s4) - 2.0).abs() < 1e-12);
        assert!(noise_sigma(3.0, 0.0, 0.75, 4).is_err());
        assert!(noise_sigma(3.0, 3.0, -1.0, 4).is_err());
    }

    #[test]
    fn zero_sigma_is_identity() {
        let w = WaveformBuffer::new(vec![Complex64::new(0.3, -1.0); 10], 4.0, 4);
        assert_eq!(add_awgn(w.clone(), 0.0, 9).unwrap(), w);
        assert!(add_awgn(w, -1.0, 9).is_err());
    }

    #[test]
    fn same_seed_same_noise() {
        let a = add_awgn(noise_buffer(1000), 0.5, 77).unwrap();
        let b = add_awgn(noise_buffer(1000), 0.5, 77).unwrap();
        let c = add_awgn(noise_buffer(1000), 0.5, 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut r1 = trial_rng(5, 1, 2);
        let mut r2 = trial_rng(5, 2, 1);
        assert_ne!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn moments_whiteness_and_gaussianity() {
        let sigma = 0.8;
        let n = 1_000_000;
        let w = add_awgn(noise_buffer(n), sigma, 2024).unwrap();
        let x: Vec<f64> = w.samples.iter().map(|s| s.re).collect();
        let var = w.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var / (2.0 * sigma * sigma) - 1.0).abs() < 0.02);

        let r0: f64 = x.iter().map(|v| v * v).sum();
        for lag in 1..=8 {
            let r: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
            assert!((r / r0).abs() < 0.01, "lag {lag}: {}", r / r0);
        }
        let m2 = r0 / n as f64;
        let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
        let excess = m4 / (m2 * m2) - 3.0;
        assert!(excess.abs() < 0.05, "{excess}");
    }

    #[test]
    fn coherent_8psk_matches_closed_form() {
        // Symbol-level chain (N_up = 1) against the nearest-neighbour Gray
        // approximation Pb ≈ (2/3)·Q(sqrt(6·Eb/N0)·sin(π/8)).
        let spec = build_constellation(Scheme::Psk, 8).unwrap();
        let ebn0_db = 10.0;
        let sigma = noise_sigma(ebn0_db, 3.0, 1.0, 1).unwrap();
        let mut rng = trial_rng(99, 0, 0);
        let nsym = 10_000_000 / 3;
        let mut errors = 0usize;
        let mut bits = vec![0u8; 3];
        for _ in 0..nsym {
            for b in &mut bits {
                *b = rng.random_range(0..2);
            }
            let mut s = spec.map_bits(&bits).unwrap();
            add_awgn_with(&mut s, sigma, &mut rng);
            errors += spec
                .demap_hard(&s)
                .iter()
                .zip(&bits)
                .filter(|(a, b)| a != b)
                .count();
        }
        let measured = errors as f64 / (3 * nsym) as f64;
        let theory = mpsk_ber(8, ebn0_db);
        assert!((measured / theory - 1.0).abs() < 0.1, "{measured} vs {theory}");
    }
}
