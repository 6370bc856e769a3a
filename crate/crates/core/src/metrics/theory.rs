//! Closed-form AWGN error-rate approximations used as reference curves.

use std::f64::consts::PI;

pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Gray-coded coherent M-PSK, nearest-neighbour approximation.
pub fn mpsk_ber(m: usize, ebn0_db: f64) -> f64 {
    let k = (m as f64).log2();
    let es = k * lin(ebn0_db);
    2.0 / k * q_function((2.0 * es).sqrt() * (PI / m as f64).sin())
}

/// Gray-coded differentially detected M-PSK.
pub fn dmpsk_ber(m: usize, ebn0_db: f64) -> f64 {
    let k = (m as f64).log2();
    let es = k * lin(ebn0_db);
    2.0 / k * q_function((2.0 * es).sqrt() * (PI / (std::f64::consts::SQRT_2 * m as f64)).sin())
}

/// Gray-coded square M-QAM.
pub fn square_qam_ber(m: usize, ebn0_db: f64) -> f64 {
    let k = (m as f64).log2();
    let root = (m as f64).sqrt();
    4.0 / k * (1.0 - 1.0 / root) * q_function((3.0 * k * lin(ebn0_db) / (m as f64 - 1.0)).sqrt())
}

/// Eb/N0 (dB) where `ber_fn` crosses `target`, by bisection on a
/// decreasing curve.
pub fn ebn0_for_ber(ber_fn: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ber_fn(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
