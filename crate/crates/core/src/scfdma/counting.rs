//! Recursive mixed-radix DFT that counts its multiplications.
//!
//! One count is one product of two complex numbers. Twiddles equal to one
//! are skipped and not counted; all other twiddles and the inner products
//! of radices above two are counted.

use std::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Default, Clone, Copy)]
pub struct MultCounter {
    pub count: u64,
}

fn smallest_factor(n: usize) -> usize {
    (2..).take_while(|p| p * p <= n).find(|p| n.is_multiple_of(*p)).unwrap_or(n)
}

/// Unnormalized DFT (`inverse` flips the exponent sign).
pub fn counting_fft(x: &[Complex64], inverse: bool, counter: &mut MultCounter) -> Vec<Complex64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let p = smallest_factor(n);
    let m = n / p;
    // Decimation in time: p interleaved sub-sequences of length m.
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|r| {
            let s: Vec<Complex64> = (0..m).map(|t| x[r + p * t]).collect();
            counting_fft(&s, inverse, counter)
        })
        .collect();
    let w = |e: usize, size: usize| Complex64::from_polar(1.0, sign * 2.0 * PI * e as f64 / size as f64);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut twiddled = vec![Complex64::new(0.0, 0.0); p];
    for k in 0..m {
        for r in 0..p {
            let e = (r * k) % n;
            twiddled[r] = if e == 0 {
                subs[r][k]
            } else {
                counter.count += 1;
                subs[r][k] * w(e, n)
            };
        }
        // p-point DFT across the twiddled values.
        for q in 0..p {
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, t) in twiddled.iter().enumerate() {
                let e = (r * q) % p;
                if e == 0 {
                    acc += t;
                } else if p == 2 {
                    acc -= t;
                } else {
                    counter.count += 1;
                    acc += t * w(e, p);
                }
            }
            out[k + q * m] = acc;
        }
    }
    out
}
