//! Welch power spectral density estimate.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::waveform::WaveformBuffer;

pub const DEFAULT_SEGMENT: usize = 4096;
pub const DEFAULT_OVERLAP: f64 = 0.5;

/// Two-sided PSD in dB relative to its peak, frequencies in Hz, DC centred.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCurve {
    pub label: String,
    pub freq_hz: Vec<f64>,
    pub db: Vec<f64>,
}

impl PsdCurve {
    /// Level at `±f_hz`, linearly interpolated and averaged over both sides.
    pub fn level_at(&self, f_hz: f64) -> f64 {
        let one = |f: f64| -> f64 {
            let i = self.freq_hz.partition_point(|&x| x < f);
            if i == 0 {
                return self.db[0];
            }
            if i >= self.freq_hz.len() {
                return *self.db.last().unwrap();
            }
            let (x0, x1) = (self.freq_hz[i - 1], self.freq_hz[i]);
            let t = (f - x0) / (x1 - x0);
            self.db[i - 1] + t * (self.db[i] - self.db[i - 1])
        };
        0.5 * (one(f_hz) + one(-f_hz))
    }
}

/// Averaged Hann-windowed periodogram with `overlap` in [0, 1).
pub fn estimate_psd(wave: &WaveformBuffer, segment_len: usize, overlap: f64, label: &str) -> Result<PsdCurve> {
    if segment_len < 2 || !(0.0..1.0).contains(&overlap) {
        return Err(Error::Domain(format!(
            "segment length {segment_len} / overlap {overlap} invalid"
        )));
    }
    let hop = ((segment_len as f64) * (1.0 - overlap)).round().max(1.0) as usize;
    let n = wave.samples.len();
    let segments = if n >= segment_len { (n - segment_len) / hop + 1 } else { 0 };
    if segments < 4 {
        return Err(Error::length(
            "estimate_psd",
            format!(">= {} samples (4 segments)", segment_len + 3 * hop),
            n,
        ));
    }
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / segment_len as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let mut acc = vec![0.0; segment_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    for s in 0..segments {
        let seg = &wave.samples[s * hop..s * hop + segment_len];
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = x * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let peak = acc.iter().cloned().fold(0.0, f64::max);
    let half = segment_len / 2;
    let fs = wave.sample_rate_hz;
    let mut freq_hz = Vec::with_capacity(segment_len);
    let mut db = Vec::with_capacity(segment_len);
    for k in 0..segment_len {
        let bin = (k + half) % segment_len;
        freq_hz.push((k as f64 - half as f64) * fs / segment_len as f64);
        db.push(10.0 * (acc[bin] / peak).max(1e-300).log10());
    }
    Ok(PsdCurve {
        label: label.to_string(),
        freq_hz,
        db,
    })
}
