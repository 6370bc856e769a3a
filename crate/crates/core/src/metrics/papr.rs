//! Per-frame peak-to-average power ratio and its CCDF.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::trial_rng;
use crate::error::{Error, Result};
use crate::shaping::{shape, FilterDesign};

use super::ber::Modulation;

/// Symbols per PAPR frame.
pub const PAPR_FRAME_SYMBOLS: usize = 256;
/// Stream index reserved for PAPR frames so they never share noise streams
/// with BER points.
const PAPR_STREAM: u32 = 0xFFFF_0001;

/// Empirical CCDF: `points[i] = (papr_db, Pr(PAPR > papr_db))`, sorted by
/// PAPR, non-increasing in probability.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub scheme: String,
    pub frames: usize,
    pub points: Vec<(f64, f64)>,
}

pub fn papr_db(frame: &[Complex64]) -> f64 {
    let mut peak: f64 = 0.0;
    let mut sum = 0.0;
    for s in frame {
        let p = s.norm_sqr();
        peak = peak.max(p);
        sum += p;
    }
    10.0 * (peak * frame.len() as f64 / sum).log10()
}

/// CCDF of the given frames' PAPR.
pub fn papr_ccdf(scheme: &str, frames: &[&[Complex64]]) -> CcdfCurve {
    let paprs: Vec<f64> = frames.iter().map(|f| papr_db(f)).collect();
    ccdf_from_paprs(scheme, paprs)
}

pub fn ccdf_from_paprs(scheme: &str, mut paprs: Vec<f64>) -> CcdfCurve {
    paprs.sort_by(f64::total_cmp);
    let n = paprs.len();
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    for (i, &x) in paprs.iter().enumerate() {
        let ccdf = (n - 1 - i) as f64 / n as f64;
        // Ties keep the probability after the last equal sample.
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = ccdf,
            _ => points.push((x, ccdf)),
        }
    }
    CcdfCurve {
        scheme: scheme.to_string(),
        frames: n,
        points,
    }
}

impl CcdfCurve {
    /// Pr(PAPR > x) from the empirical distribution.
    pub fn ccdf_at(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.0 <= x);
        if idx == 0 {
            1.0
        } else {
            self.points[idx - 1].1
        }
    }
}

/// PAPR₀ with Pr(PAPR > PAPR₀) = p, interpolating log10(CCDF) linearly.
/// Needs at least `10 / p` frames.
pub fn backoff_at(curve: &CcdfCurve, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("CCDF level {p} outside (0, 1)")));
    }
    let needed = (10.0 / p).ceil() as usize;
    if curve.frames < needed {
        return Err(Error::InsufficientData(format!(
            "{}: {} frames, CCDF {p:e} needs at least {needed}",
            curve.scheme, curve.frames
        )));
    }
    let pts = &curve.points;
    for w in pts.windows(2) {
        let (x0, c0) = w[0];
        let (x1, c1) = w[1];
        if c0 >= p && c1 < p {
            if c1 <= 0.0 {
                return Ok(x0);
            }
            let t = (p.log10() - c0.log10()) / (c1.log10() - c0.log10());
            return Ok(x0 + t * (x1 - x0));
        }
    }
    Err(Error::InsufficientData(format!(
        "{}: CCDF never crosses {p:e}",
        curve.scheme
    )))
}

fn random_symbols(modulation: &Modulation, n: usize, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    Ok(match modulation {
        Modulation::Coherent(c) => (0..n).map(|_| c.points()[rng.random_range(0..c.order())]).collect(),
        Modulation::Differential(table) => {
            let bits: Vec<u8> = (0..3 * n).map(|_| rng.random_range(0..2)).collect();
            let phase0 = f64::from(rng.random_range(0..8u8)) * std::f64::consts::FRAC_PI_4;
            crate::constellation::d8psk_encode(table, &bits, phase0)?
        }
    })
}

/// Random shaped waveform of `n` symbols (used for PSD estimates).
pub fn random_waveform(
    modulation: &Modulation,
    filter: &FilterDesign,
    n: usize,
    symbol_rate: f64,
    seed: u64,
) -> Result<crate::waveform::WaveformBuffer> {
    let mut rng = trial_rng(seed, PAPR_STREAM + 1, 0);
    let syms = random_symbols(modulation, n, &mut rng)?;
    Ok(shape(&syms, filter, symbol_rate)?.into_transmit())
}

/// PAPR of `frames` independent shaped frames of `frame_symbols` symbols.
/// Each frame is shaped with `K/2` extra context symbols on both sides and
/// only the samples belonging to the frame's own symbols are kept, so the
/// filter ramps are excluded.
pub fn frame_paprs(
    modulation: &Modulation,
    filter: &FilterDesign,
    frame_symbols: usize,
    frames: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let guard = filter.edge_symbols();
    let n_up = filter.n_up;
    let start = guard * n_up + filter.group_delay();
    (0..frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = trial_rng(seed, PAPR_STREAM, f as u32);
            let syms = random_symbols(modulation, frame_symbols + 2 * guard, &mut rng)?;
            let w = shape(&syms, filter, 1.0)?;
            Ok(papr_db(&w.samples[start..start + frame_symbols * n_up]))
        })
        .collect()
}
