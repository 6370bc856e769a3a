//! Link-margin table, information rates and voice capacity.

use crate::error::{Error, Result};

use super::ber::BerCurve;
use super::papr::{backoff_at, CcdfCurve};

pub const BER_TARGET: f64 = 1e-4;
pub const CCDF_TARGET: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMarginRow {
    pub modulation: String,
    pub ebn0_gain_db: f64,
    pub required_backoff_db: f64,
    pub lm_db: f64,
    pub info_bit_rate_kbps: f64,
}

impl LinkMarginRow {
    pub fn new(modulation: &str, gain: f64, backoff: f64, rate_kbps: f64) -> Self {
        LinkMarginRow {
            modulation: modulation.to_string(),
            ebn0_gain_db: gain,
            required_backoff_db: backoff,
            lm_db: gain - backoff,
            info_bit_rate_kbps: rate_kbps,
        }
    }
}

/// Information bit rate: `symbol_rate · log2(M) · r`, in bits per the
/// symbol rate's time unit (ksym/s gives kbps).
pub fn info_bit_rate(symbol_rate: f64, m: usize, r: f64) -> f64 {
    symbol_rate * (m as f64).log2() * r
}

/// Number of vocoder streams a channel carries.
pub fn voice_capacity(channel_bit_rate: f64, vocoder_rate: f64) -> Result<u64> {
    if !(channel_bit_rate > 0.0 && vocoder_rate > 0.0) {
        return Err(Error::Domain("bit rates must be positive".into()));
    }
    Ok((channel_bit_rate / vocoder_rate).floor() as u64)
}

/// Eb/N0 where the curve crosses `target`, with log10(BER) linear in Eb/N0
/// between the bracketing points.
pub fn ebn0_at_ber(curve: &BerCurve, target: f64) -> Result<f64> {
    let mut pts: Vec<_> = curve.points.iter().collect();
    pts.sort_by(|a, b| a.ebn0_db.total_cmp(&b.ebn0_db));
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.ber >= target && b.ber < target {
            if b.ber <= 0.0 {
                break;
            }
            let t = (target.log10() - a.ber.log10()) / (b.ber.log10() - a.ber.log10());
            return Ok(a.ebn0_db + t * (b.ebn0_db - a.ebn0_db));
        }
    }
    Err(Error::InsufficientData(format!(
        "{}: BER curve does not bracket {target:e} with non-zero points",
        curve.scheme
    )))
}

/// One scheme's measured inputs to the link-margin table.
pub struct LmInput<'a> {
    pub name: &'a str,
    pub ber: &'a BerCurve,
    pub ccdf: &'a CcdfCurve,
    pub rate_kbps: f64,
}

/// Rows relative to `baseline`; the baseline row itself has zero gain,
/// back-off and margin.
pub fn link_margin_table(baseline: &LmInput, schemes: &[LmInput]) -> Result<Vec<LinkMarginRow>> {
    let base_ebn0 = ebn0_at_ber(baseline.ber, BER_TARGET)?;
    let base_papr = backoff_at(baseline.ccdf, CCDF_TARGET)?;
    let mut rows = vec![LinkMarginRow::new(baseline.name, 0.0, 0.0, baseline.rate_kbps)];
    for s in schemes {
        let gain = base_ebn0 - ebn0_at_ber(s.ber, BER_TARGET)?;
        let backoff = backoff_at(s.ccdf, CCDF_TARGET)? - base_papr;
        rows.push(LinkMarginRow::new(s.name, gain, backoff, s.rate_kbps));
    }
    Ok(rows)
}
