//! CSV renderings of the metrics. Every file starts with a header row and
//! numbers use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use super::ber::BerCurve;
use super::link::LinkMarginRow;
use super::papr::CcdfCurve;
use super::psd::PsdCurve;

/// PAPR grid step for `papr.csv`.
pub const PAPR_CSV_STEP_DB: f64 = 0.05;

/// `scheme,ebn0_db,ber,bits,errors`
pub fn ber_csv(curves: &[BerCurve]) -> String {
    let mut out = String::from("scheme,ebn0_db,ber,bits,errors\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(out, "{},{},{},{},{}", c.scheme, p.ebn0_db, p.ber, p.bits, p.errors);
        }
    }
    out
}

/// `scheme,papr_db,ccdf` sampled on a fixed 0.05 dB grid.
pub fn papr_csv(curves: &[CcdfCurve]) -> String {
    let mut out = String::from("scheme,papr_db,ccdf\n");
    for c in curves {
        let (Some(first), Some(last)) = (c.points.first(), c.points.last()) else {
            continue;
        };
        let lo = (first.0 / PAPR_CSV_STEP_DB).floor() as i64;
        let hi = (last.0 / PAPR_CSV_STEP_DB).ceil() as i64;
        for i in lo..=hi {
            let x = i as f64 * PAPR_CSV_STEP_DB;
            let _ = writeln!(out, "{},{:.2},{}", c.scheme, x, c.ccdf_at(x));
        }
    }
    out
}

/// `label,freq_hz,db`; the label column separates curves in one file.
pub fn psd_csv(curves: &[PsdCurve]) -> String {
    let mut out = String::from("label,freq_hz,db\n");
    for c in curves {
        for (f, d) in c.freq_hz.iter().zip(&c.db) {
            let _ = writeln!(out, "{},{},{}", c.label, f, d);
        }
    }
    out
}

/// Link margin table columns.
pub fn lm_csv(rows: &[LinkMarginRow]) -> String {
    let mut out =
        String::from("modulation,ebn0_gain_db,required_backoff_db,lm_db,info_bit_rate_kbps\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.modulation, r.ebn0_gain_db, r.required_backoff_db, r.lm_db, r.info_bit_rate_kbps
        );
    }
    out
}
