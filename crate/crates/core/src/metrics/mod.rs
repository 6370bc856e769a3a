//! BER, PAPR, PSD and link-margin measurements.

pub mod ber;
pub mod csv;
pub mod link;
pub mod papr;
pub mod psd;
pub mod theory;

pub use ber::{run_ber, run_ber_point, BerCurve, BerPoint, Coding, Link, Modulation, StopRule};
pub use link::{
    ebn0_at_ber, info_bit_rate, link_margin_table, voice_capacity, LinkMarginRow, LmInput,
    BER_TARGET, CCDF_TARGET,
};
pub use csv::{ber_csv, lm_csv, papr_csv, psd_csv};
pub use papr::{
    backoff_at, ccdf_from_paprs, frame_paprs, papr_ccdf, papr_db, random_waveform, CcdfCurve,
    PAPR_FRAME_SYMBOLS,
};
pub use psd::{estimate_psd, PsdCurve, DEFAULT_OVERLAP, DEFAULT_SEGMENT};

#[cfg(test)]
mod tests;
