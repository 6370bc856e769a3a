//! Baseband physical-layer simulation for advanced VHF data link waveforms.

pub mod channel;
pub mod constellation;
pub mod data;
pub mod error;
pub mod fec;
pub mod framing;
pub mod metrics;
pub mod scfdma;
pub mod shaping;
pub mod waveform;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
