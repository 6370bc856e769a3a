//! Forward error correction: LDPC, punctured convolutional, Reed-Solomon and
//! the frame header code.

pub mod conv;
pub mod header;
pub mod interleave;
pub mod ldpc;
pub mod rs;

pub use conv::{conv_decode, conv_encode, ConvConfig};
pub use header::{header_decode, header_encode, header_syndrome, HeaderCodeConfig, HeaderDecoded};
pub use interleave::BlockInterleaver;
pub use ldpc::{ldpc_decode, ldpc_encode, LdpcConfig, LdpcDecoded};
pub use rs::{rs_decode, rs_encode, Gf256, RsConfig, RsDecoded};
