//! The (25, 20) header block code.
//!
//! Codeword layout is the 20 data bits followed by 5 parity bits. The default
//! parity matrix is a shortened Hamming code: every data column is a distinct
//! 5-bit vector of weight at least two, so any single bit error has a unique
//! syndrome and is corrected.

use crate::data::{self, Table};
use crate::error::{Error, Result};

pub const HEADER_DATA_BITS: usize = 20;
pub const HEADER_PARITY_BITS: usize = 5;
pub const HEADER_CODE_BITS: usize = HEADER_DATA_BITS + HEADER_PARITY_BITS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderCodeConfig {
    /// Row r is a mask over the data bits: bit j set means data bit j
    /// contributes to parity bit r.
    pub parity_rows: [u32; HEADER_PARITY_BITS],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderDecoded {
    pub data: Vec<u8>,
    /// Codeword position that was flipped, if any.
    pub corrected: Option<usize>,
}

impl HeaderCodeConfig {
    pub fn bundled() -> Result<Self> {
        Self::from_table(data::HEADER_PARITY)
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let table = Table::parse("header_parity", text)?;
        if table.rows.len() != HEADER_PARITY_BITS {
            return Err(data_err(format!("expected 5 parity rows, got {}", table.rows.len())));
        }
        let mut parity_rows = [0u32; HEADER_PARITY_BITS];
        for (r, row) in table.rows.iter().enumerate() {
            let bits = row.concat();
            if bits.len() != HEADER_DATA_BITS || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(data_err(format!("row {r} is not a 20-bit binary string")));
            }
            for (j, b) in bits.bytes().enumerate() {
                if b == b'1' {
                    parity_rows[r] |= 1 << j;
                }
            }
        }
        Self::from_rows(parity_rows)
    }

    pub fn from_rows(parity_rows: [u32; HEADER_PARITY_BITS]) -> Result<Self> {
        if parity_rows.iter().any(|&r| r >> HEADER_DATA_BITS != 0) {
            return Err(Error::Config("header parity row wider than 20 bits".into()));
        }
        Ok(HeaderCodeConfig { parity_rows })
    }

    /// 5-bit syndrome contribution of data bit `j`.
    fn column(&self, j: usize) -> u8 {
        let mut c = 0u8;
        for (r, &row) in self.parity_rows.iter().enumerate() {
            c |= (((row >> j) & 1) as u8) << r;
        }
        c
    }

    fn parity(&self, data: &[u8]) -> u8 {
        let word = pack(data);
        let mut p = 0u8;
        for (r, &row) in self.parity_rows.iter().enumerate() {
            p |= (((row & word).count_ones() & 1) as u8) << r;
        }
        p
    }
}

fn data_err(reason: String) -> Error {
    Error::data("header_parity", reason)
}

fn pack(bits: &[u8]) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0u32, |acc, (j, &b)| acc | (((b & 1) as u32) << j))
}

pub fn header_encode(data: &[u8], cfg: &HeaderCodeConfig) -> Result<Vec<u8>> {
    if data.len() != HEADER_DATA_BITS {
        return Err(Error::length("header_encode", HEADER_DATA_BITS, data.len()));
    }
    let p = cfg.parity(data);
    let mut out = data.to_vec();
    out.extend((0..HEADER_PARITY_BITS).map(|r| (p >> r) & 1));
    Ok(out)
}

/// Syndrome of a received header; zero for every codeword.
pub fn header_syndrome(word: &[u8], cfg: &HeaderCodeConfig) -> Result<u8> {
    if word.len() != HEADER_CODE_BITS {
        return Err(Error::length("header_syndrome", HEADER_CODE_BITS, word.len()));
    }
    let received = (0..HEADER_PARITY_BITS).fold(0u8, |acc, r| {
        acc | ((word[HEADER_DATA_BITS + r] & 1) << r)
    });
    Ok(received ^ cfg.parity(&word[..HEADER_DATA_BITS]))
}

/// Corrects a single bit error; syndromes that match no single position
/// are reported as a header error.
pub fn header_decode(word: &[u8], cfg: &HeaderCodeConfig) -> Result<HeaderDecoded> {
    let s = header_syndrome(word, cfg)?;
    let mut data = word[..HEADER_DATA_BITS].to_vec();
    if s == 0 {
        return Ok(HeaderDecoded { data, corrected: None });
    }
    if s.count_ones() == 1 {
        return Ok(HeaderDecoded {
            data,
            corrected: Some(HEADER_DATA_BITS + s.trailing_zeros() as usize),
        });
    }
    let hits: Vec<usize> = (0..HEADER_DATA_BITS).filter(|&j| cfg.column(j) == s).collect();
    match hits.as_slice() {
        [j] => {
            data[*j] ^= 1;
            Ok(HeaderDecoded {
                data,
                corrected: Some(*j),
            })
        }
        _ => Err(Error::Header(format!("syndrome {s:05b} matches no single-bit error"))),
    }
}
