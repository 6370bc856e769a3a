//! Bundled plain-text tables.
//!
//! Every table is a list of whitespace-separated rows preceded by `#` header
//! lines. One header line carries `checksum fnv1a64=<hex>`, the FNV-1a hash of
//! the trimmed data rows each followed by a newline. Tables are embedded at
//! compile time, so a missing file is a build failure.

use crate::error::{Error, Result};

pub const APSK16: &str = include_str!("../data/apsk16.txt");
pub const APSK32: &str = include_str!("../data/apsk32.txt");
pub const APSK64: &str = include_str!("../data/apsk64.txt");
pub const APSK256: &str = include_str!("../data/apsk256.txt");
pub const D8PSK_PHASE: &str = include_str!("../data/d8psk_phase.txt");
pub const LDPC_DVBS2_R3_4_N64800: &str = include_str!("../data/ldpc_dvbs2_r3_4_n64800.txt");
pub const LDPC_IRA_R3_4_N648: &str = include_str!("../data/ldpc_ira_r3_4_n648.txt");
pub const HEADER_PARITY: &str = include_str!("../data/header_parity.txt");
pub const CONV_PUNCTURE_R3_4: &str = include_str!("../data/conv_puncture_r3_4.txt");

/// A parsed table: header key/value pairs and verified data rows.
#[derive(Debug, Clone)]
pub struct Table<'a> {
    pub name: String,
    header: Vec<(&'a str, &'a str)>,
    pub rows: Vec<Vec<&'a str>>,
}

pub fn fnv1a64<'a>(lines: impl IntoIterator<Item = &'a str>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for line in lines {
        for b in line.trim().bytes().chain(std::iter::once(b'\n')) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

impl<'a> Table<'a> {
    /// Parses `text`, verifying the checksum line when present.
    pub fn parse(name: &str, text: &'a str) -> Result<Self> {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        let mut data_lines = Vec::new();
        let mut checksum = None;
        for line in text.lines() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(h) = t.strip_prefix('#') {
                for tok in h.split_whitespace() {
                    if let Some((k, v)) = tok.split_once('=') {
                        if k == "fnv1a64" {
                            checksum = Some(v);
                        }
                        header.push((k, v));
                    }
                }
                continue;
            }
            data_lines.push(t);
            rows.push(t.split_whitespace().collect());
        }
        if let Some(expected) = checksum {
            let got = format!("{:016x}", fnv1a64(data_lines.iter().copied()));
            if got != expected {
                return Err(Error::data(
                    name,
                    format!("checksum mismatch: header {expected}, rows hash to {got}"),
                ));
            }
        }
        if rows.is_empty() {
            return Err(Error::data(name, "no data rows"));
        }
        Ok(Table {
            name: name.to_string(),
            header,
            rows,
        })
    }

    pub fn header(&self, key: &str) -> Option<&'a str> {
        self.header.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn header_usize(&self, key: &str) -> Result<usize> {
        self.header(key)
            .ok_or_else(|| Error::data(&self.name, format!("missing header key {key}")))?
            .parse()
            .map_err(|_| Error::data(&self.name, format!("header key {key} is not an integer")))
    }

    pub fn field<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T> {
        self.rows[row]
            .get(col)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::data(&self.name, format!("bad field at row {row}, column {col}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_verify() {
        for (name, text) in [
            ("apsk16", APSK16),
            ("apsk32", APSK32),
            ("apsk64", APSK64),
            ("apsk256", APSK256),
            ("d8psk", D8PSK_PHASE),
            ("ldpc64800", LDPC_DVBS2_R3_4_N64800),
            ("ldpc648", LDPC_IRA_R3_4_N648),
            ("header", HEADER_PARITY),
            ("puncture", CONV_PUNCTURE_R3_4),
        ] {
            let t = Table::parse(name, text).unwrap();
            assert!(t.header("fnv1a64").is_some(), "{name} has no checksum");
        }
    }

    #[test]
    fn corrupted_row_is_rejected() {
        let bad = APSK16.replacen("1100", "1101", 1);
        let err = Table::parse("apsk16", &bad).unwrap_err();
        assert!(matches!(err, Error::Data { .. }));
    }
}
