//! Burst construction and parsing at the tribit level.
//!
//! A burst is
//!
//! ```text
//! ramp-up (5 × 000) | unique word (16 tribits) | body
//! body = reserved (3 bits) | length (17 bits, LSB first) | header parity (5 bits)
//!        | coded payload | zero pad to a tribit boundary
//! ```
//!
//! Legacy mode packs the payload into octets (LSB first), splits it into
//! RS(255, 249) blocks with the last block zero-filled, optionally
//! interleaves the blocks and sends every octet LSB first. Updated mode
//! replaces the RS stage with `ceil(len / k)` LDPC codewords, zero-filling
//! the last message block. In both modes the padding is implied by the
//! length field.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fec::{
    header_decode, header_encode, ldpc_decode, ldpc_encode, rs_decode, rs_encode,
    BlockInterleaver, HeaderCodeConfig, LdpcConfig, RsConfig,
};

pub const RAMP_UP_TRIBITS: usize = 5;
pub const RESERVED_BITS: usize = 3;
pub const LENGTH_BITS: usize = 17;
pub const MAX_TRANSMISSION_BITS: usize = (1 << LENGTH_BITS) - 1;
pub const HEADER_BITS: usize = 25;

/// The 16-tribit synchronization pattern.
pub const UNIQUE_WORD: [u8; 16] = [
    0b000, 0b010, 0b011, 0b110, 0b000, 0b001, 0b101, 0b110, 0b001, 0b100, 0b011, 0b111, 0b101,
    0b111, 0b100, 0b010,
];

/// Hard-decision LLR magnitude used when a hard tribit stream feeds the
/// LDPC decoder.
const HARD_LLR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    RsLegacy,
    LdpcUpdated,
}

#[derive(Debug, Clone)]
pub struct FrameConfig {
    pub mode: PayloadMode,
    pub rs: RsConfig,
    /// Block interleaver across RS codewords (legacy mode only).
    pub interleave: bool,
    pub ldpc: LdpcConfig,
    pub header: HeaderCodeConfig,
    /// Minimum number of matching unique-word tribits.
    pub uw_threshold: usize,
}

impl FrameConfig {
    pub const DEFAULT_UW_THRESHOLD: usize = 13;

    pub fn legacy() -> Result<Self> {
        Ok(FrameConfig {
            mode: PayloadMode::RsLegacy,
            rs: RsConfig::vdl(),
            interleave: true,
            ldpc: LdpcConfig::dvbs2_r3_4()?,
            header: HeaderCodeConfig::bundled()?,
            uw_threshold: Self::DEFAULT_UW_THRESHOLD,
        })
    }

    pub fn updated(ldpc: LdpcConfig) -> Result<Self> {
        Ok(FrameConfig {
            mode: PayloadMode::LdpcUpdated,
            rs: RsConfig::vdl(),
            interleave: false,
            ldpc,
            header: HeaderCodeConfig::bundled()?,
            uw_threshold: Self::DEFAULT_UW_THRESHOLD,
        })
    }

    /// Number of FEC blocks carrying `payload_bits`.
    pub fn block_count(&self, payload_bits: usize) -> usize {
        match self.mode {
            PayloadMode::RsLegacy => payload_bits.div_ceil(8).div_ceil(self.rs.k),
            PayloadMode::LdpcUpdated => payload_bits.div_ceil(self.ldpc.k),
        }
    }

    /// Coded payload bits for `payload_bits` information bits.
    pub fn coded_bits(&self, payload_bits: usize) -> usize {
        let blocks = self.block_count(payload_bits);
        match self.mode {
            PayloadMode::RsLegacy => blocks * self.rs.n * 8,
            PayloadMode::LdpcUpdated => blocks * self.ldpc.n,
        }
    }

    /// Total burst length in tribits:
    /// `5 + 16 + ceil((25 + coded_bits) / 3)`.
    pub fn frame_tribits(&self, payload_bits: usize) -> usize {
        RAMP_UP_TRIBITS + UNIQUE_WORD.len() + (HEADER_BITS + self.coded_bits(payload_bits)).div_ceil(3)
    }

    /// Burst bits not carrying payload information.
    pub fn overhead_bits(&self, payload_bits: usize) -> usize {
        3 * self.frame_tribits(payload_bits) - payload_bits
    }
}

/// Diagnostics reported by [`parse_frame`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDiagnostics {
    pub ramp_matches: usize,
    pub uw_matches: usize,
    pub uw_threshold: usize,
    /// Codeword position corrected by the header code, if any.
    pub header_corrected: Option<usize>,
    pub reserved: u8,
    pub length: usize,
    pub rs_corrected: usize,
    pub ldpc_iterations: Vec<usize>,
    pub ldpc_converged: bool,
    pub trailing_tribits: usize,
}

/// Transmission length as 17 bits, LSB first.
pub fn encode_transmission_length(bit_count: usize) -> Result<Vec<u8>> {
    if bit_count > MAX_TRANSMISSION_BITS {
        return Err(Error::Domain(format!(
            "transmission length {bit_count} exceeds {MAX_TRANSMISSION_BITS} bits"
        )));
    }
    Ok((0..LENGTH_BITS).map(|i| ((bit_count >> i) & 1) as u8).collect())
}

pub fn decode_transmission_length(bits: &[u8]) -> Result<usize> {
    if bits.len() != LENGTH_BITS {
        return Err(Error::length("transmission length", LENGTH_BITS, bits.len()));
    }
    Ok(bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (((b & 1) as usize) << i)))
}

fn bits_to_octets(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << i)))
        .collect()
}

fn octets_to_bits(octets: &[u8]) -> Vec<u8> {
    octets.iter().flat_map(|&o| (0..8).map(move |i| (o >> i) & 1)).collect()
}

pub fn bits_to_tribits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(3)
        .map(|c| {
            let mut t = 0u8;
            for i in 0..3 {
                t = (t << 1) | c.get(i).map_or(0, |b| b & 1);
            }
            t
        })
        .collect()
}

pub fn tribits_to_bits(tribits: &[u8]) -> Vec<u8> {
    tribits.iter().flat_map(|&t| [(t >> 2) & 1, (t >> 1) & 1, t & 1]).collect()
}

fn encode_payload(payload: &[u8], cfg: &FrameConfig) -> Result<Vec<u8>> {
    let blocks = cfg.block_count(payload.len());
    match cfg.mode {
        PayloadMode::RsLegacy => {
            let mut octets = bits_to_octets(payload);
            octets.resize(blocks * cfg.rs.k, 0);
            let mut coded = Vec::with_capacity(blocks * cfg.rs.n);
            for block in octets.chunks(cfg.rs.k) {
                coded.extend(rs_encode(block, &cfg.rs)?);
            }
            if cfg.interleave && blocks > 0 {
                coded = BlockInterleaver::new(blocks, cfg.rs.n)?.interleave(&coded)?;
            }
            Ok(octets_to_bits(&coded))
        }
        PayloadMode::LdpcUpdated => {
            let mut msg = payload.to_vec();
            msg.resize(blocks * cfg.ldpc.k, 0);
            let mut coded = Vec::with_capacity(blocks * cfg.ldpc.n);
            for block in msg.chunks(cfg.ldpc.k) {
                coded.extend(ldpc_encode(block, &cfg.ldpc)?);
            }
            Ok(coded)
        }
    }
}

/// Builds a complete burst as a tribit stream.
pub fn build_frame(payload: &[u8], cfg: &FrameConfig) -> Result<Vec<u8>> {
    if payload.len() > MAX_TRANSMISSION_BITS {
        return Err(Error::Domain(format!(
            "payload of {} bits exceeds the {MAX_TRANSMISSION_BITS}-bit length field",
            payload.len()
        )));
    }
    let mut header_data = vec![0u8; RESERVED_BITS];
    header_data.extend(encode_transmission_length(payload.len())?);
    let mut body = header_encode(&header_data, &cfg.header)?;
    body.extend(encode_payload(payload, cfg)?);

    let mut frame = vec![0u8; RAMP_UP_TRIBITS];
    frame.extend_from_slice(&UNIQUE_WORD);
    frame.extend(bits_to_tribits(&body));
    debug_assert_eq!(frame.len(), cfg.frame_tribits(payload.len()));
    Ok(frame)
}

/// Parses a burst that starts at the first ramp-up tribit.
pub fn parse_frame(tribits: &[u8], cfg: &FrameConfig) -> Result<(Vec<u8>, FrameDiagnostics)> {
    let preamble = RAMP_UP_TRIBITS + UNIQUE_WORD.len();
    let min_len = preamble + HEADER_BITS.div_ceil(3);
    if tribits.len() < min_len {
        return Err(Error::length("parse_frame", format!(">= {min_len}"), tribits.len()));
    }
    let ramp_matches = tribits[..RAMP_UP_TRIBITS].iter().filter(|&&t| t == 0).count();
    let uw_matches = tribits[RAMP_UP_TRIBITS..preamble]
        .iter()
        .zip(UNIQUE_WORD)
        .filter(|(&a, b)| a & 7 == *b)
        .count();
    if uw_matches < cfg.uw_threshold {
        return Err(Error::Sync {
            matched: uw_matches,
            threshold: cfg.uw_threshold,
        });
    }

    let body = tribits_to_bits(&tribits[preamble..]);
    let header = header_decode(&body[..HEADER_BITS], &cfg.header)?;
    let reserved = header.data[..RESERVED_BITS]
        .iter()
        .fold(0u8, |acc, &b| (acc << 1) | b);
    let length = decode_transmission_length(&header.data[RESERVED_BITS..])?;
    let expected = cfg.frame_tribits(length);
    if expected > tribits.len() {
        return Err(Error::Header(format!(
            "length field {length} implies {expected} tribits but only {} were received",
            tribits.len()
        )));
    }

    let coded = &body[HEADER_BITS..HEADER_BITS + cfg.coded_bits(length)];
    let blocks = cfg.block_count(length);
    let mut diag = FrameDiagnostics {
        ramp_matches,
        uw_matches,
        uw_threshold: cfg.uw_threshold,
        header_corrected: header.corrected,
        reserved,
        length,
        rs_corrected: 0,
        ldpc_iterations: Vec::new(),
        ldpc_converged: true,
        trailing_tribits: tribits.len() - expected,
    };
    let mut payload = match cfg.mode {
        PayloadMode::RsLegacy => {
            let mut octets = bits_to_octets(coded);
            if cfg.interleave && blocks > 0 {
                octets = BlockInterleaver::new(blocks, cfg.rs.n)?.deinterleave(&octets)?;
            }
            let mut data = Vec::with_capacity(blocks * cfg.rs.k);
            for block in octets.chunks(cfg.rs.n) {
                let dec = rs_decode(block, &cfg.rs)?;
                diag.rs_corrected += dec.corrected;
                data.extend(dec.data);
            }
            octets_to_bits(&data)
        }
        PayloadMode::LdpcUpdated => {
            let mut data = Vec::with_capacity(blocks * cfg.ldpc.k);
            for block in coded.chunks(cfg.ldpc.n) {
                let llrs: Vec<f64> = block
                    .iter()
                    .map(|&b| if b == 0 { HARD_LLR } else { -HARD_LLR })
                    .collect();
                let dec = ldpc_decode(&llrs, &cfg.ldpc)?;
                diag.ldpc_iterations.push(dec.iterations);
                diag.ldpc_converged &= dec.converged;
                data.extend(dec.message);
            }
            data
        }
    };
    payload.truncate(length);
    Ok((payload, diag))
}

/// Text dump of a burst: one octal tribit token per symbol, one section
/// per line.
pub fn dump_frame(tribits: &[u8]) -> String {
    let preamble = RAMP_UP_TRIBITS + UNIQUE_WORD.len();
    let sections = [
        ("ramp", &tribits[..RAMP_UP_TRIBITS.min(tribits.len())]),
        (
            "uw",
            &tribits[RAMP_UP_TRIBITS.min(tribits.len())..preamble.min(tribits.len())],
        ),
        ("body", &tribits[preamble.min(tribits.len())..]),
    ];
    let mut out = format!("# tribits={}\n", tribits.len());
    for (name, part) in sections {
        let _ = write!(out, "[{name}]");
        for t in part {
            let _ = write!(out, " {:03b}", t & 7);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    fn small_updated() -> FrameConfig {
        FrameConfig::updated(LdpcConfig::ira_r3_4_n648().unwrap()).unwrap()
    }

    #[test]
    fn unique_word_matches_reference_string() {
        let reference = "000 010 011 110 000 001 101 110 001 100 011 111 101 111 100 010";
        let ours: Vec<String> = UNIQUE_WORD.iter().map(|t| format!("{t:03b}")).collect();
        assert_eq!(ours.join(" "), reference);
    }

    #[test]
    fn transmission_length_encoding() {
        let one = encode_transmission_length(1).unwrap();
        assert_eq!(one[0], 1);
        assert!(one[1..].iter().all(|&b| b == 0));
        assert_eq!(encode_transmission_length(131071).unwrap(), vec![1; 17]);
        assert_eq!(encode_transmission_length(0).unwrap(), vec![0; 17]);
        assert!(matches!(encode_transmission_length(131072), Err(Error::Domain(_))));
        for v in [0, 1, 77, 4096, 131071] {
            let bits = encode_transmission_length(v).unwrap();
            assert_eq!(decode_transmission_length(&bits).unwrap(), v);
        }
    }

    #[test]
    fn empty_legacy_frame_is_header_only() {
        let cfg = FrameConfig::legacy().unwrap();
        let frame = build_frame(&[], &cfg).unwrap();
        // 5 + 16 + ceil(25 / 3)
        assert_eq!(frame.len(), 30);
        assert!(frame[..5].iter().all(|&t| t == 0));
        assert_eq!(&frame[5..21], &UNIQUE_WORD);
        let (payload, diag) = parse_frame(&frame, &cfg).unwrap();
        assert!(payload.is_empty());
        assert_eq!(diag.uw_matches, 16);
        assert_eq!(diag.reserved, 0);
    }

    #[test]
    fn full_ldpc_block_payload() {
        let cfg = FrameConfig::updated(LdpcConfig::dvbs2_r3_4().unwrap()).unwrap();
        assert_eq!(cfg.block_count(48600), 1);
        assert_eq!(cfg.coded_bits(48600), 64800);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let p = random_bits(&mut rng, 48600);
        let frame = build_frame(&p, &cfg).unwrap();
        assert_eq!(frame.len(), 21 + (25 + 64800usize).div_ceil(3));
        let (out, diag) = parse_frame(&frame, &cfg).unwrap();
        assert_eq!(out, p);
        assert_eq!(diag.ldpc_iterations, vec![1]);
    }

    #[test]
    fn legacy_round_trip() {
        let cfg = FrameConfig::legacy().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..1000 {
            let len = rng.random_range(0..6000);
            let p = random_bits(&mut rng, len);
            let frame = build_frame(&p, &cfg).unwrap();
            assert_eq!(frame.len(), cfg.frame_tribits(len));
            let (out, diag) = parse_frame(&frame, &cfg).unwrap();
            assert_eq!(out, p);
            assert_eq!(diag.rs_corrected, 0);
            assert_eq!(diag.trailing_tribits, 0);
        }
    }

    #[test]
    fn updated_round_trip() {
        let cfg = small_updated();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..1000 {
            let len = rng.random_range(0..3000);
            let p = random_bits(&mut rng, len);
            let frame = build_frame(&p, &cfg).unwrap();
            let (out, diag) = parse_frame(&frame, &cfg).unwrap();
            assert_eq!(out, p);
            assert!(diag.ldpc_converged);
        }
    }

    #[test]
    fn overhead_closed_form_matches_construction() {
        let legacy = FrameConfig::legacy().unwrap();
        let updated = small_updated();
        for len in [0usize, 1, 7, 8, 1992, 1993, 2000, 486, 487, 9999] {
            for cfg in [&legacy, &updated] {
                let frame = build_frame(&vec![1; len], cfg).unwrap();
                assert_eq!(3 * frame.len() - len, cfg.overhead_bits(len));
            }
        }
        // Legacy: one RS block costs 6 parity octets plus the zero fill.
        assert_eq!(legacy.coded_bits(1992), 2040);
        assert_eq!(legacy.coded_bits(1993), 4080);
    }

    #[test]
    fn one_bad_unique_word_tribit_is_tolerated() {
        let cfg = FrameConfig::legacy().unwrap();
        let mut frame = build_frame(&[1, 0, 1, 1], &cfg).unwrap();
        frame[RAMP_UP_TRIBITS + 3] ^= 0b101;
        let (out, diag) = parse_frame(&frame, &cfg).unwrap();
        assert_eq!(out, vec![1, 0, 1, 1]);
        assert_eq!(diag.uw_matches, 15);
    }

    #[test]
    fn too_many_bad_unique_word_tribits() {
        let cfg = FrameConfig::legacy().unwrap();
        let mut frame = build_frame(&[1; 40], &cfg).unwrap();
        for i in 0..4 {
            frame[RAMP_UP_TRIBITS + i] ^= 1;
        }
        assert_eq!(
            parse_frame(&frame, &cfg).unwrap_err(),
            Error::Sync {
                matched: 12,
                threshold: 13
            }
        );
    }

    #[test]
    fn single_header_error_is_corrected() {
        let cfg = FrameConfig::legacy().unwrap();
        let p = vec![1u8; 100];
        let frame = build_frame(&p, &cfg).unwrap();
        let mut bits = tribits_to_bits(&frame[21..]);
        bits[10] ^= 1;
        let mut bad = frame[..21].to_vec();
        bad.extend(bits_to_tribits(&bits));
        let (out, diag) = parse_frame(&bad, &cfg).unwrap();
        assert_eq!(out, p);
        assert_eq!(diag.header_corrected, Some(10));
    }

    #[test]
    fn corrupted_length_beyond_correction_is_header_error() {
        let cfg = FrameConfig::legacy().unwrap();
        let p = vec![0u8; 64];
        let frame = build_frame(&p, &cfg).unwrap();
        let clean = tribits_to_bits(&frame[21..]);
        let mut checked = 0;
        // Double flips inside the length field that the header code itself
        // rejects must never yield a payload.
        for i in 3..20 {
            for j in i + 1..20 {
                let mut word = clean[..25].to_vec();
                word[i] ^= 1;
                word[j] ^= 1;
                if header_decode(&word, &cfg.header).is_ok() {
                    continue;
                }
                let mut bits = clean.clone();
                bits[i] ^= 1;
                bits[j] ^= 1;
                let mut bad = frame[..21].to_vec();
                bad.extend(bits_to_tribits(&bits));
                assert!(matches!(parse_frame(&bad, &cfg), Err(Error::Header(_))));
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn oversized_payload_rejected() {
        let cfg = small_updated();
        assert!(build_frame(&vec![0; MAX_TRANSMISSION_BITS + 1], &cfg).is_err());
    }

    #[test]
    fn dump_format() {
        let cfg = FrameConfig::legacy().unwrap();
        let dump = dump_frame(&build_frame(&[], &cfg).unwrap());
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "# tribits=30");
        assert_eq!(lines[1], "[ramp] 000 000 000 000 000");
        assert!(lines[2].starts_with("[uw] 000 010 011 110"));
        assert_eq!(lines[3].split_whitespace().count(), 10);
    }
}
