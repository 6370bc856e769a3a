//! Monte Carlo bit-error-rate harness for the chain
//! map → shape → AWGN → matched filter → demap → decode.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{add_awgn_with, noise_sigma, trial_rng};
use crate::constellation::{d8psk_decode_with_reference, d8psk_encode, ConstellationSpec, PhaseTable};
use crate::error::{Error, Result};
use crate::fec::{
    conv_decode, conv_encode, ldpc_decode, ldpc_encode, rs_decode, rs_encode, BlockInterleaver,
    ConvConfig, LdpcConfig, RsConfig,
};
use crate::shaping::{matched_filter_downsample, shape, FilterDesign};

/// Symbols per frame for uncoded links.
const UNCODED_FRAME_SYMBOLS: usize = 4096;
/// Frames simulated between two stop-rule checks. Fixed so that results do
/// not depend on the number of worker threads.
const FRAMES_PER_BATCH: usize = 8;
/// LLR variance used when the channel is noiseless.
const NOISELESS_VARIANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub enum Modulation {
    Coherent(ConstellationSpec),
    Differential(PhaseTable),
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Coherent(c) => c.bits_per_symbol(),
            Modulation::Differential(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Coding {
    Uncoded,
    Ldpc(Arc<LdpcConfig>),
    Conv(ConvConfig),
    /// `blocks` RS codewords per frame, optionally block-interleaved.
    Rs {
        cfg: RsConfig,
        blocks: usize,
        interleave: bool,
    },
}

impl Coding {
    /// Nominal code rate used for the Eb/N0 calibration.
    pub fn rate(&self) -> f64 {
        match self {
            Coding::Uncoded => 1.0,
            Coding::Ldpc(c) => c.rate(),
            Coding::Conv(c) => c.pattern_rate(),
            Coding::Rs { cfg, .. } => cfg.k as f64 / cfg.n as f64,
        }
    }
}

/// One transmit/receive chain.
#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub modulation: Modulation,
    pub coding: Coding,
    pub filter: Arc<FilterDesign>,
    pub symbol_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
    /// Skip the rest of the grid after a point with no errors.
    pub end_on_zero: bool,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: 100,
            max_bits: 20_000_000,
            end_on_zero: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
    pub frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub scheme: String,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// Indices where BER increases with Eb/N0 although both points hold at
    /// least `min_errors` errors.
    pub fn inversions(&self, min_errors: u64) -> Vec<usize> {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| {
                w[0].errors >= min_errors && w[1].errors >= min_errors && w[1].ber > w[0].ber
            })
            .map(|(i, _)| i)
            .collect()
    }
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word: u64 = rng.random();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    out
}

fn bits_to_octets(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1)))
        .collect()
}

fn octets_to_bits(octets: &[u8]) -> Vec<u8> {
    octets.iter().flat_map(|&o| (0..8).rev().map(move |i| (o >> i) & 1)).collect()
}

impl Link {
    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    /// Information bits carried by one frame.
    pub fn info_bits_per_frame(&self) -> usize {
        let bps = self.bits_per_symbol();
        match &self.coding {
            Coding::Uncoded => bps * UNCODED_FRAME_SYMBOLS,
            Coding::Ldpc(c) => c.k * self.ldpc_codewords_per_frame(c),
            Coding::Conv(c) => c.block_length,
            Coding::Rs { cfg, blocks, .. } => cfg.k * 8 * blocks,
        }
    }

    /// Enough LDPC codewords that the frame fills whole symbols.
    fn ldpc_codewords_per_frame(&self, c: &LdpcConfig) -> usize {
        let bps = self.bits_per_symbol();
        bps / gcd(c.n, bps)
    }

    pub fn validate(&self) -> Result<()> {
        if let (Modulation::Differential(_), Coding::Ldpc(_) | Coding::Conv(_)) =
            (&self.modulation, &self.coding)
        {
            return Err(Error::Config(format!(
                "{}: differential detection yields hard bits; use uncoded or RS coding",
                self.name
            )));
        }
        if let Coding::Rs { blocks, .. } = &self.coding {
            if *blocks == 0 {
                return Err(Error::Config(format!("{}: RS frame needs at least one block", self.name)));
            }
        }
        Ok(())
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        match &self.coding {
            Coding::Uncoded => Ok(info.to_vec()),
            Coding::Ldpc(c) => {
                let mut out = Vec::with_capacity(info.len() / c.k * c.n);
                for block in info.chunks(c.k) {
                    out.extend(ldpc_encode(block, c)?);
                }
                Ok(out)
            }
            Coding::Conv(c) => conv_encode(info, c),
            Coding::Rs {
                cfg,
                blocks,
                interleave,
            } => {
                let octets = bits_to_octets(info);
                let mut coded = Vec::with_capacity(blocks * cfg.n);
                for block in octets.chunks(cfg.k) {
                    coded.extend(rs_encode(block, cfg)?);
                }
                if *interleave {
                    coded = BlockInterleaver::new(*blocks, cfg.n)?.interleave(&coded)?;
                }
                Ok(octets_to_bits(&coded))
            }
        }
    }

    /// Counts information-bit errors from soft values (coherent links).
    fn decode_soft(&self, llrs: &[f64], info: &[u8]) -> Result<u64> {
        let decided: Vec<u8> = match &self.coding {
            Coding::Uncoded => llrs.iter().map(|&l| u8::from(l < 0.0)).collect(),
            Coding::Ldpc(c) => {
                let mut out = Vec::with_capacity(info.len());
                for block in llrs.chunks(c.n) {
                    out.extend(ldpc_decode(block, c)?.message);
                }
                out
            }
            Coding::Conv(c) => conv_decode(llrs, c)?,
            Coding::Rs { .. } => {
                let hard: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
                return self.decode_hard(&hard, info);
            }
        };
        Ok(count_errors(&decided[..info.len()], info))
    }

    fn decode_hard(&self, bits: &[u8], info: &[u8]) -> Result<u64> {
        match &self.coding {
            Coding::Uncoded => Ok(count_errors(&bits[..info.len()], info)),
            Coding::Rs {
                cfg,
                blocks,
                interleave,
            } => {
                let mut octets = bits_to_octets(&bits[..blocks * cfg.n * 8]);
                if *interleave {
                    octets = BlockInterleaver::new(*blocks, cfg.n)?.deinterleave(&octets)?;
                }
                let mut data = Vec::with_capacity(blocks * cfg.k);
                for block in octets.chunks(cfg.n) {
                    match rs_decode(block, cfg) {
                        Ok(d) => data.extend(d.data),
                        // A failed block is delivered uncorrected.
                        Err(Error::Uncorrectable(_)) => data.extend_from_slice(&block[..cfg.k]),
                        Err(e) => return Err(e),
                    }
                }
                Ok(count_errors(&octets_to_bits(&data), info))
            }
            _ => Err(Error::Config(format!("{}: code needs soft input", self.name))),
        }
    }

    /// Simulates one frame; returns (information bits, bit errors).
    pub fn run_frame(&self, sigma: f64, rng: &mut ChaCha8Rng) -> Result<(u64, u64)> {
        let bps = self.bits_per_symbol();
        let info = random_bits(rng, self.info_bits_per_frame());
        let mut coded = self.encode(&info)?;
        let pad = (bps - coded.len() % bps) % bps;
        coded.extend(std::iter::repeat_n(0, pad));

        let guard = self.filter.edge_symbols();
        let mut symbols = Vec::with_capacity(coded.len() / bps + 2 * guard + 1);
        match &self.modulation {
            Modulation::Coherent(c) => {
                symbols.extend((0..guard).map(|_| c.points()[rng.random_range(0..c.order())]));
                symbols.extend(c.map_bits(&coded)?);
                symbols.extend((0..guard).map(|_| c.points()[rng.random_range(0..c.order())]));
            }
            Modulation::Differential(table) => {
                let phase0 = f64::from(rng.random_range(0..8u8)) * std::f64::consts::FRAC_PI_4;
                let unit = |p: f64| Complex64::from_polar(1.0, p);
                symbols.extend((0..guard).map(|_| {
                    unit(f64::from(rng.random_range(0..8u8)) * std::f64::consts::FRAC_PI_4)
                }));
                symbols.push(unit(phase0));
                symbols.extend(d8psk_encode(table, &coded, phase0)?);
                symbols.extend((0..guard).map(|_| {
                    unit(f64::from(rng.random_range(0..8u8)) * std::f64::consts::FRAC_PI_4)
                }));
            }
        }

        let mut wave = shape(&symbols, &self.filter, self.symbol_rate)?.into_transmit();
        add_awgn_with(&mut wave.samples, sigma, rng);
        let est = matched_filter_downsample(&wave, &self.filter)?;
        let body = &est[guard..est.len() - guard];

        let errors = match &self.modulation {
            Modulation::Coherent(c) => {
                let variance = if sigma == 0.0 {
                    NOISELESS_VARIANCE
                } else {
                    sigma * sigma / (wave.gain * wave.gain)
                };
                let mut llrs = Vec::with_capacity(coded.len());
                c.demap_llr_into(body, variance, &mut llrs)?;
                self.decode_soft(&llrs, &info)?
            }
            Modulation::Differential(table) => {
                // The first body symbol is the known phase reference.
                let bits = d8psk_decode_with_reference(table, body[0], &body[1..])?;
                self.decode_hard(&bits, &info)?
            }
        };
        Ok((info.len() as u64, errors))
    }

    /// Noise standard deviation per sample at `ebn0_db`; infinite Eb/N0
    /// gives a noiseless channel.
    pub fn sigma(&self, ebn0_db: f64) -> Result<f64> {
        if ebn0_db == f64::INFINITY {
            return Ok(0.0);
        }
        noise_sigma(ebn0_db, self.bits_per_symbol() as f64, self.coding.rate(), self.filter.n_up)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Simulates one Eb/N0 point until the stop rule triggers.
pub fn run_ber_point(link: &Link, ebn0_db: f64, index: u32, stop: StopRule, seed: u64) -> Result<BerPoint> {
    let sigma = link.sigma(ebn0_db)?;
    let (mut bits, mut errors, mut frames) = (0u64, 0u64, 0u64);
    let mut next = 0u32;
    while errors < stop.min_errors && bits < stop.max_bits {
        let batch: Vec<Result<(u64, u64)>> = (next..next + FRAMES_PER_BATCH as u32)
            .into_par_iter()
            .map(|t| link.run_frame(sigma, &mut trial_rng(seed, index, t)))
            .collect();
        next += FRAMES_PER_BATCH as u32;
        for r in batch {
            let (b, e) = r?;
            bits += b;
            errors += e;
            frames += 1;
        }
    }
    Ok(BerPoint {
        ebn0_db,
        ber: if bits == 0 { 0.0 } else { errors as f64 / bits as f64 },
        bits,
        errors,
        frames,
    })
}

/// BER curve over `grid`, deterministic for a given seed at any thread count.
/// Points are simulated in grid order; with `end_on_zero` the sweep ends
/// after the first point without errors.
pub fn run_ber(link: &Link, grid: &[f64], stop: StopRule, seed: u64) -> Result<BerCurve> {
    link.validate()?;
    let mut points = Vec::with_capacity(grid.len());
    for (i, &e) in grid.iter().enumerate() {
        let p = run_ber_point(link, e, i as u32, stop, seed).map_err(|err| Error::AtPoint {
            ebn0_db: e,
            source: Box::new(err),
        })?;
        let zero = p.errors == 0;
        points.push(p);
        if zero && stop.end_on_zero {
            break;
        }
    }
    Ok(BerCurve {
        scheme: link.name.clone(),
        points,
    })
}
