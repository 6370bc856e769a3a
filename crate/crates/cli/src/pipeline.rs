//! Scenario → simulation results. Everything here returns core errors; the
//! caller decides exit codes.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use avdl_core::channel::{add_awgn_with, noise_sigma, trial_rng};
use avdl_core::constellation::{
    build_constellation, d8psk_decode_with_reference, d8psk_encode, PhaseTable, Scheme,
};
use avdl_core::fec::{ConvConfig, LdpcConfig, RsConfig};
use avdl_core::framing::{
    bits_to_tribits, build_frame, dump_frame, parse_frame, tribits_to_bits, FrameConfig, PayloadMode,
};
use avdl_core::metrics::{
    backoff_at, ccdf_from_paprs, ebn0_at_ber, estimate_psd, frame_paprs, info_bit_rate,
    link_margin_table, random_waveform, run_ber, BerCurve, CcdfCurve, Coding, Link, LinkMarginRow,
    LmInput, Modulation, PsdCurve, StopRule, BER_TARGET,
};
use avdl_core::scfdma::{
    benchmark_paths, complexity_table, max_relative_error, scfdma_demodulate, scfdma_modulate,
    scfdma_modulate_stream, BenchRow, ComplexityRow, ScfdmaConfig,
};
use avdl_core::shaping::{
    design_pm, design_srrc, matched_filter_downsample, shape, FilterDesign, FilterKind,
};
use avdl_core::{Error, Result};

use crate::scenario::{parse_mapping, CodeKind, FilterSpec, Mapping, Scenario, SchemeSpec};

const DEFAULT_RS_BLOCKS: usize = 8;
const DEFAULT_CONV_BLOCK: usize = 48_600;
const DEFAULT_PM_ATTEN_DB: f64 = 80.0;

/// Per-name seed offset so results do not depend on a scheme's position.
fn name_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3));
    seed ^ h
}

pub fn build_filter(spec: &FilterSpec, symbol_rate: f64) -> Result<FilterDesign> {
    match spec.kind {
        FilterKind::Srrc => design_srrc(spec.roll_off.unwrap_or(0.6), spec.n_up, spec.span),
        FilterKind::Pm => design_pm(
            symbol_rate,
            spec.n_up,
            spec.span,
            spec.stopband_atten_db.unwrap_or(DEFAULT_PM_ATTEN_DB),
        ),
    }
}

/// Filters and LDPC codes are expensive to build; each is built once.
#[derive(Default)]
pub struct Cache {
    filters: HashMap<String, Arc<FilterDesign>>,
    ldpc: HashMap<String, Arc<LdpcConfig>>,
}

impl Cache {
    pub fn filter(&mut self, sc: &Scenario, name: Option<&str>) -> Result<Arc<FilterDesign>> {
        let spec = sc
            .filter_named(name)
            .ok_or_else(|| Error::Config(format!("filter {name:?} not defined")))?;
        if let Some(f) = self.filters.get(&spec.name) {
            return Ok(f.clone());
        }
        let f = Arc::new(build_filter(spec, sc.symbol_rate_hz)?);
        self.filters.insert(spec.name.clone(), f.clone());
        Ok(f)
    }

    pub fn ldpc(&mut self, name: &str) -> Result<Arc<LdpcConfig>> {
        if let Some(c) = self.ldpc.get(name) {
            return Ok(c.clone());
        }
        let c = Arc::new(LdpcConfig::by_name(name)?);
        self.ldpc.insert(name.to_string(), c.clone());
        Ok(c)
    }
}

pub fn modulation(scheme: Scheme, order: usize) -> Result<Modulation> {
    Ok(match scheme {
        Scheme::D8psk => Modulation::Differential(PhaseTable::bundled()?),
        s => Modulation::Coherent(build_constellation(s, order)?),
    })
}

pub fn build_link(sc: &Scenario, s: &SchemeSpec, cache: &mut Cache) -> Result<Link> {
    let coding = match s.code {
        CodeKind::Uncoded => Coding::Uncoded,
        CodeKind::Ldpc => Coding::Ldpc(cache.ldpc(s.ldpc_name())?),
        CodeKind::Conv => Coding::Conv(ConvConfig::standard_r3_4(s.conv_block.unwrap_or(DEFAULT_CONV_BLOCK))?),
        CodeKind::Rs => Coding::Rs {
            cfg: RsConfig::vdl(),
            blocks: s.rs_blocks.unwrap_or(DEFAULT_RS_BLOCKS),
            interleave: s.interleave,
        },
    };
    let link = Link {
        name: s.name.clone(),
        modulation: modulation(s.modulation, s.order)?,
        coding,
        filter: cache.filter(sc, s.filter.as_deref())?,
        symbol_rate: s.symbol_rate_hz.unwrap_or(sc.symbol_rate_hz),
    };
    link.validate()?;
    Ok(link)
}

pub fn ber_curves(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<Vec<BerCurve>> {
    let b = sc.ber.as_ref().ok_or_else(|| Error::Config("missing [ber] section".into()))?;
    let stop = StopRule {
        min_errors: b.min_errors,
        max_bits: b.max_bits,
        end_on_zero: b.end_on_zero,
    };
    sc.schemes
        .iter()
        .map(|s| {
            let link = build_link(sc, s, cache)?;
            let grid = s.ebn0_db.as_deref().unwrap_or(&b.ebn0_db);
            run_ber(&link, grid, stop, name_seed(seed, &s.name))
        })
        .collect()
}

pub fn papr_curves(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<Vec<CcdfCurve>> {
    let p = sc.papr.as_ref().ok_or_else(|| Error::Config("missing [papr] section".into()))?;
    sc.schemes
        .iter()
        .map(|s| {
            let filter = cache.filter(sc, s.filter.as_deref())?;
            let m = modulation(s.modulation, s.order)?;
            let v = frame_paprs(&m, &filter, p.frame_symbols, p.frames, name_seed(seed, &s.name))?;
            Ok(ccdf_from_paprs(&s.name, v))
        })
        .collect()
}

pub fn psd_curves(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<Vec<PsdCurve>> {
    let p = sc.psd.as_ref().ok_or_else(|| Error::Config("missing [psd] section".into()))?;
    sc.schemes
        .iter()
        .map(|s| {
            let filter = cache.filter(sc, s.filter.as_deref())?;
            let m = modulation(s.modulation, s.order)?;
            let rate = s.symbol_rate_hz.unwrap_or(sc.symbol_rate_hz);
            let w = random_waveform(&m, &filter, p.symbols, rate, name_seed(seed, &s.name))?;
            estimate_psd(&w, p.segment, p.overlap, &s.name)
        })
        .collect()
}

/// Information bit rate of a scheme in kbps.
pub fn scheme_rate_kbps(sc: &Scenario, s: &SchemeSpec, cache: &mut Cache) -> Result<f64> {
    let link = build_link(sc, s, cache)?;
    Ok(info_bit_rate(link.symbol_rate / 1000.0, s.order, link.coding.rate()))
}

/// Link-margin rows, baseline first, then the other schemes in file order.
pub fn lm_rows(sc: &Scenario, ber: &[BerCurve], papr: &[CcdfCurve], cache: &mut Cache) -> Result<Vec<LinkMarginRow>> {
    let level = sc.papr.as_ref().map_or(1e-3, |p| p.ccdf_level);
    let mut inputs = Vec::with_capacity(sc.schemes.len());
    for (i, s) in sc.schemes.iter().enumerate() {
        inputs.push(LmInput {
            name: &s.name,
            ber: &ber[i],
            ccdf: &papr[i],
            rate_kbps: scheme_rate_kbps(sc, s, cache)?,
        });
    }
    let base = sc
        .schemes
        .iter()
        .position(|s| s.baseline)
        .ok_or_else(|| Error::Config("no baseline scheme".into()))?;
    let baseline = inputs.remove(base);
    if level != avdl_core::metrics::CCDF_TARGET {
        return Err(Error::Config(format!(
            "link margins are defined at CCDF {}, scenario uses {level}",
            avdl_core::metrics::CCDF_TARGET
        )));
    }
    link_margin_table(&baseline, &inputs)
}

/// One Eb/N0 at BER 1e-4 per curve, or the reason it is missing.
pub fn ber_summary(curves: &[BerCurve]) -> String {
    let mut out = String::new();
    for c in curves {
        match ebn0_at_ber(c, BER_TARGET) {
            Ok(e) => out += &format!("{:<12} Eb/N0 at BER {BER_TARGET:e}: {e:.2} dB\n", c.scheme),
            Err(_) => out += &format!("{:<12} BER {BER_TARGET:e} not bracketed by the grid\n", c.scheme),
        }
    }
    out
}

pub fn papr_summary(curves: &[CcdfCurve], level: f64) -> String {
    let mut out = String::new();
    for c in curves {
        match backoff_at(c, level) {
            Ok(p) => out += &format!("{:<12} PAPR at CCDF {level:e}: {p:.2} dB\n", c.scheme),
            Err(e) => out += &format!("{:<12} {e}\n", c.scheme),
        }
    }
    out
}

fn mapped_symbols(mapping: Mapping, n: usize, rng: &mut impl Rng) -> Result<Vec<Complex64>> {
    Ok(match mapping {
        Mapping::Bpsk => (0..n)
            .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        Mapping::Constellation(s, m) => {
            let c = build_constellation(s, m)?;
            (0..n).map(|_| c.points()[rng.random_range(0..m)]).collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub case: usize,
    pub filter: String,
    pub mapping: String,
    pub n: usize,
    pub k: usize,
    pub n_up: usize,
    pub symbols: usize,
    pub tx_error: f64,
    pub rx_error: f64,
}

pub struct VerifyOutput {
    pub rows: Vec<VerifyRow>,
    /// Sample index, direct filtering and SC-FDMA output of the first case.
    pub waveform: Vec<(Complex64, Complex64)>,
}

impl VerifyOutput {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.tx_error.max(r.rx_error)).fold(0.0, f64::max)
    }
}

fn verify_case(case: usize, filter: &FilterDesign, label: &str, n: usize, symbols: &[Complex64]) -> Result<(VerifyRow, Vec<(Complex64, Complex64)>)> {
    let cfg = ScfdmaConfig::new(n, filter)?;
    let direct = shape(symbols, filter, 1.0)?;
    let (tx, wave) = if symbols.len() == n {
        let a = scfdma_modulate(symbols, &cfg, 1.0)?;
        let err = max_relative_error(&a.samples, &direct.samples[..a.len()]);
        (err, direct.samples.iter().zip(&a.samples).map(|(d, s)| (*d, *s)).collect())
    } else {
        let a = scfdma_modulate_stream(symbols, &cfg, 1.0)?;
        (max_relative_error(&a.samples, &direct.samples), Vec::new())
    };
    let rx = max_relative_error(&scfdma_demodulate(&direct, &cfg)?, &matched_filter_downsample(&direct, filter)?);
    Ok((
        VerifyRow {
            case,
            filter: format!("{}", filter.kind),
            mapping: label.to_string(),
            n,
            k: filter.k,
            n_up: filter.n_up,
            symbols: symbols.len(),
            tx_error: tx,
            rx_error: rx,
        },
        wave,
    ))
}

/// The scenario's configuration first, then `random_configs` randomized
/// (filter kind, K, N_up, N, mapping) cases.
pub fn scfdma_verify(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<VerifyOutput> {
    let s = sc.scfdma.as_ref().ok_or_else(|| Error::Config("missing [scfdma] section".into()))?;
    let filter = cache.filter(sc, s.filter.as_deref())?;
    let mapping = parse_mapping(&s.mapping).ok_or_else(|| Error::Config(format!("mapping {:?}", s.mapping)))?;
    let mut rng = trial_rng(seed, 0xFFFF_0200, 0);
    let syms = mapped_symbols(mapping, s.n, &mut rng)?;
    let (row, waveform) = verify_case(0, &filter, &s.mapping, s.n, &syms)?;
    let mut rows = vec![row];

    let mappings = ["bpsk", "psk8", "qam16", "apsk16", "qam256", "apsk256"];
    let mut pm_cache: HashMap<(usize, usize), Arc<FilterDesign>> = HashMap::new();
    for case in 1..=s.random_configs {
        let mut rng = trial_rng(seed, 0xFFFF_0201, case as u32);
        let srrc = rng.random::<bool>();
        // The PM band edges need N_up >= 3 to stay below Nyquist; short PM
        // filters only reach modest attenuation, which equivalence ignores.
        let n_up = rng.random_range(if srrc { 2 } else { 3 }..=6);
        let k = 2 * rng.random_range(2..=5);
        let f = if srrc {
            Arc::new(design_srrc(rng.random_range(0.1..=1.0), n_up, k)?)
        } else {
            match pm_cache.get(&(n_up, k)) {
                Some(f) => f.clone(),
                None => {
                    let f = Arc::new(design_pm(sc.symbol_rate_hz, n_up, k, 40.0)?);
                    pm_cache.insert((n_up, k), f.clone());
                    f
                }
            }
        };
        let label = mappings[rng.random_range(0..mappings.len())];
        let m = parse_mapping(label).expect("listed mappings parse");
        let n = rng.random_range(1..=64);
        let len = if rng.random::<bool>() { n } else { rng.random_range(1..=4 * n) };
        let syms = mapped_symbols(m, len, &mut rng)?;
        rows.push(verify_case(case, &f, label, n, &syms)?.0);
    }
    Ok(VerifyOutput { rows, waveform })
}

pub fn complexity(sc: &Scenario, cache: &mut Cache) -> Result<Vec<ComplexityRow>> {
    let s = sc.scfdma.as_ref().ok_or_else(|| Error::Config("missing [scfdma] section".into()))?;
    let f = cache.filter(sc, s.filter.as_deref())?;
    complexity_table(&s.n_grid, f.k, f.n_up)
}

pub fn bench(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<Vec<BenchRow>> {
    let s = sc.scfdma.as_ref().ok_or_else(|| Error::Config("missing [scfdma] section".into()))?;
    let f = cache.filter(sc, s.filter.as_deref())?;
    benchmark_paths(&s.n_grid, &f, s.trials, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRow {
    pub mode: String,
    /// `None` for the noiseless run.
    pub ebn0_db: Option<f64>,
    pub frames: usize,
    pub frames_ok: usize,
    pub frames_lost: usize,
    pub bit_errors: u64,
    pub payload_bits: usize,
}

struct FrameChain {
    cfg: FrameConfig,
    table: PhaseTable,
    filter: Option<Arc<FilterDesign>>,
    symbol_rate: f64,
}

impl FrameChain {
    /// Returns `None` when the burst could not be parsed, otherwise the
    /// number of payload bit errors.
    fn run(&self, payload: &[u8], tribits: &[u8], sigma: Option<f64>, rng: &mut impl Rng) -> Result<Option<u64>> {
        let received = match (sigma, &self.filter) {
            (Some(sigma), Some(filter)) => {
                let guard = filter.edge_symbols();
                let phase0 = f64::from(rng.random_range(0..8u8)) * std::f64::consts::FRAC_PI_4;
                let mut syms = vec![Complex64::from_polar(1.0, phase0); guard + 1];
                syms.extend(d8psk_encode(&self.table, &tribits_to_bits(tribits), phase0)?);
                let last = *syms.last().expect("non-empty");
                syms.extend(std::iter::repeat_n(last, guard));
                let mut w = shape(&syms, filter, self.symbol_rate)?.into_transmit();
                add_awgn_with(&mut w.samples, sigma, rng);
                let est = matched_filter_downsample(&w, filter)?;
                let body = &est[guard..est.len() - guard];
                bits_to_tribits(&d8psk_decode_with_reference(&self.table, body[0], &body[1..])?)
            }
            _ => tribits.to_vec(),
        };
        match parse_frame(&received, &self.cfg) {
            Ok((got, _)) if got.len() == payload.len() => {
                Ok(Some(got.iter().zip(payload).filter(|(a, b)| a != b).count() as u64))
            }
            Ok(_) => Ok(None),
            Err(Error::Sync { .. } | Error::Header(_) | Error::Uncorrectable(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

pub fn frame_roundtrip(sc: &Scenario, seed: u64, cache: &mut Cache) -> Result<(Vec<FrameRow>, String)> {
    let f = sc.frame.as_ref().ok_or_else(|| Error::Config("missing [frame] section".into()))?;
    let cfg = match f.mode {
        PayloadMode::RsLegacy => FrameConfig::legacy()?,
        PayloadMode::LdpcUpdated => FrameConfig::updated((*cache.ldpc(f.ldpc.as_deref().unwrap_or("dvbs2-r3_4-n64800"))?).clone())?,
    };
    let filter = if f.ebn0_db.is_empty() { None } else { Some(cache.filter(sc, f.filter.as_deref())?) };
    let chain = FrameChain {
        cfg,
        table: PhaseTable::bundled()?,
        filter,
        symbol_rate: sc.symbol_rate_hz,
    };
    let mode = match f.mode {
        PayloadMode::RsLegacy => "rs_legacy",
        PayloadMode::LdpcUpdated => "ldpc_updated",
    };
    let n_up = chain.filter.as_ref().map_or(1, |f| f.n_up);
    let points: Vec<Option<f64>> = std::iter::once(None).chain(f.ebn0_db.iter().copied().map(Some)).collect();
    let mut rows = Vec::with_capacity(points.len());
    let mut dump = String::new();
    for (pi, point) in points.iter().enumerate() {
        let sigma = point.map(|e| noise_sigma(e, 3.0, 1.0, n_up)).transpose()?;
        let outcomes: Vec<Result<Option<u64>>> = (0..f.frames)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, 0xFFFF_0300 + pi as u32, i as u32);
                let payload: Vec<u8> = (0..f.payload_bits).map(|_| rng.random_range(0..2u8)).collect();
                let tribits = build_frame(&payload, &chain.cfg)?;
                chain.run(&payload, &tribits, sigma, &mut rng)
            })
            .collect();
        let mut row = FrameRow {
            mode: mode.into(),
            ebn0_db: *point,
            frames: f.frames,
            frames_ok: 0,
            frames_lost: 0,
            bit_errors: 0,
            payload_bits: f.payload_bits,
        };
        for o in outcomes {
            match o? {
                Some(0) => row.frames_ok += 1,
                Some(e) => row.bit_errors += e,
                None => row.frames_lost += 1,
            }
        }
        rows.push(row);
        if pi == 0 {
            let mut rng = trial_rng(seed, 0xFFFF_0300, 0);
            let payload: Vec<u8> = (0..f.payload_bits).map(|_| rng.random_range(0..2u8)).collect();
            dump = dump_frame(&build_frame(&payload, &chain.cfg)?);
        }
    }
    Ok((rows, dump))
}
