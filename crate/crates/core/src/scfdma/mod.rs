//! DFT-spread OFDM generation of the single-carrier waveform.
//!
//! A block of `N` symbols is prefixed by `K` context symbols (the previous
//! block's tail, zeros at the start of a stream), transformed with an
//! `(N+K)`-point DFT, replicated `N_up` times (the frequency image of zero
//! insertion), multiplied by the DFT of the zero-padded taps and brought
//! back with an `(N+K)·N_up`-point IDFT. The last `N·N_up` output samples
//! equal direct filtering exactly; the first `K·N_up` are circular wrap and
//! are discarded.

mod counting;

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::shaping::FilterDesign;
use crate::waveform::WaveformBuffer;

pub use counting::{counting_fft, MultCounter};

#[derive(Clone)]
pub struct ScfdmaConfig {
    pub n: usize,
    pub k: usize,
    pub n_up: usize,
    pub filter: FilterDesign,
    /// DFT of the taps zero-padded to `(N+K)·N_up`.
    pub freq_response: Vec<Complex64>,
    small_fwd: Arc<dyn Fft<f64>>,
    small_inv: Arc<dyn Fft<f64>>,
    large_fwd: Arc<dyn Fft<f64>>,
    large_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ScfdmaConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScfdmaConfig")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("n_up", &self.n_up)
            .field("filter", &self.filter.kind)
            .finish()
    }
}

impl ScfdmaConfig {
    pub fn new(n: usize, filter: &FilterDesign) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("SC-FDMA block needs at least one symbol".into()));
        }
        let (k, n_up) = (filter.k, filter.n_up);
        let small = n + k;
        let large = small * n_up;
        if filter.taps.len() > large {
            return Err(Error::Config(format!(
                "{} taps do not fit a {large}-point transform",
                filter.taps.len()
            )));
        }
        let mut planner = FftPlanner::new();
        let large_fwd = planner.plan_fft_forward(large);
        let mut freq_response: Vec<Complex64> =
            filter.taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        freq_response.resize(large, Complex64::new(0.0, 0.0));
        large_fwd.process(&mut freq_response);
        Ok(ScfdmaConfig {
            n,
            k,
            n_up,
            filter: filter.clone(),
            freq_response,
            small_fwd: planner.plan_fft_forward(small),
            small_inv: planner.plan_fft_inverse(small),
            large_fwd,
            large_inv: planner.plan_fft_inverse(large),
        })
    }

    pub fn small_size(&self) -> usize {
        self.n + self.k
    }

    pub fn large_size(&self) -> usize {
        self.small_size() * self.n_up
    }

    /// One block: `context` holds the `K` preceding symbols.
    pub fn modulate_block(&self, context: &[Complex64], block: &[Complex64]) -> Result<Vec<Complex64>> {
        let spec = self.block_spectrum(context, block)?;
        Ok(self.spectrum_to_block(spec))
    }

    /// Filtered spectrum before the large IDFT (exposed for energy checks).
    pub fn block_spectrum(&self, context: &[Complex64], block: &[Complex64]) -> Result<Vec<Complex64>> {
        if block.len() != self.n {
            return Err(Error::length("scfdma block", self.n, block.len()));
        }
        if context.len() != self.k {
            return Err(Error::length("scfdma context", self.k, context.len()));
        }
        let mut small: Vec<Complex64> = context.iter().chain(block).copied().collect();
        self.small_fwd.process(&mut small);
        let m = self.small_size();
        Ok((0..self.large_size())
            .map(|i| small[i % m] * self.freq_response[i])
            .collect())
    }

    fn spectrum_to_block(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        self.large_inv.process(&mut spec);
        let scale = 1.0 / self.large_size() as f64;
        spec[self.k * self.n_up..].iter().map(|s| s * scale).collect()
    }

    /// Matched filter and decimation of one `(N+K)·N_up` window starting at
    /// the block's first symbol; returns `N` estimates.
    pub fn demodulate_window(&self, window: &[Complex64]) -> Result<Vec<Complex64>> {
        if window.len() != self.large_size() {
            return Err(Error::length("scfdma window", self.large_size(), window.len()));
        }
        let mut w = window.to_vec();
        self.large_fwd.process(&mut w);
        let m = self.small_size();
        // Correlation with the taps, then fold the N_up spectral replicas.
        let mut folded = vec![Complex64::new(0.0, 0.0); m];
        for (i, (x, h)) in w.iter().zip(&self.freq_response).enumerate() {
            folded[i % m] += x * h.conj();
        }
        self.small_inv.process(&mut folded);
        let scale = 1.0 / self.large_size() as f64;
        Ok(folded[..self.n].iter().map(|s| s * scale).collect())
    }
}

/// Modulates exactly `N` symbols with zero context. The result equals the
/// first `N·N_up` samples of direct filtering.
pub fn scfdma_modulate(symbols: &[Complex64], cfg: &ScfdmaConfig, symbol_rate: f64) -> Result<WaveformBuffer> {
    let zeros = vec![Complex64::new(0.0, 0.0); cfg.k];
    let samples = cfg.modulate_block(&zeros, symbols)?;
    Ok(WaveformBuffer::new(samples, symbol_rate * cfg.n_up as f64, cfg.n_up))
}

/// Modulates a stream block by block, handing the last `K` symbols of each
/// block to the next. Output length and samples match
/// [`crate::shaping::shape`].
pub fn scfdma_modulate_stream(symbols: &[Complex64], cfg: &ScfdmaConfig, symbol_rate: f64) -> Result<WaveformBuffer> {
    if symbols.is_empty() {
        return Err(Error::length("scfdma_modulate_stream", ">= 1 symbol", 0));
    }
    let total = symbols.len() * cfg.n_up + cfg.filter.taps.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    // Symbols plus enough zeros to flush the filter tail.
    let blocks = (symbols.len() + cfg.k).div_ceil(cfg.n);
    let mut padded = vec![zero; cfg.k];
    padded.extend_from_slice(symbols);
    padded.resize(cfg.k + blocks * cfg.n, zero);
    let mut out = Vec::with_capacity(blocks * cfg.n * cfg.n_up);
    for b in 0..blocks {
        let start = cfg.k + b * cfg.n;
        out.extend(cfg.modulate_block(&padded[start - cfg.k..start], &padded[start..start + cfg.n])?);
    }
    out.truncate(total);
    Ok(WaveformBuffer::new(out, symbol_rate * cfg.n_up as f64, cfg.n_up))
}

/// Frequency-domain matched filtering of a whole buffer. Produces the same
/// estimates as [`crate::shaping::matched_filter_downsample`].
pub fn scfdma_demodulate(wave: &WaveformBuffer, cfg: &ScfdmaConfig) -> Result<Vec<Complex64>> {
    let l = cfg.filter.taps.len();
    if wave.n_up != cfg.n_up {
        return Err(Error::Config(format!(
            "waveform has N_up = {} but SC-FDMA config has {}",
            wave.n_up, cfg.n_up
        )));
    }
    if wave.samples.len() < l {
        return Err(Error::length("scfdma_demodulate", format!(">= {l} samples"), wave.len()));
    }
    let count = (wave.samples.len() - l) / cfg.n_up + 1;
    let size = cfg.large_size();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(count);
    let mut b = 0;
    while out.len() < count {
        let start = b * cfg.n * cfg.n_up;
        let window: Vec<Complex64> = (start..start + size)
            .map(|i| wave.samples.get(i).copied().unwrap_or(zero))
            .collect();
        out.extend(cfg.demodulate_window(&window)?);
        b += 1;
    }
    out.truncate(count);
    let g = 1.0 / wave.gain;
    Ok(out.into_iter().map(|s| s * g).collect())
}

/// Real-valued model of the SC-FDMA multiplication count (transmitter plus
/// receiver):
/// `(N+K)·log2(N+K) + (N+K)·N_up·log2((N+K)·N_up) + 2·(N+K)·N_up`.
pub fn complexity_scfdma(n: usize, k: usize, n_up: usize) -> f64 {
    let s = (n + k) as f64;
    let l = s * n_up as f64;
    s * s.log2() + l * l.log2() + 2.0 * l
}

/// Conventional filtering, transmitter plus receiver:
/// `K·(K+1) + K·(N·N_up − L)` with `L = K·N_up + 1`.
pub fn complexity_conventional(n: usize, k: usize, n_up: usize) -> Result<u64> {
    let l = k * n_up + 1;
    if n * n_up < l {
        return Err(Error::Domain(format!("N·N_up = {} is shorter than the filter ({l})", n * n_up)));
    }
    Ok((k * (k + 1) + k * (n * n_up - l)) as u64)
}

/// Tap-sample products for one block, transmitter plus receiver. The
/// polyphase transmit filter runs in steady state (all `K` context symbols
/// present) and the receiver evaluates the matched filter only at the `N`
/// symbol instants.
pub fn measured_mults_conventional(n: usize, k: usize, n_up: usize) -> u64 {
    let l = k * n_up + 1;
    // Phase p uses the taps p, p + N_up, ... below L.
    let tx_per_symbol: usize = (0..n_up).map(|p| (l - p).div_ceil(n_up)).sum();
    (n * tx_per_symbol + n * l) as u64
}

/// Multiplications of the instrumented transform path, transmitter plus
/// receiver: `(N+K)` DFT, per-bin filter, `(N+K)·N_up` IDFT, then the
/// mirror image on receive.
pub fn measured_mults_scfdma(n: usize, k: usize, n_up: usize) -> u64 {
    let small = n + k;
    let large = small * n_up;
    let mut counter = MultCounter::default();
    let probe_small = vec![Complex64::new(1.0, 0.0); small];
    let probe_large = vec![Complex64::new(1.0, 0.0); large];
    for inverse in [false, true] {
        let _ = counting_fft(&probe_small, inverse, &mut counter);
        let _ = counting_fft(&probe_large, !inverse, &mut counter);
    }
    counter.count + 2 * large as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub n: usize,
    pub analytic_conventional: u64,
    pub analytic_scfdma: f64,
    pub measured_mults_conventional: u64,
    pub measured_mults_scfdma: u64,
}

pub fn complexity_table(ns: &[usize], k: usize, n_up: usize) -> Result<Vec<ComplexityRow>> {
    ns.iter()
        .map(|&n| {
            Ok(ComplexityRow {
                n,
                analytic_conventional: complexity_conventional(n, k, n_up)?,
                analytic_scfdma: complexity_scfdma(n, k, n_up),
                measured_mults_conventional: measured_mults_conventional(n, k, n_up),
                measured_mults_scfdma: measured_mults_scfdma(n, k, n_up),
            })
        })
        .collect()
}

/// Steady-state polyphase filtering of one block with `K` context symbols,
/// returning the same `N·N_up` samples as [`ScfdmaConfig::modulate_block`].
pub fn conventional_block(filter: &FilterDesign, context: &[Complex64], block: &[Complex64]) -> Vec<Complex64> {
    let n_up = filter.n_up;
    let k = context.len();
    let l = filter.taps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); block.len() * n_up];
    let sym = |i: usize| if i < k { context[i] } else { block[i - k] };
    for (o, y) in out.iter_mut().enumerate() {
        // Absolute sample index within [context | block].
        let n = o + k * n_up;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tap = n % n_up;
        let mut idx = n / n_up;
        loop {
            acc += sym(idx) * filter.taps[tap];
            tap += n_up;
            if tap >= l || idx == 0 {
                break;
            }
            idx -= 1;
        }
        *y = acc;
    }
    out
}

/// Time-domain matched filter evaluated at the first `n` symbol instants of
/// a window, the counterpart of [`ScfdmaConfig::demodulate_window`].
pub fn conventional_receive(filter: &FilterDesign, window: &[Complex64], n: usize) -> Vec<Complex64> {
    let n_up = filter.n_up;
    (0..n)
        .map(|i| {
            let w = &window[i * n_up..i * n_up + filter.taps.len()];
            w.iter().zip(&filter.taps).map(|(x, h)| x * h).sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub median_ns_conventional: f64,
    pub median_ns_scfdma: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Wall-clock medians of one transmit block plus one receive window for each
/// `N`, on both paths. Outputs are checked for equivalence before any timing.
pub fn benchmark_paths(ns: &[usize], filter: &FilterDesign, trials: usize, seed: u64) -> Result<Vec<BenchRow>> {
    use rand::Rng;
    if trials < 100 {
        return Err(Error::Domain(format!("benchmark needs >= 100 trials, got {trials}")));
    }
    let mut rng = crate::channel::trial_rng(seed, 0xFFFF_0100, 0);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = ScfdmaConfig::new(n, filter)?;
        let mut sym = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let context: Vec<Complex64> = (0..cfg.k).map(|_| sym()).collect();
        let block: Vec<Complex64> = (0..n).map(|_| sym()).collect();

        let window: Vec<Complex64> = (0..cfg.large_size()).map(|_| sym()).collect();

        let a = conventional_block(filter, &context, &block);
        let b = cfg.modulate_block(&context, &block)?;
        let err = max_relative_error(&b, &a);
        let ra = conventional_receive(filter, &window, n);
        let rb = cfg.demodulate_window(&window)?;
        let err = err.max(max_relative_error(&rb, &ra));
        if err >= 1e-9 {
            return Err(Error::Config(format!("paths disagree at N = {n}: {err:e}")));
        }

        let mut t_conv = Vec::with_capacity(trials);
        let mut t_sc = Vec::with_capacity(trials);
        for _ in 0..trials {
            let t = Instant::now();
            std::hint::black_box(conventional_block(filter, std::hint::black_box(&context), &block));
            std::hint::black_box(conventional_receive(filter, std::hint::black_box(&window), n));
            t_conv.push(t.elapsed().as_nanos() as f64);
            let t = Instant::now();
            std::hint::black_box(cfg.modulate_block(std::hint::black_box(&context), &block)?);
            std::hint::black_box(cfg.demodulate_window(std::hint::black_box(&window))?);
            t_sc.push(t.elapsed().as_nanos() as f64);
        }
        rows.push(BenchRow {
            n,
            median_ns_conventional: median(t_conv),
            median_ns_scfdma: median(t_sc),
        });
    }
    Ok(rows)
}

/// `max |a − b| / max |b|` over the common prefix.
pub fn max_relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let peak = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        worst
    } else {
        worst / peak
    }
}

/// `N,analytic_conventional,analytic_scfdma,measured_mults_conventional,measured_mults_scfdma`
pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from(
        "N,analytic_conventional,analytic_scfdma,measured_mults_conventional,measured_mults_scfdma\n",
    );
    for r in rows {
        out += &format!(
            "{},{},{},{},{}\n",
            r.n, r.analytic_conventional, r.analytic_scfdma, r.measured_mults_conventional, r.measured_mults_scfdma
        );
    }
    out
}

/// `N,median_ns_conventional,median_ns_scfdma`
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("N,median_ns_conventional,median_ns_scfdma\n");
    for r in rows {
        out += &format!("{},{},{}\n", r.n, r.median_ns_conventional, r.median_ns_scfdma);
    }
    out
}
