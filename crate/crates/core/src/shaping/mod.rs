//! Pulse-shaping filter design (SRRC and Parks-McClellan), transmit shaping
//! and matched filtering.
//!
//! Every design has `L = K·N_up + 1` taps, is even-symmetric and has unit
//! energy. The group delay of one filter is `(L - 1) / 2` samples, so a
//! transmit/receive cascade peaks `L - 1` samples after each symbol.

mod remez;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::WaveformBuffer;

pub use remez::{remez_type1, Band, RemezResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Srrc,
    Pm,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterKind::Srrc => "SRRC",
            FilterKind::Pm => "PM",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    pub kind: FilterKind,
    pub taps: Vec<f64>,
    pub n_up: usize,
    pub k: usize,
    pub roll_off: Option<f64>,
    /// Band edges in cycles/sample at the upsampled rate.
    pub f_pass: Option<f64>,
    pub f_stop: Option<f64>,
    /// Measured stopband attenuation relative to the passband peak.
    pub stopband_atten_db: Option<f64>,
    /// Stopband weight relative to the passband weight (PM only).
    pub stop_weight: Option<f64>,
}

impl FilterDesign {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Group delay of one filter in samples.
    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Symbols at each end of a stream affected by the filter edges.
    pub fn edge_symbols(&self) -> usize {
        self.k / 2
    }

    /// Magnitude response at `f` cycles/sample.
    pub fn magnitude(&self, f: f64) -> f64 {
        let c = self.group_delay() as f64;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, h)| h * (2.0 * PI * f * (n as f64 - c)).cos())
            .sum::<f64>()
            .abs()
    }

    /// Attenuation (dB) of the worst stopband point above `f_stop`
    /// relative to the passband peak below `f_pass`.
    pub fn measure_stopband_db(&self, f_pass: f64, f_stop: f64) -> f64 {
        let grid = 8192;
        let mut pass: f64 = 0.0;
        let mut stop: f64 = 0.0;
        for i in 0..=grid {
            let f = 0.5 * i as f64 / grid as f64;
            let m = self.magnitude(f);
            if f <= f_pass {
                pass = pass.max(m);
            } else if f >= f_stop {
                stop = stop.max(m);
            }
        }
        20.0 * (pass / stop).log10()
    }

    /// Plain-text export: `# key=value` metadata lines followed by one tap
    /// per line.
    pub fn export(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind={}", self.kind);
        let _ = writeln!(out, "# n_up={}", self.n_up);
        let _ = writeln!(out, "# k={}", self.k);
        let _ = writeln!(out, "# taps={}", self.taps.len());
        let opt = |name: &str, v: Option<f64>, out: &mut String| {
            if let Some(v) = v {
                let _ = writeln!(out, "# {name}={v}");
            }
        };
        opt("roll_off", self.roll_off, &mut out);
        opt("f_pass", self.f_pass, &mut out);
        opt("f_stop", self.f_stop, &mut out);
        opt("stopband_atten_db", self.stopband_atten_db, &mut out);
        opt("stop_weight", self.stop_weight, &mut out);
        for t in &self.taps {
            let _ = writeln!(out, "{t:.17e}");
        }
        out
    }

    pub fn import(text: &str) -> Result<Self> {
        let mut meta = std::collections::HashMap::new();
        let mut taps = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else {
                taps.push(
                    line.parse::<f64>()
                        .map_err(|e| Error::data("filter", format!("bad tap {line:?}: {e}")))?,
                );
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| Error::data("filter", format!("missing {k}")));
        let num = |k: &str| -> Result<Option<f64>> {
            meta.get(k)
                .map(|v| v.parse::<f64>().map_err(|e| Error::data("filter", format!("{k}: {e}"))))
                .transpose()
        };
        let kind = match get("kind")?.as_str() {
            "SRRC" => FilterKind::Srrc,
            "PM" => FilterKind::Pm,
            other => return Err(Error::data("filter", format!("unknown kind {other}"))),
        };
        let n_up: usize = get("n_up")?.parse().map_err(|_| Error::data("filter", "bad n_up"))?;
        let k: usize = get("k")?.parse().map_err(|_| Error::data("filter", "bad k"))?;
        if taps.len() != k * n_up + 1 {
            return Err(Error::data(
                "filter",
                format!("{} taps, expected {}", taps.len(), k * n_up + 1),
            ));
        }
        Ok(FilterDesign {
            kind,
            taps,
            n_up,
            k,
            roll_off: num("roll_off")?,
            f_pass: num("f_pass")?,
            f_stop: num("f_stop")?,
            stopband_atten_db: num("stopband_atten_db")?,
            stop_weight: num("stop_weight")?,
        })
    }
}

fn check_span(n_up: usize, k: usize) -> Result<()> {
    if n_up < 2 || k < 2 {
        return Err(Error::Domain(format!("need N_up >= 2 and K >= 2, got {n_up}, {k}")));
    }
    Ok(())
}

fn unit_energy(mut taps: Vec<f64>) -> Vec<f64> {
    let e = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    for t in &mut taps {
        *t /= e;
    }
    // Exact symmetry after rounding.
    let l = taps.len();
    for i in 0..l / 2 {
        taps[l - 1 - i] = taps[i];
    }
    taps
}

/// Square-root raised cosine, `t` in symbol periods.
fn srrc_at(t: f64, alpha: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    if ((4.0 * alpha * t).abs() - 1.0).abs() < 1e-12 {
        let a = PI / (4.0 * alpha);
        return alpha / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

pub fn design_srrc(alpha: f64, n_up: usize, k: usize) -> Result<FilterDesign> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("roll-off {alpha} outside (0, 1]")));
    }
    check_span(n_up, k)?;
    let l = k * n_up + 1;
    let c = (l - 1) as f64 / 2.0;
    let taps = (0..l)
        .map(|n| srrc_at((n as f64 - c) / n_up as f64, alpha))
        .collect();
    Ok(FilterDesign {
        kind: FilterKind::Srrc,
        taps: unit_energy(taps),
        n_up,
        k,
        roll_off: Some(alpha),
        f_pass: None,
        f_stop: None,
        stopband_atten_db: None,
        stop_weight: None,
    })
}

/// Default band edges in cycles/sample: `f_pass = 1 / N_up²`, `f_stop = 3.4·f_pass`.
pub fn pm_band_edges(n_up: usize) -> (f64, f64) {
    let f_pass = 1.0 / (n_up * n_up) as f64;
    (f_pass, 3.4 * f_pass)
}

/// Converts band edges in Hz to cycles/sample at `fs` samples/s.
pub fn edges_from_hz(f_pass_hz: f64, f_stop_hz: f64, fs: f64) -> (f64, f64) {
    (f_pass_hz / fs, f_stop_hz / fs)
}

/// Parks-McClellan design with the default band edges. The symbol rate only
/// fixes the Hz scale; the taps depend on `N_up`, `K` and the attenuation.
pub fn design_pm(symbol_rate: f64, n_up: usize, k: usize, atten_db: f64) -> Result<FilterDesign> {
    if !(symbol_rate > 0.0) {
        return Err(Error::Domain(format!("symbol rate {symbol_rate} must be positive")));
    }
    let (fp, fs) = pm_band_edges(n_up);
    design_pm_edges(n_up, k, fp, fs, atten_db)
}

/// Parks-McClellan design with explicit band edges (cycles/sample).
///
/// Starts from equal band weights and raises the stopband weight until the
/// measured attenuation reaches `atten_db`. Among the stopband weights that
/// keep the target, the one whose matched cascade has the lowest
/// symbol-spaced ISI is then kept.
pub fn design_pm_edges(
    n_up: usize,
    k: usize,
    f_pass: f64,
    f_stop: f64,
    atten_db: f64,
) -> Result<FilterDesign> {
    check_span(n_up, k)?;
    if atten_db < 40.0 {
        return Err(Error::Domain(format!("attenuation {atten_db} dB below 40 dB")));
    }
    if !(0.0 < f_pass && f_pass < f_stop && f_stop < 0.5) {
        return Err(Error::Domain(format!("band edges {f_pass}, {f_stop} not ordered in (0, 0.5)")));
    }
    let l = k * n_up + 1;
    let build = |weight: f64| -> Result<FilterDesign> {
        let bands = [
            Band { lo: 0.0, hi: f_pass, desired: 1.0, weight: 1.0 },
            Band { lo: f_stop, hi: 0.5, desired: 0.0, weight },
        ];
        let res = remez_type1(l, &bands)?;
        let mut d = FilterDesign {
            kind: FilterKind::Pm,
            taps: unit_energy(res.taps),
            n_up,
            k,
            roll_off: None,
            f_pass: Some(f_pass),
            f_stop: Some(f_stop),
            stopband_atten_db: None,
            stop_weight: Some(weight),
        };
        d.stopband_atten_db = Some(d.measure_stopband_db(f_pass, f_stop));
        Ok(d)
    };

    const WEIGHT_STEPS: usize = 60;
    let mut weight = 1.0;
    let mut feasible = None;
    let mut last = f64::NAN;
    for _ in 0..WEIGHT_STEPS {
        let d = build(weight)?;
        last = d.stopband_atten_db.unwrap_or(f64::NAN);
        if last >= atten_db {
            feasible = Some(d);
            break;
        }
        weight *= 10f64.powf((atten_db - last + 0.25) / 20.0);
    }
    let Some(mut best) = feasible else {
        return Err(Error::Design {
            iterations: WEIGHT_STEPS,
            reason: format!("stopband reached {last:.2} dB, target {atten_db} dB"),
        });
    };

    // Eighth-octave scan over four octaves either side.
    let mut best_isi = check_nyquist(&best);
    for j in -32..=32 {
        let w = weight * 2f64.powf(j as f64 / 8.0);
        let Ok(d) = build(w) else { continue };
        if d.stopband_atten_db.unwrap_or(0.0) < atten_db {
            continue;
        }
        let isi = check_nyquist(&d);
        if isi < best_isi {
            best_isi = isi;
            best = d;
        }
    }
    Ok(best)
}

/// Zero-insert upsampling by `N_up` followed by convolution with the taps.
/// Output length is `|symbols|·N_up + L - 1`.
pub fn shape(symbols: &[Complex64], filter: &FilterDesign, symbol_rate: f64) -> Result<WaveformBuffer> {
    if symbols.is_empty() {
        return Err(Error::length("shape", ">= 1 symbol", 0));
    }
    let n_up = filter.n_up;
    let l = filter.taps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); symbols.len() * n_up + l - 1];
    // Polyphase form: each output sample only touches the taps in its phase.
    for (n, y) in out.iter_mut().enumerate() {
        let phase = n % n_up;
        let last = n / n_up;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut tap = phase;
        let mut idx = last as isize;
        while tap < l && idx >= 0 {
            if let Some(s) = symbols.get(idx as usize) {
                acc += s * filter.taps[tap];
            }
            tap += n_up;
            idx -= 1;
        }
        *y = acc;
    }
    Ok(WaveformBuffer::new(out, symbol_rate * n_up as f64, n_up))
}

/// Matched filter and symbol-rate sampling at `i·N_up + L - 1`, divided by
/// the buffer gain. Returns one estimate per transmitted symbol.
pub fn matched_filter_downsample(wave: &WaveformBuffer, filter: &FilterDesign) -> Result<Vec<Complex64>> {
    let l = filter.taps.len();
    if wave.n_up != filter.n_up {
        return Err(Error::Config(format!(
            "waveform has N_up = {} but filter has {}",
            wave.n_up, filter.n_up
        )));
    }
    if wave.samples.len() < l {
        return Err(Error::length("matched_filter_downsample", format!(">= {l} samples"), wave.len()));
    }
    let count = (wave.samples.len() - l) / filter.n_up + 1;
    let scale = 1.0 / wave.gain;
    let x = &wave.samples;
    Ok((0..count)
        .map(|i| {
            // y[m] = sum_j h[j] x[m - j] with m = i·N_up + L - 1.
            let m = i * filter.n_up + l - 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, h) in filter.taps.iter().enumerate() {
                acc += x[m - j] * *h;
            }
            acc * scale
        })
        .collect())
}

/// Peak inter-symbol interference of the matched cascade relative to its
/// peak.
pub fn check_nyquist(filter: &FilterDesign) -> f64 {
    let h = &filter.taps;
    let l = h.len();
    let mut g = vec![0.0; 2 * l - 1];
    for (i, a) in h.iter().enumerate() {
        for (j, b) in h.iter().enumerate() {
            g[i + j] += a * b;
        }
    }
    let peak = g[l - 1];
    let mut worst: f64 = 0.0;
    let mut off = filter.n_up;
    while off < l {
        worst = worst.max(g[l - 1 + off].abs()).max(g[l - 1 - off].abs());
        off += filter.n_up;
    }
    worst / peak.abs()
}
