//! Constellation construction, bit mapping and hard/soft demapping.
//!
//! Every constellation is normalized to unit average symbol energy. Bit
//! labels are read most significant bit first: the first bit of each
//! `log2(M)`-bit group in a stream is the label's MSB.

mod differential;

pub use differential::{
    d8psk_decode, d8psk_decode_with_reference, d8psk_encode, DifferentialState, PhaseTable,
};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data::{self, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Psk,
    D8psk,
    Qam,
    Apsk,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Psk => "PSK",
            Scheme::D8psk => "D8PSK",
            Scheme::Qam => "QAM",
            Scheme::Apsk => "APSK",
        })
    }
}

/// Supported (scheme, order) pairs.
pub const SUPPORTED: &[(Scheme, usize)] = &[
    (Scheme::Psk, 8),
    (Scheme::D8psk, 8),
    (Scheme::Qam, 16),
    (Scheme::Qam, 32),
    (Scheme::Qam, 64),
    (Scheme::Qam, 256),
    (Scheme::Apsk, 16),
    (Scheme::Apsk, 32),
    (Scheme::Apsk, 64),
    (Scheme::Apsk, 256),
];

/// Ordered symbol points with their bit labels.
#[derive(Debug, Clone)]
pub struct ConstellationSpec {
    scheme: Scheme,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    /// Ring index per point; single ring for PSK and unused for QAM.
    rings: Vec<usize>,
    bits: usize,
    point_of_label: Vec<usize>,
    /// Per bit position (MSB first): indices of points whose bit is 0 / 1.
    bit_sets: Vec<[Vec<usize>; 2]>,
}

fn gray(n: u32) -> u32 {
    n ^ (n >> 1)
}

/// Builds the constellation for a supported `(scheme, order)` pair.
pub fn build_constellation(scheme: Scheme, order: usize) -> Result<ConstellationSpec> {
    if !SUPPORTED.contains(&(scheme, order)) {
        return Err(Error::Config(format!(
            "unsupported modulation {scheme}/{order}"
        )));
    }
    match scheme {
        Scheme::Psk | Scheme::D8psk => psk8(scheme),
        Scheme::Qam if order == 32 => qam_cross32(),
        Scheme::Qam => qam_square(order),
        Scheme::Apsk => {
            let text = match order {
                16 => data::APSK16,
                32 => data::APSK32,
                64 => data::APSK64,
                _ => data::APSK256,
            };
            ConstellationSpec::from_table(&format!("apsk{order}"), text)
        }
    }
}

/// 8-PSK at angles k·π/4 with the Gray labeling of the D8PSK phase table,
/// so point k carries the label whose phase change is k·π/4.
fn psk8(scheme: Scheme) -> Result<ConstellationSpec> {
    let table = PhaseTable::bundled()?;
    let points = (0..8)
        .map(|k| Complex64::from_polar(1.0, k as f64 * PI / 4.0))
        .collect();
    let labels = (0..8).map(|k| table.label_of_step(k)).collect();
    ConstellationSpec::new(scheme, points, labels, vec![0; 8])
}

fn qam_square(order: usize) -> Result<ConstellationSpec> {
    let bits = order.trailing_zeros();
    let half = bits / 2;
    let side = 1usize << half;
    let level = |i: usize| (2 * i) as f64 - (side - 1) as f64;
    let mut points = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(level(i), level(q)));
            labels.push((gray(i as u32) << half) | gray(q as u32));
        }
    }
    ConstellationSpec::new(Scheme::Qam, points, labels, vec![0; order])
}

/// 32-point cross: an 8×4 Gray rectangle with its outer columns (|I| = 7)
/// folded onto the rows Q = ±5. Labels are quasi-Gray.
fn qam_cross32() -> Result<ConstellationSpec> {
    const GRAY2: [u32; 4] = [0, 1, 3, 2];
    let mut points = Vec::with_capacity(32);
    let mut labels = Vec::with_capacity(32);
    for i in 0..8u32 {
        let x = 2.0 * i as f64 - 7.0;
        for (q, &gq) in GRAY2.iter().enumerate() {
            let y = 2.0 * q as f64 - 3.0;
            let p = if x.abs() == 7.0 {
                let fx = if y.abs() == 3.0 { 3.0 } else { 1.0 };
                Complex64::new(x.signum() * fx, y.signum() * 5.0)
            } else {
                Complex64::new(x, y)
            };
            points.push(p);
            labels.push((gray(i) << 2) | gq);
        }
    }
    ConstellationSpec::new(Scheme::Qam, points, labels, vec![0; 32])
}

impl ConstellationSpec {
    /// Builds a spec from raw points, normalizing to unit average energy.
    pub fn new(
        scheme: Scheme,
        mut points: Vec<Complex64>,
        labels: Vec<u32>,
        rings: Vec<usize>,
    ) -> Result<Self> {
        let m = points.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Config(format!(
                "constellation size {m} is not a power of two"
            )));
        }
        if labels.len() != m || rings.len() != m {
            return Err(Error::length("constellation labels", m, labels.len()));
        }
        let bits = m.trailing_zeros() as usize;
        let mut point_of_label = vec![usize::MAX; m];
        for (idx, &l) in labels.iter().enumerate() {
            let slot = point_of_label
                .get_mut(l as usize)
                .ok_or_else(|| Error::Config(format!("label {l} out of range")))?;
            if *slot != usize::MAX {
                return Err(Error::Config(format!("label {l:0bits$b} used twice")));
            }
            *slot = idx;
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        let scale = energy.sqrt().recip();
        for p in &mut points {
            *p *= scale;
        }
        let bit_sets = (0..bits)
            .map(|b| {
                let shift = bits - 1 - b;
                let mut sets = [Vec::new(), Vec::new()];
                for (idx, &l) in labels.iter().enumerate() {
                    sets[((l >> shift) & 1) as usize].push(idx);
                }
                sets
            })
            .collect();
        Ok(ConstellationSpec {
            scheme,
            points,
            labels,
            rings,
            bits,
            point_of_label,
            bit_sets,
        })
    }

    /// Parses a constellation table (index, label, ring, magnitude, phase).
    pub fn from_table(name: &str, text: &str) -> Result<Self> {
        let table = Table::parse(name, text)?;
        let scheme = match table.header("scheme") {
            Some("APSK") => Scheme::Apsk,
            Some("PSK") => Scheme::Psk,
            Some("QAM") => Scheme::Qam,
            Some("D8PSK") => Scheme::D8psk,
            other => return Err(Error::data(name, format!("unknown scheme {other:?}"))),
        };
        let order = table.header_usize("order")?;
        if table.rows.len() != order {
            return Err(Error::data(
                name,
                format!("{} rows for order {order}", table.rows.len()),
            ));
        }
        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        let mut rings = Vec::with_capacity(order);
        for (r, row) in table.rows.iter().enumerate() {
            let index: usize = table.field(r, 0)?;
            if index != r {
                return Err(Error::data(name, format!("row {r} has index {index}")));
            }
            let label = u32::from_str_radix(row.get(1).copied().unwrap_or(""), 2)
                .map_err(|_| Error::data(name, format!("bad label at row {r}")))?;
            let magnitude: f64 = table.field(r, 3)?;
            let phase: f64 = table.field(r, 4)?;
            labels.push(label);
            rings.push(table.field(r, 2)?);
            points.push(Complex64::from_polar(magnitude, phase));
        }
        Self::new(scheme, points, labels, rings)
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn rings(&self) -> &[usize] {
        &self.rings
    }

    pub fn point_for_label(&self, label: u32) -> Complex64 {
        self.points[self.point_of_label[label as usize]]
    }

    /// Maps each `log2(M)`-bit group (MSB first) to its labeled point.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if !bits.len().is_multiple_of(self.bits) {
            return Err(Error::length(
                "map_bits",
                format!("a multiple of {}", self.bits),
                bits.len(),
            ));
        }
        Ok(bits
            .chunks_exact(self.bits)
            .map(|group| {
                let label = group.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
                self.point_for_label(label)
            })
            .collect())
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Minimum-distance hard decisions, emitted as label bits.
    pub fn demap_hard(&self, samples: &[Complex64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(samples.len() * self.bits);
        for &y in samples {
            let label = self.labels[self.nearest(y)];
            for b in (0..self.bits).rev() {
                out.push(((label >> b) & 1) as u8);
            }
        }
        out
    }

    /// Max-log LLRs, positive when the bit is more likely 0.
    ///
    /// `noise_variance` is the per-dimension variance σ², so for every bit
    /// `llr = (min_{b=1} |y-p|² - min_{b=0} |y-p|²) / (2σ²)`.
    pub fn demap_llr(&self, samples: &[Complex64], noise_variance: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(samples.len() * self.bits);
        self.demap_llr_into(samples, noise_variance, &mut out)?;
        Ok(out)
    }

    pub fn demap_llr_into(
        &self,
        samples: &[Complex64],
        noise_variance: f64,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        let inv = 1.0 / (2.0 * noise_variance);
        let mut dist = vec![0.0; self.points.len()];
        for &y in samples {
            for (d, p) in dist.iter_mut().zip(&self.points) {
                *d = (y - p).norm_sqr();
            }
            for [zeros, ones] in &self.bit_sets {
                let d0 = zeros.iter().map(|&i| dist[i]).fold(f64::INFINITY, f64::min);
                let d1 = ones.iter().map(|&i| dist[i]).fold(f64::INFINITY, f64::min);
                out.push((d1 - d0) * inv);
            }
        }
        Ok(())
    }

    /// Mean symbol energy of the point set.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Peak-to-average power of the point set itself, in dB.
    pub fn papr_db(&self) -> f64 {
        let peak = self.points.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max);
        10.0 * (peak / self.mean_energy()).log10()
    }
}
