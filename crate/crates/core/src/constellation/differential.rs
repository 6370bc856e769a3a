//! Differential 8-PSK: tribits are carried as phase changes between
//! consecutive symbols.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::data::{self, Table};
use crate::error::{Error, Result};

/// Tribit to phase-change assignment, in steps of π/4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTable {
    /// step (0..8) indexed by tribit label
    step_of_label: [u8; 8],
    label_of_step: [u8; 8],
}

impl PhaseTable {
    /// The bundled Gray table (000 ↦ 0).
    pub fn bundled() -> Result<Self> {
        Self::from_table_text("d8psk_phase", data::D8PSK_PHASE)
    }

    /// Parses a table of rows `index label ring magnitude phase_change_rad`.
    /// Phase changes must be distinct multiples of π/4.
    pub fn from_table_text(name: &str, text: &str) -> Result<Self> {
        let table = Table::parse(name, text)?;
        if table.rows.len() != 8 {
            return Err(Error::data(name, "phase table needs 8 rows"));
        }
        let mut step_of_label = [u8::MAX; 8];
        let mut label_of_step = [u8::MAX; 8];
        for r in 0..8 {
            let label = u8::from_str_radix(table.rows[r].get(1).copied().unwrap_or(""), 2)
                .ok()
                .filter(|&l| l < 8)
                .ok_or_else(|| Error::data(name, format!("bad tribit label at row {r}")))?;
            let phase: f64 = table.field(r, 4)?;
            let steps = phase / (PI / 4.0);
            let step = steps.round();
            if (steps - step).abs() > 1e-9 || !(0.0..8.0).contains(&step) {
                return Err(Error::data(
                    name,
                    format!("phase {phase} at row {r} is not a multiple of pi/4 in [0, 2pi)"),
                ));
            }
            let step = step as u8;
            if step_of_label[label as usize] != u8::MAX || label_of_step[step as usize] != u8::MAX
            {
                return Err(Error::data(name, "phase table is not a bijection"));
            }
            step_of_label[label as usize] = step;
            label_of_step[step as usize] = label;
        }
        Ok(PhaseTable {
            step_of_label,
            label_of_step,
        })
    }

    pub fn phase_change(&self, label: u8) -> f64 {
        f64::from(self.step_of_label[usize::from(label & 7)]) * PI / 4.0
    }

    pub fn label_of_step(&self, step: usize) -> u32 {
        u32::from(self.label_of_step[step % 8])
    }
}

/// Accumulated reference phase, kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialState {
    pub current_phase: f64,
}

impl DifferentialState {
    pub fn new(initial_phase: f64) -> Self {
        DifferentialState {
            current_phase: initial_phase.rem_euclid(TAU),
        }
    }

    pub fn advance(&mut self, delta: f64) -> Complex64 {
        self.current_phase = (self.current_phase + delta).rem_euclid(TAU);
        Complex64::from_polar(1.0, self.current_phase)
    }
}

fn tribit_label(bits: &[u8]) -> u8 {
    ((bits[0] & 1) << 2) | ((bits[1] & 1) << 1) | (bits[2] & 1)
}

/// Encodes tribits (MSB first) as unit-magnitude symbols. `initial_phase` is
/// the implicit reference: symbol k has phase `initial_phase + Σ_{j≤k} Δφ_j`.
pub fn d8psk_encode(table: &PhaseTable, bits: &[u8], initial_phase: f64) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(3) {
        return Err(Error::length("d8psk_encode", "a multiple of 3", bits.len()));
    }
    let mut state = DifferentialState::new(initial_phase);
    Ok(bits
        .chunks_exact(3)
        .map(|t| state.advance(table.phase_change(tribit_label(t))))
        .collect())
}

/// Differentially detects `symbols.len() - 1` tribits from consecutive pairs.
pub fn d8psk_decode(table: &PhaseTable, symbols: &[Complex64]) -> Result<Vec<u8>> {
    if symbols.len() < 2 {
        return Err(Error::length("d8psk_decode", "at least 2 symbols", symbols.len()));
    }
    let mut out = Vec::with_capacity(3 * (symbols.len() - 1));
    for pair in symbols.windows(2) {
        let delta = (pair[1] * pair[0].conj()).arg();
        let step = (delta / (PI / 4.0)).round().rem_euclid(8.0) as usize;
        let label = table.label_of_step(step);
        out.extend([(label >> 2) as u8 & 1, (label >> 1) as u8 & 1, label as u8 & 1]);
    }
    Ok(out)
}

/// Decodes a burst whose reference symbol is known (e.g. the last ramp-up
/// symbol), recovering one tribit per received symbol.
pub fn d8psk_decode_with_reference(
    table: &PhaseTable,
    reference: Complex64,
    symbols: &[Complex64],
) -> Result<Vec<u8>> {
    let mut all = Vec::with_capacity(symbols.len() + 1);
    all.push(reference);
    all.extend_from_slice(symbols);
    d8psk_decode(table, &all)
}
