use num_complex::Complex64;

/// Complex baseband samples at `n_up` samples per symbol.
///
/// `gain` is the amplitude factor applied on top of the unit-energy pulse.
/// Transmit waveforms are scaled by `sqrt(n_up)` so that their mean sample
/// power equals the mean symbol energy; the matched filter divides it out.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformBuffer {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub n_up: usize,
    pub gain: f64,
}

impl WaveformBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64, n_up: usize) -> Self {
        WaveformBuffer {
            samples,
            sample_rate_hz,
            n_up,
            gain: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.n_up as f64
    }

    /// Multiplies every sample by `factor` and records it in `gain`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for s in &mut self.samples {
            *s *= factor;
        }
        self.gain *= factor;
        self
    }

    /// Scales a unit-gain waveform to unit mean power per symbol energy.
    pub fn into_transmit(self) -> Self {
        let g = (self.n_up as f64).sqrt();
        self.scaled(g)
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}
