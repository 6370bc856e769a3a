//! Punctured feed-forward convolutional code with a soft-decision Viterbi
//! decoder.

use crate::data::{self, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvConfig {
    pub constraint_length: usize,
    /// Generator polynomials, e.g. `0o133` and `0o171`.
    pub generators: [u32; 2],
    /// Puncture pattern per generator output, 1 = transmit.
    pub puncture: [Vec<u8>; 2],
    pub traceback: usize,
    /// Message bits per block (the tail is added by the encoder).
    pub block_length: usize,
}

impl ConvConfig {
    /// K = 7, (133, 171) octal, rate 3/4 puncturing, traceback 96.
    pub fn standard_r3_4(block_length: usize) -> Result<Self> {
        let table = Table::parse("conv_puncture_r3_4", data::CONV_PUNCTURE_R3_4)?;
        let parse_row = |r: usize| -> Result<Vec<u8>> {
            table.rows[r][0]
                .bytes()
                .map(|c| match c {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(Error::data("conv_puncture_r3_4", "pattern must be binary")),
                })
                .collect()
        };
        if table.rows.len() != 2 {
            return Err(Error::data("conv_puncture_r3_4", "expected two pattern rows"));
        }
        let cfg = ConvConfig {
            constraint_length: 7,
            generators: [0o133, 0o171],
            puncture: [parse_row(0)?, parse_row(1)?],
            traceback: 96,
            block_length,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if !(2..=16).contains(&k) {
            return Err(Error::Config(format!("constraint length {k} out of range")));
        }
        if self.generators.iter().any(|&g| g == 0 || g >= 1 << k) {
            return Err(Error::Config("generator does not fit the constraint length".into()));
        }
        let period = self.puncture[0].len();
        if period == 0 || self.puncture[1].len() != period {
            return Err(Error::Config("puncture rows must have equal, non-zero length".into()));
        }
        if (0..period).any(|i| self.puncture[0][i] == 0 && self.puncture[1][i] == 0) {
            return Err(Error::Config("puncture pattern drops a whole trellis step".into()));
        }
        if self.block_length == 0 {
            return Err(Error::Config("block length must be positive".into()));
        }
        Ok(())
    }

    fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    fn steps(&self) -> usize {
        self.block_length + self.memory()
    }

    /// Coded bits per block after puncturing (tail included).
    pub fn coded_length(&self) -> usize {
        let period = self.puncture[0].len();
        (0..self.steps())
            .map(|t| (self.puncture[0][t % period] + self.puncture[1][t % period]) as usize)
            .sum()
    }

    /// Information bits over transmitted bits, tail included.
    pub fn rate(&self) -> f64 {
        self.block_length as f64 / self.coded_length() as f64
    }

    /// Rate of the puncture pattern alone.
    pub fn pattern_rate(&self) -> f64 {
        let kept: u32 = self.puncture.iter().flatten().map(|&b| u32::from(b)).sum();
        self.puncture[0].len() as f64 / f64::from(kept)
    }

    fn outputs(&self, register: u32) -> (u8, u8) {
        (
            ((register & self.generators[0]).count_ones() & 1) as u8,
            ((register & self.generators[1]).count_ones() & 1) as u8,
        )
    }
}

/// Encodes one block, appends a zero tail and punctures.
pub fn conv_encode(message: &[u8], cfg: &ConvConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    if message.len() != cfg.block_length {
        return Err(Error::length("conv_encode", cfg.block_length, message.len()));
    }
    let mem = cfg.memory();
    let period = cfg.puncture[0].len();
    let mut state = 0u32;
    let mut out = Vec::with_capacity(cfg.coded_length());
    let tail = std::iter::repeat_n(0u8, mem);
    for (t, bit) in message.iter().copied().chain(tail).enumerate() {
        let register = (u32::from(bit & 1) << mem) | state;
        let (x, y) = cfg.outputs(register);
        if cfg.puncture[0][t % period] == 1 {
            out.push(x);
        }
        if cfg.puncture[1][t % period] == 1 {
            out.push(y);
        }
        state = register >> 1;
    }
    Ok(out)
}

/// Soft Viterbi decoding of one punctured block. LLRs are positive for 0.
/// Decisions are released `traceback` steps behind the trellis front; the
/// terminated tail is traced back from the zero state.
pub fn conv_decode(llrs: &[f64], cfg: &ConvConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    if llrs.len() != cfg.coded_length() {
        return Err(Error::length("conv_decode", cfg.coded_length(), llrs.len()));
    }
    let mem = cfg.memory();
    let states = 1usize << mem;
    if states > 64 {
        return Err(Error::Config("decoder supports constraint length up to 7".into()));
    }
    let period = cfg.puncture[0].len();
    let steps = cfg.steps();

    // Branch outputs for next state ns reached from predecessor bit j.
    let branch: Vec<[(f64, f64); 2]> = (0..states)
        .map(|ns| {
            let input = (ns >> (mem - 1)) as u32;
            let mut pair = [(0.0, 0.0); 2];
            for (j, p) in pair.iter_mut().enumerate() {
                let prev = ((ns << 1) & (states - 1)) | j;
                let (x, y) = cfg.outputs((input << mem) | prev as u32);
                *p = (1.0 - 2.0 * f64::from(x), 1.0 - 2.0 * f64::from(y));
            }
            pair
        })
        .collect();

    let mut metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut next = vec![0.0; states];
    let mut decisions: Vec<u64> = Vec::with_capacity(steps);
    let mut out = vec![0u8; cfg.block_length];
    let mut pos = 0;

    let trace = |decisions: &[u64], mut state: usize, from: usize, count: usize| -> Vec<u8> {
        // Returns the `count` oldest decoded bits among steps ..=from.
        let mut bits = Vec::with_capacity(from + 1);
        for t in (0..=from).rev() {
            bits.push((state >> (mem - 1)) as u8);
            let j = ((decisions[t] >> state) & 1) as usize;
            state = ((state << 1) & (states - 1)) | j;
        }
        bits.reverse();
        bits.truncate(count);
        bits
    };

    for t in 0..steps {
        let phase = t % period;
        let lx = if cfg.puncture[0][phase] == 1 {
            let v = llrs[pos];
            pos += 1;
            v
        } else {
            0.0
        };
        let ly = if cfg.puncture[1][phase] == 1 {
            let v = llrs[pos];
            pos += 1;
            v
        } else {
            0.0
        };
        let mut word = 0u64;
        let mut best = f64::NEG_INFINITY;
        for ns in 0..states {
            let base = (ns << 1) & (states - 1);
            let [b0, b1] = branch[ns];
            let m0 = metric[base] + b0.0 * lx + b0.1 * ly;
            let m1 = metric[base | 1] + b1.0 * lx + b1.1 * ly;
            let (m, j) = if m1 > m0 { (m1, 1) } else { (m0, 0) };
            next[ns] = m;
            word |= (j as u64) << ns;
            best = best.max(m);
        }
        for (m, n) in metric.iter_mut().zip(&next) {
            *m = n - best;
        }
        decisions.push(word);

        // Release the bit `traceback` steps behind the front.
        if t >= cfg.traceback && t - cfg.traceback < cfg.block_length {
            let release = t - cfg.traceback;
            let start = metric
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(s, _)| s)
                .unwrap_or(0);
            let mut state = start;
            for tt in (release + 1..=t).rev() {
                let j = ((decisions[tt] >> state) & 1) as usize;
                state = ((state << 1) & (states - 1)) | j;
            }
            out[release] = (state >> (mem - 1)) as u8;
        }
    }
    // Flush the undecided tail of the message from the terminating state.
    let released = steps.saturating_sub(cfg.traceback).min(cfg.block_length);
    if released < cfg.block_length {
        let bits = trace(&decisions, 0, steps - 1, cfg.block_length);
        out[released..].copy_from_slice(&bits[released..]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    #[test]
    fn rate_is_three_quarters() {
        let cfg = ConvConfig::standard_r3_4(48600).unwrap();
        assert_eq!(cfg.pattern_rate(), 0.75);
        assert!((cfg.rate() - 0.75).abs() < 1e-3);
        // 48606 trellis steps, 3 steps per 4 coded bits.
        assert_eq!(cfg.coded_length(), 64808);
    }

    #[test]
    fn zero_in_zero_out() {
        let cfg = ConvConfig::standard_r3_4(300).unwrap();
        let coded = conv_encode(&[0; 300], &cfg).unwrap();
        assert!(coded.iter().all(|&b| b == 0));
        let llr: Vec<f64> = coded.iter().map(|_| 1.0).collect();
        assert!(conv_decode(&llr, &cfg).unwrap().iter().all(|&b| b == 0));
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for len in [1000, 97, 5] {
            let cfg = ConvConfig::standard_r3_4(len).unwrap();
            let msg = random_bits(&mut rng, len);
            let coded = conv_encode(&msg, &cfg).unwrap();
            let llr: Vec<f64> = coded.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
            assert_eq!(conv_decode(&llr, &cfg).unwrap(), msg, "len {len}");
        }
    }

    #[test]
    fn corrects_scattered_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let cfg = ConvConfig::standard_r3_4(2000).unwrap();
        let msg = random_bits(&mut rng, 2000);
        let coded = conv_encode(&msg, &cfg).unwrap();
        let mut llr: Vec<f64> = coded.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
        for i in (50..llr.len()).step_by(60) {
            llr[i] = -llr[i];
        }
        assert_eq!(conv_decode(&llr, &cfg).unwrap(), msg);
    }

    #[test]
    fn encoder_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = ConvConfig::standard_r3_4(200).unwrap();
        for _ in 0..100 {
            let a = random_bits(&mut rng, 200);
            let b = random_bits(&mut rng, 200);
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let sum: Vec<u8> = conv_encode(&a, &cfg)
                .unwrap()
                .iter()
                .zip(conv_encode(&b, &cfg).unwrap())
                .map(|(x, y)| x ^ y)
                .collect();
            assert_eq!(conv_encode(&ab, &cfg).unwrap(), sum);
        }
    }

    #[test]
    fn length_and_pattern_errors() {
        let cfg = ConvConfig::standard_r3_4(10).unwrap();
        assert!(conv_encode(&[0; 9], &cfg).is_err());
        assert!(conv_decode(&[0.0; 3], &cfg).is_err());
        let mut bad = cfg.clone();
        bad.puncture = [vec![1, 0], vec![1, 0, 1]];
        assert!(conv_encode(&[0; 10], &bad).is_err());
    }
}
