//! Reed-Solomon (255, 249) over GF(2^8).

use crate::error::{Error, Result};

/// GF(2^8) arithmetic through log/antilog tables.
#[derive(Debug, Clone)]
pub struct Gf256 {
    exp: [u8; 512],
    log: [u8; 256],
}

impl Gf256 {
    /// `poly` is the full primitive polynomial including x^8, e.g. 0x11d.
    pub fn new(poly: u16) -> Result<Self> {
        if poly & 0x100 == 0 || poly > 0x1ff {
            return Err(Error::Config(format!("{poly:#x} is not a degree-8 polynomial")));
        }
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            if i > 0 && x == 1 {
                return Err(Error::Config(format!("{poly:#x} is not primitive")));
            }
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::Config(format!("{poly:#x} is not primitive")));
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Ok(Gf256 { exp, log })
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn div(&self, a: u8, b: u8) -> u8 {
        assert!(b != 0, "division by zero in GF(256)");
        if a == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] as usize + 255 - self.log[b as usize] as usize) % 255]
        }
    }

    /// α^e for any integer exponent.
    #[inline]
    pub fn pow_alpha(&self, e: i64) -> u8 {
        self.exp[e.rem_euclid(255) as usize]
    }

    pub fn inv(&self, a: u8) -> u8 {
        self.div(1, a)
    }
}

#[derive(Debug, Clone)]
pub struct RsConfig {
    pub n: usize,
    pub k: usize,
    pub primitive_poly: u16,
    /// Exponent of the first consecutive generator root.
    pub first_root: i64,
    field: Gf256,
    /// Generator coefficients, highest degree first, monic.
    generator: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsDecoded {
    pub data: Vec<u8>,
    pub corrected: usize,
}

impl RsConfig {
    pub const DEFAULT_POLY: u16 = 0x11d;

    /// RS(255, 249), t = 3, over x^8 + x^4 + x^3 + x^2 + 1.
    pub fn vdl() -> Self {
        Self::new(255, 249, Self::DEFAULT_POLY, 1).expect("default RS parameters are valid")
    }

    pub fn new(n: usize, k: usize, primitive_poly: u16, first_root: i64) -> Result<Self> {
        if n > 255 || k == 0 || k >= n || !(n - k).is_multiple_of(2) {
            return Err(Error::Config(format!("invalid RS({n}, {k})")));
        }
        let field = Gf256::new(primitive_poly)?;
        let mut generator = vec![1u8];
        for i in 0..(n - k) as i64 {
            let root = field.pow_alpha(first_root + i);
            let mut next = vec![0u8; generator.len() + 1];
            for (j, &g) in generator.iter().enumerate() {
                next[j] ^= g;
                next[j + 1] ^= field.mul(g, root);
            }
            generator = next;
        }
        Ok(RsConfig {
            n,
            k,
            primitive_poly,
            first_root,
            field,
            generator,
        })
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    pub fn t(&self) -> usize {
        self.parity_len() / 2
    }

    pub fn field(&self) -> &Gf256 {
        &self.field
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        let f = &self.field;
        (0..self.parity_len() as i64)
            .map(|i| {
                let x = f.pow_alpha(self.first_root + i);
                word.iter().fold(0u8, |acc, &c| f.mul(acc, x) ^ c)
            })
            .collect()
    }
}

/// Systematic encoding: data followed by `n - k` parity symbols.
pub fn rs_encode(data: &[u8], cfg: &RsConfig) -> Result<Vec<u8>> {
    if data.len() != cfg.k {
        return Err(Error::length("rs_encode", cfg.k, data.len()));
    }
    let f = &cfg.field;
    let p = cfg.parity_len();
    let mut rem = vec![0u8; p];
    for &d in data {
        let fb = d ^ rem[0];
        rem.rotate_left(1);
        rem[p - 1] = 0;
        if fb != 0 {
            for (r, &g) in rem.iter_mut().zip(&cfg.generator[1..]) {
                *r ^= f.mul(fb, g);
            }
        }
    }
    let mut out = Vec::with_capacity(cfg.n);
    out.extend_from_slice(data);
    out.extend(rem);
    Ok(out)
}

/// Corrects up to `t` symbol errors. Anything the decoder cannot account
/// for is reported as [`Error::Uncorrectable`].
pub fn rs_decode(word: &[u8], cfg: &RsConfig) -> Result<RsDecoded> {
    if word.len() != cfg.n {
        return Err(Error::length("rs_decode", cfg.n, word.len()));
    }
    let f = &cfg.field;
    let synd = cfg.syndromes(word);
    if synd.iter().all(|&s| s == 0) {
        return Ok(RsDecoded {
            data: word[..cfg.k].to_vec(),
            corrected: 0,
        });
    }

    // Berlekamp-Massey; lambda in ascending powers.
    let two_t = cfg.parity_len();
    let mut lambda = vec![0u8; two_t + 1];
    lambda[0] = 1;
    let mut prev = lambda.clone();
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u8;
    for r in 0..two_t {
        let mut disc = synd[r];
        for i in 1..=len {
            disc ^= f.mul(lambda[i], synd[r - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = f.div(disc, prev_disc);
        let snapshot = lambda.clone();
        for i in 0..=two_t - shift {
            lambda[i + shift] ^= f.mul(coef, prev[i]);
        }
        if 2 * len <= r {
            len = r + 1 - len;
            prev = snapshot;
            prev_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    let degree = lambda.iter().rposition(|&c| c != 0).unwrap_or(0);
    if degree != len || len > cfg.t() {
        return Err(Error::Uncorrectable(format!(
            "error locator degree {degree} exceeds t = {}",
            cfg.t()
        )));
    }

    // Chien search. Position p (from the start) has locator α^(n-1-p).
    let mut positions = Vec::with_capacity(len);
    for p in 0..cfg.n {
        let x_inv = f.pow_alpha(-((cfg.n - 1 - p) as i64));
        let mut acc = 0u8;
        let mut pw = 1u8;
        for &c in &lambda[..=degree] {
            acc ^= f.mul(c, pw);
            pw = f.mul(pw, x_inv);
        }
        if acc == 0 {
            positions.push(p);
        }
    }
    if positions.len() != degree {
        return Err(Error::Uncorrectable(format!(
            "locator has {} roots in the code, expected {degree}",
            positions.len()
        )));
    }

    // Forney: omega = S(x)·lambda(x) mod x^2t.
    let mut omega = vec![0u8; two_t];
    for i in 0..two_t {
        for j in 0..=i.min(degree) {
            omega[i] ^= f.mul(lambda[j], synd[i - j]);
        }
    }
    let mut fixed = word.to_vec();
    for &p in &positions {
        let power = (cfg.n - 1 - p) as i64;
        let x_inv = f.pow_alpha(-power);
        let mut num = 0u8;
        let mut pw = 1u8;
        for &o in &omega {
            num ^= f.mul(o, pw);
            pw = f.mul(pw, x_inv);
        }
        // Formal derivative keeps odd powers.
        let mut den = 0u8;
        let mut pw = 1u8;
        let x_inv2 = f.mul(x_inv, x_inv);
        for i in (1..=degree).step_by(2) {
            den ^= f.mul(lambda[i], pw);
            pw = f.mul(pw, x_inv2);
        }
        if den == 0 {
            return Err(Error::Uncorrectable("zero Forney denominator".into()));
        }
        // e = X^(1-b) · Ω(X^-1) / Λ'(X^-1)
        let scale = f.pow_alpha((1 - cfg.first_root) * power);
        fixed[p] ^= f.mul(scale, f.div(num, den));
    }
    if cfg.syndromes(&fixed).iter().any(|&s| s != 0) {
        return Err(Error::Uncorrectable("residual syndrome after correction".into()));
    }
    fixed.truncate(cfg.k);
    Ok(RsDecoded {
        data: fixed,
        corrected: degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, k: usize) -> Vec<u8> {
        (0..k).map(|_| rng.random()).collect()
    }

    #[test]
    fn field_is_consistent() {
        let f = Gf256::new(0x11d).unwrap();
        for a in 1..=255u8 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        assert!(Gf256::new(0x11b).is_err(), "AES polynomial is not primitive");
    }

    #[test]
    fn zero_block_round_trip() {
        let cfg = RsConfig::vdl();
        let cw = rs_encode(&[0; 249], &cfg).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
        assert_eq!(rs_decode(&cw, &cfg).unwrap().data, vec![0; 249]);
    }

    #[test]
    fn codewords_have_zero_syndrome() {
        let cfg = RsConfig::vdl();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cw = rs_encode(&random_block(&mut rng, 249), &cfg).unwrap();
        assert!(cfg.syndromes(&cw).iter().all(|&s| s == 0));
        assert_eq!(cfg.parity_len(), 6);
    }

    #[test]
    fn corrects_up_to_three_errors() {
        let cfg = RsConfig::vdl();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for trial in 0..10_000 {
            let data = random_block(&mut rng, 249);
            let mut cw = rs_encode(&data, &cfg).unwrap();
            let weight = 1 + trial % 3;
            for p in sample(&mut rng, 255, weight) {
                cw[p] ^= rng.random_range(1..=255u8);
            }
            let out = rs_decode(&cw, &cfg).unwrap();
            assert_eq!(out.data, data);
            assert_eq!(out.corrected, weight);
        }
    }

    #[test]
    fn four_errors_never_pass_silently() {
        let cfg = RsConfig::vdl();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..500 {
            let data = random_block(&mut rng, 249);
            let clean = rs_encode(&data, &cfg).unwrap();
            let mut cw = clean.clone();
            for p in sample(&mut rng, 255, 4) {
                cw[p] ^= rng.random_range(1..=255u8);
            }
            match rs_decode(&cw, &cfg) {
                Err(Error::Uncorrectable(_)) => {}
                Ok(out) => {
                    // Miscorrection onto another codeword: re-encoding
                    // exposes it against the transmitted block.
                    assert_ne!(rs_encode(&out.data, &cfg).unwrap(), clean);
                    assert!(out.corrected <= 3);
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn other_first_root_works() {
        let cfg = RsConfig::new(255, 249, 0x11d, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let data = random_block(&mut rng, 249);
        let mut cw = rs_encode(&data, &cfg).unwrap();
        cw[0] ^= 0x55;
        cw[200] ^= 1;
        cw[254] ^= 0xff;
        assert_eq!(rs_decode(&cw, &cfg).unwrap().data, data);
    }

    #[test]
    fn encoder_is_linear() {
        let cfg = RsConfig::vdl();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..100 {
            let a = random_block(&mut rng, 249);
            let b = random_block(&mut rng, 249);
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let sum: Vec<u8> = rs_encode(&a, &cfg)
                .unwrap()
                .iter()
                .zip(rs_encode(&b, &cfg).unwrap())
                .map(|(x, y)| x ^ y)
                .collect();
            assert_eq!(rs_encode(&ab, &cfg).unwrap(), sum);
        }
    }
}
