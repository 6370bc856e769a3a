//! Irregular repeat-accumulate LDPC codes described by DVB-S2 style address
//! tables, with systematic encoding and normalized min-sum decoding.

use crate::data::{self, Table};
use crate::error::{Error, Result};

/// An LDPC code and its decoder settings.
///
/// Information bit `j` (group `t = j / group`, offset `w = j % group`) is
/// checked by rows `(a + w·q) mod m` for every address `a` in row `t` of the
/// table. Parity bit `i` is checked by rows `i` and `i + 1`, which makes the
/// parity part a running accumulator.
#[derive(Debug, Clone)]
pub struct LdpcConfig {
    pub name: String,
    pub n: usize,
    pub k: usize,
    group: usize,
    q: usize,
    addresses: Vec<Vec<usize>>,
    pub max_iterations: usize,
    pub scaling: f32,
    check_start: Vec<u32>,
    check_vars: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcDecoded {
    pub message: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

impl LdpcConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 50;
    pub const DEFAULT_SCALING: f32 = 0.75;

    /// DVB-S2 normal frame, rate 3/4 (n = 64800, k = 48600).
    pub fn dvbs2_r3_4() -> Result<Self> {
        Self::from_table("ldpc_dvbs2_r3_4_n64800", data::LDPC_DVBS2_R3_4_N64800)
    }

    /// Desk-scale rate-3/4 code with n = 648.
    pub fn ira_r3_4_n648() -> Result<Self> {
        Self::from_table("ldpc_ira_r3_4_n648", data::LDPC_IRA_R3_4_N648)
    }

    /// Looks up a bundled code by the name used in scenario files.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "dvbs2-r3_4-n64800" | "ldpc64800" => Self::dvbs2_r3_4(),
            "ira-r3_4-n648" | "ldpc648" => Self::ira_r3_4_n648(),
            other => Err(Error::Config(format!(
                "unknown LDPC code {other:?} (known: dvbs2-r3_4-n64800, ira-r3_4-n648)"
            ))),
        }
    }

    pub fn from_table(name: &str, text: &str) -> Result<Self> {
        let table = Table::parse(name, text)?;
        let n = table.header_usize("n")?;
        let k = table.header_usize("k")?;
        let group = table.header_usize("group")?;
        let q = table.header_usize("q")?;
        let m = n.checked_sub(k).filter(|&m| m > 0).ok_or_else(|| Error::data(name, "k >= n"))?;
        if k % group != 0 || table.rows.len() != k / group || q * group != m {
            return Err(Error::data(
                name,
                format!(
                    "inconsistent dimensions: n={n} k={k} group={group} q={q} rows={}",
                    table.rows.len()
                ),
            ));
        }
        let mut addresses = Vec::with_capacity(table.rows.len());
        for (r, row) in table.rows.iter().enumerate() {
            let mut addrs = Vec::with_capacity(row.len());
            for c in 0..row.len() {
                let a: usize = table.field(r, c)?;
                if a >= m {
                    return Err(Error::data(name, format!("address {a} >= m = {m} at row {r}")));
                }
                addrs.push(a);
            }
            addresses.push(addrs);
        }
        let mut cfg = LdpcConfig {
            name: table.header("code").unwrap_or(name).to_string(),
            n,
            k,
            group,
            q,
            addresses,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            scaling: Self::DEFAULT_SCALING,
            check_start: Vec::new(),
            check_vars: Vec::new(),
        };
        cfg.build_checks()?;
        Ok(cfg)
    }

    fn m(&self) -> usize {
        self.n - self.k
    }

    /// Rows checking information bit `j`.
    fn info_rows(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.m();
        let shift = (j % self.group) * self.q;
        self.addresses[j / self.group].iter().map(move |&a| (a + shift) % m)
    }

    fn build_checks(&mut self) -> Result<()> {
        let m = self.m();
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        for j in 0..self.k {
            let start: Vec<usize> = self.info_rows(j).collect();
            for (i, &r) in start.iter().enumerate() {
                if start[..i].contains(&r) {
                    return Err(Error::data(&self.name, format!("column {j} hits row {r} twice")));
                }
                rows[r].push(j as u32);
            }
        }
        for i in 0..m {
            rows[i].push((self.k + i) as u32);
            if i + 1 < m {
                rows[i + 1].push((self.k + i) as u32);
            }
        }
        self.check_start = Vec::with_capacity(m + 1);
        self.check_vars = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        self.check_start.push(0);
        for row in rows {
            self.check_vars.extend(row);
            self.check_start.push(self.check_vars.len() as u32);
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn edges(&self) -> usize {
        self.check_vars.len()
    }

    /// Variable indices taking part in each check, in row order.
    pub fn checks(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.check_start
            .windows(2)
            .map(|w| &self.check_vars[w[0] as usize..w[1] as usize])
    }

    /// True when every parity check is satisfied by `word`.
    pub fn syndrome_is_zero(&self, word: &[u8]) -> bool {
        self.checks()
            .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ word[v as usize]) & 1 == 0)
    }
}

/// Systematic encoding: `[message | parity]`.
pub fn ldpc_encode(message: &[u8], cfg: &LdpcConfig) -> Result<Vec<u8>> {
    if message.len() != cfg.k {
        return Err(Error::length("ldpc_encode", cfg.k, message.len()));
    }
    let m = cfg.m();
    let mut parity = vec![0u8; m];
    for (j, &bit) in message.iter().enumerate() {
        if bit & 1 == 1 {
            for r in cfg.info_rows(j) {
                parity[r] ^= 1;
            }
        }
    }
    for i in 1..m {
        parity[i] ^= parity[i - 1];
    }
    let mut word = Vec::with_capacity(cfg.n);
    word.extend(message.iter().map(|b| b & 1));
    word.extend(parity);
    Ok(word)
}

/// Normalized min-sum decoding with a flooding schedule. LLRs are positive
/// for bit 0. Stops as soon as the hard decisions satisfy every check.
pub fn ldpc_decode(llrs: &[f64], cfg: &LdpcConfig) -> Result<LdpcDecoded> {
    if llrs.len() != cfg.n {
        return Err(Error::length("ldpc_decode", cfg.n, llrs.len()));
    }
    let channel: Vec<f32> = llrs.iter().map(|&l| l as f32).collect();
    let mut total = channel.clone();
    let mut c2v = vec![0f32; cfg.edges()];
    let mut hard = vec![0u8; cfg.n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        iterations += 1;
        for (c, vars) in cfg.checks().enumerate() {
            let base = cfg.check_start[c] as usize;
            let msgs = &mut c2v[base..base + vars.len()];
            let mut min1 = f32::INFINITY;
            let mut min2 = f32::INFINITY;
            let mut min_pos = 0;
            let mut sign_neg = false;
            for (e, &v) in vars.iter().enumerate() {
                let incoming = total[v as usize] - msgs[e];
                let mag = incoming.abs();
                sign_neg ^= incoming < 0.0;
                if mag < min1 {
                    min2 = min1;
                    min1 = mag;
                    min_pos = e;
                } else if mag < min2 {
                    min2 = mag;
                }
                // Park the incoming message; it is consumed just below.
                msgs[e] = incoming;
            }
            for (e, msg) in msgs.iter_mut().enumerate() {
                let mag = if e == min_pos { min2 } else { min1 } * cfg.scaling;
                let neg = sign_neg ^ (*msg < 0.0);
                *msg = if neg { -mag } else { mag };
            }
        }
        total.copy_from_slice(&channel);
        for (e, &v) in cfg.check_vars.iter().enumerate() {
            total[v as usize] += c2v[e];
        }
        for (h, &t) in hard.iter_mut().zip(&total) {
            *h = u8::from(t < 0.0);
        }
        if cfg.syndrome_is_zero(&hard) {
            converged = true;
            break;
        }
    }
    hard.truncate(cfg.k);
    Ok(LdpcDecoded {
        message: hard,
        converged,
        iterations,
    })
}
