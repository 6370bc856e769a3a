//! Scenario files: TOML with a fixed schema.
//!
//! ```toml
//! name = "fig6"
//! seed = 1
//! symbol_rate_hz = 10500.0
//!
//! [[filter]]
//! name = "pm"
//! kind = "pm"              # pm | srrc
//! n_up = 4
//! span = 8                 # K, filter length K·N_up + 1
//! stopband_atten_db = 80.0 # pm only
//! roll_off = 0.6           # srrc only
//!
//! [[scheme]]
//! name = "16-QAM"
//! modulation = "qam"       # psk | d8psk | qam | apsk
//! order = 16
//! code = "ldpc"            # uncoded | ldpc | conv | rs
//! ldpc = "dvbs2-r3_4-n64800"
//! ebn0_db = [4.0, 4.5]     # optional, overrides [ber].ebn0_db
//! baseline = false         # lm-table reference scheme
//!
//! [ber]
//! ebn0_db = [0.0, 1.0]
//! min_errors = 100
//! max_bits = 20000000
//! end_on_zero = true
//!
//! [papr]
//! frames = 20000
//! frame_symbols = 256
//! ccdf_level = 1e-3
//! ```
//!
//! `[psd]`, `[scfdma]` and `[frame]` are described on their structs.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use avdl_core::constellation::{Scheme, SUPPORTED};
use avdl_core::framing::{PayloadMode, MAX_TRANSMISSION_BITS};
use avdl_core::shaping::FilterKind;

use crate::Command;

const LDPC_CODES: &[&str] = &["dvbs2-r3_4-n64800", "ira-r3_4-n648"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_symbol_rate")]
    pub symbol_rate_hz: f64,
    #[serde(default, rename = "filter")]
    pub filters: Vec<FilterSpec>,
    #[serde(default, rename = "scheme")]
    pub schemes: Vec<SchemeSpec>,
    pub ber: Option<BerSection>,
    pub papr: Option<PaprSection>,
    pub psd: Option<PsdSection>,
    pub scfdma: Option<ScfdmaSection>,
    pub frame: Option<FrameSection>,
}

fn default_seed() -> u64 {
    1
}
fn default_symbol_rate() -> f64 {
    10_500.0
}
fn default_n_up() -> usize {
    4
}
fn default_span() -> usize {
    8
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub name: String,
    pub kind: FilterKind,
    #[serde(default = "default_n_up")]
    pub n_up: usize,
    #[serde(default = "default_span")]
    pub span: usize,
    pub roll_off: Option<f64>,
    pub stopband_atten_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Uncoded,
    Ldpc,
    Conv,
    Rs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub name: String,
    pub modulation: Scheme,
    pub order: usize,
    pub code: CodeKind,
    /// LDPC code name, default `dvbs2-r3_4-n64800`.
    pub ldpc: Option<String>,
    /// RS codewords per simulated frame, default 8.
    pub rs_blocks: Option<usize>,
    #[serde(default = "default_true")]
    pub interleave: bool,
    /// Convolutional code block length in bits, default 48600.
    pub conv_block: Option<usize>,
    /// Filter name; defaults to the first `[[filter]]`.
    pub filter: Option<String>,
    pub symbol_rate_hz: Option<f64>,
    pub ebn0_db: Option<Vec<f64>>,
    #[serde(default)]
    pub baseline: bool,
}

impl SchemeSpec {
    pub fn ldpc_name(&self) -> &str {
        self.ldpc.as_deref().unwrap_or(LDPC_CODES[0])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSection {
    #[serde(default)]
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_bits")]
    pub max_bits: u64,
    #[serde(default = "default_true")]
    pub end_on_zero: bool,
}

fn default_min_errors() -> u64 {
    100
}
fn default_max_bits() -> u64 {
    20_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaprSection {
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_frame_symbols")]
    pub frame_symbols: usize,
    #[serde(default = "default_ccdf")]
    pub ccdf_level: f64,
}

fn default_frames() -> usize {
    20_000
}
fn default_frame_symbols() -> usize {
    256
}
fn default_ccdf() -> f64 {
    1e-3
}

/// Welch PSD of a random waveform per scheme.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSection {
    #[serde(default = "default_psd_symbols")]
    pub symbols: usize,
    #[serde(default = "default_segment")]
    pub segment: usize,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    /// Offset, in multiples of the symbol rate, where the summary reports
    /// the out-of-band level.
    #[serde(default = "default_oob")]
    pub oob_offset: f64,
}

fn default_psd_symbols() -> usize {
    1 << 17
}
fn default_segment() -> usize {
    4096
}
fn default_overlap() -> f64 {
    0.5
}
fn default_oob() -> f64 {
    1.5
}

/// SC-FDMA verification, complexity and timing.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScfdmaSection {
    /// Block size for `scfdma-verify`.
    #[serde(default = "default_block")]
    pub n: usize,
    /// Filter name; defaults to the first `[[filter]]`.
    pub filter: Option<String>,
    /// `bpsk` or a supported `<modulation><order>` such as `qam16`.
    #[serde(default = "default_mapping")]
    pub mapping: String,
    /// Extra randomized configurations checked by `scfdma-verify`.
    #[serde(default = "default_random_configs")]
    pub random_configs: usize,
    /// Block sizes for `complexity` and `bench`.
    #[serde(default = "default_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_block() -> usize {
    16
}
fn default_mapping() -> String {
    "bpsk".into()
}
fn default_random_configs() -> usize {
    100
}
fn default_grid() -> Vec<usize> {
    vec![16, 32, 64, 128, 256, 512, 1024]
}
fn default_trials() -> usize {
    10_000
}

/// Burst build/parse round trips over D8PSK and AWGN.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub mode: PayloadMode,
    /// LDPC code for `ldpc_updated`, default `dvbs2-r3_4-n64800`.
    pub ldpc: Option<String>,
    pub payload_bits: usize,
    #[serde(default = "default_frame_count")]
    pub frames: usize,
    /// Channel Eb/N0 per transmitted bit; an empty list runs clean frames only.
    #[serde(default)]
    pub ebn0_db: Vec<f64>,
    pub filter: Option<String>,
}

fn default_frame_count() -> usize {
    20
}

/// Failure to produce a validated scenario.
#[derive(Debug)]
pub enum ScenarioError {
    Io(String),
    /// Every schema violation found, in file order.
    Invalid(Vec<String>),
}

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioError::Io(e) => write!(f, "cannot read scenario: {e}"),
            ScenarioError::Invalid(errs) => {
                writeln!(f, "invalid scenario ({} problem{}):", errs.len(), if errs.len() == 1 { "" } else { "s" })?;
                for e in errs {
                    writeln!(f, "  - {e}")?;
                }
                Ok(())
            }
        }
    }
}

fn supported_orders() -> String {
    let mut out = Vec::new();
    for s in [Scheme::Psk, Scheme::D8psk, Scheme::Qam, Scheme::Apsk] {
        let orders: Vec<String> = SUPPORTED.iter().filter(|(x, _)| *x == s).map(|(_, m)| m.to_string()).collect();
        out.push(format!("{} {}", s.to_string().to_lowercase(), orders.join("/")));
    }
    out.join(", ")
}

/// Reads, parses and validates a scenario file.
pub fn validate_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let sc: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Invalid(vec![e.to_string()]))?;
    let errs = sc.problems();
    if errs.is_empty() {
        Ok(sc)
    } else {
        Err(ScenarioError::Invalid(errs))
    }
}

impl Scenario {
    /// All schema violations independent of the command.
    pub fn problems(&self) -> Vec<String> {
        let mut e = Vec::new();
        if self.name.trim().is_empty() {
            e.push("name must not be empty".into());
        }
        check_rate(&mut e, "symbol_rate_hz", self.symbol_rate_hz);

        let mut names = HashSet::new();
        for f in &self.filters {
            let at = format!("filter {:?}", f.name);
            if !names.insert(f.name.as_str()) {
                e.push(format!("{at}: duplicate name"));
            }
            if f.n_up < 2 {
                e.push(format!("{at}: n_up {} must be at least 2", f.n_up));
            }
            if f.span < 2 || f.span % 2 != 0 {
                e.push(format!("{at}: span {} must be even and at least 2", f.span));
            }
            match f.kind {
                FilterKind::Srrc => match f.roll_off {
                    Some(a) if a > 0.0 && a <= 1.0 => {}
                    Some(a) => e.push(format!("{at}: roll_off {a} outside (0, 1]")),
                    None => e.push(format!("{at}: srrc needs roll_off")),
                },
                FilterKind::Pm => {
                    if let Some(a) = f.stopband_atten_db {
                        if !(40.0..=150.0).contains(&a) {
                            e.push(format!("{at}: stopband_atten_db {a} outside [40, 150]"));
                        }
                    }
                }
            }
        }

        let mut scheme_names = HashSet::new();
        for s in &self.schemes {
            let at = format!("scheme {:?}", s.name);
            if !scheme_names.insert(s.name.as_str()) {
                e.push(format!("{at}: duplicate name"));
            }
            if !SUPPORTED.contains(&(s.modulation, s.order)) {
                e.push(format!(
                    "{at}: unsupported order {} for {}; supported orders: {}",
                    s.order,
                    s.modulation.to_string().to_lowercase(),
                    supported_orders()
                ));
            }
            if s.modulation == Scheme::D8psk && matches!(s.code, CodeKind::Ldpc | CodeKind::Conv) {
                e.push(format!("{at}: d8psk is detected differentially; use code = \"rs\" or \"uncoded\""));
            }
            if s.code == CodeKind::Ldpc && !LDPC_CODES.contains(&s.ldpc_name()) {
                e.push(format!("{at}: unknown ldpc {:?} (known: {})", s.ldpc_name(), LDPC_CODES.join(", ")));
            }
            if s.rs_blocks == Some(0) {
                e.push(format!("{at}: rs_blocks must be positive"));
            }
            if s.conv_block.is_some_and(|b| b == 0 || b % 3 != 0) {
                e.push(format!("{at}: conv_block must be a positive multiple of 3"));
            }
            self.check_filter_ref(&mut e, &at, s.filter.as_deref());
            if let Some(r) = s.symbol_rate_hz {
                check_rate(&mut e, &format!("{at}: symbol_rate_hz"), r);
            }
            if let Some(g) = &s.ebn0_db {
                check_grid(&mut e, &at, g);
            }
        }
        if self.schemes.iter().filter(|s| s.baseline).count() > 1 {
            e.push("at most one scheme may set baseline = true".into());
        }

        if let Some(b) = &self.ber {
            check_grid(&mut e, "ber", &b.ebn0_db);
            if b.min_errors < 100 {
                e.push(format!("ber: min_errors {} below 100", b.min_errors));
            }
            if b.max_bits == 0 {
                e.push("ber: max_bits must be positive".into());
            }
        }
        if let Some(p) = &self.papr {
            if !(p.ccdf_level > 0.0 && p.ccdf_level < 1.0) {
                e.push(format!("papr: ccdf_level {} outside (0, 1)", p.ccdf_level));
            } else if (p.frames as f64) < 10.0 / p.ccdf_level {
                e.push(format!(
                    "papr: {} frames cannot resolve CCDF {} (need {})",
                    p.frames,
                    p.ccdf_level,
                    (10.0 / p.ccdf_level).ceil()
                ));
            }
            if p.frame_symbols == 0 {
                e.push("papr: frame_symbols must be positive".into());
            }
        }
        if let Some(p) = &self.psd {
            if p.segment < 16 {
                e.push(format!("psd: segment {} below 16", p.segment));
            }
            if !(0.0..1.0).contains(&p.overlap) {
                e.push(format!("psd: overlap {} outside [0, 1)", p.overlap));
            }
            if p.oob_offset <= 0.0 {
                e.push("psd: oob_offset must be positive".into());
            }
        }
        if let Some(s) = &self.scfdma {
            self.check_filter_ref(&mut e, "scfdma", s.filter.as_deref());
            if s.n == 0 {
                e.push("scfdma: n must be positive".into());
            }
            if s.trials < 100 {
                e.push(format!("scfdma: trials {} below 100", s.trials));
            }
            if s.n_grid.is_empty() || s.n_grid.contains(&0) {
                e.push("scfdma: n_grid must list positive block sizes".into());
            }
            if let Some(f) = self.filter_named(s.filter.as_deref()) {
                let l = f.span * f.n_up + 1;
                for &n in &s.n_grid {
                    if n * f.n_up < l {
                        e.push(format!("scfdma: N = {n} gives N·N_up = {} shorter than the filter ({l})", n * f.n_up));
                    }
                }
            }
            if parse_mapping(&s.mapping).is_none() {
                e.push(format!("scfdma: mapping {:?} is not bpsk or one of: {}", s.mapping, supported_orders()));
            }
        }
        if let Some(f) = &self.frame {
            self.check_filter_ref(&mut e, "frame", f.filter.as_deref());
            if f.payload_bits == 0 || f.payload_bits > MAX_TRANSMISSION_BITS {
                e.push(format!("frame: payload_bits {} outside 1..={MAX_TRANSMISSION_BITS}", f.payload_bits));
            }
            if f.frames == 0 {
                e.push("frame: frames must be positive".into());
            }
            if let Some(name) = &f.ldpc {
                if !LDPC_CODES.contains(&name.as_str()) {
                    e.push(format!("frame: unknown ldpc {name:?}"));
                }
            }
            check_grid(&mut e, "frame", &f.ebn0_db);
        }
        e
    }

    /// Violations specific to running `cmd`.
    pub fn problems_for(&self, cmd: Command) -> Vec<String> {
        let mut e = Vec::new();
        let need = |e: &mut Vec<String>, ok: bool, what: &str| {
            if !ok {
                e.push(format!("{} needs {what}", cmd.name()));
            }
        };
        let schemes = !self.schemes.is_empty();
        let filter = !self.filters.is_empty();
        match cmd {
            Command::Ber => {
                need(&mut e, schemes && filter, "[[scheme]] and [[filter]] entries");
                need(&mut e, self.ber.is_some(), "a [ber] section");
                if let Some(b) = &self.ber {
                    for s in &self.schemes {
                        if b.ebn0_db.is_empty() && s.ebn0_db.is_none() {
                            e.push(format!("scheme {:?} has no Eb/N0 grid", s.name));
                        }
                    }
                }
            }
            Command::Papr => {
                need(&mut e, schemes && filter, "[[scheme]] and [[filter]] entries");
                need(&mut e, self.papr.is_some(), "a [papr] section");
            }
            Command::Psd => {
                need(&mut e, schemes && filter, "[[scheme]] and [[filter]] entries");
                need(&mut e, self.psd.is_some(), "a [psd] section");
            }
            Command::LmTable => {
                e.extend(self.problems_for(Command::Ber));
                need(&mut e, self.papr.is_some(), "a [papr] section");
                need(&mut e, self.schemes.iter().any(|s| s.baseline), "a scheme with baseline = true");
            }
            Command::ScfdmaVerify | Command::Complexity | Command::Bench => {
                need(&mut e, filter, "a [[filter]] entry");
                need(&mut e, self.scfdma.is_some(), "an [scfdma] section");
            }
            Command::FrameRoundtrip => {
                need(&mut e, self.frame.is_some(), "a [frame] section");
                need(&mut e, filter || self.frame.as_ref().is_some_and(|f| f.ebn0_db.is_empty()), "a [[filter]] entry for noisy frames");
            }
        }
        e
    }

    fn check_filter_ref(&self, e: &mut Vec<String>, at: &str, name: Option<&str>) {
        if let Some(n) = name {
            if !self.filters.iter().any(|f| f.name == n) {
                e.push(format!("{at}: filter {n:?} not defined"));
            }
        }
    }

    pub fn filter_named(&self, name: Option<&str>) -> Option<&FilterSpec> {
        match name {
            Some(n) => self.filters.iter().find(|f| f.name == n),
            None => self.filters.first(),
        }
    }
}

fn check_rate(e: &mut Vec<String>, at: &str, r: f64) {
    if !(r.is_finite() && r > 0.0) {
        e.push(format!("{at}: symbol rate {r} must be positive"));
    }
}

fn check_grid(e: &mut Vec<String>, at: &str, g: &[f64]) {
    if let Some(x) = g.iter().find(|x| !x.is_finite()) {
        e.push(format!("{at}: Eb/N0 grid entry {x} is not finite"));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        e.push(format!("{at}: Eb/N0 grid must be strictly increasing"));
    }
}

/// `None` for BPSK, otherwise the constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mapping {
    Bpsk,
    Constellation(Scheme, usize),
}

pub fn parse_mapping(s: &str) -> Option<Mapping> {
    if s == "bpsk" {
        return Some(Mapping::Bpsk);
    }
    let split = s.find(|c: char| c.is_ascii_digit())?;
    let order: usize = s[split..].parse().ok()?;
    let scheme = match &s[..split] {
        "psk" => Scheme::Psk,
        "qam" => Scheme::Qam,
        "apsk" => Scheme::Apsk,
        _ => return None,
    };
    SUPPORTED.contains(&(scheme, order)).then_some(Mapping::Constellation(scheme, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
[[filter]]
name = "pm"
kind = "pm"
[[scheme]]
name = "a"
modulation = "qam"
order = 16
code = "ldpc"
[ber]
ebn0_db = [-2.0, 0.0, 2.0]
"#;

    fn invalid(text: &str) -> Vec<String> {
        match parse_scenario(text) {
            Err(ScenarioError::Invalid(v)) => v,
            other => panic!("expected schema errors, got {other:?}"),
        }
    }

    #[test]
    fn negative_ebn0_allowed() {
        let sc = parse_scenario(BASE).unwrap();
        assert_eq!(sc.ber.unwrap().ebn0_db[0], -2.0);
    }

    #[test]
    fn negative_symbol_rate_rejected() {
        let errs = invalid(&BASE.replace("name = \"t\"", "name = \"t\"\nsymbol_rate_hz = -10500.0"));
        assert!(errs.iter().any(|e| e.contains("symbol rate")), "{errs:?}");
    }

    #[test]
    fn order_128_lists_supported() {
        let errs = invalid(&BASE.replace("order = 16", "order = 128"));
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("128") && errs[0].contains("qam 16/32/64/256") && errs[0].contains("apsk"));
    }

    #[test]
    fn collects_every_problem() {
        let text = BASE
            .replace("order = 16", "order = 128")
            .replace("name = \"t\"", "name = \"t\"\nsymbol_rate_hz = 0.0")
            .replace("[ber]", "[papr]\nframes = 10\n[ber]\nmin_errors = 5");
        let errs = invalid(&text);
        assert!(errs.len() >= 4, "{errs:?}");
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let errs = invalid(&BASE.replace("code = \"ldpc\"", "code = \"ldpc\"\ncolour = 3"));
        assert!(errs[0].contains("colour"));
    }

    #[test]
    fn command_requirements() {
        let sc = parse_scenario(BASE).unwrap();
        assert!(sc.problems_for(Command::Ber).is_empty());
        assert!(!sc.problems_for(Command::Papr).is_empty());
        assert!(!sc.problems_for(Command::LmTable).is_empty());
    }

    #[test]
    fn mappings() {
        assert_eq!(parse_mapping("bpsk"), Some(Mapping::Bpsk));
        assert_eq!(parse_mapping("qam256"), Some(Mapping::Constellation(Scheme::Qam, 256)));
        assert_eq!(parse_mapping("qam128"), None);
        assert_eq!(parse_mapping("foo8"), None);
    }
}
