//! Simulation configuration and its INI-style text form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::cable_channel::{CableParams, MultipathProfile, PathTap};
use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::ofdm::OfdmConfig;
use crate::turbo::{CodeRate, Interleaver, PbSize, TurboConfig};

/// Frequency band in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub f_low: f64,
    pub f_high: f64,
}

impl Band {
    pub fn new(f_low: f64, f_high: f64) -> Result<Self> {
        if !(f_low.is_finite() && f_high.is_finite() && f_low > 0.0 && f_high > f_low) {
            return Err(Error::param(
                "band",
                format!("need 0 < f_low < f_high, got {f_low}..{f_high}"),
            ));
        }
        Ok(Band { f_low, f_high })
    }

    pub fn mhz(f_low: f64, f_high: f64) -> Self {
        Band::new(f_low * 1e6, f_high * 1e6).expect("valid band")
    }

    pub fn label(&self) -> String {
        format!("{:.1}-{:.1}MHz", self.f_low / 1e6, self.f_high / 1e6)
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Band {
    type Err = Error;

    /// `<lo>..<hi>` in Hz, or with a trailing `MHz`/`kHz` unit applied to
    /// both ends (`3..5MHz`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let (body, scale) = if let Some(b) = lower.strip_suffix("mhz") {
            (b.trim().to_string(), 1e6)
        } else if let Some(b) = lower.strip_suffix("khz") {
            (b.trim().to_string(), 1e3)
        } else if let Some(b) = lower.strip_suffix("hz") {
            (b.trim().to_string(), 1.0)
        } else {
            (lower, 1.0)
        };
        let (lo, hi) = body
            .split_once("..")
            .ok_or_else(|| Error::param("band", format!("expected `<lo>..<hi>`, got `{t}`")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::param("band", format!("bad frequency `{v}` in `{t}`")))
        };
        Band::new(parse(lo)? * scale, parse(hi)? * scale)
    }
}

pub fn parse_bands(s: &str) -> Result<Vec<Band>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// SNR points as a comma list (`0, 3, 6`) or an inclusive range
/// `start:step:stop`.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let t = s.trim();
    let bad = |why: &str| Error::param("snr_db", format!("{why}: `{t}`"));
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range must be start:step:stop"));
        }
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<Vec<_>>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step.is_finite() && step != 0.0) || (stop - start) / step < 0.0 {
            return Err(bad("step must be non-zero and point from start to stop"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            return Err(bad("too many points"));
        }
        Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect())
    } else {
        let v = t
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect::<Result<Vec<_>>>()?;
        if v.is_empty() {
            return Err(bad("no SNR points"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    Coded,
    Uncoded,
    Both,
}

impl CodingMode {
    pub fn flags(self) -> &'static [bool] {
        match self {
            CodingMode::Coded => &[true],
            CodingMode::Uncoded => &[false],
            CodingMode::Both => &[true, false],
        }
    }
}

impl FromStr for CodingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coded" | "true" | "yes" => Ok(CodingMode::Coded),
            "uncoded" | "false" | "no" => Ok(CodingMode::Uncoded),
            "both" => Ok(CodingMode::Both),
            other => Err(Error::param("coded", format!("expected coded|uncoded|both, got `{other}`"))),
        }
    }
}

/// Where the simulated channel comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    /// Cable RLGC model with the configured multipath profile.
    Cable,
    /// Unit identity matrix on every subcarrier.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    /// Least squares from the pilot preamble.
    LeastSquares,
    /// Receiver is handed the true channel.
    Perfect,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub cable: CableParams,
    pub profile: MultipathProfile,
    /// `A` and `Gamma`; the total power is set per SNR point.
    pub noise: NoiseParams,
    pub ofdm: OfdmConfig,
    pub turbo: TurboConfig,
    pub coding: CodingMode,
    pub bands: Vec<Band>,
    pub snr_points: Vec<f64>,
    pub min_bits: u64,
    pub max_bits: u64,
    pub target_errors: u64,
    pub frames_per_batch: usize,
    pub seed: u64,
    pub channel: ChannelModel,
    pub estimation: Estimation,
    pub preamble_symbols: usize,
    /// Estimate the noise power from the preamble residual instead of
    /// using the true value (needs more than three preamble symbols).
    pub estimate_noise: bool,
}

impl Default for SimConfig {
    /// Reference setup: 1024 subcarriers at 2 kHz, QPSK, PB 264 at rate 1/2,
    /// A = 0.1, Gamma = 0.01, band 3.0-5.0 MHz.
    fn default() -> Self {
        let cable = CableParams::mv_underground();
        SimConfig {
            profile: MultipathProfile::default_four_path(&cable),
            cable,
            noise: NoiseParams::new(0.1, 0.01, 1.0).expect("valid"),
            ofdm: OfdmConfig::default(),
            turbo: TurboConfig::new(PbSize::Pb264, CodeRate::Half)
                .expect("valid")
                .with_early_stop(true),
            coding: CodingMode::Both,
            bands: vec![Band::mhz(3.0, 5.0)],
            snr_points: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            min_bits: 100_000,
            max_bits: 1_000_000,
            target_errors: 100,
            frames_per_batch: 4,
            seed: 1,
            channel: ChannelModel::Cable,
            estimation: Estimation::LeastSquares,
            preamble_symbols: 3,
            estimate_noise: false,
        }
    }
}

fn field_err(section: &str, key: &str, reason: impl fmt::Display) -> Error {
    let field = if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    };
    Error::config(field, reason.to_string())
}

fn num<T: FromStr>(section: &str, key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse::<T>()
        .map_err(|e| field_err(section, key, format!("cannot parse `{v}`: {e}")))
}

fn list(section: &str, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| num::<f64>(section, key, p))
        .collect()
}

fn boolean(section: &str, key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(field_err(section, key, format!("expected a boolean, got `{v}`"))),
    }
}

/// Section-level validation errors take the key from the failing parameter.
fn wrap(section: &str, key: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        Error::InvalidParameter { name, reason } if key.is_empty() => field_err(section, name, reason),
        other => field_err(section, key, other),
    }
}

impl SimConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse_with_base(&text, path.parent())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_base(text, None)
    }

    fn parse_with_base(text: &str, base: Option<&Path>) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        let mut cfg = SimConfig::default();
        let mut gains: Option<Vec<f64>> = None;
        let mut lengths: Option<Vec<f64>> = None;
        let mut delays: Option<Vec<f64>> = None;
        let mut pb = PbSize::Pb264;
        let mut rate = CodeRate::Half;
        let mut iterations = cfg.turbo.iterations;
        let mut algorithm = cfg.turbo.algorithm;
        let mut early_stop = cfg.turbo.early_stop;
        let mut interleaver_file: Option<String> = None;

        for (section, props) in ini.iter() {
            let sec = section.unwrap_or("").trim().to_ascii_lowercase();
            for (key, value) in props.iter() {
                let key = key.trim();
                let s = sec.as_str();
                match (s, key) {
                    ("" | "sim", "seed") => cfg.seed = num(s, key, value)?,
                    ("" | "sim", "bands" | "band") => {
                        cfg.bands = parse_bands(value).map_err(|e| wrap(s, key, e))?
                    }
                    ("" | "sim", "snr_db" | "snr") => {
                        cfg.snr_points = parse_snr_list(value).map_err(|e| wrap(s, key, e))?
                    }
                    ("" | "sim", "coded") => cfg.coding = value.parse().map_err(|e| wrap(s, key, e))?,
                    ("" | "sim", "min_bits") => cfg.min_bits = num(s, key, value)?,
                    ("" | "sim", "max_bits") => cfg.max_bits = num(s, key, value)?,
                    ("" | "sim", "target_errors") => cfg.target_errors = num(s, key, value)?,
                    ("" | "sim", "frames_per_batch") => cfg.frames_per_batch = num(s, key, value)?,
                    ("" | "sim", "channel") => {
                        cfg.channel = match value.trim().to_ascii_lowercase().as_str() {
                            "cable" => ChannelModel::Cable,
                            "identity" => ChannelModel::Identity,
                            _ => return Err(field_err(s, key, "expected cable|identity")),
                        }
                    }
                    ("" | "sim", "estimation") => {
                        cfg.estimation = match value.trim().to_ascii_lowercase().as_str() {
                            "ls" | "least-squares" => Estimation::LeastSquares,
                            "perfect" | "genie" => Estimation::Perfect,
                            _ => return Err(field_err(s, key, "expected ls|perfect")),
                        }
                    }
                    ("" | "sim", "preamble_symbols") => cfg.preamble_symbols = num(s, key, value)?,
                    ("" | "sim", "estimate_noise") => cfg.estimate_noise = boolean(s, key, value)?,

                    ("cable", "mu_c") => cfg.cable.mu_c = num(s, key, value)?,
                    ("cable", "sigma_c") => cfg.cable.sigma_c = num(s, key, value)?,
                    ("cable", "spacing" | "d") => cfg.cable.spacing = num(s, key, value)?,
                    ("cable", "mu_0") => cfg.cable.mu_0 = num(s, key, value)?,
                    ("cable", "eps_0") => cfg.cable.eps_0 = num(s, key, value)?,
                    ("cable", "radius" | "r") => cfg.cable.radius = num(s, key, value)?,
                    ("cable", "tan_delta") => cfg.cable.tan_delta = num(s, key, value)?,
                    ("cable", "coupling" | "k") => cfg.cable.coupling = num(s, key, value)?,
                    ("cable", "ground_resistance" | "r_0") => {
                        cfg.cable.ground_resistance = num(s, key, value)?
                    }

                    ("profile", "gains") => gains = Some(list(s, key, value)?),
                    ("profile", "lengths") => lengths = Some(list(s, key, value)?),
                    ("profile", "delays") => delays = Some(list(s, key, value)?),

                    ("noise", "impulse_index" | "a") => cfg.noise.impulse_index = num(s, key, value)?,
                    ("noise", "gamma") => cfg.noise.gamma = num(s, key, value)?,

                    ("ofdm", "n_subcarriers") => cfg.ofdm.n_subcarriers = num(s, key, value)?,
                    ("ofdm", "subcarrier_spacing" | "spacing") => {
                        cfg.ofdm.subcarrier_spacing = num(s, key, value)?
                    }
                    ("ofdm", "cp_len") => cfg.ofdm.cp_len = num(s, key, value)?,

                    ("turbo", "pb_size") => {
                        pb = PbSize::from_bytes(num(s, key, value)?).map_err(|e| wrap(s, key, e))?
                    }
                    ("turbo", "rate") => rate = value.parse().map_err(|e| wrap(s, key, e))?,
                    ("turbo", "iterations") => iterations = num(s, key, value)?,
                    ("turbo", "algorithm") => algorithm = value.parse().map_err(|e| wrap(s, key, e))?,
                    ("turbo", "early_stop") => early_stop = boolean(s, key, value)?,
                    ("turbo", "interleaver_file") => interleaver_file = Some(value.trim().to_string()),

                    _ => return Err(field_err(s, key, "unknown key")),
                }
            }
        }

        cfg.cable.validate().map_err(|e| wrap("cable", "", e))?;
        cfg.noise.validate().map_err(|e| wrap("noise", "", e))?;
        cfg.ofdm.validate().map_err(|e| wrap("ofdm", "", e))?;

        if gains.is_some() || lengths.is_some() || delays.is_some() {
            let g = gains.ok_or_else(|| field_err("profile", "gains", "missing"))?;
            let l = lengths.ok_or_else(|| field_err("profile", "lengths", "missing"))?;
            cfg.profile = match delays {
                None => MultipathProfile::from_lengths(&cfg.cable, &g, &l),
                Some(d) => {
                    if d.len() != g.len() || l.len() != g.len() {
                        return Err(field_err("profile", "delays", "gains, lengths and delays differ in length"));
                    }
                    MultipathProfile::new(
                        g.iter()
                            .zip(&l)
                            .zip(&d)
                            .map(|((&gain, &length), &delay)| PathTap { gain, length, delay })
                            .collect(),
                    )
                }
            }
            .map_err(|e| wrap("profile", "", e))?;
        } else {
            cfg.profile = MultipathProfile::default_four_path(&cfg.cable);
        }

        let mut turbo = TurboConfig::new(pb, rate)
            .map_err(|e| wrap("turbo", "", e))?
            .with_iterations(iterations)
            .map_err(|e| wrap("turbo", "iterations", e))?
            .with_algorithm(algorithm)
            .with_early_stop(early_stop);
        if let Some(file) = interleaver_file {
            let p = match base {
                Some(b) if Path::new(&file).is_relative() => b.join(&file),
                _ => Path::new(&file).to_path_buf(),
            };
            let text = std::fs::read_to_string(&p).map_err(|e| {
                field_err("turbo", "interleaver_file", format!("cannot read {}: {e}", p.display()))
            })?;
            let (file_pb, il) =
                Interleaver::parse(&text).map_err(|e| wrap("turbo", "interleaver_file", e))?;
            if file_pb != pb {
                return Err(field_err(
                    "turbo",
                    "interleaver_file",
                    format!("table is for PB_Size {} but pb_size is {}", file_pb.bytes(), pb.bytes()),
                ));
            }
            turbo = turbo
                .with_interleaver(il)
                .map_err(|e| wrap("turbo", "interleaver_file", e))?;
        }
        cfg.turbo = turbo;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::config("bands", "at least one band is required"));
        }
        if self.snr_points.is_empty() {
            return Err(Error::config("snr_db", "at least one SNR point is required"));
        }
        if self.snr_points.iter().any(|s| !s.is_finite()) {
            return Err(Error::config("snr_db", "SNR points must be finite"));
        }
        if self.max_bits == 0 || self.max_bits < self.min_bits {
            return Err(Error::config("max_bits", "must be >= min_bits and > 0"));
        }
        if self.frames_per_batch == 0 {
            return Err(Error::config("frames_per_batch", "must be >= 1"));
        }
        if self.preamble_symbols < 3 {
            return Err(Error::config("preamble_symbols", "must be >= 3"));
        }
        if self.estimate_noise && self.preamble_symbols <= 3 {
            return Err(Error::config(
                "estimate_noise",
                "needs preamble_symbols > 3 to leave a residual",
            ));
        }
        Ok(())
    }
}
