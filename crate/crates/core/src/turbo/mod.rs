//! Duo-binary 8-state tail-biting turbo code.

mod decoder;
mod encoder;
mod gf2;
mod interleaver;
mod puncture;
mod trellis;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use decoder::{decode, decode_with_stats, siso_exact_posteriors, DecodeStats};
pub use encoder::{encode, encode_component, tailbite_init, CodedBlock, ComponentOutput, EncoderState};
pub use gf2::Gf2Matrix;
pub use interleaver::Interleaver;
pub use puncture::{depuncture, puncture, ParityLlrs, ParityStreams, PuncturePattern};
pub use trellis::{ComponentTaps, Trellis, NUM_STATES, NUM_SYMBOLS};

use crate::error::{Error, Result};

/// Physical-layer block sizes in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PbSize {
    Pb16,
    Pb72,
    Pb136,
    Pb264,
    Pb520,
}

impl PbSize {
    pub const ALL: [PbSize; 5] = [
        PbSize::Pb16,
        PbSize::Pb72,
        PbSize::Pb136,
        PbSize::Pb264,
        PbSize::Pb520,
    ];

    pub fn from_bytes(bytes: usize) -> Result<Self> {
        match bytes {
            16 => Ok(PbSize::Pb16),
            72 => Ok(PbSize::Pb72),
            136 => Ok(PbSize::Pb136),
            264 => Ok(PbSize::Pb264),
            520 => Ok(PbSize::Pb520),
            other => Err(Error::UnsupportedPbSize(other)),
        }
    }

    pub fn bytes(self) -> usize {
        match self {
            PbSize::Pb16 => 16,
            PbSize::Pb72 => 72,
            PbSize::Pb136 => 136,
            PbSize::Pb264 => 264,
            PbSize::Pb520 => 520,
        }
    }

    pub fn info_bits(self) -> usize {
        self.bytes() * 8
    }

    /// Interleaving length: one couple per two input bits.
    pub fn couples(self) -> usize {
        self.info_bits() / 2
    }

    /// Tail-biting state remap matrix for this block size.
    pub fn remap_matrix(self) -> Gf2Matrix {
        match self {
            PbSize::Pb264 => Gf2Matrix([[1, 0, 1], [1, 1, 1], [1, 1, 0]]),
            PbSize::Pb136 => Gf2Matrix([[0, 1, 1], [1, 0, 0], [0, 1, 0]]),
            PbSize::Pb16 | PbSize::Pb72 | PbSize::Pb520 => {
                Gf2Matrix([[0, 0, 1], [1, 0, 1], [1, 1, 1]])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeRate {
    /// Rate 1/2: as many kept parity bits as information bits.
    Half,
    /// Rate 16/18.
    SixteenEighteenths,
    /// Mother code, rate 1/3, no puncturing.
    Unpunctured,
}

impl CodeRate {
    pub fn numerator(self) -> usize {
        match self {
            CodeRate::Half => 1,
            CodeRate::SixteenEighteenths => 16,
            CodeRate::Unpunctured => 1,
        }
    }

    pub fn denominator(self) -> usize {
        match self {
            CodeRate::Half => 2,
            CodeRate::SixteenEighteenths => 18,
            CodeRate::Unpunctured => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" | "0.5" => Ok(CodeRate::Half),
            "16/18" | "8/9" => Ok(CodeRate::SixteenEighteenths),
            "1/3" => Ok(CodeRate::Unpunctured),
            other => Err(Error::UnsupportedRate(other.to_string())),
        }
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator(), self.denominator())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapAlgorithm {
    #[default]
    LogMap,
    MaxLogMap,
}

impl FromStr for MapAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log-map" | "logmap" => Ok(MapAlgorithm::LogMap),
            "max-log-map" | "maxlogmap" | "max-log" => Ok(MapAlgorithm::MaxLogMap),
            other => Err(Error::param(
                "algorithm",
                format!("unknown decoder algorithm `{other}`"),
            )),
        }
    }
}

pub const DEFAULT_ITERATIONS: usize = 8;

#[derive(Debug, Clone)]
pub struct TurboConfig {
    couples: usize,
    pb_size: Option<PbSize>,
    rate: CodeRate,
    remap: Gf2Matrix,
    trellis: Trellis,
    interleaver: Arc<Interleaver>,
    pattern: PuncturePattern,
    pub iterations: usize,
    pub algorithm: MapAlgorithm,
    /// Stop iterating once the hard decisions repeat between iterations.
    pub early_stop: bool,
}

impl TurboConfig {
    /// Configuration for one of the standard block sizes, using the shipped
    /// interleaver table and the tabulated remap matrix.
    pub fn new(pb: PbSize, rate: CodeRate) -> Result<Self> {
        let cfg = TurboConfig {
            couples: pb.couples(),
            pb_size: Some(pb),
            rate,
            remap: pb.remap_matrix(),
            trellis: Trellis::new(ComponentTaps::DEFAULT)?,
            interleaver: Arc::new(Interleaver::builtin(pb)),
            pattern: PuncturePattern::for_rate(rate),
            iterations: DEFAULT_ITERATIONS,
            algorithm: MapAlgorithm::LogMap,
            early_stop: false,
        };
        cfg.check_remap()?;
        Ok(cfg)
    }

    /// Arbitrary couple count (e.g. small test codes). The remap matrix is
    /// derived from the trellis.
    pub fn custom(couples: usize, rate: CodeRate, interleaver: Interleaver) -> Result<Self> {
        if interleaver.len() != couples {
            return Err(Error::LengthMismatch {
                what: "interleaver length",
                expected: couples,
                actual: interleaver.len(),
            });
        }
        let trellis = Trellis::new(ComponentTaps::DEFAULT)?;
        let remap = derive_remap(&trellis.taps, couples)?;
        let pattern = PuncturePattern::for_rate(rate);
        if couples % pattern.period() != 0 {
            return Err(Error::param(
                "couples",
                format!(
                    "{couples} couples is not a multiple of the rate {rate} puncturing period {}",
                    pattern.period()
                ),
            ));
        }
        Ok(TurboConfig {
            couples,
            pb_size: None,
            rate,
            remap,
            trellis,
            interleaver: Arc::new(interleaver),
            pattern,
            iterations: DEFAULT_ITERATIONS,
            algorithm: MapAlgorithm::LogMap,
            early_stop: false,
        })
    }

    pub fn with_iterations(mut self, iterations: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::param("iterations", "must be >= 1"));
        }
        self.iterations = iterations;
        Ok(self)
    }

    pub fn with_algorithm(mut self, algorithm: MapAlgorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_early_stop(mut self, early_stop: bool) -> Self {
        self.early_stop = early_stop;
        self
    }

    pub fn with_interleaver(mut self, interleaver: Interleaver) -> Result<Self> {
        if interleaver.len() != self.couples {
            return Err(Error::LengthMismatch {
                what: "interleaver length",
                expected: self.couples,
                actual: interleaver.len(),
            });
        }
        self.interleaver = Arc::new(interleaver);
        Ok(self)
    }

    /// Replaces the component taps; the remap matrix is re-derived.
    pub fn with_taps(mut self, taps: ComponentTaps) -> Result<Self> {
        self.trellis = Trellis::new(taps)?;
        self.remap = derive_remap(&taps, self.couples)?;
        Ok(self)
    }

    fn check_remap(&self) -> Result<()> {
        let step = self.trellis.taps.transition.pow(self.couples);
        let closure = Gf2Matrix::IDENTITY.add(&step);
        if self.remap.mul(&closure) != Gf2Matrix::IDENTITY {
            return Err(Error::param(
                "remap_matrix",
                "does not invert I + T^N for this trellis and block length",
            ));
        }
        Ok(())
    }

    pub fn couples(&self) -> usize {
        self.couples
    }

    pub fn info_bits(&self) -> usize {
        2 * self.couples
    }

    pub fn coded_bits(&self) -> usize {
        self.info_bits() + self.pattern.kept_count(self.couples)
    }

    pub fn pb_size(&self) -> Option<PbSize> {
        self.pb_size
    }

    pub fn rate(&self) -> CodeRate {
        self.rate
    }

    pub fn remap_matrix(&self) -> Gf2Matrix {
        self.remap
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn puncture_pattern(&self) -> &PuncturePattern {
        &self.pattern
    }
}

/// `(I + T^N)^-1`, the map from the zero-start final state to the
/// circulation state.
pub fn derive_remap(taps: &ComponentTaps, couples: usize) -> Result<Gf2Matrix> {
    Gf2Matrix::IDENTITY
        .add(&taps.transition.pow(couples))
        .inverse()
        .ok_or_else(|| {
            Error::param(
                "couples",
                format!("tail-biting is impossible for {couples} couples with these taps"),
            )
        })
}
