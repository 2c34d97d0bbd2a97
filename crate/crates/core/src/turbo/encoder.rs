use super::puncture::{puncture, ParityStreams};
use super::trellis::{state_bits, state_index, Trellis};
use super::{Gf2Matrix, TurboConfig};
use crate::error::{Error, Result};

/// Register contents `[S1, S2, S3]` of a component encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EncoderState(pub [u8; 3]);

impl EncoderState {
    pub fn index(self) -> usize {
        state_index(self.0)
    }

    pub fn from_index(s: usize) -> Self {
        EncoderState(state_bits(s))
    }
}

/// Circulation state `S_0' = S_N * M` over GF(2).
pub fn tailbite_init(final_state: EncoderState, config: &TurboConfig) -> EncoderState {
    remap(final_state, &config.remap_matrix())
}

fn remap(s: EncoderState, m: &Gf2Matrix) -> EncoderState {
    EncoderState(m.left_mul(s.0))
}

/// Both passes of one component encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentOutput {
    /// Final state of the first pass, started from all-zero.
    pub zero_start_final: EncoderState,
    /// Circulation state used to start the second pass.
    pub start: EncoderState,
    /// Final state of the second pass.
    pub end: EncoderState,
    pub p: Vec<u8>,
    pub q: Vec<u8>,
}

/// Two-pass tail-biting encoding of `couples` through `trellis`.
pub fn encode_component(trellis: &Trellis, remap_matrix: &Gf2Matrix, couples: &[(u8, u8)]) -> ComponentOutput {
    let n = couples.len();
    let zero_start_final = EncoderState::from_index(trellis.run(0, couples, None));
    let start = remap(zero_start_final, remap_matrix);
    let mut p = vec![0u8; n];
    let mut q = vec![0u8; n];
    let end = EncoderState::from_index(trellis.run(start.index(), couples, Some((&mut p, &mut q))));
    ComponentOutput {
        zero_start_final,
        start,
        end,
        p,
        q,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedBlock {
    /// `u1, u2` of every couple in natural order.
    pub systematic: Vec<u8>,
    /// Unpunctured parity of both encoders.
    pub parity: ParityStreams,
    /// Parity bits surviving the puncturing pattern.
    pub punctured: Vec<u8>,
    /// Circulation states of ENC1 and ENC2.
    pub circulation: [EncoderState; 2],
}

impl CodedBlock {
    /// Transmission order: all systematic bits, then the kept parity.
    pub fn to_bits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.systematic.len() + self.punctured.len());
        out.extend_from_slice(&self.systematic);
        out.extend_from_slice(&self.punctured);
        out
    }
}

pub(crate) fn to_couples(bits: &[u8]) -> Vec<(u8, u8)> {
    bits.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

pub fn encode(info_bits: &[u8], config: &TurboConfig) -> Result<CodedBlock> {
    if info_bits.len() != config.info_bits() {
        return Err(Error::LengthMismatch {
            what: "turbo encoder input bits",
            expected: config.info_bits(),
            actual: info_bits.len(),
        });
    }
    if let Some(pos) = info_bits.iter().position(|&b| b > 1) {
        return Err(Error::param("info_bits", format!("bit {pos} is not 0 or 1")));
    }
    let natural = to_couples(info_bits);
    let interleaved = config.interleaver().interleave(&natural)?;
    let m = config.remap_matrix();
    let enc1 = encode_component(config.trellis(), &m, &natural);
    let enc2 = encode_component(config.trellis(), &m, &interleaved);
    debug_assert_eq!(enc1.start, enc1.end);
    debug_assert_eq!(enc2.start, enc2.end);
    let parity = ParityStreams {
        p1: enc1.p,
        q1: enc1.q,
        p2: enc2.p,
        q2: enc2.q,
    };
    let punctured = puncture(&parity, config.puncture_pattern());
    Ok(CodedBlock {
        systematic: info_bits.to_vec(),
        parity,
        punctured,
        circulation: [enc1.start, enc2.start],
    })
}
