//! Duo-binary 8-state recursive systematic component code.
//!
//! The state is the register vector `[S1, S2, S3]`, stored as the index
//! `4*S1 + 2*S2 + S3`. An input couple `(u1, u2)` is stored as the symbol
//! `2*u1 + u2`. With zero input the registers evolve as `S' = S * T` over
//! GF(2); the default `T` has period 7, which is what makes the tail-biting
//! remap matrices depend only on the couple count modulo 7.

use super::gf2::Gf2Matrix;
use crate::error::{Error, Result};

pub const NUM_STATES: usize = 8;
pub const NUM_SYMBOLS: usize = 4;

/// Tap description of a component encoder. Parity masks select bits from
/// `[S1, S2, S3, u1, u2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentTaps {
    pub transition: Gf2Matrix,
    pub inject_u1: [u8; 3],
    pub inject_u2: [u8; 3],
    pub parity_p: [u8; 5],
    pub parity_q: [u8; 5],
}

impl ComponentTaps {
    /// Default tap set. Not bit-exact with any published PLC standard.
    pub const DEFAULT: ComponentTaps = ComponentTaps {
        transition: Gf2Matrix([[0, 1, 0], [0, 0, 1], [1, 0, 1]]),
        inject_u1: [1, 1, 1],
        inject_u2: [1, 1, 0],
        parity_p: [1, 0, 0, 1, 0],
        parity_q: [1, 0, 1, 1, 1],
    };
}

impl Default for ComponentTaps {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub(crate) fn state_bits(s: usize) -> [u8; 3] {
    [((s >> 2) & 1) as u8, ((s >> 1) & 1) as u8, (s & 1) as u8]
}

pub(crate) fn state_index(b: [u8; 3]) -> usize {
    ((b[0] as usize) << 2) | ((b[1] as usize) << 1) | b[2] as usize
}

pub(crate) fn symbol_bits(d: usize) -> (u8, u8) {
    (((d >> 1) & 1) as u8, (d & 1) as u8)
}

/// Precomputed next-state, predecessor and parity tables.
#[derive(Debug, Clone)]
pub struct Trellis {
    pub taps: ComponentTaps,
    pub next: [[u8; NUM_SYMBOLS]; NUM_STATES],
    pub prev: [[u8; NUM_SYMBOLS]; NUM_STATES],
    /// `(p, q)` emitted on the branch `(state, symbol)`.
    pub parity: [[(u8, u8); NUM_SYMBOLS]; NUM_STATES],
}

impl Trellis {
    pub fn new(taps: ComponentTaps) -> Result<Self> {
        let mut next = [[0u8; NUM_SYMBOLS]; NUM_STATES];
        let mut parity = [[(0u8, 0u8); NUM_SYMBOLS]; NUM_STATES];
        for s in 0..NUM_STATES {
            let sb = state_bits(s);
            for d in 0..NUM_SYMBOLS {
                let (u1, u2) = symbol_bits(d);
                let mut nb = taps.transition.left_mul(sb);
                for k in 0..3 {
                    nb[k] ^= (u1 & taps.inject_u1[k]) ^ (u2 & taps.inject_u2[k]);
                }
                next[s][d] = state_index(nb) as u8;
                let inputs = [sb[0], sb[1], sb[2], u1, u2];
                let dot = |mask: &[u8; 5]| {
                    mask.iter()
                        .zip(inputs.iter())
                        .fold(0u8, |acc, (m, x)| acc ^ (m & x))
                };
                parity[s][d] = (dot(&taps.parity_p), dot(&taps.parity_q));
            }
        }
        // Each symbol must permute the states so every state has exactly one
        // predecessor per symbol.
        let mut prev = [[u8::MAX; NUM_SYMBOLS]; NUM_STATES];
        for s in 0..NUM_STATES {
            for d in 0..NUM_SYMBOLS {
                let n = next[s][d] as usize;
                if prev[n][d] != u8::MAX {
                    return Err(Error::param(
                        "taps",
                        "state update is not a bijection for a fixed input couple",
                    ));
                }
                prev[n][d] = s as u8;
            }
        }
        for s in 0..NUM_STATES {
            let mut seen = [false; NUM_STATES];
            for d in 0..NUM_SYMBOLS {
                let n = next[s][d] as usize;
                if seen[n] {
                    return Err(Error::param(
                        "taps",
                        "distinct input couples must lead to distinct states",
                    ));
                }
                seen[n] = true;
            }
        }
        Ok(Trellis {
            taps,
            next,
            prev,
            parity,
        })
    }

    /// Runs the encoder over `couples` from `start`, returning the final state
    /// and writing parity into `p`/`q` when given.
    pub fn run(
        &self,
        start: usize,
        couples: &[(u8, u8)],
        mut out: Option<(&mut [u8], &mut [u8])>,
    ) -> usize {
        let mut s = start;
        for (t, &(u1, u2)) in couples.iter().enumerate() {
            let d = ((u1 as usize) << 1) | u2 as usize;
            if let Some((p, q)) = out.as_mut() {
                let (pb, qb) = self.parity[s][d];
                p[t] = pb;
                q[t] = qb;
            }
            s = self.next[s][d] as usize;
        }
        s
    }
}
