//! Couple-level turbo interleaver.
//!
//! Position `i` of the interleaved sequence takes couple `perm[i]` of the
//! natural-order sequence; couples landing on odd positions additionally have
//! `u1` and `u2` swapped. The shipped permutations are seeded pseudo-random
//! shuffles frozen as text files under `data/interleavers/`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::PbSize;
use crate::error::{Error, Result};

const SEED_BASE: u64 = 0x6d76_706c_6300_0000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<u32>,
    inverse: Vec<u32>,
}

impl Interleaver {
    pub fn from_permutation(perm: Vec<u32>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::param("interleaver", "permutation is empty"));
        }
        let mut inverse = vec![u32::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            let p = p as usize;
            if p >= n || inverse[p] != u32::MAX {
                return Err(Error::param(
                    "interleaver",
                    format!("entry {i} ({p}) is out of range or repeated"),
                ));
            }
            inverse[p] = i as u32;
        }
        Ok(Interleaver { perm, inverse })
    }

    /// Seeded shuffle of `couples` indices.
    pub fn generate(couples: usize, seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..couples as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        perm.shuffle(&mut rng);
        Self::from_permutation(perm).expect("shuffle is a permutation")
    }

    /// Generator used for the shipped PB-size tables.
    pub fn generate_for(pb: PbSize) -> Self {
        Self::generate(pb.couples(), SEED_BASE + pb.bytes() as u64)
    }

    /// Permutation embedded in the crate for `pb`.
    pub fn builtin(pb: PbSize) -> Self {
        let text = match pb {
            PbSize::Pb16 => include_str!("../../data/interleavers/pb16.txt"),
            PbSize::Pb72 => include_str!("../../data/interleavers/pb72.txt"),
            PbSize::Pb136 => include_str!("../../data/interleavers/pb136.txt"),
            PbSize::Pb264 => include_str!("../../data/interleavers/pb264.txt"),
            PbSize::Pb520 => include_str!("../../data/interleavers/pb520.txt"),
        };
        let (file_pb, il) = Self::parse(text).expect("embedded interleaver table is valid");
        debug_assert_eq!(file_pb, pb);
        il
    }

    /// Parses the text format: a `PB_Size <bytes>` header line, then one
    /// source index per line. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<(PbSize, Self)> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::param("interleaver", "missing PB_Size header"))?;
        let bytes = header
            .strip_prefix("PB_Size")
            .map(str::trim)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::param("interleaver", format!("bad header `{header}`")))?;
        let pb = PbSize::from_bytes(bytes)?;
        let perm = lines
            .enumerate()
            .map(|(i, l)| {
                l.parse::<u32>()
                    .map_err(|_| Error::param("interleaver", format!("line {}: `{l}`", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        if perm.len() != pb.couples() {
            return Err(Error::LengthMismatch {
                what: "interleaver entries",
                expected: pb.couples(),
                actual: perm.len(),
            });
        }
        Ok((pb, Self::from_permutation(perm)?))
    }

    pub fn to_text(&self, pb: PbSize) -> String {
        let mut s = format!("PB_Size {}\n", pb.bytes());
        for p in &self.perm {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        s
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.perm.len() {
            return Err(Error::LengthMismatch {
                what: "interleaver input couples",
                expected: self.perm.len(),
                actual: n,
            });
        }
        Ok(())
    }

    pub fn interleave(&self, couples: &[(u8, u8)]) -> Result<Vec<(u8, u8)>> {
        self.check_len(couples.len())?;
        Ok(self
            .perm
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (a, b) = couples[p as usize];
                if i % 2 == 1 {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect())
    }

    pub fn deinterleave(&self, couples: &[(u8, u8)]) -> Result<Vec<(u8, u8)>> {
        self.check_len(couples.len())?;
        let mut out = vec![(0, 0); couples.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            let (a, b) = couples[i];
            out[p as usize] = if i % 2 == 1 { (b, a) } else { (a, b) };
        }
        Ok(out)
    }

    /// Interleaves per-couple symbol metrics indexed by `2*u1 + u2`.
    pub(crate) fn interleave_metrics(&self, src: &[[f64; 4]], dst: &mut [[f64; 4]]) {
        for (i, &p) in self.perm.iter().enumerate() {
            dst[i] = if i % 2 == 1 {
                swap_symbols(src[p as usize])
            } else {
                src[p as usize]
            };
        }
    }

    pub(crate) fn deinterleave_metrics(&self, src: &[[f64; 4]], dst: &mut [[f64; 4]]) {
        for (j, &i) in self.inverse.iter().enumerate() {
            let i = i as usize;
            dst[j] = if i % 2 == 1 { swap_symbols(src[i]) } else { src[i] };
        }
    }

    /// Interleaves per-bit values stored as `(u1, u2)` pairs.
    pub(crate) fn interleave_pairs<T: Copy>(&self, src: &[(T, T)]) -> Vec<(T, T)> {
        self.perm
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (a, b) = src[p as usize];
                if i % 2 == 1 {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect()
    }
}

/// Swapping `u1` and `u2` exchanges symbols `01` and `10`.
fn swap_symbols(m: [f64; 4]) -> [f64; 4] {
    [m[0], m[2], m[1], m[3]]
}
