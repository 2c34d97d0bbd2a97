//! Parity puncturing. Kept parity bits are serialized couple by couple in the
//! order `p1, q1, p2, q2`.

use super::CodeRate;
use crate::error::{Error, Result};

/// Per-couple keep flags for `(p1, q1, p2, q2)`, repeating with the pattern
/// period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturePattern {
    keep: Vec<[bool; 4]>,
}

impl PuncturePattern {
    pub fn new(keep: Vec<[bool; 4]>) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::param("puncture", "pattern is empty"));
        }
        Ok(PuncturePattern { keep })
    }

    /// Rate 1/2 alternates whole encoders, 16/18 keeps one parity bit per
    /// encoder every eight couples.
    pub fn for_rate(rate: CodeRate) -> Self {
        const T: bool = true;
        const F: bool = false;
        let keep = match rate {
            CodeRate::Unpunctured => vec![[T, T, T, T]],
            CodeRate::Half => vec![[T, T, F, F], [F, F, T, T]],
            CodeRate::SixteenEighteenths => {
                let mut k = vec![[F, F, F, F]; 8];
                k[0] = [T, F, F, F];
                k[4] = [F, F, T, F];
                k
            }
        };
        PuncturePattern { keep }
    }

    pub fn period(&self) -> usize {
        self.keep.len()
    }

    pub fn keeps(&self, couple: usize) -> [bool; 4] {
        self.keep[couple % self.keep.len()]
    }

    /// Number of parity bits kept over `couples` couples.
    pub fn kept_count(&self, couples: usize) -> usize {
        (0..couples)
            .map(|t| self.keeps(t).iter().filter(|&&k| k).count())
            .sum()
    }
}

/// Unpunctured parity of both component encoders.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParityStreams {
    pub p1: Vec<u8>,
    pub q1: Vec<u8>,
    pub p2: Vec<u8>,
    pub q2: Vec<u8>,
}

impl ParityStreams {
    pub fn zeros(couples: usize) -> Self {
        ParityStreams {
            p1: vec![0; couples],
            q1: vec![0; couples],
            p2: vec![0; couples],
            q2: vec![0; couples],
        }
    }

    pub fn couples(&self) -> usize {
        self.p1.len()
    }
}

/// Parity LLRs with zeros at punctured positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParityLlrs {
    pub p1: Vec<f64>,
    pub q1: Vec<f64>,
    pub p2: Vec<f64>,
    pub q2: Vec<f64>,
}

pub fn puncture(parity: &ParityStreams, pattern: &PuncturePattern) -> Vec<u8> {
    let n = parity.couples();
    let mut out = Vec::with_capacity(pattern.kept_count(n));
    for t in 0..n {
        let keep = pattern.keeps(t);
        let bits = [parity.p1[t], parity.q1[t], parity.p2[t], parity.q2[t]];
        out.extend(bits.iter().zip(keep).filter(|(_, k)| *k).map(|(b, _)| *b));
    }
    out
}

pub fn depuncture(values: &[f64], pattern: &PuncturePattern, couples: usize) -> Result<ParityLlrs> {
    let expected = pattern.kept_count(couples);
    if values.len() != expected {
        return Err(Error::LengthMismatch {
            what: "punctured parity",
            expected,
            actual: values.len(),
        });
    }
    let mut out = ParityLlrs {
        p1: vec![0.0; couples],
        q1: vec![0.0; couples],
        p2: vec![0.0; couples],
        q2: vec![0.0; couples],
    };
    let mut it = values.iter();
    for t in 0..couples {
        let keep = pattern.keeps(t);
        let slots: [&mut f64; 4] = [
            &mut out.p1[t],
            &mut out.q1[t],
            &mut out.p2[t],
            &mut out.q2[t],
        ];
        for (slot, k) in slots.into_iter().zip(keep) {
            if k {
                *slot = *it.next().expect("length checked");
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kept_counts_match_rates() {
        let n = 1056;
        assert_eq!(PuncturePattern::for_rate(CodeRate::Half).kept_count(n), 2112);
        assert_eq!(
            PuncturePattern::for_rate(CodeRate::SixteenEighteenths).kept_count(n),
            264
        );
        assert_eq!(
            PuncturePattern::for_rate(CodeRate::Unpunctured).kept_count(n),
            4 * n
        );
    }

    #[test]
    fn depuncture_restores_kept_positions() {
        let n = 16;
        let pat = PuncturePattern::for_rate(CodeRate::Half);
        let mut par = ParityStreams::zeros(n);
        for t in 0..n {
            par.p1[t] = (t % 2) as u8;
            par.q1[t] = 1;
            par.p2[t] = ((t / 2) % 2) as u8;
            par.q2[t] = 1;
        }
        let bits = puncture(&par, &pat);
        let vals: Vec<f64> = bits.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect();
        let back = depuncture(&vals, &pat, n).unwrap();
        for t in 0..n {
            let keep = pat.keeps(t);
            let orig = [par.p1[t], par.q1[t], par.p2[t], par.q2[t]];
            let got = [back.p1[t], back.q1[t], back.p2[t], back.q2[t]];
            for k in 0..4 {
                if keep[k] {
                    assert_eq!(got[k], if orig[k] == 1 { 1.0 } else { -1.0 });
                } else {
                    assert_eq!(got[k], 0.0);
                }
            }
        }
        assert!(depuncture(&vals[1..], &pat, n).is_err());
    }
}
