//! Symbol-level BCJR decoding of the duo-binary turbo code.
//!
//! All metrics are natural-log domain. A channel LLR `L` is `ln P(1)/P(0)`,
//! so a bit value `x` contributes `x * L` to a branch metric. Extrinsic
//! information is exchanged as four log-metrics per couple, normalised so
//! that symbol `00` is zero.

use super::puncture::depuncture;
use super::trellis::{symbol_bits, Trellis, NUM_STATES, NUM_SYMBOLS};
use super::{MapAlgorithm, TurboConfig};
use crate::error::{Error, Result};

const NEG: f64 = -1e100;

type Metrics = [f64; NUM_SYMBOLS];
type StateMetrics = [f64; NUM_STATES];
type BranchMetrics = [[f64; NUM_SYMBOLS]; NUM_STATES];

#[inline(always)]
fn max_star<const MAX_LOG: bool>(a: f64, b: f64) -> f64 {
    if MAX_LOG {
        a.max(b)
    } else {
        a.max(b) + (-(a - b).abs()).exp().ln_1p()
    }
}

fn normalize(m: &mut StateMetrics) {
    let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m.iter_mut().for_each(|x| *x -= top);
}

/// Channel observations and prior for one component decoder.
struct ComponentInput<'a> {
    sys: &'a [(f64, f64)],
    p: &'a [f64],
    q: &'a [f64],
    apriori: &'a [Metrics],
}

/// Reusable buffers for one component decoder.
struct Workspace {
    gamma: Vec<BranchMetrics>,
    alpha: Vec<StateMetrics>,
    beta: Vec<StateMetrics>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            gamma: vec![[[0.0; NUM_SYMBOLS]; NUM_STATES]; n],
            alpha: vec![[0.0; NUM_STATES]; n + 1],
            beta: vec![[0.0; NUM_STATES]; n + 1],
        }
    }

    fn fill_gamma(&mut self, trellis: &Trellis, input: &ComponentInput<'_>) {
        for (t, g) in self.gamma.iter_mut().enumerate() {
            let (l1, l2) = input.sys[t];
            let (lp, lq) = (input.p[t], input.q[t]);
            let la = &input.apriori[t];
            for s in 0..NUM_STATES {
                for d in 0..NUM_SYMBOLS {
                    let (u1, u2) = symbol_bits(d);
                    let (pb, qb) = trellis.parity[s][d];
                    g[s][d] = la[d]
                        + u1 as f64 * l1
                        + u2 as f64 * l2
                        + pb as f64 * lp
                        + qb as f64 * lq;
                }
            }
        }
    }

    fn forward<const MAX_LOG: bool>(&mut self, trellis: &Trellis, start: StateMetrics, norm: bool) {
        self.alpha[0] = start;
        for t in 0..self.gamma.len() {
            let g = &self.gamma[t];
            let a = self.alpha[t];
            let mut next = [NEG; NUM_STATES];
            for (sn, slot) in next.iter_mut().enumerate() {
                let mut acc = NEG;
                for d in 0..NUM_SYMBOLS {
                    let s = trellis.prev[sn][d] as usize;
                    acc = max_star::<MAX_LOG>(acc, a[s] + g[s][d]);
                }
                *slot = acc;
            }
            if norm {
                normalize(&mut next);
            }
            self.alpha[t + 1] = next;
        }
    }

    fn backward<const MAX_LOG: bool>(&mut self, trellis: &Trellis, end: StateMetrics, norm: bool) {
        let n = self.gamma.len();
        self.beta[n] = end;
        for t in (0..n).rev() {
            let g = &self.gamma[t];
            let b = self.beta[t + 1];
            let mut cur = [NEG; NUM_STATES];
            for (s, slot) in cur.iter_mut().enumerate() {
                let mut acc = NEG;
                for d in 0..NUM_SYMBOLS {
                    acc = max_star::<MAX_LOG>(acc, g[s][d] + b[trellis.next[s][d] as usize]);
                }
                *slot = acc;
            }
            if norm {
                normalize(&mut cur);
            }
            self.beta[t] = cur;
        }
    }

    /// Log a-posteriori symbol metrics (unnormalised).
    fn posteriors<const MAX_LOG: bool>(&self, trellis: &Trellis, out: &mut [Metrics]) {
        for (t, o) in out.iter_mut().enumerate() {
            let g = &self.gamma[t];
            let a = &self.alpha[t];
            let b = &self.beta[t + 1];
            for d in 0..NUM_SYMBOLS {
                let mut acc = NEG;
                for s in 0..NUM_STATES {
                    acc = max_star::<MAX_LOG>(acc, a[s] + g[s][d] + b[trellis.next[s][d] as usize]);
                }
                o[d] = acc;
            }
        }
    }
}

/// Boundary metrics carried between iterations for circular decoding.
#[derive(Clone, Copy)]
struct Circular {
    alpha0: StateMetrics,
    beta_n: StateMetrics,
}

/// One circular SISO pass. On the first call the boundaries are obtained by
/// a wrap-around warm-up pass from uniform metrics; afterwards the previous
/// iteration's wrapped metrics seed the recursions.
fn siso_circular<const MAX_LOG: bool>(
    trellis: &Trellis,
    ws: &mut Workspace,
    input: &ComponentInput<'_>,
    boundary: &mut Option<Circular>,
    extrinsic: &mut [Metrics],
) {
    let n = input.sys.len();
    ws.fill_gamma(trellis, input);
    let (alpha0, beta_n) = match *boundary {
        Some(b) => (b.alpha0, b.beta_n),
        None => {
            ws.forward::<MAX_LOG>(trellis, [0.0; NUM_STATES], true);
            ws.backward::<MAX_LOG>(trellis, [0.0; NUM_STATES], true);
            (ws.alpha[n], ws.beta[0])
        }
    };
    ws.forward::<MAX_LOG>(trellis, alpha0, true);
    ws.backward::<MAX_LOG>(trellis, beta_n, true);
    *boundary = Some(Circular {
        alpha0: ws.alpha[n],
        beta_n: ws.beta[0],
    });
    ws.posteriors::<MAX_LOG>(trellis, extrinsic);
    for (t, e) in extrinsic.iter_mut().enumerate() {
        let (l1, l2) = input.sys[t];
        for (d, x) in e.iter_mut().enumerate() {
            let (u1, u2) = symbol_bits(d);
            *x -= input.apriori[t][d] + u1 as f64 * l1 + u2 as f64 * l2;
        }
        let base = e[0];
        e.iter_mut().for_each(|x| *x -= base);
    }
}

/// Exact symbol posteriors of a single tail-biting component code: the
/// trellis is decoded once per circulation state with matching start and end
/// constraints and the results are log-summed. Returns per-couple log
/// probabilities (each row log-sums to zero).
///
/// `sys` and `parity` hold channel LLRs; `apriori` may be empty for uniform
/// priors.
pub fn siso_exact_posteriors(
    trellis: &Trellis,
    sys: &[(f64, f64)],
    p: &[f64],
    q: &[f64],
    apriori: &[[f64; 4]],
) -> Result<Vec<[f64; 4]>> {
    let n = sys.len();
    for (what, len) in [("parity p", p.len()), ("parity q", q.len())] {
        if len != n {
            return Err(Error::LengthMismatch {
                what,
                expected: n,
                actual: len,
            });
        }
    }
    let zeros;
    let apriori = if apriori.is_empty() {
        zeros = vec![[0.0; 4]; n];
        &zeros[..]
    } else if apriori.len() == n {
        apriori
    } else {
        return Err(Error::LengthMismatch {
            what: "a-priori metrics",
            expected: n,
            actual: apriori.len(),
        });
    };
    let input = ComponentInput { sys, p, q, apriori };
    let mut ws = Workspace::new(n);
    ws.fill_gamma(trellis, &input);
    let mut total = vec![[NEG; 4]; n];
    let mut part = vec![[0.0; 4]; n];
    for s0 in 0..NUM_STATES {
        let mut delta = [NEG; NUM_STATES];
        delta[s0] = 0.0;
        ws.forward::<false>(trellis, delta, false);
        ws.backward::<false>(trellis, delta, false);
        ws.posteriors::<false>(trellis, &mut part);
        for (tot, pt) in total.iter_mut().zip(&part) {
            for d in 0..4 {
                tot[d] = max_star::<false>(tot[d], pt[d]);
            }
        }
    }
    for row in total.iter_mut() {
        let z = row.iter().copied().fold(NEG, max_star::<false>);
        row.iter_mut().for_each(|x| *x -= z);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeStats {
    pub iterations: usize,
}

pub fn decode(channel_llrs: &[f64], config: &TurboConfig) -> Result<Vec<u8>> {
    decode_with_stats(channel_llrs, config).map(|(bits, _)| bits)
}

pub fn decode_with_stats(channel_llrs: &[f64], config: &TurboConfig) -> Result<(Vec<u8>, DecodeStats)> {
    match config.algorithm {
        MapAlgorithm::LogMap => turbo_decode::<false>(channel_llrs, config),
        MapAlgorithm::MaxLogMap => turbo_decode::<true>(channel_llrs, config),
    }
}

fn turbo_decode<const MAX_LOG: bool>(llrs: &[f64], config: &TurboConfig) -> Result<(Vec<u8>, DecodeStats)> {
    if llrs.len() != config.coded_bits() {
        return Err(Error::LengthMismatch {
            what: "turbo decoder LLRs",
            expected: config.coded_bits(),
            actual: llrs.len(),
        });
    }
    if llrs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("turbo decoder LLRs"));
    }
    let n = config.couples();
    let trellis = config.trellis();
    let il = config.interleaver();

    let sys: Vec<(f64, f64)> = llrs[..2 * n].chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let sys2 = il.interleave_pairs(&sys);
    let parity = depuncture(&llrs[2 * n..], config.puncture_pattern(), n)?;

    let mut la1 = vec![[0.0; 4]; n];
    let mut la2 = vec![[0.0; 4]; n];
    let mut le1 = vec![[0.0; 4]; n];
    let mut le2 = vec![[0.0; 4]; n];
    let mut ws = Workspace::new(n);
    let mut b1 = None;
    let mut b2 = None;
    let mut decisions = vec![0usize; n];
    let mut previous: Option<Vec<usize>> = None;
    let mut stats = DecodeStats::default();

    for _ in 0..config.iterations {
        stats.iterations += 1;
        siso_circular::<MAX_LOG>(
            trellis,
            &mut ws,
            &ComponentInput {
                sys: &sys,
                p: &parity.p1,
                q: &parity.q1,
                apriori: &la1,
            },
            &mut b1,
            &mut le1,
        );
        il.interleave_metrics(&le1, &mut la2);
        siso_circular::<MAX_LOG>(
            trellis,
            &mut ws,
            &ComponentInput {
                sys: &sys2,
                p: &parity.p2,
                q: &parity.q2,
                apriori: &la2,
            },
            &mut b2,
            &mut le2,
        );
        il.deinterleave_metrics(&le2, &mut la1);

        for (t, dec) in decisions.iter_mut().enumerate() {
            let (l1, l2) = sys[t];
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for d in 0..NUM_SYMBOLS {
                let (u1, u2) = symbol_bits(d);
                let v = le1[t][d] + la1[t][d] + u1 as f64 * l1 + u2 as f64 * l2;
                if v > best_val {
                    best_val = v;
                    best = d;
                }
            }
            *dec = best;
        }
        if config.early_stop {
            if previous.as_deref() == Some(&decisions[..]) {
                break;
            }
            previous = Some(decisions.clone());
        }
    }

    let mut bits = Vec::with_capacity(2 * n);
    for &d in &decisions {
        let (u1, u2) = symbol_bits(d);
        bits.push(u1);
        bits.push(u2);
    }
    Ok((bits, stats))
}
