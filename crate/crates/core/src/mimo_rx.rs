//! Receiver side of the 3x3 link: preamble-based least-squares channel
//! estimation, unbiased MMSE detection and QPSK soft demapping.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ofdm::{qpsk_point, SymbolGrid, NUM_STREAMS};

pub type CMatrix3 = Matrix3<Complex64>;
pub type CVector3 = Vector3<Complex64>;

/// LLR clipping magnitude.
pub const LLR_CLIP: f64 = 30.0;

/// Lower bound on residual variances handed to the soft demapper.
const MIN_RES_VAR: f64 = 1e-12;

/// Unit-modulus DFT pilot matrix: entry `(i, m)` is what stream `i` sends on
/// preamble symbol `m`. Its rows are orthogonal, `P P^H = 3 I`.
pub fn pilot_matrix() -> CMatrix3 {
    CMatrix3::from_fn(|i, m| Complex64::from_polar(1.0, -2.0 * PI * (i * m) as f64 / 3.0))
}

/// Three preamble OFDM symbols carrying [`pilot_matrix`] on every subcarrier.
pub fn preamble_grid(n_subcarriers: usize) -> SymbolGrid {
    let p = pilot_matrix();
    SymbolGrid {
        streams: (0..NUM_STREAMS)
            .map(|i| (0..3).map(|m| vec![p[(i, m)]; n_subcarriers]).collect())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Per-subcarrier matrix mapping transmit to receive (`y = H x`).
    pub h: Vec<CMatrix3>,
    /// Noise power per receive phase.
    pub noise_var: f64,
}

fn check_preamble(grid: &SymbolGrid, what: &'static str) -> Result<(usize, usize)> {
    if grid.streams.len() != NUM_STREAMS {
        return Err(Error::LengthMismatch {
            what,
            expected: NUM_STREAMS,
            actual: grid.streams.len(),
        });
    }
    let m = grid.n_symbols();
    if m < 3 {
        return Err(Error::LengthMismatch {
            what: "preamble OFDM symbols (at least 3)",
            expected: 3,
            actual: m,
        });
    }
    Ok((m, grid.n_subcarriers()))
}

/// Least-squares estimate `H = Y P^H (P P^H)^-1` per subcarrier, which is
/// `Y P^-1` for a square pilot matrix.
pub fn estimate_channel(rx: &SymbolGrid, tx: &SymbolGrid, noise_var: f64) -> Result<ChannelEstimate> {
    let (m, n) = check_preamble(tx, "pilot streams")?;
    let (m_rx, n_rx) = check_preamble(rx, "received preamble streams")?;
    if m_rx != m || n_rx != n {
        return Err(Error::param("preamble", "received and pilot grids differ in shape"));
    }
    if !(noise_var.is_finite() && noise_var > 0.0) {
        return Err(Error::param("noise_var", "must be finite and > 0"));
    }
    let mut h = Vec::with_capacity(n);
    for k in 0..n {
        let mut yp = CMatrix3::zeros();
        let mut pp = CMatrix3::zeros();
        for sym in 0..m {
            let y = CVector3::from_fn(|j, _| rx.streams[j][sym][k]);
            let p = CVector3::from_fn(|i, _| tx.streams[i][sym][k]);
            yp += y * p.adjoint();
            pp += p * p.adjoint();
        }
        let inv = pp
            .try_inverse()
            .ok_or(Error::Singular("pilot matrix is not invertible"))?;
        h.push(yp * inv);
    }
    Ok(ChannelEstimate { h, noise_var })
}

/// Residual-based noise power estimate. Needs more than three preamble
/// symbols, otherwise the LS fit is exact and `None` is returned.
pub fn estimate_noise_var(rx: &SymbolGrid, tx: &SymbolGrid, est: &ChannelEstimate) -> Option<f64> {
    let m = tx.n_symbols();
    if m <= 3 {
        return None;
    }
    let n = tx.n_subcarriers();
    let mut acc = 0.0;
    for k in 0..n {
        for sym in 0..m {
            let y = CVector3::from_fn(|j, _| rx.streams[j][sym][k]);
            let p = CVector3::from_fn(|i, _| tx.streams[i][sym][k]);
            acc += (y - est.h[k] * p).norm_squared();
        }
    }
    Some(acc / (NUM_STREAMS * n * (m - 3)) as f64)
}

/// Per-stream unbiased MMSE estimates and residual variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutput {
    pub s_hat: [Complex64; NUM_STREAMS],
    pub res_var: [f64; NUM_STREAMS],
}

/// `W = H^H (H H^H + sigma2 I)^-1`, with each output divided by its bias
/// `mu_k = (W H)_kk`. The residual variance is `(1 - mu_k) / mu_k`, the
/// inverse of the post-detection SINR.
pub fn mmse_detect(y: &CVector3, h: &CMatrix3, sigma2: f64) -> Result<DetectionOutput> {
    Ok(MmseFilter::new(h, sigma2)?.apply(y))
}

/// MMSE filter for one channel matrix, reusable across OFDM symbols.
#[derive(Debug, Clone, Copy)]
pub struct MmseFilter {
    w: CMatrix3,
    mu: [f64; NUM_STREAMS],
    res_var: [f64; NUM_STREAMS],
}

impl MmseFilter {
    pub fn new(h: &CMatrix3, sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::param("sigma2", format!("must be finite and > 0, got {sigma2}")));
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("channel matrix"));
        }
        let ha = h.adjoint();
        let gram = h * ha + CMatrix3::identity() * Complex64::new(sigma2, 0.0);
        let inv = gram
            .try_inverse()
            .ok_or(Error::Singular("H H^H + sigma2 I"))?;
        let w = ha * inv;
        let wh = w * h;
        let mut mu = [0.0; NUM_STREAMS];
        let mut res_var = [0.0; NUM_STREAMS];
        for k in 0..NUM_STREAMS {
            // (W H)_kk is real and in [0, 1) for sigma2 > 0
            let m = wh[(k, k)].re.clamp(f64::MIN_POSITIVE, 1.0);
            mu[k] = m;
            res_var[k] = ((1.0 - m) / m).max(MIN_RES_VAR);
        }
        Ok(MmseFilter { w, mu, res_var })
    }

    pub fn apply(&self, y: &CVector3) -> DetectionOutput {
        let s = self.w * y;
        let mut s_hat = [Complex64::new(0.0, 0.0); NUM_STREAMS];
        for k in 0..NUM_STREAMS {
            s_hat[k] = s[k] / self.mu[k];
        }
        DetectionOutput {
            s_hat,
            res_var: self.res_var,
        }
    }

    pub fn bias(&self) -> [f64; NUM_STREAMS] {
        self.mu
    }
}

/// Bit LLRs, positive favouring bit 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrFrame {
    pub llrs: Vec<f64>,
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// LLRs of the two Gray-QPSK bits of `s_hat` under the Gaussian likelihood
/// `exp(-|s_hat - s|^2 / var) / (pi var)`, by enumeration of all four points.
pub fn qpsk_llrs(s_hat: Complex64, var: f64) -> [f64; 2] {
    let var = var.max(MIN_RES_VAR);
    let mut metric = [[0.0; 2]; 2];
    for (b0, row) in metric.iter_mut().enumerate() {
        for (b1, m) in row.iter_mut().enumerate() {
            let s = qpsk_point(b0 as u8, b1 as u8);
            *m = -(s_hat - s).norm_sqr() / var;
        }
    }
    let l0 = log_sum_exp2(metric[1][0], metric[1][1]) - log_sum_exp2(metric[0][0], metric[0][1]);
    let l1 = log_sum_exp2(metric[0][1], metric[1][1]) - log_sum_exp2(metric[0][0], metric[1][0]);
    [l0.clamp(-LLR_CLIP, LLR_CLIP), l1.clamp(-LLR_CLIP, LLR_CLIP)]
}

/// LLRs for every stream of one detection, stream 0 first.
pub fn soft_demod(det: &DetectionOutput) -> LlrFrame {
    let mut llrs = Vec::with_capacity(2 * NUM_STREAMS);
    for k in 0..NUM_STREAMS {
        llrs.extend_from_slice(&qpsk_llrs(det.s_hat[k], det.res_var[k]));
    }
    LlrFrame { llrs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::qpsk_hard_demap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pilot_rows_are_orthogonal() {
        let p = pilot_matrix();
        let g = p * p.adjoint();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 3.0 } else { 0.0 };
                assert!((g[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!(p.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn identity_channel_noiseless_estimate() {
        let tx = preamble_grid(8);
        let est = estimate_channel(&tx, &tx, 1.0).unwrap();
        for h in &est.h {
            assert!((h - CMatrix3::identity()).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_pilots_rejected() {
        let mut tx = preamble_grid(4);
        for i in 0..3 {
            for m in 0..3 {
                tx.streams[i][m][2] = c(1.0, 0.0);
            }
        }
        assert!(matches!(
            estimate_channel(&tx, &tx, 1.0),
            Err(Error::Singular(_))
        ));
        let short = SymbolGrid {
            streams: vec![vec![vec![c(1.0, 0.0); 4]; 2]; 3],
        };
        assert!(estimate_channel(&short, &short, 1.0).is_err());
    }

    #[test]
    fn scalar_mmse_closed_form() {
        let y = CVector3::new(c(0.3, -0.2), c(1.0, 0.5), c(-0.7, 0.1));
        let det = mmse_detect(&y, &CMatrix3::identity(), 1.0).unwrap();
        let filt = MmseFilter::new(&CMatrix3::identity(), 1.0).unwrap();
        for k in 0..3 {
            assert!((filt.bias()[k] - 0.5).abs() < 1e-15);
            assert!((det.s_hat[k] - y[k]).norm() < 1e-15);
            assert!((det.res_var[k] - 1.0).abs() < 1e-15);
        }
        let det = mmse_detect(&y, &CMatrix3::identity(), 1e-12).unwrap();
        for k in 0..3 {
            assert!((det.s_hat[k] - y[k]).norm() < 1e-12);
            assert!(det.res_var[k] < 1e-11);
        }
        assert!(mmse_detect(&y, &CMatrix3::identity(), 0.0).is_err());
    }

    #[test]
    fn llr_closed_form_and_symmetry() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let l = qpsk_llrs(c(r, r), 0.1);
        let want = -2.0 * 2f64.sqrt() * r / 0.1;
        assert!((l[0] - want).abs() < 1e-12 && (l[1] - want).abs() < 1e-12);
        assert_eq!(qpsk_llrs(c(0.0, 0.0), 0.5), [0.0, 0.0]);
        let s = c(0.2, -0.05);
        let a = qpsk_llrs(s, 0.4);
        let b = qpsk_llrs(s, 0.8);
        assert!((a[0] / 2.0 - b[0]).abs() < 1e-12 && (a[1] / 2.0 - b[1]).abs() < 1e-12);
        let big = qpsk_llrs(c(1.0, -1.0), 1e-9);
        assert_eq!(big, [-LLR_CLIP, LLR_CLIP]);
    }

    #[test]
    fn llr_signs_reproduce_points() {
        for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let s = qpsk_point(bits[0], bits[1]);
            let l = qpsk_llrs(s, 0.3);
            let dec: Vec<u8> = l.iter().map(|&x| (x > 0.0) as u8).collect();
            assert_eq!(dec, bits.to_vec());
            assert_eq!(qpsk_hard_demap(&[s]), bits.to_vec());
        }
    }
}
