//! QPSK mapping, three-stream spatial multiplexing and CP-OFDM.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Transmit and receive phases.
pub const NUM_STREAMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub subcarrier_spacing: f64,
    pub cp_len: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            n_subcarriers: 1024,
            subcarrier_spacing: 2000.0,
            cp_len: 128,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 1 {
            return Err(Error::param("n_subcarriers", "must be >= 1"));
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing > 0.0) {
            return Err(Error::param("subcarrier_spacing", "must be finite and > 0"));
        }
        if self.cp_len > self.n_subcarriers {
            return Err(Error::param("cp_len", "must not exceed the FFT size"));
        }
        Ok(())
    }

    /// Complex baseband sample rate, `N * spacing`.
    pub fn sample_rate(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing
    }

    /// Useful symbol duration `1 / spacing`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// Coded bits carried by one OFDM symbol across all streams.
    pub fn bits_per_symbol(&self) -> usize {
        2 * NUM_STREAMS * self.n_subcarriers
    }

    /// Subcarrier `k` sits at `f_low + k * spacing`.
    pub fn subcarrier_freqs(&self, f_low: f64) -> Vec<f64> {
        (0..self.n_subcarriers)
            .map(|k| f_low + k as f64 * self.subcarrier_spacing)
            .collect()
    }

    /// Occupied band `[f_low, f_low + N * spacing)`.
    pub fn occupied_band(&self, f_low: f64) -> (f64, f64) {
        (f_low, f_low + self.n_subcarriers as f64 * self.subcarrier_spacing)
    }
}

/// Gray QPSK with unit energy: `(b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::param("bits", format!("odd bit count {}", bits.len())));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|b| qpsk_point(b[0], b[1]))
        .collect())
}

#[inline]
pub fn qpsk_point(b0: u8, b1: u8) -> Complex64 {
    let level = |b: u8| if b == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(level(b0), level(b1))
}

/// Sign decisions; a zero component decides for bit 0.
pub fn qpsk_hard_demap(symbols: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * symbols.len());
    for s in symbols {
        out.push((s.re < 0.0) as u8);
        out.push((s.im < 0.0) as u8);
    }
    out
}

/// Symbols per stream, indexed `[stream][ofdm_symbol][subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub streams: Vec<Vec<Vec<Complex64>>>,
}

impl SymbolGrid {
    pub fn n_symbols(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    pub fn n_subcarriers(&self) -> usize {
        self.streams
            .first()
            .and_then(|s| s.first())
            .map_or(0, Vec::len)
    }
}

/// Round-robin split: serial symbol `m` goes to stream `m % 3` as that
/// stream's `m / 3`-th symbol, then each stream is cut into OFDM symbols of
/// `n_subcarriers` entries.
pub fn spatial_mux(symbols: &[Complex64], n_subcarriers: usize) -> Result<SymbolGrid> {
    let per_ofdm = NUM_STREAMS * n_subcarriers;
    if n_subcarriers == 0 || symbols.len() % per_ofdm != 0 {
        return Err(Error::LengthMismatch {
            what: "spatial mux input (multiple of 3 * n_subcarriers)",
            expected: symbols.len().div_ceil(per_ofdm.max(1)) * per_ofdm,
            actual: symbols.len(),
        });
    }
    let n_sym = symbols.len() / per_ofdm;
    let mut streams = vec![vec![vec![Complex64::new(0.0, 0.0); n_subcarriers]; n_sym]; NUM_STREAMS];
    for (m, &s) in symbols.iter().enumerate() {
        let idx = m / NUM_STREAMS;
        streams[m % NUM_STREAMS][idx / n_subcarriers][idx % n_subcarriers] = s;
    }
    Ok(SymbolGrid { streams })
}

pub fn spatial_demux(grid: &SymbolGrid) -> Result<Vec<Complex64>> {
    if grid.streams.len() != NUM_STREAMS {
        return Err(Error::LengthMismatch {
            what: "spatial demux streams",
            expected: NUM_STREAMS,
            actual: grid.streams.len(),
        });
    }
    let n_sym = grid.n_symbols();
    let n_sc = grid.n_subcarriers();
    for stream in &grid.streams {
        if stream.len() != n_sym || stream.iter().any(|row| row.len() != n_sc) {
            return Err(Error::param("grid", "streams have inconsistent dimensions"));
        }
    }
    let total = NUM_STREAMS * n_sym * n_sc;
    let mut out = Vec::with_capacity(total);
    for m in 0..total {
        let idx = m / NUM_STREAMS;
        out.push(grid.streams[m % NUM_STREAMS][idx / n_sc][idx % n_sc]);
    }
    Ok(out)
}

/// Orthonormal IFFT/FFT pair with cyclic prefix handling.
#[derive(Clone)]
pub struct OfdmModem {
    n: usize,
    cp_len: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("n", &self.n)
            .field("cp_len", &self.cp_len)
            .finish()
    }
}

impl OfdmModem {
    pub fn new(config: &OfdmConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        let n = config.n_subcarriers;
        Ok(OfdmModem {
            n,
            cp_len: config.cp_len,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn fft_len(&self) -> usize {
        self.n
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// IFFT of one row of subcarrier symbols, prefixed by its last `cp_len`
    /// samples.
    pub fn modulate(&self, row: &[Complex64]) -> Result<Vec<Complex64>> {
        if row.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "OFDM subcarrier row",
                expected: self.n,
                actual: row.len(),
            });
        }
        let mut body = row.to_vec();
        self.inverse.process(&mut body);
        body.iter_mut().for_each(|x| *x *= self.scale);
        let mut out = Vec::with_capacity(self.n + self.cp_len);
        out.extend_from_slice(&body[self.n - self.cp_len..]);
        out.extend_from_slice(&body);
        Ok(out)
    }

    /// Drops the cyclic prefix and returns the subcarrier values.
    pub fn demodulate(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.n + self.cp_len {
            return Err(Error::LengthMismatch {
                what: "OFDM time-domain symbol",
                expected: self.n + self.cp_len,
                actual: samples.len(),
            });
        }
        let mut body = samples[self.cp_len..].to_vec();
        self.forward.process(&mut body);
        body.iter_mut().for_each(|x| *x *= self.scale);
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_map_points() {
        let s = qpsk_map(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex64::new(r, r));
        assert_eq!(s[1], Complex64::new(r, -r));
        assert_eq!(s[2], Complex64::new(-r, r));
        assert_eq!(s[3], Complex64::new(-r, -r));
        for p in &s {
            assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert!(qpsk_map(&[0, 1, 1]).is_err());
    }

    #[test]
    fn mux_shape_and_stream_assignment() {
        let syms: Vec<Complex64> = (0..3072).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let grid = spatial_mux(&syms, 1024).unwrap();
        assert_eq!(grid.streams.len(), 3);
        assert_eq!(grid.n_symbols(), 1);
        assert_eq!(grid.n_subcarriers(), 1024);
        for k in 0..3 {
            for (pos, v) in grid.streams[k][0].iter().enumerate() {
                assert_eq!(v.re as usize % 3, k);
                assert_eq!(v.re as usize / 3, pos);
            }
        }
        assert_eq!(spatial_demux(&grid).unwrap(), syms);
        assert!(spatial_mux(&syms[..3071], 1024).is_err());
    }

    #[test]
    fn dc_tone_is_flat() {
        let cfg = OfdmConfig {
            n_subcarriers: 64,
            cp_len: 8,
            ..OfdmConfig::default()
        };
        let modem = OfdmModem::new(&cfg).unwrap();
        let mut row = vec![Complex64::new(0.0, 0.0); 64];
        let zeros = modem.modulate(&row).unwrap();
        assert!(zeros.iter().all(|z| z.norm() == 0.0));
        row[0] = Complex64::new(1.0, 0.0);
        let t = modem.modulate(&row).unwrap();
        assert_eq!(t.len(), 72);
        for z in t {
            assert!((z - Complex64::new(0.125, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn wrong_lengths_rejected() {
        let modem = OfdmModem::new(&OfdmConfig::default()).unwrap();
        assert!(modem.modulate(&[Complex64::new(0.0, 0.0); 10]).is_err());
        assert!(modem.demodulate(&[Complex64::new(0.0, 0.0); 1024]).is_err());
    }

    #[test]
    fn nominal_timing() {
        let cfg = OfdmConfig::default();
        assert_eq!(cfg.sample_rate(), 2.048e6);
        assert!((cfg.symbol_duration() - 500e-6).abs() < 1e-15);
    }
}
