//! End-to-end Monte-Carlo link simulation and SNR/band sweeps.
//!
//! One frame is a preamble of pilot OFDM symbols followed by data symbols
//! holding a whole number of turbo codewords (filler bits pad the last
//! symbol when the sizes do not divide). The channel is quasi-static: it is
//! evaluated once per band on the subcarrier grid and held for the sweep.

mod config;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cable_channel::{synthesize_at, ChannelRealization};
use crate::error::{Error, Result};
use crate::mimo_rx::{
    estimate_channel, estimate_noise_var, pilot_matrix, qpsk_llrs, CMatrix3, CVector3, MmseFilter,
};
use crate::ofdm::{qpsk_map, spatial_demux, spatial_mux, OfdmModem, SymbolGrid, NUM_STREAMS};
use crate::turbo::{decode, encode};

pub use config::{
    parse_bands, parse_snr_list, Band, ChannelModel, CodingMode, Estimation, SimConfig,
};

pub const CSV_HEADER: &str = "band,snr_db,coded,bits,errors,ber,ebn0_db";

/// Uncoded frames carry this many data OFDM symbols when the codeword
/// layout does not fix it.
const MAX_CODEWORDS_PER_FRAME: usize = 64;

/// One row of the BER table.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub band: String,
    pub snr_db: f64,
    pub coded: bool,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// `snr_db - 10 log10(2 R)` for QPSK at code rate `R` (1 when uncoded).
    pub ebn0_db: f64,
}

impl BerRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.4}",
            self.band,
            self.snr_db,
            u8::from(self.coded),
            self.bits,
            self.errors,
            self.ber,
            self.ebn0_db
        )
    }
}

/// A record plus the per-frame error counts it was aggregated from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub record: BerRecord,
    pub frame_errors: Vec<u64>,
    pub frame_bits: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct FrameOutcome {
    bits: u64,
    errors: u64,
}

/// How codewords are packed into OFDM symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub codewords: usize,
    pub data_symbols: usize,
    pub filler_bits: usize,
}

impl FrameLayout {
    /// Smallest codeword count that fills whole OFDM symbols exactly, or
    /// failing that the fewest codewords covering one symbol, padded.
    pub fn new(coded_bits: usize, bits_per_symbol: usize) -> Self {
        let exact = (1..=MAX_CODEWORDS_PER_FRAME).find(|n| (n * coded_bits) % bits_per_symbol == 0);
        let codewords = exact.unwrap_or_else(|| bits_per_symbol.div_ceil(coded_bits).max(1));
        let total = codewords * coded_bits;
        let data_symbols = total.div_ceil(bits_per_symbol);
        FrameLayout {
            codewords,
            data_symbols,
            filler_bits: data_symbols * bits_per_symbol - total,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream per (seed, band, coding, SNR, frame).
fn frame_seed(seed: u64, band: &Band, coded: bool, snr_db: f64, frame: u64) -> u64 {
    [
        band.f_low.to_bits(),
        band.f_high.to_bits(),
        u64::from(coded),
        snr_db.to_bits(),
        frame,
    ]
    .iter()
    .fold(splitmix(seed), |h, &v| splitmix(h ^ v))
}

/// Everything about a (config, band) pair that does not change with SNR.
pub struct Link<'a> {
    config: &'a SimConfig,
    band: Band,
    modem: OfdmModem,
    channel: ChannelRealization,
    /// `y = H x` matrices per subcarrier.
    h_rx: Vec<CMatrix3>,
    rx_power: f64,
    preamble: SymbolGrid,
    layout: FrameLayout,
}

impl<'a> Link<'a> {
    pub fn new(config: &'a SimConfig, band: Band) -> Result<Self> {
        config.validate()?;
        let ofdm = &config.ofdm;
        let modem = OfdmModem::new(ofdm)?;
        let freqs = ofdm.subcarrier_freqs(band.f_low);
        let occupied = ofdm.occupied_band(band.f_low);
        let channel = match config.channel {
            ChannelModel::Cable => synthesize_at(&config.cable, &config.profile, occupied, &freqs)?,
            ChannelModel::Identity => ChannelRealization::identity(occupied, freqs),
        };
        let h_rx: Vec<CMatrix3> = (0..channel.len()).map(|k| channel.rx_matrix(k)).collect();
        let rx_power = channel.mean_rx_power();
        if !(rx_power.is_finite() && rx_power > 0.0) {
            return Err(Error::NonFinite("received signal power"));
        }
        let p = pilot_matrix();
        let n = ofdm.n_subcarriers;
        let preamble = SymbolGrid {
            streams: (0..NUM_STREAMS)
                .map(|i| {
                    (0..config.preamble_symbols)
                        .map(|m| vec![p[(i, m % 3)]; n])
                        .collect()
                })
                .collect(),
        };
        let layout = FrameLayout::new(config.turbo.coded_bits(), ofdm.bits_per_symbol());
        Ok(Link {
            config,
            band,
            modem,
            channel,
            h_rx,
            rx_power,
            preamble,
            layout,
        })
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    /// Average received power per phase for unit-power inputs.
    pub fn rx_power(&self) -> f64 {
        self.rx_power
    }

    /// Information bits per second over a whole frame, counting preamble,
    /// cyclic prefix, code rate and filler.
    pub fn net_rate(&self, coded: bool) -> f64 {
        let ofdm = &self.config.ofdm;
        let info = if coded {
            self.layout.codewords * self.config.turbo.info_bits()
        } else {
            self.layout.data_symbols * ofdm.bits_per_symbol()
        };
        let symbols = self.config.preamble_symbols + self.layout.data_symbols;
        let duration = (symbols * ofdm.samples_per_symbol()) as f64 / ofdm.sample_rate();
        info as f64 / duration
    }

    /// Noise power `sigma^2` that gives the requested average receive SNR.
    pub fn noise_power(&self, snr_db: f64) -> Result<f64> {
        let s2 = self.rx_power / 10f64.powf(snr_db / 10.0);
        if !(s2.is_finite() && s2 > 0.0) {
            return Err(Error::NonFinite("noise power"));
        }
        Ok(s2)
    }

    /// Runs frames in fixed batches until the stopping rule holds: at least
    /// `max_bits`, or at least `min_bits` together with `target_errors`.
    pub fn run_point(&self, snr_db: f64, coded: bool) -> Result<PointReport> {
        let cfg = self.config;
        let sigma2 = self.noise_power(snr_db)?;
        let mut frame_errors = Vec::new();
        let mut frame_bits = Vec::new();
        let (mut bits, mut errors) = (0u64, 0u64);
        let mut next = 0u64;
        loop {
            let batch = next..next + cfg.frames_per_batch as u64;
            next = batch.end;
            let outcomes = batch
                .into_par_iter()
                .map(|f| {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(frame_seed(cfg.seed, &self.band, coded, snr_db, f));
                    self.simulate_frame(&mut rng, sigma2, coded)
                })
                .collect::<Result<Vec<_>>>()?;
            for o in outcomes {
                bits += o.bits;
                errors += o.errors;
                frame_bits.push(o.bits);
                frame_errors.push(o.errors);
            }
            if bits >= cfg.max_bits || (bits >= cfg.min_bits && errors >= cfg.target_errors) {
                break;
            }
        }
        let rate = if coded { cfg.turbo.rate().as_f64() } else { 1.0 };
        Ok(PointReport {
            record: BerRecord {
                band: self.band.label(),
                snr_db,
                coded,
                bits,
                errors,
                ber: errors as f64 / bits as f64,
                ebn0_db: snr_db - 10.0 * (2.0 * rate).log10(),
            },
            frame_errors,
            frame_bits,
        })
    }

    fn simulate_frame(&self, rng: &mut ChaCha8Rng, sigma2: f64, coded: bool) -> Result<FrameOutcome> {
        let cfg = self.config;
        let turbo = &cfg.turbo;
        let bps = cfg.ofdm.bits_per_symbol();
        let n_data = self.layout.data_symbols;

        // payload
        let (info, payload_len) = if coded {
            let k = turbo.info_bits() * self.layout.codewords;
            ((0..k).map(|_| rng.random_range(0..2u8)).collect::<Vec<u8>>(), self.layout.codewords * turbo.coded_bits())
        } else {
            let k = n_data * bps;
            ((0..k).map(|_| rng.random_range(0..2u8)).collect::<Vec<u8>>(), k)
        };
        let mut tx_bits = if coded {
            let mut v = Vec::with_capacity(n_data * bps);
            for cw in info.chunks_exact(turbo.info_bits()) {
                v.extend(encode(cw, turbo)?.to_bits());
            }
            v
        } else {
            info.clone()
        };
        tx_bits.extend((payload_len..n_data * bps).map(|_| rng.random_range(0..2u8)));

        // TX and channel on the subcarrier grid
        let data = spatial_mux(&qpsk_map(&tx_bits)?, cfg.ofdm.n_subcarriers)?;
        let mut tx = self.preamble.clone();
        for (stream, rows) in tx.streams.iter_mut().zip(data.streams) {
            stream.extend(rows);
        }
        let n_sym = tx.n_symbols();
        let n = cfg.ofdm.n_subcarriers;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = vec![vec![vec![zero; n]; n_sym]; NUM_STREAMS];
        for sym in 0..n_sym {
            for k in 0..n {
                let x = CVector3::from_fn(|i, _| tx.streams[i][sym][k]);
                let r = self.h_rx[k] * x;
                for j in 0..NUM_STREAMS {
                    y[j][sym][k] = r[j];
                }
            }
        }

        // time domain with impulsive noise, then back
        let noise = cfg.noise.with_power(sigma2);
        let mut buf = vec![zero; cfg.ofdm.samples_per_symbol()];
        let mut rx = SymbolGrid {
            streams: Vec::with_capacity(NUM_STREAMS),
        };
        for rows in &y {
            let mut out = Vec::with_capacity(n_sym);
            for row in rows {
                let mut t = self.modem.modulate(row)?;
                noise.fill(rng, &mut buf, None);
                t.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                out.push(self.modem.demodulate(&t)?);
            }
            rx.streams.push(out);
        }
        let n_pre = cfg.preamble_symbols;
        let rx_pre = SymbolGrid {
            streams: rx.streams.iter().map(|s| s[..n_pre].to_vec()).collect(),
        };

        // channel and noise estimates
        let (h_est, noise_var) = match cfg.estimation {
            Estimation::Perfect => (self.h_rx.clone(), sigma2),
            Estimation::LeastSquares => {
                let mut est = estimate_channel(&rx_pre, &self.preamble, sigma2)?;
                if cfg.estimate_noise {
                    if let Some(v) = estimate_noise_var(&rx_pre, &self.preamble, &est) {
                        est.noise_var = v.max(f64::MIN_POSITIVE);
                    }
                }
                (est.h, est.noise_var)
            }
        };

        // MMSE per subcarrier, shared across the data symbols
        let mut s_hat = SymbolGrid {
            streams: vec![vec![vec![zero; n]; n_data]; NUM_STREAMS],
        };
        let mut var = s_hat.clone();
        for k in 0..n {
            let filter = MmseFilter::new(&h_est[k], noise_var)?;
            for d in 0..n_data {
                let yv = CVector3::from_fn(|j, _| rx.streams[j][n_pre + d][k]);
                let det = filter.apply(&yv);
                for i in 0..NUM_STREAMS {
                    s_hat.streams[i][d][k] = det.s_hat[i];
                    var.streams[i][d][k] = Complex64::new(det.res_var[i], 0.0);
                }
            }
        }
        let s_serial = spatial_demux(&s_hat)?;
        let v_serial = spatial_demux(&var)?;
        let mut llrs = Vec::with_capacity(2 * s_serial.len());
        for (s, v) in s_serial.iter().zip(&v_serial) {
            llrs.extend_from_slice(&qpsk_llrs(*s, v.re));
        }

        let decided: Vec<u8> = if coded {
            let mut out = Vec::with_capacity(info.len());
            for cw in llrs[..payload_len].chunks_exact(turbo.coded_bits()) {
                out.extend(decode(cw, turbo)?);
            }
            out
        } else {
            llrs[..payload_len].iter().map(|&l| u8::from(l > 0.0)).collect()
        };
        let errors = decided.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        Ok(FrameOutcome {
            bits: info.len() as u64,
            errors,
        })
    }
}

/// Simulates one SNR point on one band.
pub fn run_point(config: &SimConfig, band: Band, snr_db: f64, coded: bool) -> Result<BerRecord> {
    Ok(Link::new(config, band)?.run_point(snr_db, coded)?.record)
}

/// One record per (band, coding, SNR), bands outermost, coded before
/// uncoded, SNR ascending in the configured order.
pub fn sweep(config: &SimConfig) -> Result<Vec<BerRecord>> {
    let mut out = Vec::new();
    for &band in &config.bands {
        let link = Link::new(config, band)?;
        for &coded in config.coding.flags() {
            for &snr in &config.snr_points {
                out.push(link.run_point(snr, coded)?.record);
            }
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[BerRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_csv_file(records: &[BerRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Adjacent points of a (band, coding) series where the BER rises with SNR
/// by more than three standard errors. Points with fewer than `min_errors`
/// errors are skipped.
pub fn monotonicity_violations(records: &[BerRecord], min_errors: u64) -> Vec<(BerRecord, BerRecord)> {
    let mut out = Vec::new();
    let mut series: Vec<&BerRecord> = Vec::new();
    let flush = |series: &mut Vec<&BerRecord>, out: &mut Vec<(BerRecord, BerRecord)>| {
        series.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        for w in series.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if lo.errors < min_errors || hi.errors < min_errors {
                continue;
            }
            let se = |r: &BerRecord| (r.ber * (1.0 - r.ber) / r.bits as f64).sqrt();
            if hi.ber - lo.ber > 3.0 * (se(lo).powi(2) + se(hi).powi(2)).sqrt() {
                out.push((lo.clone(), hi.clone()));
            }
        }
        series.clear();
    };
    for r in records {
        if let Some(last) = series.last() {
            if last.band != r.band || last.coded != r.coded {
                flush(&mut series, &mut out);
            }
        }
        series.push(r);
    }
    flush(&mut series, &mut out);
    out
}
