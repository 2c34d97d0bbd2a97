//! C ABI over the `mvplc` simulator.
//!
//! Every fallible function returns an [`MvplcStatus`] code. On failure the
//! message is kept per thread and can be copied out with
//! [`mvplc_last_error_message`]. Handles are opaque and must be released
//! with their matching `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mvplc::cable_channel::{build_rlgc, transfer_matrix, CableParams, MultipathProfile};
use mvplc::link_sim::{sweep, write_csv_file, Band, Link, SimConfig};
use mvplc::noise::NoiseParams;
use mvplc::turbo::{decode, encode, CodeRate, PbSize, TurboConfig};
use mvplc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvplcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    LengthMismatch = 5,
    Numeric = 6,
    Panic = 7,
}

/// Simulation configuration handle.
pub struct MvplcSimConfig(SimConfig);

/// Turbo codec handle.
pub struct MvplcTurboCodec(TurboConfig);

/// Cable constants, same fields and units as the Rust `CableParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MvplcCableParams {
    pub mu_c: f64,
    pub sigma_c: f64,
    pub spacing: f64,
    pub mu_0: f64,
    pub eps_0: f64,
    pub radius: f64,
    pub tan_delta: f64,
    pub coupling: f64,
    pub ground_resistance: f64,
}

impl From<MvplcCableParams> for CableParams {
    fn from(p: MvplcCableParams) -> Self {
        CableParams {
            mu_c: p.mu_c,
            sigma_c: p.sigma_c,
            spacing: p.spacing,
            mu_0: p.mu_0,
            eps_0: p.eps_0,
            radius: p.radius,
            tan_delta: p.tan_delta,
            coupling: p.coupling,
            ground_resistance: p.ground_resistance,
        }
    }
}

impl From<CableParams> for MvplcCableParams {
    fn from(p: CableParams) -> Self {
        MvplcCableParams {
            mu_c: p.mu_c,
            sigma_c: p.sigma_c,
            spacing: p.spacing,
            mu_0: p.mu_0,
            eps_0: p.eps_0,
            radius: p.radius,
            tan_delta: p.tan_delta,
            coupling: p.coupling,
            ground_resistance: p.ground_resistance,
        }
    }
}

/// One simulated BER point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MvplcBerRecord {
    pub f_low: f64,
    pub f_high: f64,
    pub snr_db: f64,
    pub coded: i32,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ebn0_db: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MvplcStatus {
    match e {
        Error::Config { .. } => MvplcStatus::Config,
        Error::Io { .. } => MvplcStatus::Io,
        Error::LengthMismatch { .. } => MvplcStatus::LengthMismatch,
        Error::Singular(_) | Error::NonFinite(_) => MvplcStatus::Numeric,
        _ => MvplcStatus::InvalidArgument,
    }
}

struct Failure(MvplcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MvplcStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MvplcStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MvplcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MvplcStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            MvplcStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit) and returns the full message length in
/// bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn mvplc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Measured MV cable constants with coupling 0.3 and zero ground resistance.
#[no_mangle]
pub unsafe extern "C" fn mvplc_cable_params_default(out: *mut MvplcCableParams) -> MvplcStatus {
    guard(|| {
        *out_ref(out, "out")? = CableParams::mv_underground().into();
        Ok(())
    })
}

/// Writes the row-major 3x3 R, L, C and G matrices at frequency `f` Hz.
/// Each output must hold 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn mvplc_rlgc(
    params: *const MvplcCableParams,
    f: f64,
    r: *mut f64,
    l: *mut f64,
    c: *mut f64,
    g: *mut f64,
) -> MvplcStatus {
    guard(|| {
        let p: CableParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        let m = build_rlgc(&p, f)?;
        for (dst, src, what) in [(r, &m.r, "r"), (l, &m.l, "l"), (c, &m.c, "c"), (g, &m.g, "g")] {
            let out = out_slice(dst, 9, what)?;
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] = src[(i, j)];
                }
            }
        }
        Ok(())
    })
}

/// Evaluates `H_ij(f)` for a multipath profile given as `n_paths` gains and
/// lengths (delays follow from the propagation speed). `re`/`im` receive the
/// row-major matrix, row `i` = transmit phase.
#[no_mangle]
pub unsafe extern "C" fn mvplc_transfer_matrix(
    params: *const MvplcCableParams,
    f: f64,
    gains: *const f64,
    lengths: *const f64,
    n_paths: usize,
    re: *mut f64,
    im: *mut f64,
) -> MvplcStatus {
    guard(|| {
        let p: CableParams = (*params.as_ref().ok_or_else(|| null("params"))?).into();
        let gains = in_slice(gains, n_paths, "gains")?;
        let lengths = in_slice(lengths, n_paths, "lengths")?;
        let profile = MultipathProfile::from_lengths(&p, gains, lengths)?;
        let h = transfer_matrix(&p, &profile, f)?;
        let re = out_slice(re, 9, "re")?;
        let im = out_slice(im, 9, "im")?;
        for i in 0..3 {
            for j in 0..3 {
                re[3 * i + j] = h[(i, j)].re;
                im[3 * i + j] = h[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Draws `count` complex Class-A samples into `re`/`im`.
#[no_mangle]
pub unsafe extern "C" fn mvplc_noise_sample(
    impulse_index: f64,
    gamma: f64,
    sigma2: f64,
    seed: u64,
    count: usize,
    re: *mut f64,
    im: *mut f64,
) -> MvplcStatus {
    guard(|| {
        let params = NoiseParams::new(impulse_index, gamma, sigma2)?;
        let re = out_slice(re, count, "re")?;
        let im = out_slice(im, count, "im")?;
        let frame = params.sample(count, seed);
        for (k, z) in frame.samples.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

unsafe fn store_config(out: *mut *mut MvplcSimConfig, cfg: SimConfig) -> Result<(), Failure> {
    *out_ref(out, "out")? = Box::into_raw(Box::new(MvplcSimConfig(cfg)));
    Ok(())
}

/// Reference simulation setup.
#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_default(out: *mut *mut MvplcSimConfig) -> MvplcStatus {
    guard(|| store_config(out, SimConfig::default()))
}

/// Parses a config file.
#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_from_file(
    path: *const c_char,
    out: *mut *mut MvplcSimConfig,
) -> MvplcStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        store_config(out, SimConfig::from_file(path)?)
    })
}

/// Parses config text.
#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_parse(
    text: *const c_char,
    out: *mut *mut MvplcSimConfig,
) -> MvplcStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        store_config(out, SimConfig::parse(text)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_set_seed(cfg: *mut MvplcSimConfig, seed: u64) -> MvplcStatus {
    guard(|| {
        out_ref(cfg, "cfg")?.0.seed = seed;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_set_bits(
    cfg: *mut MvplcSimConfig,
    min_bits: u64,
    max_bits: u64,
) -> MvplcStatus {
    guard(|| {
        let c = &mut out_ref(cfg, "cfg")?.0;
        if max_bits == 0 || max_bits < min_bits {
            return Err(invalid("need 0 < max_bits and min_bits <= max_bits"));
        }
        c.min_bits = min_bits;
        c.max_bits = max_bits;
        Ok(())
    })
}

/// Releases a config handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mvplc_sim_config_free(cfg: *mut MvplcSimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Simulates one SNR point on the band `[f_low, f_high]` Hz.
#[no_mangle]
pub unsafe extern "C" fn mvplc_run_point(
    cfg: *const MvplcSimConfig,
    f_low: f64,
    f_high: f64,
    snr_db: f64,
    coded: i32,
    out: *mut MvplcBerRecord,
) -> MvplcStatus {
    guard(|| {
        let c = &cfg.as_ref().ok_or_else(|| null("cfg"))?.0;
        let out = out_ref(out, "out")?;
        let band = Band::new(f_low, f_high)?;
        let r = Link::new(c, band)?.run_point(snr_db, coded != 0)?.record;
        *out = MvplcBerRecord {
            f_low,
            f_high,
            snr_db: r.snr_db,
            coded: i32::from(r.coded),
            bits: r.bits,
            errors: r.errors,
            ber: r.ber,
            ebn0_db: r.ebn0_db,
        };
        Ok(())
    })
}

/// Runs the configured sweep and writes the CSV table to `path`.
#[no_mangle]
pub unsafe extern "C" fn mvplc_sweep_to_csv(cfg: *const MvplcSimConfig, path: *const c_char) -> MvplcStatus {
    guard(|| {
        let c = &cfg.as_ref().ok_or_else(|| null("cfg"))?.0;
        let path = c_str(path, "path")?;
        write_csv_file(&sweep(c)?, path)?;
        Ok(())
    })
}

fn rate_from(num: u32, den: u32) -> Result<CodeRate, Failure> {
    Ok(format!("{num}/{den}").parse::<CodeRate>()?)
}

/// Creates a codec for a PB size in bytes and a rate given as a fraction
/// (1/2, 16/18 or 1/3).
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_new(
    pb_bytes: usize,
    rate_num: u32,
    rate_den: u32,
    out: *mut *mut MvplcTurboCodec,
) -> MvplcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = TurboConfig::new(PbSize::from_bytes(pb_bytes)?, rate_from(rate_num, rate_den)?)?;
        *out = Box::into_raw(Box::new(MvplcTurboCodec(cfg)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_set_iterations(codec: *mut MvplcTurboCodec, iterations: usize) -> MvplcStatus {
    guard(|| {
        let c = out_ref(codec, "codec")?;
        c.0 = c.0.clone().with_iterations(iterations)?;
        Ok(())
    })
}

/// Information bits per block, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_info_bits(codec: *const MvplcTurboCodec) -> usize {
    codec.as_ref().map_or(0, |c| c.0.info_bits())
}

/// Coded bits per block, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_coded_bits(codec: *const MvplcTurboCodec) -> usize {
    codec.as_ref().map_or(0, |c| c.0.coded_bits())
}

/// Encodes `n_info` bits (one 0/1 value per byte) into `out`, which must
/// hold exactly the coded length.
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_encode(
    codec: *const MvplcTurboCodec,
    info: *const u8,
    n_info: usize,
    out: *mut u8,
    n_out: usize,
) -> MvplcStatus {
    guard(|| {
        let c = &codec.as_ref().ok_or_else(|| null("codec"))?.0;
        let info = in_slice(info, n_info, "info")?;
        if n_out != c.coded_bits() {
            return Err(Error::LengthMismatch {
                what: "encoder output buffer",
                expected: c.coded_bits(),
                actual: n_out,
            }
            .into());
        }
        let out = out_slice(out, n_out, "out")?;
        out.copy_from_slice(&encode(info, c)?.to_bits());
        Ok(())
    })
}

/// Decodes channel LLRs (`ln P(1)/P(0)`, transmission order) into
/// `n_out` = info-length hard bits.
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_decode(
    codec: *const MvplcTurboCodec,
    llrs: *const f64,
    n_llrs: usize,
    out: *mut u8,
    n_out: usize,
) -> MvplcStatus {
    guard(|| {
        let c = &codec.as_ref().ok_or_else(|| null("codec"))?.0;
        let llrs = in_slice(llrs, n_llrs, "llrs")?;
        if n_out != c.info_bits() {
            return Err(Error::LengthMismatch {
                what: "decoder output buffer",
                expected: c.info_bits(),
                actual: n_out,
            }
            .into());
        }
        let out = out_slice(out, n_out, "out")?;
        out.copy_from_slice(&decode(llrs, c)?);
        Ok(())
    })
}

/// Releases a codec handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mvplc_turbo_free(codec: *mut MvplcTurboCodec) {
    if !codec.is_null() {
        drop(Box::from_raw(codec));
    }
}
