//! Batch front end: BER sweeps, channel dumps, codec and noise utilities.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvplc::cable_channel::synthesize_at;
use mvplc::link_sim::{
    monotonicity_violations, parse_bands, parse_snr_list, sweep, write_csv_file, Band, CodingMode,
    Link, SimConfig,
};
use mvplc::noise::NoiseParams;
use mvplc::turbo::{decode, encode, CodeRate, Interleaver, MapAlgorithm, PbSize, TurboConfig};
use mvplc::Error;

/// Magnitude of the LLRs fed to the decoder for hard input bits.
const HARD_LLR: f64 = 4.0;

#[derive(Parser)]
#[command(name = "mvplc", version, about = "Turbo-coded 3x3 MIMO-OFDM link simulator for MV power cables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER sweep and write the CSV table.
    Sweep(SweepArgs),
    /// Write the 3x3 channel transfer matrix on the subcarrier grid as CSV.
    ChannelDump(ChannelDumpArgs),
    /// Turbo encode or decode hex-encoded bit streams.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Draw Class-A noise samples as CSV.
    NoiseSample(NoiseArgs),
    /// Print the built-in interleaver table for a PB size.
    Interleaver(InterleaverArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the bands, e.g. `3..5MHz` (repeatable or comma separated).
    #[arg(long)]
    band: Vec<String>,
    /// Override the SNR points, as `start:step:stop` or a comma list (dB).
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Simulation config file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Restrict to `coded`, `uncoded` or `both`.
    #[arg(long)]
    coded: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ChannelDumpArgs {
    /// Config file for cable, profile and OFDM settings (defaults otherwise).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct CodecArgs {
    /// PB size in bytes: 16, 72, 136, 264 or 520.
    #[arg(long, default_value_t = 264)]
    pb: usize,
    /// Code rate: 1/2, 16/18 or 1/3.
    #[arg(long, default_value = "1/2")]
    rate: String,
    /// Hex input file (stdin if omitted).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Hex output file (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CodecCommand {
    /// Info bytes in, coded bits out (MSB first, zero padded to a byte).
    Encode(CodecArgs),
    /// Hard coded bits in, decoded info bytes out.
    Decode {
        #[command(flatten)]
        codec: CodecArgs,
        /// Decoder iterations.
        #[arg(long, default_value_t = mvplc::turbo::DEFAULT_ITERATIONS)]
        iterations: usize,
        /// `log-map` or `max-log-map`.
        #[arg(long, default_value = "log-map")]
        algorithm: String,
    },
}

#[derive(Args)]
struct NoiseArgs {
    /// Number of complex samples.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Impulse index A.
    #[arg(long, default_value_t = 0.1)]
    impulse_index: f64,
    /// Gaussian-to-impulsive power ratio.
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    /// Total noise power.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InterleaverArgs {
    #[arg(long, default_value_t = 264)]
    pb: usize,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_overrides(cfg: &mut SimConfig, o: &Overrides) -> Result<(), Error> {
    let cfg_err = |field: &str, e: Error| Error::Config {
        field: field.to_string(),
        reason: e.to_string(),
    };
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if !o.band.is_empty() {
        let mut bands = Vec::new();
        for b in &o.band {
            bands.extend(parse_bands(b).map_err(|e| cfg_err("--band", e))?);
        }
        cfg.bands = bands;
    }
    if let Some(snr) = &o.snr {
        cfg.snr_points = parse_snr_list(snr).map_err(|e| cfg_err("--snr", e))?;
    }
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn slurp(path: Option<&Path>) -> Result<String, Error> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Io {
                path: "<stdin>".into(),
                source: e,
            })?;
            Ok(s)
        }
    }
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |k| (b >> k) & 1))
        .collect()
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b << (7 - k))))
        .collect()
}

fn read_hex(path: Option<&Path>) -> Result<Vec<u8>, Error> {
    let text: String = slurp(path)?.split_whitespace().collect();
    hex::decode(&text).map_err(|e| Error::Config {
        field: "input".into(),
        reason: format!("invalid hex: {e}"),
    })
}

fn turbo_config(args: &CodecArgs) -> Result<TurboConfig, Error> {
    let pb = PbSize::from_bytes(args.pb)?;
    let rate: CodeRate = args.rate.parse()?;
    TurboConfig::new(pb, rate)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Sweep(args) => {
            let mut cfg = SimConfig::from_file(&args.config)?;
            apply_overrides(&mut cfg, &args.overrides)?;
            if let Some(c) = &args.coded {
                cfg.coding = c.parse::<CodingMode>().map_err(|e| Error::Config {
                    field: "--coded".into(),
                    reason: e.to_string(),
                })?;
            }
            cfg.validate()?;
            for band in &cfg.bands {
                let link = Link::new(&cfg, *band)?;
                for &coded in cfg.coding.flags() {
                    eprintln!(
                        "{band}: net rate {:.3} Mbit/s ({})",
                        link.net_rate(coded) / 1e6,
                        if coded { "coded" } else { "uncoded" }
                    );
                }
            }
            let records = sweep(&cfg)?;
            write_csv_file(&records, &args.out)?;
            for (lo, hi) in monotonicity_violations(&records, cfg.target_errors) {
                eprintln!(
                    "warning: BER rises from {:.3e} at {} dB to {:.3e} at {} dB ({}, coded={})",
                    lo.ber, lo.snr_db, hi.ber, hi.snr_db, lo.band, lo.coded
                );
            }
        }
        Command::ChannelDump(args) => {
            let mut cfg = match &args.config {
                Some(p) => SimConfig::from_file(p)?,
                None => SimConfig::default(),
            };
            apply_overrides(&mut cfg, &args.overrides)?;
            let band: Band = cfg.bands[0];
            let freqs = cfg.ofdm.subcarrier_freqs(band.f_low);
            let ch = synthesize_at(&cfg.cable, &cfg.profile, cfg.ofdm.occupied_band(band.f_low), &freqs)?;
            let mut buf = Vec::new();
            ch.write_csv(&mut buf).expect("writing to memory");
            emit(args.out.as_deref(), &buf)?;
        }
        Command::Codec(CodecCommand::Encode(args)) => {
            let cfg = turbo_config(&args)?;
            let bytes = read_hex(args.input.as_deref())?;
            if bytes.len() * 8 != cfg.info_bits() {
                return Err(Error::LengthMismatch {
                    what: "encoder input bytes",
                    expected: cfg.info_bits() / 8,
                    actual: bytes.len(),
                });
            }
            let coded = encode(&bytes_to_bits(&bytes), &cfg)?.to_bits();
            emit(args.output.as_deref(), format!("{}\n", hex::encode(bits_to_bytes(&coded))).as_bytes())?;
        }
        Command::Codec(CodecCommand::Decode {
            codec,
            iterations,
            algorithm,
        }) => {
            let algorithm: MapAlgorithm = algorithm.parse()?;
            let cfg = turbo_config(&codec)?
                .with_iterations(iterations)?
                .with_algorithm(algorithm);
            let bytes = read_hex(codec.input.as_deref())?;
            let n = cfg.coded_bits();
            if bytes.len() != n.div_ceil(8) {
                return Err(Error::LengthMismatch {
                    what: "decoder input bytes",
                    expected: n.div_ceil(8),
                    actual: bytes.len(),
                });
            }
            let llrs: Vec<f64> = bytes_to_bits(&bytes)[..n]
                .iter()
                .map(|&b| if b == 1 { HARD_LLR } else { -HARD_LLR })
                .collect();
            let info = decode(&llrs, &cfg)?;
            emit(codec.output.as_deref(), format!("{}\n", hex::encode(bits_to_bytes(&info))).as_bytes())?;
        }
        Command::NoiseSample(args) => {
            let params = NoiseParams::new(args.impulse_index, args.gamma, args.sigma2)?;
            let frame = params.sample(args.count, args.seed);
            let mut out = String::from("re,im,k\n");
            for (z, k) in frame.samples.iter().zip(&frame.impulse_counts) {
                out.push_str(&format!("{:e},{:e},{}\n", z.re, z.im, k));
            }
            emit(args.out.as_deref(), out.as_bytes())?;
        }
        Command::Interleaver(args) => {
            let pb = PbSize::from_bytes(args.pb)?;
            emit(args.out.as_deref(), Interleaver::builtin(pb).to_text(pb).as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
