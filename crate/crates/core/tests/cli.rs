use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvplc"))
}

fn quick_cfg() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.cfg")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn mvplc")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_subcommands_and_flags() {
    let o = run(bin().arg("--help"));
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["sweep", "channel-dump", "codec", "noise-sample", "interleaver"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let o = run(bin().args(["sweep", "--help"]));
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--config", "--out", "--coded", "--seed", "--band", "--snr"] {
        assert!(text.contains(flag), "{flag} missing from sweep help");
    }
}

#[test]
fn sweep_snr_override_sets_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let o = run(bin()
        .args(["sweep", "--coded", "uncoded", "--snr", "0:2:12", "--config"])
        .arg(quick_cfg())
        .arg("--out")
        .arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "band,snr_db,coded,bits,errors,ber,ebn0_db");
    assert_eq!(lines.len(), 8);
    let snrs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(snrs, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2) == Some("0")));
}

#[test]
fn negative_snr_values_parse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let o = run(bin()
        .args(["sweep", "--coded", "uncoded", "--snr", "-2,-1", "--band", "1..3MHz", "--config"])
        .arg(quick_cfg())
        .arg("--out")
        .arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("1.0-3.0MHz,-2,"), "{text}");
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let o = run(bin().args(["sweep", "--config", "/nonexistent/run.cfg", "--out", "/tmp/x.csv"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/run.cfg"), "{}", stderr(&o));
}

#[test]
fn bad_field_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[noise]\nimpulse_index = -1\n").unwrap();
    let o = run(bin().arg("sweep").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o.csv")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("noise.impulse_index"), "{}", stderr(&o));

    std::fs::write(&cfg, "[turbo]\ncolour = blue\n").unwrap();
    let o = run(bin().arg("sweep").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o.csv")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("turbo.colour"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_3() {
    let o = run(bin()
        .args(["sweep", "--snr", "30", "--coded", "uncoded", "--config"])
        .arg(quick_cfg())
        .args(["--out", "/nonexistent/dir/ber.csv"]));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn channel_dump_covers_every_subcarrier_and_entry() {
    let o = run(bin().arg("channel-dump"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "f_hz,i,j,re,im");
    assert_eq!(lines.len(), 1 + 1024 * 9);
    assert!(lines[1].starts_with("3000000,1,1,"));
}

#[test]
fn codec_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let info = dir.path().join("info.hex");
    let coded = dir.path().join("coded.hex");
    let back = dir.path().join("back.hex");
    let payload: String = (0..16u8).map(|b| format!("{:02x}", b.wrapping_mul(37))).collect();
    std::fs::write(&info, &payload).unwrap();
    let o = run(bin().args(["codec", "encode", "--pb", "16"]).arg("--input").arg(&info).arg("--output").arg(&coded));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&coded).unwrap().trim().len(), 64);
    let o = run(bin().args(["codec", "decode", "--pb", "16"]).arg("--input").arg(&coded).arg("--output").arg(&back));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&back).unwrap().trim(), payload);

    std::fs::write(&info, "abcd").unwrap();
    let o = run(bin().args(["codec", "encode", "--pb", "16"]).arg("--input").arg(&info));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn noise_sample_csv() {
    let o = run(bin().args(["noise-sample", "--count", "50", "--seed", "4"]));
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(text.lines().next(), Some("re,im,k"));
    assert_eq!(text.lines().count(), 51);
    let again = run(bin().args(["noise-sample", "--count", "50", "--seed", "4"]));
    assert_eq!(String::from_utf8_lossy(&again.stdout), text);
    let bad = run(bin().args(["noise-sample", "--impulse-index", "0"]));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn interleaver_table_has_one_line_per_couple() {
    let o = run(bin().args(["interleaver", "--pb", "136"]));
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty()).count(), 1 + 136 * 4);
    let o = run(bin().args(["interleaver", "--pb", "100"]));
    assert_eq!(o.status.code(), Some(2));
}
