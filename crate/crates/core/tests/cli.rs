use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lossyfield::fields::load_field_with_sidecar;
use lossyfield::labeler::{class_histogram, classify, load_labels, LabelThresholds};
use lossyfield::sweep::{parse_sweep_csv, TOTAL};
use lossyfield::synth::{flame_field, CANONICAL_SEED, FLAME_DIMS};
use lossyfield::Dims;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossyfield"))
        .args(args)
        .output()
        .expect("spawn lossyfield")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = bin(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn kv<'a>(text: &'a str, key: &str) -> &'a str {
    text.split_whitespace()
        .chain(text.lines())
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

#[test]
fn compress_decompress_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let orig = dir.path().join("orig.f32");
    let art = dir.path().join("orig.blsf");
    let recon = dir.path().join("recon.f32");
    ok(&["generate", "smooth", "--dims", "24x20x16", "--out", p(&orig)]);
    let c = ok(&["compress", p(&orig), "--bound", "0.1", "--out", p(&art)]);
    assert_eq!(kv(&c, "violations"), "0");
    assert!(kv(&c, "ratio").parse::<f64>().unwrap() > 1.0);

    ok(&["decompress", p(&art), "--out", p(&recon)]);
    let (a, _) = load_field_with_sidecar(&orig, false).unwrap();
    let (b, _) = load_field_with_sidecar(&recon, false).unwrap();
    assert_eq!(a.dims(), b.dims());
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!(((x - y) as f64).abs() <= 0.1 * (*x as f64).abs(), "{x} vs {y}");
    }

    let v = ok(&["verify", p(&orig), p(&art)]);
    assert_eq!(kv(&v, "violations"), "0");
    let v = ok(&["verify", p(&orig), p(&art), "--reconstructed", p(&recon)]);
    assert_eq!(kv(&v, "violations"), "0");

    let m = ok(&["metrics", p(&orig), p(&art)]);
    assert!(kv(&m, "ssim").parse::<f64>().unwrap() > 0.8);
    let m = ok(&["metrics", p(&orig), p(&orig)]);
    assert_eq!(kv(&m, "psnr_db"), "inf");
}

#[test]
fn verify_reports_violations_with_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let orig = dir.path().join("orig.f32");
    let art = dir.path().join("orig.blsf");
    let other = dir.path().join("other.f32");
    ok(&["generate", "smooth", "--dims", "12x12x12", "--out", p(&orig)]);
    ok(&[
        "generate",
        "smooth",
        "--dims",
        "12x12x12",
        "--seed",
        "9",
        "--out",
        p(&other),
    ]);
    ok(&["compress", p(&orig), "--bound", "0.01", "--out", p(&art)]);
    let o = bin(&["verify", p(&orig), p(&art), "--reconstructed", p(&other)]);
    assert_eq!(o.status.code(), Some(4));
    assert_ne!(kv(&stdout(&o), "violations"), "0");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.blsf");
    for args in [
        vec!["compress", "--synthetic", "smooth", "--bound", "1.5", "--out", p(&out)],
        vec![
            "compress",
            "--synthetic",
            "smooth",
            "--bound",
            "0.1",
            "--block",
            "1",
            "--out",
            p(&out),
        ],
        vec![
            "compress",
            "--synthetic",
            "smooth",
            "--mode",
            "abs",
            "--bound",
            "-1",
            "--out",
            p(&out),
        ],
        vec!["sweep", "--synthetic", "smooth", "--bounds", ""],
        vec!["sweep", "--synthetic", "smooth", "--bounds", "0.1,0.05"],
        vec!["--threads", "0", "info", p(&out)],
        vec!["no-such-command"],
    ] {
        let o = bin(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert!(!out.exists());
}

#[test]
fn data_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.blsf");
    fs::write(&junk, b"definitely not an artifact").unwrap();
    assert_eq!(bin(&["info", p(&junk)]).status.code(), Some(3));
    assert_eq!(
        bin(&["decompress", p(&junk), "--out", p(&dir.path().join("o.f32"))])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn info_echoes_flags() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("a.blsf");
    ok(&[
        "compress",
        "--synthetic",
        "signed",
        "--dims",
        "16x16x8",
        "--bound",
        "0.05",
        "--block",
        "4",
        "--bin-radius",
        "1024",
        "--no-regression",
        "--byte-stage",
        "none",
        "--zero-threshold",
        "1e-6",
        "--out",
        p(&art),
    ]);
    let info = ok(&["info", p(&art)]);
    assert_eq!(kv(&info, "dims"), "16x16x8");
    assert_eq!(kv(&info, "mode"), "pwr");
    assert_eq!(kv(&info, "bound"), "0.05");
    assert_eq!(kv(&info, "zero_threshold").parse::<f64>().unwrap(), 1e-6);
    assert_eq!(kv(&info, "block"), "4");
    assert_eq!(kv(&info, "bin_radius"), "1024");
    assert_eq!(kv(&info, "regression"), "false");
    assert_eq!(kv(&info, "lorenzo"), "true");
    assert_eq!(kv(&info, "byte_stage"), "none");
    assert_eq!(
        kv(&info, "total_bytes").parse::<u64>().unwrap(),
        fs::metadata(&art).unwrap().len()
    );

    let json: serde_json::Value = serde_json::from_str(&ok(&["info", "--json", p(&art)])).unwrap();
    assert_eq!(json["total_bytes"], fs::metadata(&art).unwrap().len());
}

#[test]
fn label_histogram_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let flame = dir.path().join("flame");
    let labels = dir.path().join("labels.u8");
    ok(&["generate", "flame", "--out", p(&flame)]);
    let channels: Vec<String> = ["Y_H2", "Y_O2", "Y_H2O", "Z"]
        .iter()
        .map(|c| flame.join(format!("{c}.f32")).display().to_string())
        .collect();
    let mut args = vec!["label", "--channels"];
    args.extend(channels.iter().map(String::as_str));
    args.extend(["--out", p(&labels)]);
    let printed: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();

    let expect = classify(&flame_field(FLAME_DIMS, CANONICAL_SEED), &LabelThresholds::default()).unwrap();
    assert_eq!(printed, serde_json::to_value(class_histogram(&expect)).unwrap());
    assert_eq!(load_labels(&labels).unwrap(), expect);

    let synthetic: serde_json::Value = serde_json::from_str(&ok(&["label", "--synthetic"])).unwrap();
    assert_eq!(synthetic, printed);

    // moving the air cut changes the air count
    let wider: serde_json::Value = serde_json::from_str(&ok(&["label", "--synthetic", "--z-air", "0.2"])).unwrap();
    assert!(wider["air"].as_u64() > printed["air"].as_u64());
}

#[test]
fn dataset_build_and_rebuild_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let flame = dir.path().join("flame");
    ok(&["generate", "flame", "--dims", "32x32x4", "--out", p(&flame)]);
    let cfg = dir.path().join("dataset.toml");
    fs::write(
        &cfg,
        r#"seed = 7
tile_shape = [8, 8, 2]
augmentations_per_tile = 1

[sources]
Y_H2 = "flame/Y_H2.f32"
Y_O2 = "flame/Y_O2.f32"
Y_H2O = "flame/Y_H2O.f32"
Z = "flame/Z.f32"
"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let s = ok(&["dataset", "--config", p(&cfg), "--out", p(&a)]);
    assert_eq!(kv(&s, "tiles"), "32");
    let manifest = a.join("manifest.json");
    ok(&["--threads", "3", "dataset", "--rebuild", p(&manifest), "--out", p(&b)]);
    assert_eq!(snapshot(&a), snapshot(&b));

    // a changed source is refused
    let z = flame.join("Z.f32");
    let mut bytes = fs::read(&z).unwrap();
    bytes[0] ^= 1;
    fs::write(&z, bytes).unwrap();
    let o = bin(&["dataset", "--rebuild", p(&manifest), "--out", p(&dir.path().join("c"))]);
    assert_ne!(o.status.code(), Some(0));
}

fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_csv_columns_and_trend() {
    let csv = ok(&["sweep", "--synthetic", "flame", "--bounds", "0.01,0.1,0.4", "--labels"]);
    let rows = parse_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 3 * 5);
    let total: Vec<_> = rows.iter().filter(|r| r.channel == TOTAL).collect();
    assert_eq!(total.len(), 3);
    for w in total.windows(2) {
        assert!(w[1].ratio >= w[0].ratio);
        assert!(w[1].label_err.unwrap() >= w[0].label_err.unwrap());
    }
    assert!(rows.iter().all(|r| r.label_err.is_some()));

    let plain = ok(&["sweep", "--synthetic", "smooth", "--bounds", "0.05"]);
    let rows = parse_sweep_csv(&plain).unwrap();
    assert!(rows.iter().all(|r| r.label_err.is_none()));
}

#[test]
fn sweep_reads_toml_config() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.f32");
    ok(&["generate", "signed", "--dims", "16x16x16", "--out", p(&f)]);
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "bounds = [0.02, 0.2]\nchannels = [\"f.f32\"]\noutput = \"out.csv\"\n",
    )
    .unwrap();
    let s = ok(&["sweep", "--config", p(&cfg)]);
    assert!(s.contains("rows=4"), "{s}");
    let rows = parse_sweep_csv(&fs::read_to_string(dir.path().join("out.csv")).unwrap()).unwrap();
    assert_eq!(rows[0].channel, "f");
    assert_eq!(
        rows.iter().map(|r| r.bound_pct).collect::<Vec<_>>(),
        vec![2.0, 2.0, 20.0, 20.0]
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("1.blsf");
    let many = dir.path().join("n.blsf");
    let dims = Dims::new(40, 36, 20).to_string();
    ok(&[
        "--threads",
        "1",
        "compress",
        "--synthetic",
        "smooth",
        "--dims",
        &dims,
        "--bound",
        "0.1",
        "--out",
        p(&one),
    ]);
    ok(&[
        "--threads",
        "5",
        "compress",
        "--synthetic",
        "smooth",
        "--dims",
        &dims,
        "--bound",
        "0.1",
        "--out",
        p(&many),
    ]);
    assert_eq!(fs::read(one).unwrap(), fs::read(many).unwrap());
}
