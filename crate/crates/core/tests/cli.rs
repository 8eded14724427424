//! End-to-end runs of the `xhurst` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use xhurst::estimators::{EstimatorConfig, EstimatorId, PreparedPair};
use xhurst::io;
use xhurst::series_gen::fgn_generate;
use xhurst::SeriesPair;

fn xhurst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xhurst")).args(args).output().expect("spawn xhurst")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &TempDir, name: &str, setting: &str, alpha: &str, len: &str, seed: &str) -> PathBuf {
    let out = dir.path().join(name);
    let o = xhurst(&["generate", "--setting", setting, "--alpha", alpha, "-n", len, "--seed", seed, "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

/// `estimator,h_hat` lines into pairs, header skipped.
fn parse_report(stdout: &[u8]) -> Vec<(String, String)> {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("estimator,h_hat"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.to_string(), b.to_string())
        })
        .collect()
}

const SMALL_EXPERIMENT: &str = r#"
settings = ["I", "II"]
alphas = [1.3, 2.0]
lengths = [200]
n_reps = 6
estimators = ["dcca", "ape", "lxw"]
master_seed = 11
"#;

fn simulate_small(dir: &TempDir) -> PathBuf {
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, SMALL_EXPERIMENT).unwrap();
    let out = dir.path().join("records.csv");
    let o = xhurst(&["simulate", "--config", path_str(&cfg), "-j", "2", "-o", path_str(&out), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_writes_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let out = generate(&dir, "p.csv", "I", "2.0", "500", "42");
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y"));
    assert_eq!(lines.count(), 500);
}

#[test]
fn generate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.csv", "II", "1.4", "300", "9");
    let b = generate(&dir, "b.csv", "II", "1.4", "300", "9");
    let c = generate(&dir, "c.csv", "II", "1.4", "300", "10");
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn generate_rejects_alpha_out_of_range() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bad.csv");
    let o = xhurst(&["generate", "--setting", "I", "--alpha", "2.5", "-n", "500", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert!(!out.exists());
}

#[test]
fn unknown_flag_is_a_validation_error() {
    assert_eq!(xhurst(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(xhurst(&["--help"]).status.code(), Some(0));
}

#[test]
fn estimate_matches_library() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "p.csv", "II", "1.5", "1000", "3");
    let o = xhurst(&["estimate", "-i", path_str(&file)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = parse_report(&o.stdout);
    assert_eq!(report.len(), 6);

    let pair: SeriesPair<f64> = io::load_pair(&file).unwrap();
    let cfg = EstimatorConfig::default();
    let prepared = PreparedPair::new(&pair, &cfg);
    for ((name, value), id) in report.iter().zip(EstimatorId::ALL) {
        assert_eq!(name, &id.to_string());
        let cli: f64 = value.parse().unwrap();
        let lib = prepared.estimate(id).unwrap();
        assert!((cli - lib).abs() < 1e-9, "{id}: {cli} vs {lib}");
    }
}

#[test]
fn estimate_bandwidth_override() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "p.csv", "I", "1.7", "1000", "5");
    let run = |extra: &[&str]| {
        let mut args = vec!["estimate", "-i", path_str(&file), "--estimator", "xpe"];
        args.extend_from_slice(extra);
        let o = xhurst(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        parse_report(&o.stdout)[0].1.parse::<f64>().unwrap()
    };
    let default = run(&[]);
    let m50 = run(&["--m", "50"]);
    assert_ne!(default, m50);

    let pair: SeriesPair<f64> = io::load_pair(&file).unwrap();
    let mut cfg = EstimatorConfig::default();
    cfg.freq.m = Some(50);
    let lib = PreparedPair::new(&pair, &cfg).estimate(EstimatorId::Xpe).unwrap();
    assert!((m50 - lib).abs() < 1e-9);
}

#[test]
fn estimate_reports_row_of_malformed_input() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("ragged.csv");
    let mut text = String::from("t,x,y\n");
    for t in 0..150 {
        if t == 120 {
            text.push_str("120,0.5\n");
        } else {
            text.push_str(&format!("{t},{},{}\n", (t as f64).sin(), (t as f64).cos()));
        }
    }
    std::fs::write(&file, text).unwrap();
    let o = xhurst(&["estimate", "-i", path_str(&file)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("121") || err.contains("122"), "{err}");
}

#[test]
fn estimate_rejects_short_series() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "short.csv", "I", "2.0", "50", "1");
    assert_eq!(xhurst(&["estimate", "-i", path_str(&file)]).status.code(), Some(1));
}

#[test]
fn estimate_missing_file_is_io_error() {
    let o = xhurst(&["estimate", "-i", "/nonexistent/pair.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_fgn_self_pair() {
    let dir = TempDir::new().unwrap();
    let x = fgn_generate::<f64, _>(0.7, 1 << 13, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
    let file = dir.path().join("fgn.csv");
    io::save_pair(&SeriesPair::new(x.clone(), x).unwrap(), &file).unwrap();
    let o = xhurst(&["estimate", "-i", path_str(&file), "--estimator", "dcca"]);
    assert!(o.status.success());
    let h: f64 = parse_report(&o.stdout)[0].1.parse().unwrap();
    assert!((h - 0.7).abs() <= 0.1, "dcca {h}");
}

#[test]
fn estimate_writes_curve_and_periodogram() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "p.csv", "I", "2.0", "800", "8");
    let curve = dir.path().join("curve.csv");
    let pg = dir.path().join("pg.csv");
    let o = xhurst(&[
        "estimate",
        "-i",
        path_str(&file),
        "--estimator",
        "dmca",
        "--curve-out",
        path_str(&curve),
        "--periodogram-out",
        path_str(&pg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(curve).unwrap().starts_with("scale,value\n"));
    assert!(std::fs::read_to_string(pg).unwrap().starts_with("lambda,re,im,modulus\n"));
}

#[test]
fn simulate_missing_config_fails() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.csv");
    let o = xhurst(&["simulate", "--config", "/nonexistent/exp.toml", "-o", path_str(&out)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn simulate_rejects_unknown_config_key() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, format!("{SMALL_EXPERIMENT}\nreplications = 3\n")).unwrap();
    let o = xhurst(&["simulate", "--config", path_str(&cfg), "-o", path_str(&dir.path().join("r.csv"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_record_count_and_thread_independence() {
    let dir = TempDir::new().unwrap();
    let first = simulate_small(&dir);
    let records = io::load_records(&first).unwrap();
    assert_eq!(records.len(), 2 * 2 * 6 * 3);

    let cfg = dir.path().join("exp.toml");
    let serial = dir.path().join("serial.csv");
    let o = xhurst(&["simulate", "--config", path_str(&cfg), "-j", "1", "-o", path_str(&serial), "--quiet"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(serial).unwrap());
}

#[test]
fn summarize_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let records = simulate_small(&dir);
    let copy = dir.path().join("copy.csv");
    std::fs::copy(&records, &copy).unwrap();
    let (s1, s2) = (dir.path().join("s1.csv"), dir.path().join("s2.csv"));
    for (input, out) in [(&records, &s1), (&copy, &s2)] {
        let o = xhurst(&["summarize", "-i", path_str(input), "-o", path_str(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
    assert_eq!(io::load_summary(&s1).unwrap().len(), 3 * 2 * 2);
}

#[test]
fn plots_from_summary() {
    let dir = TempDir::new().unwrap();
    let records = simulate_small(&dir);
    let summary = dir.path().join("summary.csv");
    assert!(xhurst(&["summarize", "-i", path_str(&records), "-o", path_str(&summary)]).status.success());

    let mean_svg = dir.path().join("mean.svg");
    let o = xhurst(&["plot", "-i", path_str(&summary), "-m", "mean", "-o", path_str(&mean_svg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(&mean_svg).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains(r#"class="reference""#));

    let mse_svg = dir.path().join("mse.svg");
    let o = xhurst(&["plot", "-i", path_str(&summary), "-m", "mse", "--setting", "II", "-o", path_str(&mse_svg)]);
    assert!(o.status.success());
    assert!(!std::fs::read_to_string(&mse_svg).unwrap().contains(r#"class="reference""#));
    for row in io::load_summary(&summary).unwrap() {
        assert!(row.stats.unwrap().mse >= 0.0);
    }

    let o = xhurst(&["plot", "-i", path_str(&summary), "-m", "median", "-o", path_str(&dir.path().join("x.svg"))]);
    assert_eq!(o.status.code(), Some(1));
}
