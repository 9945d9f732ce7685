use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SNR_THRESHOLD: f64 = 0.15891;

fn cvqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sample_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const OPTIMIZED: &str = r#"
headroom_factor = 1.0

[link]
xi_ch = 0.01
t_rec = 0.7
xi_rec = 0.01

[code]
rate = 0.1
beta = 0.9395

[sweep]
t_ch_min = 0.05
t_ch_max = 1.0
n_points = 15
spacing = "log"

[sim]
n_symbols = 1000000
seed = 3
"#;

const MATCHED: &str = r#"
headroom_factor = 1.15
strategies = ["unmatched", "ideal_rate", "artificial_noise"]

[link]
xi_ch = 0.02
t_rec = 0.7
xi_rec = 0.01
t_ch = 0.5

[sweep]
t_ch_min = 0.7
t_ch_max = 1.3
n_points = 61
spacing = "linear"
relative = true

[sim]
n_symbols = 20000
seed = 5
"#;

#[test]
fn operating_point_reports_threshold_snr() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", OPTIMIZED);
    let rec = dir.path().join("op.json");
    let out = cvqkd(&["operating-point", "--config", s(&cfg), "--output", s(&rec)]);
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("snr              0.158998895155"), "{text}");
    assert!(text.contains("xi_art           0\n"), "{text}");

    let json = read_json(&rec);
    let snr = json["budget"]["snr"].as_f64().unwrap();
    assert!((snr - SNR_THRESHOLD).abs() / SNR_THRESHOLD < 1e-3);
    assert!((snr - (2f64.powf(0.2 / 0.9395) - 1.0)).abs() < 1e-11);
    assert_eq!(json["link"]["xi_art"].as_f64(), Some(0.0));
    let b = json["budget"]["b"].as_f64().unwrap();
    let chi = json["budget"]["chi"].as_f64().unwrap();
    let r = json["budget"]["r"].as_f64().unwrap();
    assert!((r - (b - chi)).abs() < 1e-11);
}

#[test]
fn headroom_adds_artificial_noise_at_same_snr() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", OPTIMIZED);
    let rec = dir.path().join("op.json");
    let out = cvqkd(&["operating-point", "-c", s(&cfg), "--headroom", "1.15", "-o", s(&rec)]);
    assert_eq!(code_of(&out), 0);
    let json = read_json(&rec);
    assert!(json["link"]["xi_art"].as_f64().unwrap() > 0.0);
    let snr = json["budget"]["snr"].as_f64().unwrap();
    assert!((snr - (2f64.powf(0.2 / 0.9395) - 1.0)).abs() < 1e-11);
    assert_eq!(json["headroom_factor"].as_f64(), Some(1.15));
}

#[test]
fn infeasible_scenarios_exit_2() {
    let dir = TempDir::new().unwrap();
    let huge = write(&dir, "huge.toml", &OPTIMIZED.replace("xi_ch = 0.01", "xi_ch = 1e4"));
    let out = cvqkd(&["operating-point", "-c", s(&huge)]);
    assert_eq!(code_of(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&huge)])), 2);

    let below = write(
        &dir,
        "below.toml",
        &OPTIMIZED.replace("xi_rec = 0.01", "xi_rec = 0.01\nt_ch = 0.1\nv_mod = 1.0"),
    );
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&below)])), 2);
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&missing)])), 1);

    let garbage = write(&dir, "g.toml", "[link\nxi_ch = ");
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&garbage)])), 1);

    let bad_beta = write(&dir, "b.toml", &OPTIMIZED.replace("beta = 0.9395", "beta = 1.2"));
    assert_eq!(code_of(&cvqkd(&["codes", "-c", s(&bad_beta)])), 1);
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&bad_beta)])), 1);

    let no_sim = write(&dir, "n.toml", OPTIMIZED.split("[sim]").next().unwrap());
    assert_eq!(code_of(&cvqkd(&["simulate", "-c", s(&no_sim)])), 1);

    let no_sweep = write(&dir, "w.toml", &OPTIMIZED.replace("[sweep]\nt_ch_min = 0.05\nt_ch_max = 1.0\nn_points = 15\nspacing = \"log\"\n", ""));
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&no_sweep)])), 1);

    let cfg = write(&dir, "ok.toml", OPTIMIZED);
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&cfg), "--strategy", "bogus"])), 1);
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&cfg), "--strategy", "external_baseline"])), 1);
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&cfg), "--headroom", "0.9"])), 1);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", OPTIMIZED);
    let bad = dir.path().join("no_such_dir").join("out");
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&cfg), "-o", s(&bad)])), 3);
    assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&cfg), "-o", s(&bad)])), 3);
    let sim = write(&dir, "m.toml", MATCHED);
    assert_eq!(code_of(&cvqkd(&["simulate", "-c", s(&sim), "-o", s(&bad)])), 3);
}

#[test]
fn sweep_csv_is_deterministic_and_well_formed() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", MATCHED);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&cfg), "-o", s(&a)])), 0);
    assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&cfg), "-o", s(&b)])), 0);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());

    let to_stdout = cvqkd(&["sweep", "-c", s(&cfg)]);
    assert_eq!(to_stdout.stdout, bytes);

    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t_ch,t_total,strategy,v_mod,xi_art,snr,i_ab,b,chi,r,status")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 61 * 3);
    for row in &rows {
        assert_eq!(row.len(), 11);
        let status = row[10];
        assert!(["ok", "below_threshold", "infeasible"].contains(&status));
        for field in &row[..2] {
            let digits = field.trim_start_matches('-').replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 12, "{field}");
        }
    }

    // Headroom 1.15 at nominal 0.5: matching holds down to 0.5/1.15.
    let edge = 0.5 / 1.15;
    for row in rows.iter().filter(|r| r[2] == "artificial_noise") {
        let t: f64 = row[0].parse().unwrap();
        if t < edge - 1e-9 {
            assert_eq!(row[10], "below_threshold", "t_ch {t}");
        } else if t > edge + 1e-9 {
            assert_eq!(row[10], "ok", "t_ch {t}");
            let xi: f64 = row[4].parse().unwrap();
            assert!(xi > 0.0);
        }
    }
}

#[test]
fn sweep_strategy_flag_and_single_point() {
    let dir = TempDir::new().unwrap();
    let single = MATCHED
        .replace("headroom_factor = 1.15", "headroom_factor = 1.0")
        .replace("t_ch_min = 0.7", "t_ch_min = 1.0")
        .replace("t_ch_max = 1.3", "t_ch_max = 1.0")
        .replace("n_points = 61", "n_points = 1");
    let cfg = write(&dir, "one.toml", &single);
    let out = cvqkd(&["sweep", "-c", s(&cfg)]);
    assert_eq!(code_of(&out), 0);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let r: Vec<f64> = rows.iter().map(|row| row[9].parse().unwrap()).collect();
    assert!((r[0] - r[1]).abs() <= 1e-10 && (r[1] - r[2]).abs() <= 1e-10, "{r:?}");

    let out = cvqkd(&["sweep", "-c", s(&cfg), "--strategy", "ideal_rate", "--strategy", "unmatched"]);
    let text = stdout(&out);
    let names: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(names, ["ideal_rate", "unmatched"]);
}

#[test]
fn sweep_from_nominal_upward_dominance() {
    let dir = TempDir::new().unwrap();
    for xi_ch in ["0.01", "0.02", "0.05", "0.1"] {
        let text = MATCHED
            .replace("headroom_factor = 1.15", "headroom_factor = 1.0")
            .replace("xi_ch = 0.02", &format!("xi_ch = {xi_ch}"))
            .replace("t_ch_min = 0.7", "t_ch_min = 1.0")
            .replace("t_ch_max = 1.3", "t_ch_max = 2.0")
            .replace("n_points = 61", "n_points = 21");
        let cfg = write(&dir, "up.toml", &text);
        let out = cvqkd(&["sweep", "-c", s(&cfg), "--strategy", "unmatched", "--strategy", "artificial_noise"]);
        assert_eq!(code_of(&out), 0);
        let csv = stdout(&out);
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        for pair in rows.chunks(2) {
            assert_eq!(pair[0][2], "unmatched");
            assert_eq!(pair[1][2], "artificial_noise");
            assert_eq!(pair[0][10], "ok");
            let ru: f64 = pair[0][9].parse().unwrap();
            let ra: f64 = pair[1][9].parse().unwrap();
            assert!(ru <= ra, "xi_ch {xi_ch}: {ru} > {ra}");
        }
    }
}

#[test]
fn simulate_is_deterministic_and_consistent() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "s.toml", OPTIMIZED);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let first = cvqkd(&["simulate", "-c", s(&cfg), "-o", s(&a)]);
    let second = cvqkd(&["simulate", "-c", s(&cfg), "-o", s(&b)]);
    assert_eq!(code_of(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let json = read_json(&a);
    assert_eq!(json["n_symbols"].as_u64(), Some(1_000_000));
    let snr = json["empirical"]["snr"].as_f64().unwrap();
    assert!((snr - SNR_THRESHOLD).abs() / SNR_THRESHOLD <= 0.01, "{snr}");
    let mi = json["empirical"]["i_ab"].as_f64().unwrap();
    assert!((mi - (1.0 + SNR_THRESHOLD).log2()).abs() <= 0.01);

    let other = cvqkd(&["simulate", "-c", s(&cfg), "--seed", "4", "--n-symbols", "1000"]);
    assert_eq!(code_of(&other), 0);
    assert!(stdout(&other).contains("1000 symbols, seed 4"));
}

#[test]
fn simulate_without_modulation_has_no_information() {
    let dir = TempDir::new().unwrap();
    let text = MATCHED.replace("t_ch = 0.5", "t_ch = 0.5\nv_mod = 0.0");
    let cfg = write(&dir, "z.toml", &text);
    let rec = dir.path().join("z.json");
    let out = cvqkd(&["simulate", "-c", s(&cfg), "--n-symbols", "100000", "-o", s(&rec)]);
    assert_eq!(code_of(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(&rec);
    assert!(json["empirical"]["i_ab"].as_f64().unwrap() <= 0.01);
    assert_eq!(json["link"]["xi_art"].as_f64(), Some(0.0));
}

#[test]
fn codes_lists_presets_and_custom_code() {
    let out = cvqkd(&["codes"]);
    assert_eq!(code_of(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("met-ldpc-0.1"));
    assert!(text.contains("0.9395"));
    assert!(text.contains("0.158998895155"));

    let dir = TempDir::new().unwrap();
    let custom = OPTIMIZED.replace("beta = 0.9395", "beta = 0.95\nlabel = \"my-code\"");
    let cfg = write(&dir, "c.toml", &custom);
    let text = stdout(&cvqkd(&["codes", "-c", s(&cfg)]));
    assert!(text.contains("met-ldpc-0.1"));
    assert!(text.contains("my-code"));
}

#[test]
fn sample_configs_run() {
    for name in ["optimized.toml", "headroom.toml", "baseline_illustrative.toml"] {
        let path = sample_config(name);
        assert_eq!(code_of(&cvqkd(&["operating-point", "-c", s(&path)])), 0, "{name}");
        assert_eq!(code_of(&cvqkd(&["sweep", "-c", s(&path)])), 0, "{name}");
    }
    let out = cvqkd(&["sweep", "-c", s(&sample_config("baseline_illustrative.toml"))]);
    let text = stdout(&out);
    let base: Vec<&str> = text.lines().filter(|l| l.contains("external_baseline")).collect();
    assert_eq!(base.len(), 3);
    assert!(base.iter().all(|l| l.ends_with(",ok")));
}
