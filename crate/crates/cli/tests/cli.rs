//! End-to-end tests of the `risbeam` binary: exit-code contract, bundled
//! scenarios, output determinism, and file-format round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_risbeam"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// A small fast scenario for pattern/quantize plumbing tests.
const SMALL: &str = r#"
[physics]
frequency_hz = 3.4e9

[ris]
rows = 4
cols = 4
spacing_m = "half_wavelength"

[bs]
theta_deg = 0.0
phi_deg = 0.0
distance_m = 5.0

[[users]]
theta_deg = 20.0
phi_deg = 0.0
distance_m = 15.0
weight = 1.0

[[users]]
theta_deg = 40.0
phi_deg = 180.0
distance_m = 15.0
weight = 1.0
"#;

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["no-such-verb"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[physics\nfrequency_hz = 1.0").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("parse error"), "{}", stderr(&out));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(code(&run(&["solve", missing.to_str().unwrap()])), 2);
}

#[test]
fn validation_errors_exit_three_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad_theta.cfg");
    std::fs::write(&cfg, SMALL.replace("theta_deg = 40.0", "theta_deg = 95.0")).unwrap();
    let out = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let msg = stderr(&out);
    assert!(msg.contains("validation error"), "{msg}");
    assert!(msg.contains("[[users]][1]"), "{msg}");
}

#[test]
fn solve_three_user_scenario_reproduces_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.toml");
    let out = run(&[
        "solve",
        scenario("threeuser_weighted.cfg").to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let record: toml::Value = toml::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(record["status"].as_str(), Some("converged"));
    let ratios: Vec<f64> = record["ratios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_float().unwrap())
        .collect();
    assert!((ratios[1] - 0.5).abs() / 0.5 <= 0.03, "{ratios:?}");
    assert!((ratios[2] - 0.2).abs() / 0.2 <= 0.03, "{ratios:?}");
    assert_eq!(record["omega"].as_array().unwrap().len(), 256);
}

#[test]
fn solve_ten_user_scenario_equalizes_powers() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.toml");
    let out = run(&[
        "solve",
        scenario("tenuser_equal.cfg").to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let record: toml::Value = toml::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let powers: Vec<f64> = record["user_powers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_float().unwrap())
        .collect();
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / powers.len() as f64;
    assert!(var.sqrt() / mean < 0.01, "CV {}", var.sqrt() / mean);
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.toml");
    let b = dir.path().join("b.toml");
    for out_path in [&a, &b] {
        let out = run(&[
            "solve",
            scenario("threeuser_ratio.cfg").to_str().unwrap(),
            "--seed",
            "42",
            "--restarts",
            "2",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn pattern_grid_shape_and_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let sol = dir.path().join("sol.toml");
    assert_eq!(
        code(&run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--out",
            sol.to_str().unwrap()
        ])),
        0
    );

    let csv = dir.path().join("pattern.csv");
    let out = run(&[
        "pattern",
        cfg.to_str().unwrap(),
        sol.to_str().unwrap(),
        "--normalize",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta_deg,phi_deg,power,power_db_normalized");
    assert_eq!(lines.len(), 1 + 90 * 180);
    let max_power = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max_power, 1.0);
}

#[test]
fn pattern_rejects_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let sol = dir.path().join("sol.toml");
    std::fs::write(&sol, "status = \"converged\"\nomega = [0.0, 1.0]\n").unwrap();
    let out = run(&["pattern", cfg.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("16 units"), "{}", stderr(&out));
}

#[test]
fn quantize_writes_side_by_side_metrics_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("threeuser_weighted.cfg");
    let sol = dir.path().join("sol.toml");
    assert_eq!(
        code(&run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--out",
            sol.to_str().unwrap()
        ])),
        0
    );

    // bits fall back to the scenario's [quantize] section
    let q1 = dir.path().join("q1.toml");
    let out = run(&[
        "quantize",
        sol.to_str().unwrap(),
        cfg.to_str().unwrap(),
        "--out",
        q1.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let record: toml::Value = toml::from_str(&std::fs::read_to_string(&q1).unwrap()).unwrap();
    assert_eq!(record["bit_depth"].as_integer(), Some(2));
    assert!(record.get("continuous").is_some());
    let quantized_min = record["weighted_values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_float().unwrap())
        .fold(f64::INFINITY, f64::min);
    let continuous_min = record["continuous"]["min_weighted_power"]
        .as_float()
        .unwrap();
    assert!(
        quantized_min <= continuous_min,
        "quantization must not help the minimum"
    );
    // every level is a multiple of 2π/4
    for v in record["omega"].as_array().unwrap() {
        let w = v.as_float().unwrap();
        let level = w / (std::f64::consts::TAU / 4.0);
        assert!(
            (level - level.round()).abs() < 1e-9,
            "{w} not on the 2-bit grid"
        );
    }

    // quantizing the quantized record reproduces the file byte for byte
    let q2 = dir.path().join("q2.toml");
    let out = run(&[
        "quantize",
        q1.to_str().unwrap(),
        cfg.to_str().unwrap(),
        "--out",
        q2.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(std::fs::read(&q1).unwrap(), std::fs::read(&q2).unwrap());
}

#[test]
fn quantize_without_bits_anywhere_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let sol = dir.path().join("sol.toml");
    assert_eq!(
        code(&run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--out",
            sol.to_str().unwrap()
        ])),
        0
    );
    let out = run(&["quantize", sol.to_str().unwrap(), cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--bits"), "{}", stderr(&out));
}

#[test]
fn widebeam_single_beam_equals_direct_solve() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.toml");
    let out = run(&[
        "widebeam",
        scenario("threeuser_weighted.cfg").to_str().unwrap(),
        "--center-theta",
        "20",
        "--center-phi",
        "0",
        "--count",
        "1",
        "--out",
        wide.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // identical physics with a single explicit user at the region center
    let cfg = dir.path().join("single.cfg");
    let single = std::fs::read_to_string(scenario("threeuser_weighted.cfg")).unwrap();
    let head = single.split("[[users]]").next().unwrap();
    std::fs::write(
        &cfg,
        format!(
            "{head}[[users]]\ntheta_deg = 20.0\nphi_deg = 0.0\ndistance_m = 15.0\nweight = 1.0\n"
        ),
    )
    .unwrap();
    let direct = dir.path().join("direct.toml");
    assert_eq!(
        code(&run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--out",
            direct.to_str().unwrap()
        ])),
        0
    );

    let omega = |p: &Path| -> Vec<f64> {
        let v: toml::Value = toml::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["omega"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_float().unwrap())
            .collect()
    };
    assert_eq!(omega(&wide), omega(&direct));
}

#[test]
fn widebeam_reports_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.toml");
    let out = run(&[
        "widebeam",
        scenario("tenuser_equal.cfg").to_str().unwrap(),
        "--center-theta",
        "20",
        "--radius",
        "8",
        "--count",
        "7",
        "--out",
        wide.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let record: toml::Value = toml::from_str(&std::fs::read_to_string(&wide).unwrap()).unwrap();
    assert_eq!(record["user_powers"].as_array().unwrap().len(), 7);
    let cov = &record["coverage"];
    assert!(cov["min_power"].as_float().unwrap() > 0.0);
    assert!(cov["ripple_db"].as_float().unwrap() >= 0.0);
    assert_eq!(cov["sample_count"].as_integer(), Some(193));
}

#[test]
fn widebeam_rejects_region_past_horizon() {
    let out = run(&[
        "widebeam",
        scenario("tenuser_equal.cfg").to_str().unwrap(),
        "--center-theta",
        "85",
        "--radius",
        "10",
        "--count",
        "7",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn oracle_check_default_suite_passes() {
    let out = run(&["oracle-check"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("projection"), "{text}");
    assert!(text.contains("envelope"), "{text}");
}

#[test]
fn oracle_check_enumeration_comparison() {
    let out = run(&[
        "oracle-check",
        "--bits",
        "2",
        "--units",
        "4",
        "--users",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("exhaustive vs quantized solver"), "{text}");
}

#[test]
fn oracle_check_refuses_oversized_enumeration() {
    let out = run(&[
        "oracle-check",
        "--bits",
        "2",
        "--units",
        "20",
        "--users",
        "2",
    ]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn solve_dumps_channel_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let dump = dir.path().join("channel.csv");
    let out = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--dump-channel",
        dump.to_str().unwrap(),
        "--out",
        dir.path().join("sol.toml").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 2);
    assert!(text.starts_with("unit_index,user_index,re,im,beta,psi"));
}
