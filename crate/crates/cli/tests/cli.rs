use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refracto_core::dsp_pipeline::process_frame;
use refracto_core::sensor_sim::synth_frame;
use refracto_core::{PipelineConfig, SimGeometry, SimScenario};

fn refracto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refracto"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.rcap"), dir.path().join("b.rcap"));
    for out in [&a, &b] {
        let o = refracto(&["simulate", "--brix", "7.2", "--scenario", "normal", "--seed", "1", "--out", p(out)]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).contains("level=NORMAL"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.rcap");
    refracto(&["simulate", "--brix", "7.2", "--seed", "2", "--out", p(&c)]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn empty_capture_raises_alert() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("empty.rcap");
    assert!(refracto(&["simulate", "--scenario", "empty", "--out", p(&cap)]).status.success());
    let o = refracto(&["process", p(&cap)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("EMPTY"), "{}", stdout(&o));
}

#[test]
fn paired_stats_on_table1() {
    let o = refracto(&["stats", "--paired", &fixture("table1.csv")]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in ["t=0.652", "p=0.522", "df=18"] {
        assert!(text.lines().any(|l| l == line), "{line} missing from\n{text}");
    }
}

#[test]
fn other_stats_modes() {
    let o = refracto(&["stats", "--pearson", &fixture("table1.csv")]);
    assert!(stdout(&o).contains("pearson_r=0.999"));
    let o = refracto(&["stats", "--rsd", "--cols", "rsd_percent", &fixture("table2.csv")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rsd_percent="));
    let o = refracto(&["stats", "--ci", &fixture("repeatability.csv")]);
    assert!(stdout(&o).contains("ci_low=7.1716"));
}

#[test]
fn usage_and_runtime_exit_codes() {
    assert_eq!(refracto(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(refracto(&["stats", "--bogus", "x.csv"]).status.code(), Some(2));
    assert_eq!(refracto(&[]).status.code(), Some(2));
    let o = refracto(&["process", "/nonexistent/capture.rcap"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("/nonexistent/capture.rcap"));
    assert_eq!(refracto(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_capture_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("bad.rcap");
    std::fs::write(&cap, "# refracto-capture v2\n").unwrap();
    let o = refracto(&["process", p(&cap)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1"));
}

#[test]
fn bad_config_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "window_m=0\n").unwrap();
    let out = dir.path().join("x.rcap");
    let o = refracto(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

fn write_pairs(path: &PathBuf) {
    let geom = SimGeometry::default();
    let cfg = PipelineConfig::default();
    let mut csv = String::from("position,brix\n");
    for i in 0..=120 {
        let brix = i as f64 * 0.5;
        let scn = SimScenario {
            brix,
            ..SimScenario::default()
        }
        .noiseless();
        let det = process_frame(&synth_frame(&scn, &geom).unwrap(), &cfg).unwrap();
        csv.push_str(&format!("{},{brix}\n", det.index1.unwrap()));
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn calibrate_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.csv");
    write_pairs(&pairs);
    let quiet = dir.path().join("quiet.cfg");
    std::fs::write(&quiet, "noise_sd_volts=0\nburr_rate=0\n").unwrap();
    let water = dir.path().join("water.rcap");
    let o = refracto(&["simulate", "--brix", "0", "--config", p(&quiet), "--out", p(&water)]);
    assert!(o.status.success());

    let model = dir.path().join("model.json");
    let o = refracto(&[
        "calibrate", "--pairs", p(&pairs), "--water", p(&water), "--breakpoint", "17",
        "--reference-slope", "0.0102", "--prototype-slope", "0.0100", "--out", p(&model),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("segment 1:"), "{text}");
    assert!(text.contains("k2=1.020000"));

    let sample = dir.path().join("s.rcap");
    refracto(&["simulate", "--brix", "7.2", "--seed", "4", "--out", p(&sample)]);
    let o = refracto(&["process", p(&sample), "--model", p(&model)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let brix: f64 = text
        .split_whitespace()
        .find_map(|w| w.strip_prefix("brix="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((brix - 7.2 * 1.02).abs() <= 0.1, "{text}");

    let weak = dir.path().join("w.rcap");
    refracto(&["simulate", "--scenario", "weak-led", "--out", p(&weak)]);
    assert_eq!(refracto(&["process", p(&weak), "--model", p(&model)]).status.code(), Some(1));
}

#[test]
fn plot_has_pipeline_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cap = dir.path().join("s.rcap");
    let plot = dir.path().join("plot.csv");
    refracto(&["simulate", "--out", p(&cap)]);
    assert!(refracto(&["process", p(&cap), "--plot", p(&plot)]).status.success());
    let text = std::fs::read_to_string(&plot).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pixel,raw,deburred,smoothed,difference"));
    assert_eq!(lines.count(), 2496);
}

#[test]
fn oversample_demo_reports_gain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = refracto(&["oversample-demo", "--seed", "3", "--out", p(&out)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("f_os=16000"));
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("ratio="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio <= 1.0 / 3.0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1001);
    let again = refracto(&["oversample-demo", "--seed", "3"]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&out).unwrap());
}
