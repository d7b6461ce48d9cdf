use std::fs;
use std::path::Path;

use ris_sim::cli::{run, CliError};
use ris_sim::{CodeMatrix, ControlFrame};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn ris(args: &[&str]) -> Result<String, CliError> {
    run(std::iter::once("ris-sim").chain(args.iter().copied()))
}

fn out_args(dir: &Path) -> [String; 2] {
    ["--out".to_string(), dir.display().to_string()]
}

fn ris_in(dir: &Path, args: &[&str]) -> Result<String, CliError> {
    let out = out_args(dir);
    let mut all: Vec<&str> = args.to_vec();
    all.extend(out.iter().map(String::as_str));
    ris(&all)
}

fn metric(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn codebook_broadside_has_ring_symmetry_and_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ris_in(a.path(), &["codebook", "--theta0", "0"]).unwrap();
    ris_in(b.path(), &["codebook", "--theta0", "0"]).unwrap();
    for name in ["code.txt", "phase.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    let code = CodeMatrix::from_path(a.path().join("code.txt")).unwrap();
    assert_eq!(code.transposed(), code);
    assert_eq!(code.rotated_half_turn(), code);
    assert_eq!(code.flipped_rows(), code);
}

#[test]
fn codebook_rejects_out_of_range_theta() {
    let dir = tempfile::tempdir().unwrap();
    let e = ris_in(dir.path(), &["codebook", "--theta0", "100"]).unwrap_err();
    assert_eq!(e.code, 2);
    assert!(e.message.contains("theta0 out of range"), "{}", e.message);
    assert!(!dir.path().join("code.txt").exists());
}

#[test]
fn pattern_of_ten_degree_code_peaks_near_ten() {
    let dir = tempfile::tempdir().unwrap();
    ris_in(dir.path(), &["codebook", "--theta0", "10"]).unwrap();
    let code = dir.path().join("code.txt").display().to_string();
    let report = ris_in(dir.path(), &["pattern", "--code", &code]).unwrap();
    assert!((metric(&report, "peak_theta_deg") - 10.0).abs() <= 2.0, "{report}");
    let csv = fs::read_to_string(dir.path().join("pattern.csv")).unwrap();
    assert!(csv.starts_with("theta_deg,phi_deg,mag_db,real,imag\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 181);
    assert_eq!(fs::read_to_string(dir.path().join("metrics.txt")).unwrap(), report);
}

#[test]
fn uniform_broadside_with_feed_terms_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("flat.conf");
    fs::write(&cfg, "feed_exponent = 0\nspherical_spreading = false\nfeed_path_phase = false\n").unwrap();
    let code = dir.path().join("zeros.txt");
    fs::write(&code, CodeMatrix::zeros(16, 16).to_string()).unwrap();
    let report = ris_in(
        dir.path(),
        &["pattern", "--config", cfg.to_str().unwrap(), "--code", code.to_str().unwrap()],
    )
    .unwrap();
    assert!(metric(&report, "peak_theta_deg").abs() < 1e-9, "{report}");
}

fn csv_fields(path: &Path) -> Vec<[f64; 4]> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[3], v[4]]
        })
        .collect()
}

#[test]
fn fast_flag_matches_direct_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    ris_in(dir.path(), &["codebook", "--theta0", "25", "--phi0", "30"]).unwrap();
    let code = dir.path().join("code.txt").display().to_string();
    let (direct, fast) = (dir.path().join("direct"), dir.path().join("fast"));
    ris_in(&direct, &["pattern", "--code", &code, "--grid", "uv"]).unwrap();
    ris_in(&fast, &["pattern", "--code", &code, "--fast"]).unwrap();
    let (a, b) = (csv_fields(&direct.join("pattern.csv")), csv_fields(&fast.join("pattern.csv")));
    assert_eq!(a.len(), 2 * 181);
    let peak = a.iter().map(|r| r[2].hypot(r[3])).fold(0.0, f64::max);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x[0], x[1]), (y[0], y[1]));
        assert!((x[2] - y[2]).hypot(x[3] - y[3]) <= 1e-9 * peak);
    }
    let e = ris_in(dir.path(), &["pattern", "--code", &code, "--fast", "--grid", "polar"]).unwrap_err();
    assert_eq!(e.code, 2);
}

#[test]
fn pattern_dimension_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("small.txt");
    fs::write(&code, CodeMatrix::zeros(8, 8).to_string()).unwrap();
    let e = ris_in(dir.path(), &["pattern", "--code", code.to_str().unwrap()]).unwrap_err();
    assert_eq!(e.code, 2);
    assert!(e.message.contains("dimension"), "{}", e.message);
}

#[test]
fn scan_summary_and_scan_loss() {
    let dir = tempfile::tempdir().unwrap();
    let summary = ris_in(dir.path(), &["scan", "--theta", "0,10,45"]).unwrap();
    let rows: Vec<Vec<f64>> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(5).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (row, tol) in rows.iter().zip([2.0, 2.0, 3.0]) {
        assert!((row[2] - row[0]).abs() <= tol, "{row:?}");
    }
    assert!(rows[2][4] <= rows[0][4]);
    assert!(dir.path().join("theta_45.00/pattern.csv").exists());
    assert_eq!(fs::read_to_string(dir.path().join("summary.csv")).unwrap(), summary);

    assert_eq!(ris_in(dir.path(), &["scan"]).unwrap_err().code, 2);
}

#[test]
fn link_calibration_and_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let report = ris_in(dir.path(), &["link", "--calibrate", &data("through_wall.csv")]).unwrap();
    for key in ["wall_loss_db", "system_offset_db", "obs2_residual_with_db", "obs0_pred_gain_db"] {
        metric(&report, key);
    }
    assert!(metric(&report, "wall_loss_db") >= 0.0);

    let scenario = dir.path().join("s.conf");
    fs::write(&scenario, "d1_m = 12\nd2_m = 12\nwall_loss_db = 10\n").unwrap();
    let r = ris_in(dir.path(), &["link", "--scenario", scenario.to_str().unwrap()]).unwrap();
    assert!(!r.contains("near_field_warning"), "{r}");
    let g = metric(&r, "ris_gain_db");
    assert!((g - (metric(&r, "p_with_ris_dbm") - metric(&r, "p_without_ris_dbm"))).abs() < 1e-5);

    let e = ris_in(dir.path(), &["link", "--calibrate", "/nonexistent/obs.csv"]).unwrap_err();
    assert_eq!(e.code, 2);
    fs::write(&scenario, "d1_m = 1\nwarp_factor = 9\n").unwrap();
    let e = ris_in(dir.path(), &["link", "--scenario", scenario.to_str().unwrap()]).unwrap_err();
    assert!(e.code == 2 && e.message.contains("warp_factor"), "{}", e.message);
}

#[test]
fn compile_frame_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ris_in(dir.path(), &["codebook", "--theta0", "45", "--phi0", "90"]).unwrap();
    let code_path = dir.path().join("code.txt");
    let code = CodeMatrix::from_path(&code_path).unwrap();
    let frame_dir = dir.path().join("frame");
    ris_in(&frame_dir, &["compile-frame", code_path.to_str().unwrap()]).unwrap();
    assert_eq!(fs::read(frame_dir.join("frame.bin")).unwrap().len(), 32);
    let back_dir = dir.path().join("back");
    ris_in(
        &back_dir,
        &["compile-frame", "--decompile", frame_dir.join("frame.txt").to_str().unwrap()],
    )
    .unwrap();
    assert_eq!(CodeMatrix::from_path(back_dir.join("code.txt")).unwrap(), code);

    let mut bad = ControlFrame::default();
    bad.set_pin(5, 33, true).unwrap();
    let bad_path = dir.path().join("bad.txt");
    fs::write(&bad_path, bad.to_string()).unwrap();
    let e = ris_in(dir.path(), &["compile-frame", "--decompile", bad_path.to_str().unwrap()]).unwrap_err();
    assert_eq!(e.code, 2);
    assert!(e.message.contains("reserved"), "{}", e.message);
}

#[test]
fn model_selection_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    ris_in(dir.path(), &["codebook", "--theta0", "0"]).unwrap();
    let code = dir.path().join("code.txt").display().to_string();
    let s21 = data("s21_measured.csv");
    let r = ris_in(dir.path(), &["pattern", "--code", &code, "--model", "tabulated", "--s21", &s21]).unwrap();
    assert!(metric(&r, "peak_theta_deg") < 2.0);
    let e = ris_in(dir.path(), &["pattern", "--code", &code, "--model", "tabulated"]).unwrap_err();
    assert!(e.code == 2 && e.message.contains("s21"), "{}", e.message);
    let e = ris_in(dir.path(), &["codebook", "--theta0", "0", "--freq-ghz", "9"]).unwrap_err();
    assert_eq!(e.code, 2);
    assert_eq!(ris(&["frobnicate"]).unwrap_err().code, 2);
    assert_eq!(ris(&["--help"]).unwrap_err().code, 0);
}
