// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command as Process;

use magbell_cli::commands::{
    cmd_crossing, cmd_generate, cmd_purity, cmd_reconstruct, cmd_swap, cmd_sweep_truncation, read_dataset, Context,
};
use magbell_cli::config::{ExperimentConfig, ShotsSetting};
use magbell_core::tomography::{io, QubitRotation};

fn context(dir: &Path, noise: bool) -> Context {
    let mut config = ExperimentConfig::default();
    config.acquisition.noise = noise;
    Context { config, out_dir: dir.to_path_buf(), workers: 1 }
}

#[test]
fn swap_noiseless_frequency_and_start() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_swap(&context(dir.path(), false)).unwrap();
    assert!((report.frequency_mhz() - 11.18).abs() < 0.01 * 11.18, "{}", report.frequency_mhz());
    assert!((report.points[0].1 - 1.0).abs() < 1e-12);
    assert!(report.decay_per_us().abs() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("swap.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 62);
    assert!(dir.path().join("swap.svg").exists());
    assert!(dir.path().join("manifest_swap.json").exists());
}

#[test]
fn swap_noisy_envelope_decays() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_swap(&context(dir.path(), true)).unwrap();
    assert!(report.fit.gamma > 0.0);
    assert!(report.fit.rms < 1e-6);
}

#[test]
fn purity_examples() {
    let dir = tempfile::tempdir().unwrap();
    let clean = cmd_purity(&context(dir.path(), false)).unwrap();
    assert!((clean.min_purity - 0.5).abs() < 1e-3);
    assert!((clean.min_tau - 22.4).abs() < 0.1);
    let full_swap = clean.points.iter().min_by(|a, b| (a.0 - 44.7).abs().total_cmp(&(b.0 - 44.7).abs())).unwrap();
    assert!(full_swap.1 >= 0.999, "{full_swap:?}");

    let noisy = cmd_purity(&context(dir.path(), true)).unwrap();
    assert!((noisy.min_tau - clean.min_tau).abs() <= 3.0, "{} vs {}", noisy.min_tau, clean.min_tau);
    assert!((0.45..=0.55).contains(&noisy.min_purity));
}

#[test]
fn crossing_examples() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_crossing(&context(dir.path(), false)).unwrap();
    assert!((report.min_splitting_mhz - 2.0 * 5.59).abs() < 0.01 * 2.0 * 5.59);
    assert!(report.min_detuning_mhz.abs() < 1e-9);

    let mut ctx = context(dir.path(), false);
    ctx.config.sweeps.crossing_span_mhz = 2000.0;
    let wide = cmd_crossing(&ctx).unwrap();
    let (a, b) = (wide.rows[0], wide.rows[1]);
    // levels in MHz against qubit frequency in GHz
    let slope_lo = (b.1 - a.1) / ((b.0 - a.0) * 1e3);
    let slope_hi = (b.2 - a.2) / ((b.0 - a.0) * 1e3);
    assert!((slope_lo - 0.5).abs() < 1e-3 || (slope_lo + 0.5).abs() < 1e-3);
    assert!((slope_lo + slope_hi).abs() < 2e-3, "{slope_lo} {slope_hi}");
}

#[test]
fn generate_is_deterministic_and_sized() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = cmd_generate(&context(a.path(), true)).unwrap();
    cmd_generate(&context(b.path(), true)).unwrap();
    assert_eq!(ra.records, 11712);
    let da = std::fs::read(a.path().join("dataset.csv")).unwrap();
    let db = std::fs::read(b.path().join("dataset.csv")).unwrap();
    assert_eq!(da, db);
    let records = read_dataset(&a.path().join("dataset.csv")).unwrap();
    assert_eq!(io::write_dataset(&records).into_bytes(), da);
}

#[test]
fn exact_trivial_record_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context(dir.path(), false);
    ctx.config.acquisition.shots = ShotsSetting::Exact;
    // odd lattice so that α = 0 is a grid point
    ctx.config.grid.displacements_per_side = 9;
    ctx.config.grid.displacement_step = 0.2;
    ctx.config.grid.tau_count = 3;
    cmd_generate(&ctx).unwrap();
    let records = read_dataset(&dir.path().join("dataset.csv")).unwrap();
    let origin = records
        .iter()
        .find(|r| r.setting.rotation == QubitRotation::Identity && r.setting.alpha.norm() == 0.0 && r.setting.tau == 0.0)
        .unwrap();
    assert!((origin.e_value - 0.5).abs() < 1e-12);
}

#[test]
fn noiseless_reconstruction_report_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut ctx = context(dir.path(), false);
    ctx.config.acquisition.shots = ShotsSetting::Exact;
    cmd_generate(&ctx).unwrap();
    let report = cmd_reconstruct(&ctx, None).unwrap();
    assert!(report.converged);
    assert!(report.fidelity >= 0.999);
    assert!((report.purity_qubit - 0.5).abs() < 0.01);
    assert!(report.bootstrap.is_none());
    let svg = std::fs::read_to_string(dir.path().join("rho_real.svg")).unwrap();
    let entries = svg.lines().filter(|l| l.starts_with(char::is_numeric)).count();
    assert_eq!(entries, 64, "n <= 3 block holds 8 x 8 entries");
    assert!(svg.contains("stroke-dasharray"));
    let state = std::fs::read_to_string(dir.path().join("state.txt")).unwrap();
    let parsed: magbell_core::DensityMatrix = io::parse_state(&state).unwrap();
    assert_eq!(parsed.matrix(), report.rho_hat.matrix());
}

#[test]
fn truncation_sweep_examples() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_sweep_truncation(&context(dir.path(), false), Some(&[1, 8, 10, 12])).unwrap();
    let row = |n: usize| report.rows.iter().find(|r| r.n_max == n).unwrap();
    assert!(!row(1).sufficient);
    assert!(row(10).sufficient && row(12).sufficient);
    assert!((row(8).bell_fidelity - row(12).bell_fidelity).abs() < 1e-6);
    for w in report.rows.windows(2) {
        assert!(w[1].displaced_norm_error < w[0].displaced_norm_error);
    }
    assert!(row(12).reconstructed_fidelity.unwrap() >= 0.999);
}

fn magbell(args: &[&str], dir: &Path) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_magbell"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("MAGBELL_WORKERS", "2")
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = magbell(&["crossing"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("splitting"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\ncoupling_mhz = -1.0\n").unwrap();
    assert_eq!(magbell(&["--config", bad.to_str().unwrap(), "swap"], dir.path()).status.code(), Some(2));
    assert_eq!(magbell(&["--shots", "none", "swap"], dir.path()).status.code(), Some(2));

    let missing = dir.path().join("missing.csv");
    let out = magbell(&["reconstruct", "--dataset", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));

    let short = dir.path().join("short.toml");
    std::fs::write(&short, "[solver]\nmax_iterations = 3\n[acquisition]\nbootstrap_resamples = 0\n").unwrap();
    let cfg = short.to_str().unwrap();
    assert_eq!(magbell(&["--config", cfg, "--noise", "off", "--shots", "exact", "generate"], dir.path()).status.code(), Some(0));
    let out = magbell(&["--config", cfg, "--noise", "off", "reconstruct"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("state.txt").exists(), "results are written before reporting non-convergence");

    let bad_workers = Process::new(env!("CARGO_BIN_EXE_magbell"))
        .args(["crossing", "--out"])
        .arg(dir.path())
        .env("MAGBELL_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(bad_workers.status.code(), Some(2));
}

#[test]
fn manifest_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = magbell(&["--seed", "42", "crossing"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("manifest_crossing.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["seed"], 42);
    assert_eq!(json["workers"], 2);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["outputs"].as_array().unwrap().iter().any(|p| p.as_str().unwrap().ends_with("crossing.csv")));
    assert!(json["started"].as_str().unwrap().ends_with('Z'));
}
