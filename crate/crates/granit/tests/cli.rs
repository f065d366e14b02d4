use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn granit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_granit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GRANIT_WORKERS")
        .output()
        .expect("binary runs")
}

fn report_value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

fn number(text: &str, key: &str) -> f64 {
    report_value(text, key)
        .unwrap_or_else(|| panic!("{key} missing in\n{text}"))
        .parse()
        .unwrap()
}

/// A cheap resonance setup around the two peaks.
const COARSE: &[&str] = &[
    "--set",
    "resonance.f_min_hz=105",
    "--set",
    "resonance.f_max_hz=150",
    "--set",
    "resonance.f_step_hz=1",
    "--set",
    "resonance.phase_samples=8",
    "--set",
    "velocity.nodes=8",
];

#[test]
fn eigen_reports_the_spectrum() {
    let dir = TempDir::new().unwrap();
    let out = granit(&["eigen"], dir.path());
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("eigen_report.txt")).unwrap();
    assert!((number(&report, "z0_um") - 5.87).abs() < 0.01);
    assert!((number(&report, "beta_needed_21_Tpm") - 0.22).abs() < 0.01);
    assert!((number(&report, "f21_Hz") - 254.62).abs() < 0.01);
    let csv = std::fs::read_to_string(dir.path().join("eigen_transitions.csv")).unwrap();
    assert!(csv.starts_with("n,m,f_Hz,z_nm_um,beta_needed_Tpm\n"));
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[array]\nside_mm = 1.0\ncurrents_a = [1, 2\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = granit(&["eigen", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    for args in [
        vec!["fieldmap", "--set", "fieldmap.points=1"],
        vec!["adiabaticity", "--set", "adiabaticity.frequencies_hz=[]"],
        vec!["resonance", "--set", "resonance.f_step_hz=-1"],
        vec!["resonance", "--set", "unknown.key=1"],
        vec!["eigen", "--workers", "0"],
        vec!["eigen", "--format", "xml"],
        vec!["frobnicate"],
        vec!["eigen", "--config", "/nonexistent/granit.toml"],
    ] {
        let out = granit(&args, &out_dir);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out_dir.exists(), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_granit"))
        .args(["eigen", "--out"])
        .arg(&out_dir)
        .env("GRANIT_WORKERS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn benchmark_config_file_matches_defaults() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper-benchmark.toml");
    let file = granit::RunConfig::load(&root).unwrap();
    file.validate().unwrap();
    let default = granit::RunConfig::default();
    assert_eq!(file.constants(), default.constants());
    assert_eq!(file.wire_array(), default.wire_array());
    assert_eq!(file.explicit_excitation(), default.explicit_excitation());
    assert_eq!(file.adiabaticity_scan().unwrap(), default.adiabaticity_scan().unwrap());
    let e = default.explicit_excitation().unwrap();
    assert_eq!(file.resonance_setup(e).unwrap(), default.resonance_setup(e).unwrap());
    assert_eq!(file.fieldmap, default.fieldmap);
    assert_eq!(file.bouncer, default.bouncer);
}

#[test]
fn fieldmap_csv_and_json_agree() {
    let dir = TempDir::new().unwrap();
    assert!(granit(&["fieldmap"], dir.path()).status.success());
    assert!(granit(&["fieldmap", "--format", "json"], dir.path()).status.success());
    let csv = std::fs::read_to_string(dir.path().join("fieldmap.csv")).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fieldmap.json")).unwrap())
            .unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x_mm,Bx_mT,Bz_mT,dBxdz_Tpm,dBzdz_Tpm,gradAbsB_Tpm"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1601);
    assert_eq!(json.as_array().unwrap().len(), 1601);
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(json[0]["x_mm"].as_f64().unwrap(), first[0]);
    assert_eq!(json[0]["gradAbsB_Tpm"].as_f64().unwrap(), first[5]);
    let report = std::fs::read_to_string(dir.path().join("fieldmap_report.txt")).unwrap();
    assert!((number(&report, "mean_gradient_Tpm") - 0.52).abs() <= 0.02);
}

#[test]
fn dc_mode_gradient_alternates() {
    let dir = TempDir::new().unwrap();
    let out = granit(&["fieldmap", "--set", "array.external_field_mt=[1.5, 0, 1.5]"], dir.path());
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("fieldmap_report.txt")).unwrap();
    assert!((number(&report, "zero_crossing_spacing_mm") - 5.0).abs() <= 0.5);
}

#[test]
fn adiabaticity_trace_mode() {
    let dir = TempDir::new().unwrap();
    let out = granit(
        &[
            "adiabaticity",
            "--set",
            "adiabaticity.trace={ f_hz = 150.0, b0y_mt = 0.3, velocity_mps = 4.0 }",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("adiabaticity_trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t_s,Px,Py,Pz,p");
    assert!(lines.next().unwrap().ends_with(",0"));
    let report = std::fs::read_to_string(dir.path().join("adiabaticity_report.txt")).unwrap();
    assert!(number(&report, "p_max") < 0.01);
    let t_end: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((t_end - 0.04).abs() < 1e-12);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["resonance", "--set", "resonance.f_step_hz=3"];
    args.extend_from_slice(COARSE);
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let sub = dir.path().join(workers);
        let mut a = args.clone();
        a.extend(["--workers", workers]);
        assert!(granit(&a, &sub).status.success());
        files.push((
            std::fs::read(sub.join("resonance.csv")).unwrap(),
            std::fs::read(sub.join("resonance_report.txt")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);

    let mut scans = Vec::new();
    for workers in ["1", "4"] {
        let sub = dir.path().join(format!("a{workers}"));
        let out = granit(
            &[
                "adiabaticity",
                "--set",
                "adiabaticity.frequencies_hz=[0, 150, 300]",
                "--set",
                "velocity.nodes=3",
                "--set",
                "adiabaticity.phase_samples=4",
                "--workers",
                workers,
            ],
            &sub,
        );
        assert!(out.status.success());
        scans.push(std::fs::read(sub.join("adiabaticity.csv")).unwrap());
    }
    assert_eq!(scans[0], scans[1]);
}

#[test]
fn null_excitation_reports_no_peak() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["resonance", "--set", "excitation.beta_hat_tpm=0"];
    args.extend_from_slice(COARSE);
    let out = granit(&args, dir.path());
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("resonance_report.txt")).unwrap();
    assert_eq!(report_value(&report, "status").as_deref(), Some("no_peak"));
    let csv = std::fs::read_to_string(dir.path().join("resonance.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(p.abs() <= 1e-9);
    }
}

#[test]
fn derived_excitation_agrees_with_explicit_parameters() {
    let dir = TempDir::new().unwrap();
    let run = |extra: &[&str], sub: &str| {
        let mut args = vec!["resonance"];
        args.extend_from_slice(COARSE);
        args.extend_from_slice(extra);
        let out = granit(&args, &dir.path().join(sub));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(dir.path().join(sub).join("resonance_report.txt")).unwrap()
    };
    let explicit = run(&[], "explicit");
    let derived = run(&["--set", "excitation.derive_from_array=true"], "derived");
    assert_eq!(report_value(&derived, "derived_from_array").as_deref(), Some("true"));
    assert!((number(&derived, "beta_hat_Tpm") - 0.52).abs() < 0.02);
    assert!((number(&derived, "b1_mT") - 0.8).abs() < 0.1);
    for key in ["f_plus", "f_minus"] {
        let (a, b) = (number(&explicit, key), number(&derived, key));
        assert!((a - b).abs() < 2.0, "{key}: {a} vs {b}");
    }
}
