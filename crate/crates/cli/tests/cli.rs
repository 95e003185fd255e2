//! End-to-end checks of the `fvlim` binary: exit codes, output files, and
//! format round trips.

use std::fs;
use std::process::Command;

fn fvlim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fvlim"))
}

#[test]
fn run_subcommand_writes_report_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    fs::write(
        &config,
        "problem=composite_1d scheme=aPrioriMPP p=2 integrator=SSPRK3 N=64 t_end=1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = fvlim()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--snapshot-times", "0.5"])
        .status()
        .unwrap();
    assert!(status.success());

    let report_path = out.join("composite_1d_aPrioriMPP_p2_SSPRK3_N64_report.json");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["scheme"], "aPrioriMPP");
    assert_eq!(report["N"], 64);
    assert!(report["delta"].as_f64().unwrap() > -1e-10);
    assert!(report["e1"].as_f64().is_some());

    assert!(out.join("composite_1d_aPrioriMPP_p2_SSPRK3_N64_t0.5.csv").exists());
    assert!(out.join("composite_1d_aPrioriMPP_p2_SSPRK3_N64_final.csv").exists());

    // every file referenced by the manifest exists
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for path in outputs {
        assert!(
            std::path::Path::new(path.as_str().unwrap()).exists(),
            "missing {path}"
        );
    }
}

#[test]
fn invalid_configuration_fails_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(
        &config,
        "problem=composite_1d scheme=aPosteriori fallback=pp p=2 integrator=SSPRK3 N=64 t_end=1\n",
    )
    .unwrap();
    let output = fvlim()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("PP"), "stderr: {stderr}");
}

#[test]
fn stability_subcommand_emits_track_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = fvlim()
        .args(["stability", "--samples", "64", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let track = out.join("stability/ssprk3_L2.csv");
    let text = fs::read_to_string(&track).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,re_z,im_z,abs_r");
    assert_eq!(text.lines().count(), 66); // header + 65 samples
    // first sample is k = 0, |R| = 1
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"), "{first}");
    assert!(first.ends_with(",1"), "{first}");
}

#[test]
fn dump_stencils_prints_exact_fractions() {
    let output = fvlim().args(["dump-stencils", "--p", "2"]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("1/3"), "{stdout}");
    assert!(stdout.contains("13/12"), "{stdout}");
    assert!(stdout.contains("11/12"), "{stdout}");
    assert!(stdout.contains("C_MPP = 0.16666666666666666"), "{stdout}");
}

#[test]
fn violations_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("v.cfg");
    fs::write(
        &config,
        "problem=composite_1d scheme=aPosterioriB p=2 integrator=SSPRK3 N=64 t_end=1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = fvlim()
        .args(["violations", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("violations_composite_1d.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "problem,scheme,p,integrator,N,delta_minus,delta_plus,delta,approximately_mpp"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("composite_1d,aPosterioriB,2,SSPRK3,64,"), "{row}");
}
