use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn flatcap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatcap"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn single_mode_curve_hits_the_marginal_value() {
    let d = tempfile::tempdir().unwrap();
    let o = flatcap(d.path(), &["curves", "--mode", "5,1", "--gamma0", "0.5", "--gamma-end", "0.5", "--samples", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("curve_m5_n1.csv"));
    assert_eq!(r.len(), 1);
    assert!((r[0][2] - 76.5198).abs() < 5e-4, "A = {}", r[0][2]);
}

#[test]
fn default_region_has_six_curves() {
    let d = tempfile::tempdir().unwrap();
    assert!(flatcap(d.path(), &["curves"]).status.success());
    let m = manifest(d.path());
    let files = m["outputs"].as_array().unwrap();
    assert_eq!(files.len(), 6);
    for f in files {
        assert!(d.path().join(f.as_str().unwrap()).exists());
    }
}

#[test]
fn bad_input_exits_with_code_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(flatcap(d.path(), &["curves", "--mode", ""]).status.code(), Some(2));
    assert_eq!(flatcap(d.path(), &["nf", "--epsilon", "0"]).status.code(), Some(2));
    assert_eq!(flatcap(d.path(), &["sim", "--grid", "10,10"]).status.code(), Some(2));
    assert_eq!(flatcap(d.path(), &["converge", "--resolutions", "12,16"]).status.code(), Some(2));
    assert!(!d.path().join("manifest.json").exists());
}

#[test]
fn nf_sweep_writes_four_trajectories_and_a_branch() {
    let d = tempfile::tempdir().unwrap();
    assert!(flatcap(d.path(), &["nf", "--preset", "fig4"]).status.success());
    for eps in ["3e-8", "1e-7", "3e-7", "1e-6"] {
        let r = rows(&d.path().join(format!("nf_eps_{eps}.csv")));
        assert!(r.len() > 100);
        assert_eq!(r[0][3], 0.002305);
    }
    let branch = rows(&d.path().join("nf_branch.csv"));
    assert_eq!(branch.first().unwrap()[1], 0.0);
    assert!(branch.last().unwrap()[1] > 0.0);
}

#[test]
fn doubled_table_reports_small_refinement_changes() {
    let d = tempfile::tempdir().unwrap();
    assert!(flatcap(d.path(), &["nf", "--samples", "72"]).status.success());
    let r = manifest(d.path())["results"]["refinement"].clone();
    assert!(r["max_rel_d_x_end"].as_f64().unwrap() < 1e-4, "{r}");
    assert!(r["max_rel_d_c0"].as_f64().unwrap() < 1e-6, "{r}");
    assert!(d.path().join("nf_refinement.csv").exists());
}

#[test]
fn runs_are_reproducible_from_their_manifest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let args = ["sim", "--grid", "16,12", "--gamma-end", "0.4910", "--epsilon", "1e-5", "--ic", "noise", "--seed", "7"];
    assert!(flatcap(a.path(), &args).status.success());
    assert!(flatcap(b.path(), &args).status.success());
    let cfg = a.path().join("manifest.json");
    assert!(flatcap(c.path(), &["sim", "--config", cfg.to_str().unwrap()]).status.success());
    for f in manifest(a.path())["outputs"].as_array().unwrap() {
        let f = f.as_str().unwrap();
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        assert_eq!(x, std::fs::read(c.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn snapshot_projection_recovers_the_series() {
    let d = tempfile::tempdir().unwrap();
    assert!(flatcap(d.path(), &["sim", "--grid", "24,20", "--gamma-end", "0.4910", "--epsilon", "1e-5"]).status.success());
    let series = rows(&d.path().join("series.csv"));
    let p = tempfile::tempdir().unwrap();
    let snap = d.path().join("snapshot_final.csv");
    assert!(flatcap(p.path(), &["project", "--input", snap.to_str().unwrap()]).status.success());
    let x = manifest(p.path())["results"]["x"].as_f64().unwrap();
    assert_eq!(x, series.last().unwrap()[3]);
}

#[test]
fn eigen_reports_the_critical_growth_rate() {
    let d = tempfile::tempdir().unwrap();
    assert!(flatcap(d.path(), &["eigen"]).status.success());
    let r = rows(&d.path().join("eigen.csv"));
    assert!(r[0][8].abs() < 1e-4);
    let profile = rows(&d.path().join("eigen_m5_n1.csv"));
    assert!(profile.last().unwrap()[2].abs() < 1e-8 * r[0][6]);
}
