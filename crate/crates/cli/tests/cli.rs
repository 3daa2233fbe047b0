use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn optovib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optovib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_config(dir: &Path, out: &Path, extra: &str) -> String {
    write_config(
        dir,
        &format!(
            r#"{{"x_max": 12.0, "n_points": 4001, "k": 12, "indices": [0, 1, 2], "stride": 20,
                "out": {:?}, "formats": ["csv", "json", "svg"]{extra}}}"#,
            out.to_str().unwrap()
        ),
    )
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or_default().to_string()
}

#[test]
fn spectrum_writes_datasets_with_exact_headers() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(tmp.path(), &out, "");
    let o = optovib(&["spectrum", "--config", &cfg, "--mode", "full"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        header(&out.join("eigenvalues.csv")),
        "index,re_E_over_omega,im_E_over_omega,centroid,pr,localized,pair_id,pt_broken"
    );
    assert_eq!(header(&out.join("eigenvectors.csv")), "x,psi2_0,psi2_1,psi2_2");
    assert_eq!(header(&out.join("potential.csv")), "x,re_V_over_omega,im_V_over_omega");
    for name in ["spectrum.json", "spectrum.svg", "run-metadata.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let text = fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 13);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // 17 significant digits in scientific notation
    assert_eq!(first[1].split('e').next().unwrap().trim_start_matches('-').len(), 18);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(tmp.path(), &out, "");
    let read_all = || {
        let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        names.into_iter().map(|p| (p.clone(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    assert!(optovib(&["spectrum", "--config", &cfg]).status.success());
    let first = read_all();
    assert!(optovib(&["spectrum", "--config", &cfg]).status.success());
    assert_eq!(first, read_all());
}

#[test]
fn run_metadata_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(tmp.path(), &out, r#", "eta": 1.7"#);
    assert!(optovib(&["spectrum", "--config", &cfg, "--gamma0", "2.5", "--branch", "minus"]).status.success());
    let before = fs::read(out.join("eigenvalues.csv")).unwrap();
    let meta_copy = tmp.path().join("meta.json");
    fs::copy(out.join("run-metadata.json"), &meta_copy).unwrap();
    fs::remove_dir_all(&out).unwrap();
    let o = optovib(&["spectrum", "--config", meta_copy.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(before, fs::read(out.join("eigenvalues.csv")).unwrap());
    assert_eq!(fs::read(&meta_copy).unwrap(), fs::read(out.join("run-metadata.json")).unwrap());
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), &format!(r#"{{"gama0": 2.0, "out": {:?}}}"#, out.to_str().unwrap()));
    let o = optovib(&["spectrum", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    assert!(!out.exists());
}

#[test]
fn coarse_grid_is_rejected_before_any_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = optovib(&["spectrum", "--eta", "3", "--n-points", "201", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid too coarse"));
    assert!(!out.exists());
}

#[test]
fn invalid_parameters_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = optovib(&["thresholds", "--gamma0", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn thresholds_without_coupling_are_a_solver_error() {
    let tmp = TempDir::new().unwrap();
    let o = optovib(&["thresholds", "--gamma0", "0", "--out", tmp.path().join("run").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("thresholds"));
}

#[test]
fn thresholds_table() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = optovib(&["thresholds", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("thresholds.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,A_n,eta_n,E_n,approx_eta_n,approx_E_n");
    let row0: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row0[2], 0.5);
    assert!((row0[3] - 4.0).abs() < 1e-12);
    let row1: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row1[2] - 1.395).abs() < 5e-3);
    assert!(out.join("thresholds.json").exists());
}

#[test]
fn sweep_records_tracks_and_failures() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(
        tmp.path(),
        &out,
        r#", "k": 20, "eta_list": [2.0, 1.0, 1.5, 2.5, 3.0, 1.8]"#,
    );
    let o = optovib(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        header(&out.join("sweep.csv")),
        "eta,mode_index,re_E,im_E,centroid,pr,localized,pair_id"
    );
    assert_eq!(header(&out.join("tracks.csv")), "n,eta,E,fit_E,Ebar_n");
    assert_eq!(header(&out.join("failures.csv")), "eta,error");
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 6 * 20);
    // couplings are emitted in ascending order
    let etas: Vec<f64> = sweep.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(etas.windows(2).all(|w| w[0] <= w[1]));
    assert!(out.join("sweep.svg").exists());
}

#[test]
fn phasemap_lattice() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(
        tmp.path(),
        &out,
        r#", "eta_start": 1.0, "eta_stop": 2.0, "eta_points": 5, "energy_min": -5.0, "energy_max": 20.0, "energy_points": 7"#,
    );
    let o = optovib(&["phasemap", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("phasemap.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "eta,E,frac_n,masked");
    assert_eq!(text.lines().count(), 1 + 35);
    // E = -5 lies below the potential minimum everywhere
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2], "NaN");
    assert_eq!(first[3], "true");
    assert_eq!(header(&out.join("ridges.csv")), "eta,E,kind,jump");
    assert!(out.join("heatmap.svg").exists());
}

#[test]
fn small_fock_basis_fails_validation_with_truncation_diagnosis() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let cfg = small_config(tmp.path(), &out, r#", "fock_n_max": 20, "eta": 3.0"#);
    let o = optovib(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("validate.json")).unwrap()).unwrap();
    let oracle = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "oracle_equivalence")
        .unwrap();
    assert_eq!(oracle["passed"], false);
    assert!(oracle["detail"].as_str().unwrap().contains("truncation"));
}

#[test]
fn default_validation_passes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    let o = optovib(&["validate", "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(out.join("validate.json").exists());
}
