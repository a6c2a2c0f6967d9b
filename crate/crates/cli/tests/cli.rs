use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qedft_maps_cli::config;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qedft-maps"));
    for (k, _) in std::env::vars() {
        if k.starts_with(config::ENV_PREFIX) {
            c.env_remove(k);
        }
    }
    c
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn example_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn run(cmd: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let dir = out.parent().unwrap();
    let path = dir.join(format!("{}.toml", out.file_name().unwrap().to_string_lossy()));
    std::fs::write(&path, cfg).unwrap();
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap()
}

const ONE_ELECTRON: &str = "[model]\nn_sites = 2\nn_up = 1\nn_down = 0\n";

/// Every leaf and table key of a TOML document, as paths.
fn key_paths(t: &toml::Table, prefix: &[String], out: &mut Vec<Vec<String>>) {
    for (k, v) in t {
        let mut p = prefix.to_vec();
        p.push(k.clone());
        if let toml::Value::Table(inner) = v {
            key_paths(inner, &p, out);
        }
        out.push(p);
    }
}

fn rename(t: &mut toml::Table, path: &[String], to: &str) {
    if path.len() == 1 {
        let v = t.remove(&path[0]).unwrap();
        t.insert(to.to_string(), v);
    } else {
        rename(t[&path[0]].as_table_mut().unwrap(), &path[1..], to);
    }
}

#[test]
fn example_configs_validate() {
    let files = example_configs();
    assert!(files.len() >= 6);
    for f in files {
        config::load(&f, &[]).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn mutated_keys_are_named_in_diagnostics() {
    for f in example_configs() {
        let doc: toml::Table = std::fs::read_to_string(&f).unwrap().parse().unwrap();
        let mut paths = Vec::new();
        key_paths(&doc, &[], &mut paths);
        for path in paths {
            let typo = format!("{}x", path.last().unwrap());
            let mut bad = doc.clone();
            rename(&mut bad, &path, &typo);
            let text = toml::to_string(&bad).unwrap();
            let err = config::parse(&text, &[]).expect_err(&format!("{}: {path:?} renamed", f.display()));
            assert!(err.0.contains(&typo), "{}: {path:?}: {err}", f.display());
        }
    }
}

#[test]
fn sweep_writes_full_grid_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let cfg = format!("{ONE_ELECTRON}[grid]\nv = {{ min = -2.0, max = 2.0, n = 7 }}\nj = {{ min = -3.0, max = 3.0, n = 5 }}\n");
    let o = run("sweep", &cfg, &out, &["--emit-plots"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("map.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7 * 5 + 1);
    assert_eq!(lines[0], qedft_maps::maps::MAP_HEADER.join(","));

    // At λ = 0 the dipole ignores the drive.
    let d: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    for row in d.chunks(5) {
        assert!(row.iter().all(|x| x == &row[0]), "{row:?}");
    }

    let m = manifest(&out);
    assert_eq!(m["command"], "sweep");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["status"]["points"], 35);
    assert_eq!(m["config"]["model"]["n_up"], 1);
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["map.csv", "plot_map.gp"]);
    for f in files {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"], bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    // Only emitted files and the manifest live in the directory.
    let on_disk = std::fs::read_dir(&out).unwrap().count();
    assert_eq!(on_disk, files.len() + 1);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            "sweep",
            "[model]\nn_sites = 2\nn_up = 1\nn_down = 1\nu0 = 5.0\nlambda = 1.0\n[grid]\nv = { min = -3.0, max = 3.0, n = 9 }\nj = { min = -2.0, max = 2.0, n = 5 }\n",
            "map.csv",
        ),
        (
            "mf-compare",
            "[model]\nn_sites = 2\nn_up = 1\nn_down = 1\nu0 = 5.0\nlambda = 2.0\n[grid]\nv = { min = -3.0, max = 3.0, n = 9 }\nj = { min = -1.0, max = 1.0, n = 3 }\n",
            "diff.csv",
        ),
        (
            "xc-map",
            "[model]\nn_sites = 2\nn_up = 1\nn_down = 0\nlambda = 1.0\n[xc]\nd = { min = -0.8, max = 0.8, n = 9 }\nq = { min = -1.0, max = 1.0, n = 3 }\n",
            "xc.csv",
        ),
    ];
    for (cmd, cfg, file) in cases {
        let a = tmp.path().join(format!("{cmd}-1"));
        let b = tmp.path().join(format!("{cmd}-8"));
        let c = tmp.path().join(format!("{cmd}-8-again"));
        assert_eq!(run(cmd, cfg, &a, &["--workers", "1"]).status.code(), Some(0));
        assert_eq!(run(cmd, cfg, &b, &["--workers", "8"]).status.code(), Some(0));
        assert_eq!(run(cmd, cfg, &c, &["--workers", "8"]).status.code(), Some(0));
        let fa = std::fs::read(a.join(file)).unwrap();
        assert_eq!(fa, std::fs::read(b.join(file)).unwrap(), "{cmd}: 1 vs 8 workers");
        assert_eq!(fa, std::fs::read(c.join(file)).unwrap(), "{cmd}: rerun");
        assert_eq!(manifest(&b)["workers"], 8);
    }
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let o = run("sweep", &format!("{ONE_ELECTRON}lambdaa = 1.0\n"), &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lambdaa") && err.contains("line"), "{err}");
    assert!(!out.exists(), "no output for invalid configs");

    let o = run("sweep", &format!("{ONE_ELECTRON}[grid.v]\nmin = 1.0\nmax = -1.0\nn = 3\n"), &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.v"));

    let o = run("invert", ONE_ELECTRON, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invert.d"));
    assert!(!out.exists());
}

#[test]
fn unattainable_targets_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("xc");
    let cfg = format!("{ONE_ELECTRON}lambda = 0.5\n[xc]\nd = {{ min = -1.2, max = 0.0, n = 3 }}\nq = {{ min = 0.0, max = 0.0, n = 1 }}\n");
    let o = run("xc-map", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("xc.csv")).unwrap();
    let status: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(status, ["unattainable", "ok", "ok"]);
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 2);
    assert_eq!(m["status"]["unattainable"], 1);
}

#[test]
fn unwritable_output_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = tmp.path().join("ok.toml");
    std::fs::write(&cfg, ONE_ELECTRON).unwrap();
    let o = bin()
        .args(["convergence", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn environment_overrides_config_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env");
    let path = tmp.path().join("env.toml");
    std::fs::write(&path, ONE_ELECTRON).unwrap();
    let o = bin()
        .args(["convergence", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .env("QEDFT_MAPS_MODEL__LAMBDA", "1.5")
        .env("QEDFT_MAPS_MODEL__J_EXT", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["model"]["lambda"], 1.5);
    assert_eq!(m["config"]["model"]["j_ext"], 3.0);
    assert_eq!(m["env_overrides"].as_array().unwrap().len(), 2);

    let o = bin()
        .args(["convergence", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .env("QEDFT_MAPS_MODEL__LAMBADA", "1.5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambada"));
}

#[test]
fn polarizability_and_inversion_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("pol");
    let cfg = "[model]\nn_sites = 2\nn_up = 1\nn_down = 0\n[polarizability]\nv = { min = -3.0, max = 3.0, n = 61 }\n";
    assert_eq!(run("polarizability", cfg, &out, &[]).status.code(), Some(0));
    let peaks: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("peaks.json")).unwrap()).unwrap();
    // One electron on two sites: |α| ∝ (ṽ² + t0²)^(−3/2) has a single peak at ṽ = 0.
    let p = peaks["peaks"].as_array().unwrap();
    assert_eq!(p.len(), 1);
    assert!(p[0]["v_tilde"].as_f64().unwrap().abs() < 1e-12);
    assert!(peaks["integral_defect"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(std::fs::read_to_string(out.join("profile.csv")).unwrap().lines().count(), 62);

    let out = tmp.path().join("inv");
    let cfg = format!("{ONE_ELECTRON}lambda = 1.0\n[invert]\nd = [0.3, -0.6]\nq = [0.0, 0.4]\n");
    assert_eq!(run("invert", &cfg, &out, &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("inversion.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let residual: f64 = f[6].parse().unwrap();
        assert!(residual.abs() < 1e-9, "{line}");
        assert_eq!(f[9], "ok");
    }
}

#[test]
fn book_config_example_validates() {
    let md = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../book/src/cli.md")).unwrap();
    let start = md.find("```toml\n").unwrap() + 8;
    let len = md[start..].find("```").unwrap();
    config::parse(&md[start..start + len], &[]).unwrap();
}
