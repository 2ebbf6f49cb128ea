use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ftrlab_cli::experiments::omega_nodes;
use ftrlab_core::lattice::symbol_omega;

fn ftrlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftrlab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

/// Data rows of a results file as string fields, header first.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn omega_table_matches_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.cfg", "experiment = omega-table\n[omega-table]\nnodes = 5\n");
    let out = ftrlab(dir.path(), &["omega-table", "--config", &cfg, "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("o/results.csv")).unwrap();
    assert!(text.starts_with("# schema=1\n"));
    let table = rows(&dir.path().join("o/results.csv"));
    assert_eq!(table[0], ["run_id", "xi1", "xi2", "omega"]);
    assert_eq!(table.len(), 6);
    for (row, xi) in table[1..].iter().zip(omega_nodes(5)) {
        assert_eq!(row[1].parse::<f64>().unwrap(), xi);
        assert_eq!(row[3].parse::<f64>().unwrap(), symbol_omega(&[xi]).unwrap());
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["nodes"], "5");
    assert_eq!(manifest["run_id"].as_str().unwrap(), table[1][0]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.cfg",
        "experiment = dnls-solve\nseed = 9\n[dnls-solve]\ninitial = random\namplitude = 0.3\nradius = 12\nhorizon = 2\nsteps = 200\n",
    );
    let digest = |out: &str| {
        let o = ftrlab(dir.path(), &["dnls-solve", "--config", &cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(out).join("manifest.json")).unwrap()).unwrap();
        (m["outputs"][0]["sha256"].as_str().unwrap().to_string(), fs::read(dir.path().join(out).join("results.csv")).unwrap())
    };
    let (a, b) = (digest("a"), digest("b"));
    assert_eq!(a, b);
}

#[test]
fn seed_flag_changes_run_id() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.cfg", "experiment = extend\n[extend]\ndensity = random-signs\npoints = 4\n");
    let id = |seed: &str, out: &str| {
        let o = ftrlab(dir.path(), &["extend", "--config", &cfg, "--seed", seed, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        rows(&dir.path().join(out).join("results.csv"))[1][0].clone()
    };
    assert_ne!(id("1", "a"), id("2", "b"));
    assert_eq!(id("1", "a"), id("1", "c"));
}

#[test]
fn restriction_scan_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.cfg",
        "experiment = restriction-scan\nseed = 3\n[restriction-scan]\ngeometry = curve\np = 5\nradii = 16, 64, 256\nfamilies = constant, knapp\n",
    );
    let out = ftrlab(dir.path(), &["restriction-scan", "--config", &cfg, "--out", "r"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&dir.path().join("r/results.csv"));
    let kinds: Vec<&str> = table[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(kinds, ["estimate", "estimate", "estimate", "fit"]);
    let radii: Vec<f64> = table[1..4].iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(radii, [16.0, 64.0, 256.0]);
    assert!(table[4][8].parse::<f64>().unwrap().is_finite());
}

#[test]
fn validate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.cfg", "");
    let o = ftrlab(dir.path(), &["validate", "--config", &empty]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("required keys"));

    let minimal = write(dir.path(), "min.cfg", "experiment = decay-fit\n");
    let o = ftrlab(dir.path(), &["validate", "--config", &minimal]);
    assert_eq!(o.status.code(), Some(0));
    let listing = String::from_utf8_lossy(&o.stdout);
    assert!(listing.contains("[decay-fit]"));
    assert!(listing.lines().any(|l| l.starts_with("t1 = 200") && l.ends_with("# default")));

    let typo = write(dir.path(), "typo.cfg", "experiment = dnls-solve\n\n[dnls-solve]\nalpha_ = 3\n");
    let o = ftrlab(dir.path(), &["validate", "--config", &typo]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4, column 1") && err.contains("did you mean `alpha`"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // invalid value: line-numbered, exit 1
    let bad = write(dir.path(), "bad.cfg", "experiment = omega-table\n[omega-table]\nnodes = many\n");
    let o = ftrlab(dir.path(), &["omega-table", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    // window too small for the requested FFT grid: resolution error, exit 2
    let coarse = write(dir.path(), "c.cfg", "experiment = propagate\n[propagate]\nradius = 40\nmodes = 64\ntimes = 5\n");
    let o = ftrlab(dir.path(), &["propagate", "--config", &coarse, "--out", "c"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    // short horizon: the scattering tail cannot fall below the tolerance
    let short = write(dir.path(), "s.cfg", "experiment = scatter\n[scatter]\nradius = 40\nhorizon = 2\nsteps = 200\ntail_tolerance = 1e-12\n");
    let o = ftrlab(dir.path(), &["scatter", "--config", &short, "--out", "s"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "inconclusive");

    let o = ftrlab(dir.path(), &["omega-tabel", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega-table"));

    let ok = write(dir.path(), "ok.cfg", "experiment = omega-table\n");
    let threads = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_ftrlab"))
            .current_dir(dir.path())
            .env("FTRLAB_THREADS", n)
            .args(["omega-table", "--config", &ok, "--out", "t"])
            .output()
            .unwrap()
    };
    assert_eq!(threads("zero").status.code(), Some(1));
    assert_eq!(threads("3").status.code(), Some(0));
}
