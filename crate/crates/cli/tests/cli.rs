use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cavityspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavityspec"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("CAVITYSPEC_JOBS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = cavityspec(dir, args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

struct Csv {
    manifest: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = std::fs::read_to_string(path).unwrap();
        let manifest: String = text.lines().take_while(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut body = text.lines().skip_while(|l| l.starts_with('#'));
        let columns = body.next().unwrap().split(',').map(String::from).collect();
        let rows = body.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { manifest, columns, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap();
        self.rows.iter().map(|r| r[i].parse().unwrap()).collect()
    }
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fig1_writes_four_densities_with_preset_parameters() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["figures", "fig1"]);
    for ch in ["C", "AC", "A", "Adot"] {
        let csv = Csv::read(&dir.path().join(format!("fig1_{ch}.csv")));
        for line in [
            "# omega_bar_P = 0.01",
            "# nU = 0.1",
            "# U0_mag = 0.001",
            "# N_C = 50000.0",
            "# L_x = 60.0",
            "# L_y = 11.0",
            "# omega_R_Hz = 3560.0",
            "# beta = inf",
        ] {
            assert!(csv.manifest.lines().any(|l| l == line), "{ch}: missing {line}");
        }
        assert_eq!(csv.rows.len(), 2001);
        let omega = csv.column("omega");
        assert!(omega.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn observe_at_zero_pump_leaves_the_cavity_untouched() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["observe", "--sweep", "pump", "--relative", "false", "--start", "0", "--stop", "0", "--points", "1"],
    );
    let csv = Csv::read(&dir.path().join("observe.csv"));
    assert_eq!(csv.rows.len(), 1);
    assert_eq!(csv.column("rel_c"), vec![0.0]);
}

#[test]
fn normalized_axes_reach_one_at_threshold() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "near.toml",
        "[params]\nnU = 0.016\nbeta = 1710.0\nn_max = 2000\n\n[grid]\nsweep = \"pump\"\nrelative = true\nstart = 0.99\nstop = 1.01\npoints = 9\n",
    );
    ok(dir.path(), &["observe", "--config", &config]);
    let csv = Csv::read(&dir.path().join("observe.csv"));
    let x = csv.column("pump_over_cr");
    let x0 = csv.column("pump_over_cr_0");
    let with = csv.column("q_c2");
    let without = csv.column("q_c2_0");
    for i in 0..x.len() {
        if x[i] != 1.0 {
            assert_eq!(with[i].is_finite(), x[i] < 1.0, "row {i}");
        }
        assert_eq!(without[i].is_finite(), x0[i] < 1.0, "row {i}");
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["observe", "--sweep", "nU", "--start", "0.01", "--stop", "0.05", "--points", "6"];
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "1"]);
    ok(a.path(), &args);
    ok(b.path(), &with_jobs);
    assert_eq!(
        std::fs::read(a.path().join("observe.csv")).unwrap(),
        std::fs::read(b.path().join("observe.csv")).unwrap()
    );
}

#[test]
fn manifest_replay_reproduces_the_file() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(a.path(), &["figures", "figS4"]);
    let original = a.path().join("figS4.csv");
    ok(b.path(), &["replay", original.to_str().unwrap()]);
    assert_eq!(std::fs::read(&original).unwrap(), std::fs::read(b.path().join("figS4.csv")).unwrap());
    // the manifest also works as a plain --config
    let c = TempDir::new().unwrap();
    ok(c.path(), &["critical", "--config", original.to_str().unwrap()]);
    assert_eq!(std::fs::read(&original).unwrap(), std::fs::read(c.path().join("figS4.csv")).unwrap());
}

#[test]
fn stokes_shift_grows_linearly_with_interaction() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["figures", "figS4"]);
    let csv = Csv::read(&dir.path().join("figS4.csv"));
    assert_eq!(csv.rows.len(), 20);
    assert!(csv.rows.iter().all(|r| r.last().unwrap() == "ok"));
    let r2: f64 = csv
        .manifest
        .lines()
        .find_map(|l| l.strip_prefix("# fit_r2 = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(r2 > 0.99);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "empty.toml", "[grid]\nvalues = []\n");
    ok(dir.path(), &["critical", "--config", &config]);
    let csv = Csv::read(&dir.path().join("critical.csv"));
    assert!(csv.manifest.contains("# [params]"));
    assert_eq!(csv.columns[0], "nU");
    assert!(csv.rows.is_empty());
}

#[test]
fn json_mirrors_csv() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["kernels", "--points", "5"]);
    ok(dir.path(), &["kernels", "--points", "5", "--format", "json"]);
    let csv = Csv::read(&dir.path().join("kernels.csv"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernels.json")).unwrap()).unwrap();
    assert_eq!(json["columns"].as_array().unwrap().len(), csv.columns.len());
    let xi = csv.column("xi_C");
    for (i, v) in xi.iter().enumerate() {
        assert_eq!(json["rows"][i][1].as_f64().unwrap(), *v);
    }
    assert_eq!(json["manifest"]["params"]["beta"], "inf");
}

#[test]
fn config_errors_exit_with_two_and_json() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("unknown.toml", "[params]\nfoo = 1.0\n", "config"),
        ("section.toml", "[plot]\ncolor = 1\n", "config"),
        ("negative.toml", "[params]\nnU = -0.1\n", "validation"),
        ("cutoff.toml", "[params]\nbeta = 2.0\nir_cutoff = \"none\"\n", "domain"),
    ];
    for (name, text, kind) in cases {
        let config = write_config(dir.path(), name, text);
        let out = cavityspec(dir.path(), &["kernels", "--config", &config]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let stderr = String::from_utf8(out.stderr).unwrap();
        let err: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
        assert_eq!(err["error"]["kind"], kind, "{name}");
        assert_eq!(err["error"]["exit_code"], 2);
    }
    let out = cavityspec(dir.path(), &["spectral", "--channel", "X"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cavityspec(dir.path(), &["figures", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jobs_fall_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cavityspec"))
        .args(["derive", "--out-dir"])
        .arg(dir.path())
        .env("CAVITYSPEC_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn supercritical_rows_are_flagged() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &["observe", "--relative", "false", "--start", "0.05", "--stop", "0.05", "--points", "1"],
    );
    let csv = Csv::read(&dir.path().join("observe.csv"));
    assert_eq!(csv.rows[0].last().unwrap(), "supercritical");
    assert!(csv.column("q_c2")[0].is_nan());
}
