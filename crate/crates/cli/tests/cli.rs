//! End-to-end tests of the `kfv` binary: exit codes, artifact layout,
//! determinism across reruns, and the stability of every printed format.

use std::path::Path;
use std::process::{Command, Output};

fn kfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kfv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, out_dir: &Path) -> std::path::PathBuf {
    let path = dir.join("kh.cfg");
    let text = format!(
        "# tiny shear-layer ladder\n\
         benchmark = kelvin_helmholtz\n\
         scheme = flm\n\
         levels = 8,16\n\
         t_end = 0.05\n\
         snapshot_times = 0.02\n\
         out_dir = {}\n",
        out_dir.display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_produces_artifacts_and_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let config = write_config(tmp.path(), &out_a);

    let out = kfv(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("wrote ").count(), 5, "{text}");
    assert!(text.contains("completed 2 levels"), "{text}");
    assert!(out_a.join("table_density.csv").is_file());
    assert!(out_a.join("level_0008/snap_001_t0.050000.eulf").is_file());

    // Same config and seed, different directory: byte-identical tables.
    let out_b = tmp.path().join("b");
    let out = kfv(&[
        "run",
        config.to_str().unwrap(),
        &format!("--out_dir={}", out_b.display()),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    for name in [
        "table_density.csv",
        "table_momentum_x.csv",
        "table_momentum_y.csv",
        "table_total_entropy.csv",
        "table_total_energy.csv",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // A changed seed still succeeds and the command line wins over the file.
    let out_c = tmp.path().join("c");
    let out = kfv(&[
        "run",
        config.to_str().unwrap(),
        &format!("--out_dir={}", out_c.display()),
        "--seed=7",
        "--levels=8",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(out_c.join("level_0008").is_dir());
    assert!(!out_c.join("level_0016").exists());
}

#[test]
fn run_usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();

    // Missing config file: exit 2 and the path appears in the message.
    let missing = tmp.path().join("nope.cfg");
    let out = kfv(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nope.cfg"), "{}", stderr(&out));

    let config = write_config(tmp.path(), &tmp.path().join("x"));

    // Unknown override key.
    let out = kfv(&["run", config.to_str().unwrap(), "--colour=blue"]);
    assert_eq!(out.status.code(), Some(2));

    // Malformed override.
    let out = kfv(&["run", config.to_str().unwrap(), "--seed"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--key=value"), "{}", stderr(&out));

    // Invalid value caught by config validation (non-doubling ladder).
    let out = kfv(&["run", config.to_str().unwrap(), "--levels=8,24"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown subcommand is a clap usage error.
    let out = kfv(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reproduces_the_run_table_and_supports_other_settings() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let config = write_config(tmp.path(), &out_dir);
    let out = kfv(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    // Default analysis (q = 1, density, latest common time) reproduces the
    // table written during the run, byte for byte.
    let out = kfv(&["analyze", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stderr(&out).is_empty(), "{}", stderr(&out));
    let stored = std::fs::read(out_dir.join("table_density.csv")).unwrap();
    assert_eq!(out.stdout, stored, "analyze diverged from the run table");

    // Another variable at the earlier snapshot time.
    let out = kfv(&[
        "analyze",
        out_dir.to_str().unwrap(),
        "--variable=total_energy",
        "--time=0.02",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.starts_with("# kfv-table v1 variable=total_energy time=2.000000e-2\n"),
        "{text}"
    );

    // q = 2 is outside the guaranteed range: warn, apply, proceed.
    let out = kfv(&["analyze", out_dir.to_str().unwrap(), "--q=2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# kfv-table v1"));
    assert_eq!(
        lines.next().unwrap(),
        "# e4 q=2 scaling=1,1,1,1,1 marginal=false"
    );

    // Restricting to the coarsest level alone yields the single all-zero row.
    let out = kfv(&["analyze", out_dir.to_str().unwrap(), "--reference=8"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.lines().nth(2).unwrap().starts_with("8,0.000000e0,-"),
        "{text}"
    );

    // Usage errors: q below 1 violates the metric precondition; unknown
    // variable; missing directory; unknown reference.
    assert_eq!(
        kfv(&["analyze", out_dir.to_str().unwrap(), "--q=0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kfv(&["analyze", out_dir.to_str().unwrap(), "--variable=vorticity"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kfv(&["analyze", tmp.path().join("void").to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kfv(&["analyze", out_dir.to_str().unwrap(), "--reference=64"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn table_merges_by_source_name() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let config = write_config(tmp.path(), &out_dir);
    let out = kfv(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let density = out_dir.join("table_density.csv");
    let energy = out_dir.join("table_total_energy.csv");
    let out = kfv(&[
        "table",
        density.to_str().unwrap(),
        energy.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# kfv-table v1 merged");
    assert_eq!(lines[1], "# table_density: variable=density time=5.000000e-2");
    assert_eq!(
        lines[2],
        "# table_total_energy: variable=total_energy time=5.000000e-2"
    );
    assert!(lines[3].starts_with("source,n,E1,order1"), "{}", lines[3]);
    assert!(lines[4].starts_with("table_density,8,"), "{}", lines[4]);
    assert!(
        lines[5].starts_with("table_total_energy,8,"),
        "{}",
        lines[5]
    );

    // --output writes the same bytes to a file.
    let merged_path = tmp.path().join("merged.csv");
    let out = kfv(&[
        "table",
        density.to_str().unwrap(),
        energy.to_str().unwrap(),
        "--output",
        merged_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&merged_path).unwrap(), text);

    // A non-table input is a usage error naming the file.
    let junk = tmp.path().join("junk.csv");
    std::fs::write(&junk, "a,b\n1,2\n").unwrap();
    let out = kfv(&["table", junk.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("junk"), "{}", stderr(&out));
}

#[test]
fn riemann_sampler_reports_star_values() {
    let out = kfv(&[
        "riemann",
        "--left",
        "1,0,1",
        "--right",
        "0.125,0,0.1",
        "--samples",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    let header = lines[0];
    assert!(header.starts_with("# kfv-riemann v1 gamma=1.4 "), "{header}");
    let p_star: f64 = header
        .split("p_star=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let u_star: f64 = header.split("u_star=").nth(1).unwrap().parse().unwrap();
    assert!((p_star - 0.30313).abs() < 1e-5, "p* = {p_star}");
    assert!((u_star - 0.92745).abs() < 1e-5, "u* = {u_star}");
    assert_eq!(lines[1], "xi,rho,u,p");
    assert_eq!(lines[2], "-2,1,0,1");
    assert_eq!(lines[6], "2,0.125,0,0.1");

    // Usage errors.
    assert_eq!(
        kfv(&["riemann", "--left", "1,0", "--right", "0.125,0,0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kfv(&["riemann", "--left", "1,0,1", "--right", "1,0,1", "--samples", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        kfv(&[
            "riemann",
            "--left",
            "1,0,1",
            "--right",
            "1,0,1",
            "--xi-min",
            "3",
            "--xi-max",
            "-3",
        ])
        .status
        .code(),
        Some(2)
    );
}
