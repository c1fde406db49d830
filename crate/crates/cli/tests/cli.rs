use std::path::Path;
use std::process::{Command, Output};

use hfv_core::experiments::{longtime_alpha, TimeSeriesRecord};
use hfv_core::mesh::{cartesian, write_mesh};

fn hfv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfv")).args(args).current_dir(dir).output().expect("spawn hfv")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.split("\r\n").filter(|l| !l.is_empty());
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    (header, lines.map(|l| l.split(',').map(str::to_owned).collect()).collect())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn zero_final_time_records_only_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nresolution = 4\n");
    let out = hfv(&["transient", "--config", &cfg, "--tf", "0", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&dir.path().join("res/series.csv"));
    assert_eq!(header, TimeSeriesRecord::COLUMNS);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][1], "0.0000000000000000e0");
    let (_, summary) = table(&dir.path().join("res/summary.csv"));
    assert_eq!(summary[0][0], "0");
}

#[test]
fn converge_reports_second_and_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "case = \"accuracy1\"\n[mesh]\nfamily = \"triangular\"\nlevels = [4, 8, 16, 32]\n[scheme]\nkind = \"hmm\"\n",
    );
    let out = hfv(&["converge", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&dir.path().join("out/summary.csv"));
    assert_eq!(header[5], "eoc_l2");
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][5], "");
    let last = &rows[3];
    let (l2, h1): (f64, f64) = (last[5].parse().unwrap(), last[6].parse().unwrap());
    assert!((1.7..=2.3).contains(&l2), "{l2}");
    assert!((0.8..=1.2).contains(&h1), "{h1}");
    assert_eq!(last[7], "", "no Newton iterations for a linear scheme");
}

#[test]
fn longtime_rate_matches_spectral_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scheme]\nkind = \"expfit\"\n");
    let out = hfv(&["longtime", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&dir.path().join("out/summary.csv"));
    assert_eq!(header, ["series", "rate", "plateau", "knee_time"]);
    assert_eq!(rows[0][0], "dist_l1_exact");
    let rate: f64 = rows[0][1].parse().unwrap();
    let alpha = longtime_alpha();
    assert!((rate - alpha).abs() <= 0.1 * alpha, "rate {rate} vs {alpha}");
    let (_, series) = table(&dir.path().join("out/series.csv"));
    assert_eq!(series.len(), 3501);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nresolution = 6\n[scheme]\nkind = \"nonlinear\"\ndt = 0.5\nfinal_time = 3.0\n");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = hfv(&["transient", "--config", &cfg, "--out", name], dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(
            ["series.csv", "summary.csv"].map(|f| std::fs::read(dir.path().join(name).join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn vtk_snapshots_follow_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nresolution = 4\n[scheme]\ndt = 0.1\nfinal_time = 0.4\n[output]\nvtk_every = 2\n");
    let out = hfv(&["transient", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".vtk"))
        .collect();
    names.sort();
    assert_eq!(names, ["solution_0000.vtk", "solution_0002.vtk", "solution_0004.vtk"]);
    let text = std::fs::read_to_string(dir.path().join("out/solution_0004.vtk")).unwrap();
    assert!(text.starts_with("# vtk DataFile Version 3.0"));
    assert!(text.contains("SCALARS u_cell double 1"));
}

#[test]
fn mesh_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("grid.poly"), write_mesh(&cartesian(8).unwrap())).unwrap();
    let cfg = write_config(dir.path(), "case = \"accuracy2\"\n[scheme]\nkind = \"hmm\"\n");
    let out = hfv(
        &["stationary", "--config", &cfg, "--mesh-file", "grid.poly", "--scheme", "nonlinear", "--flux", "upwind"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = table(&dir.path().join("out/summary.csv"));
    assert_eq!(header[0], "cells");
    assert_eq!(rows[0][0], "64");
    assert!(rows[0][9].parse::<usize>().unwrap() >= 1, "nonlinear scheme reports Newton iterations");
    let min_cell: f64 = rows[0][5].parse().unwrap();
    assert!(min_cell > 0.0);
}

fn assert_failure(out: &Output, code: i32, kind: &str) {
    assert_eq!(out.status.code(), Some(code), "{}", stderr(out));
    let line = stderr(out).lines().last().unwrap_or_default().to_owned();
    assert!(line.starts_with(&format!("error kind={kind} code={code} message=")), "{line}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scheme]\nsteps = 4\n");
    assert_failure(&hfv(&["transient", "--config", &cfg], dir.path()), 2, "config");
    assert_failure(&hfv(&["transient", "--config", "missing.toml"], dir.path()), 2, "config");
    assert_failure(&hfv(&["transient", "--dt", "-1"], dir.path()), 2, "config");
    assert_failure(&hfv(&["sweep"], dir.path()), 2, "config");
    assert_failure(&hfv(&["transient", "--scheme", "magic"], dir.path()), 2, "config");
}

#[test]
fn mesh_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_failure(&hfv(&["stationary", "--mesh-file", "nowhere.poly"], dir.path()), 3, "mesh");
    std::fs::write(dir.path().join("bad.poly"), "polymesh v1\nvertices 2\n0 0\n").unwrap();
    assert_failure(&hfv(&["stationary", "--mesh-file", "bad.poly"], dir.path()), 3, "mesh");
}

#[test]
fn solver_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "case = \"accuracy2\"\n[mesh]\nfamily = \"cartesian\"\nresolution = 8\n[scheme]\nkind = \"nonlinear\"\nnewton = { max_iter = 1 }\n",
    );
    assert_failure(&hfv(&["stationary", "--config", &cfg], dir.path()), 4, "solver");
}

#[test]
fn io_errors_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    assert_failure(&hfv(&["stationary", "--out", "blocker/res"], dir.path()), 5, "io");
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = hfv(&["--help"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("--mesh-file"));
}
