//! Output files and the command-line front end.

use std::path::Path;
use std::process::{Command, Output};

use axitherm::io::csv::{header, TimeSeriesWriter};
use axitherm::io::vtk::write_state_vtk;
use axitherm::{generate_rectangle_mesh, parse_config, Simulation};

const BIN: &str = env!("CARGO_BIN_EXE_axitherm");

/// A short, coarse variant of the upsetting test.
fn small_scenario(extra: &str) -> String {
    format!(
        r#"scenario = "paper_test"

[geometry]
nr = 3
nz = 6

[solver]
dt = 0.5
t_end = 1.0

[output]
vtk_every_n_steps = 1
{extra}
"#
    )
}

fn axitherm(args: &[&str], cwd: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).current_dir(cwd).env_remove("AXITHERM_OUTPUT_DIR").env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn parse_vtk_scalars(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    while let Some(l) = lines.next() {
        if l == format!("SCALARS {name} double 1") {
            lines.next();
            return lines.map_while(|l| l.parse::<f64>().ok()).collect();
        }
    }
    panic!("no field {name}");
}

fn count_after(text: &str, key: &str) -> usize {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|r| r.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn vtk_files_match_the_mesh_and_state() {
    let cfg = parse_config(&small_scenario("")).unwrap();
    let (problem, solver) = cfg.build(Path::new(".")).unwrap();
    let mesh = problem.mesh.clone();
    let sim = Simulation::new(problem, solver).unwrap();
    let state = sim.initial_state().unwrap();
    let pushed = sim.geometry(0.5).unwrap().current_nodes;
    let dir = tempfile::tempdir().unwrap();
    let files = write_state_vtk(dir.path(), "s", &mesh, &state, Some(&pushed)).unwrap();
    assert_eq!(files.len(), 2);
    assert!(files[1].ends_with("s_current.vtk"));
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        assert_eq!(count_after(&text, "POINTS "), mesh.n_nodes());
        assert_eq!(count_after(&text, "CELLS "), mesh.n_triangles());
        assert_eq!(count_after(&text, "POINT_DATA "), mesh.n_nodes());
        assert_eq!(count_after(&text, "CELL_DATA "), mesh.n_triangles());
        assert_eq!(parse_vtk_scalars(&text, "theta"), state.theta);
        assert_eq!(parse_vtk_scalars(&text, "H_abs").len(), mesh.n_nodes());
        assert_eq!(parse_vtk_scalars(&text, "J_abs").len(), mesh.n_triangles());
        assert_eq!(parse_vtk_scalars(&text, "Q").len(), mesh.n_triangles());
    }
}

#[test]
fn two_triangle_mesh_writes_two_cells() {
    let mesh = generate_rectangle_mesh(1.0, 1.0, 1, 1).unwrap();
    assert_eq!(mesh.n_triangles(), 2);
    let theta = [1.0, 2.0 / 3.0, 1e-300, -7.25];
    let text = axitherm::io::vtk::vtk_text(mesh.nodes(), mesh.triangles(), &[("theta", &theta)], &[]);
    assert_eq!(count_after(&text, "POINTS "), 4);
    assert_eq!(count_after(&text, "CELLS "), 2);
    assert_eq!(parse_vtk_scalars(&text, "theta"), theta);
    assert!(!text.contains("CELL_DATA"));
}

#[test]
fn csv_has_one_row_per_state() {
    let cfg = parse_config(&small_scenario(
        r#"
[[ports]]
k = 1
drive = "current"
amplitude_re = 0.0
amplitude_im = 0.0
"#,
    ))
    .unwrap();
    let (problem, solver) = cfg.build(Path::new(".")).unwrap();
    let sim = Simulation::new(problem, solver).unwrap();
    let mut w = TimeSeriesWriter::new(Vec::new(), &[1]).unwrap();
    sim.run_with(|s| w.write(s)).unwrap();
    let bytes = w.into_inner().unwrap();
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let head: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(head, header(&[1]));
    assert_eq!(
        head,
        ["t", "V1_re", "V1_im", "V1_abs", "P_diss", "theta_max", "theta_min"]
    );
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), sim.config.n_steps() + 1);
    for (i, row) in rows.iter().enumerate() {
        assert!((row[0] - 0.5 * i as f64).abs() < 1e-12);
        assert_eq!(&row[1..5], &[0.0; 4]);
        assert!((row[5] - 20.0).abs() < 1e-9 && (row[6] - 20.0).abs() < 1e-9);
    }
}

#[test]
fn run_writes_time_series_and_both_configurations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), small_scenario("directory = \"out\"")).unwrap();
    let out = axitherm(&["run", "s.toml"], dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    let csv = std::fs::read_to_string(o.join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for step in 0..3 {
        assert!(o.join(format!("state_{step:05}.vtk")).is_file());
        assert!(o.join(format!("state_{step:05}_current.vtk")).is_file());
    }
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(last[4] > 0.0, "dissipated power {}", last[4]);
    assert!(last[5] > 20.0, "heated to {}", last[5]);
}

#[test]
fn eulerian_run_writes_on_the_deformed_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_scenario("directory = \"out\"").replace("t_end = 1.0", "t_end = 1.0\nmode = \"eulerian\"");
    std::fs::write(dir.path().join("s.toml"), text).unwrap();
    let out = axitherm(&["run", "s.toml"], dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("out");
    assert!(o.join("state_00002.vtk").is_file());
    assert!(!o.join("state_00002_current.vtk").exists());
}

#[test]
fn environment_overrides_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), small_scenario("directory = \"configured\"")).unwrap();
    let target = dir.path().join("from_env");
    let out = axitherm(&["run", "s.toml"], dir.path(), &[("AXITHERM_OUTPUT_DIR", target.to_str().unwrap())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("timeseries.csv").is_file());
    assert!(!dir.path().join("configured").exists());

    let flag = dir.path().join("from_flag");
    let out = axitherm(
        &["run", "s.toml", "--output-dir", flag.to_str().unwrap()],
        dir.path(),
        &[("AXITHERM_OUTPUT_DIR", target.to_str().unwrap())],
    );
    assert!(out.status.success());
    assert!(flag.join("timeseries.csv").is_file());
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), small_scenario("").replace("dt = 0.5", "dt = -0.5")).unwrap();
    let out = axitherm(&["run", "bad.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.dt"));

    std::fs::write(dir.path().join("syntax.toml"), "[solver\ndt = 1").unwrap();
    let out = axitherm(&["run", "syntax.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = axitherm(&["run", "missing.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_scenario("directory = \"out\"").replace("t_end = 1.0", "t_end = 1.0\nnewton_max_iter = 1");
    std::fs::write(dir.path().join("s.toml"), text).unwrap();
    let out = axitherm(&["run", "s.toml"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mesh_info_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_rectangle_mesh(0.02875, 0.165, 2, 3).unwrap();
    std::fs::write(dir.path().join("bar.mesh"), mesh.to_text()).unwrap();
    let out = axitherm(&["mesh-info", "bar.mesh"], dir.path(), &[]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("nodes      12"), "{text}");
    assert!(text.contains("triangles  12"), "{text}");
    assert!(text.contains("edges axis"), "{text}");
}

#[test]
fn mesh_file_in_config_is_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    let mesh = generate_rectangle_mesh(0.02875, 0.165, 3, 6).unwrap();
    std::fs::write(dir.path().join("cfg/bar.mesh"), mesh.to_text()).unwrap();
    let text = small_scenario("directory = \"out\"").replace("nr = 3\nnz = 6", "mesh_file = \"bar.mesh\"");
    std::fs::write(dir.path().join("cfg/s.toml"), text).unwrap();
    let out = axitherm(&["run", "cfg/s.toml", "--output-dir", "o"], dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/timeseries.csv").is_file());
}
