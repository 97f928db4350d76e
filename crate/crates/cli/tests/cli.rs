use std::path::Path;
use std::process::{Command, Output};

use gmtk::cubical::DyadicCube;
use gmtk::solver::{GridBox, MinimizeOptions, ProblemSpec, SolutionRecord};
use gmtk::varifold::IntegrandSpec;
use serde_json::Value;

fn gmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmtk")).args(args).output().unwrap()
}

fn problem(dim: usize, boundary: Vec<DyadicCube>, generators: Vec<Vec<DyadicCube>>) -> String {
    let spec = ProblemSpec {
        grid_box: GridBox {
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
        },
        level: 1,
        dim,
        boundary,
        generators,
        integrand: IntegrandSpec::Area {},
        options: MinimizeOptions::default(),
    };
    serde_json::to_string_pretty(&spec).unwrap()
}

fn square_cycle() -> Vec<DyadicCube> {
    let mut edges = Vec::new();
    for i in 0..2 {
        for (corner, axis) in [([i, 0, 1], 0), ([i, 2, 1], 0), ([0, i, 1], 1), ([2, i, 1], 1)] {
            edges.push(DyadicCube::new(1, corner.to_vec(), vec![axis]).unwrap());
        }
    }
    edges
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn malformed_planes_exit_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let planes = dir.path().join("planes.csv");
    std::fs::write(&planes, "# pairs\n2,1,1,0,0,1\n2,1,1,0,zero,1\n").unwrap();
    let out = gmtk(&["--out", &dir.path().join("o").display().to_string(), "rotate", &planes.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn rotate_axes_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let planes = dir.path().join("planes.csv");
    std::fs::write(&planes, "2,1,1,0,0,1\n3,2,1,0,0,1,0,0,1,0,0,1,0,0\n").unwrap();
    let o = dir.path().join("o");
    let out = gmtk(&["--format", "json", "--out", &o.display().to_string(), "rotate", &planes.display().to_string()]);
    assert!(out.status.success());
    let rows = read_json(&o.join("rotate.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let axes_at_one = &rows[4];
    assert_eq!(axes_at_one["tau"], 1.0);
    assert!((axes_at_one["deviation"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert!(rows[5..].iter().all(|r| r["deviation"] == 0.0 && r["pass"] == true));
}

#[test]
fn unknown_config_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, "{\"probes\": 10, \"typo\": 1}").unwrap();
    let out = gmtk(&["--config", &config.display().to_string(), "--out", &dir.path().join("o").display().to_string(), "retract"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn minimize_half_square_records_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, problem(2, square_cycle(), vec![square_cycle()])).unwrap();
    let o = dir.path().join("o");
    let out = gmtk(&["--out", &o.display().to_string(), "minimize", &file.display().to_string()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: SolutionRecord = serde_json::from_str(&std::fs::read_to_string(o.join("solution.json")).unwrap()).unwrap();
    assert_eq!(record.value, 1.0);
    assert!(record.oracle.unwrap().equal);
    for name in ["chain.obj", "audit.json", "audit.csv", "trace.csv"] {
        assert!(o.join(name).exists(), "{name}");
    }
}

#[test]
fn minimize_empty_target_gives_the_empty_chain() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, problem(2, square_cycle(), vec![])).unwrap();
    let o = dir.path().join("o");
    let out = gmtk(&["--out", &o.display().to_string(), "minimize", &file.display().to_string()]);
    assert!(out.status.success());
    let record = read_json(&o.join("solution.json"));
    assert_eq!(record["value"], 0.0);
    assert_eq!(record["chain"].as_array().unwrap().len(), 0);
}

#[test]
fn infeasible_problem_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    let point = DyadicCube::vertex(1, vec![0, 0, 0]);
    std::fs::write(&file, problem(1, vec![point.clone()], vec![vec![point]])).unwrap();
    let out = gmtk(&["--out", &dir.path().join("o").display().to_string(), "minimize", &file.display().to_string()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_problem_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, problem(2, square_cycle(), vec![square_cycle()]).replacen("\"dim\"", "\"dimension\"", 1)).unwrap();
    let out = gmtk(&["--out", &dir.path().join("o").display().to_string(), "minimize", &file.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_set_gives_the_identity_plan() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("empty.csv");
    std::fs::write(&set, "x0,x1,x2,tangent_3x2,weight\n").unwrap();
    let o = dir.path().join("o");
    let out = gmtk(&["--out", &o.display().to_string(), "deform", &set.display().to_string()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let constants = read_json(&o.join("constants.json"));
    assert_eq!(constants["samples"], 0);
    assert_eq!(constants["report"]["steps"], 0);
}

#[test]
fn obj_output_is_refused_where_it_has_no_meaning() {
    let dir = tempfile::tempdir().unwrap();
    let out = gmtk(&["--format", "obj", "--out", &dir.path().join("o").display().to_string(), "slice"]);
    assert_eq!(out.status.code(), Some(2));
}
