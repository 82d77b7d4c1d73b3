use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relureach::reach::reach_from_json;
use relureach::{Polyhedron, UnionOfPolyhedra};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relureach"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn relureach")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn cube(&self, dim: usize) -> PathBuf {
        let u = UnionOfPolyhedra::single(Polyhedron::from_box(&vec![-1.0; dim], &vec![1.0; dim]).unwrap());
        self.write("input.json", &serde_json::to_string(&u).unwrap())
    }

    fn identity_net(&self, activation: &str) -> PathBuf {
        self.write(
            &format!("id_{activation}.json"),
            &format!(
                r#"{{"input_dim":2,"layers":[{{"activation":"{activation}","W":[[1.0,0.0],[0.0,1.0]],"b":[0.0,0.0]}}]}}"#
            ),
        )
    }

    fn gen(&self, name: &str, sizes: &str, seed: u64) -> PathBuf {
        let p = self.path(name);
        let out = run(&["gen-net", "--sizes", sizes, "--seed", &seed.to_string(), "--out", s(&p)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        p
    }
}

fn error_kind(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr);
    let v: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn identity_net_gives_one_region() {
    let f = Fixture::new();
    let (net, input, out) = (f.identity_net("linear"), f.cube(2), f.path("reach.json"));
    let o = run(&["reach", s(&net), s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let (set, stats) = reach_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(set.len(), 1);
    assert_eq!(stats.per_layer_counts, vec![1]);
    let timing: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(timing["seconds_total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn jobs_do_not_change_output() {
    let f = Fixture::new();
    let net = f.gen("net.json", "3,5,5,2", 11);
    let input = f.cube(3);
    let mut texts = Vec::new();
    for jobs in ["1", "4"] {
        let out = f.path(&format!("r{jobs}.json"));
        let o = run(&["reach", s(&net), s(&input), "--jobs", jobs, "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        texts.push(fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn gen_net_is_deterministic() {
    let a = run(&["gen-net", "--sizes", "3,7,2", "--seed", "5"]);
    let b = run(&["gen-net", "--sizes", "3,7,2", "--seed", "5"]);
    let c = run(&["gen-net", "--sizes", "3,7,2", "--seed", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn polygons_cover_oracle_outputs() {
    let f = Fixture::new();
    let net = f.gen("net.json", "2,4,4,2", 3);
    let input = f.cube(2);
    let out = f.path("poly.json");
    let o = run(&["reach", s(&net), s(&input), "--export", "polygons2d", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let polys: Vec<Vec<[f64; 2]>> = serde_json::from_value(v["polygons"].clone()).unwrap();
    assert!(!polys.is_empty());

    let model = relureach::netmodel::load_network_file(&net).unwrap();
    for i in 0..=30 {
        for j in 0..=30 {
            let x = ndarray::array![-1.0 + i as f64 / 15.0, -1.0 + j as f64 / 15.0];
            let y = model.forward(x.view()).unwrap();
            let inside = polys.iter().any(|p| in_polygon(p, [y[0], y[1]]));
            assert!(inside, "output {y} of {x} outside every polygon");
        }
    }
}

/// Closed membership in a CCW polygon, segment or point, at tolerance 1e-7.
fn in_polygon(poly: &[[f64; 2]], q: [f64; 2]) -> bool {
    let tol = 1e-7;
    match poly.len() {
        0 => false,
        1 => (poly[0][0] - q[0]).hypot(poly[0][1] - q[1]) <= tol,
        2 => {
            let (a, b) = (poly[0], poly[1]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = (((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
            (a[0] + t * dx - q[0]).hypot(a[1] + t * dy - q[1]) <= tol
        }
        n => (0..n).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
            cross >= -tol * (b[0] - a[0]).hypot(b[1] - a[1])
        }),
    }
}

#[test]
fn hrep_export_lists_pieces() {
    let f = Fixture::new();
    let (net, input, out) = (f.identity_net("relu"), f.cube(2), f.path("h.json"));
    let o = run(&["reach", s(&net), s(&input), "--export", "hrep", "--mode", "patterns", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["pieces"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_exit_codes() {
    let f = Fixture::new();
    let (net, input) = (f.identity_net("linear"), f.cube(2));
    let far = f.write("far.json", r#"{"kind":"unsafe_ball_inf","center":[10.0,0.0],"radius":1.0}"#);
    let o = run(&["verify", s(&net), s(&input), s(&far)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "SAFE");

    let origin = f.write("origin.json", r#"{"kind":"unsafe_ball_inf","center":[0.0,0.0],"radius":1.0}"#);
    let o = run(&["verify", s(&net), s(&input), s(&origin)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "UNSAFE");
    assert_eq!(v["counterexample"]["input"].as_array().unwrap().len(), 2);

    let bad = f.write("bad.json", r#"{"kind":"unsafe","pieces":[{"C":[[1.0,0.0]]}]}"#);
    let o = run(&["verify", s(&net), s(&input), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "ParseError");
}

#[test]
fn sample_check_accepts_matching_and_rejects_foreign_reach_files() {
    let f = Fixture::new();
    let input = f.cube(3);
    let net_a = f.gen("a.json", "3,7,7,2", 1);
    let net_b = f.gen("b.json", "3,7,7,2", 2);
    let reach_a = f.path("ra.json");
    assert_eq!(run(&["reach", s(&net_a), s(&input), "--out", s(&reach_a)]).status.code(), Some(0));

    let report = f.path("report.json");
    let csv = f.path("samples.csv");
    let o = run(&[
        "sample-check", s(&net_a), s(&input), s(&reach_a), "--grid", "8", "--report", s(&report), "--csv", s(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["samples"], 512);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 513);

    let o = run(&["sample-check", s(&net_b), s(&input), s(&reach_a), "--uniform", "300", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn resource_caps_exit_3() {
    let f = Fixture::new();
    let (net, input) = (f.identity_net("relu"), f.cube(2));
    let o = run(&["reach", s(&net), s(&input), "--region-cap", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "RegionCapExceeded");
}

#[test]
fn malformed_inputs_exit_2() {
    let f = Fixture::new();
    let input = f.cube(2);
    let ragged = f.write(
        "ragged.json",
        r#"{"input_dim":2,"layers":[{"activation":"relu","W":[[1.0,0.0],[1.0]],"b":[0.0,0.0]}]}"#,
    );
    let o = run(&["reach", s(&ragged), s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "ShapeError");

    let garbage = f.write("garbage.json", "{not json");
    let o = run(&["reach", s(&garbage), s(&input)]);
    assert_eq!(o.status.code(), Some(2));

    let net3 = f.gen("n3.json", "3,2", 0);
    let o = run(&["reach", s(&net3), s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "DimensionMismatch");
}

#[test]
fn stats_reports_bounds() {
    let f = Fixture::new();
    let (net, input, out) = (f.identity_net("relu"), f.cube(2), f.path("r.json"));
    assert!(run(&["reach", s(&net), s(&input), "--out", s(&out)]).status.success());
    let o = run(&["stats", s(&out), "--net", s(&net)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regions"], 4);
    assert_eq!(v["count_bounds"][0], 4);
    assert_eq!(v["output_upper"][0].as_f64(), Some(1.0));
}
