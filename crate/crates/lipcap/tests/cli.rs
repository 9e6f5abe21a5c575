use std::fs;
use std::path::PathBuf;
use std::process::Command;

use lipcap::formats::{GridFile, SceneFile};
use lipcap_core::geom::{Complement, ParametricDomain, Scene, Shape};
use lipcap_core::measures::DiscreteMeasure;
use lipcap_core::transforms::{ts_norm_estimate, PoissonGridSpec, TsNormEstimate};
use lipcap_core::wiener::{classify, SeriesReport, SeriesSpec, Verdict};
use lipcap_core::Point;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    status: i32,
    out: String,
    err: String,
}

fn lipcap(args: &[&str]) -> Run {
    lipcap_env(args, None)
}

fn lipcap_env(args: &[&str], cap: Option<&str>) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lipcap").chain(args.iter().copied());
    let status = lipcap::run(argv, cap, &mut out, &mut err);
    Run { status, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.out).unwrap_or_else(|e| panic!("{e}: {}", run.out))
}

const SEGMENT: &str = r#"{"root":{"m":0,"r":0,"n":0},"shapes":[{"type":"segment","from":[0.1,0.3],"to":[0.9,0.3]}]}"#;

#[test]
fn slit_example_converges() {
    let r = lipcap(&["classify", "--param", "slit:a0=0.5,q=0.5,c0=0.25,p=0.25", "--s", "-0.4", "--k", "0"]);
    assert_eq!(r.status, 0, "{}", r.err);
    assert_eq!(json(&r)["verdict"], "Converges");
}

#[test]
fn empty_scene_has_zero_content() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "empty.json", r#"{"root":{"m":0,"r":0,"n":0},"shapes":[]}"#);
    let r = lipcap(&["content", "--scene", scene.to_str().unwrap(), "--beta", "0.5"]);
    assert_eq!(r.status, 0, "{}", r.err);
    assert_eq!(json(&r)["value"], 0.0);
}

#[test]
fn segment_content_reports_bracket() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "seg.json", SEGMENT);
    let r = lipcap(&["content", "--scene", scene.to_str().unwrap(), "--beta", "0.5", "--depth", "8", "--bracket"]);
    let v = json(&r);
    let (lo, value, hi) = (v["lower"].as_f64().unwrap(), v["value"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(lo < value && value < hi);
    assert_eq!(v["kind"], "dyadic");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lipcap(&["frobnicate"]).status, 2);
    assert_eq!(lipcap(&["classify", "--param", "slit:a0=0.5", "--s", "-0.4"]).status, 2);
    assert_eq!(lipcap(&["sweep", "--param", "slit:a0=0.5,q=0.5,c0=0.25,p=0.25", "--s-range", "0:-1:0.1"]).status, 2);
    let csv = lipcap(&["--format", "csv", "classify", "--param", "slit:a0=0.5,q=0.5,c0=0.25,p=0.25", "--s", "-0.4"]);
    assert_eq!(csv.status, 2);
}

#[test]
fn computation_errors_emit_a_json_error() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "seg.json", SEGMENT);
    let r = lipcap(&["content", "--scene", scene.to_str().unwrap(), "--beta", "1.5"]);
    assert_eq!(r.status, 1);
    assert_eq!(json(&r)["error"]["kind"], "BetaOutOfRange");

    let missing = lipcap(&["content", "--scene", "/nonexistent/scene.json", "--beta", "0.5"]);
    assert_eq!(missing.status, 1);
    assert_eq!(json(&missing)["error"]["kind"], "Io");

    let overlapping = lipcap(&["classify", "--param", "slit:a0=0.5,q=0.9,c0=0.4,p=0.8", "--s", "-0.4"]);
    assert_eq!(overlapping.status, 1);
    assert_eq!(json(&overlapping)["error"]["kind"], "InvalidDomain");
}

#[test]
fn depth_cap_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "seg.json", SEGMENT);
    let args = ["content", "--scene", scene.to_str().unwrap(), "--beta", "0.5", "--depth", "10"];
    let capped = lipcap_env(&args, Some("8"));
    assert_eq!(capped.status, 1);
    assert_eq!(json(&capped)["error"]["kind"], "DepthTooLarge");
    assert_eq!(lipcap_env(&args, Some("12")).status, 0);
    let too_deep = lipcap_env(&args, Some("17"));
    assert_eq!(json(&too_deep)["error"]["kind"], "Config");
}

#[test]
fn classify_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let scene_text = r#"{"shapes":[{"type":"segment","from":[0.5,0.3333],"to":[1.0,0.3333]}]}"#;
    let path = write(&dir, "radial.json", scene_text);
    let r = lipcap(&["classify", "--scene", path.to_str().unwrap(), "--s", "-0.4", "--at", "0.5,0.3333", "--nmax", "6", "--depth", "9"]);
    assert_eq!(r.status, 0, "{}", r.out);
    let parsed: SeriesReport = serde_json::from_str(&r.out).unwrap();

    let scene = Scene::default().with_shape(Shape::segment(Point::new(0.5, 0.3333), Point::new(1.0, 0.3333)));
    let spec = SeriesSpec::new(-0.4, 0).unwrap().at(Point::new(0.5, 0.3333));
    let direct = classify(&Complement::Scene(scene), &spec, 6, 9, 14).unwrap();
    assert_eq!(parsed, direct);
    assert_eq!(parsed.verdict, Verdict::Diverges);
}

#[test]
fn frostman_output_feeds_the_transforms() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "seg.json", SEGMENT);
    let r = lipcap(&["frostman", "--scene", scene.to_str().unwrap(), "--beta", "0.5", "--depth", "6", "--check"]);
    assert_eq!(r.status, 0);
    let v = json(&r);
    assert!(v["growth"]["max_ratio"].as_f64().unwrap() <= 1.0);
    let measure = write(&dir, "mu.json", &r.out);
    let mu: DiscreteMeasure = serde_json::from_str(&r.out).unwrap();
    assert_eq!(mu.total(), v["total"].as_f64().unwrap());

    let norm = lipcap(&["poisson-norm", "--measure", measure.to_str().unwrap(), "--s", "-0.5", "--grid", "z=16,t=12"]);
    assert_eq!(norm.status, 0, "{}", norm.out);
    let parsed: TsNormEstimate = serde_json::from_str(&norm.out).unwrap();
    let grid = PoissonGridSpec { z_count: 16, t_count: 12, ..PoissonGridSpec::default_for(&mu) };
    assert_eq!(parsed, ts_norm_estimate(&mu, -0.5, &grid).unwrap());

    let c = lipcap(&["cauchy", "--measure", measure.to_str().unwrap(), "--at", "0.5,0.8", "--pairing"]);
    let v = json(&c);
    let (value, pairing) = (&v["value"], &v["pairing"]);
    for i in 0..2 {
        let (a, b) = (value[i].as_f64().unwrap(), pairing[i].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn sweep_emits_csv_rows() {
    let r = lipcap(&[
        "--format",
        "csv",
        "sweep",
        "--param",
        "roadrunner:a0=0.5,q=0.5,c0=0.25,p=0.25",
        "--s-range",
        "-0.9:-0.1:0.05",
        "--k",
        "1",
    ]);
    assert_eq!(r.status, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "s,verdict,sum");
    assert_eq!(lines.len(), 18);
    assert!(lines[1].starts_with("-0.90000000000000002,Diverges,inf"));
    assert!(lines[17].contains("Converges"));
}

#[test]
fn partition_summary_and_sum_field() {
    let dir = TempDir::new().unwrap();
    let scene = write(&dir, "seg.json", SEGMENT);
    let field = dir.path().join("sum.json");
    let r = lipcap(&[
        "partition",
        "--scene",
        scene.to_str().unwrap(),
        "--depth",
        "3",
        "--k",
        "3",
        "--sum-field",
        field.to_str().unwrap(),
    ]);
    assert_eq!(r.status, 0, "{}", r.out);
    let v = json(&r);
    assert!(v["atomCount"].as_u64().unwrap() > 0);
    assert!(v["maxN3"].as_f64().unwrap() > 0.0);
    assert!(v["sumErrorMax"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["supportViolations"], 0);
    let grid: GridFile = serde_json::from_str(&fs::read_to_string(field).unwrap()).unwrap();
    assert_eq!(grid.values.len(), grid.rows * grid.cols);
    grid.to_grid().unwrap();
}

#[test]
fn scene_files_round_trip() {
    let text = r#"{"root":{"m":0,"r":0,"n":0},"shapes":[
        {"type":"segment","from":[0.1,0.2],"to":[0.3,0.4]},
        {"type":"disc","center":[0.5,0.5],"radius":0.1},
        {"type":"dyadic","m":1,"r":2,"n":3},
        {"type":"bitmap","n":4,"cells":[[1,2],[3,4]]}],
        "parametric":{"kind":"roadrunner","a0":0.5,"q":0.5,"c0":0.25,"p":0.25}}"#;
    let file: SceneFile = serde_json::from_str(text).unwrap();
    let scene = file.to_scene().unwrap();
    assert_eq!(scene.shapes.len(), 4);
    assert_eq!(scene.parametric, Some(ParametricDomain::road_runner(0.5, 0.5, 0.25, 0.25).unwrap()));
    let again: SceneFile = serde_json::from_str(&lipcap::output::to_json(&SceneFile::from_scene(&scene)).unwrap()).unwrap();
    assert_eq!(again, file);
}

#[test]
fn output_is_deterministic() {
    let args = ["--seed", "11", "verify", "--only", "4,5"];
    let (a, b) = (lipcap(&args), lipcap(&args));
    assert_eq!(a.status, 0, "{}", a.out);
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(" (").map_or(l, |p| p.0).to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&a.out), strip(&b.out));

    let sweep = ["sweep", "--param", "slit:a0=0.5,q=0.5,c0=0.0625,p=0.25", "--s-range", "-0.9:-0.1:0.1"];
    assert_eq!(lipcap(&sweep).out, lipcap(&sweep).out);
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_lipcap");
    let ok = Command::new(bin)
        .args(["classify", "--param", "slit:a0=0.5,q=0.5,c0=0.25,p=0.25", "--s", "-0.6"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("\"Diverges\""));
    let usage = Command::new(bin).args(["classify"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let capped = Command::new(bin)
        .env("LIPCAP_DEPTH_CAP", "99")
        .args(["classify", "--param", "slit:a0=0.5,q=0.5,c0=0.25,p=0.25", "--s", "-0.6"])
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
}
