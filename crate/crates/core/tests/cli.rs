use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ppc::io::{write_cloud, CloudData};
use ppc::report::Record;
use ppc::{generate, PointCloud, SceneKind, SceneSpec};

fn ppc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, cloud: PointCloud) -> PathBuf {
    let path = dir.join(name);
    write_cloud(&path, &CloudData::new(cloud), None).unwrap();
    path
}

fn records(path: &Path) -> Vec<Record> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(Record::parse)
        .collect()
}

fn find<'a>(records: &'a [Record], kind: &str) -> &'a Record {
    records.iter().find(|r| r.kind() == kind).unwrap()
}

#[test]
fn canon_asymmetric_fixture_is_ok() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "in.xyz",
        generate(&SceneSpec::new(SceneKind::GaussianAniso, 2000, 42)).unwrap(),
    );
    let out = ppc(
        &["canon", "in.xyz", "out.ply", "--report", "report.txt"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = records(&dir.path().join("report.txt"));
    assert_eq!(find(&recs, "result").get("verdict"), Some("OK"));
    assert_eq!(find(&recs, "downsample").get("points_out"), Some("512"));
    assert_eq!(find(&recs, "config").get("phi"), Some("sq"));
    assert!(find(&recs, "basis").get("row_major").unwrap().split(',').count() == 9);
    assert!(dir.path().join("out.ply").exists());
}

#[test]
fn canon_cube_corners_exits_3_but_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cube.csv",
        generate(&SceneSpec::new(SceneKind::CubeCorners, 8, 0)).unwrap(),
    );
    let out = ppc(&["canon", "cube.csv", "out.csv", "--report", "r.txt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    assert_eq!(
        find(&records(&dir.path().join("r.txt")), "result").get("verdict"),
        Some("DEGENERATE")
    );
    assert!(dir.path().join("out.csv").exists());
}

#[test]
fn canon_fps_larger_than_cloud_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "in.xyz",
        generate(&SceneSpec::new(SceneKind::GaussianAniso, 100, 1)).unwrap(),
    );
    let out = ppc(&["canon", "in.xyz", "out.xyz", "--fps", "101"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
    assert!(!dir.path().join("out.xyz").exists());
}

#[test]
fn io_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        ppc(&["canon", "missing.xyz", "o.xyz"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        ppc(&["canon", "--phi", "cubic", "a.xyz", "b.xyz"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ppc(&["frobnicate"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.xyz"), "1 2\n").unwrap();
    let out = ppc(&["chamfer", "bad.xyz", "bad.xyz"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn chamfer_prints_structured_result() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.xyz", PointCloud::new(vec![[0.0; 3]]).unwrap());
    write(
        dir.path(),
        "b.xyz",
        PointCloud::new(vec![[3.0, 4.0, 0.0]]).unwrap(),
    );
    let out = ppc(&["chamfer", "a.xyz", "b.xyz"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    let rec = Record::parse(&line).unwrap();
    assert_eq!(rec.get_f64("value"), Some(5.0));
    assert_eq!(rec.get_f64("forward_mean"), Some(5.0));
    assert_eq!(rec.get_f64("backward_mean"), Some(5.0));

    let same = ppc(&["chamfer", "a.xyz", "a.xyz"], dir.path());
    assert_eq!(
        Record::parse(&String::from_utf8(same.stdout).unwrap())
            .unwrap()
            .get_f64("value"),
        Some(0.0)
    );
}

#[test]
fn chamfer_fast_agrees_with_brute() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "a.ply",
        generate(&SceneSpec::new(SceneKind::EllipsoidShell, 1000, 1)).unwrap(),
    );
    write(
        dir.path(),
        "b.ply",
        generate(&SceneSpec::new(SceneKind::GaussianAniso, 1200, 2)).unwrap(),
    );
    let value = |brute: bool| {
        let mut args = vec!["chamfer", "a.ply", "b.ply"];
        if brute {
            args.push("--brute");
        }
        let out = ppc(&args, dir.path());
        Record::parse(&String::from_utf8(out.stdout).unwrap())
            .unwrap()
            .get_f64("value")
            .unwrap()
    };
    let (fast, brute) = (value(false), value(true));
    assert!((fast - brute).abs() <= 1e-12 * brute);
}

#[test]
fn generated_rigid_copy_canonicalizes_to_the_same_pose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| assert_eq!(ppc(args, d).status.code(), Some(0), "{args:?}");
    run(&[
        "generate",
        "a.xyz",
        "--kind",
        "gaussian-aniso",
        "--points",
        "800",
        "--seed",
        "5",
    ]);
    run(&[
        "generate",
        "b.ply",
        "--kind",
        "gaussian-aniso",
        "--points",
        "800",
        "--seed",
        "5",
        "--rotate",
        "17",
        "--translate",
        "-4,2.5,30",
    ]);
    run(&["canon", "a.xyz", "ca.xyz", "--no-downsample", "--phi", "quartic"]);
    run(&["canon", "b.ply", "cb.xyz", "--no-downsample", "--phi", "quartic"]);
    let out = ppc(&["chamfer", "ca.xyz", "cb.xyz"], d);
    let v = Record::parse(&String::from_utf8(out.stdout).unwrap())
        .unwrap()
        .get_f64("value")
        .unwrap();
    assert!(v < 1e-9, "{v}");
}

#[test]
fn downsample_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "in.xyz",
        generate(&SceneSpec::new(SceneKind::Plane, 3000, 3)).unwrap(),
    );
    let out = ppc(
        &[
            "downsample",
            "in.xyz",
            "out.csv",
            "--voxel",
            "0.2",
            "--fps",
            "100",
            "--seed-rule",
            "first",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let back = ppc::io::read_cloud(&dir.path().join("out.csv"), None).unwrap();
    assert_eq!(back.cloud.len(), 100);
    assert!(String::from_utf8_lossy(&out.stderr).contains("points_out=100"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "in.xyz",
        generate(&SceneSpec::new(SceneKind::TabletopClusters, 3000, 6)).unwrap(),
    );
    for i in 0..2 {
        let r = format!("r{i}.txt");
        assert_eq!(
            ppc(
                &["canon", "in.xyz", &format!("o{i}.xyz"), "--report", &r],
                dir.path()
            )
            .status
            .code(),
            Some(0)
        );
    }
    let a = fs::read(dir.path().join("r0.txt")).unwrap();
    let b = fs::read(dir.path().join("r1.txt")).unwrap();
    let strip = |v: &[u8]| {
        String::from_utf8_lossy(v)
            .replace("o0.xyz", "o.xyz")
            .replace("o1.xyz", "o.xyz")
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(
        fs::read(dir.path().join("o0.xyz")).unwrap(),
        fs::read(dir.path().join("o1.xyz")).unwrap()
    );
}

#[test]
fn bench_identity_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
seed = 1
fps = 256

[[scene]]
label = "blob"
kind = "gaussian_aniso"
points = 600
seed = 3

[[mismatch]]
label = "none"
kind = "rotate"
degrees = 0.0

[[mismatch]]
label = "left_20mm"
kind = "shift"
direction = "left"
mm = 20.0
"#;
    fs::write(dir.path().join("bench.toml"), config).unwrap();
    let out = ppc(&["bench", "bench.toml", "--trials", "2"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Record> = text
        .lines()
        .filter_map(Record::parse)
        .filter(|r| r.kind() == "row")
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].get_f64("raw_chamfer_mm"), Some(0.0));
    assert_eq!(rows[0].get_f64("ppc_chamfer_mm"), Some(0.0));
    assert!(rows[1].get_f64("raw_chamfer_mm").unwrap() > 1.0);
    assert!(text
        .lines()
        .any(|l| l.starts_with("config ") && l.contains("trials=2")));
    assert!(text.lines().any(|l| l.starts_with("summary ")));

    fs::write(dir.path().join("broken.toml"), "seed = \"x\"").unwrap();
    assert_eq!(ppc(&["bench", "broken.toml"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("empty.toml"), "seed = 1").unwrap();
    assert_eq!(ppc(&["bench", "empty.toml"], dir.path()).status.code(), Some(2));
}
