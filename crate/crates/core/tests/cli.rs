use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use defectforge::io::{import_mesh, Annotation, JobReport};
use serde_json::json;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defectforge"))
        .current_dir(dir)
        .env("DEFECTFORGE_THREADS", "2")
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, config: serde_json::Value) {
    fs::write(dir.join("job.json"), config.to_string()).unwrap();
}

#[test]
fn generate_writes_meshes_annotations_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        json!({
            "base_seed": 10,
            "output_dir": "out",
            "format": "ply",
            "defects": [
                {"type": "crack", "count": 2, "params": {"branches": 1}},
                {"type": "bulge", "seeds": [77]},
                {"type": "delamination"}
            ]
        }),
    );
    let out = run(dir.path(), &["generate", "--config", "job.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out_dir = dir.path().join("out");
    let report: JobReport = serde_json::from_slice(&fs::read(out_dir.join("job_report.json")).unwrap()).unwrap();
    let stems: Vec<String> = report
        .instances
        .iter()
        .map(|i| format!("{}_{:06}", i.defect_type, i.seed))
        .collect();
    assert_eq!(stems, ["crack_000010", "crack_000011", "bulge_000077", "delamination_000013"]);

    for stem in &stems {
        let mesh = import_mesh(&out_dir.join(format!("{stem}.ply"))).unwrap();
        let note: Annotation = serde_json::from_slice(&fs::read(out_dir.join(format!("{stem}.json"))).unwrap()).unwrap();
        assert_eq!(note.mesh.triangles, mesh.triangles.len());
        assert!(note.validation.is_valid());
        assert!(!note.imprinted);
        if !stem.starts_with("delamination") {
            assert!(mesh.validate().is_valid(), "{stem}");
        }
    }
    let crack: Annotation =
        serde_json::from_slice(&fs::read(out_dir.join("crack_000010.json")).unwrap()).unwrap();
    assert_eq!(crack.branches.len(), 1);
    assert_eq!(crack.params["branches"], 1);
}

#[test]
fn seed_and_output_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), json!({"defects": [{"type": "coat_lift"}]}));
    let out = run(
        dir.path(),
        &["generate", "--config", "job.json", "--seed", "5", "--out", "elsewhere", "--format", "stl"],
    );
    assert!(out.status.success());
    assert!(dir.path().join("elsewhere/coat_lift_000005.stl").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), json!({"base_seed": 4, "defects": [{"type": "buckle_open"}, {"type": "cold_shut"}]}));
    for out in ["a", "b"] {
        assert!(run(dir.path(), &["generate", "--config", "job.json", "--out", out]).status.success());
    }
    for f in ["buckle_open_000004.obj", "cold_shut_000005.obj", "cold_shut_000005.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn failed_instances_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        json!({"slab": {"margin": -1.0, "thickness": 1.0}, "defects": [{"type": "crack"}]}),
    );
    let out = run(dir.path(), &["generate", "--config", "job.json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: JobReport =
        serde_json::from_slice(&fs::read(dir.path().join("out/job_report.json")).unwrap()).unwrap();
    assert_eq!(report.failures(), 1);
}

#[test]
fn bad_configs_give_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    for config in [
        json!({"defects": [{"type": "crack", "params": {"no_such_field": 1}}]}),
        json!({"defects": [{"type": "pothole"}]}),
        json!({"defects": [{"type": "crack", "count": 2, "seeds": [1]}]}),
        json!({"defects": [{"type": "crack", "seeds": [1]}, {"type": "crack", "seeds": [1]}]}),
    ] {
        write_config(dir.path(), config.clone());
        let out = run(dir.path(), &["generate", "--config", "job.json"]);
        assert_eq!(out.status.code(), Some(2), "{config}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(dir.path(), &["generate", "--config", "missing.json"]).status.code(), Some(2));
}

#[test]
fn validate_reports_open_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let closed = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\nf 1 4 3\n";
    let open = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\n";
    fs::write(dir.path().join("closed.obj"), closed).unwrap();
    fs::write(dir.path().join("open.obj"), open).unwrap();

    let out = run(dir.path(), &["validate", "closed.obj"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).trim_end().ends_with("valid"));

    let out = run(dir.path(), &["validate", "open.obj"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).trim_end().ends_with("invalid"));

    assert_eq!(run(dir.path(), &["validate", "nothing.obj"]).status.code(), Some(2));
}

#[test]
fn demo_with_slab_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["demo", "--type", "crack", "--seed", "2", "--slab", "--out", "d"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let note: Annotation =
        serde_json::from_slice(&fs::read(dir.path().join("d/crack_000002.json")).unwrap()).unwrap();
    assert!(note.imprinted);
    let v = run(dir.path(), &["validate", "d/crack_000002.obj"]);
    assert_eq!(v.status.success(), note.imprint_validation.unwrap().is_valid());
}
