//! CLI contract tests: exit codes, flag parsing, format validation and the
//! single-file pipelines.

mod common;

use common::{assert_exit, run_cli};
use manipkit::io::ply::write_point_cloud;
use manipkit::synth::cube_surface_cloud;

#[test]
fn help_exits_zero() {
    let out = run_cli(&["--help"]);
    assert_exit(&out, 0, "--help");
    assert!(String::from_utf8_lossy(&out.stdout).contains("annotate-grasps"));
}

#[test]
fn missing_required_flags_exit_one() {
    let out = run_cli(&["annotate-grasps"]);
    assert_exit(&out, 1, "annotate-grasps without args");
    let out = run_cli(&["definitely-not-a-subcommand"]);
    assert_exit(&out, 1, "unknown subcommand");
    // --input without --out is a usage error caught by clap.
    let out = run_cli(&["segment", "--input", "x.jsonl"]);
    assert_exit(&out, 1, "segment --input without --out");
}

#[test]
fn missing_cloud_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "annotate-grasps",
        "--cloud",
        dir.path().join("nope.ply").to_str().unwrap(),
        "--out",
        dir.path().join("labels.json").to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_exit(&out, 2, "missing cloud");
}

#[test]
fn malformed_ply_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ply");
    std::fs::write(
        &path,
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n",
    )
    .unwrap();
    let out = run_cli(&[
        "annotate-grasps",
        "--cloud",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("labels.json").to_str().unwrap(),
        "--seed",
        "1",
    ]);
    assert_exit(&out, 2, "ply without normals");
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("missing property nx"),
        "error must name the missing property: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn fit_domain_violation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    std::fs::write(&csv, "x,sr\n1.0,0.5\n0.5,0.6\n").unwrap();
    let out = run_cli(&[
        "fit-scaling",
        "--csv",
        csv.to_str().unwrap(),
        "--model",
        "log-proportion",
    ]);
    assert_exit(&out, 3, "x = 1.0 is outside the model domain");
}

#[test]
fn fit_headerless_csv_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    std::fs::write(&csv, "0.1,0.9\n0.5,0.7\n").unwrap();
    let out = run_cli(&[
        "fit-scaling",
        "--csv",
        csv.to_str().unwrap(),
        "--model",
        "log-proportion",
    ]);
    assert_exit(&out, 2, "missing header");
}

#[test]
fn mix_insufficient_corpus_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let srp = dir.path().join("srp");
    for (mode, count, out_dir) in [("full", "3", &full), ("srp", "3", &srp)] {
        let out = run_cli(&[
            "synth", "--mode", mode, "--count", count, "--out-dir",
            out_dir.to_str().unwrap(), "--seed", "3",
        ]);
        assert_exit(&out, 0, "synth");
    }
    let out = run_cli(&[
        "mix",
        "--full",
        full.to_str().unwrap(),
        "--srp",
        srp.to_str().unwrap(),
        "--n1",
        "10",
        "--n2",
        "2",
        "--strategy",
        "no-repeat",
        "--seed",
        "1",
        "--out",
        dir.path().join("m.manifest").to_str().unwrap(),
    ]);
    assert_exit(&out, 3, "corpus smaller than n1");
}

#[test]
fn segment_single_file_accepts_deg_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let traj_dir = dir.path().join("trajs");
    let out = run_cli(&[
        "synth", "--mode", "full", "--count", "1", "--out-dir",
        traj_dir.to_str().unwrap(), "--seed", "5",
    ]);
    assert_exit(&out, 0, "synth one");
    let input = traj_dir.join("full_00000.jsonl");
    let seg_rad = dir.path().join("rad.json");
    let seg_deg = dir.path().join("deg.json");
    let out = run_cli(&[
        "segment",
        "--input",
        input.to_str().unwrap(),
        "--out",
        seg_rad.to_str().unwrap(),
        "--angle-thresh",
        "1.0471975511965976",
    ]);
    assert_exit(&out, 0, "segment radians");
    let out = run_cli(&[
        "segment",
        "--input",
        input.to_str().unwrap(),
        "--out",
        seg_deg.to_str().unwrap(),
        "--angle-thresh",
        "60deg",
    ]);
    assert_exit(&out, 0, "segment degrees");
    assert_eq!(
        std::fs::read(&seg_rad).unwrap(),
        std::fs::read(&seg_deg).unwrap(),
        "60deg must equal pi/3 radians"
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&seg_rad).unwrap()).unwrap();
    assert_eq!(doc["format"], "manipkit.segments");
    assert!(doc["segmentation"]["segments"].as_array().unwrap().len() >= 2);
}

#[test]
fn stats_reports_counts_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    for (mode, count, seed) in [("full", "4", "1"), ("srp", "6", "2")] {
        let out = run_cli(&[
            "synth", "--mode", mode, "--count", count, "--out-dir",
            corpus.to_str().unwrap(), "--seed", seed,
        ]);
        assert_exit(&out, 0, "synth");
    }
    let out = run_cli(&["stats", "--dir", corpus.to_str().unwrap()]);
    assert_exit(&out, 0, "stats");
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(doc["stats"]["full_trajectories"], 4);
    assert_eq!(doc["stats"]["srp_only_trajectories"], 6);
    assert!(doc["stats"]["full_to_srp_length_ratio"].as_f64().unwrap() > 1.0);
}

#[test]
fn wrong_trajectory_version_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = run_cli(&[
        "synth", "--mode", "srp", "--count", "1", "--out-dir",
        corpus.to_str().unwrap(), "--seed", "5",
    ]);
    assert_exit(&out, 0, "synth");
    let path = corpus.join("srp_00000.jsonl");
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replacen("\"1.0.0\"", "\"3.0.0\"", 1);
    std::fs::write(&path, text).unwrap();
    let out = run_cli(&[
        "segment",
        "--input",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("s.json").to_str().unwrap(),
    ]);
    assert_exit(&out, 2, "future major version");
}

#[test]
fn annotate_labels_document_echoes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cloud_path = dir.path().join("cube.ply");
    write_point_cloud(&cloud_path, &cube_surface_cloud(0.08, 1500, 3, "cube")).unwrap();
    let labels_path = dir.path().join("labels.json");
    let out = run_cli(&[
        "annotate-grasps",
        "--cloud",
        cloud_path.to_str().unwrap(),
        "--out",
        labels_path.to_str().unwrap(),
        "--seed",
        "9",
        "--n-approach",
        "6",
        "--k-rolls",
        "3",
        "--m-seeds",
        "12",
        "--depths",
        "0.015,0.025",
        "--mu",
        "0.3",
    ]);
    assert_exit(&out, 0, "annotate");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&labels_path).unwrap()).unwrap();
    assert_eq!(doc["format"], "manipkit.grasp-labels");
    assert_eq!(doc["object_id"], "cube");
    assert_eq!(doc["params"]["seed"], 9);
    assert_eq!(doc["params"]["mu"], 0.3);
    assert_eq!(doc["params"]["depths"].as_array().unwrap().len(), 2);
    assert_eq!(doc["gripper"]["opening_width"], 0.08);
}
