//! Shared helpers for integration tests: a CLI runner and an independent
//! brute-force grasp re-checker written in plain scalar math (no crate
//! geometry code) so label verification does not share a code path with the
//! implementation under test.

// Each test binary compiles its own copy and uses a different subset.
#![allow(dead_code)]

use std::path::Path;
use std::process::Output;

pub fn run_cli(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_manipkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn assert_exit(output: &Output, code: i32, context: &str) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "{context}: expected exit {code}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Snapshot of a directory: file name -> bytes.
pub fn dir_snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut map = std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("dir readable") {
        let path = entry.expect("entry").path();
        if path.is_file() {
            map.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).expect("file readable"),
            );
        }
    }
    map
}

pub fn clear_dir(dir: &Path) {
    for entry in std::fs::read_dir(dir).expect("dir readable") {
        let path = entry.expect("entry").path();
        if path.is_file() {
            std::fs::remove_file(path).expect("removable");
        }
    }
}

// ---------------------------------------------------------------------------
// Independent brute-force grasp oracle.
// ---------------------------------------------------------------------------

pub struct RawPoint {
    pub pos: [f64; 3],
    pub normal: [f64; 3],
}

/// Minimal ASCII PLY reader for the oracle: assumes the x y z nx ny nz
/// column order the suite writes.
pub fn parse_ply_rows(text: &str) -> Vec<RawPoint> {
    let mut rows = Vec::new();
    let mut in_data = false;
    for line in text.lines() {
        if in_data {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|w| w.parse().expect("number"))
                .collect();
            if vals.len() >= 6 {
                rows.push(RawPoint {
                    pos: [vals[0], vals[1], vals[2]],
                    normal: [vals[3], vals[4], vals[5]],
                });
            }
        } else if line.trim() == "end_header" {
            in_data = true;
        }
    }
    rows
}

pub struct RawGripper {
    pub finger: [f64; 3],
    pub palm: [f64; 3],
    pub width: f64,
    pub length: f64,
    pub min_bite: f64,
}

/// Rotation matrix from a unit quaternion (w, x, y, z), textbook formula.
pub fn quat_to_matrix(q: [f64; 4]) -> [[f64; 3]; 3] {
    let [w, x, y, z] = q;
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn mat_t_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    // Transpose times vector.
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

struct OracleBox {
    center: [f64; 3],
    half: [f64; 3],
}

fn gripper_boxes(g: &RawGripper) -> [OracleBox; 3] {
    let fy = (g.width + g.finger[1]) / 2.0;
    [
        OracleBox {
            center: [0.0, fy, -g.finger[2] / 2.0],
            half: [g.finger[0] / 2.0, g.finger[1] / 2.0, g.finger[2] / 2.0],
        },
        OracleBox {
            center: [0.0, -fy, -g.finger[2] / 2.0],
            half: [g.finger[0] / 2.0, g.finger[1] / 2.0, g.finger[2] / 2.0],
        },
        OracleBox {
            center: [0.0, 0.0, -g.finger[2] - g.palm[2] / 2.0],
            half: [g.palm[0] / 2.0, g.palm[1] / 2.0, g.palm[2] / 2.0],
        },
    ]
}

/// Re-verify one emitted label from scratch. Returns an error string naming
/// the first violated condition.
pub fn recheck_label(
    pose_q: [f64; 4],
    pose_t: [f64; 3],
    g: &RawGripper,
    mu: f64,
    points: &[RawPoint],
    recorded_contacts: [usize; 2],
) -> Result<(), String> {
    let rot = quat_to_matrix(pose_q);
    let boxes = gripper_boxes(g);

    // Collision: no point strictly inside any box.
    for (i, p) in points.iter().enumerate() {
        let local = mat_t_vec(&rot, sub(p.pos, pose_t));
        for (bi, b) in boxes.iter().enumerate() {
            if (local[0] - b.center[0]).abs() < b.half[0]
                && (local[1] - b.center[1]).abs() < b.half[1]
                && (local[2] - b.center[2]).abs() < b.half[2]
            {
                return Err(format!("point {i} inside box {bi}"));
            }
        }
    }

    // Bite depth over the closing slab.
    let mut deepest: f64 = 0.0;
    for p in points {
        let local = mat_t_vec(&rot, sub(p.pos, pose_t));
        if local[0].abs() <= g.finger[0] / 2.0
            && local[1].abs() <= g.width / 2.0
            && local[2] <= 0.0
            && local[2] >= -g.length
        {
            deepest = deepest.max(-local[2]);
        }
    }
    if deepest < g.min_bite {
        return Err(format!("bite depth {deepest} below {}", g.min_bite));
    }

    // Contact selection: nearest point to each finger inner face center,
    // ties to the lowest index.
    let mut contacts = [usize::MAX; 2];
    for (k, sign) in [1.0f64, -1.0].iter().enumerate() {
        let face_local = [0.0, sign * g.width / 2.0, -g.length / 2.0];
        let face_world = {
            let r = mat_vec(&rot, face_local);
            [r[0] + pose_t[0], r[1] + pose_t[1], r[2] + pose_t[2]]
        };
        let mut best = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d = norm(sub(p.pos, face_world));
            if d < best {
                best = d;
                contacts[k] = i;
            }
        }
    }
    if contacts != recorded_contacts {
        return Err(format!(
            "contact mismatch: oracle {contacts:?}, label {recorded_contacts:?}"
        ));
    }
    let (pi, pj) = (&points[contacts[0]], &points[contacts[1]]);
    if contacts[0] == contacts[1] {
        return Err("degenerate contacts".into());
    }

    // Friction cone: both contact angles strictly inside atan(mu).
    let cone = mu.atan();
    let d_ij = sub(pi.pos, pj.pos);
    for (n, d) in [
        (pi.normal, d_ij),
        (pj.normal, [-d_ij[0], -d_ij[1], -d_ij[2]]),
    ] {
        let cos_angle = dot(n, d) / (norm(n) * norm(d));
        let angle = cos_angle.clamp(-1.0, 1.0).acos();
        if angle >= cone {
            return Err(format!("contact angle {angle} outside cone {cone}"));
        }
    }
    Ok(())
}
