//! Grasp-candidate generation and filtering on surface point clouds.
//!
//! Candidates are generated from M surface seed points, N lattice approach
//! directions, K in-plane rolls over a semicircle, and D bite depths
//! (`D*M*N*K` total). Each candidate is kept only if the three-box gripper
//! model is collision-free against the cloud, the bite depth clears the
//! configured minimum, and the two-contact friction-cone test passes.
//!
//! Grasp frame convention: +z is the approach axis pointing toward the
//! object, +y the finger closing axis, origin at the fingertip plane
//! midpoint. The gripper body therefore occupies z < 0 and the object
//! protrudes into the closing region from z = 0 downward (in local
//! coordinates, a point's bite depth is `-z`).

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::geom::{align_z_to, angle_between, fibonacci_directions, Direction, Pose};
use crate::parallel::{map_indexed, map_indexed_seq};
use crate::rng::{rng_from_seed, sample_indices_without_replacement, uniform_index};

/// Surface point with outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub normal: Direction,
}

/// Object surface cloud; position units are meters.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<SurfacePoint>,
    pub object_id: String,
}

impl PointCloud {
    pub fn new(points: Vec<SurfacePoint>, object_id: impl Into<String>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.position.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coordinate at point {i}"
                )));
            }
        }
        Ok(PointCloud {
            points,
            object_id: object_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Apply a rigid transform to every point and normal.
    pub fn transformed(&self, t: &Pose) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| SurfacePoint {
                    position: t.transform_point(&p.position),
                    normal: Direction::new(t.transform_vector(p.normal.as_vector()))
                        .expect("rotation preserves unit norm"),
                })
                .collect(),
            object_id: self.object_id.clone(),
        }
    }
}

/// Three-box gripper: two fingers plus a palm block.
///
/// `finger_extents` are the full box dimensions of one finger along the
/// grasp-frame axes (x across the finger, y through its thickness, z along
/// its length); fingers sit just outside the opening, so the inner faces are
/// at `y = ±opening_width/2`. The palm block sits behind the fingers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperModel {
    pub finger_extents: Vector3<f64>,
    pub palm_extents: Vector3<f64>,
    pub opening_width: f64,
    pub finger_length: f64,
    pub min_bite_depth: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            finger_extents: Vector3::new(0.02, 0.01, 0.04),
            palm_extents: Vector3::new(0.08, 0.03, 0.03),
            opening_width: 0.08,
            finger_length: 0.04,
            min_bite_depth: 0.005,
        }
    }
}

/// Axis-aligned box in the grasp frame.
#[derive(Debug, Clone, Copy)]
pub struct GraspFrameBox {
    pub center: Vector3<f64>,
    pub half_extents: Vector3<f64>,
}

impl GraspFrameBox {
    /// Strict interior test: points exactly on a face count as outside.
    pub fn contains_strict(&self, q: &Vector3<f64>) -> bool {
        (q.x - self.center.x).abs() < self.half_extents.x
            && (q.y - self.center.y).abs() < self.half_extents.y
            && (q.z - self.center.z).abs() < self.half_extents.z
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.finger_extents.iter().all(|e| *e > 0.0)
            && self.palm_extents.iter().all(|e| *e > 0.0)
            && self.opening_width > 0.0
            && self.finger_length > 0.0;
        if !all_positive {
            return Err(Error::InvalidArgument(
                "gripper extents, opening width and finger length must be positive".into(),
            ));
        }
        if !(self.min_bite_depth > 0.0 && self.min_bite_depth < self.finger_length) {
            return Err(Error::InvalidArgument(
                "min bite depth must lie in (0, finger_length)".into(),
            ));
        }
        Ok(())
    }

    /// The two finger boxes and the palm box in the grasp frame.
    pub fn collision_boxes(&self) -> [GraspFrameBox; 3] {
        let f = self.finger_extents;
        let p = self.palm_extents;
        let finger_y = (self.opening_width + f.y) / 2.0;
        [
            GraspFrameBox {
                center: Vector3::new(0.0, finger_y, -f.z / 2.0),
                half_extents: f / 2.0,
            },
            GraspFrameBox {
                center: Vector3::new(0.0, -finger_y, -f.z / 2.0),
                half_extents: f / 2.0,
            },
            GraspFrameBox {
                center: Vector3::new(0.0, 0.0, -f.z - p.z / 2.0),
                half_extents: p / 2.0,
            },
        ]
    }

    /// Inner face centers of the two fingers, grasp frame, (+y, -y) order.
    pub fn finger_face_centers(&self) -> (Vector3<f64>, Vector3<f64>) {
        let y = self.opening_width / 2.0;
        let z = -self.finger_length / 2.0;
        (Vector3::new(0.0, y, z), Vector3::new(0.0, -y, z))
    }

    /// Half-extents of the closing-region slab (bite region between the
    /// finger inner faces).
    fn slab_half(&self) -> Vector3<f64> {
        Vector3::new(
            self.finger_extents.x / 2.0,
            self.opening_width / 2.0,
            self.finger_length / 2.0,
        )
    }

    /// z-depth of the whole gripper body behind the fingertip plane.
    fn body_depth(&self) -> f64 {
        self.finger_extents.z + self.palm_extents.z
    }

    /// Half-width of the gross bounding window in x and y.
    fn gross_half_xy(&self) -> (f64, f64) {
        let x = (self.finger_extents.x / 2.0).max(self.palm_extents.x / 2.0);
        let y = (self.opening_width / 2.0 + self.finger_extents.y).max(self.palm_extents.y / 2.0);
        (x, y)
    }
}

/// Lattice coordinates of a candidate, used for canonical output ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CandidateId {
    pub seed: usize,
    pub approach: usize,
    pub roll: usize,
    pub depth: usize,
}

/// A candidate gripper pose derived from one (seed, approach, roll, depth)
/// combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspCandidate {
    pub pose: Pose,
    pub seed_point: Vector3<f64>,
    pub depth: f64,
    pub id: CandidateId,
}

/// Candidate that survived all filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspLabel {
    pub candidate: GraspCandidate,
    pub bite_depth: f64,
    pub friction_margins: (f64, f64),
    pub contact_indices: (usize, usize),
}

/// Generation and filtering parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationParams {
    pub n_approach: usize,
    pub k_rolls: usize,
    pub m_seeds: usize,
    pub depths: Vec<f64>,
    pub mu: f64,
    pub seed: u64,
}

impl Default for AnnotationParams {
    fn default() -> Self {
        AnnotationParams {
            n_approach: 64,
            k_rolls: 12,
            m_seeds: 256,
            depths: vec![0.01, 0.02, 0.03],
            mu: 0.2,
            seed: 0,
        }
    }
}

impl AnnotationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_approach == 0 || self.k_rolls == 0 || self.m_seeds == 0 {
            return Err(Error::InvalidArgument(
                "n_approach, k_rolls and m_seeds must be >= 1".into(),
            ));
        }
        let depth_ok = |d: &f64| d.is_finite() && *d > 0.0;
        if self.depths.is_empty() || !self.depths.iter().all(depth_ok) {
            return Err(Error::InvalidArgument(
                "depth list must be non-empty with positive entries".into(),
            ));
        }
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::InvalidArgument("mu must be positive".into()));
        }
        Ok(())
    }
}

/// Seed points drawn from the cloud.
#[derive(Debug, Clone)]
pub struct SeedSample {
    pub points: Vec<SurfacePoint>,
    pub indices: Vec<usize>,
    /// Set when `m` exceeded the cloud size and sampling fell back to
    /// drawing with replacement.
    pub with_replacement: bool,
}

/// Draw `m` seed points uniformly from the cloud, without replacement when
/// it is large enough; deterministic for a fixed seed.
pub fn sample_seed_points(cloud: &PointCloud, m: usize, seed: u64) -> Result<SeedSample> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud has no points".into()));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let (indices, with_replacement) = if m <= cloud.len() {
        (
            sample_indices_without_replacement(&mut rng, cloud.len(), m),
            false,
        )
    } else {
        (
            (0..m).map(|_| uniform_index(&mut rng, cloud.len())).collect(),
            true,
        )
    };
    let points = indices.iter().map(|&i| cloud.points[i]).collect();
    Ok(SeedSample {
        points,
        indices,
        with_replacement,
    })
}

/// Grasp pose for one seed/approach/roll/depth combination: +z aligned to
/// the approach axis, rolled about it, translated to `seed + approach*depth`.
pub fn candidate_pose(
    seed_point: &Vector3<f64>,
    approach: &Direction,
    roll_angle: f64,
    depth: f64,
) -> Pose {
    let align = align_z_to(approach);
    let roll = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), roll_angle);
    Pose::new(align * roll, seed_point + approach.as_vector() * depth)
}

/// All `D*M*N*K` candidates in canonical (seed, approach, roll, depth) order.
pub fn generate_candidates(
    seeds: &[SurfacePoint],
    params: &AnnotationParams,
) -> Result<Vec<GraspCandidate>> {
    if seeds.is_empty() {
        return Err(Error::EmptyInput("seed list is empty".into()));
    }
    params.validate()?;
    let approaches = fibonacci_directions(params.n_approach)?;
    let k = params.k_rolls;
    let mut out =
        Vec::with_capacity(seeds.len() * approaches.len() * k * params.depths.len());
    for (mi, seed) in seeds.iter().enumerate() {
        for (ni, approach) in approaches.iter().enumerate() {
            for ki in 0..k {
                let angle = ki as f64 * std::f64::consts::PI / k as f64;
                for (di, depth) in params.depths.iter().enumerate() {
                    out.push(GraspCandidate {
                        pose: candidate_pose(&seed.position, approach, angle, *depth),
                        seed_point: seed.position,
                        depth: *depth,
                        id: CandidateId {
                            seed: mi,
                            approach: ni,
                            roll: ki,
                            depth: di,
                        },
                    });
                }
            }
        }
    }
    Ok(out)
}

/// True iff no cloud point lies strictly inside the gripper's three boxes
/// placed at the candidate pose.
pub fn collision_check(c: &GraspCandidate, cloud: &PointCloud, g: &GripperModel) -> bool {
    let boxes = g.collision_boxes();
    let inv = c.pose.inverse();
    !cloud.points.iter().any(|p| {
        let q = inv.transform_point(&p.position);
        boxes.iter().any(|b| b.contains_strict(&q))
    })
}

/// Depth of the deepest cloud point inside the closing region, measured from
/// the fingertip plane toward the palm; 0 when the region is empty.
pub fn bite_depth(c: &GraspCandidate, cloud: &PointCloud, g: &GripperModel) -> f64 {
    let slab = g.slab_half();
    let inv = c.pose.inverse();
    let mut deepest: f64 = 0.0;
    for p in &cloud.points {
        let q = inv.transform_point(&p.position);
        if q.x.abs() <= slab.x && q.y.abs() <= slab.y && q.z <= 0.0 && q.z >= -g.finger_length {
            deepest = deepest.max(-q.z);
        }
    }
    deepest
}

/// Outcome of the two-contact friction-cone test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceClosure {
    pub pass: bool,
    /// Friction-cone slack at each contact in radians; positive means the
    /// contact angle is inside the cone.
    pub margins: (f64, f64),
    pub contact_indices: (usize, usize),
}

/// Angle test at a fixed contact pair: both contact normals must lie within
/// `atan(mu)` of the inter-contact direction toward their own side.
pub fn friction_cone_test(
    p_i: &Vector3<f64>,
    n_i: &Vector3<f64>,
    p_j: &Vector3<f64>,
    n_j: &Vector3<f64>,
    mu: f64,
) -> (bool, (f64, f64)) {
    let cone = mu.atan();
    let d = p_i - p_j;
    let margin_i = cone - angle_between(n_i, &d);
    let margin_j = cone - angle_between(n_j, &(-d));
    (margin_i > 0.0 && margin_j > 0.0, (margin_i, margin_j))
}

/// Select the cloud point nearest each finger inner face center as contacts
/// and run the friction-cone test.
pub fn force_closure_check(
    c: &GraspCandidate,
    cloud: &PointCloud,
    g: &GripperModel,
    mu: f64,
) -> Result<ForceClosure> {
    if cloud.len() < 2 {
        return Err(Error::EmptyInput(
            "force closure needs at least two cloud points".into(),
        ));
    }
    let (face_pos, face_neg) = g.finger_face_centers();
    let fp = c.pose.transform_point(&face_pos);
    let fq = c.pose.transform_point(&face_neg);
    let i = nearest_point_index(cloud, &fp);
    let j = nearest_point_index(cloud, &fq);
    if i == j {
        return Err(Error::DegenerateContact(i));
    }
    let pi = &cloud.points[i];
    let pj = &cloud.points[j];
    let (pass, margins) = friction_cone_test(
        &pi.position,
        pi.normal.as_vector(),
        &pj.position,
        pj.normal.as_vector(),
        mu,
    );
    Ok(ForceClosure {
        pass,
        margins,
        contact_indices: (i, j),
    })
}

fn nearest_point_index(cloud: &PointCloud, target: &Vector3<f64>) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (idx, p) in cloud.points.iter().enumerate() {
        let d2 = (p.position - target).norm_squared();
        if d2 < best.0 {
            best = (d2, idx);
        }
    }
    best.1
}

/// Run the full pipeline: generate candidates, drop colliding ones, require
/// `bite_depth >= min_bite_depth`, keep force-closure passes. Output is in
/// canonical (seed, approach, roll, depth) order regardless of parallelism.
pub fn annotate(
    cloud: &PointCloud,
    g: &GripperModel,
    params: &AnnotationParams,
) -> Result<Vec<GraspLabel>> {
    annotate_impl(cloud, g, params, false)
}

/// Single-threaded reference path; identical output to [`annotate`].
pub fn annotate_sequential(
    cloud: &PointCloud,
    g: &GripperModel,
    params: &AnnotationParams,
) -> Result<Vec<GraspLabel>> {
    annotate_impl(cloud, g, params, true)
}

fn annotate_impl(
    cloud: &PointCloud,
    g: &GripperModel,
    params: &AnnotationParams,
    force_sequential: bool,
) -> Result<Vec<GraspLabel>> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud has no points".into()));
    }
    params.validate()?;
    g.validate()?;

    let seeds = sample_seed_points(cloud, params.m_seeds, params.seed)?;
    let approaches = fibonacci_directions(params.n_approach)?;
    let k = params.k_rolls;

    // Work is grouped by (approach, roll): all M*D candidates in a group
    // share one rotation, so the cloud is rotated once per group.
    let groups = approaches.len() * k;
    let run = |gi: usize| -> Vec<GraspLabel> {
        let ni = gi / k;
        let ki = gi % k;
        let angle = ki as f64 * std::f64::consts::PI / k as f64;
        filter_rotation_group(cloud, g, params, &seeds, &approaches[ni], ni, ki, angle)
    };

    let mut per_group = if force_sequential {
        map_indexed_seq(groups, run)
    } else {
        map_indexed(groups, run)
    };

    let mut labels: Vec<GraspLabel> = per_group.drain(..).flatten().collect();
    labels.sort_by_key(|l| l.candidate.id);
    Ok(labels)
}

/// Cloud rotated into a group's grasp orientation, sorted by local z for
/// windowed scans.
struct RotatedCloud {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    orig: Vec<u32>,
}

impl RotatedCloud {
    fn build(cloud: &PointCloud, rotation: &UnitQuaternion<f64>) -> Self {
        let rot_t = rotation.inverse().to_rotation_matrix();
        let n = cloud.len();
        let mut entries: Vec<(f64, f64, f64, u32)> = Vec::with_capacity(n);
        for (i, p) in cloud.points.iter().enumerate() {
            let q = rot_t * p.position;
            entries.push((q.z, q.x, q.y, i as u32));
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.3.cmp(&b.3)));
        let mut rc = RotatedCloud {
            xs: Vec::with_capacity(n),
            ys: Vec::with_capacity(n),
            zs: Vec::with_capacity(n),
            orig: Vec::with_capacity(n),
        };
        for (z, x, y, i) in entries {
            rc.zs.push(z);
            rc.xs.push(x);
            rc.ys.push(y);
            rc.orig.push(i);
        }
        rc
    }

    fn z_window(&self, lo: f64, hi: f64) -> (usize, usize) {
        let start = self.zs.partition_point(|z| *z < lo);
        let end = self.zs.partition_point(|z| *z <= hi);
        (start, end)
    }

    /// Nearest point to `target` (rotated coordinates), pruned by the sorted
    /// z axis; ties resolved toward the lowest original index.
    fn nearest(&self, target: &Vector3<f64>) -> usize {
        let pivot = self.zs.partition_point(|z| *z < target.z);
        let mut best_d2 = f64::INFINITY;
        let mut best_idx = usize::MAX;
        let visit = |i: usize, best_d2: &mut f64, best_idx: &mut usize| {
            let dx = self.xs[i] - target.x;
            let dy = self.ys[i] - target.y;
            let dz = self.zs[i] - target.z;
            let d2 = dx * dx + dy * dy + dz * dz;
            let orig = self.orig[i] as usize;
            if d2 < *best_d2 || (d2 == *best_d2 && orig < *best_idx) {
                *best_d2 = d2;
                *best_idx = orig;
            }
        };
        let (mut left, mut right) = (pivot as isize - 1, pivot);
        loop {
            let left_dz = if left >= 0 {
                (target.z - self.zs[left as usize]).abs()
            } else {
                f64::INFINITY
            };
            let right_dz = if right < self.zs.len() {
                (self.zs[right] - target.z).abs()
            } else {
                f64::INFINITY
            };
            if left_dz == f64::INFINITY && right_dz == f64::INFINITY {
                break;
            }
            if left_dz <= right_dz {
                if left_dz * left_dz > best_d2 {
                    left = -1;
                    if right_dz * right_dz > best_d2 {
                        break;
                    }
                    continue;
                }
                visit(left as usize, &mut best_d2, &mut best_idx);
                left -= 1;
            } else {
                if right_dz * right_dz > best_d2 {
                    right = self.zs.len();
                    if left_dz * left_dz > best_d2 {
                        break;
                    }
                    continue;
                }
                visit(right, &mut best_d2, &mut best_idx);
                right += 1;
            }
        }
        best_idx
    }
}

#[allow(clippy::too_many_arguments)]
fn filter_rotation_group(
    cloud: &PointCloud,
    g: &GripperModel,
    params: &AnnotationParams,
    seeds: &SeedSample,
    approach: &Direction,
    approach_idx: usize,
    roll_idx: usize,
    roll_angle: f64,
) -> Vec<GraspLabel> {
    let rotation =
        align_z_to(approach) * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), roll_angle);
    let rc = RotatedCloud::build(cloud, &rotation);
    let rot_t = rotation.inverse().to_rotation_matrix();

    let boxes = g.collision_boxes();
    let slab = g.slab_half();
    let (gross_x, gross_y) = g.gross_half_xy();
    let body_depth = g.body_depth();
    let (face_pos, face_neg) = g.finger_face_centers();
    let cone = params.mu.atan();

    let mut labels = Vec::new();
    for (mi, seed) in seeds.points.iter().enumerate() {
        for (di, depth) in params.depths.iter().enumerate() {
            let t = seed.position + approach.as_vector() * *depth;
            let c = rot_t * t;

            // Collision: scan the z window covering the gripper body.
            let (lo, hi) = rc.z_window(c.z - body_depth, c.z);
            let mut collides = false;
            for i in lo..hi {
                let qx = rc.xs[i] - c.x;
                let qy = rc.ys[i] - c.y;
                if qx.abs() >= gross_x || qy.abs() >= gross_y {
                    continue;
                }
                let q = Vector3::new(qx, qy, rc.zs[i] - c.z);
                if boxes.iter().any(|b| b.contains_strict(&q)) {
                    collides = true;
                    break;
                }
            }
            if collides {
                continue;
            }

            // Bite depth over the closing slab.
            let (lo, hi) = rc.z_window(c.z - g.finger_length, c.z);
            let mut deepest: f64 = 0.0;
            for i in lo..hi {
                if (rc.xs[i] - c.x).abs() <= slab.x && (rc.ys[i] - c.y).abs() <= slab.y {
                    deepest = deepest.max(c.z - rc.zs[i]);
                }
            }
            if deepest < g.min_bite_depth {
                continue;
            }

            // Contacts nearest the finger inner faces; a grasp whose two
            // faces select the same point cannot close on two contacts.
            let ci = rc.nearest(&(c + face_pos));
            let cj = rc.nearest(&(c + face_neg));
            if ci == cj {
                continue;
            }
            let pi = &cloud.points[ci];
            let pj = &cloud.points[cj];
            let d = pi.position - pj.position;
            let margin_i = cone - angle_between(pi.normal.as_vector(), &d);
            let margin_j = cone - angle_between(pj.normal.as_vector(), &(-d));
            if margin_i <= 0.0 || margin_j <= 0.0 {
                continue;
            }

            labels.push(GraspLabel {
                candidate: GraspCandidate {
                    pose: Pose::new(rotation, t),
                    seed_point: seed.position,
                    depth: *depth,
                    id: CandidateId {
                        seed: mi,
                        approach: approach_idx,
                        roll: roll_idx,
                        depth: di,
                    },
                },
                bite_depth: deepest,
                friction_margins: (margin_i, margin_j),
                contact_indices: (ci, cj),
            });
        }
    }
    labels
}
