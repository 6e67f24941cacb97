//! Deterministic synthetic data: scripted pick-and-lift trajectories with
//! ground-truth phase labels, and surface clouds for annotation tests.
//!
//! Trajectories are scripted rather than planned: straight polyline legs at
//! a fixed step length, one noisy intermediate waypoint per approach leg,
//! a linear descent from the sampled approach pose to the grasp, a
//! five-step gripper close, and a vertical lift that carries the target.
//! Ground-truth labels are assigned by running the segmentation labeling
//! procedure on the clean geometry, so they agree with the rule-based
//! segmenter exactly on noise-free data.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::geom::{align_z_to, Direction, Pose};
use crate::grasp::{PointCloud, SurfacePoint};
use crate::traj::{
    approach_pose, label_steps, sample_offset, OffsetRanges, SegmentationConfig, Source,
    Trajectory, TrajectoryStep,
};
use crate::rng::{derive_seed, rng_from_seed, standard_normal, uniform_range};

/// Axis-aligned box given by inclusive corner bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Result<Self> {
        if min.iter().zip(max.iter()).any(|(lo, hi)| lo > hi) {
            return Err(Error::InvalidArgument("box min must not exceed max".into()));
        }
        Ok(Aabb { min, max })
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - 1e-12 && p[i] <= self.max[i] + 1e-12)
    }

    fn clamp(&self, p: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
            p.z.clamp(self.min.z, self.max.z),
        )
    }

    fn sample(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Vector3<f64> {
        Vector3::new(
            uniform_range(rng, self.min.x, self.max.x),
            uniform_range(rng, self.min.y, self.max.y),
            uniform_range(rng, self.min.z, self.max.z),
        )
    }
}

/// Scripted-task description for the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTaskSpec {
    /// Space every end-effector position must stay inside.
    pub workspace: Aabb,
    /// Sampler bounds for the target object position.
    pub target_bounds: Aabb,
    /// Grasp pose relative to the target frame; its +z must point at the
    /// object so the phase rule holds near the grasp.
    pub grasp_offset: Pose,
    pub offset_ranges: OffsetRanges,
    /// Path discretization, meters per step.
    pub step_len: f64,
    /// Vertical carry distance after the grasp closes.
    pub lift_height: f64,
    pub target_id: String,
    pub seed: u64,
}

impl Default for SynthTaskSpec {
    fn default() -> Self {
        SynthTaskSpec {
            workspace: Aabb {
                min: Vector3::new(-0.6, -0.6, 0.0),
                max: Vector3::new(0.6, 0.6, 0.8),
            },
            target_bounds: Aabb {
                min: Vector3::new(-0.2, -0.2, 0.32),
                max: Vector3::new(0.2, 0.2, 0.42),
            },
            // Top-down grasp 2 cm above the object center, +z pointing down
            // at it.
            grasp_offset: Pose::new(
                UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI),
                Vector3::new(0.0, 0.0, 0.02),
            ),
            offset_ranges: OffsetRanges::default(),
            step_len: 0.01,
            lift_height: 0.10,
            target_id: "target".into(),
            seed: 0,
        }
    }
}

const STEP_PERIOD: f64 = 1.0 / 30.0;
const CLOSE_STEPS: usize = 5;
/// Minimum start distance from the target, outside the phase-rule ball.
const MIN_START_DISTANCE: f64 = 0.25;

impl SynthTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.step_len.is_finite() || self.step_len <= 0.0 {
            return Err(Error::InvalidArgument("step_len must be positive".into()));
        }
        if !self.lift_height.is_finite() || self.lift_height <= 0.0 {
            return Err(Error::InvalidArgument(
                "lift_height must be positive".into(),
            ));
        }
        self.offset_ranges.validate()?;
        if (0..3).any(|i| self.workspace.min[i] >= self.workspace.max[i]) {
            return Err(Error::InvalidArgument("degenerate workspace box".into()));
        }
        Ok(())
    }

    /// Clearance the grasp pose needs inside the workspace: room for the
    /// sampled offset ball plus the lift.
    fn required_clearance(&self) -> f64 {
        0.2 + self.lift_height
    }
}

struct TaskDraw {
    target_pos: Vector3<f64>,
    grasp: Pose,
    grasp_app: Pose,
    offset: Pose,
    start: Pose,
    waypoint: Vector3<f64>,
}

fn draw_task(spec: &SynthTaskSpec) -> Result<TaskDraw> {
    spec.validate()?;

    let mut target_rng = rng_from_seed(derive_seed(spec.seed, 0));
    let target_pos = spec.target_bounds.sample(&mut target_rng);
    let target_pose = Pose::new(UnitQuaternion::identity(), target_pos);
    let grasp = target_pose.compose(&spec.grasp_offset);

    if !spec.workspace.contains(&grasp.translation) {
        return Err(Error::InvalidArgument(
            "grasp pose lies outside the workspace".into(),
        ));
    }
    let clearance = spec.required_clearance();
    let shrunk = Aabb {
        min: spec.workspace.min.add_scalar(clearance),
        max: spec.workspace.max.add_scalar(-clearance),
    };
    if (0..3).any(|i| shrunk.min[i] > shrunk.max[i]) || !shrunk.contains(&grasp.translation) {
        return Err(Error::InvalidArgument(format!(
            "grasp pose needs {clearance:.2} m of workspace clearance"
        )));
    }

    let offset = sample_offset(&spec.offset_ranges, derive_seed(spec.seed, 1))?;
    let grasp_app = approach_pose(&grasp, &offset);

    let mut start_rng = rng_from_seed(derive_seed(spec.seed, 2));
    let mut start_pos = spec.workspace.sample(&mut start_rng);
    for _ in 0..10_000 {
        if (start_pos - target_pos).norm() >= MIN_START_DISTANCE {
            break;
        }
        start_pos = spec.workspace.sample(&mut start_rng);
    }
    if (start_pos - target_pos).norm() < MIN_START_DISTANCE {
        return Err(Error::InvalidArgument(
            "workspace too small to place a start pose away from the target".into(),
        ));
    }
    let gaze = Direction::new(target_pos - start_pos).expect("start is away from target");
    let start = Pose::new(align_z_to(&gaze), start_pos);

    // One intermediate waypoint per approach leg, jittered by up to 10% of
    // the leg length, clamped back into the workspace.
    let mut wp_rng = rng_from_seed(derive_seed(spec.seed, 3));
    let leg = grasp_app.translation - start_pos;
    let mid = start_pos + leg / 2.0;
    let jitter = Vector3::new(
        uniform_range(&mut wp_rng, -1.0, 1.0),
        uniform_range(&mut wp_rng, -1.0, 1.0),
        uniform_range(&mut wp_rng, -1.0, 1.0),
    ) * (0.1 * leg.norm() / 2.0);
    let waypoint = spec.workspace.clamp(&(mid + jitter));

    Ok(TaskDraw {
        target_pos,
        grasp,
        grasp_app,
        offset,
        start,
        waypoint,
    })
}

/// Positions along a polyline at (roughly) fixed step length, including both
/// endpoints, paired with the cumulative arc-length fraction.
fn walk_polyline(points: &[Vector3<f64>], step_len: f64) -> Vec<(Vector3<f64>, f64)> {
    let total: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let mut out = vec![(points[0], 0.0)];
    let mut travelled = 0.0;
    for w in points.windows(2) {
        let leg = w[1] - w[0];
        let len = leg.norm();
        if len < 1e-12 {
            continue;
        }
        let n = (len / step_len).ceil().max(1.0) as usize;
        for i in 1..=n {
            let f = i as f64 / n as f64;
            let dist = travelled + len * f;
            out.push((w[0] + leg * f, if total > 0.0 { dist / total } else { 1.0 }));
        }
        travelled += len;
    }
    out
}

fn build_full_steps(spec: &SynthTaskSpec, draw: &TaskDraw) -> Vec<TrajectoryStep> {
    let mut steps: Vec<TrajectoryStep> = Vec::new();
    let push = |pose: Pose, gripper: f64, target: Vector3<f64>, steps: &mut Vec<TrajectoryStep>| {
        let t = steps.len() as f64 * STEP_PERIOD;
        steps.push(TrajectoryStep {
            t,
            ee_pose: pose,
            gripper_open: gripper,
            target_position: Some(target),
            gt_phase: None,
        });
    };

    // Approach: start -> waypoint -> approach pose, orientation slerped by
    // arc length.
    for (pos, f) in walk_polyline(
        &[draw.start.translation, draw.waypoint, draw.grasp_app.translation],
        spec.step_len,
    ) {
        let rot = draw
            .start
            .rotation
            .try_slerp(&draw.grasp_app.rotation, f, 1e-9)
            .unwrap_or(draw.grasp_app.rotation);
        push(Pose::new(rot, pos), 1.0, draw.target_pos, &mut steps);
    }

    // Descent: approach pose -> grasp.
    for (pos, f) in walk_polyline(
        &[draw.grasp_app.translation, draw.grasp.translation],
        spec.step_len,
    )
    .into_iter()
    .skip(1)
    {
        let rot = draw
            .grasp_app
            .rotation
            .try_slerp(&draw.grasp.rotation, f, 1e-9)
            .unwrap_or(draw.grasp.rotation);
        push(Pose::new(rot, pos), 1.0, draw.target_pos, &mut steps);
    }

    // Close the gripper over five steps; the object stays put.
    for i in 1..=CLOSE_STEPS {
        let open = 1.0 - i as f64 / CLOSE_STEPS as f64;
        push(draw.grasp, open, draw.target_pos, &mut steps);
    }

    // Lift: end effector and target rise together by exactly lift_height.
    let lift_steps = (spec.lift_height / spec.step_len).ceil().max(1.0) as usize;
    for i in 1..=lift_steps {
        let dz = if i == lift_steps {
            spec.lift_height
        } else {
            spec.lift_height * i as f64 / lift_steps as f64
        };
        let rise = Vector3::new(0.0, 0.0, dz);
        push(
            Pose::new(draw.grasp.rotation, draw.grasp.translation + rise),
            0.0,
            draw.target_pos + rise,
            &mut steps,
        );
    }
    steps
}

fn attach_gt(mut traj: Trajectory) -> Trajectory {
    let labels = label_steps(&traj, &SegmentationConfig::default());
    for (step, phase) in traj.steps.iter_mut().zip(labels) {
        step.gt_phase = Some(phase);
    }
    traj
}

/// Generate a full pick-and-lift trajectory with ground-truth labels.
pub fn gen_full(spec: &SynthTaskSpec) -> Result<Trajectory> {
    let draw = draw_task(spec)?;
    let steps = build_full_steps(spec, &draw);
    let traj = Trajectory::new(
        steps,
        format!("pick up the {}", spec.target_id),
        spec.target_id.clone(),
        Pose::new(UnitQuaternion::identity(), draw.target_pos),
        Source::Full,
        spec.seed,
    )?;
    Ok(attach_gt(traj))
}

/// Generate an approach-only trajectory ending exactly at the sampled
/// approach pose; the gripper never closes.
pub fn gen_srp_only(spec: &SynthTaskSpec) -> Result<Trajectory> {
    let draw = draw_task(spec)?;
    let mut steps: Vec<TrajectoryStep> = Vec::new();
    for (pos, f) in walk_polyline(
        &[draw.start.translation, draw.waypoint, draw.grasp_app.translation],
        spec.step_len,
    ) {
        let rot = draw
            .start
            .rotation
            .try_slerp(&draw.grasp_app.rotation, f, 1e-9)
            .unwrap_or(draw.grasp_app.rotation);
        steps.push(TrajectoryStep {
            t: steps.len() as f64 * STEP_PERIOD,
            ee_pose: Pose::new(rot, pos),
            gripper_open: 1.0,
            target_position: Some(draw.target_pos),
            gt_phase: None,
        });
    }
    // Land exactly on the approach pose.
    if let Some(last) = steps.last_mut() {
        last.ee_pose = draw.grasp_app;
    }
    let traj = Trajectory::new(
        steps,
        format!("approach the {}", spec.target_id),
        spec.target_id.clone(),
        Pose::new(UnitQuaternion::identity(), draw.target_pos),
        Source::SrpOnly,
        spec.seed,
    )?;
    Ok(attach_gt(traj))
}

/// The grasp pose and sampled offset a seed deterministically maps to;
/// exposed so tests can validate the approach-pose contract.
pub fn task_poses(spec: &SynthTaskSpec) -> Result<(Pose, Pose, Pose)> {
    let draw = draw_task(spec)?;
    Ok((draw.grasp, draw.offset, draw.grasp_app))
}

/// Copy of a trajectory with zero-mean Gaussian noise of the given standard
/// deviation added to every end-effector position. Ground-truth labels and
/// target positions are untouched.
pub fn with_position_noise(traj: &Trajectory, sigma: f64, seed: u64) -> Trajectory {
    let mut rng = rng_from_seed(seed);
    let mut noisy = traj.clone();
    for step in &mut noisy.steps {
        let offset = Vector3::new(
            standard_normal(&mut rng),
            standard_normal(&mut rng),
            standard_normal(&mut rng),
        ) * sigma;
        step.ee_pose = Pose::new(step.ee_pose.rotation, step.ee_pose.translation + offset);
    }
    noisy
}

/// Deterministic cube surface cloud: faces assigned round-robin so each of
/// the six faces holds exactly every sixth point, positions uniform over
/// the face, outward exact face normals.
pub fn cube_surface_cloud(side: f64, n_points: usize, seed: u64, object_id: &str) -> PointCloud {
    let mut rng = rng_from_seed(seed);
    let h = side / 2.0;
    let mut points = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let u = uniform_range(&mut rng, -h, h);
        let v = uniform_range(&mut rng, -h, h);
        let (position, normal) = match i % 6 {
            0 => (Vector3::new(u, v, h), Vector3::z()),
            1 => (Vector3::new(u, v, -h), -Vector3::z()),
            2 => (Vector3::new(u, h, v), Vector3::y()),
            3 => (Vector3::new(u, -h, v), -Vector3::y()),
            4 => (Vector3::new(h, u, v), Vector3::x()),
            _ => (Vector3::new(-h, u, v), -Vector3::x()),
        };
        points.push(SurfacePoint {
            position,
            normal: Direction::new(normal).expect("axis normals are unit"),
        });
    }
    PointCloud::new(points, object_id).expect("cube coordinates are finite")
}
