//! Trajectory data model, approach-pose offset sampling, and phase
//! segmentation.
//!
//! A trajectory is split into spatial-reasoning (SRP) and
//! physical-interaction (PIP) phases. A step is PIP when the end effector is
//! within `dist_thresh` of the target and its approach axis (+z of the end
//! effector pose) points at the target within `angle_thresh`, both
//! inclusive. Once a trajectory enters PIP the label latches until the
//! interaction completes (gripper held closed for three steps and the
//! target displaced by `lift_thresh`), after which labeling reverts to the
//! per-step rule so later interactions can open new segments.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_between, rpy_to_rotation, EulerRpy, Pose};
use crate::rng::{rng_from_seed, uniform_range};

/// Trajectory phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Srp,
    Pip,
}

/// Whether a trajectory covers the whole task or only the approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Full,
    SrpOnly,
}

/// One timestamped end-effector state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub t: f64,
    pub ee_pose: Pose,
    /// Gripper opening fraction in [0, 1]; 1 is fully open.
    pub gripper_open: f64,
    /// Object position at this step; falls back to the header's initial
    /// target pose when absent (static scenes).
    pub target_position: Option<Vector3<f64>>,
    /// Ground-truth phase, present on synthesized trajectories.
    pub gt_phase: Option<Phase>,
}

/// Ordered demonstration trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub instruction: String,
    pub target_id: String,
    pub target_init_pose: Pose,
    pub source: Source,
    pub seed: u64,
}

impl Trajectory {
    pub fn new(
        steps: Vec<TrajectoryStep>,
        instruction: impl Into<String>,
        target_id: impl Into<String>,
        target_init_pose: Pose,
        source: Source,
        seed: u64,
    ) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::InvalidTrajectory(
                "a trajectory needs at least 2 steps".into(),
            ));
        }
        for w in steps.windows(2) {
            if w[1].t < w[0].t {
                return Err(Error::InvalidTrajectory(
                    "timestamps must be non-decreasing".into(),
                ));
            }
        }
        for (i, s) in steps.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.gripper_open) {
                return Err(Error::InvalidTrajectory(format!(
                    "gripper_open out of [0,1] at step {i}"
                )));
            }
        }
        Ok(Trajectory {
            steps,
            instruction: instruction.into(),
            target_id: target_id.into(),
            target_init_pose,
            source,
            seed,
        })
    }

    /// Target position at a step, applying the header fallback.
    pub fn target_at(&self, index: usize) -> Vector3<f64> {
        self.steps[index]
            .target_position
            .unwrap_or(self.target_init_pose.translation)
    }
}

/// Sampling intervals for the approach-pose offset, `(low, high)` pairs.
/// Defaults follow the data-collection parameter table: x in [0, 0.15] m,
/// y and z in ±0.05 m, roll in ±pi/4, pitch and yaw in ±pi/8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetRanges {
    pub dx: (f64, f64),
    pub dy: (f64, f64),
    pub dz: (f64, f64),
    pub droll: (f64, f64),
    pub dpitch: (f64, f64),
    pub dyaw: (f64, f64),
}

impl Default for OffsetRanges {
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
        OffsetRanges {
            dx: (0.0, 0.15),
            dy: (-0.05, 0.05),
            dz: (-0.05, 0.05),
            droll: (-FRAC_PI_4, FRAC_PI_4),
            dpitch: (-FRAC_PI_8, FRAC_PI_8),
            dyaw: (-FRAC_PI_8, FRAC_PI_8),
        }
    }
}

impl OffsetRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("dx", self.dx),
            ("dy", self.dy),
            ("dz", self.dz),
            ("droll", self.droll),
            ("dpitch", self.dpitch),
            ("dyaw", self.dyaw),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "offset range {name} must satisfy low <= high"
                )));
            }
        }
        Ok(())
    }

    /// True when the pose decomposes into offsets inside the intervals
    /// (tolerance for the half-open upper bound is irrelevant in practice).
    pub fn contains(&self, offset: &Pose) -> bool {
        let t = offset.translation;
        let Ok(e) = crate::geom::rotation_to_rpy(&offset.rotation) else {
            return false;
        };
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-12 && v <= hi + 1e-12;
        inside(t.x, self.dx)
            && inside(t.y, self.dy)
            && inside(t.z, self.dz)
            && inside(e.roll, self.droll)
            && inside(e.pitch, self.dpitch)
            && inside(e.yaw, self.dyaw)
    }
}

/// Segmentation thresholds; defaults follow the phase rule (0.2 m, pi/3)
/// plus the interaction-end heuristic values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub dist_thresh: f64,
    pub angle_thresh: f64,
    pub close_thresh: f64,
    pub lift_thresh: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            dist_thresh: 0.2,
            angle_thresh: std::f64::consts::FRAC_PI_3,
            close_thresh: 0.1,
            lift_thresh: 0.02,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dist_thresh > 0.0
            && self.angle_thresh > 0.0
            && self.close_thresh > 0.0
            && self.lift_thresh > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(
                "segmentation thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Contiguous run of one phase, inclusive step indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub phase: Phase,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Partition of a trajectory into alternating phase segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedTrajectory {
    pub num_steps: usize,
    pub segments: Vec<Segment>,
}

impl SegmentedTrajectory {
    /// Checks the partition invariants: full coverage, no overlap,
    /// alternating phases.
    pub fn validate(&self) -> Result<()> {
        let mut expected_start = 0;
        let mut prev_phase: Option<Phase> = None;
        for s in &self.segments {
            if s.start != expected_start || s.end < s.start {
                return Err(Error::InvalidTrajectory(
                    "segments must tile the step range".into(),
                ));
            }
            if prev_phase == Some(s.phase) {
                return Err(Error::InvalidTrajectory(
                    "adjacent segments must alternate phases".into(),
                ));
            }
            prev_phase = Some(s.phase);
            expected_start = s.end + 1;
        }
        if expected_start != self.num_steps {
            return Err(Error::InvalidTrajectory(
                "segments must cover every step".into(),
            ));
        }
        Ok(())
    }
}

/// Draw a random offset pose: each translation and Euler component uniform
/// in its interval (sampled in dx, dy, dz, droll, dpitch, dyaw order).
pub fn sample_offset(ranges: &OffsetRanges, seed: u64) -> Result<Pose> {
    ranges.validate()?;
    let mut rng = rng_from_seed(seed);
    let dx = uniform_range(&mut rng, ranges.dx.0, ranges.dx.1);
    let dy = uniform_range(&mut rng, ranges.dy.0, ranges.dy.1);
    let dz = uniform_range(&mut rng, ranges.dz.0, ranges.dz.1);
    let droll = uniform_range(&mut rng, ranges.droll.0, ranges.droll.1);
    let dpitch = uniform_range(&mut rng, ranges.dpitch.0, ranges.dpitch.1);
    let dyaw = uniform_range(&mut rng, ranges.dyaw.0, ranges.dyaw.1);
    let rotation = rpy_to_rotation(&EulerRpy::new(droll, dpitch, dyaw))?;
    Ok(Pose::new(rotation, Vector3::new(dx, dy, dz)))
}

/// Approach pose: the grasp pose composed with the offset in its local
/// frame, `g_app = g ∘ ΔT`.
pub fn approach_pose(g: &Pose, offset: &Pose) -> Pose {
    g.compose(offset)
}

/// Per-step phase rule. `v` is the vector from the end effector to the
/// target; PIP requires `|v| <= dist_thresh` and the approach-axis angle
/// within `angle_thresh`, both inclusive. A step exactly at the target is
/// PIP.
pub fn step_phase(step: &TrajectoryStep, target: &Vector3<f64>, cfg: &SegmentationConfig) -> Phase {
    let v = target - step.ee_pose.translation;
    let dist = v.norm();
    if dist > cfg.dist_thresh {
        return Phase::Srp;
    }
    if dist < 1e-12 {
        return Phase::Pip;
    }
    if angle_between(&step.ee_pose.z_axis(), &v) <= cfg.angle_thresh {
        Phase::Pip
    } else {
        Phase::Srp
    }
}

/// Label every step: per-step rule, with the PIP latch-and-release
/// behavior described at module level.
pub fn label_steps(traj: &Trajectory, cfg: &SegmentationConfig) -> Vec<Phase> {
    let mut labels = Vec::with_capacity(traj.steps.len());
    let mut in_pip = false;
    // Disarmed after an interaction completes; re-armed once the gripper
    // reopens, so a fresh interaction can latch again.
    let mut latch_armed = true;
    let mut closed_run = 0usize;
    for (i, step) in traj.steps.iter().enumerate() {
        if step.gripper_open < cfg.close_thresh {
            closed_run += 1;
        } else {
            closed_run = 0;
            latch_armed = true;
        }
        let target = traj.target_at(i);
        if in_pip {
            labels.push(Phase::Pip);
            let displaced =
                (target - traj.target_init_pose.translation).norm() >= cfg.lift_thresh;
            if closed_run >= 3 && displaced {
                // Interaction complete; later steps go back to the rule.
                in_pip = false;
                latch_armed = false;
            }
        } else {
            let raw = step_phase(step, &target, cfg);
            if raw == Phase::Pip && latch_armed {
                in_pip = true;
            }
            labels.push(raw);
        }
    }
    labels
}

/// Segment a trajectory by run-length encoding the step labels.
pub fn segment(traj: &Trajectory, cfg: &SegmentationConfig) -> Result<SegmentedTrajectory> {
    cfg.validate()?;
    if traj.steps.len() < 2 {
        return Err(Error::InvalidTrajectory(
            "a trajectory needs at least 2 steps".into(),
        ));
    }
    Ok(encode_segments(&label_steps(traj, cfg), traj.steps.len()))
}

/// Like [`segment`] but trusts ground-truth labels when every step carries
/// one, falling back to the rule otherwise.
pub fn segment_preferring_gt(
    traj: &Trajectory,
    cfg: &SegmentationConfig,
) -> Result<SegmentedTrajectory> {
    let gt: Option<Vec<Phase>> = traj.steps.iter().map(|s| s.gt_phase).collect();
    match gt {
        Some(labels) => {
            cfg.validate()?;
            Ok(encode_segments(&labels, traj.steps.len()))
        }
        None => segment(traj, cfg),
    }
}

fn encode_segments(labels: &[Phase], num_steps: usize) -> SegmentedTrajectory {
    let mut segments: Vec<Segment> = Vec::new();
    for (i, &phase) in labels.iter().enumerate() {
        match segments.last_mut() {
            Some(last) if last.phase == phase => last.end = i,
            _ => segments.push(Segment {
                phase,
                start: i,
                end: i,
            }),
        }
    }
    SegmentedTrajectory {
        num_steps,
        segments,
    }
}
