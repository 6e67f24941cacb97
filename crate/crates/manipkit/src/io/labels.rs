//! Grasp-label documents: one JSON file per object with the full parameter
//! echo and every surviving label.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{
    AnnotationParams, CandidateId, GraspCandidate, GraspLabel, GripperModel,
};

use super::{check_format, PoseRepr, FORMAT_VERSION};

pub const LABELS_FORMAT: &str = "manipkit.grasp-labels";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GripperEcho {
    pub finger_extents: [f64; 3],
    pub palm_extents: [f64; 3],
    pub opening_width: f64,
    pub finger_length: f64,
    pub min_bite_depth: f64,
}

impl From<&GripperModel> for GripperEcho {
    fn from(g: &GripperModel) -> Self {
        GripperEcho {
            finger_extents: [g.finger_extents.x, g.finger_extents.y, g.finger_extents.z],
            palm_extents: [g.palm_extents.x, g.palm_extents.y, g.palm_extents.z],
            opening_width: g.opening_width,
            finger_length: g.finger_length,
            min_bite_depth: g.min_bite_depth,
        }
    }
}

impl GripperEcho {
    pub fn to_model(&self) -> GripperModel {
        GripperModel {
            finger_extents: Vector3::from(self.finger_extents),
            palm_extents: Vector3::from(self.palm_extents),
            opening_width: self.opening_width,
            finger_length: self.finger_length,
            min_bite_depth: self.min_bite_depth,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub n_approach: usize,
    pub k_rolls: usize,
    pub m_seeds: usize,
    pub depths: Vec<f64>,
    pub mu: f64,
    pub seed: u64,
}

impl From<&AnnotationParams> for ParamsEcho {
    fn from(p: &AnnotationParams) -> Self {
        ParamsEcho {
            n_approach: p.n_approach,
            k_rolls: p.k_rolls,
            m_seeds: p.m_seeds,
            depths: p.depths.clone(),
            mu: p.mu,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRecord {
    pub pose: PoseRepr,
    pub seed_point: [f64; 3],
    pub depth: f64,
    pub indices: [usize; 4],
    pub bite_depth: f64,
    pub friction_margins: [f64; 2],
    pub contact_indices: [usize; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelDocument {
    pub format: String,
    pub version: String,
    pub object_id: String,
    pub params: ParamsEcho,
    pub gripper: GripperEcho,
    pub labels: Vec<LabelRecord>,
}

impl LabelDocument {
    pub fn new(
        object_id: &str,
        params: &AnnotationParams,
        gripper: &GripperModel,
        labels: &[GraspLabel],
    ) -> Self {
        LabelDocument {
            format: LABELS_FORMAT.into(),
            version: FORMAT_VERSION.into(),
            object_id: object_id.into(),
            params: params.into(),
            gripper: gripper.into(),
            labels: labels
                .iter()
                .map(|l| LabelRecord {
                    pose: PoseRepr::from(&l.candidate.pose),
                    seed_point: [
                        l.candidate.seed_point.x,
                        l.candidate.seed_point.y,
                        l.candidate.seed_point.z,
                    ],
                    depth: l.candidate.depth,
                    indices: [
                        l.candidate.id.seed,
                        l.candidate.id.approach,
                        l.candidate.id.roll,
                        l.candidate.id.depth,
                    ],
                    bite_depth: l.bite_depth,
                    friction_margins: [l.friction_margins.0, l.friction_margins.1],
                    contact_indices: [l.contact_indices.0, l.contact_indices.1],
                })
                .collect(),
        }
    }

    /// Reconstruct the in-memory labels.
    pub fn to_labels(&self) -> Result<Vec<GraspLabel>> {
        self.labels
            .iter()
            .map(|r| {
                Ok(GraspLabel {
                    candidate: GraspCandidate {
                        pose: r.pose.to_pose()?,
                        seed_point: Vector3::from(r.seed_point),
                        depth: r.depth,
                        id: CandidateId {
                            seed: r.indices[0],
                            approach: r.indices[1],
                            roll: r.indices[2],
                            depth: r.indices[3],
                        },
                    },
                    bite_depth: r.bite_depth,
                    friction_margins: (r.friction_margins[0], r.friction_margins[1]),
                    contact_indices: (r.contact_indices[0], r.contact_indices[1]),
                })
            })
            .collect()
    }
}

pub fn write_labels(path: &Path, doc: &LabelDocument) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("labels serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<LabelDocument> {
    let text = fs::read_to_string(path)?;
    let doc: LabelDocument = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    check_format(&doc.format, &doc.version, LABELS_FORMAT)?;
    Ok(doc)
}
