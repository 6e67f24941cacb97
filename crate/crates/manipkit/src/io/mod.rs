//! File formats: ASCII PLY clouds in, trajectory JSONL in/out, grasp-label
//! and manifest documents out, CSV observations in, fit reports out.
//!
//! Every emitted document embeds a format name and semantic version plus the
//! parameters needed to reproduce it. Readers accept any minor revision of a
//! known major version and reject everything else.

pub mod labels;
pub mod manifest;
pub mod ply;
pub mod report;
pub mod trajectory;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Pose;

/// Version written into every emitted file.
pub const FORMAT_VERSION: &str = "1.0.0";
/// Major version the readers accept.
pub const SUPPORTED_MAJOR: u64 = 1;

/// Parse `major.minor.patch`; minor/patch may be omitted.
pub fn parse_version(s: &str) -> Result<(u64, u64, u64)> {
    let mut it = s.trim().split('.');
    let mut next = |name: &str| -> Result<u64> {
        match it.next() {
            None => Ok(0),
            Some(part) => part
                .parse()
                .map_err(|_| Error::Format(format!("bad {name} in version '{s}'"))),
        }
    };
    let major = next("major")?;
    Ok((major, next("minor")?, next("patch")?))
}

/// Check a document's format name and major version.
pub fn check_format(found_format: &str, found_version: &str, expected_format: &str) -> Result<()> {
    if found_format != expected_format {
        return Err(Error::Format(format!(
            "expected format '{expected_format}', found '{found_format}'"
        )));
    }
    let (major, _, _) = parse_version(found_version)?;
    if major != SUPPORTED_MAJOR {
        return Err(Error::Format(format!(
            "unsupported {expected_format} major version {major} (supported: {SUPPORTED_MAJOR})"
        )));
    }
    Ok(())
}

/// Serialized pose: quaternion `(w, x, y, z)` plus translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRepr {
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
}

impl From<&Pose> for PoseRepr {
    fn from(p: &Pose) -> Self {
        let q = p.rotation.quaternion();
        PoseRepr {
            rotation: [q.w, q.i, q.j, q.k],
            translation: [p.translation.x, p.translation.y, p.translation.z],
        }
    }
}

impl PoseRepr {
    pub fn to_pose(&self) -> Result<Pose> {
        let [w, x, y, z] = self.rotation;
        let [tx, ty, tz] = self.translation;
        Pose::from_parts(w, x, y, z, Vector3::new(tx, ty, tz))
            .map_err(|e| Error::Format(format!("bad pose: {e}")))
    }
}
