//! Mixture-dataset construction: sample full-stage and independent
//! approach-only trajectories, then apply a repetition strategy that keeps
//! interaction segments from being drowned out by the cheap approach data.
//!
//! With `R = floor(n2 / n1)`, the repeat strategies add `R` extra copies
//! (total multiplicity `1 + R`) of either every segment of the sampled full
//! trajectories or only their PIP segments. Manifests reference source
//! files; no trajectory data is copied.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::traj::{Phase, Segment};

pub const MANIFEST_FORMAT: &str = "manipkit.manifest";
pub const MANIFEST_VERSION: &str = "1.0.0";

/// Repetition strategy for the sampled full-stage trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    NoRepeat,
    RepeatFull,
    RepeatPip,
}

/// Mixture request: sample `n1` full and `n2` independent SRP trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub n1: usize,
    pub n2: usize,
    pub strategy: Strategy,
    pub seed: u64,
}

/// A segmented full-stage trajectory available for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct FullEntry {
    pub file_id: String,
    pub segments: Vec<Segment>,
}

/// An independent approach-only trajectory available for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SrpEntry {
    pub file_id: String,
}

/// What a manifest entry points at inside its source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EntryDescriptor {
    Segment {
        phase: Phase,
        start: usize,
        end: usize,
    },
    WholeTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub descriptor: EntryDescriptor,
    pub multiplicity: u32,
}

/// Reference-based realization of the mixed dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureManifest {
    pub format: String,
    pub version: String,
    pub spec: MixtureSpec,
    /// `n2 / (n1 + n2)`, rounded to 6 decimals.
    pub p_srp: f64,
    pub entries: Vec<ManifestEntry>,
    /// SHA-256 (hex) over the canonical serialization of everything above.
    pub digest: String,
}

/// Fraction of independent SRP trajectories in the mixture.
pub fn p_srp(n1: usize, n2: usize) -> Result<f64> {
    if n1 + n2 == 0 {
        return Err(Error::InvalidArgument(
            "p_srp undefined for n1 = n2 = 0".into(),
        ));
    }
    Ok(n2 as f64 / (n1 + n2) as f64)
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Canonical digest: SHA-256 over the manifest JSON with the digest field
/// empty.
pub fn manifest_digest(manifest: &MixtureManifest) -> String {
    let mut body = manifest.clone();
    body.digest = String::new();
    let bytes = serde_json::to_vec(&body).expect("manifest serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        use std::fmt::Write;
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

/// Sample the corpora and build the manifest.
pub fn build(
    full_corpus: &[FullEntry],
    srp_corpus: &[SrpEntry],
    spec: &MixtureSpec,
) -> Result<MixtureManifest> {
    if spec.n1 + spec.n2 == 0 {
        return Err(Error::InvalidArgument(
            "mixture needs n1 + n2 >= 1".into(),
        ));
    }
    if full_corpus.len() < spec.n1 {
        return Err(Error::InsufficientCorpus {
            kind: "full",
            needed: spec.n1,
            available: full_corpus.len(),
        });
    }
    if srp_corpus.len() < spec.n2 {
        return Err(Error::InsufficientCorpus {
            kind: "srp",
            needed: spec.n2,
            available: srp_corpus.len(),
        });
    }
    if spec.n1 == 0 && spec.strategy != Strategy::NoRepeat {
        return Err(Error::StrategyUndefined);
    }

    let mut full_rng = crate::rng::rng_from_seed(crate::rng::derive_seed(spec.seed, 0));
    let full_idx =
        crate::rng::sample_indices_without_replacement(&mut full_rng, full_corpus.len(), spec.n1);
    let mut srp_rng = crate::rng::rng_from_seed(crate::rng::derive_seed(spec.seed, 1));
    let srp_idx =
        crate::rng::sample_indices_without_replacement(&mut srp_rng, srp_corpus.len(), spec.n2);

    let extra = spec.n2.checked_div(spec.n1).unwrap_or(0);
    let repeated = 1 + extra as u32;

    let mut entries = Vec::new();
    for &i in &full_idx {
        let entry = &full_corpus[i];
        for seg in &entry.segments {
            let multiplicity = match spec.strategy {
                Strategy::NoRepeat => 1,
                Strategy::RepeatFull => repeated,
                Strategy::RepeatPip => {
                    if seg.phase == Phase::Pip {
                        repeated
                    } else {
                        1
                    }
                }
            };
            entries.push(ManifestEntry {
                source: entry.file_id.clone(),
                descriptor: EntryDescriptor::Segment {
                    phase: seg.phase,
                    start: seg.start,
                    end: seg.end,
                },
                multiplicity,
            });
        }
    }
    for &i in &srp_idx {
        entries.push(ManifestEntry {
            source: srp_corpus[i].file_id.clone(),
            descriptor: EntryDescriptor::WholeTrajectory,
            multiplicity: 1,
        });
    }

    let mut manifest = MixtureManifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION.into(),
        spec: *spec,
        p_srp: round6(p_srp(spec.n1, spec.n2)?),
        entries,
        digest: String::new(),
    };
    manifest.digest = manifest_digest(&manifest);
    Ok(manifest)
}
