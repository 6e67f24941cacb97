//! Mixture manifest files: pretty JSON with an embedded SHA-256 digest that
//! readers verify.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mixture::{manifest_digest, MixtureManifest, MANIFEST_FORMAT};

use super::check_format;

pub fn manifest_to_string(manifest: &MixtureManifest) -> String {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    text
}

pub fn write_manifest(path: &Path, manifest: &MixtureManifest) -> Result<()> {
    fs::write(path, manifest_to_string(manifest))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<MixtureManifest> {
    let text = fs::read_to_string(path)?;
    let manifest: MixtureManifest = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    check_format(&manifest.format, &manifest.version, MANIFEST_FORMAT)?;
    let expected = manifest_digest(&manifest);
    if manifest.digest != expected {
        return Err(Error::Format(format!(
            "manifest digest mismatch: stored {}, computed {expected}",
            manifest.digest
        )));
    }
    Ok(manifest)
}
