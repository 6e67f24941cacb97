//! ASCII PLY point clouds with vertex normals.
//!
//! Reads `element vertex` data with `x y z nx ny nz` properties (float or
//! double, any column order, extra properties ignored). Normals within 1e-3
//! of unit norm are renormalized; anything further off is rejected.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::Direction;
use crate::grasp::{PointCloud, SurfacePoint};

use super::{parse_version, FORMAT_VERSION, SUPPORTED_MAJOR};

pub const PLY_COMMENT_TAG: &str = "manipkit.pointcloud";

const REQUIRED: [&str; 6] = ["x", "y", "z", "nx", "ny", "nz"];

/// Parse an ASCII PLY file into a point cloud; the object id is the file
/// stem.
pub fn parse_point_cloud(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    let object_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "object".into());
    parse_point_cloud_str(&text, &object_id)
}

pub fn parse_point_cloud_str(text: &str, object_id: &str) -> Result<PointCloud> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(Error::Format("missing 'ply' magic line".into()));
    }

    let mut vertex_count: Option<usize> = None;
    let mut columns: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    let mut saw_format = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                let kind = words.next().unwrap_or("");
                if kind != "ascii" {
                    return Err(Error::Format(format!(
                        "unsupported PLY format '{kind}' (only ascii)"
                    )));
                }
                saw_format = true;
            }
            Some("comment") => {
                let rest: Vec<&str> = words.collect();
                if rest.first() == Some(&PLY_COMMENT_TAG) {
                    if let Some(ver) = rest.get(1) {
                        let (major, _, _) = parse_version(ver)?;
                        if major != SUPPORTED_MAJOR {
                            return Err(Error::Format(format!(
                                "unsupported {PLY_COMMENT_TAG} major version {major}"
                            )));
                        }
                    }
                }
            }
            Some("element") => {
                let name = words.next().unwrap_or("");
                if name == "vertex" {
                    let count: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| Error::Format("bad vertex count".into()))?;
                    vertex_count = Some(count);
                    in_vertex_element = true;
                } else {
                    if vertex_count.is_none() {
                        return Err(Error::Format(format!(
                            "element '{name}' precedes the vertex element"
                        )));
                    }
                    in_vertex_element = false;
                }
            }
            Some("property") => {
                if in_vertex_element {
                    let kind = words.next().unwrap_or("");
                    if kind == "list" {
                        return Err(Error::Format(
                            "list properties are not supported on vertices".into(),
                        ));
                    }
                    let name = words
                        .next()
                        .ok_or_else(|| Error::Format("property without a name".into()))?;
                    columns.push(name.to_string());
                }
            }
            Some("end_header") => break,
            Some("obj_info") => {}
            Some(other) => {
                return Err(Error::Format(format!("unexpected header line '{other}'")));
            }
            None => {}
        }
    }
    if !saw_format {
        return Err(Error::Format("missing 'format ascii 1.0' line".into()));
    }
    let vertex_count =
        vertex_count.ok_or_else(|| Error::Format("missing 'element vertex' line".into()))?;

    let mut col_idx = [0usize; 6];
    for (slot, needed) in col_idx.iter_mut().zip(REQUIRED) {
        *slot = columns
            .iter()
            .position(|c| c == needed)
            .ok_or_else(|| Error::Format(format!("missing property {needed}")))?;
    }

    let mut points = Vec::with_capacity(vertex_count);
    for (row, line) in lines.take(vertex_count).enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < columns.len() {
            return Err(Error::Format(format!(
                "vertex row {row} has {} fields, expected {}",
                fields.len(),
                columns.len()
            )));
        }
        let mut vals = [0.0f64; 6];
        for (v, &ci) in vals.iter_mut().zip(&col_idx) {
            *v = fields[ci]
                .parse()
                .map_err(|_| Error::Format(format!("bad number '{}' in row {row}", fields[ci])))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("non-finite value in row {row}")));
            }
        }
        let normal = Vector3::new(vals[3], vals[4], vals[5]);
        if (normal.norm() - 1.0).abs() > 1e-3 {
            return Err(Error::Format(format!(
                "normal in row {row} has norm {:.6}, not within 1e-3 of unit",
                normal.norm()
            )));
        }
        points.push(SurfacePoint {
            position: Vector3::new(vals[0], vals[1], vals[2]),
            normal: Direction::new(normal)
                .map_err(|_| Error::Format(format!("degenerate normal in row {row}")))?,
        });
    }
    if points.len() != vertex_count {
        return Err(Error::Format(format!(
            "expected {vertex_count} vertex rows, found {}",
            points.len()
        )));
    }
    PointCloud::new(points, object_id).map_err(|e| Error::Format(e.to_string()))
}

/// Write an ASCII PLY with `x y z nx ny nz` double properties.
pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    fs::write(path, point_cloud_to_string(cloud))?;
    Ok(())
}

pub fn point_cloud_to_string(cloud: &PointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("comment {PLY_COMMENT_TAG} {FORMAT_VERSION}\n"));
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    for name in REQUIRED {
        out.push_str(&format!("property double {name}\n"));
    }
    out.push_str("end_header\n");
    for p in &cloud.points {
        let n = p.normal.as_vector();
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            p.position.x, p.position.y, p.position.z, n.x, n.y, n.z
        ));
    }
    out
}
