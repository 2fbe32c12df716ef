use serde::{Deserialize, Serialize};

use crate::geom::Point2;
use crate::mesh::{SurfaceMesh, ValidationReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Counts and volume of a mesh as read back from its exported file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub file: String,
    pub format: String,
    pub vertices: usize,
    pub triangles: usize,
    /// Divergence sum over all triangles; the enclosed volume when every
    /// component is closed and outward.
    pub volume: f64,
}

impl MeshStats {
    pub fn of(mesh: &SurfaceMesh<f64>, file: impl Into<String>, format: impl Into<String>) -> Self {
        let volume = match mesh.triangles.first() {
            None => 0.0,
            Some(t) => {
                let r = mesh.vertices[t[0]];
                mesh.triangles
                    .iter()
                    .map(|t| {
                        let [a, b, c] = t.map(|i| mesh.vertices[i] - r);
                        a.dot(b.cross(c)) / 6.0
                    })
                    .sum()
            }
        };
        Self {
            file: file.into(),
            format: format.into(),
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
            volume,
        }
    }
}

/// Sidecar record written next to every generated mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub schema_version: u32,
    pub defect_type: String,
    pub seed: u64,
    /// Fully resolved parameters, defaults included.
    pub params: serde_json::Value,
    pub spine: Vec<[f64; 2]>,
    pub branches: Vec<Vec<[f64; 2]>>,
    /// Outline polygons at the surface height.
    pub footprint: Vec<Vec<[f64; 2]>>,
    /// Lower and upper corners of the exported mesh.
    pub bounds: Option<[[f64; 3]; 2]>,
    pub imprinted: bool,
    pub mesh: MeshStats,
    /// Report of the defect body itself.
    pub validation: ValidationReport,
    /// Report of the slab mesh as read back from the file.
    pub imprint_validation: Option<ValidationReport>,
    pub attempts: usize,
}

pub fn xy(points: &[Point2<f64>]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

pub fn bounds_of(mesh: &SurfaceMesh<f64>) -> Option<[[f64; 3]; 2]> {
    mesh.bounds().map(|(lo, hi)| [[lo.x, lo.y, lo.z], [hi.x, hi.y, hi.z]])
}
