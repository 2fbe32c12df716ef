//! Elongated defect pipelines: tessellation, minimal path, width and height
//! profiles, strip triangulation and closed-surface assembly.
//!
//! Every generator draws from a stream derived per attempt, so a rejected
//! attempt (invalid contour, self-intersecting mesh) is retried
//! deterministically.

pub mod assemble;
mod crack;
mod elevated;
pub mod params;
pub mod profile;

pub use assemble::Heights;
pub use crack::{add_branch, add_branch_at, generate_cold_shut, generate_crack, max_turning_angle};
pub use elevated::{generate_buckle, generate_bulge, generate_coat_lift};
pub use params::{DefectType, ElongatedDefectParams};

use crate::dilation::{dilate, DilatedPath, Mode};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::io::export::snap_to_export_precision;
use crate::mesh::{SurfaceMesh, ValidationReport};
use crate::pathing::{spanning_path, Path};
use crate::rng::RandomStream;
use crate::tessellation::{build_voronoi, Tessellation};
use assemble::{elongated_mesh, Strips};
use profile::Envelope;

#[derive(Clone, Debug)]
pub struct DefectInstance {
    pub defect_type: DefectType,
    pub mesh: SurfaceMesh<f64>,
    pub spine: Path<f64>,
    pub branches: Vec<Path<f64>>,
    /// Outline polygons at the surface height.
    pub footprint: Vec<Vec<Point2<f64>>>,
    pub params_echo: ElongatedDefectParams,
    pub seed: u64,
    /// Attempts used, counting the successful one.
    pub attempts: usize,
    /// How far a spline spine leaves the window vertically.
    pub spine_excursion: f64,
    pub heights: Heights,
    pub branch_heights: Vec<Vec<f64>>,
    pub report: ValidationReport,
    pub tessellation: Option<Tessellation<f64>>,
}

impl DefectInstance {
    pub fn volume(&self) -> f64 {
        self.mesh.signed_volume().unwrap_or(0.0)
    }
}

/// Generates a defect of `params.defect_type`, including crack branches.
pub fn generate(stream: &RandomStream, params: &ElongatedDefectParams) -> Result<DefectInstance> {
    match params.defect_type {
        DefectType::Crack => {
            let mut inst = generate_crack(stream, params)?;
            for b in 0..params.branches {
                inst = add_branch(&stream.derive(1_000 + b as u64), &inst, params)?;
            }
            Ok(inst)
        }
        DefectType::Bulge => generate_bulge(stream, params),
        DefectType::BuckleClosed | DefectType::BuckleOpen => generate_buckle(stream, params),
        DefectType::CoatLift => generate_coat_lift(stream, params),
        DefectType::ColdShut => generate_cold_shut(stream, params),
    }
}

pub(crate) fn require_type(params: &ElongatedDefectParams, allowed: &[DefectType]) -> Result<()> {
    params.check()?;
    if allowed.contains(&params.defect_type) {
        Ok(())
    } else {
        Err(Error::params(
            "defect_type",
            format!("{} is not handled here", params.defect_type.name()),
        ))
    }
}

/// Runs `attempt` on derived streams until it yields a valid mesh.
pub(crate) fn with_retries<F>(
    stream: &RandomStream,
    params: &ElongatedDefectParams,
    mut attempt: F,
) -> Result<DefectInstance>
where
    F: FnMut(&mut RandomStream) -> Result<DefectInstance>,
{
    let mut last = Error::GenerationFailed {
        attempts: 0,
        last: Box::new(Error::EmptyRequest),
    };
    for k in 0..params.max_attempts {
        let mut s = stream.derive(k as u64);
        match attempt(&mut s) {
            Ok(mut inst) => {
                snap_to_export_precision(&mut inst.mesh);
                inst.report = inst.mesh.validate();
                if inst.report.is_valid() {
                    inst.attempts = k + 1;
                    inst.seed = stream.seed();
                    return Ok(inst);
                }
                last = Error::InvalidMesh(inst.report.failure_summary());
            }
            Err(e @ Error::InvalidParams { .. }) => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(Error::GenerationFailed {
        attempts: params.max_attempts,
        last: Box::new(last),
    })
}

/// Tessellation of the window and a border-to-border spine through it.
pub(crate) fn voronoi_spine(
    stream: &mut RandomStream,
    params: &ElongatedDefectParams,
) -> Result<(Tessellation<f64>, Path<f64>)> {
    let t = build_voronoi(stream, &params.window, params.gamma, params.n_generators)?;
    let path = spanning_path(stream, &t)?.filter_short_arcs(params.short_arc_fraction);
    Ok((t, path))
}

/// Crack-like body around a spine: everything the mesh is built from.
#[derive(Clone, Debug)]
pub struct Body {
    pub path: Path<f64>,
    pub widths: Vec<f64>,
    pub dilation: DilatedPath<f64>,
    pub heights: Heights,
    pub strips: Strips,
    pub mesh: SurfaceMesh<f64>,
}

impl Body {
    pub fn footprint(&self) -> Vec<Point2<f64>> {
        let mut poly = self.dilation.upper.vertices.clone();
        poly.extend(self.dilation.lower.vertices.iter().rev());
        poly
    }
}

/// Spine heights are `h + sign * offset`; contours sit at `h`.
pub(crate) fn body(
    path: Path<f64>,
    widths: Vec<f64>,
    offsets: &[f64],
    sign: f64,
    h: f64,
    mode: Mode<f64>,
) -> Result<Body> {
    let dilation = dilate(&path, &widths, mode)?;
    let heights = Heights {
        path: offsets.iter().map(|d| h + sign * d).collect(),
        upper: vec![h; dilation.upper.vertices.len()],
        lower: vec![h; dilation.lower.vertices.len()],
    };
    let (mesh, strips) = elongated_mesh(&path, &dilation.upper, &dilation.lower, &heights)?;
    Ok(Body {
        path,
        widths,
        dilation,
        heights,
        strips,
        mesh,
    })
}

/// Random widths and offsets from `params`, then [`body`] in strip mode.
pub(crate) fn profiled_body(
    stream: &mut RandomStream,
    params: &ElongatedDefectParams,
    path: Path<f64>,
    width_env: Envelope,
    depth_env: Envelope,
    sign: f64,
) -> Result<Body> {
    let widths = profile::widths(stream, &path, params.width_range, width_env);
    let offsets = profile::vertex_offsets(stream, &path, params.depth_or_height_range, depth_env);
    let w = &params.window;
    body(
        path,
        widths,
        &offsets,
        sign,
        params.surface_height,
        Mode::Strip {
            x0: w.w0min,
            x1: w.w0max,
        },
    )
}

pub(crate) fn instance(
    params: &ElongatedDefectParams,
    body: Body,
    tessellation: Option<Tessellation<f64>>,
) -> DefectInstance {
    DefectInstance {
        defect_type: params.defect_type,
        footprint: vec![body.footprint()],
        mesh: body.mesh,
        spine: body.path,
        branches: Vec::new(),
        params_echo: params.clone(),
        seed: 0,
        attempts: 0,
        spine_excursion: 0.0,
        heights: body.heights,
        branch_heights: Vec::new(),
        report: ValidationReport::default(),
        tessellation,
    }
}
