use super::assemble::{chain_params, coat_lift_mesh, elongated_mesh, merge_lateral_arcs};
use super::profile::{self, Envelope};
use super::{
    instance, profiled_body, require_type, voronoi_spine, with_retries, DefectInstance, DefectType,
    ElongatedDefectParams, Heights,
};
use crate::dilation::{dilate, Mode};
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::mesh::{boolean, BooleanOp};
use crate::pathing::Path;
use crate::rng::RandomStream;

/// Positive defect: the crack pipeline with heights above the surface and
/// an eye-shaped width envelope.
pub fn generate_bulge(stream: &RandomStream, params: &ElongatedDefectParams) -> Result<DefectInstance> {
    require_type(params, &[DefectType::Bulge])?;
    with_retries(stream, params, |s| {
        let (t, path) = voronoi_spine(s, params)?;
        let b = profiled_body(s, params, path, Envelope::Sine(2.0), Envelope::Sine(1.0), 1.0)?;
        Ok(instance(params, b, Some(t)))
    })
}

/// Closed buckle: a bulge. Open buckle: the bulge minus a narrower groove
/// body on the same spine whose floor stays above the surface.
pub fn generate_buckle(stream: &RandomStream, params: &ElongatedDefectParams) -> Result<DefectInstance> {
    require_type(params, &[DefectType::BuckleClosed, DefectType::BuckleOpen])?;
    let open = params.defect_type == DefectType::BuckleOpen;
    with_retries(stream, params, |s| {
        let (t, path) = voronoi_spine(s, params)?;
        let b = profiled_body(s, params, path, Envelope::Sine(2.0), Envelope::Sine(1.0), 1.0)?;
        if !open {
            return Ok(instance(params, b, Some(t)));
        }
        let groove = groove_body(params, &b.path, &b.widths, &b.heights.path)?;
        let report = groove.validate();
        if !report.is_valid() {
            return Err(Error::InvalidMesh(report.failure_summary()));
        }
        let mesh = boolean(&b.mesh, &groove, BooleanOp::Difference)?;
        let mut inst = instance(params, b, Some(t));
        inst.mesh = mesh;
        Ok(inst)
    })
}

/// Inverted crack body: spine below the ridge, contours above it. The spine
/// is extended past both window borders so the groove opens at the ends.
fn groove_body(
    params: &ElongatedDefectParams,
    path: &Path<f64>,
    widths: &[f64],
    ridge: &[f64],
) -> Result<crate::mesh::SurfaceMesh<f64>> {
    let h = params.surface_height;
    let w = &params.window;
    let margin = 0.05 * w.width();
    let first = path.vertices[0];
    let last = *path.vertices.last().unwrap();
    let mut verts = vec![first - Point2::new(margin, 0.0)];
    verts.extend(path.vertices.iter().copied());
    verts.push(last + Point2::new(margin, 0.0));
    let ext = Path::from_points(verts);
    let r = params.inner_width_ratio;
    let mut gw = vec![r * widths[0]];
    gw.extend(widths.iter().map(|l| r * l));
    gw.push(r * widths[widths.len() - 1]);
    let floor: Vec<f64> = ridge
        .iter()
        .map(|z| z - params.inner_depth_ratio * (z - h))
        .collect();
    let mut spine = vec![floor[0]];
    spine.extend(floor.iter().copied());
    spine.push(*floor.last().unwrap());
    let top = ridge.iter().copied().fold(h, f64::max);
    let lid = top + (top - h);
    let d = dilate(
        &ext,
        &gw,
        Mode::Strip {
            x0: w.w0min - margin,
            x1: w.w0max + margin,
        },
    )?;
    let heights = Heights {
        path: spine,
        upper: vec![lid; d.upper.vertices.len()],
        lower: vec![lid; d.lower.vertices.len()],
    };
    Ok(elongated_mesh(&ext, &d.upper, &d.lower, &heights)?.0)
}

/// One-sided lift: the upper contour rises above the surface while the
/// spine and its lower shift stay on it.
pub fn generate_coat_lift(
    stream: &RandomStream,
    params: &ElongatedDefectParams,
) -> Result<DefectInstance> {
    require_type(params, &[DefectType::CoatLift])?;
    with_retries(stream, params, |s| {
        let (t, path) = voronoi_spine(s, params)?;
        let widths = profile::widths(s, &path, params.width_range, Envelope::Sine(1.0));
        let w = params.window;
        let d = dilate(
            &path,
            &widths,
            Mode::Strip {
                x0: w.w0min,
                x1: w.w0max,
            },
        )?;
        let h = params.surface_height;
        let up = &merge_lateral_arcs(&path, &d.upper)?;
        let lift = profile::smoothed_uniform(s, up.vertices.len(), params.depth_or_height_range);
        // keyed on contour arc length so only the two border vertices stay at h
        let heights: Vec<f64> = chain_params(&up.vertices)
            .into_iter()
            .zip(lift)
            .map(|(s, e)| h + Envelope::Sine(1.0).eval(s) * e)
            .collect();
        let lift = coat_lift_mesh(&path, up, &heights, params.layer_thickness, h)?;
        let (mesh, lower) = (lift.mesh, lift.lower);
        let mut footprint = up.vertices.clone();
        footprint.extend(lower.vertices.iter().rev());
        let mut inst = instance(
            params,
            super::Body {
                widths,
                heights: Heights {
                    path: vec![h; path.vertices.len()],
                    upper: heights,
                    lower: vec![h; lower.vertices.len()],
                },
                strips: Default::default(),
                mesh,
                dilation: d,
                path,
            },
            Some(t),
        );
        inst.footprint = vec![footprint];
        Ok(inst)
    })
}
