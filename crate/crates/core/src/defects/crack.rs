use std::collections::HashSet;

use super::profile::{self, Envelope};
use super::{
    body, instance, profiled_body, require_type, voronoi_spine, with_retries, DefectInstance,
    DefectType, ElongatedDefectParams,
};
use crate::dilation::Mode;
use crate::error::{Error, Result};
use crate::mesh::{boolean, BooleanOp};
use crate::pathing::{shortest_path, Path, PathGraph};
use crate::rng::RandomStream;
use crate::spline::spline_path;

/// Negative defect along a border-to-border minimal path.
pub fn generate_crack(stream: &RandomStream, params: &ElongatedDefectParams) -> Result<DefectInstance> {
    require_type(params, &[DefectType::Crack])?;
    with_retries(stream, params, |s| {
        let (t, path) = voronoi_spine(s, params)?;
        let b = profiled_body(s, params, path, Envelope::Sine(1.0), Envelope::Sine(1.0), -1.0)?;
        Ok(instance(params, b, Some(t)))
    })
}

/// Largest angle between consecutive arc directions.
pub fn max_turning_angle(path: &Path<f64>) -> f64 {
    (1..path.arc_count())
        .map(|i| {
            let (a, b) = path.arc(i - 1);
            let (_, c) = path.arc(i);
            let (d0, d1) = (b - a, c - b);
            d0.cross(d1).atan2(d0.dot(d1)).abs()
        })
        .fold(0.0, f64::max)
}

/// Crack pipeline on a discretized natural spline spine.
pub fn generate_cold_shut(
    stream: &RandomStream,
    params: &ElongatedDefectParams,
) -> Result<DefectInstance> {
    require_type(params, &[DefectType::ColdShut])?;
    with_retries(stream, params, |s| {
        let sp = spline_path(s, &params.window, params.spline)?;
        let turn = max_turning_angle(&sp.path);
        if turn >= params.max_turning_angle {
            return Err(Error::InvalidPath(format!("spine turns by {turn:.3} rad")));
        }
        let b = profiled_body(s, params, sp.path, Envelope::Sine(1.0), Envelope::Sine(1.0), -1.0)?;
        let mut inst = instance(params, b, None);
        inst.spine_excursion = sp.excursion;
        Ok(inst)
    })
}

/// Grows a branch from a random vertex of the existing spine or branches to
/// a vertex off them, and unites it with the crack.
pub fn add_branch(
    stream: &RandomStream,
    crack: &DefectInstance,
    params: &ElongatedDefectParams,
) -> Result<DefectInstance> {
    params.check()?;
    let Some(t) = crack.tessellation.as_ref() else {
        return Err(Error::params("crack", "tessellation was not retained"));
    };
    with_retries(stream, params, |s| {
        // junction candidates: (path index, vertex index) pairs off the border
        let mut paths: Vec<(&Path<f64>, &Vec<f64>)> = vec![(&crack.spine, &crack.heights.path)];
        paths.extend(crack.branches.iter().zip(&crack.branch_heights));
        let mut candidates = Vec::new();
        for (pi, (p, _)) in paths.iter().enumerate() {
            let k = p.vertices.len();
            let range = if pi == 0 { 1..k - 1 } else { 1..k };
            candidates.extend(range.map(|i| (pi, i)));
        }
        if candidates.is_empty() {
            return Err(Error::InvalidPath("no junction candidate".into()));
        }
        let (pi, vi) = candidates[s.index(candidates.len())];
        branch_from(s, crack, params, t, paths[pi].0, vi, paths[pi].1[vi])
    })
}

/// Like [`add_branch`] with the junction fixed to vertex `vertex` of the
/// spine (`host == 0`) or of branch `host - 1`.
pub fn add_branch_at(
    stream: &RandomStream,
    crack: &DefectInstance,
    params: &ElongatedDefectParams,
    host: usize,
    vertex: usize,
) -> Result<DefectInstance> {
    params.check()?;
    let Some(t) = crack.tessellation.as_ref() else {
        return Err(Error::params("crack", "tessellation was not retained"));
    };
    let (path, heights) = if host == 0 {
        (&crack.spine, &crack.heights.path)
    } else {
        let i = host - 1;
        match (crack.branches.get(i), crack.branch_heights.get(i)) {
            (Some(p), Some(h)) => (p, h),
            _ => return Err(Error::params("host", "no such branch")),
        }
    };
    if vertex >= path.vertices.len() {
        return Err(Error::params("vertex", "outside the host path"));
    }
    with_retries(stream, params, |s| {
        branch_from(s, crack, params, t, path, vertex, heights[vertex])
    })
}

fn branch_from(
    s: &mut RandomStream,
    crack: &DefectInstance,
    params: &ElongatedDefectParams,
    t: &crate::tessellation::Tessellation<f64>,
    host: &Path<f64>,
    at: usize,
    junction_height: f64,
) -> Result<DefectInstance> {
    let junction = host.vertex_ids[at];
    let mut blocked: HashSet<usize> = crack.spine.vertex_ids.iter().copied().collect();
    for b in &crack.branches {
        blocked.extend(b.vertex_ids.iter().copied());
    }
    blocked.remove(&junction);
    let edges: Vec<(usize, usize)> = t
        .edges
        .iter()
        .filter(|e| !e.on_border && !blocked.contains(&e.a) && !blocked.contains(&e.b))
        .map(|e| (e.a, e.b))
        .collect();
    let g = PathGraph::from_edges(t.vertices.clone(), &edges);
    let origin = t.vertices[junction];
    let w = params.window.width();
    let mut reached = vec![false; t.vertices.len()];
    let mut stack = vec![junction];
    reached[junction] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in &g.adjacency[u] {
            if !reached[v] {
                reached[v] = true;
                stack.push(v);
            }
        }
    }
    let ends: Vec<usize> = (0..t.vertices.len())
        .filter(|&v| reached[v] && v != junction && g.adjacency[v].len() >= 2)
        .filter(|&v| {
            let d = t.vertices[v].dist(origin);
            d > 0.15 * w && d < 0.35 * w
        })
        .collect();
    if ends.is_empty() {
        return Err(Error::InvalidPath("no branch end vertex".into()));
    }
    let end = ends[s.index(ends.len())];
    let (path, _) = shortest_path(&g, junction, end)?;
    let path = path.filter_short_arcs(params.short_arc_fraction);
    let widths = profile::widths(s, &path, params.width_range, Envelope::Falling(1.0));
    let own = profile::vertex_offsets(s, &path, params.depth_or_height_range, Envelope::Falling(1.0));
    let h = params.surface_height;
    let junction_depth = h - junction_height;
    let pos = profile::vertex_positions(&path);
    let offsets: Vec<f64> = pos
        .iter()
        .zip(&own)
        .map(|(&u, &d)| (1.0 - u) * junction_depth + u * d)
        .collect();
    let b = body(path, widths, &offsets, -1.0, h, Mode::Open)?;
    let b_report = b.mesh.validate();
    if !b_report.is_valid() {
        return Err(Error::InvalidMesh(b_report.failure_summary()));
    }
    let mesh = boolean(&crack.mesh, &b.mesh, BooleanOp::Union)?;
    let mut out = crack.clone();
    out.footprint.push(b.footprint());
    out.mesh = mesh;
    out.branches.push(b.path);
    out.branch_heights.push(b.heights.path);
    Ok(out)
}
