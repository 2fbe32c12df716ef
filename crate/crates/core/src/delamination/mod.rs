//! Scabs and surface delaminations.
//!
//! A coarse tessellation defines the pieces; a finer one gives them jagged
//! borders. Each fine cell is triangulated, every vertex gets a rim elevation
//! that grows towards the piece contour plus a per-cell texture bump, and the
//! piece becomes a closed layer of constant minimum thickness.

mod cells;
mod height;
mod params;

use std::collections::HashMap;

use rayon::prelude::*;

pub use cells::{
    added_point_count, assign_fine_cells, refine_borders, triangulate_cell, CellSet, CellTriangulation,
};
pub use height::{contour_loops, elevation_field, relative_distance, texture_height, CellHeights};
pub use params::{DelamParams, Selection};

use crate::defects::profile::smoothed_uniform;
use crate::error::{Error, Result};
use crate::geom::{Point2, Point3};
use crate::io::export::snap_to_export_precision;
use crate::mesh::{SurfaceMesh, Tag, ValidationReport};
use crate::rng::RandomStream;

/// One delaminated piece: a coarse cell with its fine cells.
#[derive(Clone, Debug)]
pub struct DelamCell {
    pub coarse: usize,
    pub coarse_polygon: Vec<Point2<f64>>,
    pub center: Point2<f64>,
    pub fine_cells: Vec<usize>,
    pub points: Vec<Point2<f64>>,
    /// Counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Fine cell of every triangle.
    pub triangle_cell: Vec<usize>,
    /// Fine cell of every point inside one; `None` on fine-cell borders.
    pub point_cell: Vec<Option<usize>>,
    /// Points added per fine cell, in `fine_cells` order.
    pub added: Vec<usize>,
    /// Boundary loops with the piece on their left.
    pub contour: Vec<Vec<usize>>,
    /// Texture peak per fine cell, in `fine_cells` order.
    pub texture_peaks: Vec<f64>,
    pub heights: CellHeights,
    pub mesh: SurfaceMesh<f64>,
    pub report: ValidationReport,
}

#[derive(Clone, Debug)]
pub struct Delamination {
    pub params: DelamParams,
    pub seed: u64,
    pub coarse: CellSet,
    pub fine: CellSet,
    /// Fine cells of every coarse cell, selected or not.
    pub groups: Vec<Vec<usize>>,
    pub cells: Vec<DelamCell>,
}

impl Delamination {
    /// All pieces as one mesh with one component per piece.
    pub fn combined_mesh(&self) -> SurfaceMesh<f64> {
        let mut m = SurfaceMesh::new();
        for c in &self.cells {
            m.append(&c.mesh);
        }
        m
    }

    pub fn volume(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.mesh.signed_volume().unwrap_or(0.0))
            .sum()
    }
}

/// Union of the fine-cell triangulations of a group, sharing the corners of
/// neighbouring cells.
#[allow(clippy::type_complexity)]
fn triangulate_group(
    seed: &RandomStream,
    fine: &CellSet,
    group: &[usize],
    r_max: usize,
    max_area: f64,
) -> Result<(Vec<Point2<f64>>, Vec<[usize; 3]>, Vec<usize>, Vec<Option<usize>>, Vec<usize>)> {
    let mut points = Vec::new();
    let mut point_cell = Vec::new();
    let mut shared: HashMap<usize, usize> = HashMap::new();
    let (mut triangles, mut triangle_cell, mut added) = (Vec::new(), Vec::new(), Vec::new());
    for &j in group {
        let mut s = seed.derive(j as u64);
        let t = triangulate_cell(&mut s, &fine.polygons[j], r_max, max_area)?;
        let k = fine.polygons[j].len();
        let index: Vec<usize> = (0..t.points.len())
            .map(|i| {
                if i < k {
                    *shared.entry(fine.vertex_ids[j][i]).or_insert_with(|| {
                        points.push(t.points[i]);
                        point_cell.push(None);
                        points.len() - 1
                    })
                } else {
                    points.push(t.points[i]);
                    point_cell.push(Some(j));
                    points.len() - 1
                }
            })
            .collect();
        triangles.extend(t.triangles.iter().map(|tr| tr.map(|i| index[i])));
        triangle_cell.extend(std::iter::repeat_n(j, t.triangles.len()));
        added.push(t.added);
    }
    Ok((points, triangles, triangle_cell, point_cell, added))
}

/// Cyclic moving average of three.
fn smooth_loop(raw: &[f64]) -> Vec<f64> {
    let n = raw.len();
    (0..n)
        .map(|i| (raw[(i + n - 1) % n] + raw[i] + raw[(i + 1) % n]) / 3.0)
        .collect()
}

/// Closed piece: lower layer at `h + elevation`, upper layer at the full
/// height plus `layer`, vertical walls along every contour loop.
pub fn build_delam_mesh(
    points: &[Point2<f64>],
    triangles: &[[usize; 3]],
    contour: &[Vec<usize>],
    heights: &CellHeights,
    h: f64,
    layer: f64,
) -> Result<SurfaceMesh<f64>> {
    if !(layer > 0.0) {
        return Err(Error::params("layer_thickness", "must be positive"));
    }
    let n = points.len();
    let mut m = SurfaceMesh::new();
    for (p, z) in points.iter().zip(heights.lower(h)) {
        m.add_vertex(Point3::from_xy(*p, z));
    }
    for (p, z) in points.iter().zip(heights.total(h)) {
        m.add_vertex(Point3::from_xy(*p, z + layer));
    }
    for &[a, b, c] in triangles {
        m.add_triangle([a, c, b], Tag::Layer);
        m.add_triangle([a + n, b + n, c + n], Tag::Layer);
    }
    for lp in contour {
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            m.add_triangle([a, b, b + n], Tag::Wall);
            m.add_triangle([a, b + n, a + n], Tag::Wall);
        }
    }
    Ok(m)
}

fn build_cell(
    params: &DelamParams,
    stream: &RandomStream,
    coarse: &CellSet,
    fine: &CellSet,
    i: usize,
    group: &[usize],
    max_area: f64,
) -> Result<DelamCell> {
    let coarse_polygon = coarse.polygons[i].clone();
    let center = coarse.centers[i].ok_or_else(|| Error::InvalidRegion(format!("coarse cell {i} is empty")))?;
    let (points, triangles, triangle_cell, point_cell, added) =
        triangulate_group(&stream.derive(1), fine, group, params.r_max, max_area)?;
    let contour = contour_loops(&triangles)?;
    let mut s = stream.derive(2);
    let mut peak = HashMap::new();
    for lp in &contour {
        let e = smooth_loop(&smoothed_uniform(&mut s, lp.len(), params.elevation_max_range));
        for (k, &v) in lp.iter().enumerate() {
            let d = s.uniform(params.threshold_range[0], params.threshold_range[1]);
            peak.insert(v, (e[k], d));
        }
    }
    let (dist_rel, threshold, elevation) = elevation_field(&points, &contour, &coarse_polygon, center, &peak)?;
    let texture_peaks: Vec<f64> = group
        .iter()
        .map(|_| s.uniform(params.texture_height_range[0], params.texture_height_range[1]))
        .collect();
    let slot: HashMap<usize, usize> = group.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let texture = points
        .iter()
        .zip(&point_cell)
        .map(|(&v, c)| match c {
            Some(j) => texture_height(v, &fine.polygons[*j], fine.centers[*j].unwrap(), texture_peaks[slot[j]]),
            None => 0.0,
        })
        .collect();
    let heights = CellHeights {
        dist_rel,
        threshold,
        elevation,
        texture,
    };
    let mesh = build_delam_mesh(
        &points,
        &triangles,
        &contour,
        &heights,
        params.surface_height,
        params.layer_thickness,
    )?;
    let mut mesh = mesh;
    snap_to_export_precision(&mut mesh);
    let report = mesh.validate();
    if !report.is_valid() {
        return Err(Error::InvalidMesh(format!("piece {i}: {}", report.failure_summary())));
    }
    Ok(DelamCell {
        coarse: i,
        coarse_polygon,
        center,
        fine_cells: group.to_vec(),
        points,
        triangles,
        triangle_cell,
        point_cell,
        added,
        contour,
        texture_peaks,
        heights,
        mesh,
        report,
    })
}

/// Coarse and fine tessellations, grouping, and one closed piece per selected
/// coarse cell. Pieces draw from their own derived streams and are built in
/// parallel.
pub fn generate_delamination(stream: &RandomStream, params: &DelamParams) -> Result<Delamination> {
    params.check()?;
    let w = &params.window;
    let coarse = CellSet::sample(&mut stream.derive(0), w, params.gamma, params.n_coarse)?;
    let fine = CellSet::sample(&mut stream.derive(1), w, params.gamma, params.n_fine)?;
    let groups = refine_borders(&coarse, &fine, w);
    let max_area = (0..fine.len()).map(|j| fine.area(j)).fold(0.0, f64::max);
    let candidates: Vec<usize> = (0..coarse.len()).filter(|&i| !groups[i].is_empty()).collect();
    let mut chosen = match params.selection {
        Selection::All => candidates.clone(),
        Selection::Random(k) => {
            if k > candidates.len() {
                return Err(Error::params(
                    "selection",
                    format!("{k} pieces requested but only {} cells are nonempty", candidates.len()),
                ));
            }
            stream
                .derive(2)
                .choose_distinct(candidates.len(), k)
                .into_iter()
                .map(|c| candidates[c])
                .collect()
        }
    };
    chosen.sort_unstable();
    let cells = chosen
        .par_iter()
        .map(|&i| build_cell(params, &stream.derive(100 + i as u64), &coarse, &fine, i, &groups[i], max_area))
        .collect::<Result<Vec<_>>>()?;
    Ok(Delamination {
        params: params.clone(),
        seed: stream.seed(),
        coarse,
        fine,
        groups,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_plate_without_elevation_or_texture() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.5),
        ];
        let tris = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let loops = contour_loops(&tris).unwrap();
        let heights = CellHeights {
            dist_rel: vec![0.0; 5],
            threshold: vec![1.0; 5],
            elevation: vec![0.0; 5],
            texture: vec![0.0; 5],
        };
        let m = build_delam_mesh(&pts, &tris, &loops, &heights, 1.0, 0.1).unwrap();
        assert!(m.validate().is_valid());
        assert!((m.signed_volume().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn default_pieces_are_closed() {
        let d = generate_delamination(&RandomStream::new(4), &DelamParams::default()).unwrap();
        assert!(!d.cells.is_empty());
        for c in &d.cells {
            assert!(c.report.is_valid());
            let lower = c.heights.lower(1.0);
            assert!(lower.iter().all(|&z| z >= 1.0));
        }
        assert!(d.volume() > 0.0);
    }

    #[test]
    fn scab_selection_picks_a_subset() {
        let p = DelamParams {
            selection: Selection::Random(3),
            ..Default::default()
        };
        let d = generate_delamination(&RandomStream::new(5), &p).unwrap();
        assert_eq!(d.cells.len(), 3);
        let again = generate_delamination(&RandomStream::new(5), &p).unwrap();
        assert_eq!(
            d.cells.iter().map(|c| c.coarse).collect::<Vec<_>>(),
            again.cells.iter().map(|c| c.coarse).collect::<Vec<_>>()
        );
        assert_eq!(d.combined_mesh(), again.combined_mesh());
    }
}
