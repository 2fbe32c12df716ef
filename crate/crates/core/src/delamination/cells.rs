use std::collections::{HashMap, VecDeque};

use spade::{DelaunayTriangulation, Point2 as SPoint, Triangulation};

use crate::error::{Error, Result};
use crate::geom::{polygon_area, vertex_centroid, Point2, Window};
use crate::rng::{uniform_in_polygon, uniform_points, RandomStream};
use crate::tessellation::{build_voronoi, Tessellation};

/// Clipped cells of a tessellation of the window.
#[derive(Clone, Debug)]
pub struct CellSet {
    pub generators: Vec<Point2<f64>>,
    /// Counter-clockwise clipped polygons; empty for cells that miss the window.
    pub polygons: Vec<Vec<Point2<f64>>>,
    /// Shared vertex index of every polygon corner.
    pub vertex_ids: Vec<Vec<usize>>,
    /// Vertex mean of every nonempty polygon.
    pub centers: Vec<Option<Point2<f64>>>,
    pub vertices: Vec<Point2<f64>>,
}

impl CellSet {
    pub fn from_tessellation(t: &Tessellation<f64>) -> Self {
        Self {
            generators: t.generators.clone(),
            polygons: t.cells.iter().map(|c| if c.is_empty() { Vec::new() } else { c.polygon.clone() }).collect(),
            vertex_ids: t.cells.iter().map(|c| if c.is_empty() { Vec::new() } else { c.vertex_ids.clone() }).collect(),
            centers: t.reference_points.clone(),
            vertices: t.vertices.clone(),
        }
    }

    /// The window as a single cell of `generator`.
    pub fn whole_window(generator: Point2<f64>, window: &Window<f64>) -> Self {
        let poly = window.corners().to_vec();
        Self {
            generators: vec![generator],
            centers: vec![Some(vertex_centroid(&poly))],
            vertices: poly.clone(),
            polygons: vec![poly],
            vertex_ids: vec![vec![0, 1, 2, 3]],
        }
    }

    /// `n` generators in the `gamma`-dilated window and their clipped cells.
    pub fn sample(stream: &mut RandomStream, window: &Window<f64>, gamma: f64, n: usize) -> Result<Self> {
        if n == 1 {
            let g = uniform_points(stream, &window.dilate(gamma), 1)?[0];
            return Ok(Self::whole_window(g, window));
        }
        Ok(Self::from_tessellation(&build_voronoi(stream, window, gamma, n)?))
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn area(&self, i: usize) -> f64 {
        if self.polygons[i].len() < 3 {
            0.0
        } else {
            polygon_area(&self.polygons[i])
        }
    }

    /// Cell whose generator is nearest to `p`; ties go to the lowest index.
    pub fn nearest(&self, p: Point2<f64>) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, g) in self.generators.iter().enumerate() {
            let d = p.dist(*g);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Generator if it lies in the window, otherwise the vertex mean.
    pub fn adjusted_reference(&self, j: usize, window: &Window<f64>) -> Option<Point2<f64>> {
        let c = self.centers[j]?;
        let p = self.generators[j];
        Some(if window.contains(p) { p } else { c })
    }

    /// Neighbouring cells across shared edges, and whether a cell has an edge
    /// on the window border.
    fn adjacency(&self) -> (Vec<Vec<usize>>, Vec<bool>) {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (j, ids) in self.vertex_ids.iter().enumerate() {
            for k in 0..ids.len() {
                let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(j);
            }
        }
        let mut nbrs = vec![Vec::new(); self.len()];
        let mut border = vec![false; self.len()];
        for cells in by_edge.values() {
            match cells.as_slice() {
                [a] => border[*a] = true,
                [a, b] => {
                    nbrs[*a].push(*b);
                    nbrs[*b].push(*a);
                }
                _ => {}
            }
        }
        for n in &mut nbrs {
            n.sort_unstable();
            n.dedup();
        }
        (nbrs, border)
    }
}

/// Coarse cell of every nonempty fine cell, by the coarse cell that contains
/// its adjusted reference point. Inside the window the containing Voronoi
/// cell is the one with the nearest generator.
pub fn assign_fine_cells(coarse: &CellSet, fine: &CellSet, window: &Window<f64>) -> Vec<Option<usize>> {
    (0..fine.len())
        .map(|j| fine.adjusted_reference(j, window).map(|p| coarse.nearest(p)))
        .collect()
}

/// Fine cell groups per coarse cell. Fine cells cut off from the window border
/// by a single group join that group, so every group is free of holes.
pub fn refine_borders(coarse: &CellSet, fine: &CellSet, window: &Window<f64>) -> Vec<Vec<usize>> {
    let mut owner = assign_fine_cells(coarse, fine, window);
    let (nbrs, border) = fine.adjacency();
    for _ in 0..=coarse.len() {
        let mut changed = false;
        for g in 0..coarse.len() {
            if !owner.contains(&Some(g)) {
                continue;
            }
            let free = |j: usize| owner[j].is_some() && owner[j] != Some(g);
            let mut seen = vec![false; fine.len()];
            let mut queue: VecDeque<usize> = (0..fine.len()).filter(|&j| free(j) && border[j]).collect();
            for &j in &queue {
                seen[j] = true;
            }
            while let Some(j) = queue.pop_front() {
                for &k in &nbrs[j] {
                    if !seen[k] && free(k) {
                        seen[k] = true;
                        queue.push_back(k);
                    }
                }
            }
            let enclosed: Vec<usize> = (0..fine.len()).filter(|&j| free(j) && !seen[j]).collect();
            changed |= !enclosed.is_empty();
            for j in enclosed {
                owner[j] = Some(g);
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups = vec![Vec::new(); coarse.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(g) = o {
            groups[*g].push(j);
        }
    }
    groups
}

/// Number of interior points for a cell: the area ratio to the largest cell
/// times `r_max`, rounded to the nearest integer.
pub fn added_point_count(area: f64, max_area: f64, r_max: usize) -> usize {
    if !(max_area > 0.0) {
        return 0;
    }
    (area / max_area * r_max as f64).round().max(0.0) as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellTriangulation {
    /// Polygon corners, then the center, then the added points.
    pub points: Vec<Point2<f64>>,
    /// Counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    pub added: usize,
}

/// Fan around the center if no points are added, otherwise the Delaunay
/// triangulation of corners, center and uniform interior points.
pub fn triangulate_cell(
    stream: &mut RandomStream,
    polygon: &[Point2<f64>],
    r_max: usize,
    max_area: f64,
) -> Result<CellTriangulation> {
    let k = polygon.len();
    if k < 3 {
        return Err(Error::InvalidRegion("cell has fewer than three corners".into()));
    }
    let r = added_point_count(polygon_area(polygon), max_area, r_max);
    let mut points = polygon.to_vec();
    points.push(vertex_centroid(polygon));
    if r == 0 {
        let triangles = (0..k).map(|i| [i, (i + 1) % k, k]).collect();
        return Ok(CellTriangulation { points, triangles, added: 0 });
    }
    points.extend(uniform_in_polygon(stream, polygon, r)?);
    let mut dt: DelaunayTriangulation<SPoint<f64>> = DelaunayTriangulation::new();
    for (i, p) in points.iter().enumerate() {
        let h = dt
            .insert(SPoint::new(p.x, p.y))
            .map_err(|e| Error::InvalidRegion(format!("triangulation insert failed: {e:?}")))?;
        if h.index() != i {
            return Err(Error::InvalidRegion("coincident triangulation points".into()));
        }
    }
    let triangles: Vec<[usize; 3]> = dt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .collect();
    // every corner on the hull and every other point inside
    if triangles.len() != k + 2 * r {
        return Err(Error::InvalidRegion(format!(
            "expected {} triangles, got {}",
            k + 2 * r,
            triangles.len()
        )));
    }
    Ok(CellTriangulation { points, triangles, added: r })
}
