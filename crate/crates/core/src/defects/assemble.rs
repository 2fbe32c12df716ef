//! Closed surfaces from a path, its contours and vertex heights.

use crate::dilation::{Contour, QuadEdge};
use crate::error::{Error, Result};
use crate::geom::{Point2, Point3};
use crate::mesh::{SurfaceMesh, Tag};
use crate::pathing::Path;
use crate::strip::{cover_top, end_caps, triangulate_side, Side, StripVertex, TriangleStrip};

/// Vertex heights of a path and its two contours.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Heights {
    pub path: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

/// Strip triangles of both sides, kept for inspection.
#[derive(Clone, Debug, Default)]
pub struct Strips {
    pub upper: TriangleStrip,
    pub lower: TriangleStrip,
}

struct Layout<'a> {
    path: &'a Path<f64>,
    upper: &'a Contour<f64>,
    lower: &'a Contour<f64>,
    heights: &'a Heights,
}

impl Layout<'_> {
    fn index(&self, v: StripVertex) -> usize {
        let k = self.path.vertices.len();
        match v {
            StripVertex::Path(i) => i,
            StripVertex::Upper(j) => k + j,
            StripVertex::Lower(j) => k + self.upper.vertices.len() + j,
        }
    }

    fn point(&self, v: StripVertex) -> Point3<f64> {
        let (p, z): (Point2<f64>, f64) = match v {
            StripVertex::Path(i) => (self.path.vertices[i], self.heights.path[i]),
            StripVertex::Upper(j) => (self.upper.vertices[j], self.heights.upper[j]),
            StripVertex::Lower(j) => (self.lower.vertices[j], self.heights.lower[j]),
        };
        Point3::from_xy(p, z)
    }

    fn mesh(&self) -> SurfaceMesh<f64> {
        let mut m = SurfaceMesh::new();
        for i in 0..self.path.vertices.len() {
            m.add_vertex(self.point(StripVertex::Path(i)));
        }
        for j in 0..self.upper.vertices.len() {
            m.add_vertex(self.point(StripVertex::Upper(j)));
        }
        for j in 0..self.lower.vertices.len() {
            m.add_vertex(self.point(StripVertex::Lower(j)));
        }
        m
    }

    fn add(&self, m: &mut SurfaceMesh<f64>, tris: &[[StripVertex; 3]], tag: Tag) {
        for t in tris {
            m.add_triangle(t.map(|v| self.index(v)), tag);
        }
    }

    fn flat(&self, t: [StripVertex; 3], scale: f64) -> bool {
        let [a, b, c] = t.map(|v| self.point(v));
        (b - a).cross(c - a).norm() <= 1e-12 * scale * scale
    }
}

fn check_heights(path: &Path<f64>, upper: &Contour<f64>, lower: &Contour<f64>, h: &Heights) -> Result<()> {
    if h.path.len() != path.vertices.len()
        || h.upper.len() != upper.vertices.len()
        || h.lower.len() != lower.vertices.len()
    {
        return Err(Error::params("heights", "one height per vertex is required"));
    }
    Ok(())
}

fn scale_of(path: &Path<f64>) -> f64 {
    path.length().max(f64::MIN_POSITIVE)
}

fn finish(m: SurfaceMesh<f64>) -> Result<SurfaceMesh<f64>> {
    m.welded().oriented_outward()
}

/// Side walls, planar cover and end caps of a crack-like body. An end cap
/// that would be flat is dropped and its path endpoint joins the cover.
pub fn elongated_mesh(
    path: &Path<f64>,
    upper: &Contour<f64>,
    lower: &Contour<f64>,
    heights: &Heights,
) -> Result<(SurfaceMesh<f64>, Strips)> {
    check_heights(path, upper, lower, heights)?;
    let k = path.arc_count();
    let strips = Strips {
        upper: triangulate_side(k, upper, Side::Upper)?,
        lower: triangulate_side(k, lower, Side::Lower)?.flipped(),
    };
    let lay = Layout {
        path,
        upper,
        lower,
        heights,
    };
    let scale = scale_of(path);
    let probe = end_caps(path, upper, lower, [true, true]);
    let keep = [!lay.flat(probe[0], scale), !lay.flat(probe[1], scale)];
    let mut m = lay.mesh();
    lay.add(&mut m, &strips.upper.triangles, Tag::Strip);
    lay.add(&mut m, &strips.lower.triangles, Tag::Strip);
    lay.add(&mut m, &cover_top(path, upper, lower, [!keep[0], !keep[1]])?, Tag::Surface);
    lay.add(&mut m, &end_caps(path, upper, lower, keep), Tag::End);
    Ok((finish(m)?, strips))
}

/// Shift of the path by `layer` towards negative y.
pub fn lower_shift(path: &Path<f64>, layer: f64) -> Contour<f64> {
    Contour {
        vertices: path.vertices.iter().map(|&p| p - Point2::new(0.0, layer)).collect(),
        origins: Vec::new(),
    }
}

/// Normalized arc-length position of each polyline vertex.
pub fn chain_params(pts: &[Point2<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in pts.windows(2) {
        acc.push(acc.last().unwrap() + w[0].dist(w[1]));
    }
    let total = acc.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    acc.iter().map(|d| d / total).collect()
}

/// Drops the inner vertex of every lateral contour arc. A lateral arc is
/// radial from its path vertex, so a sheet lifted over it would fold onto its
/// own underside. The merged arc keeps the label of the neighbouring top arc,
/// which enlarges the footprint by a sliver.
pub fn merge_lateral_arcs(path: &Path<f64>, contour: &Contour<f64>) -> Result<Contour<f64>> {
    let mut c = contour.clone();
    while let Some(j) = c.origins.iter().position(|o| matches!(o.edge, QuadEdge::Left | QuadEdge::Right)) {
        let o = c.origins[j];
        let apex = path.vertices[if o.edge == QuadEdge::Left { o.arc } else { o.arc + 1 }];
        let start_inner = c.vertices[j].dist(apex) < c.vertices[j + 1].dist(apex);
        let (drop, keep) = if start_inner { (j, j.checked_sub(1)) } else { (j + 1, Some(j + 1)) };
        let label = keep.and_then(|k| c.origins.get(k).copied()).filter(|n| n.edge == QuadEdge::Top);
        let (Some(label), true) = (label, drop > 0 && drop < c.vertices.len() - 1) else {
            return Err(Error::InvalidContour(format!("lateral arc {j} has no top neighbour")));
        };
        c.vertices.remove(drop);
        c.origins[j] = label;
        c.origins.remove(if start_inner { j - 1 } else { j + 1 });
    }
    Ok(c)
}

/// One-sided lifted sheet. The path and its lower shift stay at `h`, the
/// upper contour rises to `upper_heights`. The underside is the upper side
/// zipper plus the band between path and shift; the top repeats both with
/// every path vertex replaced by a raised copy, so the top lies strictly above
/// the underside except along the shared contour and shift rims.
pub fn coat_lift_mesh(
    path: &Path<f64>,
    upper: &Contour<f64>,
    upper_heights: &[f64],
    layer: f64,
    h: f64,
) -> Result<CoatLift> {
    if !(layer > 0.0) {
        return Err(Error::params("layer_thickness", "must be positive"));
    }
    if upper.origins.iter().any(|o| o.edge != QuadEdge::Top) {
        return Err(Error::InvalidContour("lifted contour must consist of top arcs".into()));
    }
    if upper_heights.len() != upper.vertices.len() {
        return Err(Error::params("heights", "one height per vertex is required"));
    }
    if upper_heights.iter().any(|&z| z < h) || upper_heights.iter().all(|&z| z <= h) {
        return Err(Error::params("depth_or_height_range", "zero or negative elevation"));
    }
    let k = path.arc_count();
    let n = k + 1;
    let lower = lower_shift(path, layer);
    let up_side = triangulate_side(k, upper, Side::Upper)?;
    let (u0, l0, r0) = (n, n + upper.vertices.len(), 2 * n + upper.vertices.len());
    // raised copy height: where the straight section from the shift to the
    // adjacent contour vertices passes over the path vertex
    let mut elev = vec![(0.0, f64::INFINITY, 0usize); n];
    for t in &up_side.triangles {
        for a in t {
            let StripVertex::Path(i) = *a else { continue };
            for b in t {
                if let StripVertex::Upper(j) = *b {
                    let e = &mut elev[i];
                    e.0 += upper_heights[j] - h;
                    e.1 = e.1.min(path.vertices[i].dist(upper.vertices[j]));
                    e.2 += 1;
                }
            }
        }
    }
    let mean_lift = upper_heights.iter().map(|z| z - h).sum::<f64>() / upper_heights.len() as f64;
    let raised: Vec<f64> = elev
        .iter()
        .map(|&(e, d, c)| {
            let (e, d) = if c == 0 { (0.0, 0.0) } else { (e / c as f64, d) };
            let e = if e > 0.0 { e } else { mean_lift };
            h + e * layer / (layer + d)
        })
        .collect();
    let band: Vec<[StripVertex; 3]> = (0..k)
        .flat_map(|i| {
            use StripVertex::{Lower as L, Path as P};
            [[P(i), P(i + 1), L(i)], [L(i + 1), L(i), P(i + 1)]]
        })
        .collect();
    // the top is the underside lifted at path vertices, which stays clear of
    // it only while the underside is a fold-free graph over the plane
    let pos = |v: StripVertex| match v {
        StripVertex::Path(i) => path.vertices[i],
        StripVertex::Upper(j) => upper.vertices[j],
        StripVertex::Lower(j) => lower.vertices[j],
    };
    let sign = |t: &[StripVertex; 3]| {
        let [a, b, c] = t.map(pos);
        (b - a).cross(c - a)
    };
    let folds = |tris: &[[StripVertex; 3]]| {
        let total: f64 = tris.iter().map(sign).sum();
        tris.iter().filter(|t| sign(t) * total <= 0.0).count()
    };
    let folds = folds(&up_side.triangles) + folds(&band);
    if folds > 0 {
        return Err(Error::InvalidContour(format!("lifted sheet folds over {folds} triangles")));
    }
    let mut m = SurfaceMesh::new();
    for &v in &path.vertices {
        m.add_vertex(Point3::from_xy(v, h));
    }
    for (&v, &z) in upper.vertices.iter().zip(upper_heights) {
        m.add_vertex(Point3::from_xy(v, z));
    }
    for &v in &lower.vertices {
        m.add_vertex(Point3::from_xy(v, h));
    }
    for (&v, &z) in path.vertices.iter().zip(&raised) {
        m.add_vertex(Point3::from_xy(v, z));
    }
    let index = |v: StripVertex, top: bool| match v {
        StripVertex::Path(i) if top => r0 + i,
        StripVertex::Path(i) => i,
        StripVertex::Upper(j) => u0 + j,
        StripVertex::Lower(j) => l0 + j,
    };
    for (tris, tag) in [(&up_side.triangles, Tag::Up), (&band, Tag::Low)] {
        for t in tris.iter() {
            m.add_triangle(t.map(|v| index(v, false)), tag);
            m.add_triangle(t.map(|v| index(v, true)), Tag::Cover);
        }
    }
    let um = u0 + upper.vertices.len() - 1;
    for (p, u, l) in [(0, u0, l0), (k, um, l0 + k)] {
        m.add_triangle([p, u, r0 + p], Tag::End);
        m.add_triangle([p, r0 + p, l], Tag::End);
    }
    Ok(CoatLift {
        mesh: finish(m)?,
        lower,
        raised,
    })
}

#[derive(Clone, Debug)]
pub struct CoatLift {
    pub mesh: SurfaceMesh<f64>,
    /// Path shifted by the layer thickness towards negative y.
    pub lower: Contour<f64>,
    /// Heights of the raised path copies on the top sheet.
    pub raised: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{dilate, Mode};

    fn straight() -> Path<f64> {
        Path::from_points((0..=4).map(|i| Point2::new(i as f64, 0.0)).collect())
    }

    #[test]
    fn straight_groove_is_a_closed_prism_like_body() {
        let path = straight();
        let d = dilate(&path, &[0.2; 4], Mode::Strip { x0: 0.0, x1: 4.0 }).unwrap();
        let heights = Heights {
            path: vec![0.6; 5],
            upper: vec![1.0; d.upper.vertices.len()],
            lower: vec![1.0; d.lower.vertices.len()],
        };
        let (m, strips) = elongated_mesh(&path, &d.upper, &d.lower, &heights).unwrap();
        let r = m.validate();
        assert!(r.is_valid(), "{}", r.failure_summary());
        // triangular cross-section 0.4 wide and 0.4 deep over length 4
        assert!((m.signed_volume().unwrap() - 0.32).abs() < 1e-12);
        assert_eq!(strips.upper.triangles.len(), 8);
    }

    #[test]
    fn coat_lift_with_constant_elevation() {
        let path = straight();
        let d = dilate(&path, &[0.2; 4], Mode::Strip { x0: 0.0, x1: 4.0 }).unwrap();
        let up = vec![1.3; d.upper.vertices.len()];
        let c = coat_lift_mesh(&path, &d.upper, &up, 0.1, 1.0).unwrap();
        let r = c.mesh.validate();
        assert!(r.is_valid(), "{}", r.failure_summary());
        let (_, hi) = c.mesh.bounds().unwrap();
        assert_eq!(hi.z, 1.3);
        assert!(c.lower.vertices.iter().all(|p| p.y == -0.1));
        // the raised path copy lies on the section from shift to contour
        assert!(c.raised.iter().all(|&z| (z - 1.1).abs() < 1e-12));
        // cross-section triangle with base 0.3 and apex height 0.3
        assert!((c.mesh.signed_volume().unwrap() - 4.0 * 0.5 * 0.1 * 0.3).abs() < 1e-9);
    }

    #[test]
    fn coat_lift_with_flat_ends() {
        let path = straight();
        let d = dilate(&path, &[0.2; 4], Mode::Strip { x0: 0.0, x1: 4.0 }).unwrap();
        let n = d.upper.vertices.len();
        let up: Vec<f64> = (0..n).map(|j| if j == 0 || j + 1 == n { 1.0 } else { 1.2 }).collect();
        let m = coat_lift_mesh(&path, &d.upper, &up, 0.1, 1.0).unwrap().mesh;
        let r = m.validate();
        assert!(r.is_valid(), "{}", r.failure_summary());
    }

    #[test]
    fn flat_sheet_is_rejected() {
        let path = straight();
        let d = dilate(&path, &[0.2; 4], Mode::Strip { x0: 0.0, x1: 4.0 }).unwrap();
        let up = vec![1.0; d.upper.vertices.len()];
        assert!(matches!(
            coat_lift_mesh(&path, &d.upper, &up, 0.1, 1.0),
            Err(Error::InvalidParams { .. })
        ));
    }
}
