//! Arc-wise dilation of a path into a planar footprint.
//!
//! Each arc `a_i` is thickened into a rectangle on each side of the path by
//! its half width `l_i` along the upward normal `n_i`. At reflex corners the
//! gap between neighbouring rectangles is closed by moving the top corners to
//! [`inter`], turning rectangles into quadrangles. The footprint contours are
//! the outer boundaries of the quadrangle unions on each side.

mod contour;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{line_intersection, Point2, Vec2};
use crate::pathing::Path;
use crate::scalar::Real;

use contour::{union_boundary, LabelledPolygon, Start, Stop};

/// Which side of a quadrangle a contour arc was cut from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadEdge {
    /// Offset edge parallel to the path arc.
    Top,
    /// Lateral edge at the arc start.
    Left,
    /// Lateral edge at the arc end.
    Right,
    /// The path arc itself.
    Bottom,
    /// A window border introduced by clipping.
    Border,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub arc: usize,
    pub edge: QuadEdge,
}

/// Contour path with one [`Origin`] per arc.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour<T> {
    pub vertices: Vec<Point2<T>>,
    pub origins: Vec<Origin>,
}

impl<T: Real> Contour<T> {
    pub fn arc_count(&self) -> usize {
        self.origins.len()
    }

    /// The same contour reflected in the x axis.
    pub fn mirror_y(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p.mirror_y()).collect(),
            origins: self.origins.clone(),
        }
    }
}

/// Quadrangle corners in the order `alpha, omega, top-right, top-left`.
pub type Quad<T> = [Point2<T>; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode<T> {
    /// Close the end gaps against the vertical lines `x = x0`, `x = x1` and
    /// clip everything to the strip between them.
    Strip { x0: T, x1: T },
    /// Contours run from the first quad's top-left corner to the last quad's
    /// top-right corner; nothing is clipped.
    Open,
}

#[derive(Clone, Debug)]
pub struct DilatedPath<T> {
    pub upper_quads: Vec<Quad<T>>,
    pub lower_quads: Vec<Quad<T>>,
    pub upper: Contour<T>,
    pub lower: Contour<T>,
}

/// Unit normal of `d` with non-negative y component.
pub fn upward_normal<T: Real>(d: Vec2<T>) -> Vec2<T> {
    let n = d.perp().normalized();
    if n.y < T::zero() || (n.y == T::zero() && n.x > T::zero()) {
        -n
    } else {
        n
    }
}

/// Unit normal of `d` on its left.
pub fn left_normal<T: Real>(d: Vec2<T>) -> Vec2<T> {
    d.perp().normalized()
}

/// Side normal used by `mode`: upward in a strip, left of travel when open.
pub fn side_normal<T: Real>(d: Vec2<T>, mode: Mode<T>) -> Vec2<T> {
    match mode {
        Mode::Strip { .. } => upward_normal(d),
        Mode::Open => left_normal(d),
    }
}

/// Rectangle halves `R_i` on the `mode` side of each arc, before gap repair.
pub fn rectangles<T: Real>(path: &Path<T>, widths: &[T], mode: Mode<T>) -> Vec<Quad<T>> {
    (0..path.arc_count())
        .map(|i| {
            let (a, w) = path.arc(i);
            let n = side_normal(w - a, mode) * widths[i];
            [a, w, w + n, a + n]
        })
        .collect()
}

/// How [`inter`] repairs a reflex corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Corner<T> {
    /// Both offset top edges extended to their common point.
    Shared(Point2<T>),
    /// The first arc's top edge elongated to the second rectangle's lateral side.
    ExtendFirst(Point2<T>),
    /// The second arc's top edge elongated back to the first rectangle's lateral side.
    ExtendSecond(Point2<T>),
}

impl<T: Real> Corner<T> {
    pub fn point(self) -> Point2<T> {
        match self {
            Corner::Shared(p) | Corner::ExtendFirst(p) | Corner::ExtendSecond(p) => p,
        }
    }
}

/// Whether the corner between arcs `i` and `i + 1` opens a gap on the side
/// of `q0`. Reads the side from the end edge of `q0`, which gap repair of
/// earlier corners leaves untouched.
pub fn is_reflex<T: Real>(q0: &Quad<T>, q1: &Quad<T>) -> bool {
    let n0 = q0[2] - q0[1];
    (q1[1] - q1[0]).dot(n0) < T::zero()
}

/// Gap-closing corner for consecutive rectangles `q0`, `q1` sharing `q0[1] == q1[0]`.
pub fn inter<T: Real>(q0: &Quad<T>, q1: &Quad<T>, l0: T, l1: T) -> Result<Corner<T>> {
    let (d0, d1) = (q0[1] - q0[0], q1[1] - q1[0]);
    let kink = q0[1];
    if let Some((lam, tau)) = line_intersection(q0[2], d0, q1[3], -d1) {
        if lam > T::zero() && tau > T::zero() {
            return Ok(Corner::Shared(q0[2] + d0 * lam));
        }
    }
    let degenerate = || Error::DegenerateCorner(0, 1);
    if l0 <= l1 {
        // elongate the first top edge to the lateral line of the second rectangle
        let side = q1[3] - kink;
        let (lam, mu) = line_intersection(q0[2], d0, kink, side).ok_or_else(degenerate)?;
        if lam > T::zero() && mu >= T::zero() {
            return Ok(Corner::ExtendFirst(q0[2] + d0 * lam));
        }
    } else {
        let side = q0[2] - kink;
        let (tau, mu) = line_intersection(q1[3], -d1, kink, side).ok_or_else(degenerate)?;
        if tau > T::zero() && mu >= T::zero() {
            return Ok(Corner::ExtendSecond(q1[3] - d1 * tau));
        }
    }
    Err(degenerate())
}

/// Quadrangles on the `mode` side of the path with reflex gaps repaired.
pub fn upper_quads<T: Real>(path: &Path<T>, widths: &[T], mode: Mode<T>) -> Vec<Quad<T>> {
    let mut quads = rectangles(path, widths, mode);
    for i in 0..quads.len().saturating_sub(1) {
        if !is_reflex(&quads[i], &quads[i + 1]) {
            continue;
        }
        match inter(&quads[i], &quads[i + 1], widths[i], widths[i + 1]) {
            Ok(Corner::Shared(x)) => {
                quads[i][2] = x;
                quads[i + 1][3] = x;
            }
            Ok(Corner::ExtendFirst(x)) => quads[i][2] = x,
            Ok(Corner::ExtendSecond(x)) => quads[i + 1][3] = x,
            // antiparallel arcs: keep the rectangle corners
            Err(_) => {}
        }
    }
    quads
}

fn check_input<T: Real>(path: &Path<T>, widths: &[T]) -> Result<()> {
    let k = path.arc_count();
    if k == 0 {
        return Err(Error::InvalidPath("path has no arcs".into()));
    }
    if widths.len() != k {
        return Err(Error::InvalidWidths {
            expected: k,
            got: widths.len(),
        });
    }
    if widths.iter().any(|l| !(*l > T::zero())) {
        return Err(Error::params("widths", "half widths must be positive"));
    }
    if path.vertices.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidPath("path has a zero-length arc".into()));
    }
    Ok(())
}

fn to_f64<T: Real>(p: Point2<T>) -> Point2<f64> {
    p.cast()
}

/// Moves the end corners onto the strip borders along their top lines.
fn close_end_gaps<T: Real>(quads: &mut [Quad<T>], x0: T, x1: T) {
    let k = quads.len();
    let q = quads[0];
    let d = q[1] - q[0];
    if d.x != T::zero() {
        let t = (x0 - q[3].x) / d.x;
        let p = q[3] + d * t;
        // never push the corner past the other top corner
        if (q[2] - p).dot(d) > T::zero() {
            quads[0][3] = Point2::new(x0, p.y);
        }
    }
    let q = quads[k - 1];
    let d = q[1] - q[0];
    if d.x != T::zero() {
        let t = (x1 - q[2].x) / d.x;
        let p = q[2] + d * t;
        if (p - q[3]).dot(d) > T::zero() {
            quads[k - 1][2] = Point2::new(x1, p.y);
        }
    }
}

/// Sutherland-Hodgman clip of a labelled ring to `x0 <= x <= x1`.
fn clip_strip(poly: LabelledPolygon, x0: f64, x1: f64) -> LabelledPolygon {
    let border = Origin {
        arc: usize::MAX,
        edge: QuadEdge::Border,
    };
    let mut cur = poly;
    for (bound, keep_ge) in [(x0, true), (x1, false)] {
        let inside = |p: Point2<f64>| if keep_ge { p.x >= bound } else { p.x <= bound };
        let n = cur.points.len();
        let mut pts = Vec::new();
        let mut labs = Vec::new();
        for k in 0..n {
            let (a, b) = (cur.points[k], cur.points[(k + 1) % n]);
            let lab = cur.labels[k];
            let cross = |a: Point2<f64>, b: Point2<f64>| {
                let t = (bound - a.x) / (b.x - a.x);
                Point2::new(bound, a.y + (b.y - a.y) * t)
            };
            match (inside(a), inside(b)) {
                (true, true) => {
                    pts.push(a);
                    labs.push(lab);
                }
                (true, false) => {
                    pts.push(a);
                    labs.push(lab);
                    pts.push(cross(a, b));
                    labs.push(border);
                }
                (false, true) => {
                    pts.push(cross(a, b));
                    labs.push(lab);
                }
                (false, false) => {}
            }
        }
        cur = LabelledPolygon {
            points: pts,
            labels: labs,
        };
        if cur.points.len() < 3 {
            break;
        }
    }
    cur
}

fn labelled(quads: &[Quad<f64>]) -> Vec<LabelledPolygon> {
    quads
        .iter()
        .enumerate()
        .map(|(arc, q)| {
            let o = |edge| Origin { arc, edge };
            LabelledPolygon {
                points: q.to_vec(),
                labels: vec![
                    o(QuadEdge::Bottom),
                    o(QuadEdge::Right),
                    o(QuadEdge::Top),
                    o(QuadEdge::Left),
                ],
            }
        })
        .collect()
}

fn upper_side<T: Real>(path: &Path<T>, widths: &[T], mode: Mode<T>) -> Result<(Vec<Quad<T>>, Contour<T>)> {
    let mut quads = upper_quads(path, widths, mode);
    let qf: Vec<Quad<f64>> = quads.iter().map(|q| q.map(to_f64)).collect();
    let lo = path.vertices.iter().fold(Point2::new(f64::MAX, f64::MAX), |m, p| {
        Point2::new(m.x.min(p.x.as_f64()), m.y.min(p.y.as_f64()))
    });
    let hi = path.vertices.iter().fold(Point2::new(f64::MIN, f64::MIN), |m, p| {
        Point2::new(m.x.max(p.x.as_f64()), m.y.max(p.y.as_f64()))
    });
    let lmax = widths.iter().fold(0.0f64, |m, l| m.max(l.as_f64()));
    let scale = lo.dist(hi) + lmax;
    let (verts, origins) = match mode {
        Mode::Strip { x0, x1 } => {
            close_end_gaps(&mut quads, x0, x1);
            let qf: Vec<Quad<f64>> = quads.iter().map(|q| q.map(to_f64)).collect();
            let (fx0, fx1) = (x0.as_f64(), x1.as_f64());
            let polys = labelled(&qf)
                .into_iter()
                .map(|p| clip_strip(p, fx0, fx1))
                .collect();
            union_boundary(polys, scale, Start::LeftBorder(fx0), Stop::RightBorder(fx1))?
        }
        Mode::Open => {
            let k = qf.len();
            let start = Start::Point(qf[0][3], qf[0][3] - qf[0][0]);
            union_boundary(labelled(&qf), scale, start, Stop::Point(qf[k - 1][2]))?
        }
    };
    let mut vertices: Vec<Point2<T>> = verts.iter().map(|p| p.cast()).collect();
    if let Mode::Strip { x0, x1 } = mode {
        // border coordinates are exact by construction
        vertices[0].x = x0;
        vertices.last_mut().unwrap().x = x1;
    }
    Ok((quads, Contour { vertices, origins }))
}

/// Dilates `path` by the per-arc half widths on both sides.
pub fn dilate<T: Real>(path: &Path<T>, widths: &[T], mode: Mode<T>) -> Result<DilatedPath<T>> {
    check_input(path, widths)?;
    let (upper_quads, upper) = upper_side(path, widths, mode)?;
    let mirrored = Path::from_points(path.vertices.iter().map(|p| p.mirror_y()).collect());
    let (lq, lc) = upper_side(&mirrored, widths, mode)?;
    Ok(DilatedPath {
        upper_quads,
        lower_quads: lq.iter().map(|q| q.map(|p| p.mirror_y())).collect(),
        upper,
        lower: lc.mirror_y(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point_in_polygon;

    fn path(pts: &[(f64, f64)]) -> Path<f64> {
        Path::from_points(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    #[test]
    fn single_arc_is_a_rectangle() {
        let p = path(&[(0.0, 0.0), (1.0, 0.0)]);
        let d = dilate(&p, &[0.2], Mode::Strip { x0: 0.0, x1: 1.0 }).unwrap();
        assert_eq!(d.upper.vertices, vec![Point2::new(0.0, 0.2), Point2::new(1.0, 0.2)]);
        assert_eq!(d.lower.vertices, vec![Point2::new(0.0, -0.2), Point2::new(1.0, -0.2)]);
        assert_eq!(d.upper.origins, vec![Origin { arc: 0, edge: QuadEdge::Top }]);
    }

    #[test]
    fn collinear_arcs_merge_into_one_run() {
        let p = path(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let d = dilate(&p, &[0.1, 0.1], Mode::Strip { x0: 0.0, x1: 2.0 }).unwrap();
        assert_eq!(d.upper.vertices.len(), 3);
        assert!(d.upper.vertices.iter().all(|v| (v.y - 0.1).abs() < 1e-15));
    }

    #[test]
    fn lambda_corner_matches_offset_line_intersection() {
        let p = path(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let d = dilate(&p, &[0.1, 0.1], Mode::Strip { x0: 0.0, x1: 2.0 }).unwrap();
        // offset lines y = x + 0.1*sqrt(2) and y = 2 - x + 0.1*sqrt(2)
        let apex = Point2::new(1.0, 1.0 + 0.1 * 2f64.sqrt());
        assert!(d.upper.vertices.iter().any(|v| v.dist(apex) < 1e-12));
        assert_eq!(d.upper.arc_count(), 2);
    }

    #[test]
    fn v_corner_is_offset_line_crossing() {
        let p = path(&[(0.0, 0.0), (1.0, -1.0), (2.0, 0.0)]);
        let d = dilate(&p, &[0.1, 0.1], Mode::Strip { x0: 0.0, x1: 2.0 }).unwrap();
        let x = Point2::new(1.0, -1.0 + 0.1 * 2f64.sqrt());
        assert!(d.upper.vertices.iter().any(|v| v.dist(x) < 1e-12));
        // lower side of the V is the reflex side
        let y = Point2::new(1.0, -1.0 - 0.1 * 2f64.sqrt());
        assert!(d.lower.vertices.iter().any(|v| v.dist(y) < 1e-12));
    }

    #[test]
    fn unequal_widths_extend_the_thinner_edge() {
        let q0 = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.1),
            Point2::new(0.0, 0.1),
        ];
        // right-angle turn downwards with a wider second arc
        let q1 = [
            Point2::new(1.0, 0.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.3, -1.0),
            Point2::new(1.3, 0.0),
        ];
        assert!(is_reflex(&q0, &q1));
        let c = inter(&q0, &q1, 0.1, 0.3).unwrap();
        assert_eq!(c, Corner::Shared(Point2::new(1.3, 0.1)));
    }

    #[test]
    fn contour_covers_raw_rectangles() {
        let p = path(&[(0.0, 0.0), (0.7, 0.3), (1.1, -0.2), (1.6, 0.1), (2.0, 0.0)]);
        let w = [0.1, 0.2, 0.05, 0.15];
        let d = dilate(&p, &w, Mode::Strip { x0: 0.0, x1: 2.0 }).unwrap();
        let mut ring = p.vertices.clone();
        ring.reverse();
        let mut poly = d.upper.vertices.clone();
        poly.extend(ring);
        let rects = rectangles(&p, &w, Mode::Open);
        let mut s = crate::rng::RandomStream::new(2);
        for r in &rects {
            for _ in 0..500 {
                let (a, b) = (s.unit(), s.unit());
                let q = r[0] + (r[1] - r[0]) * a + (r[3] - r[0]) * b;
                if q.x > 0.001 && q.x < 1.999 && b > 1e-6 && b < 1.0 - 1e-6 {
                    assert!(point_in_polygon(q, &poly), "{q:?}");
                }
            }
        }
    }

    #[test]
    fn open_mode_runs_corner_to_corner() {
        let p = path(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.0)]);
        let d = dilate(&p, &[0.1, 0.1], Mode::Open).unwrap();
        let q0 = rectangles(&p, &[0.1, 0.1], Mode::Open);
        assert!(d.upper.vertices[0].dist(q0[0][3]) < 1e-12);
        assert!(d.upper.vertices.last().unwrap().dist(q0[1][2]) < 1e-12);
    }

    #[test]
    fn width_mismatch() {
        let p = path(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(
            dilate(&p, &[0.1, 0.2], Mode::Open).unwrap_err(),
            Error::InvalidWidths { expected: 1, got: 2 }
        );
    }
}
