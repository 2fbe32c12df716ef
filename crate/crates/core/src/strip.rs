//! Side walls, covers and end caps connecting a path to its contours.
//!
//! A side wall is a zipper between the path polyline `P(0..=K)` and a contour
//! polyline `C(0..=m)`: every triangle either consumes one path arc (apex on
//! the contour) or one contour arc (apex on the path). Which of the two
//! happens next is decided by the contour arc's origin, following four cases:
//!
//! 1. first visit of a quad through its top edge: the pair
//!    `P(i) P(i+1) C(j)`, `P(i+1) C(j+1) C(j)`;
//! 2. a later top-edge arc of an already visited quad, fanned from the last
//!    path vertex;
//! 3. lateral-edge arcs, fanned from the path vertex at the foot of the edge;
//! 4. path arcs with no visible top edge, fanned from the current contour
//!    vertex.

use crate::dilation::{Contour, QuadEdge};
use crate::error::{Error, Result};
use crate::geom::{constrained_triangulation, ear_clip, signed_area, Point2};
use crate::pathing::Path;
use crate::scalar::Real;

/// Vertex reference inside a defect's strip construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StripVertex {
    Path(usize),
    Upper(usize),
    Lower(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleStrip {
    pub triangles: Vec<[StripVertex; 3]>,
    /// Case number (1 to 4) of each triangle.
    pub cases: Vec<u8>,
}

impl TriangleStrip {
    fn path_step(&mut self, p: usize, c: StripVertex, case: u8) {
        self.triangles.push([StripVertex::Path(p), StripVertex::Path(p + 1), c]);
        self.cases.push(case);
    }

    fn contour_step(&mut self, p: usize, c0: StripVertex, c1: StripVertex, case: u8) {
        self.triangles.push([StripVertex::Path(p), c1, c0]);
        self.cases.push(case);
    }

    /// Same triangles with reversed winding.
    pub fn flipped(mut self) -> Self {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
        self
    }

    pub fn case_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for &k in &self.cases {
            c[k as usize - 1] += 1;
        }
        c
    }
}

/// Zipper between a path with `path_arcs` arcs and one of its contours.
/// Triangles wind `P(p) -> P(p+1)` along the path for both sides; callers
/// flip one side to make the closed surface consistently oriented.
pub fn triangulate_side<T: Real>(
    path_arcs: usize,
    contour: &Contour<T>,
    side: Side,
) -> Result<TriangleStrip> {
    let m = contour.arc_count();
    if contour.vertices.len() != m + 1 || m == 0 {
        return Err(Error::InvalidContour(
            "contour needs one origin per arc".into(),
        ));
    }
    let cv = |j: usize| match side {
        Side::Upper => StripVertex::Upper(j),
        Side::Lower => StripVertex::Lower(j),
    };
    let mut strip = TriangleStrip::default();
    // invariant: p == i_last + 1
    let mut i_last: isize = -1;
    let mut p = 0usize;
    for (j, o) in contour.origins.iter().enumerate() {
        let i = o.arc;
        if i >= path_arcs {
            return Err(Error::InvalidContour(format!(
                "contour arc {j} refers to missing path arc {i}"
            )));
        }
        if i as isize > i_last {
            while p < i {
                strip.path_step(p, cv(j), 4);
                p += 1;
            }
            match o.edge {
                QuadEdge::Top => {
                    strip.path_step(i, cv(j), 1);
                    strip.contour_step(i + 1, cv(j), cv(j + 1), 1);
                    i_last = i as isize;
                }
                QuadEdge::Left => {
                    strip.contour_step(i, cv(j), cv(j + 1), 3);
                    i_last = i as isize - 1;
                }
                QuadEdge::Right => {
                    strip.path_step(i, cv(j), 4);
                    strip.contour_step(i + 1, cv(j), cv(j + 1), 3);
                    i_last = i as isize;
                }
                QuadEdge::Bottom | QuadEdge::Border => {
                    return Err(Error::InvalidContour(format!(
                        "contour arc {j} lies on a {:?} edge",
                        o.edge
                    )))
                }
            }
            p = (i_last + 1) as usize;
        } else {
            let case = if o.edge == QuadEdge::Top { 2 } else { 3 };
            strip.contour_step(p, cv(j), cv(j + 1), case);
        }
    }
    while p < path_arcs {
        strip.path_step(p, cv(m), 4);
        p += 1;
    }
    Ok(strip)
}

/// Planar triangulation of the footprint bounded by the upper contour and
/// the reversed lower contour. Path endpoints flagged in `ends` are inserted
/// on the closing border segments (used when an end cap would be flat).
/// Triangles are counter-clockwise in the plane.
pub fn cover_top<T: Real>(
    path: &Path<T>,
    upper: &Contour<T>,
    lower: &Contour<T>,
    ends: [bool; 2],
) -> Result<Vec<[StripVertex; 3]>> {
    let k = path.vertices.len() - 1;
    let mut ring: Vec<StripVertex> = (0..upper.vertices.len()).map(StripVertex::Upper).collect();
    if ends[1] {
        ring.push(StripVertex::Path(k));
    }
    ring.extend((0..lower.vertices.len()).rev().map(StripVertex::Lower));
    if ends[0] {
        ring.push(StripVertex::Path(0));
    }
    let pos = |v: StripVertex| match v {
        StripVertex::Path(i) => path.vertices[i],
        StripVertex::Upper(i) => upper.vertices[i],
        StripVertex::Lower(i) => lower.vertices[i],
    };
    let pts: Vec<Point2<T>> = ring.iter().map(|&v| pos(v)).collect();
    let tris = match constrained_triangulation(&pts) {
        Some(t) => t,
        None if is_strictly_convex(&pts) => {
            let ccw = signed_area(&pts) > T::zero();
            (1..pts.len() - 1)
                .map(|i| if ccw { [0, i, i + 1] } else { [0, i + 1, i] })
                .collect()
        }
        None => ear_clip(&pts)?,
    };
    Ok(tris
        .into_iter()
        .map(|t| [ring[t[0]], ring[t[1]], ring[t[2]]])
        .collect())
}

fn is_strictly_convex<T: Real>(poly: &[Point2<T>]) -> bool {
    let n = poly.len();
    let s = signed_area(poly);
    if s == T::zero() {
        return false;
    }
    (0..n).all(|i| {
        let (a, b, c) = (poly[i], poly[(i + 1) % n], poly[(i + 2) % n]);
        (b - a).cross(c - b) * s > T::zero()
    })
}

/// End cap triangles `(v_0, C^up_0, C^low_0)` and `(v_K, C^low_m, C^up_m)`.
/// A cap whose flag is false in `keep` is omitted (the endpoint then sits on
/// the cover boundary instead).
pub fn end_caps<T: Real>(
    path: &Path<T>,
    upper: &Contour<T>,
    lower: &Contour<T>,
    keep: [bool; 2],
) -> Vec<[StripVertex; 3]> {
    let k = path.vertices.len() - 1;
    let mut caps = Vec::new();
    if keep[0] {
        caps.push([StripVertex::Path(0), StripVertex::Upper(0), StripVertex::Lower(0)]);
    }
    if keep[1] {
        caps.push([
            StripVertex::Path(k),
            StripVertex::Lower(lower.vertices.len() - 1),
            StripVertex::Upper(upper.vertices.len() - 1),
        ]);
    }
    caps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::Origin;

    fn contour(n: usize, origins: &[(usize, QuadEdge)]) -> Contour<f64> {
        Contour {
            vertices: (0..=n).map(|i| Point2::new(i as f64, 1.0)).collect(),
            origins: origins.iter().map(|&(arc, edge)| Origin { arc, edge }).collect(),
        }
    }

    #[test]
    fn single_top_arc_gives_two_case_one_triangles() {
        let s = triangulate_side(1, &contour(1, &[(0, QuadEdge::Top)]), Side::Upper).unwrap();
        assert_eq!(s.cases, vec![1, 1]);
    }

    #[test]
    fn swallowed_middle_quad_gets_a_fan() {
        let c = contour(2, &[(0, QuadEdge::Top), (2, QuadEdge::Top)]);
        let s = triangulate_side(3, &c, Side::Upper).unwrap();
        assert_eq!(s.triangles.len(), 2 * 2 + 1);
        assert_eq!(s.case_counts(), [4, 0, 0, 1]);
    }

    #[test]
    fn lateral_and_revisit_cases() {
        let c = contour(
            4,
            &[
                (0, QuadEdge::Top),
                (1, QuadEdge::Left),
                (1, QuadEdge::Top),
                (0, QuadEdge::Top),
            ],
        );
        let s = triangulate_side(2, &c, Side::Upper).unwrap();
        assert_eq!(s.case_counts(), [4, 1, 1, 0]);
        // every contour arc is an edge of exactly one triangle
        for j in 0..4 {
            let hits = s
                .triangles
                .iter()
                .filter(|t| t.contains(&StripVertex::Upper(j)) && t.contains(&StripVertex::Upper(j + 1)))
                .count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn rectangle_cover_is_two_triangles() {
        let path = Path::from_points(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        let up = contour(1, &[(0, QuadEdge::Top)]);
        let mut low = up.clone();
        low.vertices = vec![Point2::new(0.0, -1.0), Point2::new(1.0, -1.0)];
        let up = Contour {
            vertices: vec![Point2::new(0.0, 1.0), Point2::new(1.0, 1.0)],
            ..up
        };
        let tris = cover_top(&path, &up, &low, [false, false]).unwrap();
        assert_eq!(tris.len(), 2);
    }
}
