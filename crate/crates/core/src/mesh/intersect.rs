//! Exact triangle-triangle intersection tests for mesh validation.
//!
//! Triangles sharing vertices are tested for contact beyond what the shared
//! vertices imply; triangles sharing nothing are tested for any contact.

use robust::{orient2d, orient3d, Coord, Coord3D};

pub(crate) type V3 = [f64; 3];

#[inline]
fn c3(p: V3) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

#[inline]
pub(crate) fn o3(a: V3, b: V3, c: V3, d: V3) -> f64 {
    orient3d(c3(a), c3(b), c3(c), c3(d))
}

#[inline]
fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Axis dropped when projecting a (non-degenerate) triangle to 2D.
pub(crate) fn dominant_axis(a: V3, b: V3, c: V3) -> usize {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        (u[1] * v[2] - u[2] * v[1]).abs(),
        (u[2] * v[0] - u[0] * v[2]).abs(),
        (u[0] * v[1] - u[1] * v[0]).abs(),
    ];
    if n[0] >= n[1] && n[0] >= n[2] {
        0
    } else if n[1] >= n[2] {
        1
    } else {
        2
    }
}

#[inline]
pub(crate) fn proj(p: V3, axis: usize) -> Coord<f64> {
    match axis {
        0 => Coord { x: p[1], y: p[2] },
        1 => Coord { x: p[2], y: p[0] },
        _ => Coord { x: p[0], y: p[1] },
    }
}

#[inline]
fn o2(a: Coord<f64>, b: Coord<f64>, c: Coord<f64>) -> i8 {
    sgn(orient2d(a, b, c))
}

fn on_segment_2d(p: Coord<f64>, a: Coord<f64>, b: Coord<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment-segment intersection in the plane.
fn segments_meet_2d(a: Coord<f64>, b: Coord<f64>, c: Coord<f64>, d: Coord<f64>) -> bool {
    let (d1, d2) = (o2(a, b, c), o2(a, b, d));
    let (d3, d4) = (o2(c, d, a), o2(c, d, b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment_2d(c, a, b))
        || (d2 == 0 && on_segment_2d(d, a, b))
        || (d3 == 0 && on_segment_2d(a, c, d))
        || (d4 == 0 && on_segment_2d(b, c, d))
}

/// Closed point-in-triangle in the plane.
fn point_in_tri_2d(p: Coord<f64>, a: Coord<f64>, b: Coord<f64>, c: Coord<f64>) -> bool {
    let (s1, s2, s3) = (o2(a, b, p), o2(b, c, p), o2(c, a, p));
    let has_neg = s1 < 0 || s2 < 0 || s3 < 0;
    let has_pos = s1 > 0 || s2 > 0 || s3 > 0;
    !(has_neg && has_pos)
}

fn tris_meet_2d(t: [Coord<f64>; 3], u: [Coord<f64>; 3]) -> bool {
    for i in 0..3 {
        for j in 0..3 {
            if segments_meet_2d(t[i], t[(i + 1) % 3], u[j], u[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_tri_2d(t[0], u[0], u[1], u[2]) || point_in_tri_2d(u[0], t[0], t[1], t[2])
}

/// Closed segment-triangle contact for a segment not coplanar with the triangle.
fn segment_meets_triangle(p: V3, q: V3, t: [V3; 3]) -> bool {
    let (s1, s2) = (sgn(o3(t[0], t[1], t[2], p)), sgn(o3(t[0], t[1], t[2], q)));
    if s1 == s2 {
        // both on one side, or both coplanar (handled by the coplanar branch)
        return false;
    }
    let a = sgn(o3(p, q, t[0], t[1]));
    let b = sgn(o3(p, q, t[1], t[2]));
    let c = sgn(o3(p, q, t[2], t[0]));
    let has_neg = a < 0 || b < 0 || c < 0;
    let has_pos = a > 0 || b > 0 || c > 0;
    !(has_neg && has_pos)
}

fn coplanar(t: [V3; 3], u: [V3; 3]) -> bool {
    u.iter().all(|&p| o3(t[0], t[1], t[2], p) == 0.0)
}

/// Any contact between triangles with no shared vertex.
pub(crate) fn disjoint_pair_intersects(t: [V3; 3], u: [V3; 3]) -> bool {
    if coplanar(t, u) {
        let ax = dominant_axis(t[0], t[1], t[2]);
        return tris_meet_2d(t.map(|p| proj(p, ax)), u.map(|p| proj(p, ax)));
    }
    (0..3).any(|i| segment_meets_triangle(t[i], t[(i + 1) % 3], u))
        || (0..3).any(|i| segment_meets_triangle(u[i], u[(i + 1) % 3], t))
}

/// Contact beyond the shared vertex `v` for triangles `(v, a, b)` and `(v, c, d)`.
pub(crate) fn vertex_pair_intersects(v: V3, a: V3, b: V3, c: V3, d: V3) -> bool {
    let t = [v, a, b];
    let u = [v, c, d];
    if coplanar(t, u) {
        let ax = dominant_axis(v, a, b);
        let (pv, pa, pb, pc, pd) = (proj(v, ax), proj(a, ax), proj(b, ax), proj(c, ax), proj(d, ax));
        return sector_overlap(pv, pa, pb, pc, pd);
    }
    if segment_meets_triangle(a, b, u) || segment_meets_triangle(c, d, t) {
        return true;
    }
    // an edge through v lying in the other triangle's plane
    let in_plane_edge = |x: V3, tri: [V3; 3]| {
        if o3(tri[0], tri[1], tri[2], x) != 0.0 {
            return false;
        }
        let ax = dominant_axis(tri[0], tri[1], tri[2]);
        let (pv, p1, p2, px) = (proj(tri[0], ax), proj(tri[1], ax), proj(tri[2], ax), proj(x, ax));
        ray_in_closed_cone(pv, p1, p2, px)
    };
    in_plane_edge(a, u) || in_plane_edge(b, u) || in_plane_edge(c, t) || in_plane_edge(d, t)
}

fn ray_in_closed_cone(v: Coord<f64>, p: Coord<f64>, q: Coord<f64>, r: Coord<f64>) -> bool {
    let (p, q) = if o2(v, p, q) >= 0 { (p, q) } else { (q, p) };
    // the cone is narrower than a half plane, so the opposite ray fails one test
    o2(v, p, r) >= 0 && o2(v, r, q) >= 0
}

fn sector_overlap(v: Coord<f64>, a: Coord<f64>, b: Coord<f64>, c: Coord<f64>, d: Coord<f64>) -> bool {
    ray_in_closed_cone(v, a, b, c)
        || ray_in_closed_cone(v, a, b, d)
        || ray_in_closed_cone(v, c, d, a)
        || ray_in_closed_cone(v, c, d, b)
}

/// Triangles sharing edge `(u, v)` with apexes `a` and `b` fold onto each other.
pub(crate) fn edge_pair_folds(u: V3, v: V3, a: V3, b: V3) -> bool {
    if o3(u, v, a, b) != 0.0 {
        return false;
    }
    let ax = dominant_axis(u, v, a);
    let (pu, pv) = (proj(u, ax), proj(v, ax));
    o2(pu, pv, proj(a, ax)) * o2(pu, pv, proj(b, ax)) > 0
}
