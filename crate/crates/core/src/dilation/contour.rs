//! Outer boundary of a union of labelled polygons.
//!
//! All polygon edges are split at their mutual intersections. A split piece
//! belongs to the union boundary when a point just outside it (relative to its
//! own polygon) lies in no polygon. Boundary pieces are reversed so that the
//! union interior is on their right, then walked clockwise taking the leftmost
//! turn at every vertex, which keeps the walk on the outer boundary where
//! regions pinch together.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{point_in_polygon, signed_area, Point2};

use super::{Origin, QuadEdge};

type P = Point2<f64>;

#[derive(Clone, Debug)]
pub(crate) struct LabelledPolygon {
    pub points: Vec<P>,
    /// `labels[k]` tags the edge `points[k] -> points[k + 1]`.
    pub labels: Vec<Origin>,
}

impl LabelledPolygon {
    fn oriented_ccw(mut self) -> Self {
        if signed_area(&self.points) < 0.0 {
            let n = self.points.len();
            self.points.reverse();
            // edge k of the reversed ring was edge n - 2 - k of the original
            let old = self.labels.clone();
            for k in 0..n {
                self.labels[k] = old[(2 * n - 2 - k) % n];
            }
        }
        self
    }
}

pub(crate) enum Start {
    /// Topmost boundary vertex on the vertical line `x`.
    LeftBorder(f64),
    /// A given point, entered along the given direction.
    Point(P, P),
}

pub(crate) enum Stop {
    RightBorder(f64),
    Point(P),
}

struct Welder {
    tol: f64,
    points: Vec<P>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl Welder {
    fn key(&self, p: P) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    fn id(&mut self, p: P) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in v {
                        if self.points[i].dist(p) <= self.tol {
                            return i;
                        }
                    }
                }
            }
        }
        self.points.push(p);
        let id = self.points.len() - 1;
        self.grid.entry((kx, ky)).or_default().push(id);
        id
    }
}

struct Seg {
    a: P,
    b: P,
    origin: Origin,
    splits: Vec<(f64, P)>,
}

/// Returns the boundary walk as vertices plus one origin per arc, with
/// consecutive pieces of the same origin merged.
pub(crate) fn union_boundary(
    polygons: Vec<LabelledPolygon>,
    scale: f64,
    start: Start,
    stop: Stop,
) -> Result<(Vec<P>, Vec<Origin>)> {
    let polys: Vec<LabelledPolygon> = polygons
        .into_iter()
        .filter(|p| p.points.len() >= 3 && signed_area(&p.points).abs() > 1e-14 * scale * scale)
        .map(LabelledPolygon::oriented_ccw)
        .collect();
    let len_tol = 1e-10 * scale;
    let mut segs: Vec<Seg> = Vec::new();
    for poly in &polys {
        let n = poly.points.len();
        for k in 0..n {
            let (a, b) = (poly.points[k], poly.points[(k + 1) % n]);
            if a.dist(b) > len_tol {
                segs.push(Seg {
                    a,
                    b,
                    origin: poly.labels[k],
                    splits: Vec::new(),
                });
            }
        }
    }
    split_segments(&mut segs, len_tol);

    let mut welder = Welder {
        tol: 1e-9 * scale,
        points: Vec::new(),
        grid: HashMap::new(),
    };
    let eps = 1e-7 * scale;
    // directed boundary pieces, interior on the right
    let mut pieces: Vec<(usize, usize, Origin)> = Vec::new();
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for s in &mut segs {
        s.splits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut chain = vec![s.a];
        chain.extend(s.splits.iter().map(|x| x.1));
        chain.push(s.b);
        for w in chain.windows(2) {
            let (p, q) = (w[0], w[1]);
            if p.dist(q) <= len_tol {
                continue;
            }
            let d = (q - p).normalized();
            let outside = (p + q) * 0.5 + P::new(d.y, -d.x) * eps;
            if polys.iter().any(|poly| point_in_polygon(outside, &poly.points)) {
                continue;
            }
            let (ip, iq) = (welder.id(p), welder.id(q));
            if ip != iq && seen.insert((iq, ip), ()).is_none() {
                pieces.push((iq, ip, s.origin));
            }
        }
    }

    let pts = welder.points;
    let mut out_edges: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, _, _)) in pieces.iter().enumerate() {
        out_edges.entry(a).or_default().push(k);
    }
    let (start_v, mut dir_in) = match start {
        Start::LeftBorder(x) => {
            let v = pieces
                .iter()
                .filter(|p| pts[p.0].x == x && p.2.edge != QuadEdge::Border)
                .map(|p| p.0)
                .max_by(|&a, &b| pts[a].y.partial_cmp(&pts[b].y).unwrap())
                .ok_or_else(|| Error::InvalidContour("no boundary vertex on the left border".into()))?;
            (v, P::new(0.0, 1.0))
        }
        Start::Point(p, d) => {
            let v = (0..pts.len())
                .filter(|&i| pts[i].dist(p) <= 1e-9 * scale && out_edges.contains_key(&i))
                .min_by(|&a, &b| pts[a].dist(p).partial_cmp(&pts[b].dist(p)).unwrap())
                .ok_or_else(|| Error::InvalidContour("start corner is not on the boundary".into()))?;
            (v, d)
        }
    };
    let at_stop = |v: usize| match stop {
        Stop::RightBorder(x) => pts[v].x == x,
        Stop::Point(p) => pts[v].dist(p) <= 1e-9 * scale,
    };

    let mut verts = vec![pts[start_v]];
    let mut origins: Vec<Origin> = Vec::new();
    let mut used = vec![false; pieces.len()];
    let mut v = start_v;
    loop {
        let cands = out_edges.get(&v).map(Vec::as_slice).unwrap_or(&[]);
        let best = cands
            .iter()
            .copied()
            .filter(|&k| !used[k])
            .max_by(|&a, &b| {
                let ang = |k: usize| {
                    let d = pts[pieces[k].1] - pts[v];
                    dir_in.cross(d).atan2(dir_in.dot(d))
                };
                ang(a).partial_cmp(&ang(b)).unwrap()
            })
            .ok_or_else(|| Error::InvalidContour("boundary walk reached a dead end".into()))?;
        used[best] = true;
        let (_, w, origin) = pieces[best];
        if matches!(origin.edge, QuadEdge::Bottom | QuadEdge::Border) {
            return Err(Error::InvalidContour(format!(
                "boundary walk crossed a {:?} edge of arc {}",
                origin.edge, origin.arc
            )));
        }
        dir_in = pts[w] - pts[v];
        if origins.last() == Some(&origin) {
            *verts.last_mut().unwrap() = pts[w];
        } else {
            verts.push(pts[w]);
            origins.push(origin);
        }
        v = w;
        if at_stop(v) {
            break;
        }
        if v == start_v {
            return Err(Error::InvalidContour("boundary walk closed before the end".into()));
        }
    }
    Ok((verts, origins))
}

fn split_segments(segs: &mut [Seg], tol: f64) {
    let n = segs.len();
    let mut order: Vec<usize> = (0..n).collect();
    let minx = |s: &Seg| s.a.x.min(s.b.x);
    let maxx = |s: &Seg| s.a.x.max(s.b.x);
    order.sort_by(|&i, &j| minx(&segs[i]).partial_cmp(&minx(&segs[j])).unwrap());
    for oi in 0..n {
        let i = order[oi];
        for &j in &order[oi + 1..] {
            if minx(&segs[j]) > maxx(&segs[i]) + tol {
                break;
            }
            let (ylo_i, yhi_i) = (segs[i].a.y.min(segs[i].b.y), segs[i].a.y.max(segs[i].b.y));
            let (ylo_j, yhi_j) = (segs[j].a.y.min(segs[j].b.y), segs[j].a.y.max(segs[j].b.y));
            if ylo_j > yhi_i + tol || ylo_i > yhi_j + tol {
                continue;
            }
            let found = intersect(&segs[i], &segs[j], tol);
            for (t, p) in found.0 {
                segs[i].splits.push((t, p));
            }
            for (u, p) in found.1 {
                segs[j].splits.push((u, p));
            }
        }
    }
}

/// Interior split points of each segment caused by the other.
fn intersect(s: &Seg, o: &Seg, tol: f64) -> (Vec<(f64, P)>, Vec<(f64, P)>) {
    let (r, q) = (s.b - s.a, o.b - o.a);
    let (lr, lq) = (r.norm(), q.norm());
    let den = r.cross(q);
    let mut si = Vec::new();
    let mut oi = Vec::new();
    let interior = |t: f64, len: f64| t * len > tol && (1.0 - t) * len > tol;
    let dist_line = |p: P, a: P, d: P, l: f64| (p - a).cross(d).abs() / l;
    if den.abs() <= 1e-12 * lr * lq {
        // parallel: only collinear overlaps split
        if dist_line(o.a, s.a, r, lr) > tol {
            return (si, oi);
        }
        for p in [o.a, o.b] {
            let t = (p - s.a).dot(r) / (lr * lr);
            if interior(t, lr) {
                si.push((t, p));
            }
        }
        for p in [s.a, s.b] {
            let u = (p - o.a).dot(q) / (lq * lq);
            if interior(u, lq) {
                oi.push((u, p));
            }
        }
        return (si, oi);
    }
    let w = o.a - s.a;
    let t = w.cross(q) / den;
    let u = w.cross(r) / den;
    let (ts, us) = (t * lr, u * lq);
    if ts < -tol || ts > lr + tol || us < -tol || us > lq + tol {
        return (si, oi);
    }
    let t_in = interior(t, lr);
    let u_in = interior(u, lq);
    // snap to an existing endpoint when the crossing sits on one
    let p = if !t_in {
        if t < 0.5 {
            s.a
        } else {
            s.b
        }
    } else if !u_in {
        if u < 0.5 {
            o.a
        } else {
            o.b
        }
    } else {
        s.a + r * t
    };
    if t_in {
        si.push((t, p));
    }
    if u_in {
        oi.push((u, p));
    }
    (si, oi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, x1: f64, y0: f64, y1: f64, arc: usize) -> LabelledPolygon {
        let o = |edge| Origin { arc, edge };
        LabelledPolygon {
            points: vec![P::new(x0, y0), P::new(x1, y0), P::new(x1, y1), P::new(x0, y1)],
            labels: vec![o(QuadEdge::Bottom), o(QuadEdge::Right), o(QuadEdge::Top), o(QuadEdge::Left)],
        }
    }

    #[test]
    fn single_rectangle_top() {
        let (v, o) = union_boundary(
            vec![rect(0.0, 1.0, 0.0, 0.2, 0)],
            1.0,
            Start::Point(P::new(0.0, 0.2), P::new(0.0, 1.0)),
            Stop::Point(P::new(1.0, 0.2)),
        )
        .unwrap();
        assert_eq!(v, vec![P::new(0.0, 0.2), P::new(1.0, 0.2)]);
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].edge, QuadEdge::Top);
    }

    #[test]
    fn step_up_uses_lateral_edge() {
        let (v, o) = union_boundary(
            vec![rect(0.0, 1.0, 0.0, 0.2, 0), rect(1.0, 2.0, 0.0, 0.5, 1)],
            2.0,
            Start::Point(P::new(0.0, 0.2), P::new(0.0, 1.0)),
            Stop::Point(P::new(2.0, 0.5)),
        )
        .unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(o[1], Origin { arc: 1, edge: QuadEdge::Left });
    }

    #[test]
    fn overlap_hides_swallowed_edges() {
        let (v, o) = union_boundary(
            vec![
                rect(0.0, 2.0, 0.0, 0.2, 0),
                rect(0.5, 1.0, 0.0, 0.1, 1),
                rect(1.5, 3.0, 0.0, 0.2, 2),
            ],
            3.0,
            Start::Point(P::new(0.0, 0.2), P::new(0.0, 1.0)),
            Stop::Point(P::new(3.0, 0.2)),
        )
        .unwrap();
        assert!(o.iter().all(|x| x.arc != 1));
        assert_eq!(v.first().unwrap(), &P::new(0.0, 0.2));
        assert_eq!(v.last().unwrap(), &P::new(3.0, 0.2));
    }
}
