//! Triangle surface meshes: construction, welding, orientation, volume and
//! validity checks, plus Booleans and slab imprinting.

pub mod boolean;
mod intersect;
pub mod slab;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::scalar::Real;

pub use boolean::{boolean, BooleanOp};
pub use slab::{imprint_into_slab, Slab};

/// Which construction step produced a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Side wall between the path and a contour.
    Strip,
    /// Planar footprint at the object surface.
    Surface,
    /// Vertical end cap.
    End,
    /// Upper elevated side of a coat lift.
    Up,
    /// Lower shifted band of a coat lift.
    Low,
    /// Cover between the coat lift contours.
    Cover,
    /// Delamination piece top or bottom layer.
    Layer,
    /// Delamination piece side wall.
    Wall,
    /// Slab faces.
    Slab,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceMesh<T> {
    pub vertices: Vec<Point3<T>>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<Tag>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub vertices: usize,
    pub triangles: usize,
    pub closed: bool,
    pub oriented: bool,
    pub boundary_edges: usize,
    pub nonmanifold_edges: usize,
    pub components: usize,
    /// `V - E + F` of every connected component.
    pub euler: Vec<i64>,
    pub min_area: f64,
    pub degenerate_triangles: usize,
    pub self_intersections: usize,
}

impl ValidationReport {
    /// Closed, oriented, spherical components, no degenerate or intersecting triangles.
    pub fn is_valid(&self) -> bool {
        self.triangles > 0
            && self.closed
            && self.oriented
            && self.euler.iter().all(|&e| e == 2)
            && self.degenerate_triangles == 0
            && self.min_area > 0.0
            && self.self_intersections == 0
    }

    pub fn failure_summary(&self) -> String {
        format!(
            "closed={} oriented={} boundary={} nonmanifold={} euler={:?} degenerate={} self_intersections={}",
            self.closed,
            self.oriented,
            self.boundary_edges,
            self.nonmanifold_edges,
            self.euler,
            self.degenerate_triangles,
            self.self_intersections
        )
    }
}

fn tri_area<T: Real>(a: Point3<T>, b: Point3<T>, c: Point3<T>) -> T {
    (b - a).cross(c - a).norm() * T::half()
}

impl<T: Real> SurfaceMesh<T> {
    pub fn new() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            tags: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn add_vertex(&mut self, p: Point3<T>) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn add_triangle(&mut self, t: [usize; 3], tag: Tag) {
        self.triangles.push(t);
        self.tags.push(tag);
    }

    /// Disjoint union (no welding).
    pub fn append(&mut self, other: &Self) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|v| v + off)));
        self.tags.extend_from_slice(&other.tags);
    }

    pub fn flipped(mut self) -> Self {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
        self
    }

    pub fn translated(mut self, d: Point3<T>) -> Self {
        for v in &mut self.vertices {
            *v = *v + d;
        }
        self
    }

    pub fn cast<U: Real>(&self) -> SurfaceMesh<U> {
        SurfaceMesh {
            vertices: self.vertices.iter().map(|p| p.cast()).collect(),
            triangles: self.triangles.clone(),
            tags: self.tags.clone(),
        }
    }

    /// Axis-aligned bounds `(min, max)`; `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Point3<T>, Point3<T>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (
                Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }

    pub fn diagonal(&self) -> T {
        self.bounds().map_or(T::zero(), |(lo, hi)| lo.dist(hi))
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        tri_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Merges vertices closer than `tol`, drops triangles that collapse and
    /// vertices no triangle uses. Vertex order follows first use.
    pub fn weld(&self, tol: T) -> Self {
        let n = self.vertices.len();
        let mut rep: Vec<usize> = (0..n).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.vertices[a]
                .x
                .partial_cmp(&self.vertices[b].x)
                .unwrap()
                .then(a.cmp(&b))
        });
        for w in 0..n {
            let i = order[w];
            if rep[i] != i {
                continue;
            }
            for &j in &order[w + 1..] {
                if self.vertices[j].x - self.vertices[i].x > tol {
                    break;
                }
                if rep[j] == j && self.vertices[i].dist(self.vertices[j]) <= tol {
                    rep[j] = i;
                }
            }
        }
        let mut out = Self::new();
        let mut new_id = vec![usize::MAX; n];
        for (t, tag) in self.triangles.iter().zip(&self.tags) {
            let r = t.map(|v| rep[v]);
            if r[0] == r[1] || r[1] == r[2] || r[0] == r[2] {
                continue;
            }
            let ids = r.map(|v| {
                if new_id[v] == usize::MAX {
                    new_id[v] = out.add_vertex(self.vertices[v]);
                }
                new_id[v]
            });
            out.add_triangle(ids, *tag);
        }
        out
    }

    /// Weld tolerance relative to the bounding-box diagonal.
    pub fn welded(&self) -> Self {
        self.weld(self.diagonal() * T::lit(1e-9))
    }

    fn edge_map(&self) -> HashMap<(usize, usize), Vec<(usize, bool)>> {
        // undirected edge -> (triangle, stored in forward direction)
        let mut m: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m.entry((a.min(b), a.max(b))).or_default().push((ti, a < b));
            }
        }
        m
    }

    /// Connected components over shared edges, as triangle index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let edges = self.edge_map();
        let mut adj = vec![Vec::new(); self.triangles.len()];
        for users in edges.values() {
            for w in users.windows(2) {
                adj[w[0].0].push(w[1].0);
                adj[w[1].0].push(w[0].0);
            }
        }
        let mut comp = vec![usize::MAX; self.triangles.len()];
        let mut out = Vec::new();
        for s in 0..self.triangles.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut list = vec![s];
            comp[s] = id;
            let mut k = 0;
            while k < list.len() {
                let t = list[k];
                k += 1;
                for &u in &adj[t] {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        list.push(u);
                    }
                }
            }
            list.sort_unstable();
            out.push(list);
        }
        out
    }

    /// Makes winding consistent across shared edges (BFS per component) and
    /// flips every component whose enclosed volume is negative.
    pub fn oriented_outward(mut self) -> Result<Self> {
        let edges = self.edge_map();
        let mut nbr: Vec<Vec<usize>> = vec![Vec::new(); self.triangles.len()];
        for users in edges.values() {
            if users.len() == 2 {
                nbr[users[0].0].push(users[1].0);
                nbr[users[1].0].push(users[0].0);
            }
        }
        let mut done = vec![false; self.triangles.len()];
        for s in 0..self.triangles.len() {
            if done[s] {
                continue;
            }
            done[s] = true;
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(t) = q.pop_front() {
                for &u in &nbr[t] {
                    let shared_same_dir = {
                        let (a, b) = (self.triangles[t], self.triangles[u]);
                        (0..3).any(|i| {
                            let (x, y) = (a[i], a[(i + 1) % 3]);
                            (0..3).any(|j| b[j] == x && b[(j + 1) % 3] == y)
                        })
                    };
                    if done[u] {
                        if shared_same_dir {
                            return Err(Error::Boolean("surface is not orientable".into()));
                        }
                        continue;
                    }
                    if shared_same_dir {
                        self.triangles[u].swap(1, 2);
                    }
                    done[u] = true;
                    comp.push(u);
                    q.push_back(u);
                }
            }
            let vol = comp.iter().fold(T::zero(), |acc, &t| acc + self.tet_volume(t));
            if vol < T::zero() {
                for &t in &comp {
                    self.triangles[t].swap(1, 2);
                }
            }
        }
        Ok(self)
    }

    fn tet_volume(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        a.dot(b.cross(c)) / T::lit(6.0)
    }

    /// Volume by the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> Result<T> {
        let edges = self.edge_map();
        if self.triangles.is_empty() || edges.values().any(|u| u.len() != 2) {
            return Err(Error::NotClosed);
        }
        // subtracting a reference point keeps the sum translation invariant
        let r = self.vertices[self.triangles[0][0]];
        Ok((0..self.triangles.len()).fold(T::zero(), |acc, t| {
            let [a, b, c] = self.triangles[t].map(|i| self.vertices[i] - r);
            acc + a.dot(b.cross(c)) / T::lit(6.0)
        }))
    }

    /// Combinatorial checks plus exact self-intersection testing.
    pub fn validate(&self) -> ValidationReport {
        let edges = self.edge_map();
        let mut boundary = 0;
        let mut nonmanifold = 0;
        let mut oriented = true;
        for users in edges.values() {
            match users.len() {
                1 => boundary += 1,
                2 => oriented &= users[0].1 != users[1].1,
                _ => {
                    nonmanifold += 1;
                    oriented = false;
                }
            }
        }
        let comps = self.components();
        let euler = comps
            .iter()
            .map(|c| {
                let mut vs: Vec<usize> = c.iter().flat_map(|&t| self.triangles[t]).collect();
                vs.sort_unstable();
                vs.dedup();
                let mut es: Vec<(usize, usize)> = c
                    .iter()
                    .flat_map(|&t| {
                        let tr = self.triangles[t];
                        (0..3).map(move |k| {
                            let (a, b) = (tr[k], tr[(k + 1) % 3]);
                            (a.min(b), a.max(b))
                        })
                    })
                    .collect();
                es.sort_unstable();
                es.dedup();
                vs.len() as i64 - es.len() as i64 + c.len() as i64
            })
            .collect();
        let areas: Vec<f64> = (0..self.triangles.len())
            .map(|t| self.triangle_area(t).as_f64())
            .collect();
        let min_area = areas.iter().copied().fold(f64::INFINITY, f64::min);
        let degenerate = self
            .triangles
            .iter()
            .filter(|t| t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            .count()
            + areas.iter().filter(|&&a| a <= 0.0).count();
        ValidationReport {
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            closed: boundary == 0 && nonmanifold == 0 && !self.triangles.is_empty(),
            oriented,
            boundary_edges: boundary,
            nonmanifold_edges: nonmanifold,
            components: comps.len(),
            euler,
            min_area: if min_area.is_finite() { min_area } else { 0.0 },
            degenerate_triangles: degenerate,
            self_intersections: self.count_self_intersections(),
        }
    }

    /// Number of intersecting triangle pairs (contact beyond shared vertices).
    pub fn count_self_intersections(&self) -> usize {
        self.intersecting_pairs().len()
    }

    pub fn intersecting_pairs(&self) -> Vec<(usize, usize)> {
        let f = self.triangles.len();
        if f < 2 {
            return Vec::new();
        }
        let pts: Vec<[f64; 3]> = self
            .vertices
            .iter()
            .map(|p| [p.x.as_f64(), p.y.as_f64(), p.z.as_f64()])
            .collect();
        let boxes: Vec<([f64; 3], [f64; 3])> = self
            .triangles
            .iter()
            .map(|t| {
                let mut lo = pts[t[0]];
                let mut hi = lo;
                for &v in &t[1..] {
                    for a in 0..3 {
                        lo[a] = lo[a].min(pts[v][a]);
                        hi[a] = hi[a].max(pts[v][a]);
                    }
                }
                (lo, hi)
            })
            .collect();
        let (glo, ghi) = boxes.iter().fold(
            ([f64::MAX; 3], [f64::MIN; 3]),
            |(mut lo, mut hi), (a, b)| {
                for k in 0..3 {
                    lo[k] = lo[k].min(a[k]);
                    hi[k] = hi[k].max(b[k]);
                }
                (lo, hi)
            },
        );
        let ext: Vec<f64> = (0..3).map(|k| (ghi[k] - glo[k]).max(1e-300)).collect();
        let res = ((f as f64).cbrt().ceil() as usize).clamp(1, 64);
        let cell_of = |x: f64, k: usize| (((x - glo[k]) / ext[k] * res as f64) as usize).min(res - 1);
        let mut grid: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
        for (t, (lo, hi)) in boxes.iter().enumerate() {
            for i in cell_of(lo[0], 0)..=cell_of(hi[0], 0) {
                for j in cell_of(lo[1], 1)..=cell_of(hi[1], 1) {
                    for k in cell_of(lo[2], 2)..=cell_of(hi[2], 2) {
                        grid.entry((i, j, k)).or_default().push(t);
                    }
                }
            }
        }
        let mut pairs = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut cells: Vec<_> = grid.into_iter().collect();
        cells.sort_by_key(|c| c.0);
        for (_, list) in &cells {
            for x in 0..list.len() {
                for y in x + 1..list.len() {
                    let (s, t) = (list[x].min(list[y]), list[x].max(list[y]));
                    let (bs, bt) = (&boxes[s], &boxes[t]);
                    if (0..3).any(|k| bs.1[k] < bt.0[k] || bt.1[k] < bs.0[k]) {
                        continue;
                    }
                    if !seen.insert((s, t)) {
                        continue;
                    }
                    if self.pair_intersects(&pts, s, t) {
                        pairs.push((s, t));
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    fn pair_intersects(&self, pts: &[[f64; 3]], s: usize, t: usize) -> bool {
        let (a, b) = (self.triangles[s], self.triangles[t]);
        let repeats = |t: [usize; 3]| t[0] == t[1] || t[1] == t[2] || t[0] == t[2];
        // index-degenerate triangles are reported as degenerate, not here
        if repeats(a) || repeats(b) {
            return false;
        }
        let shared: Vec<usize> = a.iter().copied().filter(|v| b.contains(v)).collect();
        match shared.len() {
            0 => intersect::disjoint_pair_intersects(a.map(|v| pts[v]), b.map(|v| pts[v])),
            1 => {
                let v = shared[0];
                let rot = |tr: [usize; 3]| {
                    let k = tr.iter().position(|&x| x == v).unwrap();
                    (tr[(k + 1) % 3], tr[(k + 2) % 3])
                };
                let ((a1, a2), (b1, b2)) = (rot(a), rot(b));
                intersect::vertex_pair_intersects(pts[v], pts[a1], pts[a2], pts[b1], pts[b2])
            }
            2 => {
                let pa = *a.iter().find(|v| !shared.contains(v)).unwrap();
                let pb = *b.iter().find(|v| !shared.contains(v)).unwrap();
                intersect::edge_pair_folds(pts[shared[0]], pts[shared[1]], pts[pa], pts[pb])
            }
            _ => true,
        }
    }
}

/// Closed box mesh with outward winding.
pub fn box_mesh<T: Real>(lo: Point3<T>, hi: Point3<T>, tag: Tag) -> SurfaceMesh<T> {
    let mut m = SurfaceMesh::new();
    for k in 0..8 {
        m.add_vertex(Point3::new(
            if k & 1 == 0 { lo.x } else { hi.x },
            if k & 2 == 0 { lo.y } else { hi.y },
            if k & 4 == 0 { lo.z } else { hi.z },
        ));
    }
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    for q in quads {
        m.add_triangle([q[0], q[1], q[2]], tag);
        m.add_triangle([q[0], q[2], q[3]], tag);
    }
    m
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn tetra() -> SurfaceMesh<f64> {
        let mut m = SurfaceMesh::new();
        for p in [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ] {
            m.add_vertex(p);
        }
        for t in [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]] {
            m.add_triangle(t, Tag::Surface);
        }
        m
    }

    pub(crate) fn unit_cube() -> SurfaceMesh<f64> {
        box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0), Tag::Slab)
    }

    #[test]
    fn tetrahedron_is_valid() {
        let r = tetra().validate();
        assert!(r.is_valid(), "{r:?}");
        assert_eq!(r.euler, vec![2]);
        assert!((tetra().signed_volume().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn open_tetrahedron() {
        let mut m = tetra();
        m.triangles.pop();
        m.tags.pop();
        let r = m.validate();
        assert!(!r.closed);
        assert_eq!(r.boundary_edges, 3);
        assert_eq!(m.signed_volume(), Err(Error::NotClosed));
    }

    #[test]
    fn cube_volume_and_flip() {
        let c = unit_cube();
        assert!(c.validate().is_valid());
        assert!((c.signed_volume().unwrap() - 1.0).abs() < 1e-15);
        assert!((c.clone().flipped().signed_volume().unwrap() + 1.0).abs() < 1e-15);
        let fixed = c.flipped().oriented_outward().unwrap();
        assert!((fixed.signed_volume().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_cubes_self_intersect() {
        let mut m = unit_cube();
        m.append(&box_mesh(
            Point3::new(0.5, 0.5, 0.5),
            Point3::new(1.5, 1.5, 1.5),
            Tag::Slab,
        ));
        assert!(m.validate().self_intersections > 0);
        let mut far = unit_cube();
        far.append(&box_mesh(
            Point3::new(3.0, 0.0, 0.0),
            Point3::new(4.0, 1.0, 1.0),
            Tag::Slab,
        ));
        let r = far.validate();
        assert!(r.is_valid());
        assert_eq!(r.components, 2);
    }

    #[test]
    fn weld_merges_duplicates() {
        let mut m = tetra();
        let extra = m.add_vertex(Point3::new(0.0, 0.0, 1.0 + 1e-13));
        m.triangles[1][2] = extra;
        assert!(!m.validate().closed);
        let w = m.weld(1e-9);
        assert_eq!(w.vertices.len(), 4);
        assert!(w.validate().is_valid());
    }
}
