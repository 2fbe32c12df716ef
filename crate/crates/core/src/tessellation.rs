//! Bounded planar Voronoi tessellations.
//!
//! Each cell is built by clipping the window rectangle with the bisector
//! half-planes of nearby generators (bucketed on a uniform grid). Every
//! polygon edge remembers the constraint that produced it, so a vertex is
//! identified combinatorially by the three constraints meeting there. That
//! makes vertices shared between neighbouring cells exactly, without relying
//! on coordinate comparisons.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{vertex_centroid, Point2, Window};
use crate::rng::{uniform_points, RandomStream};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    /// Clipped polygon `C_i ∩ W`, counter-clockwise; empty if the cell misses W.
    pub polygon: Vec<Point2<T>>,
    /// Tessellation vertex index of every polygon corner.
    pub vertex_ids: Vec<usize>,
}

impl<T> Cell<T> {
    pub fn is_empty(&self) -> bool {
        self.polygon.len() < 3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TessEdge {
    pub a: usize,
    pub b: usize,
    /// Edge lies on the window boundary rather than between two cells.
    pub on_border: bool,
}

#[derive(Clone, Debug)]
pub struct Tessellation<T> {
    pub window: Window<T>,
    pub generators: Vec<Point2<T>>,
    pub cells: Vec<Cell<T>>,
    pub vertices: Vec<Point2<T>>,
    pub edges: Vec<TessEdge>,
    /// Vertex centroid `c_i` of each nonempty clipped cell.
    pub reference_points: Vec<Option<Point2<T>>>,
}

type Label = u32;

#[derive(Clone, Copy, Debug)]
struct LVert<T> {
    p: Point2<T>,
    /// label of the edge leaving this vertex
    out: Label,
}

/// Samples `n` generators uniformly in the `gamma`-dilated window and builds
/// their Voronoi tessellation clipped to `window`.
pub fn build_voronoi<T: Real>(
    stream: &mut RandomStream,
    window: &Window<T>,
    gamma: T,
    n: usize,
) -> Result<Tessellation<T>> {
    if n < 2 {
        return Err(Error::TooFewGenerators(n));
    }
    window.check()?;
    if !(gamma > T::zero()) {
        return Err(Error::params("gamma", "dilation margin must be positive"));
    }
    let dilated = window.dilate(gamma);
    let mut gens = uniform_points(stream, &dilated, n)?;
    // resample colliding generators; distinctness is required for bisectors
    let min_sep = T::lit(1e-12) * window.width();
    loop {
        let dup = first_collision(&gens, min_sep);
        match dup {
            Some(i) => gens[i] = uniform_points(stream, &dilated, 1)?[0],
            None => break,
        }
    }
    Tessellation::from_generators(gens, *window)
}

fn first_collision<T: Real>(gens: &[Point2<T>], min_sep: T) -> Option<usize> {
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by(|&a, &b| gens[a].x.partial_cmp(&gens[b].x).unwrap().then(a.cmp(&b)));
    for w in 0..order.len() {
        let i = order[w];
        for &j in &order[w + 1..] {
            if gens[j].x - gens[i].x > min_sep {
                break;
            }
            if gens[i].dist(gens[j]) <= min_sep {
                return Some(i.max(j));
            }
        }
    }
    None
}

struct Grid<T> {
    origin: Point2<T>,
    cell: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> Grid<T> {
    fn new(points: &[Point2<T>], window: &Window<T>) -> Self {
        let c = window.corners();
        let (mut lo, mut hi) = (c[0], c[2]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let (w, h) = (hi.x - lo.x, hi.y - lo.y);
        let cell = (w * h / T::lit(points.len() as f64)).sqrt();
        let nx = ((w / cell).ceil().as_f64() as usize).clamp(1, 4096);
        let ny = ((h / cell).ceil().as_f64() as usize).clamp(1, 4096);
        let cell = (w / T::lit(nx as f64)).max(h / T::lit(ny as f64));
        let mut g = Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (i, p) in points.iter().enumerate() {
            let (bx, by) = g.bucket(*p);
            g.buckets[by * nx + bx].push(i);
        }
        g
    }

    fn bucket(&self, p: Point2<T>) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor().as_f64();
        let fy = ((p.y - self.origin.y) / self.cell).floor().as_f64();
        (
            (fx.max(0.0) as usize).min(self.nx - 1),
            (fy.max(0.0) as usize).min(self.ny - 1),
        )
    }

    /// Indices in the buckets at Chebyshev ring `r` around bucket `(bx, by)`.
    fn ring(&self, bx: usize, by: usize, r: usize, out: &mut Vec<usize>) {
        out.clear();
        let (bx, by, r) = (bx as isize, by as isize, r as isize);
        for y in (by - r)..=(by + r) {
            if y < 0 || y >= self.ny as isize {
                continue;
            }
            for x in (bx - r)..=(bx + r) {
                if x < 0 || x >= self.nx as isize {
                    continue;
                }
                if (x - bx).abs() != r && (y - by).abs() != r {
                    continue;
                }
                out.extend_from_slice(&self.buckets[y as usize * self.nx + x as usize]);
            }
        }
    }

    fn max_ring(&self) -> usize {
        self.nx.max(self.ny)
    }
}

fn clip_halfplane<T: Real>(
    poly: &[LVert<T>],
    normal: Point2<T>,
    offset: T,
    label: Label,
    tol: T,
) -> Vec<LVert<T>> {
    // keep { x : normal . x <= offset }
    let n = poly.len();
    let mut out: Vec<LVert<T>> = Vec::with_capacity(n + 2);
    let f = |p: Point2<T>| normal.dot(p) - offset;
    for k in 0..n {
        let cur = poly[k];
        let nxt = poly[(k + 1) % n];
        let (fc, fnx) = (f(cur.p), f(nxt.p));
        if fc <= T::zero() {
            out.push(cur);
            if fnx > T::zero() {
                let t = fc / (fc - fnx);
                out.push(LVert {
                    p: cur.p.lerp(nxt.p, t),
                    out: label,
                });
            }
        } else if fnx <= T::zero() {
            let t = fc / (fc - fnx);
            out.push(LVert {
                p: cur.p.lerp(nxt.p, t),
                out: cur.out,
            });
        }
    }
    dedup_ring(out, tol)
}

/// Drops zero-length edges; the surviving vertex takes the later edge label.
fn dedup_ring<T: Real>(mut v: Vec<LVert<T>>, tol: T) -> Vec<LVert<T>> {
    let mut k = 0;
    while v.len() >= 2 && k < v.len() {
        let nxt = (k + 1) % v.len();
        if v[k].p.dist(v[nxt].p) <= tol {
            let lab = v[nxt].out;
            v[k].out = lab;
            v.remove(nxt);
            if nxt < k {
                k -= 1;
            }
        } else {
            k += 1;
        }
    }
    if v.len() < 3 {
        v.clear();
    }
    v
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

impl<T: Real> Tessellation<T> {
    /// Tessellation of fixed, pairwise distinct generators clipped to `window`.
    pub fn from_generators(generators: Vec<Point2<T>>, window: Window<T>) -> Result<Self> {
        let n = generators.len();
        if n < 2 {
            return Err(Error::TooFewGenerators(n));
        }
        window.check()?;
        let tol = T::lit(1e-10) * window.diagonal();
        let border = |s: u32| n as u32 + s;
        let corners = window.corners();
        let win_poly: Vec<LVert<T>> = (0..4)
            .map(|s| LVert {
                p: corners[s],
                out: border(s as u32),
            })
            .collect();

        let grid = Grid::new(&generators, &window);
        let mut ring = Vec::new();
        let mut labelled: Vec<Vec<LVert<T>>> = Vec::with_capacity(n);
        for (i, &pi) in generators.iter().enumerate() {
            let mut poly = win_poly.clone();
            let (bx, by) = grid.bucket(pi);
            for r in 0..=grid.max_ring() {
                if poly.is_empty() {
                    break;
                }
                let reach = poly.iter().fold(T::zero(), |m, v| m.max(v.p.dist(pi)));
                if r > 1 && T::lit((r - 1) as f64) * grid.cell > reach * T::two() {
                    break;
                }
                grid.ring(bx, by, r, &mut ring);
                for &j in &ring {
                    if j == i {
                        continue;
                    }
                    let pj = generators[j];
                    let d = pj - pi;
                    let mid = (pi + pj) * T::half();
                    if d.norm() > reach * T::two() {
                        continue;
                    }
                    poly = clip_halfplane(&poly, d, d.dot(mid), j as u32, tol);
                    if poly.is_empty() {
                        break;
                    }
                }
            }
            labelled.push(poly);
        }

        // vertices keyed by the sorted constraint triple
        let mut key_to_vid: HashMap<[u32; 3], usize> = HashMap::new();
        let mut vertices: Vec<Point2<T>> = Vec::new();
        let mut raw_ids: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, poly) in labelled.iter().enumerate() {
            let m = poly.len();
            let mut ids = Vec::with_capacity(m);
            for k in 0..m {
                let inc = poly[(k + m - 1) % m].out;
                let out = poly[k].out;
                let mut key = [i as u32, inc, out];
                key.sort_unstable();
                let vid = *key_to_vid.entry(key).or_insert_with(|| {
                    vertices.push(snap_to_border(poly[k].p, inc, out, n as u32, &window));
                    vertices.len() - 1
                });
                ids.push(vid);
            }
            raw_ids.push(ids);
        }

        // weld numerically coincident vertices (near-degenerate vertex configurations)
        let mut uf = UnionFind((0..vertices.len()).collect());
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| {
            vertices[a]
                .x
                .partial_cmp(&vertices[b].x)
                .unwrap()
                .then(a.cmp(&b))
        });
        for w in 0..order.len() {
            for &o in &order[w + 1..] {
                if vertices[o].x - vertices[order[w]].x > tol {
                    break;
                }
                if vertices[o].dist(vertices[order[w]]) <= tol {
                    uf.union(order[w], o);
                }
            }
        }
        let mut remap = vec![usize::MAX; vertices.len()];
        let mut welded = Vec::new();
        for v in 0..vertices.len() {
            let r = uf.find(v);
            if remap[r] == usize::MAX {
                remap[r] = welded.len();
                welded.push(vertices[r]);
            }
            remap[v] = remap[r];
        }

        let mut cells = Vec::with_capacity(n);
        let mut edge_set: HashMap<(usize, usize), bool> = HashMap::new();
        let mut edge_order: Vec<(usize, usize)> = Vec::new();
        for (i, poly) in labelled.iter().enumerate() {
            let mut ids: Vec<usize> = raw_ids[i].iter().map(|&v| remap[v]).collect();
            let mut labels: Vec<u32> = poly.iter().map(|v| v.out).collect();
            // remove consecutive duplicates introduced by welding
            let mut k = 0;
            while ids.len() > 1 && k < ids.len() {
                let nx = (k + 1) % ids.len();
                if ids[k] == ids[nx] {
                    labels[k] = labels[nx];
                    ids.remove(nx);
                    labels.remove(nx);
                    if nx < k {
                        k -= 1;
                    }
                } else {
                    k += 1;
                }
            }
            if ids.len() < 3 {
                cells.push(Cell {
                    polygon: Vec::new(),
                    vertex_ids: Vec::new(),
                });
                continue;
            }
            let m = ids.len();
            for k in 0..m {
                let (a, b) = (ids[k], ids[(k + 1) % m]);
                let key = (a.min(b), a.max(b));
                let on_border = labels[k] >= n as u32;
                match edge_set.get_mut(&key) {
                    Some(flag) => *flag = *flag && on_border,
                    None => {
                        edge_set.insert(key, on_border);
                        edge_order.push(key);
                    }
                }
            }
            cells.push(Cell {
                polygon: ids.iter().map(|&v| welded[v]).collect(),
                vertex_ids: ids,
            });
        }
        let edges = edge_order
            .into_iter()
            .map(|(a, b)| TessEdge {
                a,
                b,
                on_border: edge_set[&(a, b)],
            })
            .collect();
        let reference_points = cells
            .iter()
            .map(|c| (!c.is_empty()).then(|| vertex_centroid(&c.polygon)))
            .collect();
        Ok(Self {
            window,
            generators,
            cells,
            vertices: welded,
            edges,
            reference_points,
        })
    }

    /// Number of nonempty clipped cells.
    pub fn nonempty_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    /// Index of the nearest generator; ties go to the lowest index.
    pub fn nearest_generator(&self, p: Point2<T>) -> usize {
        let mut best = 0;
        let mut bd = p.dist(self.generators[0]);
        for (i, g) in self.generators.iter().enumerate().skip(1) {
            let d = p.dist(*g);
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    /// Vertex degree counting only edges between two cells.
    pub fn interior_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in self.edges.iter().filter(|e| !e.on_border) {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        deg
    }

    /// Vertices where cell-separating edges meet the left or right window
    /// border, sorted by index.
    pub fn boundary_vertices(&self, side: Side) -> Result<Vec<usize>> {
        let x = match side {
            Side::Left => self.window.w0min,
            Side::Right => self.window.w0max,
        };
        let deg = self.interior_degree();
        let out: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| self.vertices[v].x == x && deg[v] > 0)
            .collect();
        if out.is_empty() {
            return Err(Error::NoBoundaryVertex(match side {
                Side::Left => "left",
                Side::Right => "right",
            }));
        }
        Ok(out)
    }
}

/// Pins vertices created on the window edges exactly onto the border lines.
fn snap_to_border<T: Real>(p: Point2<T>, a: u32, b: u32, n: u32, w: &Window<T>) -> Point2<T> {
    let mut q = p;
    for lab in [a, b] {
        if lab >= n {
            match lab - n {
                0 => q.y = w.w1min,
                1 => q.x = w.w0max,
                2 => q.y = w.w1max,
                _ => q.x = w.w0min,
            }
        }
    }
    q
}
