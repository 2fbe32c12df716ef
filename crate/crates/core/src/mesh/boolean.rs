//! Boolean union and difference of closed triangle meshes.
//!
//! The second operand is translated by a tiny generic offset so that the two
//! surfaces meet transversally (coplanar faces are common in defect meshes,
//! which all touch the plane `z = h`). Edge-face crossings are decided with
//! exact orientation predicates; any exactly-zero predicate means the offset
//! was not generic enough and the operation is retried with another one.
//! Crossed triangles are re-triangulated with the intersection segments as
//! constraints, the pieces are grouped into patches bounded by intersection
//! curves, and each patch is kept or dropped according to the generalized
//! winding number of the other mesh at a patch point.

use std::collections::{HashMap, HashSet};

use spade::{ConstrainedDelaunayTriangulation, Point2 as SPoint, Triangulation};

use super::intersect::{dominant_axis, o3, proj, V3};
use super::{SurfaceMesh, Tag};
use crate::error::{Error, Result};
use crate::geom::Point3;

type Mesh = SurfaceMesh<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Difference,
}

const ATTEMPTS: usize = 8;

/// `a ∪ b` or `a ∖ b`. The offset applied to `b` may point in any direction.
pub fn boolean(a: &Mesh, b: &Mesh, op: BooleanOp) -> Result<Mesh> {
    boolean_biased(a, b, op, 0.0)
}

/// Like [`boolean`], with the sign of the z component of the offset applied
/// to `b` fixed by `z_bias` (zero leaves it free).
pub fn boolean_biased(a: &Mesh, b: &Mesh, op: BooleanOp, z_bias: f64) -> Result<Mesh> {
    if b.is_empty() {
        return Ok(a.clone());
    }
    if a.is_empty() {
        return Ok(match op {
            BooleanOp::Union => b.clone(),
            BooleanOp::Difference => Mesh::new(),
        });
    }
    let (alo, ahi) = a.bounds().unwrap();
    let (blo, bhi) = b.bounds().unwrap();
    let disjoint = ahi.x < blo.x
        || bhi.x < alo.x
        || ahi.y < blo.y
        || bhi.y < alo.y
        || ahi.z < blo.z
        || bhi.z < alo.z;
    if disjoint {
        return Ok(match op {
            BooleanOp::Union => {
                let mut m = a.clone();
                m.append(b);
                m
            }
            BooleanOp::Difference => a.clone(),
        });
    }
    let lo = Point3::new(alo.x.min(blo.x), alo.y.min(blo.y), alo.z.min(blo.z));
    let hi = Point3::new(ahi.x.max(bhi.x), ahi.y.max(bhi.y), ahi.z.max(bhi.z));
    let diag = lo.dist(hi);
    let max_vol = a
        .signed_volume()?
        .abs()
        .max(b.signed_volume()?.abs());
    let mut last = String::new();
    for attempt in 0..ATTEMPTS {
        let offset = perturbation(attempt, z_bias) * (1e-7 * diag * (1 + attempt) as f64);
        let bt = b.clone().translated(offset);
        match attempt_boolean(a, &bt, op, diag, max_vol) {
            Ok(m) => return Ok(m),
            Err(e) => last = e,
        }
    }
    Err(Error::Boolean(format!(
        "no consistent result after {ATTEMPTS} perturbations; last failure: {last}"
    )))
}

fn perturbation(attempt: usize, z_bias: f64) -> Point3<f64> {
    // low-discrepancy directions away from the coordinate planes
    let phi = std::f64::consts::TAU * ((attempt as f64 * 0.618_033_988_75 + 0.137) % 1.0);
    let z = 0.55 + 0.3 * ((attempt as f64 * 0.414_213_562_37 + 0.29) % 1.0);
    let z = if z_bias > 0.0 {
        z
    } else if z_bias < 0.0 {
        -z
    } else if attempt.is_multiple_of(2) {
        z
    } else {
        -z
    };
    let r = (1.0 - z * z).sqrt();
    Point3::new(r * phi.cos(), r * phi.sin(), z)
}

struct Degenerate;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Which {
    A,
    B,
}

/// Crossing point of an edge of one mesh with a face of the other.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct CrossKey {
    which: Which,
    edge: (usize, usize),
    face: usize,
}

struct Ctx<'m> {
    meshes: [&'m Mesh; 2],
    pts: Vec<V3>,
    /// offset of mesh B's vertices in `pts`
    b_off: usize,
    cross: HashMap<CrossKey, Option<usize>>,
}

fn to_v3(p: Point3<f64>) -> V3 {
    [p.x, p.y, p.z]
}

impl<'m> Ctx<'m> {
    fn mesh(&self, w: Which) -> &'m Mesh {
        match w {
            Which::A => self.meshes[0],
            Which::B => self.meshes[1],
        }
    }

    fn gid(&self, w: Which, v: usize) -> usize {
        match w {
            Which::A => v,
            Which::B => v + self.b_off,
        }
    }

    fn crossing(&mut self, key: CrossKey) -> Result<Option<usize>, Degenerate> {
        if let Some(&r) = self.cross.get(&key) {
            return Ok(r);
        }
        let other = match key.which {
            Which::A => Which::B,
            Which::B => Which::A,
        };
        let p = self.pts[self.gid(key.which, key.edge.0)];
        let q = self.pts[self.gid(key.which, key.edge.1)];
        let t = self.mesh(other).triangles[key.face].map(|v| self.pts[self.gid(other, v)]);
        let s1 = o3(t[0], t[1], t[2], p);
        let s2 = o3(t[0], t[1], t[2], q);
        if s1 == 0.0 || s2 == 0.0 {
            return Err(Degenerate);
        }
        let mut res = None;
        if (s1 > 0.0) != (s2 > 0.0) {
            let e = [o3(p, q, t[0], t[1]), o3(p, q, t[1], t[2]), o3(p, q, t[2], t[0])];
            if e.contains(&0.0) {
                return Err(Degenerate);
            }
            if e.iter().all(|&x| x > 0.0) || e.iter().all(|&x| x < 0.0) {
                let f = s1 / (s1 - s2);
                self.pts.push([
                    p[0] + (q[0] - p[0]) * f,
                    p[1] + (q[1] - p[1]) * f,
                    p[2] + (q[2] - p[2]) * f,
                ]);
                res = Some(self.pts.len() - 1);
            }
        }
        self.cross.insert(key, res);
        Ok(res)
    }
}

fn edges_of(t: [usize; 3]) -> [(usize, usize); 3] {
    let e = |a: usize, b: usize| (a.min(b), a.max(b));
    [e(t[0], t[1]), e(t[1], t[2]), e(t[2], t[0])]
}

fn tri_box(m: &Mesh, t: usize) -> (V3, V3) {
    let tr = m.triangles[t];
    let mut lo = to_v3(m.vertices[tr[0]]);
    let mut hi = lo;
    for &v in &tr[1..] {
        let p = to_v3(m.vertices[v]);
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Candidate face pairs with overlapping bounding boxes.
fn candidate_pairs(a: &Mesh, b: &Mesh) -> Vec<(usize, usize)> {
    let bb: Vec<(V3, V3)> = (0..b.triangles.len()).map(|t| tri_box(b, t)).collect();
    let ab: Vec<(V3, V3)> = (0..a.triangles.len()).map(|t| tri_box(a, t)).collect();
    let mean = bb
        .iter()
        .map(|(l, h)| (h[0] - l[0]).max(h[1] - l[1]).max(h[2] - l[2]))
        .sum::<f64>()
        / bb.len() as f64;
    let cell = mean.max(1e-12);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (t, (l, h)) in bb.iter().enumerate() {
        let span = (key(h[0]) - key(l[0]) + 1) * (key(h[1]) - key(l[1]) + 1) * (key(h[2]) - key(l[2]) + 1);
        if span > 4096 {
            // very large faces are checked against everything
            grid.entry((i64::MIN, 0, 0)).or_default().push(t);
            continue;
        }
        for i in key(l[0])..=key(h[0]) {
            for j in key(l[1])..=key(h[1]) {
                for k in key(l[2])..=key(h[2]) {
                    grid.entry((i, j, k)).or_default().push(t);
                }
            }
        }
    }
    let big = grid.get(&(i64::MIN, 0, 0)).cloned().unwrap_or_default();
    let mut stamp = vec![usize::MAX; b.triangles.len()];
    let mut out = Vec::new();
    let overlap = |x: &(V3, V3), y: &(V3, V3)| (0..3).all(|k| x.0[k] <= y.1[k] && y.0[k] <= x.1[k]);
    for (ta, abox) in ab.iter().enumerate() {
        let (l, h) = abox;
        let mut consider = |tb: usize, out: &mut Vec<(usize, usize)>| {
            if stamp[tb] != ta {
                stamp[tb] = ta;
                if overlap(abox, &bb[tb]) {
                    out.push((ta, tb));
                }
            }
        };
        for &tb in &big {
            consider(tb, &mut out);
        }
        let span = (key(h[0]) - key(l[0]) + 1) * (key(h[1]) - key(l[1]) + 1) * (key(h[2]) - key(l[2]) + 1);
        if span > 4096 {
            for tb in 0..b.triangles.len() {
                consider(tb, &mut out);
            }
            continue;
        }
        for i in key(l[0])..=key(h[0]) {
            for j in key(l[1])..=key(h[1]) {
                for k in key(l[2])..=key(h[2]) {
                    if let Some(list) = grid.get(&(i, j, k)) {
                        for &tb in list {
                            consider(tb, &mut out);
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

#[derive(Default)]
struct Cut {
    /// intersection points on each of the three edges
    on_edge: [Vec<usize>; 3],
    interior: Vec<usize>,
    segments: Vec<(usize, usize)>,
}

fn attempt_boolean(a: &Mesh, b: &Mesh, op: BooleanOp, diag: f64, max_vol: f64) -> Result<Mesh, String> {
    let mut pts: Vec<V3> = a.vertices.iter().map(|&p| to_v3(p)).collect();
    let b_off = pts.len();
    pts.extend(b.vertices.iter().map(|&p| to_v3(p)));
    let mut ctx = Ctx {
        meshes: [a, b],
        pts,
        b_off,
        cross: HashMap::new(),
    };
    let mut cuts_a: HashMap<usize, Cut> = HashMap::new();
    let mut cuts_b: HashMap<usize, Cut> = HashMap::new();
    for (ta, tb) in candidate_pairs(a, b) {
        let tra = a.triangles[ta];
        let trb = b.triangles[tb];
        let mut found: Vec<(usize, Which, usize)> = Vec::new();
        for (k, e) in edges_of(tra).into_iter().enumerate() {
            let key = CrossKey { which: Which::A, edge: e, face: tb };
            if let Some(p) = ctx.crossing(key).map_err(|_| "degenerate crossing".to_string())? {
                found.push((p, Which::A, k));
            }
        }
        for (k, e) in edges_of(trb).into_iter().enumerate() {
            let key = CrossKey { which: Which::B, edge: e, face: ta };
            if let Some(p) = ctx.crossing(key).map_err(|_| "degenerate crossing".to_string())? {
                found.push((p, Which::B, k));
            }
        }
        match found.len() {
            0 => continue,
            2 => {}
            n => return Err(format!("face pair ({ta}, {tb}) meets in {n} crossing points")),
        }
        let seg = (found[0].0, found[1].0);
        let ca = cuts_a.entry(ta).or_default();
        let cb = cuts_b.entry(tb).or_default();
        for &(p, w, k) in &found {
            match w {
                Which::A => {
                    ca.on_edge[k].push(p);
                    cb.interior.push(p);
                }
                Which::B => {
                    cb.on_edge[k].push(p);
                    ca.interior.push(p);
                }
            }
        }
        ca.segments.push(seg);
        cb.segments.push(seg);
    }

    let mut constraint_edges: HashSet<(usize, usize)> = HashSet::new();
    let pieces_a = refine(&ctx, Which::A, &mut cuts_a, &mut constraint_edges)?;
    let pieces_b = refine(&ctx, Which::B, &mut cuts_b, &mut constraint_edges)?;

    let keep_inside_b = false;
    let a_parts = select(&ctx.pts, &pieces_a, &constraint_edges, b, keep_inside_b);
    let b_parts = select(&ctx.pts, &pieces_b, &constraint_edges, a, op == BooleanOp::Difference);

    let mut out = Mesh::new();
    out.vertices = ctx.pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
    for (t, tag) in a_parts {
        out.add_triangle(t, tag);
    }
    for (t, tag) in b_parts {
        let t = if op == BooleanOp::Difference { [t[0], t[2], t[1]] } else { t };
        out.add_triangle(t, tag);
    }
    let out = out.weld(1e-9 * diag);
    let out = drop_tiny_components(out, 1e-5 * max_vol);
    if out.is_empty() {
        return Ok(out);
    }
    let report = out.validate();
    if !(report.closed && report.oriented && report.self_intersections == 0 && report.min_area > 0.0) {
        return Err(format!("result failed validation: {}", report.failure_summary()));
    }
    Ok(out)
}

type Piece = ([usize; 3], Tag);

/// Re-triangulates every cut face; uncut faces pass through unchanged.
fn refine(
    ctx: &Ctx,
    w: Which,
    cuts: &mut HashMap<usize, Cut>,
    constraints: &mut HashSet<(usize, usize)>,
) -> Result<Vec<Piece>, String> {
    let m = ctx.mesh(w);
    let mut out = Vec::with_capacity(m.triangles.len());
    for (t, (&tri, &tag)) in m.triangles.iter().zip(&m.tags).enumerate() {
        let g = tri.map(|v| ctx.gid(w, v));
        let Some(cut) = cuts.get_mut(&t) else {
            out.push((g, tag));
            continue;
        };
        // points on edge k belong to the edge (tri[k], tri[k+1]) in edges_of order
        let corner = g.map(|v| ctx.pts[v]);
        let ax = dominant_axis(corner[0], corner[1], corner[2]);
        let flip = {
            let (p0, p1, p2) = (proj(corner[0], ax), proj(corner[1], ax), proj(corner[2], ax));
            robust::orient2d(p0, p1, p2) < 0.0
        };
        let mut cdt: ConstrainedDelaunayTriangulation<SPoint<f64>> = ConstrainedDelaunayTriangulation::new();
        let mut handle_to_gid: Vec<usize> = Vec::new();
        let mut gid_to_handle: HashMap<usize, spade::handles::FixedVertexHandle> = HashMap::new();
        let mut edge_of: HashMap<usize, usize> = HashMap::new();
        let mut all: Vec<(usize, Option<usize>)> = g.iter().map(|&v| (v, None)).collect();
        for k in 0..3 {
            cut.on_edge[k].sort_unstable();
            cut.on_edge[k].dedup();
            for &p in &cut.on_edge[k] {
                all.push((p, Some(k)));
            }
        }
        cut.interior.sort_unstable();
        cut.interior.dedup();
        all.extend(cut.interior.iter().map(|&p| (p, None)));
        for (v, e) in all {
            if gid_to_handle.contains_key(&v) {
                continue;
            }
            let c = proj(ctx.pts[v], ax);
            let h = cdt
                .insert(SPoint::new(c.x, c.y))
                .map_err(|e| format!("triangulation insert failed: {e:?}"))?;
            if h.index() != handle_to_gid.len() {
                return Err("coincident points in a cut face".into());
            }
            handle_to_gid.push(v);
            gid_to_handle.insert(v, h);
            if let Some(k) = e {
                edge_of.insert(v, k);
            }
        }
        for &(p, q) in &cut.segments {
            let (hp, hq) = (gid_to_handle[&p], gid_to_handle[&q]);
            if hp == hq {
                continue;
            }
            if !cdt.can_add_constraint(hp, hq) {
                return Err("intersection segments cross inside a face".into());
            }
            cdt.add_constraint(hp, hq);
        }
        for e in cdt.undirected_edges() {
            if e.is_constraint_edge() {
                let [x, y] = e.vertices().map(|v| handle_to_gid[v.fix().index()]);
                constraints.insert((x.min(y), x.max(y)));
            }
        }
        // which original edge a vertex lies on: corners lie on two
        let on_edge = |v: usize, k: usize| -> bool {
            if v == g[k] || v == g[(k + 1) % 3] {
                return true;
            }
            edge_of.get(&v) == Some(&k)
        };
        for f in cdt.inner_faces() {
            let vs = f.vertices().map(|v| handle_to_gid[v.fix().index()]);
            if (0..3).any(|k| vs.iter().all(|&v| on_edge(v, k))) {
                continue;
            }
            let tri = if flip { [vs[0], vs[2], vs[1]] } else { vs };
            out.push((tri, tag));
        }
    }
    Ok(out)
}

/// Keeps the patches (bounded by constraint edges) that lie inside or
/// outside `other`.
fn select(
    pts: &[V3],
    pieces: &[Piece],
    constraints: &HashSet<(usize, usize)>,
    other: &Mesh,
    keep_inside: bool,
) -> Vec<Piece> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, (t, _)) in pieces.iter().enumerate() {
        for e in edges_of(*t) {
            by_edge.entry(e).or_default().push(i);
        }
    }
    let mut comp = vec![usize::MAX; pieces.len()];
    let mut keep = Vec::new();
    for s in 0..pieces.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = keep.len();
        comp[s] = id;
        let mut list = vec![s];
        let mut k = 0;
        while k < list.len() {
            let t = list[k];
            k += 1;
            for e in edges_of(pieces[t].0) {
                if constraints.contains(&e) {
                    continue;
                }
                for &u in &by_edge[&e] {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        list.push(u);
                    }
                }
            }
        }
        let area = |t: usize| {
            let [a, b, c] = pieces[t].0.map(|v| pts[v]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
        };
        let best = *list
            .iter()
            .max_by(|&&x, &&y| area(x).partial_cmp(&area(y)).unwrap())
            .unwrap();
        let [a, b, c] = pieces[best].0.map(|v| pts[v]);
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ];
        let inside = winding_number(other, centroid) > 0.5;
        keep.push(inside == keep_inside);
    }
    pieces
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[comp[*i]])
        .map(|(_, p)| *p)
        .collect()
}

/// Generalized winding number of a closed mesh around `p`.
pub fn winding_number(m: &Mesh, p: V3) -> f64 {
    let mut total = 0.0;
    for t in &m.triangles {
        let [a, b, c] = t.map(|v| {
            let q = m.vertices[v];
            [q.x - p[0], q.y - p[1], q.z - p[2]]
        });
        let la = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let lb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        let lc = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
        let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let den = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
        total += 2.0 * det.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}

fn drop_tiny_components(m: Mesh, min_vol: f64) -> Mesh {
    let comps = m.components();
    if comps.len() <= 1 && !comps.is_empty() {
        let v = m.signed_volume().map(f64::abs).unwrap_or(f64::INFINITY);
        return if v < min_vol { Mesh::new() } else { m };
    }
    let mut out = Mesh::new();
    out.vertices = m.vertices.clone();
    for c in comps {
        let mut part = Mesh::new();
        part.vertices = m.vertices.clone();
        for &t in &c {
            part.add_triangle(m.triangles[t], m.tags[t]);
        }
        let v = part.signed_volume().map(f64::abs).unwrap_or(f64::INFINITY);
        if v >= min_vol {
            for &t in &c {
                out.add_triangle(m.triangles[t], m.tags[t]);
            }
        }
    }
    // re-index to the vertices still in use
    out.weld(0.0)
}
