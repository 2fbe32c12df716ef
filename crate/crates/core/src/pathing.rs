//! Defect spines: shortest paths through a tessellation's edge graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::rng::RandomStream;
use crate::scalar::Real;
use crate::tessellation::{Side, Tessellation};

/// Directed graph with two opposite arcs of equal Euclidean weight per edge.
#[derive(Clone, Debug)]
pub struct PathGraph<T> {
    pub vertices: Vec<Point2<T>>,
    /// `adjacency[u]` lists `(v, weight)` for every arc `u -> v`.
    pub adjacency: Vec<Vec<(usize, T)>>,
}

impl<T: Real> PathGraph<T> {
    /// Edges with zero length are dropped; weights stay strictly positive.
    pub fn from_edges(vertices: Vec<Point2<T>>, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for &(a, b) in edges {
            let w = vertices[a].dist(vertices[b]);
            if a != b && w > T::zero() {
                adjacency[a].push((b, w));
                adjacency[b].push((a, w));
            }
        }
        Self {
            vertices,
            adjacency,
        }
    }

    /// Graph over the cell-separating edges; window border edges are excluded.
    pub fn from_tessellation(t: &Tessellation<T>) -> Self {
        let edges: Vec<(usize, usize)> = t
            .edges
            .iter()
            .filter(|e| !e.on_border)
            .map(|e| (e.a, e.b))
            .collect();
        Self::from_edges(t.vertices.clone(), &edges)
    }

    pub fn arc_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }
}

/// Polyline spine `v_0..v_{k+1}`; arc `a_i` runs from `v_i` to `v_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path<T> {
    pub vertices: Vec<Point2<T>>,
    /// Graph vertex indices when the path came from a [`PathGraph`].
    pub vertex_ids: Vec<usize>,
}

impl<T: Real> Path<T> {
    pub fn from_points(vertices: Vec<Point2<T>>) -> Self {
        Self {
            vertices,
            vertex_ids: Vec::new(),
        }
    }

    /// Number of arcs `k + 1`.
    pub fn arc_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn arc(&self, i: usize) -> (Point2<T>, Point2<T>) {
        (self.vertices[i], self.vertices[i + 1])
    }

    pub fn length(&self) -> T {
        self.vertices
            .windows(2)
            .fold(T::zero(), |s, w| s + w[0].dist(w[1]))
    }

    pub fn is_simple(&self) -> bool {
        let mut ids = self.vertex_ids.clone();
        ids.sort_unstable();
        ids.windows(2).all(|w| w[0] != w[1])
    }

    /// Removes interior vertices of arcs shorter than `fraction` of the mean
    /// arc length, merging each short arc into its neighbours. Endpoints are
    /// always kept.
    pub fn filter_short_arcs(&self, fraction: T) -> Self {
        let k = self.arc_count();
        if k < 2 {
            return self.clone();
        }
        let mean = self.length() / T::lit(k as f64);
        let min_len = mean * fraction;
        let has_ids = self.vertex_ids.len() == self.vertices.len();
        let mut verts = vec![self.vertices[0]];
        let mut ids = if has_ids {
            vec![self.vertex_ids[0]]
        } else {
            Vec::new()
        };
        let last = self.vertices.len() - 1;
        for i in 1..last {
            let p = self.vertices[i];
            if p.dist(*verts.last().unwrap()) < min_len {
                continue;
            }
            verts.push(p);
            if has_ids {
                ids.push(self.vertex_ids[i]);
            }
        }
        // a short final arc merges into its predecessor
        if verts.len() >= 2 && verts.last().unwrap().dist(self.vertices[last]) < min_len {
            verts.pop();
            if has_ids {
                ids.pop();
            }
        }
        verts.push(self.vertices[last]);
        if has_ids {
            ids.push(self.vertex_ids[last]);
        }
        Self {
            vertices: verts,
            vertex_ids: ids,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry<T> {
    dist: T,
    vertex: usize,
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra shortest path; returns the path and its total weight.
pub fn shortest_path<T: Real>(g: &PathGraph<T>, start: usize, end: usize) -> Result<(Path<T>, T)> {
    let n = g.vertices.len();
    if start >= n || end >= n || start == end {
        return Err(Error::InvalidPath(format!(
            "endpoints {start} and {end} must be distinct vertices of a {n}-vertex graph"
        )));
    }
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start] = Some(T::zero());
    heap.push(Entry {
        dist: T::zero(),
        vertex: start,
    });
    while let Some(Entry { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == end {
            break;
        }
        for &(v, w) in &g.adjacency[u] {
            let nd = d + w;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                pred[v] = u;
                heap.push(Entry {
                    dist: nd,
                    vertex: v,
                });
            }
        }
    }
    let total = dist[end].ok_or(Error::Disconnected(start, end))?;
    let mut ids = vec![end];
    while *ids.last().unwrap() != start {
        ids.push(pred[*ids.last().unwrap()]);
    }
    ids.reverse();
    Ok((
        Path {
            vertices: ids.iter().map(|&i| g.vertices[i]).collect(),
            vertex_ids: ids,
        },
        total,
    ))
}

/// Marks the vertices of the connected component with the most vertices;
/// ties go to the component of the lowest vertex.
pub fn largest_component<T: Real>(g: &PathGraph<T>) -> Vec<bool> {
    let n = g.vertices.len();
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        if label[v] != usize::MAX {
            continue;
        }
        let k = sizes.len();
        let mut stack = vec![v];
        label[v] = k;
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &(w, _) in &g.adjacency[u] {
                if label[w] == usize::MAX {
                    label[w] = k;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    let best = (0..sizes.len()).fold(0, |b, k| if sizes[k] > sizes[b] { k } else { b });
    label.into_iter().map(|l| l == best).collect()
}

/// Start drawn uniformly from the left border vertices, end from the right,
/// both on the largest component of the cell-edge graph. Edges cutting off a
/// window corner form components of their own.
pub fn pick_endpoints<T: Real>(
    stream: &mut RandomStream,
    t: &Tessellation<T>,
) -> Result<(usize, usize)> {
    let main = largest_component(&PathGraph::from_tessellation(t));
    let on_main = |side: Side, name: &'static str| -> Result<Vec<usize>> {
        let v: Vec<usize> = t.boundary_vertices(side)?.into_iter().filter(|&v| main[v]).collect();
        if v.is_empty() {
            Err(Error::NoBoundaryVertex(name))
        } else {
            Ok(v)
        }
    };
    let left = on_main(Side::Left, "left")?;
    let right = on_main(Side::Right, "right")?;
    let s = left[stream.index(left.len())];
    let e = right[stream.index(right.len())];
    Ok((s, e))
}

/// Border-to-border minimal path through a tessellation.
pub fn spanning_path<T: Real>(
    stream: &mut RandomStream,
    t: &Tessellation<T>,
) -> Result<Path<T>> {
    let (s, e) = pick_endpoints(stream, t)?;
    let g = PathGraph::from_tessellation(t);
    Ok(shortest_path(&g, s, e)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Window;
    use crate::tessellation::build_voronoi;

    fn square_with_diagonal() -> PathGraph<f64> {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let mut g = PathGraph::from_edges(v, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        g.adjacency[0].push((2, 1.2));
        g.adjacency[2].push((0, 1.2));
        g
    }

    #[test]
    fn single_edge() {
        let g = PathGraph::from_edges(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], &[(0, 1)]);
        let (p, w) = shortest_path(&g, 0, 1).unwrap();
        assert_eq!(p.vertex_ids, vec![0, 1]);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn diagonal_beats_two_sides() {
        let (p, w) = shortest_path(&square_with_diagonal(), 0, 2).unwrap();
        assert_eq!(p.vertex_ids, vec![0, 2]);
        assert_eq!(w, 1.2);
    }

    #[test]
    fn disconnected_and_invalid() {
        let g = PathGraph::from_edges(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(5.0, 5.0)],
            &[(0, 1)],
        );
        assert_eq!(shortest_path(&g, 0, 2).unwrap_err(), Error::Disconnected(0, 2));
        assert!(matches!(shortest_path(&g, 1, 1), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn largest_component_marks_the_bigger_side() {
        let g = PathGraph::from_edges(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
                Point2::new(5.0, 5.0),
                Point2::new(6.0, 5.0),
            ],
            &[(0, 1), (1, 2), (3, 4)],
        );
        assert_eq!(largest_component(&g), vec![true, true, true, false, false]);
    }

    #[test]
    fn spanning_path_exists_for_many_seeds() {
        let w = Window::new(0.0, 10.0, 0.0, 5.0).unwrap();
        for seed in 0..60 {
            let mut s = RandomStream::new(seed);
            let t = build_voronoi(&mut s, &w, 1.0, 150).unwrap();
            assert!(spanning_path(&mut s, &t).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn spanning_path_hits_both_borders() {
        let w = Window::new(0.0, 10.0, 0.0, 5.0).unwrap();
        let mut s = RandomStream::new(42);
        let t = build_voronoi(&mut s, &w, 1.0, 1000).unwrap();
        let p = spanning_path(&mut s, &t).unwrap();
        assert_eq!(p.vertices[0].x, 0.0);
        assert_eq!(p.vertices.last().unwrap().x, 10.0);
        assert!(p.is_simple());
    }

    #[test]
    fn short_arc_filter_keeps_endpoints() {
        let p = Path::from_points(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0 + 1e-4, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(3.0, 0.0),
        ]);
        let f = p.filter_short_arcs(0.01);
        assert_eq!(f.vertices.len(), 4);
        assert_eq!(f.vertices[0], p.vertices[0]);
        assert_eq!(f.vertices.last(), p.vertices.last());
    }
}
