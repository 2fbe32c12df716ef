use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{line_intersection, ray_exit_convex, Point2};

/// Distance from the center relative to the center-to-border distance along
/// the same ray: 0 at the center, 1 on the border of the convex `polygon`,
/// above 1 outside it.
pub fn relative_distance(p: Point2<f64>, polygon: &[Point2<f64>], center: Point2<f64>) -> f64 {
    let dir = p - center;
    if dir.norm() == 0.0 {
        return 0.0;
    }
    // the border point is center + t dir, so the ratio is 1 / t
    match ray_exit_convex(center, dir, polygon) {
        Some(t) if t > 0.0 => 1.0 / t,
        _ => f64::INFINITY,
    }
}

/// Cosine bump of peak `peak` at `center`, vanishing on the border of the
/// convex `polygon`.
pub fn texture_height(v: Point2<f64>, polygon: &[Point2<f64>], center: Point2<f64>, peak: f64) -> f64 {
    let rho = relative_distance(v, polygon, center).min(1.0);
    peak * 0.5 * ((PI * rho).cos() + 1.0)
}

/// Boundary loops of a triangulated region, each following the counter-clockwise
/// triangles so the region lies on the left.
pub fn contour_loops(triangles: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for (&(a, b), &n) in &directed {
        if n != 1 {
            return Err(Error::InvalidContour(format!("edge {a}-{b} is used {n} times")));
        }
        if directed.contains_key(&(b, a)) {
            continue;
        }
        if next.insert(a, b).is_some() {
            return Err(Error::InvalidContour(format!("region pinches at vertex {a}")));
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut done: HashMap<usize, bool> = HashMap::new();
    let mut loops = Vec::new();
    for s in starts {
        if done.contains_key(&s) {
            continue;
        }
        let mut lp = vec![s];
        done.insert(s, true);
        let mut v = next[&s];
        while v != s {
            if done.insert(v, true).is_some() {
                return Err(Error::InvalidContour("boundary does not close".into()));
            }
            lp.push(v);
            v = *next
                .get(&v)
                .ok_or_else(|| Error::InvalidContour("boundary does not close".into()))?;
        }
        loops.push(lp);
    }
    Ok(loops)
}

/// Height components of every vertex of a piece.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellHeights {
    pub dist_rel: Vec<f64>,
    /// Threshold in force at each vertex.
    pub threshold: Vec<f64>,
    pub elevation: Vec<f64>,
    pub texture: Vec<f64>,
}

impl CellHeights {
    pub fn lower(&self, h: f64) -> Vec<f64> {
        self.elevation.iter().map(|e| h + e).collect()
    }

    pub fn total(&self, h: f64) -> Vec<f64> {
        self.elevation
            .iter()
            .zip(&self.texture)
            .map(|(e, t)| h + e + t)
            .collect()
    }
}

/// Contour values along a ray from the coarse center: the first crossing at or
/// beyond the vertex, else the farthest one. Returns `(t, elevation, threshold)`
/// with `t` relative to the vertex offset.
fn contour_hit(
    center: Point2<f64>,
    v: Point2<f64>,
    points: &[Point2<f64>],
    loops: &[Vec<usize>],
    peak: &HashMap<usize, (f64, f64)>,
) -> Option<(f64, f64, f64)> {
    let dir = v - center;
    let mut beyond: Option<(f64, f64, f64)> = None;
    let mut farthest: Option<(f64, f64, f64)> = None;
    for lp in loops {
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            let (pa, pb) = (points[a], points[b]);
            let Some((t, s)) = line_intersection(center, dir, pa, pb - pa) else {
                continue;
            };
            if !(t > 0.0) || !(-1e-12..=1.0 + 1e-12).contains(&s) {
                continue;
            }
            let s = s.clamp(0.0, 1.0);
            let (ea, da) = peak[&a];
            let (eb, db) = peak[&b];
            let hit = (t, ea + s * (eb - ea), da + s * (db - da));
            if t >= 1.0 - 1e-12 && beyond.is_none_or(|h| t < h.0) {
                beyond = Some(hit);
            }
            if farthest.is_none_or(|h| t > h.0) {
                farthest = Some(hit);
            }
        }
    }
    beyond.or(farthest)
}

/// Elevation of every vertex: zero while the relative distance to the coarse
/// border stays at or below the threshold, the contour peak on the contour,
/// and linear along the center ray in between.
pub fn elevation_field(
    points: &[Point2<f64>],
    loops: &[Vec<usize>],
    coarse_polygon: &[Point2<f64>],
    center: Point2<f64>,
    peak: &HashMap<usize, (f64, f64)>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = points.len();
    let (mut rel, mut thr, mut elev) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, &v) in points.iter().enumerate() {
        let rho = relative_distance(v, coarse_polygon, center);
        let (rho_q, e_q, d_q) = if let Some(&(e, d)) = peak.get(&i) {
            (rho, e, d)
        } else if rho == 0.0 {
            // the center itself never rises; any threshold holds there
            let d = peak.values().map(|p| p.1).fold(f64::INFINITY, f64::min);
            (0.0, 0.0, d)
        } else {
            let (t, e, d) = contour_hit(center, v, points, loops, peak)
                .ok_or_else(|| Error::InvalidContour(format!("no contour along the ray to vertex {i}")))?;
            (t * rho, e, d)
        };
        rel[i] = rho;
        thr[i] = d_q;
        elev[i] = if rho <= d_q {
            0.0
        } else if rho_q > d_q {
            e_q * ((rho - d_q) / (rho_q - d_q)).min(1.0)
        } else {
            e_q
        };
    }
    Ok((rel, thr, elev))
}
