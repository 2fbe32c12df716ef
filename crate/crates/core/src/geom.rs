//! Small fixed-size vector types and planar polygon helpers.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

pub type Vec2<T> = Point2<T>;

impl<T: Real> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by 90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    #[inline]
    pub fn mirror_y(self) -> Self {
        Self::new(self.x, -self.y)
    }

    pub fn cast<U: Real>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Point2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Vec3<T> = Point3<T>;

impl<T: Real> Point3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn from_xy(p: Point2<T>, z: T) -> Self {
        Self::new(p.x, p.y, z)
    }

    #[inline]
    pub fn xy(self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn component(self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn cast<U: Real>(self) -> Point3<U> {
        Point3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Add for Point3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Point3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Point3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Axis-aligned rectangle `[w0min, w0max] x [w1min, w1max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window<T> {
    pub w0min: T,
    pub w0max: T,
    pub w1min: T,
    pub w1max: T,
}

impl<T: Real> Window<T> {
    pub fn new(w0min: T, w0max: T, w1min: T, w1max: T) -> Result<Self> {
        let w = Self {
            w0min,
            w0max,
            w1min,
            w1max,
        };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.w0min, self.w0max, self.w1min, self.w1max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.w0min < self.w0max) || !(self.w1min < self.w1max) {
            return Err(Error::InvalidRegion(format!(
                "window [{}, {}] x [{}, {}] has no interior",
                self.w0min, self.w0max, self.w1min, self.w1max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.w0max - self.w0min
    }

    pub fn height(&self) -> T {
        self.w1max - self.w1min
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> T {
        (self.width() * self.width() + self.height() * self.height()).sqrt()
    }

    pub fn dilate(&self, gamma: T) -> Self {
        Self {
            w0min: self.w0min - gamma,
            w0max: self.w0max + gamma,
            w1min: self.w1min - gamma,
            w1max: self.w1max + gamma,
        }
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.w0min && p.x <= self.w0max && p.y >= self.w1min && p.y <= self.w1max
    }

    /// Corners in counter-clockwise order starting at the lower left.
    pub fn corners(&self) -> [Point2<T>; 4] {
        [
            Point2::new(self.w0min, self.w1min),
            Point2::new(self.w0max, self.w1min),
            Point2::new(self.w0max, self.w1max),
            Point2::new(self.w0min, self.w1max),
        ]
    }
}

/// Shoelace signed area, positive for counter-clockwise polygons.
pub fn signed_area<T: Real>(poly: &[Point2<T>]) -> T {
    let n = poly.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    acc * T::half()
}

pub fn polygon_area<T: Real>(poly: &[Point2<T>]) -> T {
    signed_area(poly).abs()
}

/// Mean of the polygon vertices (not the area centroid).
pub fn vertex_centroid<T: Real>(poly: &[Point2<T>]) -> Point2<T> {
    let mut c = Point2::new(T::zero(), T::zero());
    for p in poly {
        c += *p;
    }
    c * (T::one() / T::lit(poly.len() as f64))
}

/// Even-odd point in polygon test; boundary points may go either way.
pub fn point_in_polygon<T: Real>(p: Point2<T>, poly: &[Point2<T>]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Closed containment test for a counter-clockwise convex polygon with an
/// absolute tolerance on the edge distance.
pub fn point_in_convex<T: Real>(p: Point2<T>, poly: &[Point2<T>], tol: T) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        if len == T::zero() {
            continue;
        }
        if e.cross(p - a) / len < -tol {
            return false;
        }
    }
    true
}

pub fn is_convex<T: Real>(poly: &[Point2<T>]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0i8;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let cr = (b - a).cross(c - b);
        if cr == T::zero() {
            continue;
        }
        let s = if cr > T::zero() { 1 } else { -1 };
        if sign == 0 {
            sign = s;
        } else if s != sign {
            return false;
        }
    }
    sign != 0
}

/// Intersection of the lines `p + t d` and `q + s e`; returns `(t, s)`.
pub fn line_intersection<T: Real>(
    p: Point2<T>,
    d: Vec2<T>,
    q: Point2<T>,
    e: Vec2<T>,
) -> Option<(T, T)> {
    let den = d.cross(e);
    let scale = d.norm() * e.norm();
    if den.abs() <= T::epsilon() * T::lit(16.0) * scale {
        return None;
    }
    let w = q - p;
    Some((w.cross(e) / den, w.cross(d) / den))
}

/// Intersection of the first ray with the boundary of a convex polygon,
/// measured from `origin` (which should lie inside). Returns the farthest
/// hit parameter `t` such that `origin + t dir` is on the boundary.
pub fn ray_exit_convex<T: Real>(origin: Point2<T>, dir: Vec2<T>, poly: &[Point2<T>]) -> Option<T> {
    let n = poly.len();
    let mut best: Option<T> = None;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if let Some((t, s)) = line_intersection(origin, dir, a, b - a) {
            let tol = T::lit(1e-12);
            if t > T::zero() && s >= -tol && s <= T::one() + tol {
                best = Some(match best {
                    Some(bt) if bt >= t => bt,
                    _ => t,
                });
            }
        }
    }
    best
}

/// Ear clipping triangulation of a simple polygon. Returns index triples into
/// `poly`, counter-clockwise. Near-collinear ears are clipped only when no
/// proper ear remains; exactly collinear ones produce no triangle.
pub fn ear_clip<T: Real>(poly: &[Point2<T>]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::InvalidContour(format!("polygon with {n} vertices")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if signed_area(poly) < T::zero() {
        idx.reverse();
    }
    let scale = poly
        .iter()
        .fold(T::zero(), |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(T::one());
    let area_eps = T::epsilon() * T::lit(64.0) * scale * scale;
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = None;
        let mut fallback = None;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let cr = (b - a).cross(c - b);
            if cr < -area_eps {
                continue;
            }
            // reflex vertices strictly inside would make this a bad ear
            let blocked = idx.iter().any(|&o| {
                if o == ia || o == ib || o == ic {
                    return false;
                }
                let p = poly[o];
                if p == a || p == b || p == c {
                    return false;
                }
                let d1 = (b - a).cross(p - a);
                let d2 = (c - b).cross(p - b);
                let d3 = (a - c).cross(p - c);
                d1 >= T::zero() && d2 >= T::zero() && d3 >= T::zero()
            });
            if blocked {
                continue;
            }
            if cr <= area_eps {
                if fallback.is_none() {
                    fallback = Some(k);
                }
                continue;
            }
            clipped = Some(k);
            break;
        }
        let k = match clipped.or(fallback) {
            Some(k) => k,
            None => {
                return Err(Error::InvalidContour(
                    "ear clipping found no ear (polygon not simple)".into(),
                ))
            }
        };
        let m = idx.len();
        let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
        let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
        // a skipped sliver would leave a hole once the cover is lifted to 3D
        if (b - a).cross(c - b) != T::zero() {
            tris.push([ia, ib, ic]);
        }
        idx.remove(k);
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if (b - a).cross(c - b) != T::zero() {
        tris.push([idx[0], idx[1], idx[2]]);
    }
    Ok(tris)
}

/// Constrained Delaunay triangulation of a simple polygon without added
/// points, counter-clockwise. `None` when the polygon has repeated points,
/// crossing edges, or a vertex on another edge.
pub fn constrained_triangulation<T: Real>(poly: &[Point2<T>]) -> Option<Vec<[usize; 3]>> {
    use spade::{ConstrainedDelaunayTriangulation, Point2 as SPoint, Triangulation};
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut cdt: ConstrainedDelaunayTriangulation<SPoint<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(n);
    for (i, p) in poly.iter().enumerate() {
        let h = cdt.insert(SPoint::new(p.x.as_f64(), p.y.as_f64())).ok()?;
        if h.index() != i {
            return None;
        }
        handles.push(h);
    }
    for i in 0..n {
        let (a, b) = (handles[i], handles[(i + 1) % n]);
        if !cdt.can_add_constraint(a, b) {
            return None;
        }
        cdt.add_constraint(a, b);
    }
    if cdt.num_constraints() != n {
        return None;
    }
    let f64_poly: Vec<Point2<f64>> = poly.iter().map(|p| p.cast()).collect();
    let tris: Vec<[usize; 3]> = cdt
        .inner_faces()
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .filter(|t| {
            let c = t.iter().fold(Point2::new(0.0, 0.0), |acc, &i| acc + f64_poly[i] * (1.0 / 3.0));
            point_in_polygon(c, &f64_poly)
        })
        .collect();
    let positive = tris.iter().all(|t| signed_area(&t.map(|i| f64_poly[i])) > 0.0);
    (tris.len() == n - 2 && positive).then_some(tris)
}
