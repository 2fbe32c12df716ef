//! Seedable random streams and uniform sampling.
//!
//! Every random decision in the crate goes through a [`RandomStream`]. A
//! stream is identified by a `(seed, stream_id)` pair and backed by a
//! ChaCha8 generator whose 64-bit stream selector keeps derived streams
//! disjoint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{point_in_convex, signed_area, Point2, Window};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// Child stream for a named sub-task. Depends only on this stream's
    /// identity, never on how many values were drawn from it.
    pub fn derive(&self, child: u64) -> Self {
        let id = splitmix(self.stream_id ^ splitmix(child.wrapping_add(1)));
        Self::with_stream(self.seed, id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// One draw in `[lo, hi]` (`hi` reachable only through rounding).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index over an empty range");
        ((self.unit() * n as f64) as usize).min(n - 1)
    }

    /// `k` distinct indices from `0..n`, uniformly without replacement.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        let k = k.min(n);
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// `n` i.i.d. uniform points in a rectangle, two draws per point.
pub fn uniform_points<T: Real>(
    stream: &mut RandomStream,
    region: &Window<T>,
    n: usize,
) -> Result<Vec<Point2<T>>> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    region.check()?;
    let (x0, x1) = (region.w0min.as_f64(), region.w0max.as_f64());
    let (y0, y1) = (region.w1min.as_f64(), region.w1max.as_f64());
    Ok((0..n)
        .map(|_| {
            let x = stream.uniform(x0, x1);
            let y = stream.uniform(y0, y1);
            // clamp guards the closed region against rounding in the affine map
            Point2::new(
                T::lit(x).max(region.w0min).min(region.w0max),
                T::lit(y).max(region.w1min).min(region.w1max),
            )
        })
        .collect())
}

/// `n` uniform points strictly inside a convex polygon, by rejection from the
/// bounding box.
pub fn uniform_in_polygon<T: Real>(
    stream: &mut RandomStream,
    polygon: &[Point2<T>],
    n: usize,
) -> Result<Vec<Point2<T>>> {
    if polygon.len() < 3 || signed_area(polygon).abs() <= T::epsilon() {
        return Err(Error::InvalidRegion("degenerate polygon".into()));
    }
    let mut ccw = polygon.to_vec();
    if signed_area(&ccw) < T::zero() {
        ccw.reverse();
    }
    let (mut lo, mut hi) = (ccw[0], ccw[0]);
    for p in &ccw {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = T::lit(stream.uniform(lo.x.as_f64(), hi.x.as_f64()));
        let y = T::lit(stream.uniform(lo.y.as_f64(), hi.y.as_f64()));
        let p = Point2::new(x, y);
        if strictly_inside(p, &ccw) {
            out.push(p);
        }
    }
    Ok(out)
}

fn strictly_inside<T: Real>(p: Point2<T>, ccw: &[Point2<T>]) -> bool {
    let n = ccw.len();
    (0..n).all(|i| (ccw[(i + 1) % n] - ccw[i]).cross(p - ccw[i]) > T::zero())
        && point_in_convex(p, ccw, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Window<f64> {
        Window::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn points_are_contained_and_reproducible() {
        let a = uniform_points(&mut RandomStream::new(1), &unit(), 3).unwrap();
        let b = uniform_points(&mut RandomStream::new(1), &unit(), 3).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|p| unit().contains(*p)));
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_points_consumes_two_draws_each() {
        let mut s1 = RandomStream::new(9);
        uniform_points(&mut s1, &unit(), 5).unwrap();
        let mut s2 = RandomStream::new(9);
        for _ in 0..10 {
            s2.unit();
        }
        assert_eq!(s1.unit(), s2.unit());
    }

    #[test]
    fn empty_and_degenerate_requests_fail() {
        let mut s = RandomStream::new(1);
        assert_eq!(uniform_points(&mut s, &unit(), 0), Err(Error::EmptyRequest));
        let flat = Window {
            w0min: 0.0,
            w0max: 1.0,
            w1min: 0.5,
            w1max: 0.5,
        };
        assert!(matches!(
            uniform_points(&mut s, &flat, 2),
            Err(Error::InvalidRegion(_))
        ));
        let line = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(matches!(
            uniform_in_polygon(&mut s, &line, 2),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn polygon_sampling_vacuous_and_contained() {
        let sq = unit().corners();
        let mut s = RandomStream::new(5);
        let pts = uniform_in_polygon(&mut s, &sq, 5).unwrap();
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0));
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert!(uniform_in_polygon(&mut s, &tri, 0).unwrap().is_empty());
    }

    #[test]
    fn derived_streams_differ_and_are_stable() {
        let base = RandomStream::new(3);
        let mut a = base.derive(1);
        let mut b = base.derive(2);
        let mut a2 = RandomStream::new(3).derive(1);
        let va = a.unit();
        assert_ne!(va, b.unit());
        assert_eq!(va, a2.unit());
    }

    #[test]
    fn choose_distinct_has_no_repeats() {
        let mut s = RandomStream::new(11);
        let mut v = s.choose_distinct(10, 6);
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 6);
    }
}
