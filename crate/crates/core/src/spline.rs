//! Natural cubic spline spines, `y` interpolated as a function of `x`.

use crate::error::{Error, Result};
use crate::geom::{Point2, Window};
use crate::pathing::Path;
use crate::rng::RandomStream;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplineSpec {
    /// Number of control points `n + 1`.
    pub control_count: usize,
    /// Number of discretized path vertices `k + 2`.
    pub discretization_count: usize,
}

impl SplineSpec {
    pub fn check(&self) -> Result<()> {
        if self.control_count < 2 {
            return Err(Error::InvalidDiscretization(format!(
                "need at least 2 control points, got {}",
                self.control_count
            )));
        }
        if self.discretization_count < 5 * self.control_count {
            return Err(Error::InvalidDiscretization(format!(
                "{} path vertices is fewer than 5 x {} control points",
                self.discretization_count, self.control_count
            )));
        }
        Ok(())
    }
}

/// Interpolant with zero second derivative at both ends.
#[derive(Clone, Debug)]
pub struct NaturalCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    /// second derivatives at the knots
    m: Vec<T>,
}

impl<T: Real> NaturalCubic<T> {
    /// `xs` must be strictly increasing.
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidDiscretization("spline needs >= 2 knots".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDiscretization("knots not strictly increasing".into()));
        }
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![T::zero(); k];
            let mut rhs = vec![T::zero(); k];
            for i in 0..k {
                diag[i] = T::two() * (h[i] + h[i + 1]);
                rhs[i] = T::lit(6.0)
                    * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
            }
            for i in 1..k {
                let f = h[i] / diag[i - 1];
                diag[i] -= f * h[i];
                let r = rhs[i - 1];
                rhs[i] -= f * r;
            }
            for i in (0..k).rev() {
                let upper = if i + 1 < k { h[i + 1] * m[i + 2] } else { T::zero() };
                m[i + 1] = (rhs[i] - upper) / diag[i];
            }
        }
        Ok(Self { xs, ys, m })
    }

    fn segment(&self, x: T) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    pub fn eval(&self, x: T) -> T {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - x) / h, (x - x0) / h);
        let six = T::lit(6.0);
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six
    }

    pub fn second_derivative(&self, x: T) -> T {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let b = (x - self.xs[i]) / h;
        self.m[i] * (T::one() - b) + self.m[i + 1] * b
    }
}

#[derive(Clone, Debug)]
pub struct SplinePath<T> {
    pub path: Path<T>,
    pub control_points: Vec<Point2<T>>,
    /// Largest distance the discretized spine leaves the window vertically.
    pub excursion: T,
}

/// Samples control points (ends pinned to the left and right window borders,
/// interior `x` uniform, all `y` uniform) and discretizes the natural spline
/// at uniformly spaced `x`.
pub fn spline_path<T: Real>(
    stream: &mut RandomStream,
    window: &Window<T>,
    spec: SplineSpec,
) -> Result<SplinePath<T>> {
    spec.check()?;
    window.check()?;
    let n = spec.control_count;
    let (x0, x1) = (window.w0min.as_f64(), window.w0max.as_f64());
    let (y0, y1) = (window.w1min.as_f64(), window.w1max.as_f64());
    let min_gap = 1e-9 * (x1 - x0);
    let mut xs: Vec<f64>;
    loop {
        xs = (0..n - 2).map(|_| stream.uniform(x0, x1)).collect();
        xs.push(x0);
        xs.push(x1);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if xs.windows(2).all(|w| w[1] - w[0] > min_gap) {
            break;
        }
    }
    let ys: Vec<T> = (0..n).map(|_| T::lit(stream.uniform(y0, y1))).collect();
    let mut xs: Vec<T> = xs.into_iter().map(T::lit).collect();
    xs[0] = window.w0min;
    xs[n - 1] = window.w0max;
    let spline = NaturalCubic::new(xs.clone(), ys.clone())?;
    let count = spec.discretization_count;
    let verts: Vec<Point2<T>> = (0..count)
        .map(|i| {
            let x = if i + 1 == count {
                window.w0max
            } else {
                window.w0min + window.width() * T::lit(i as f64 / (count - 1) as f64)
            };
            Point2::new(x, spline.eval(x))
        })
        .collect();
    let excursion = verts.iter().fold(T::zero(), |e, p| {
        e.max(window.w1min - p.y).max(p.y - window.w1max)
    });
    Ok(SplinePath {
        path: Path::from_points(verts),
        control_points: xs.into_iter().zip(ys).map(|(x, y)| Point2::new(x, y)).collect(),
        excursion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window() -> Window<f64> {
        Window::new(0.0, 10.0, 0.0, 2.0).unwrap()
    }

    #[test]
    fn interpolates_knots_with_natural_ends() {
        let xs: Vec<f64> = vec![0.0, 1.0, 2.5, 4.0, 7.0];
        let ys: Vec<f64> = vec![0.0, 2.0, -1.0, 0.5, 3.0];
        let s = NaturalCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-12);
        }
        assert!(s.second_derivative(0.0).abs() < 1e-12);
        assert!(s.second_derivative(7.0).abs() < 1e-12);
        // interior continuity of the second derivative
        let e = 1e-9;
        assert!((s.second_derivative(2.5 - e) - s.second_derivative(2.5 + e)).abs() < 1e-6);
    }

    #[test]
    fn two_controls_give_a_line() {
        let mut st = RandomStream::new(4);
        let sp = spline_path(
            &mut st,
            &window(),
            SplineSpec {
                control_count: 2,
                discretization_count: 10,
            },
        )
        .unwrap();
        let v = &sp.path.vertices;
        for w in v.windows(3) {
            assert!((w[1] - w[0]).cross(w[2] - w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_pinned_to_borders() {
        let mut st = RandomStream::new(8);
        let spec = SplineSpec {
            control_count: 5,
            discretization_count: 50,
        };
        let sp = spline_path(&mut st, &window(), spec).unwrap();
        assert_eq!(sp.path.arc_count(), 49);
        assert_eq!(sp.path.vertices[0], sp.control_points[0]);
        assert_eq!(sp.path.vertices[49], sp.control_points[4]);
        assert_eq!(sp.path.vertices[0].x, 0.0);
        assert_eq!(sp.path.vertices[49].x, 10.0);
    }

    #[test]
    fn rejects_coarse_discretization() {
        let mut st = RandomStream::new(1);
        let spec = SplineSpec {
            control_count: 10,
            discretization_count: 49,
        };
        assert!(matches!(
            spline_path(&mut st, &window(), spec),
            Err(Error::InvalidDiscretization(_))
        ));
    }
}
