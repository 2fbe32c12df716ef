//! Per-arc widths and per-vertex depth or elevation profiles.

use std::f64::consts::PI;

use crate::pathing::Path;
use crate::rng::RandomStream;

/// Shape factor in `[0, 1]` over the normalized path position `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    /// `sin(pi s)^p`: vanishes at both ends.
    Sine(f64),
    /// `cos(pi s / 2)^p`: full at the start, vanishes at the end.
    Falling(f64),
}

impl Envelope {
    pub fn eval(self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Envelope::Sine(p) => (PI * s).sin().max(0.0).powf(p),
            Envelope::Falling(p) => (0.5 * PI * s).cos().max(0.0).powf(p),
        }
    }
}

/// Normalized arc-length position of each path vertex.
pub fn vertex_positions(path: &Path<f64>) -> Vec<f64> {
    let mut acc = vec![0.0];
    for i in 0..path.arc_count() {
        let (a, b) = path.arc(i);
        acc.push(acc[i] + a.dist(b));
    }
    let total = *acc.last().unwrap();
    acc.iter().map(|d| d / total).collect()
}

/// Normalized arc-length position of each arc midpoint.
pub fn arc_positions(path: &Path<f64>) -> Vec<f64> {
    vertex_positions(path).windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Uniform draws in `range` smoothed by a centered moving average of three.
pub fn smoothed_uniform(stream: &mut RandomStream, n: usize, range: [f64; 2]) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| stream.uniform(range[0], range[1])).collect();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            raw[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Half width of each arc. Positive because arc midpoints are interior.
pub fn widths(
    stream: &mut RandomStream,
    path: &Path<f64>,
    range: [f64; 2],
    env: Envelope,
) -> Vec<f64> {
    let u = smoothed_uniform(stream, path.arc_count(), range);
    arc_positions(path)
        .into_iter()
        .zip(u)
        .map(|(s, u)| env.eval(s) * u)
        .collect()
}

/// Envelope of each polyline vertex given normalized vertex positions: the
/// mean over the adjacent arc midpoints, so endpoints stay positive.
pub fn vertex_envelope(positions: &[f64], env: Envelope) -> Vec<f64> {
    let arc_env: Vec<f64> = positions
        .windows(2)
        .map(|w| env.eval(0.5 * (w[0] + w[1])))
        .collect();
    let k = arc_env.len();
    (0..=k)
        .map(|i| match i {
            0 => arc_env[0],
            i if i == k => arc_env[k - 1],
            _ => 0.5 * (arc_env[i - 1] + arc_env[i]),
        })
        .collect()
}

/// Depth or elevation of each path vertex, see [`vertex_envelope`].
pub fn vertex_offsets(
    stream: &mut RandomStream,
    path: &Path<f64>,
    range: [f64; 2],
    env: Envelope,
) -> Vec<f64> {
    let e = vertex_envelope(&vertex_positions(path), env);
    let u = smoothed_uniform(stream, e.len(), range);
    e.into_iter().zip(u).map(|(e, u)| e * u).collect()
}
