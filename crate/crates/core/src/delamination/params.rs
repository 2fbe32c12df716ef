use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Window;

/// Which coarse cells become delaminated pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Every nonempty coarse cell: a surface-filling delamination.
    All,
    /// A uniform subset of this many cells, drawn without replacement: scabs.
    Random(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelamParams {
    pub window: Window<f64>,
    pub gamma: f64,
    pub n_coarse: usize,
    /// At least five times `n_coarse`.
    pub n_fine: usize,
    /// Interior points added to the largest fine cell.
    pub r_max: usize,
    pub surface_height: f64,
    pub layer_thickness: f64,
    /// Elevation of the piece contour; the lower bound must be positive.
    pub elevation_max_range: [f64; 2],
    /// Relative distance below which a vertex stays on the surface, in `[0, 1]`.
    pub threshold_range: [f64; 2],
    /// Peak texture height per fine cell.
    pub texture_height_range: [f64; 2],
    pub selection: Selection,
}

impl Default for DelamParams {
    fn default() -> Self {
        Self {
            window: Window {
                w0min: 0.0,
                w0max: 10.0,
                w1min: 0.0,
                w1max: 10.0,
            },
            gamma: 1.0,
            n_coarse: 10,
            n_fine: 110,
            r_max: 12,
            surface_height: 1.0,
            layer_thickness: 0.05,
            elevation_max_range: [0.1, 0.3],
            threshold_range: [0.4, 0.8],
            texture_height_range: [0.0, 0.03],
            selection: Selection::All,
        }
    }
}

fn range(field: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && lo <= r[0] && r[0] <= r[1] && r[1] <= hi) {
        return Err(Error::params(
            field,
            format!("needs {lo} <= min <= max <= {hi}, got [{}, {}]", r[0], r[1]),
        ));
    }
    Ok(())
}

impl DelamParams {
    pub fn check(&self) -> Result<()> {
        self.window.check()?;
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::params("gamma", "dilation margin must be positive"));
        }
        if self.n_coarse == 0 {
            return Err(Error::params("n_coarse", "at least one coarse cell is required"));
        }
        if self.n_fine < 5 * self.n_coarse {
            return Err(Error::params("n_fine", "must be at least five times n_coarse"));
        }
        if !self.surface_height.is_finite() {
            return Err(Error::params("surface_height", "must be finite"));
        }
        if !(self.layer_thickness > 0.0 && self.layer_thickness.is_finite()) {
            return Err(Error::params("layer_thickness", "must be positive"));
        }
        range("elevation_max_range", self.elevation_max_range, f64::MIN_POSITIVE, f64::MAX)?;
        range("threshold_range", self.threshold_range, 0.0, 1.0)?;
        range("texture_height_range", self.texture_height_range, 0.0, f64::MAX)?;
        if let Selection::Random(k) = self.selection {
            if k == 0 || k > self.n_coarse {
                return Err(Error::params("selection", "count must lie in 1..=n_coarse"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        DelamParams::default().check().unwrap();
    }

    #[test]
    fn fine_tessellation_must_be_finer() {
        let p = DelamParams {
            n_fine: 49,
            ..Default::default()
        };
        assert!(matches!(p.check(), Err(Error::InvalidParams { field, .. }) if field == "n_fine"));
    }

    #[test]
    fn thresholds_are_relative() {
        let p = DelamParams {
            threshold_range: [0.5, 1.5],
            ..Default::default()
        };
        assert!(p.check().is_err());
        let q = DelamParams {
            elevation_max_range: [0.0, 0.1],
            ..Default::default()
        };
        assert!(q.check().is_err());
    }

    #[test]
    fn selection_round_trips() {
        let p = DelamParams {
            selection: Selection::Random(3),
            ..Default::default()
        };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"random\":3"));
        assert_eq!(serde_json::from_str::<DelamParams>(&s).unwrap(), p);
    }
}
