use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Window;
use crate::mesh::slab::Polarity;
use crate::spline::SplineSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectType {
    Crack,
    Bulge,
    BuckleClosed,
    BuckleOpen,
    CoatLift,
    ColdShut,
}

impl DefectType {
    pub const ALL: [DefectType; 6] = [
        DefectType::Crack,
        DefectType::Bulge,
        DefectType::BuckleClosed,
        DefectType::BuckleOpen,
        DefectType::CoatLift,
        DefectType::ColdShut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DefectType::Crack => "crack",
            DefectType::Bulge => "bulge",
            DefectType::BuckleClosed => "buckle_closed",
            DefectType::BuckleOpen => "buckle_open",
            DefectType::CoatLift => "coat_lift",
            DefectType::ColdShut => "cold_shut",
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            DefectType::Crack | DefectType::ColdShut => Polarity::Negative,
            _ => Polarity::Positive,
        }
    }
}

/// Parameters shared by all elongated defects. Fields that only apply to
/// some types are ignored by the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElongatedDefectParams {
    pub defect_type: DefectType,
    pub window: Window<f64>,
    /// Margin of the generator sampling region around the window.
    pub gamma: f64,
    pub n_generators: usize,
    /// Bounds of the per-arc half widths.
    pub width_range: [f64; 2],
    /// Bounds of the depth below (or elevation above) the surface.
    pub depth_or_height_range: [f64; 2],
    pub surface_height: f64,
    pub branches: usize,
    pub spline: SplineSpec,
    pub layer_thickness: f64,
    /// Ratio of the groove width to the ridge width of an open buckle.
    pub inner_width_ratio: f64,
    /// Ratio of the groove depth to the ridge elevation of an open buckle.
    pub inner_depth_ratio: f64,
    /// Arcs shorter than this fraction of the path length are merged.
    pub short_arc_fraction: f64,
    /// Largest turning angle (radians) allowed between consecutive spline arcs.
    pub max_turning_angle: f64,
    pub max_attempts: usize,
}

impl Default for ElongatedDefectParams {
    fn default() -> Self {
        Self::defaults(DefectType::Crack)
    }
}

impl ElongatedDefectParams {
    pub fn defaults(defect_type: DefectType) -> Self {
        let window = Window {
            w0min: 0.0,
            w0max: 10.0,
            w1min: 0.0,
            w1max: 5.0,
        };
        let base = Self {
            defect_type,
            window,
            gamma: 1.0,
            n_generators: 1000,
            width_range: [0.02, 0.06],
            depth_or_height_range: [0.2, 0.5],
            surface_height: 1.0,
            branches: 0,
            spline: SplineSpec {
                control_count: 5,
                discretization_count: 50,
            },
            layer_thickness: 0.05,
            inner_width_ratio: 0.5,
            inner_depth_ratio: 0.6,
            short_arc_fraction: 0.01,
            max_turning_angle: std::f64::consts::FRAC_PI_3,
            max_attempts: 24,
        };
        match defect_type {
            DefectType::Crack => base,
            DefectType::Bulge => Self {
                n_generators: 300,
                width_range: [0.15, 0.3],
                depth_or_height_range: [0.1, 0.25],
                ..base
            },
            DefectType::BuckleClosed | DefectType::BuckleOpen => Self {
                n_generators: 400,
                width_range: [0.1, 0.2],
                depth_or_height_range: [0.1, 0.2],
                ..base
            },
            DefectType::CoatLift => Self {
                n_generators: 400,
                width_range: [0.1, 0.2],
                depth_or_height_range: [0.05, 0.15],
                ..base
            },
            DefectType::ColdShut => Self {
                window: Window {
                    w1max: 2.0,
                    ..window
                },
                width_range: [0.05, 0.1],
                depth_or_height_range: [0.1, 0.3],
                ..base
            },
        }
    }

    pub fn check(&self) -> Result<()> {
        self.window.check()?;
        let range = |name: &str, r: [f64; 2]| {
            if r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[0] <= r[1] {
                Ok(())
            } else {
                Err(Error::params(name, "must satisfy 0 < min <= max"))
            }
        };
        range("width_range", self.width_range)?;
        range("depth_or_height_range", self.depth_or_height_range)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::params("gamma", "must be finite and non-negative"));
        }
        if self.n_generators < 2 {
            return Err(Error::params("n_generators", "must be at least 2"));
        }
        if !(self.surface_height.is_finite() && self.surface_height > 0.0) {
            return Err(Error::params("surface_height", "must be positive"));
        }
        if !(0.0..0.5).contains(&self.short_arc_fraction) {
            return Err(Error::params("short_arc_fraction", "must lie in [0, 0.5)"));
        }
        if self.max_attempts == 0 {
            return Err(Error::params("max_attempts", "must be positive"));
        }
        match self.defect_type {
            DefectType::Crack | DefectType::ColdShut => {
                if self.depth_or_height_range[1] >= self.surface_height {
                    return Err(Error::params(
                        "depth_or_height_range",
                        "depth must stay below the surface height",
                    ));
                }
            }
            DefectType::BuckleOpen => {
                if !(self.inner_width_ratio > 0.0 && self.inner_width_ratio < 1.0) {
                    return Err(Error::params("inner_width_ratio", "must lie in (0, 1)"));
                }
                if !(self.inner_depth_ratio > 0.0 && self.inner_depth_ratio < 1.0) {
                    return Err(Error::params("inner_depth_ratio", "must lie in (0, 1)"));
                }
            }
            DefectType::CoatLift
                if !(self.layer_thickness.is_finite() && self.layer_thickness > 0.0) => {
                    return Err(Error::params("layer_thickness", "must be positive"));
                }
            _ => {}
        }
        if self.defect_type == DefectType::ColdShut {
            self.spline.check()?;
            if !(self.max_turning_angle > 0.0) {
                return Err(Error::params("max_turning_angle", "must be positive"));
            }
        }
        if self.defect_type != DefectType::Crack && self.branches > 0 {
            return Err(Error::params("branches", "only cracks branch"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for t in DefectType::ALL {
            ElongatedDefectParams::defaults(t).check().unwrap();
        }
    }

    #[test]
    fn rejects_empty_depth_and_wide_groove() {
        let mut p = ElongatedDefectParams::defaults(DefectType::Crack);
        p.depth_or_height_range = [0.0, 0.0];
        assert!(matches!(p.check(), Err(Error::InvalidParams { .. })));
        let mut p = ElongatedDefectParams::defaults(DefectType::BuckleOpen);
        p.inner_width_ratio = 1.0;
        assert!(matches!(p.check(), Err(Error::InvalidParams { .. })));
    }

    #[test]
    fn crack_depth_must_stay_above_zero_height() {
        let mut p = ElongatedDefectParams::defaults(DefectType::Crack);
        p.depth_or_height_range = [0.5, 1.0];
        assert!(p.check().is_err());
    }
}
