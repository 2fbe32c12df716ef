use serde_json::{json, Value};

use super::job::{DefectKind, InstanceParams};
use crate::error::{Error, Result};

/// Named parameter set for a defect type.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: DefectKind,
    overrides: Value,
}

impl Preset {
    pub fn params(&self) -> Result<InstanceParams> {
        InstanceParams::with_overrides(self.kind, &self.overrides)
    }
}

pub fn presets() -> Vec<Preset> {
    let p = |name, description, kind, overrides| Preset {
        name,
        description,
        kind,
        overrides,
    };
    vec![
        p("fig5", "crack over 1000 generators", DefectKind::Crack, json!({"n_generators": 1000})),
        p("fig6a-150", "crack over 150 generators", DefectKind::Crack, json!({"n_generators": 150})),
        p("fig6a-2000", "crack over 2000 generators", DefectKind::Crack, json!({"n_generators": 2000})),
        p("fig6b", "crack with one branch", DefectKind::Crack, json!({"branches": 1})),
        p("fig7a", "bulge", DefectKind::Bulge, json!({})),
        p("fig7b", "open buckle", DefectKind::BuckleOpen, json!({})),
        p("fig7c", "coat lift", DefectKind::CoatLift, json!({})),
        p(
            "fig8-left",
            "cold shut on 5 control points and 50 samples",
            DefectKind::ColdShut,
            json!({"spline": {"control_count": 5, "discretization_count": 50}}),
        ),
        p(
            "fig8-right",
            "cold shut on 10 control points and 100 samples",
            DefectKind::ColdShut,
            json!({"spline": {"control_count": 10, "discretization_count": 100}}),
        ),
        p("fig12", "surface-filling delamination", DefectKind::Delamination, json!({})),
        p(
            "hot-tear",
            "jagged crack, wide and deep",
            DefectKind::Crack,
            json!({"n_generators": 1500, "width_range": [0.03, 0.08], "depth_or_height_range": [0.3, 0.6]}),
        ),
        p(
            "cold-crack",
            "straighter crack, narrow and shallow",
            DefectKind::Crack,
            json!({"n_generators": 300, "width_range": [0.01, 0.03], "depth_or_height_range": [0.1, 0.3]}),
        ),
        p("cold-shut", "gently curved cold shut", DefectKind::ColdShut, json!({})),
        p(
            "rat-tail",
            "strongly curved, wider cold shut",
            DefectKind::ColdShut,
            json!({
                "spline": {"control_count": 10, "discretization_count": 100},
                "width_range": [0.08, 0.15]
            }),
        ),
    ]
}

pub fn preset(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::params("preset", format!("unknown preset {name}")))
}
