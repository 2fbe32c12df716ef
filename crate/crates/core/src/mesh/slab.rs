//! Rectangular test objects that defects are imprinted into.

use serde::{Deserialize, Serialize};

use super::boolean::{boolean_biased, BooleanOp};
use super::{box_mesh, SurfaceMesh, Tag};
use crate::error::{Error, Result};
use crate::geom::{Point3, Window};

/// Box `footprint x [bottom_z, top_z]`; its top face is the object surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub footprint: Window<f64>,
    pub bottom_z: f64,
    pub top_z: f64,
}

/// Whether a defect removes material (indentation) or adds it (elevation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Negative,
    Positive,
}

impl Slab {
    pub fn check(&self) -> Result<()> {
        self.footprint.check()?;
        if !(self.bottom_z < self.top_z) {
            return Err(Error::params("slab.bottom_z", "must be below top_z"));
        }
        Ok(())
    }

    pub fn mesh(&self) -> SurfaceMesh<f64> {
        let w = &self.footprint;
        box_mesh(
            Point3::new(w.w0min, w.w1min, self.bottom_z),
            Point3::new(w.w0max, w.w1max, self.top_z),
            Tag::Slab,
        )
    }
}

/// Subtracts negative defects from the slab and unites positive ones. The
/// defect must lie strictly inside the slab footprint.
pub fn imprint_into_slab(
    slab: &Slab,
    defects: &[(&SurfaceMesh<f64>, Polarity)],
) -> Result<SurfaceMesh<f64>> {
    slab.check()?;
    let mut body = slab.mesh();
    for (mesh, polarity) in defects {
        let Some((lo, hi)) = mesh.bounds() else {
            continue;
        };
        let w = &slab.footprint;
        if !(lo.x > w.w0min && hi.x < w.w0max && lo.y > w.w1min && hi.y < w.w1max) {
            return Err(Error::OutOfBounds);
        }
        if lo.z <= slab.bottom_z {
            return Err(Error::OutOfBounds);
        }
        body = match polarity {
            // lift the cutter so it opens through the top face
            Polarity::Negative => boolean_biased(&body, mesh, BooleanOp::Difference, 1.0)?,
            // sink the addition so it fuses with the top face
            Polarity::Positive => boolean_biased(&body, mesh, BooleanOp::Union, -1.0)?,
        };
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab() -> Slab {
        Slab {
            footprint: Window::new(0.0, 4.0, 0.0, 4.0).unwrap(),
            bottom_z: 0.0,
            top_z: 1.0,
        }
    }

    #[test]
    fn empty_list_leaves_slab_unchanged() {
        assert_eq!(imprint_into_slab(&slab(), &[]).unwrap(), slab().mesh());
    }

    #[test]
    fn pit_and_bump_volumes() {
        let pit = box_mesh(Point3::new(1.0, 1.0, 0.5), Point3::new(2.0, 2.0, 1.0), Tag::Strip);
        let cut = imprint_into_slab(&slab(), &[(&pit, Polarity::Negative)]).unwrap();
        assert!(cut.validate().is_valid());
        let v = cut.signed_volume().unwrap();
        assert!((v - 15.5).abs() / 16.0 < 1e-6, "{v}");
        let bump = box_mesh(Point3::new(1.0, 1.0, 1.0), Point3::new(2.0, 2.0, 1.5), Tag::Strip);
        let add = imprint_into_slab(&slab(), &[(&bump, Polarity::Positive)]).unwrap();
        assert!(add.validate().is_valid());
        let v = add.signed_volume().unwrap();
        assert!((v - 16.5).abs() / 16.0 < 1e-6, "{v}");
    }

    #[test]
    fn out_of_bounds() {
        let far = box_mesh(Point3::new(3.5, 1.0, 0.5), Point3::new(5.0, 2.0, 1.0), Tag::Strip);
        assert_eq!(
            imprint_into_slab(&slab(), &[(&far, Polarity::Negative)]),
            Err(Error::OutOfBounds)
        );
    }
}
