//! Procedural generation of defect geometry for synthetic inspection data.

pub mod defects;
pub mod delamination;
pub mod dilation;
pub mod error;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod pathing;
pub mod rng;
pub mod scalar;
pub mod spline;
pub mod strip;
pub mod tessellation;

pub use error::{Error, Result};
pub use geom::{Point2, Point3, Window};
pub use rng::RandomStream;
pub use scalar::Real;
pub use mesh::SurfaceMesh;
pub use pathing::Path;
pub use tessellation::Tessellation;

pub type Point2d = Point2<f64>;
pub type Point2f = Point2<f32>;
pub type Point3d = Point3<f64>;
pub type Point3f = Point3<f32>;
pub type WindowD = Window<f64>;
pub type WindowF = Window<f32>;
pub type MeshD = SurfaceMesh<f64>;
pub type MeshF = SurfaceMesh<f32>;
pub type PathD = Path<f64>;
pub type PathF = Path<f32>;
pub type TessellationD = Tessellation<f64>;
pub type TessellationF = Tessellation<f32>;
