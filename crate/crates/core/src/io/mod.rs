//! Mesh files, annotations, job configurations and reference presets.

pub mod annotation;
pub mod export;
pub mod job;
pub mod presets;

pub use annotation::{Annotation, MeshStats, SCHEMA_VERSION};
pub use export::{export_mesh, import_mesh, mesh_bytes, parse_mesh, MeshFormat};
pub use job::{
    generate_instance, run_job, write_instance, DefectKind, DefectSpec, Generated, InstanceOutcome, InstanceParams,
    JobConfig, JobItem, JobReport, SlabSpec,
};
pub use presets::{preset, presets, Preset};
