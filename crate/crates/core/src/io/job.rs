use std::collections::HashSet;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::annotation::{bounds_of, xy, Annotation, MeshStats, SCHEMA_VERSION};
use super::export::{mesh_bytes, parse_mesh, MeshFormat};
use crate::defects::{generate, DefectType, ElongatedDefectParams};
use crate::delamination::{generate_delamination, DelamParams};
use crate::error::{Error, Result};
use crate::geom::{Point2, Window};
use crate::mesh::slab::{imprint_into_slab, Polarity, Slab};
use crate::mesh::{SurfaceMesh, ValidationReport};
use crate::rng::RandomStream;

/// Every defect family the generator produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Crack,
    Bulge,
    BuckleClosed,
    BuckleOpen,
    CoatLift,
    ColdShut,
    Delamination,
}

impl DefectKind {
    pub const ALL: [DefectKind; 7] = [
        DefectKind::Crack,
        DefectKind::Bulge,
        DefectKind::BuckleClosed,
        DefectKind::BuckleOpen,
        DefectKind::CoatLift,
        DefectKind::ColdShut,
        DefectKind::Delamination,
    ];

    pub fn name(self) -> &'static str {
        match self.elongated() {
            Some(t) => t.name(),
            None => "delamination",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn elongated(self) -> Option<DefectType> {
        Some(match self {
            DefectKind::Crack => DefectType::Crack,
            DefectKind::Bulge => DefectType::Bulge,
            DefectKind::BuckleClosed => DefectType::BuckleClosed,
            DefectKind::BuckleOpen => DefectType::BuckleOpen,
            DefectKind::CoatLift => DefectType::CoatLift,
            DefectKind::ColdShut => DefectType::ColdShut,
            DefectKind::Delamination => return None,
        })
    }

    pub fn polarity(self) -> Polarity {
        self.elongated().map_or(Polarity::Positive, DefectType::polarity)
    }
}

impl From<DefectType> for DefectKind {
    fn from(t: DefectType) -> Self {
        match t {
            DefectType::Crack => DefectKind::Crack,
            DefectType::Bulge => DefectKind::Bulge,
            DefectType::BuckleClosed => DefectKind::BuckleClosed,
            DefectType::BuckleOpen => DefectKind::BuckleOpen,
            DefectType::CoatLift => DefectKind::CoatLift,
            DefectType::ColdShut => DefectKind::ColdShut,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InstanceParams {
    Elongated(ElongatedDefectParams),
    Delamination(DelamParams),
}

/// Replaces leaves of `base` by those of `over`, descending into objects.
fn overlay(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => overlay(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse {
        source_name: what.to_string(),
        message: e.to_string(),
    })
}

impl InstanceParams {
    pub fn defaults(kind: DefectKind) -> Self {
        match kind.elongated() {
            Some(t) => InstanceParams::Elongated(ElongatedDefectParams::defaults(t)),
            None => InstanceParams::Delamination(DelamParams::default()),
        }
    }

    /// Defaults of `kind` with the fields of the JSON object `overrides` laid
    /// over them; unknown fields are rejected.
    pub fn with_overrides(kind: DefectKind, overrides: &Value) -> Result<Self> {
        let over = match overrides {
            Value::Null => return Self::defaults(kind).checked(),
            Value::Object(_) => overrides,
            _ => return Err(Error::params("params", "must be a JSON object")),
        };
        if let Some(t) = over.get("defect_type") {
            if t.as_str() != Some(kind.name()) {
                return Err(Error::params("defect_type", format!("conflicts with type {}", kind.name())));
            }
        }
        let mut v = serde_json::to_value(Self::defaults(kind)).map_err(|e| Error::Io(e.to_string()))?;
        overlay(&mut v, over);
        let what = format!("{} params", kind.name());
        let p = match kind.elongated() {
            Some(_) => InstanceParams::Elongated(from_value(v, &what)?),
            None => InstanceParams::Delamination(from_value(v, &what)?),
        };
        p.checked()
    }

    fn checked(self) -> Result<Self> {
        match &self {
            InstanceParams::Elongated(p) => p.check()?,
            InstanceParams::Delamination(p) => p.check()?,
        }
        Ok(self)
    }

    pub fn kind(&self) -> DefectKind {
        match self {
            InstanceParams::Elongated(p) => p.defect_type.into(),
            InstanceParams::Delamination(_) => DefectKind::Delamination,
        }
    }

    pub fn window(&self) -> Window<f64> {
        match self {
            InstanceParams::Elongated(p) => p.window,
            InstanceParams::Delamination(p) => p.window,
        }
    }

    pub fn surface_height(&self) -> f64 {
        match self {
            InstanceParams::Elongated(p) => p.surface_height,
            InstanceParams::Delamination(p) => p.surface_height,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// A generated defect of any family with the data its annotation records.
#[derive(Clone, Debug)]
pub struct Generated {
    pub kind: DefectKind,
    pub seed: u64,
    pub params: InstanceParams,
    pub mesh: SurfaceMesh<f64>,
    /// Bodies that are imprinted one after another.
    pub parts: Vec<SurfaceMesh<f64>>,
    pub spine: Vec<Point2<f64>>,
    pub branches: Vec<Vec<Point2<f64>>>,
    pub footprint: Vec<Vec<Point2<f64>>>,
    pub report: ValidationReport,
    pub attempts: usize,
}

/// Sums of the reports of disjoint bodies.
fn combined_report(reports: &[ValidationReport]) -> ValidationReport {
    let mut r = ValidationReport {
        closed: true,
        oriented: true,
        min_area: f64::INFINITY,
        ..Default::default()
    };
    for q in reports {
        r.vertices += q.vertices;
        r.triangles += q.triangles;
        r.closed &= q.closed;
        r.oriented &= q.oriented;
        r.boundary_edges += q.boundary_edges;
        r.nonmanifold_edges += q.nonmanifold_edges;
        r.components += q.components;
        r.euler.extend(&q.euler);
        r.min_area = r.min_area.min(q.min_area);
        r.degenerate_triangles += q.degenerate_triangles;
        r.self_intersections += q.self_intersections;
    }
    if !r.min_area.is_finite() {
        r.min_area = 0.0;
    }
    r
}

pub fn generate_instance(params: &InstanceParams, seed: u64) -> Result<Generated> {
    let stream = RandomStream::new(seed);
    match params {
        InstanceParams::Elongated(p) => {
            let inst = generate(&stream, p)?;
            Ok(Generated {
                kind: params.kind(),
                seed,
                params: params.clone(),
                parts: vec![inst.mesh.clone()],
                mesh: inst.mesh,
                spine: inst.spine.vertices,
                branches: inst.branches.into_iter().map(|b| b.vertices).collect(),
                footprint: inst.footprint,
                report: inst.report,
                attempts: inst.attempts,
            })
        }
        InstanceParams::Delamination(p) => {
            let d = generate_delamination(&stream, p)?;
            let reports: Vec<_> = d.cells.iter().map(|c| c.report.clone()).collect();
            let footprint = d
                .cells
                .iter()
                .flat_map(|c| c.contour.iter().map(|lp| lp.iter().map(|&i| c.points[i]).collect()))
                .collect();
            Ok(Generated {
                kind: DefectKind::Delamination,
                seed,
                params: params.clone(),
                mesh: d.combined_mesh(),
                parts: d.cells.into_iter().map(|c| c.mesh).collect(),
                spine: Vec::new(),
                branches: Vec::new(),
                footprint,
                report: combined_report(&reports),
                attempts: 1,
            })
        }
    }
}

/// Rectangular object the defects are imprinted into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlabSpec {
    /// Extent of the slab beyond the defect window on every side.
    pub margin: f64,
    /// Depth of the slab below the object surface.
    pub thickness: f64,
}

impl Default for SlabSpec {
    fn default() -> Self {
        Self {
            margin: 0.5,
            thickness: 1.0,
        }
    }
}

impl SlabSpec {
    /// Slab under the surface whose footprint covers the window and the
    /// defect bounds with `margin` to spare.
    pub fn slab_for(&self, params: &InstanceParams, mesh: &SurfaceMesh<f64>) -> Result<Slab> {
        if !(self.margin > 0.0 && self.thickness > 0.0) {
            return Err(Error::params("slab", "margin and thickness must be positive"));
        }
        let h = params.surface_height();
        let mut w = params.window();
        if let Some((lo, hi)) = mesh.bounds() {
            w.w0min = w.w0min.min(lo.x);
            w.w0max = w.w0max.max(hi.x);
            w.w1min = w.w1min.min(lo.y);
            w.w1max = w.w1max.max(hi.y);
        }
        Ok(Slab {
            footprint: w.dilate(self.margin),
            bottom_z: h - self.thickness,
            top_z: h,
        })
    }

    pub fn imprint(&self, g: &Generated) -> Result<SurfaceMesh<f64>> {
        let slab = self.slab_for(&g.params, &g.mesh)?;
        let polarity = g.kind.polarity();
        let bodies: Vec<_> = g.parts.iter().map(|m| (m, polarity)).collect();
        imprint_into_slab(&slab, &bodies)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    #[serde(rename = "type")]
    pub kind: DefectKind,
    /// Defaults to the number of explicit seeds, or one.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Overrides of the type defaults.
    #[serde(default)]
    pub params: Value,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> MeshFormat {
    MeshFormat::Obj
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: MeshFormat,
    #[serde(default)]
    pub slab: Option<SlabSpec>,
    pub defects: Vec<DefectSpec>,
}

impl JobConfig {
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            source_name: source.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Every instance with its resolved parameters. Instances without an
    /// explicit seed get `base_seed` plus their position in the job.
    pub fn plan(&self) -> Result<Vec<JobItem>> {
        let mut items = Vec::new();
        for (e, spec) in self.defects.iter().enumerate() {
            let params = InstanceParams::with_overrides(spec.kind, &spec.params)?;
            let count = match (&spec.seeds, spec.count) {
                (Some(s), Some(c)) if s.len() != c => {
                    return Err(Error::params(
                        format!("defects[{e}].seeds"),
                        format!("{} seeds given for count {c}", s.len()),
                    ))
                }
                (Some(s), _) => s.len(),
                (None, c) => c.unwrap_or(1),
            };
            for k in 0..count {
                let index = items.len();
                let seed = match &spec.seeds {
                    Some(s) => s[k],
                    None => self.base_seed.wrapping_add(index as u64),
                };
                items.push(JobItem {
                    index,
                    seed,
                    params: params.clone(),
                });
            }
        }
        let mut names = HashSet::new();
        for it in &items {
            if !names.insert(it.stem()) {
                return Err(Error::params("defects", format!("{} appears twice", it.stem())));
            }
        }
        Ok(items)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobItem {
    pub index: usize,
    pub seed: u64,
    pub params: InstanceParams,
}

impl JobItem {
    pub fn stem(&self) -> String {
        format!("{}_{:06}", self.params.kind().name(), self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub defect_type: String,
    pub seed: u64,
    pub mesh_file: Option<PathBuf>,
    pub annotation_file: Option<PathBuf>,
    pub stats: Option<MeshStats>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub instances: Vec<InstanceOutcome>,
}

impl JobReport {
    pub fn failures(&self) -> usize {
        self.instances.iter().filter(|i| i.error.is_some()).count()
    }
}

fn io_err(path: &FsPath, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes the mesh and its annotation; statistics come from the written bytes.
pub fn write_instance(
    g: &Generated,
    slab: Option<&SlabSpec>,
    format: MeshFormat,
    dir: &FsPath,
    stem: &str,
) -> Result<(PathBuf, PathBuf, MeshStats)> {
    let mesh = match slab {
        Some(s) => s.imprint(g)?,
        None => g.mesh.clone(),
    };
    let file = format!("{stem}.{}", format.extension());
    let mesh_path = dir.join(&file);
    let bytes = mesh_bytes(&mesh, format);
    std::fs::write(&mesh_path, &bytes).map_err(|e| io_err(&mesh_path, e))?;
    let back = parse_mesh(&bytes, format, &file)?;
    let stats = MeshStats::of(&back, file, format.extension());
    let annotation = Annotation {
        schema_version: SCHEMA_VERSION,
        defect_type: g.kind.name().to_string(),
        seed: g.seed,
        params: g.params.to_json(),
        spine: xy(&g.spine),
        branches: g.branches.iter().map(|b| xy(b)).collect(),
        footprint: g.footprint.iter().map(|p| xy(p)).collect(),
        bounds: bounds_of(&back),
        imprinted: slab.is_some(),
        mesh: stats.clone(),
        validation: g.report.clone(),
        imprint_validation: slab.map(|_| back.validate()),
        attempts: g.attempts,
    };
    let json_path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&annotation).map_err(|e| io_err(&json_path, e))?;
    std::fs::write(&json_path, text + "\n").map_err(|e| io_err(&json_path, e))?;
    Ok((mesh_path, json_path, stats))
}

/// Worker count from `DEFECTFORGE_THREADS`; zero lets the pool decide.
pub fn thread_cap() -> usize {
    std::env::var("DEFECTFORGE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Generates every planned instance in parallel. Instance failures are
/// recorded in the report; only configuration and pool errors abort the job.
pub fn run_job(config: &JobConfig) -> Result<JobReport> {
    let items = config.plan()?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let instances = pool.install(|| {
        items
            .par_iter()
            .map(|it| {
                let result = generate_instance(&it.params, it.seed)
                    .and_then(|g| write_instance(&g, config.slab.as_ref(), config.format, dir, &it.stem()));
                let mut o = InstanceOutcome {
                    index: it.index,
                    defect_type: it.params.kind().name().to_string(),
                    seed: it.seed,
                    mesh_file: None,
                    annotation_file: None,
                    stats: None,
                    error: None,
                };
                match result {
                    Ok((m, a, s)) => {
                        o.mesh_file = Some(m);
                        o.annotation_file = Some(a);
                        o.stats = Some(s);
                    }
                    Err(e) => o.error = Some(e.to_string()),
                }
                o
            })
            .collect()
    });
    Ok(JobReport { instances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_keep_other_defaults() {
        let p = InstanceParams::with_overrides(DefectKind::Crack, &json!({"n_generators": 150, "window": {"w1max": 4.0}})).unwrap();
        let InstanceParams::Elongated(e) = p else { panic!() };
        assert_eq!(e.n_generators, 150);
        assert_eq!(e.window.w1max, 4.0);
        assert_eq!(e.window.w0max, 10.0);
        assert_eq!(e.width_range, ElongatedDefectParams::defaults(DefectType::Crack).width_range);
    }

    #[test]
    fn unknown_and_conflicting_fields_fail() {
        let e = InstanceParams::with_overrides(DefectKind::Bulge, &json!({"n_generator": 5})).unwrap_err();
        assert!(e.to_string().contains("n_generator"), "{e}");
        assert!(InstanceParams::with_overrides(DefectKind::Bulge, &json!({"defect_type": "crack"})).is_err());
        assert!(InstanceParams::with_overrides(DefectKind::Delamination, &json!({"n_fine": 3})).is_err());
    }

    #[test]
    fn seeds_follow_the_global_index() {
        let c = JobConfig::from_json(
            r#"{"base_seed": 40, "defects": [
                {"type": "crack", "count": 2},
                {"type": "delamination", "seeds": [7]},
                {"type": "bulge"}]}"#,
            "job",
        )
        .unwrap();
        let seeds: Vec<_> = c.plan().unwrap().iter().map(|i| (i.stem(), i.seed)).collect();
        assert_eq!(
            seeds,
            vec![
                ("crack_000040".into(), 40),
                ("crack_000041".into(), 41),
                ("delamination_000007".into(), 7),
                ("bulge_000043".into(), 43)
            ]
        );
    }

    #[test]
    fn seed_count_mismatch_and_duplicates_fail() {
        let c = JobConfig::from_json(r#"{"defects": [{"type": "crack", "count": 2, "seeds": [1]}]}"#, "job").unwrap();
        assert!(c.plan().is_err());
        let c = JobConfig::from_json(r#"{"defects": [{"type": "crack", "seeds": [1, 1]}]}"#, "job").unwrap();
        assert!(c.plan().is_err());
        assert!(JobConfig::from_json(r#"{"defects": [], "sead": 1}"#, "job").is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DefectKind::ALL {
            assert_eq!(DefectKind::from_name(k.name()), Some(k));
            assert_eq!(serde_json::to_value(k).unwrap(), json!(k.name()));
        }
    }
}
