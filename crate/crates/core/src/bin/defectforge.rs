use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use defectforge::io::{
    generate_instance, import_mesh, preset, presets, run_job, write_instance, DefectKind, InstanceParams, JobConfig,
    MeshFormat, SlabSpec,
};
use defectforge::{Error, Result};

#[derive(Parser)]
#[command(name = "defectforge", version, about = "Generates closed meshes of cast-metal surface defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a JSON job configuration.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the base seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Replaces the output directory of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<MeshFormat>,
    },
    /// Checks that a mesh file is a closed, oriented, self-intersection free surface.
    Validate { mesh: PathBuf },
    /// Generates one defect type or preset with its defaults.
    Demo {
        /// Defect type, preset name, or `all` for every preset.
        #[arg(long = "type")]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "demo")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MeshFormat::Obj)]
        format: MeshFormat,
        /// Imprints the defect into a slab.
        #[arg(long)]
        slab: bool,
    },
}

fn generate(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, format: Option<MeshFormat>) -> Result<bool> {
    let mut job = JobConfig::load(&config)?;
    if let Some(s) = seed {
        job.base_seed = s;
    }
    if let Some(o) = out {
        job.output_dir = o;
    }
    if let Some(f) = format {
        job.format = f;
    }
    let report = run_job(&job)?;
    for i in &report.instances {
        match (&i.error, &i.mesh_file) {
            (Some(e), _) => eprintln!("FAIL {}_{:06}: {e}", i.defect_type, i.seed),
            (None, Some(m)) => println!("ok   {}", m.display()),
            (None, None) => {}
        }
    }
    let report_path = job.output_dir.join("job_report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&report_path, text + "\n")?;
    println!("{} instances, {} failed", report.instances.len(), report.failures());
    Ok(report.failures() == 0)
}

fn validate(mesh: PathBuf) -> Result<bool> {
    let m = import_mesh(&mesh)?;
    let report = m.validate();
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?);
    if let Ok(v) = m.signed_volume() {
        println!("volume {v}");
    }
    println!("{}", if report.is_valid() { "valid" } else { "invalid" });
    Ok(report.is_valid())
}

fn demo(kind: &str, seed: u64, out: PathBuf, format: MeshFormat, slab: bool) -> Result<bool> {
    let targets: Vec<(String, InstanceParams)> = if kind == "all" {
        presets()
            .iter()
            .map(|p| Ok((p.name.to_string(), p.params()?)))
            .collect::<Result<_>>()?
    } else if let Some(k) = DefectKind::from_name(kind) {
        vec![(k.name().to_string(), InstanceParams::with_overrides(k, &serde_json::Value::Null)?)]
    } else {
        let p = preset(kind)?;
        vec![(p.name.to_string(), p.params()?)]
    };
    std::fs::create_dir_all(&out)?;
    let slab = slab.then(SlabSpec::default);
    let mut ok = true;
    for (name, params) in targets {
        let stem = format!("{name}_{seed:06}");
        match generate_instance(&params, seed).and_then(|g| write_instance(&g, slab.as_ref(), format, &out, &stem)) {
            Ok((m, _, s)) => println!("ok   {} V={} F={} volume={:.6}", m.display(), s.vertices, s.triangles, s.volume),
            Err(e) => {
                eprintln!("FAIL {stem}: {e}");
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            config,
            seed,
            out,
            format,
        } => generate(config, seed, out, format),
        Command::Validate { mesh } => validate(mesh),
        Command::Demo {
            kind,
            seed,
            out,
            format,
            slab,
        } => demo(&kind, seed, out, format, slab),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
