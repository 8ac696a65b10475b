use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use karyoseg::classify::ScoresFile;
use karyoseg::synth::{generate, SynthSpec};
use karyoseg::watershed::{Method, SeedSet};
use karyoseg::PipelineConfig;
use serde_json::{json, Value};

use crate::error::{ServiceError, ServiceResult};
use crate::store::{read_json, write_atomic, write_json, Session};

#[derive(Debug, Parser)]
#[command(name = "karyoseg", version, about = "Metaphase chromosome segmentation, separation and karyogram assignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Karyotype,
    Overlap,
    Crossing,
    Singleton,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract and screen the objects of a metaphase image into a session directory.
    Segment {
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a skeleton and branch-point overlay for a crop.
    Inspect {
        /// Crop image inside a session, e.g. `out/crops/crop_003.png`.
        crop: PathBuf,
        /// Overlay path; defaults to `{crop}_skeleton.png` next to the crop.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded watershed separation of a crop.
    Separate {
        crop: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        method: Option<u8>,
    },
    /// Assign classes from a scores file (or the geometric scorer when omitted).
    Classify {
        dir: PathBuf,
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long)]
        distribute: bool,
    },
    /// Render a synthetic metaphase with ground truth.
    Synth {
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Crossing angle in degrees for the overlap and crossing presets.
        #[arg(long, default_value_t = 60.0)]
        angle: f64,
        /// Bend in degrees for the singleton preset.
        #[arg(long, default_value_t = 0.0)]
        bend: f64,
        #[arg(long, default_value_t = 23)]
        classes: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API over a data directory.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "KARYOSEG_DATA")]
        data: PathBuf,
    },
}

/// Session directory and crop id of `{session}/crops/{id}.png`.
fn locate_crop(path: &Path) -> ServiceResult<(PathBuf, String)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| ServiceError::invalid(format!("not a crop path: {}", path.display())))?;
    let session = path
        .parent()
        .and_then(Path::parent)
        .ok_or_else(|| ServiceError::invalid(format!("crop {} is not inside a session", path.display())))?;
    let session = if session.as_os_str().is_empty() { Path::new(".") } else { session };
    Ok((session.to_path_buf(), stem.to_string()))
}

fn read_bytes(path: &Path) -> ServiceResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| ServiceError::invalid(format!("{}: {e}", path.display())))
}

pub fn segment(image: &Path, out: &Path, config: Option<&Path>) -> ServiceResult<Value> {
    let config: PipelineConfig = match config {
        Some(p) => serde_json::from_slice(&read_bytes(p)?)?,
        None => PipelineConfig::default(),
    };
    let bytes = read_bytes(image)?;
    if Session::exists(out) {
        return Err(ServiceError::conflict(format!("{} already holds a session", out.display())));
    }
    let s = Session::create(out, &bytes, config)?;
    let suspect: Vec<&str> = s
        .info
        .crops
        .iter()
        .filter(|c| c.kind == karyoseg::CropKind::SuspectMulti)
        .map(|c| c.id.as_str())
        .collect();
    Ok(json!({
        "session": s.info.id,
        "dir": out,
        "crops": s.info.crops.len(),
        "suspect_multi": suspect,
        "error": s.info.error,
    }))
}

pub fn inspect(crop: &Path, out: Option<&Path>) -> ServiceResult<Value> {
    let (dir, cid) = locate_crop(crop)?;
    let s = Session::open(&dir)?;
    let (analysis, png) = s.inspect(&cid)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("crops").join(format!("{cid}_skeleton.png")));
    write_atomic(&out, &png)?;
    Ok(json!({
        "crop": cid,
        "kind": analysis.kind(),
        "skeleton_pixels": analysis.skeleton.mask.count(),
        "branch_points": analysis.branch_points,
        "overlay": out,
    }))
}

pub fn separate(crop: &Path, seeds: &Path, method: Option<u8>) -> ServiceResult<Value> {
    let (dir, cid) = locate_crop(crop)?;
    let seeds: SeedSet = serde_json::from_slice(&read_bytes(seeds)?)?;
    let method = method.map(Method::try_from).transpose().map_err(ServiceError::invalid)?;
    let mut s = Session::open(&dir)?;
    s.set_seeds(&cid, &seeds)?;
    let parts = s.separate(&cid, method)?;
    Ok(json!({
        "crop": cid,
        "separated": parts.iter().map(|p| &p.meta).collect::<Vec<_>>(),
    }))
}

pub fn classify(dir: &Path, scores: Option<&Path>, distribute: bool) -> ServiceResult<Value> {
    let file: Option<ScoresFile> = match scores {
        Some(p) => Some(serde_json::from_slice(&read_bytes(p)?)?),
        None => None,
    };
    let mut s = Session::open(dir)?;
    let outcome = s.classify(file.as_ref(), distribute)?;
    let k = s.karyogram()?;
    Ok(json!({
        "items": outcome.assignment.len(),
        "moves": outcome.distribution.as_ref().map_or(0, |d| d.moves.len()),
        "counts": k.rows.iter().map(|r| r.items.len()).collect::<Vec<_>>(),
        "residuals": k.residuals,
    }))
}

pub fn synth_spec(preset: Preset, seed: u64, angle: f64, bend: f64, classes: u32) -> SynthSpec {
    match preset {
        Preset::Karyotype => SynthSpec::karyotype(seed, classes),
        Preset::Overlap => SynthSpec::karyotype_with_overlap(seed, classes, angle),
        Preset::Crossing => SynthSpec::crossing_pair(seed, angle),
        Preset::Singleton => SynthSpec::singleton(seed, bend),
    }
}

/// Writes `metaphase.png`, `truth.json`, `spec.json` and one local mask per
/// object under `masks/`.
pub fn synth(spec: &SynthSpec, out: &Path) -> ServiceResult<Value> {
    let gt = generate(spec)?;
    write_atomic(&out.join("metaphase.png"), &karyoseg::imgcore::encode_png(&gt.metaphase)?)?;
    for (i, o) in gt.objects.iter().enumerate() {
        let png = karyoseg::imgcore::encode_png(&o.mask.to_gray(255, 0))?;
        write_atomic(&out.join("masks").join(format!("obj_{i:03}.png")), &png)?;
    }
    write_json(&out.join("truth.json"), &gt.manifest())?;
    write_json(&out.join("spec.json"), spec)?;
    Ok(json!({
        "objects": gt.objects.len(),
        "crossings": gt.crossings.len(),
        "dir": out,
    }))
}

pub fn run(cli: Cli) -> ServiceResult<Value> {
    match cli.command {
        Command::Segment { image, out, config } => segment(&image, &out, config.as_deref()),
        Command::Inspect { crop, out } => inspect(&crop, out.as_deref()),
        Command::Separate { crop, seeds, method } => separate(&crop, &seeds, method),
        Command::Classify { dir, scores, distribute } => classify(&dir, scores.as_deref(), distribute),
        Command::Synth { spec, preset, seed, angle, bend, classes, out } => {
            let spec = match (spec, preset) {
                (Some(p), _) => read_json(&p)?,
                (None, Some(preset)) => synth_spec(preset, seed, angle, bend, classes),
                (None, None) => return Err(ServiceError::invalid("synth needs --spec or --preset")),
            };
            synth(&spec, &out)
        }
        Command::Serve { port, host, data } => {
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{host}:{port}, data in {}", data.display());
            rt.block_on(crate::http::serve(data, &host, port))?;
            Ok(Value::Null)
        }
    }
}
