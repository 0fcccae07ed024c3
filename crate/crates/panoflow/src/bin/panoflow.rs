//! Command-line surface over the panoflow library: distortion augmentation,
//! flow estimation, evaluation, visualization, cubemap stitching, and
//! synthetic dataset generation.
//!
//! Exit codes: 0 ok, 2 usage, 3 contract, 4 format, 5 I/O or lookup,
//! 6 numeric. Every subcommand takes `--json` for machine-readable output,
//! `--threads N` to cap parallelism, and `--config FILE` for JSON defaults
//! (flags override the config, the config overrides built-in defaults).
//! Outputs are written via a temporary file and renamed into place, so no
//! partial output survives an error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde::Deserialize;
use serde_json::json;

use panoflow::backend::{BuiltinMatcher, EstimatorBackend, FileBackend};
use panoflow::cfe::{cyclic_estimate, CfeMode};
use panoflow::distortion::{
    distort_flow, distort_image, DistortionModel, DistortionParams, DistortionVariant, DEFAULT_K2,
    DEFAULT_K4, DEFAULT_K6,
};
use panoflow::flow::{
    epe, load_png, read_flo, save_png, visualize_flow, write_flo, EpeStats, EquirectImage,
    EvalReport, FlowField,
};
use panoflow::spherical::{convert_to_360, cubemap_to_equirect, CubeFaceSet};
use panoflow::synthetic::{gen_dataset, DatasetManifest};
use panoflow::Error;

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "panoflow",
    version,
    about = "Panoramic optical flow toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a radial distortion jointly to frames and flow fields
    Distort(DistortArgs),
    /// Estimate wrapped 360° flow between two panorama frames
    Estimate(EstimateArgs),
    /// Compare predicted flows against dataset ground truth, per condition
    Evaluate(EvaluateArgs),
    /// Render a flow field to a color-wheel PNG
    Visualize(VisualizeArgs),
    /// Stitch six cube faces into an equirectangular panorama
    Cube2erp(Cube2ErpArgs),
    /// Generate a synthetic dataset from a JSON manifest
    Synth(SynthArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Clone)]
struct Common {
    /// Emit machine-readable JSON on stdout
    #[arg(long)]
    json: bool,
    /// Cap the rayon thread pool at N threads
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// JSON config file supplying defaults; flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

/// Keys accepted in a `--config` file. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    threads: Option<usize>,
    json: Option<bool>,
    backend: Option<BackendKind>,
    cfe: Option<String>,
    circular: Option<bool>,
    levels: Option<usize>,
    radius: Option<u32>,
    cost_threshold: Option<f32>,
    saturation_threshold: Option<f64>,
    k2: Option<f64>,
    k4: Option<f64>,
    k6: Option<f64>,
    variant: Option<VariantArg>,
}

struct Resolved {
    json: bool,
    config: FileConfig,
}

fn resolve_common(common: &Common) -> Result<Resolved, CliError> {
    let config: FileConfig = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::format(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    if let Some(n) = common.threads.or(config.threads) {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Ignore the error if a pool already exists (e.g. repeated in-process
        // invocation from tests); determinism does not depend on pool size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(Resolved {
        json: common.json || config.json.unwrap_or(false),
        config,
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.cmd {
        Cmd::Distort(a) => cmd_distort(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Visualize(a) => cmd_visualize(a),
        Cmd::Cube2erp(a) => cmd_cube2erp(a),
        Cmd::Synth(a) => cmd_synth(a),
    }
}

/// Saves a PNG atomically: write to a hidden temp sibling, then rename.
fn save_png_atomic(image: &EquirectImage, path: &Path) -> Result<(), Error> {
    let tmp = tmp_sibling(path)?;
    save_png(image, &tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_flo_atomic(flow: &FlowField, path: &Path) -> Result<(), Error> {
    let tmp = tmp_sibling(path)?;
    write_flo(flow, &tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_text_atomic(text: &str, path: &Path) -> Result<(), Error> {
    let tmp = tmp_sibling(path)?;
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Temp path in the same directory, keeping the extension so format-by-name
/// encoders still work.
fn tmp_sibling(path: &Path) -> Result<PathBuf, Error> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::contract(format!("output path {} has no file name", path.display())))?;
    Ok(path.with_file_name(format!(".tmp-{}", name.to_string_lossy())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BackendKind {
    Builtin,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantArg {
    StandardRadial,
    OriginScaled,
}

impl From<VariantArg> for DistortionVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::StandardRadial => DistortionVariant::StandardRadial,
            VariantArg::OriginScaled => DistortionVariant::OriginScaled,
        }
    }
}

// ---------------------------------------------------------------------------
// distort

#[derive(Args)]
struct DistortArgs {
    /// Input frame PNGs; each frame is paired with the flow at the same index
    #[arg(long = "frame", value_name = "PNG", required = true)]
    frames: Vec<PathBuf>,
    /// Input `.flo` files; count must match the frames when given
    #[arg(long = "flow", value_name = "FLO")]
    flows: Vec<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Quadratic radial coefficient
    #[arg(long)]
    k2: Option<f64>,
    /// Quartic radial coefficient
    #[arg(long)]
    k4: Option<f64>,
    /// Sextic radial coefficient
    #[arg(long)]
    k6: Option<f64>,
    /// Distortion center x (defaults to the image midpoint)
    #[arg(long)]
    center_x: Option<f64>,
    /// Distortion center y (defaults to the image midpoint)
    #[arg(long)]
    center_y: Option<f64>,
    /// Distortion variant
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// JSON sidecar with {center, k2, k4, k6, variant}; flags override it
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Sample one random model per pair from this seed instead of fixed flags
    #[arg(long, value_name = "SEED")]
    sample_seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

fn cmd_distort(args: DistortArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    if !args.flows.is_empty() && args.flows.len() != args.frames.len() {
        return Err(Error::contract(format!(
            "{} frames but {} flows; each frame pair needs its flow",
            args.frames.len(),
            args.flows.len()
        ))
        .into());
    }

    // Load and validate everything before writing anything.
    let frames: Vec<(PathBuf, EquirectImage)> = args
        .frames
        .iter()
        .map(|p| load_png(p).map(|img| (p.clone(), img)))
        .collect::<Result<_, _>>()?;
    let flows: Vec<(PathBuf, FlowField)> = args
        .flows
        .iter()
        .map(|p| read_flo(p).map(|f| (p.clone(), f)))
        .collect::<Result<_, _>>()?;
    for (i, (fp, flow)) in flows.iter().enumerate() {
        let (ip, img) = &frames[i];
        if flow.width() != img.width() || flow.height() != img.height() {
            return Err(Error::contract(format!(
                "{} is {}x{} but {} is {}x{}",
                fp.display(),
                flow.width(),
                flow.height(),
                ip.display(),
                img.width(),
                img.height()
            ))
            .into());
        }
    }

    let sidecar: Option<DistortionParams> = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| Error::format(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let fixed_params = |w: usize, h: usize| -> DistortionParams {
        let base = sidecar.unwrap_or(DistortionParams {
            center: None,
            k2: resolved.config.k2.unwrap_or(DEFAULT_K2),
            k4: resolved.config.k4.unwrap_or(DEFAULT_K4),
            k6: resolved.config.k6.unwrap_or(DEFAULT_K6),
            variant: resolved
                .config
                .variant
                .map(Into::into)
                .unwrap_or(DistortionVariant::StandardRadial),
        });
        let center = match (args.center_x, args.center_y) {
            (Some(x), Some(y)) => Some((x, y)),
            (None, None) => base.center,
            (x, y) => Some((
                x.unwrap_or((w as f64 - 1.0) / 2.0),
                y.unwrap_or((h as f64 - 1.0) / 2.0),
            )),
        };
        DistortionParams {
            center,
            k2: args.k2.unwrap_or(base.k2),
            k4: args.k4.unwrap_or(base.k4),
            k6: args.k6.unwrap_or(base.k6),
            variant: args.variant.map(Into::into).unwrap_or(base.variant),
        }
    };

    // Build one model per pair, then run the whole computation in memory.
    let mut models = Vec::with_capacity(frames.len());
    for (i, (_, img)) in frames.iter().enumerate() {
        let (w, h) = (img.width(), img.height());
        let model = match args.sample_seed {
            Some(seed) => {
                let mut rng =
                    rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                DistortionModel::sample_augmentation(&mut rng, w, h)?
            }
            None => DistortionModel::from_params(&fixed_params(w, h), w, h)?,
        };
        models.push(model);
    }

    let mut out_images = Vec::new();
    let mut out_flows = Vec::new();
    for (i, (path, img)) in frames.iter().enumerate() {
        let distorted = distort_image(img, &models[i])?;
        out_images.push((file_name(path)?, distorted.image));
    }
    for (i, (path, flow)) in flows.iter().enumerate() {
        out_flows.push((file_name(path)?, distort_flow(flow, &models[i])?));
    }

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let mut written = Vec::new();
    for (name, img) in &out_images {
        let path = args.out_dir.join(name);
        save_png_atomic(img, &path)?;
        written.push(path);
    }
    for (name, flow) in &out_flows {
        let path = args.out_dir.join(name);
        write_flo_atomic(flow, &path)?;
        written.push(path);
    }
    let record: Vec<serde_json::Value> = models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            json!({
                "frame": file_name(&args.frames[i]).unwrap(),
                "params": m.params(),
            })
        })
        .collect();
    let record_path = args.out_dir.join("distortion.json");
    write_text_atomic(&serde_json::to_string_pretty(&record).unwrap(), &record_path)?;
    written.push(record_path);

    if resolved.json {
        println!(
            "{}",
            json!({ "written": written, "models": models.iter().map(|m| m.params()).collect::<Vec<_>>() })
        );
    } else {
        for path in &written {
            println!("wrote: {}", path.display());
        }
    }
    Ok(())
}

fn file_name(path: &Path) -> Result<String, Error> {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::contract(format!("{} has no file name", path.display())))
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Args)]
struct EstimateArgs {
    /// First frame PNG
    #[arg(long, value_name = "PNG")]
    frame1: PathBuf,
    /// Second frame PNG
    #[arg(long, value_name = "PNG")]
    frame2: PathBuf,
    /// Output `.flo` path
    #[arg(long, value_name = "FLO")]
    out: PathBuf,
    /// Estimator backend
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    /// Cyclic estimation mode: naive, default, double, half-zero, half-same
    #[arg(long, value_name = "MODE")]
    cfe: Option<String>,
    /// Treat the horizontal axis as circular (builtin backend)
    #[arg(long)]
    circular: bool,
    /// Pyramid levels (builtin backend)
    #[arg(long)]
    levels: Option<usize>,
    /// Per-level search radius (builtin backend)
    #[arg(long)]
    radius: Option<u32>,
    /// Validity threshold as a fraction of the maximum cost (builtin backend)
    #[arg(long)]
    cost_threshold: Option<f32>,
    /// Directory of precomputed `.flo` files (file backend)
    #[arg(long, value_name = "DIR")]
    flow_dir: Option<PathBuf>,
    /// Pair identifier, resolved to `<flow-dir>/<pair-id>.flo` (file backend)
    #[arg(long)]
    pair_id: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn cmd_estimate(args: EstimateArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    let mode_str = args
        .cfe
        .clone()
        .or_else(|| resolved.config.cfe.clone())
        .unwrap_or_else(|| "default".to_string());
    let mode: CfeMode = mode_str.parse().map_err(CliError::Usage)?;
    let backend_kind = args
        .backend
        .or(resolved.config.backend)
        .unwrap_or(BackendKind::Builtin);

    let backend: Box<dyn EstimatorBackend> = match backend_kind {
        BackendKind::Builtin => {
            let mut m = BuiltinMatcher::new();
            if let Some(l) = args.levels.or(resolved.config.levels) {
                m = m.with_levels(l);
            }
            if let Some(r) = args.radius.or(resolved.config.radius) {
                m = m.with_radius(r);
            }
            if let Some(t) = args.cost_threshold.or(resolved.config.cost_threshold) {
                m = m.with_cost_threshold(t);
            }
            m = m.with_circular(args.circular || resolved.config.circular.unwrap_or(false));
            Box::new(m)
        }
        BackendKind::File => {
            let dir = args
                .flow_dir
                .clone()
                .ok_or_else(|| CliError::Usage("file backend requires --flow-dir".into()))?;
            let pair = args
                .pair_id
                .clone()
                .ok_or_else(|| CliError::Usage("file backend requires --pair-id".into()))?;
            Box::new(FileBackend::new(dir, pair))
        }
    };
    if mode.needs_split() && !backend.capabilities().has_encode_decode_split {
        return Err(CliError::Usage(format!(
            "--cfe {mode_str} needs a backend with an encode/decode split; '{}' has none \
             (use --cfe naive or --cfe double)",
            backend.name()
        )));
    }

    let i1 = load_png(&args.frame1)?;
    let i2 = load_png(&args.frame2)?;
    let start = Instant::now();
    let flow = cyclic_estimate(backend.as_ref(), &i1, &i2, mode)?;
    let seconds = start.elapsed().as_secs_f64();
    write_flo_atomic(&flow, &args.out)?;

    if resolved.json {
        println!(
            "{}",
            json!({
                "out": args.out,
                "backend": backend.name(),
                "cfe": mode_str,
                "estimate_seconds": seconds,
            })
        );
    } else {
        println!("estimate_seconds: {seconds:.6}");
        println!("wrote: {}", args.out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predictions, mirroring the dataset layout:
    /// `<pred>/<condition>/<seq>.flo` or `<pred>/<condition>/<seq>/flow_0001.flo`
    #[arg(long, value_name = "DIR")]
    pred: PathBuf,
    /// Dataset root as produced by `synth`
    #[arg(long, value_name = "DIR")]
    gt: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// Streaming pixel-count-weighted merge of EPE statistics.
#[derive(Default)]
struct StatsAccum {
    err_sum: f64,
    over1: f64,
    over3: f64,
    over5: f64,
    pixels: u64,
}

impl StatsAccum {
    fn add(&mut self, s: &EpeStats) {
        let n = s.pixel_count as f64;
        self.err_sum += s.epe_mean * n;
        self.over1 += s.px1 * n;
        self.over3 += s.px3 * n;
        self.over5 += s.px5 * n;
        self.pixels += s.pixel_count;
    }

    fn finish(&self) -> EpeStats {
        let n = self.pixels as f64;
        EpeStats {
            epe_mean: self.err_sum / n,
            px1: self.over1 / n,
            px3: self.over3 / n,
            px5: self.over5 / n,
            pixel_count: self.pixels,
        }
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    let mut accums: BTreeMap<String, StatsAccum> = BTreeMap::new();
    let mut unmatched: Vec<String> = Vec::new();

    for cond_dir in sorted_subdirs(&args.gt)? {
        let condition = file_name(&cond_dir)?;
        for seq_dir in sorted_subdirs(&cond_dir)? {
            let gt_path = seq_dir.join("flow_0001.flo");
            if !gt_path.is_file() {
                continue;
            }
            let seq = file_name(&seq_dir)?;
            let pred_path = [
                args.pred.join(&condition).join(format!("{seq}.flo")),
                args.pred.join(&condition).join(&seq).join("flow_0001.flo"),
            ]
            .into_iter()
            .find(|p| p.is_file());
            let Some(pred_path) = pred_path else {
                eprintln!("warning: no prediction for {condition}/{seq}, excluded");
                unmatched.push(format!("{condition}/{seq}"));
                continue;
            };
            let gt = convert_to_360(&read_flo(&gt_path)?)?;
            let pred = convert_to_360(&read_flo(&pred_path)?)?;
            let stats = epe(&pred, &gt, None)?;
            accums.entry(condition.clone()).or_default().add(&stats);
        }
    }

    if accums.is_empty() {
        return Err(Error::contract(format!(
            "no matched prediction/ground-truth pairs under {} and {}",
            args.pred.display(),
            args.gt.display()
        ))
        .into());
    }
    let conditions: BTreeMap<String, EpeStats> = accums
        .iter()
        .map(|(k, a)| (k.clone(), a.finish()))
        .collect();
    let report = EvalReport::from_conditions(conditions)?;

    if resolved.json {
        println!("{}", json!({ "report": report, "unmatched": unmatched }));
    } else {
        print!("{}", report.to_text_table());
    }
    Ok(())
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() && !file_name(&path)?.starts_with('.') {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// visualize

#[derive(Args)]
struct VisualizeArgs {
    /// Input `.flo` file
    #[arg(long, value_name = "FLO")]
    flow: PathBuf,
    /// Output PNG path
    #[arg(long, value_name = "PNG")]
    out: PathBuf,
    /// Magnitude that maps to full saturation; defaults to the maximum
    /// magnitude in the field (at least 1)
    #[arg(long)]
    saturation_threshold: Option<f64>,
    #[command(flatten)]
    common: Common,
}

fn cmd_visualize(args: VisualizeArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    let flow = read_flo(&args.flow)?;
    let threshold = args
        .saturation_threshold
        .or(resolved.config.saturation_threshold)
        .unwrap_or_else(|| {
            let mut max = 1.0f64;
            for i in 0..flow.u().len() {
                if flow.valid_mask()[i] {
                    let m = (flow.u()[i] as f64).hypot(flow.v()[i] as f64);
                    max = max.max(m);
                }
            }
            max
        });
    let img = visualize_flow(&flow, threshold)?;
    save_png_atomic(&img, &args.out)?;
    if resolved.json {
        println!(
            "{}",
            json!({ "out": args.out, "saturation_threshold": threshold })
        );
    } else {
        println!("wrote: {}", args.out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cube2erp

#[derive(Args)]
struct Cube2ErpArgs {
    /// Face PNGs in order front, right, back, left, up, down
    #[arg(long = "face", value_name = "PNG", num_args = 6, required = true)]
    faces: Vec<PathBuf>,
    /// Output PNG path
    #[arg(long, value_name = "PNG")]
    out: PathBuf,
    /// Output panorama width (even; height is width/2)
    #[arg(long)]
    width: usize,
    #[command(flatten)]
    common: Common,
}

fn cmd_cube2erp(args: Cube2ErpArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    let faces: Vec<EquirectImage> = args
        .faces
        .iter()
        .map(load_png)
        .collect::<Result<_, _>>()?;
    let faces = CubeFaceSet::new(faces.try_into().expect("clap enforces 6 faces"))?;
    let pano = cubemap_to_equirect(&faces, args.width)?;
    save_png_atomic(&pano, &args.out)?;
    if resolved.json {
        println!("{}", json!({ "out": args.out, "width": args.width }));
    } else {
        println!("wrote: {}", args.out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth

#[derive(Args)]
struct SynthArgs {
    /// Dataset manifest JSON: {width, scenes, rotations, conditions}
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Output dataset root
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn cmd_synth(args: SynthArgs) -> CliResult {
    let resolved = resolve_common(&args.common)?;
    let text =
        std::fs::read_to_string(&args.manifest).map_err(|e| Error::io(&args.manifest, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| Error::format(format!("{}: {e}", args.manifest.display())))?;
    let sequences = gen_dataset(&manifest, &args.out)?;
    if resolved.json {
        let rows: Vec<serde_json::Value> = sequences
            .iter()
            .map(|s| {
                json!({
                    "condition": s.condition.name(),
                    "seq_id": s.seq_id,
                    "dir": s.dir,
                })
            })
            .collect();
        println!("{}", json!({ "root": args.out, "sequences": rows }));
    } else {
        for s in &sequences {
            println!("generated: {}", s.dir.display());
        }
    }
    Ok(())
}
