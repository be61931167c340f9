//! `occlupart`: divide a captured scene into regions, compute visibility masks, render with
//! culling and compare against baseline partitioners.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use nalgebra::Vector3;
use occlupart::pipeline::compare_baselines;
use occlupart::sfm::{load_colmap_text, write_colmap_text, SCENE_SCHEMA};
use occlupart::splat::{load_ply, rasterize, save_ply, RasterConfig};
use occlupart::svg::{division_svg, panels_svg};
use occlupart::synth::{campus_plan, generate_scene_with, two_room_plan, FloorPlan, SynthConfig, PLAN_SCHEMA};
use occlupart::visibility::{compute_all_masks, render_culled};
use occlupart::{divide, Camera, CameraId, Error, GaussianScene, MaskSet, PipelineConfig, SceneDivision, SceneModel};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "occlupart", version, about = "Occlusion-aware scene division and region-based visibility culling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic indoor fixture with ground truth.
    Gen(GenArgs),
    /// Divide a scene into regions.
    Divide(DivideArgs),
    /// Compute whole-region and sub-region visibility masks.
    Masks(MasksArgs),
    /// Render a view with region-based culling.
    Render(RenderArgs),
    /// Compare our division with the grid and position k-means partitioners.
    Baselines(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    TwoRoom,
    Campus,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "two-room")]
    fixture: Fixture,
    /// Floor plan JSON to use instead of a built-in fixture.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    cams_per_room: Option<usize>,
    #[arg(long)]
    pts_per_room: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Overrides for [`PipelineConfig`]; unset flags keep the loaded or default value.
#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON file holding a full or partial pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    initial_k: Option<usize>,
    #[arg(long)]
    sigma_c: Option<f64>,
    #[arg(long)]
    min_cluster_floor: Option<usize>,
    #[arg(long)]
    max_recursion: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pe_frequencies: Option<usize>,
    #[arg(long)]
    filter_order: Option<usize>,
    #[arg(long)]
    tau_ext: Option<f64>,
    #[arg(long)]
    fov_margin_deg: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Mask render size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size)]
    render_size: Option<[usize; 2]>,
    #[arg(long)]
    svm_lambda: Option<f64>,
    #[arg(long)]
    svm_iterations: Option<usize>,
    #[arg(long)]
    proximity: Option<f64>,
}

#[derive(Args)]
struct DivideArgs {
    /// COLMAP text directory, scene JSON or floor-plan JSON.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MasksArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    division: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    division: PathBuf,
    #[arg(long)]
    masks: PathBuf,
    /// A camera id from the division, or `x,y,z,tx,ty,tz` for a view from x,y,z towards tx,ty,tz.
    #[arg(long)]
    camera: String,
    /// Output size as WIDTHxHEIGHT; defaults to the camera's image size.
    #[arg(long, value_parser = parse_size)]
    size: Option<[usize; 2]>,
    /// Focal length in pixels for a look-at camera.
    #[arg(long, default_value_t = 128.0)]
    focal: f64,
    /// Also render the full scene and report the difference.
    #[arg(long)]
    compare_full: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// COLMAP text directory, scene JSON or floor-plan JSON.
    #[arg(long)]
    input: PathBuf,
    /// Ground-truth JSON written by `gen`, for room-assignment accuracy.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

fn parse_size(s: &str) -> std::result::Result<[usize; 2], String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok([w, h])
}

fn format_error(file: &str, message: impl Into<String>) -> Error {
    Error::Format {
        file: file.into(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| {
        Error::Io {
            path: path.into(),
            source,
        }
        .into()
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|source| {
        Error::Io {
            path: path.into(),
            source,
        }
        .into()
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| {
        Error::Io {
            path: path.into(),
            source,
        }
        .into()
    })
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content hashes keyed by file name, so outputs do not depend on where inputs live.
#[derive(Default)]
struct Inputs(BTreeMap<String, String>);

impl Inputs {
    fn add(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = read(path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.0.insert(name, sha256(&bytes));
        Ok(bytes)
    }

    fn provenance(&self, cfg: &PipelineConfig) -> Value {
        json!({
            "tool": format!("occlupart {}", env!("CARGO_PKG_VERSION")),
            "config": cfg.to_value(),
            "input_sha256": self.0,
        })
    }
}

impl ConfigArgs {
    fn resolve(&self, base: PipelineConfig) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = read(path)?;
                serde_json::from_slice(&text).map_err(|e| format_error("config", e.to_string()))?
            }
            None => base,
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field {
                    cfg.$field = v;
                })*
            };
        }
        set!(
            initial_k,
            sigma_c,
            min_cluster_floor,
            max_recursion,
            seed,
            pe_frequencies,
            filter_order,
            tau_ext,
            fov_margin_deg,
            threshold,
            render_size,
            svm_lambda,
            svm_iterations,
            proximity
        );
        Ok(cfg)
    }
}

struct LoadedModel {
    model: SceneModel,
    camera_room: Option<BTreeMap<CameraId, usize>>,
    inputs: Inputs,
}

fn load_model(path: &Path) -> Result<LoadedModel> {
    let mut inputs = Inputs::default();
    if path.is_dir() {
        let model = load_colmap_text(path)?;
        for name in ["cameras.txt", "images.txt", "points3D.txt"] {
            inputs.add(&path.join(name))?;
        }
        return Ok(LoadedModel {
            model,
            camera_room: None,
            inputs,
        });
    }
    let bytes = inputs.add(path)?;
    let text = String::from_utf8(bytes).map_err(|_| format_error("input", "not UTF-8"))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format_error("input", e.to_string()))?;
    match value.get("schema").and_then(Value::as_str) {
        Some(s) if s == SCENE_SCHEMA => Ok(LoadedModel {
            model: SceneModel::from_json(&text)?,
            camera_room: None,
            inputs,
        }),
        Some(s) if s == PLAN_SCHEMA => {
            let plan = FloorPlan::from_json(&text)?;
            let scene = generate_scene_with(
                &plan,
                &SynthConfig {
                    seed: plan.seed,
                    ..SynthConfig::default()
                },
            )?;
            Ok(LoadedModel {
                model: scene.model,
                camera_room: Some(scene.truth.camera_room),
                inputs,
            })
        }
        other => Err(format_error("input", format!("unrecognized schema {other:?}")).into()),
    }
}

fn load_truth(path: &Path, inputs: &mut Inputs) -> Result<BTreeMap<CameraId, usize>> {
    let bytes = inputs.add(path)?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| format_error("truth", e.to_string()))?;
    let rooms = value.get("camera_room").ok_or_else(|| format_error("truth", "missing `camera_room`"))?;
    Ok(serde_json::from_value(rooms.clone()).map_err(|e| format_error("truth", e.to_string()))?)
}

fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    s
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let plan = match &args.plan {
        Some(path) => FloorPlan::load(path)?,
        None => match args.fixture {
            Fixture::TwoRoom => two_room_plan(args.seed),
            Fixture::Campus => campus_plan(args.seed),
        },
    };
    let mut cfg = match args.fixture {
        Fixture::TwoRoom if args.plan.is_none() => SynthConfig::two_room(args.seed),
        _ => SynthConfig {
            seed: args.seed,
            ..SynthConfig::default()
        },
    };
    if let Some(n) = args.cams_per_room {
        cfg.cams_per_room = n;
    }
    if let Some(n) = args.pts_per_room {
        cfg.pts_per_room = n;
    }
    let scene = generate_scene_with(&plan, &cfg)?;
    create_dir(&args.out)?;
    plan.save(&args.out.join("plan.json"))?;
    scene.model.save_json(&args.out.join("scene.json"))?;
    let sparse = args.out.join("sparse");
    create_dir(&sparse)?;
    write_colmap_text(&scene.model, &sparse)?;
    save_ply(&scene.gaussians, &args.out.join("scene.ply"))?;
    let truth = json!({
        "schema": "occlupart-truth/1",
        "camera_room": scene.truth.camera_room,
        "point_room": scene.truth.point_room,
        "gaussian_room": scene.truth.gaussian_room,
    });
    write(&args.out.join("truth.json"), to_pretty(&truth))?;
    println!(
        "generated {} cameras, {} points, {} Gaussians in {}",
        scene.model.cameras().len(),
        scene.model.points().len(),
        scene.gaussians.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_divide(args: &DivideArgs) -> Result<()> {
    let cfg = args.config.resolve(PipelineConfig::default())?;
    let loaded = load_model(&args.input)?;
    let outcome = divide(&loaded.model, &cfg)?;
    if outcome.refinement.warning {
        warn!("refinement stopped with clusters outside the target size range");
    }
    let division = &outcome.division;
    create_dir(&args.out)?;
    division.save_json(&args.out.join("division.json"), &loaded.inputs.provenance(&cfg))?;
    write(&args.out.join("division.svg"), division_svg(division, "occlusion-aware division"))?;
    let counts: Vec<usize> = division.regions.iter().map(|r| r.camera_ids.len()).collect();
    println!("{} regions, cameras per region {counts:?}", division.regions.len());
    Ok(())
}

/// Cameras from a division, stripped of observations so they form a model on their own.
fn division_model(division: &SceneDivision) -> Result<SceneModel> {
    let cameras: Vec<Camera> = division
        .cameras
        .iter()
        .map(|c| Camera {
            observed_points: Default::default(),
            ..c.clone()
        })
        .collect();
    Ok(SceneModel::new(cameras, BTreeMap::new(), Some(division.up_axis))?)
}

fn stored_config(provenance: &Value) -> Result<PipelineConfig> {
    match provenance.get("config") {
        Some(v) => Ok(serde_json::from_value(v.clone()).map_err(|e| format_error("division", e.to_string()))?),
        None => Ok(PipelineConfig::default()),
    }
}

fn cmd_masks(args: &MasksArgs) -> Result<()> {
    let mut inputs = Inputs::default();
    inputs.add(&args.division)?;
    inputs.add(&args.scene)?;
    let (division, provenance) = SceneDivision::load_json(&args.division)?;
    let cfg = args.config.resolve(stored_config(&provenance)?)?;
    let scene: GaussianScene = load_ply(&args.scene)?;
    let model = division_model(&division)?;
    let masks = compute_all_masks(&scene, &model, &division, &cfg.mask())?;
    create_dir(&args.out)?;
    masks.save(&args.out.join("masks.bin"))?;
    let n = masks.n_gaussians;
    let entries: Vec<Value> = masks
        .masks
        .iter()
        .map(|m| {
            let count = m.count();
            json!({
                "region": m.region_id,
                "sub_region": m.sub_region,
                "visible": count,
                "reduction": if n == 0 { 0.0 } else { 1.0 - count as f64 / n as f64 },
            })
        })
        .collect();
    let report = json!({
        "schema": "occlupart-mask-report/1",
        "provenance": inputs.provenance(&cfg),
        "n_gaussians": n,
        "masks": entries,
    });
    write(&args.out.join("report.json"), to_pretty(&report))?;
    println!("{} masks over {n} Gaussians", masks.masks.len());
    Ok(())
}

fn parse_camera(spec: &str, division: &SceneDivision, focal: f64, size: Option<[usize; 2]>) -> Result<Camera> {
    if let Ok(id) = spec.trim().parse::<CameraId>() {
        return Ok(division.camera(id)?.clone());
    }
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format_error("camera spec", format!("`{spec}`: {e}")))?;
    if v.len() != 6 {
        return Err(format_error("camera spec", format!("`{spec}`: expected an id or 6 numbers")).into());
    }
    let eye = Vector3::new(v[0], v[1], v[2]);
    let forward = Vector3::new(v[3], v[4], v[5]) - eye;
    let up = division.up_axis;
    if forward.norm() == 0.0 || forward.cross(&up).norm() < 1e-9 * forward.norm() {
        return Err(format_error("camera spec", format!("`{spec}`: view direction is zero or parallel to up")).into());
    }
    if !(focal > 0.0) {
        return Err(format_error("camera spec", "focal must be positive").into());
    }
    let [w, h] = size.unwrap_or([256, 256]);
    Ok(Camera::looking(u32::MAX, eye, forward, up, focal, [w as u32, h as u32]))
}

fn write_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().with_context(|| format!("writing {}", path.display()))?;
    writer.write_image_data(rgb).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let mut inputs = Inputs::default();
    for p in [&args.scene, &args.division, &args.masks] {
        inputs.add(p)?;
    }
    let (division, provenance) = SceneDivision::load_json(&args.division)?;
    let cfg = stored_config(&provenance)?;
    let scene: GaussianScene = load_ply(&args.scene)?;
    let masks = MaskSet::load(&args.masks)?;
    if masks.n_gaussians != scene.len() {
        return Err(Error::Consistency(format!(
            "masks cover {} Gaussians but the scene has {}",
            masks.n_gaussians,
            scene.len()
        ))
        .into());
    }
    let cam = parse_camera(&args.camera, &division, args.focal, args.size)?;
    let [w, h] = args.size.unwrap_or([cam.image_size[0] as usize, cam.image_size[1] as usize]);
    let raster = RasterConfig::default();
    let culled = render_culled(&scene, &division, &masks, &cam, (w, h), &raster);
    create_dir(&args.out)?;
    write_png(&args.out.join("culled.png"), w, h, &culled.result.to_rgb8())?;
    let mut stats = json!({
        "schema": "occlupart-render/1",
        "provenance": inputs.provenance(&cfg),
        "camera": args.camera,
        "size": [w, h],
        "region": culled.region,
        "mask": culled.sub_region,
        "n_gaussians": scene.len(),
        "rasterized": culled.result.rasterized,
        "culled": culled.culled,
    });
    if args.compare_full {
        let full = rasterize(&scene, &cam, w, h);
        write_png(&args.out.join("full.png"), w, h, &full.to_rgb8())?;
        let diffs: Vec<f64> = full.image.iter().zip(&culled.result.image).map(|(a, b)| (a - b).abs()).collect();
        let max = diffs.iter().copied().fold(0.0, f64::max);
        let mean = if diffs.is_empty() { 0.0 } else { diffs.iter().sum::<f64>() / diffs.len() as f64 };
        stats["compare_full"] = json!({
            "max_abs_diff": max,
            "mean_abs_diff": mean,
            "max_abs_diff_255": max * 255.0,
            "rasterized_full": full.rasterized,
            "culled_ratio": if scene.is_empty() { 0.0 } else { culled.culled as f64 / scene.len() as f64 },
        });
        println!("max diff {:.3}/255, {} of {} Gaussians culled", max * 255.0, culled.culled, scene.len());
    } else {
        println!("{} of {} Gaussians culled", culled.culled, scene.len());
    }
    write(&args.out.join("render.json"), to_pretty(&stats))?;
    Ok(())
}

fn cmd_baselines(args: &BaselineArgs) -> Result<()> {
    let cfg = args.config.resolve(PipelineConfig::default())?;
    let mut loaded = load_model(&args.input)?;
    if let Some(path) = &args.truth {
        loaded.camera_room = Some(load_truth(path, &mut loaded.inputs)?);
    }
    let cmp = compare_baselines(&loaded.model, &cfg, loaded.camera_room.as_ref())?;
    create_dir(&args.out)?;
    let report = json!({
        "schema": "occlupart-baselines/1",
        "provenance": loaded.inputs.provenance(&cfg),
        "methods": cmp.reports,
    });
    write(&args.out.join("comparison.json"), to_pretty(&report))?;
    let panels: Vec<(String, &SceneDivision)> = cmp.divisions.iter().map(|(n, d)| (n.clone(), d)).collect();
    write(&args.out.join("baselines.svg"), panels_svg(&panels))?;
    for r in &cmp.reports {
        let acc = r.room_accuracy.map(|a| format!(", room accuracy {a:.3}")).unwrap_or_default();
        println!("{}: {} regions, extended ratio {:.3}{acc}", r.method, r.regions, r.extended_ratio);
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) => e.exit_code() as u8,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Divide(a) => cmd_divide(a),
        Command::Masks(a) => cmd_masks(a),
        Command::Render(a) => cmd_render(a),
        Command::Baselines(a) => cmd_baselines(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
