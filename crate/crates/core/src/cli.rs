//! The `simtreels` command line: one subcommand per pipeline stage plus an
//! end-to-end `pipeline` runner.
//!
//! Every artifact gets a `<file>.meta.json` sidecar recording the stage,
//! seed and configuration hash. Errors are printed as one line,
//! `error[<kind>]: <message>`, and map to distinct exit codes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::{json, Value};

use crate::analysis::{
    density_profile, density_stats, occlusion_map, summary_report, write_occlusion_csv, write_profile_csv, Axis,
    StandRuns,
};
use crate::cloud::io::{read_cloud, write_cloud};
use crate::cloud::{params_hash, LabelledCloud};
use crate::config::{AerialConfig, PipelineConfig, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::presets;
use crate::scanner::{control_sample, scan_cloud, ScanParams};
use crate::sensor::SensorShape;
use crate::stand::{assemble_stand, write_placements, StandLayout};
use crate::trajectory::{read_trajectory, write_trajectory, AerialParams, GroundParams, HandheldParams};
use crate::treegen::obj::{load_obj, LabelMap};
use crate::treegen::{generate_tree, sample_mesh, TreeDefinition};

#[derive(Parser, Debug)]
#[command(name = "simtreels", version, about = "Simulated laser scans of tree stands")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Seed from the system clock, for unrepeatable runs. The seed used is
    /// printed and recorded in every sidecar.
    #[arg(long, global = true, conflicts_with = "seed")]
    clock_seed: bool,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, env = "SIMTREELS_WORKERS")]
    workers: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cloud format for outputs named by default: ply or csv.
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one tree cloud from a definition, preset or OBJ mesh.
    Tree(TreeArgs),
    /// Lay out and assemble a stand cloud.
    Stand(StandArgs),
    /// Build a sensor shape and optionally export its samples.
    Sensor(SensorArgs),
    /// Generate a trajectory and write it as pose CSV.
    Trajectory(TrajectoryArgs),
    /// Simulate a scan of a stand cloud.
    Scan(ScanArgs),
    /// Draw a uniform control sample from a stand cloud.
    Control(ControlArgs),
    /// Density and occlusion metrics.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Tabulate points, occlusion and density for a control and scans.
    Report(ReportArgs),
    /// Run every stage described by the configuration.
    Pipeline,
}

#[derive(Args, Debug)]
struct TreeArgs {
    /// Bundled tree definition.
    #[arg(long, conflicts_with_all = ["definition", "obj", "name"])]
    preset: Option<String>,
    /// Tree definition TOML file.
    #[arg(long, conflicts_with_all = ["obj", "name"])]
    definition: Option<PathBuf>,
    /// OBJ mesh to sample instead of growing a tree.
    #[arg(long, conflicts_with = "name")]
    obj: Option<PathBuf>,
    /// TOML table mapping OBJ group names to levels 0-3.
    #[arg(long, requires = "obj")]
    labels: Option<PathBuf>,
    /// Tree defined in the configuration.
    #[arg(long)]
    name: Option<String>,
    /// Surface sample spacing in metres.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StandArgs {
    /// Bundled stand layout (orchard-6x10, forest-min6).
    #[arg(long)]
    preset: Option<String>,
    /// Bundled tree planted in a preset stand.
    #[arg(long, default_value = "avocado")]
    tree: String,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    trees_per_row: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SensorArgs {
    /// Bundled sensor or a sensor named in the configuration.
    #[arg(long, conflicts_with_all = ["fov", "res"])]
    preset: Option<String>,
    /// Fan field of view, degrees.
    #[arg(long, requires = "res")]
    fov: Option<f64>,
    /// Angular resolution within the fan (azimuth for spherical), degrees.
    #[arg(long)]
    res: Option<f64>,
    /// Maximum range, metres.
    #[arg(long)]
    range: Option<f64>,
    /// Range step between samples, metres.
    #[arg(long)]
    step: Option<f64>,
    /// Number of planes for a multi-plane sensor.
    #[arg(long, requires = "vfov")]
    planes: Option<usize>,
    /// Spread between the outer planes, degrees.
    #[arg(long)]
    vfov: Option<f64>,
    /// Elevation resolution; makes the sensor spherical.
    #[arg(long, conflicts_with_all = ["fov", "planes"])]
    res_el: Option<f64>,
    /// Write every sample as a cloud (format from the extension).
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrajectoryArgs {
    /// handheld-loop, ground-rows or aerial-grid with default parameters.
    #[arg(long, conflicts_with = "name")]
    kind: Option<String>,
    /// Trajectory named in the configuration.
    #[arg(long)]
    name: Option<String>,
    /// Stand cloud whose footprint an aerial grid should cover.
    #[arg(long)]
    stand: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    stand: PathBuf,
    /// Pose CSV.
    #[arg(long)]
    trajectory: PathBuf,
    /// Sensor named in the configuration, or a bundled sensor.
    #[arg(long, default_value = "plane-270")]
    sensor: String,
    #[arg(long)]
    search_radius: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Keep only the first return of each stand point.
    #[arg(long)]
    dedupe: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ControlArgs {
    #[arg(long)]
    stand: PathBuf,
    /// Number of points to draw.
    #[arg(long, conflicts_with = "like")]
    count: Option<usize>,
    /// Match the point count of this cloud.
    #[arg(long, required_unless_present = "count")]
    like: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Voxel density statistics.
    Density {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        voxel_edge: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Normalised density profile against radius or height.
    Profile {
        #[arg(long)]
        cloud: PathBuf,
        /// radial or height.
        #[arg(long, default_value = "radial")]
        axis: String,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Which source points a scan observed.
    Occlusion {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        match_radius: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    control: PathBuf,
    /// Scan cloud as NAME=FILE; repeat for each scan.
    #[arg(long = "scan", value_parser = parse_named, required = true)]
    scans: Vec<(String, PathBuf)>,
    #[arg(long, default_value = "stand")]
    stand_name: String,
    #[arg(long)]
    voxel_edge: Option<f64>,
    #[arg(long)]
    match_radius: Option<f64>,
    /// Output stem; `.csv` and `.txt` are appended.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_named(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((n, p)) if !n.is_empty() && !p.is_empty() => Ok((n.to_owned(), PathBuf::from(p))),
        _ => Err(format!("expected NAME=FILE, got `{s}`")),
    }
}

/// Parse `argv`, run the subcommand and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            eprint!("{text}");
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("cannot start workers: {e}")))?;
    let ctx = Context::new(&cli.global)?;
    pool.install(|| match cli.command {
        Command::Tree(a) => cmd_tree(&ctx, a),
        Command::Stand(a) => cmd_stand(&ctx, a),
        Command::Sensor(a) => cmd_sensor(&ctx, a),
        Command::Trajectory(a) => cmd_trajectory(&ctx, a),
        Command::Scan(a) => cmd_scan(&ctx, a),
        Command::Control(a) => cmd_control(&ctx, a),
        Command::Analyze(a) => cmd_analyze(&ctx, a),
        Command::Report(a) => cmd_report(&ctx, a),
        Command::Pipeline => cmd_pipeline(&ctx),
    })
}

struct Context {
    cfg: Option<PipelineConfig>,
    base: PathBuf,
    seed: u64,
    out: PathBuf,
    format: String,
}

impl Context {
    fn new(g: &Global) -> Result<Self> {
        let cfg = g.config.as_deref().map(PipelineConfig::load).transpose()?;
        let base = g
            .config
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let seed = if g.clock_seed {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_err(|e| Error::config(format!("system clock before 1970: {e}")))?;
            let seed = now.as_nanos() as u64;
            eprintln!("seed {seed}");
            seed
        } else {
            g.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0)
        };
        let out = g
            .out
            .clone()
            .or(cfg.as_ref().map(|c| c.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("."));
        let format = g
            .format
            .clone()
            .or(cfg.as_ref().map(|c| c.format.clone()))
            .unwrap_or_else(|| "ply".into());
        if !matches!(format.as_str(), "ply" | "csv") {
            return Err(Error::config(format!("format must be `ply` or `csv`, got `{format}`")));
        }
        let mut cfg = cfg;
        if let Some(c) = &mut cfg {
            c.seed = seed;
        }
        Ok(Self {
            cfg,
            base,
            seed,
            out,
            format,
        })
    }

    fn cfg(&self) -> Result<&PipelineConfig> {
        self.cfg.as_ref().ok_or_else(|| Error::config("this command needs --config"))
    }

    /// Configuration hash recorded with artifacts; without a configuration
    /// file the stage parameters stand in for it.
    fn config_hash(&self, params: &Value) -> String {
        match &self.cfg {
            Some(c) => c.hash(),
            None => params_hash(params),
        }
    }

    /// `explicit`, or `<out>/<stem>.<format>` for clouds.
    fn path(&self, explicit: Option<PathBuf>, stem: &str, cloud: bool) -> Result<PathBuf> {
        let p = match explicit {
            Some(p) => p,
            None if cloud => self.out.join(format!("{stem}.{}", self.format)),
            None => self.out.join(stem),
        };
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(p)
    }

    fn meta(&self, artifact: &Path, stage: &str, params: Value) -> Result<()> {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".meta.json");
        let path = PathBuf::from(name);
        let body = json!({
            "stage": stage,
            "seed": self.seed,
            "config_hash": self.config_hash(&params),
            "params": params,
        });
        let text = serde_json::to_string_pretty(&body).expect("json") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn write_cloud(&self, path: &Path, cloud: &LabelledCloud, stage: &str, params: Value) -> Result<()> {
        write_cloud(path, cloud)?;
        let mut params = params;
        params["params_hash"] = json!(cloud.provenance.params_hash);
        params["points"] = json!(cloud.len());
        self.meta(path, stage, params)?;
        info!("wrote {} ({} points)", path.display(), cloud.len());
        Ok(())
    }
}

fn cmd_tree(ctx: &Context, a: TreeArgs) -> Result<()> {
    let tree_seed = ctx.seed as u32;
    let (cloud, params) = if let Some(obj) = &a.obj {
        let labels = match &a.labels {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                LabelMap::Table(toml::from_str(&text).map_err(|e| Error::parse(p, e.to_string()))?)
            }
            None => LabelMap::Heuristic,
        };
        let mesh = load_obj(obj, &labels, 0)?;
        let spacing = a.spacing.unwrap_or(presets::SEARCH_RADIUS / 2.0);
        let cloud = sample_mesh(&mesh, spacing, ctx.seed)?;
        (cloud, json!({ "obj": obj, "spacing": spacing }))
    } else {
        let mut def: TreeDefinition = match (&a.preset, &a.definition, &a.name) {
            (Some(p), _, _) => presets::tree(p)?,
            (_, Some(path), _) => TreeDefinition::load(path)?,
            (_, _, Some(name)) => {
                let defs = ctx.cfg()?.tree_definitions(&ctx.base)?;
                defs.get(name)
                    .cloned()
                    .ok_or_else(|| Error::config(format!("tree `{name}` is not defined")))?
            }
            _ => return Err(Error::config("choose a tree with --preset, --definition, --obj or --name")),
        };
        if let Some(s) = a.spacing {
            def.sample_spacing = s;
        }
        let cloud = generate_tree(&def, tree_seed)?;
        (cloud, json!({ "definition": def, "tree_seed": tree_seed }))
    };
    let path = ctx.path(a.output, "tree", true)?;
    ctx.write_cloud(&path, &cloud, "tree", params)?;
    println!("{} points -> {}", cloud.len(), path.display());
    Ok(())
}

/// Stand layout and tree definitions from the configuration, or from the
/// named presets.
fn stand_inputs(
    ctx: &Context,
    preset: Option<&str>,
    tree: &str,
    rows: Option<usize>,
    per_row: Option<usize>,
) -> Result<(StandLayout, BTreeMap<String, TreeDefinition>)> {
    if preset.is_none() {
        if let Some(cfg) = ctx.cfg.as_ref().filter(|c| c.stand.is_some()) {
            return Ok((cfg.stand_layout()?, cfg.tree_definitions(&ctx.base)?));
        }
    }
    let mut layout = presets::stand(preset.unwrap_or("orchard-6x10"), tree, ctx.seed)?;
    if let StandLayout::Orchard(o) = &mut layout {
        o.rows = rows.unwrap_or(o.rows);
        o.trees_per_row = per_row.unwrap_or(o.trees_per_row);
    }
    let defs = BTreeMap::from([(tree.to_owned(), presets::tree(tree)?)]);
    Ok((layout, defs))
}

fn build_stand(layout: &StandLayout, defs: &BTreeMap<String, TreeDefinition>) -> Result<LabelledCloud> {
    let placements = layout.layout()?;
    let mut cloud = assemble_stand(&placements, defs)?;
    cloud.provenance.seed = layout.seed();
    Ok(cloud)
}

fn cmd_stand(ctx: &Context, a: StandArgs) -> Result<()> {
    let (layout, defs) = stand_inputs(ctx, a.preset.as_deref(), &a.tree, a.rows, a.trees_per_row)?;
    let placements = layout.layout()?;
    let cloud = build_stand(&layout, &defs)?;
    let path = ctx.path(a.output, "stand", true)?;
    let params = json!({ "layout": layout, "trees": defs });
    ctx.write_cloud(&path, &cloud, "stand", params.clone())?;
    let ppath = placements_path(&path);
    write_placements(&ppath, &placements)?;
    ctx.meta(&ppath, "stand", params)?;
    println!("{} trees, {} points -> {}", placements.len(), cloud.len(), path.display());
    Ok(())
}

fn placements_path(cloud: &Path) -> PathBuf {
    let stem = cloud.file_stem().unwrap_or_default().to_string_lossy();
    cloud.with_file_name(format!("{stem}_placements.csv"))
}

fn sensor_from_args(ctx: &Context, a: &SensorArgs) -> Result<SensorShape> {
    let step = a.step.unwrap_or(presets::SEARCH_RADIUS);
    let range = a.range.unwrap_or(presets::SENSOR_RANGE);
    if let Some(name) = &a.preset {
        return named_sensor(ctx, name, a.step, a.range);
    }
    match (a.fov, a.res, a.planes, a.res_el) {
        (_, Some(res), _, Some(el)) => SensorShape::spherical(res, el, range, step),
        (Some(fov), Some(res), Some(n), _) => {
            SensorShape::multi_plane(fov, res, range, step, n, a.vfov.expect("clap requires vfov"))
        }
        (Some(fov), Some(res), None, _) => SensorShape::single_plane(fov, res, range, step),
        _ => Err(Error::config("describe the sensor with --preset, --fov/--res or --res/--res-el")),
    }
}

/// A sensor named in the configuration, else a bundled preset.
fn named_sensor(ctx: &Context, name: &str, step: Option<f64>, range: Option<f64>) -> Result<SensorShape> {
    if let Some(cfg) = ctx.cfg.as_ref().filter(|c| c.sensors.contains_key(name)) {
        if step.is_none() && range.is_none() {
            return cfg.sensor(name);
        }
    }
    let radius = ctx.cfg.as_ref().map_or(presets::SEARCH_RADIUS, |c| c.scan.search_radius);
    presets::sensor(name, step.unwrap_or(radius), range.unwrap_or(presets::SENSOR_RANGE))
}

fn cmd_sensor(ctx: &Context, a: SensorArgs) -> Result<()> {
    let shape = sensor_from_args(ctx, &a)?;
    println!(
        "{} scan lines x {} samples = {} samples",
        shape.lines().len(),
        shape.ranges().len(),
        shape.sample_count()
    );
    if let Some(path) = a.export {
        let path = ctx.path(Some(path), "", true)?;
        let cloud = shape.to_cloud();
        ctx.write_cloud(&path, &cloud, "sensor", json!({ "sensor": shape.meta() }))?;
    }
    Ok(())
}

fn preset_trajectory(kind: &str) -> Result<TrajectoryConfig> {
    match kind {
        "handheld-loop" => Ok(TrajectoryConfig::HandheldLoop(HandheldParams::default())),
        "ground-rows" => Ok(TrajectoryConfig::GroundRows(GroundParams::default())),
        "aerial-grid" => Ok(TrajectoryConfig::AerialGrid(AerialConfig::default())),
        _ => Err(Error::config(format!(
            "unknown trajectory preset `{kind}` (known: {})",
            presets::TRAJECTORY_PRESETS.join(", ")
        ))),
    }
}

fn cmd_trajectory(ctx: &Context, a: TrajectoryArgs) -> Result<()> {
    let tc = match (&a.kind, &a.name) {
        (Some(k), _) => preset_trajectory(k)?,
        (None, Some(n)) => ctx.cfg()?.trajectory(n)?.clone(),
        (None, None) => return Err(Error::config("choose a trajectory with --kind or --name")),
    };
    let stand = a.stand.as_deref().map(read_cloud).transpose()?;
    let tc = match tc {
        TrajectoryConfig::AerialGrid(mut ac) if stand.is_none() && ac.extent.is_none() => {
            ac.extent = Some(AerialParams::default().extent);
            TrajectoryConfig::AerialGrid(ac)
        }
        other => other,
    };
    let layout = match &tc {
        TrajectoryConfig::GroundRows(_) => Some(stand_inputs(ctx, None, "avocado", None, None)?.0),
        _ => None,
    };
    let traj = tc.build(layout.as_ref(), stand.as_ref(), &ctx.base)?;
    let stem = a.name.as_deref().or(a.kind.as_deref()).unwrap_or("trajectory");
    let path = ctx.path(a.output, &format!("{stem}.csv"), false)?;
    write_trajectory(&path, &traj)?;
    ctx.meta(&path, "trajectory", json!({ "trajectory": traj.meta }))?;
    println!("{} poses -> {}", traj.len(), path.display());
    Ok(())
}

fn cmd_scan(ctx: &Context, a: ScanArgs) -> Result<()> {
    let stand = read_cloud(&a.stand)?;
    let traj = read_trajectory(&a.trajectory)?;
    let defaults = ctx.cfg.as_ref().map(|c| c.scan.clone()).unwrap_or_default();
    let params = ScanParams {
        search_radius: a.search_radius.unwrap_or(defaults.search_radius),
        noise_sigma: a.noise_sigma.unwrap_or(defaults.noise_sigma),
        seed: ctx.seed,
        dedupe: a.dedupe || defaults.dedupe,
    };
    let shape = named_sensor(ctx, &a.sensor, None, None)?;
    let res = scan_cloud(&stand, &shape, &traj, &params)?;
    let path = ctx.path(a.output, "scan", true)?;
    let meta = json!({ "scan": params, "sensor": shape.meta(), "stand": a.stand, "trajectory": a.trajectory });
    ctx.write_cloud(&path, &res.cloud, "scan", meta.clone())?;
    let spath = path.with_extension("stats.json");
    res.write_stats(&spath)?;
    println!("{} returns from {} poses -> {}", res.cloud.len(), traj.len(), path.display());
    Ok(())
}

fn cmd_control(ctx: &Context, a: ControlArgs) -> Result<()> {
    let stand = read_cloud(&a.stand)?;
    let count = match (a.count, &a.like) {
        (Some(n), _) => n,
        (None, Some(p)) => read_cloud(p)?.len(),
        (None, None) => unreachable!("clap requires one of --count and --like"),
    };
    let cloud = control_sample(&stand, count, ctx.seed)?;
    let path = ctx.path(a.output, "control", true)?;
    ctx.write_cloud(&path, &cloud, "control", json!({ "stand": a.stand, "count": count }))?;
    println!("{} points -> {}", cloud.len(), path.display());
    Ok(())
}

fn analysis_defaults(ctx: &Context) -> crate::config::AnalysisSettings {
    ctx.cfg.as_ref().map(|c| c.analysis.clone()).unwrap_or_default()
}

fn default_match_radius(ctx: &Context) -> f64 {
    ctx.cfg.as_ref().map_or(2.0 * presets::SEARCH_RADIUS, |c| c.match_radius())
}

fn stem_of(p: &Path) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn cmd_analyze(ctx: &Context, a: AnalyzeCommand) -> Result<()> {
    let defaults = analysis_defaults(ctx);
    match a {
        AnalyzeCommand::Density {
            cloud,
            voxel_edge,
            output,
        } => {
            let c = read_cloud(&cloud)?;
            let stats = density_stats(&c, voxel_edge.unwrap_or(defaults.voxel_edge))?;
            let path = ctx.path(output, &format!("{}.density.json", stem_of(&cloud)), false)?;
            let text = serde_json::to_string_pretty(&stats).expect("json") + "\n";
            std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
            ctx.meta(&path, "analyze-density", json!({ "cloud": cloud, "voxel_edge": stats.voxel_edge }))?;
            print!("{text}");
        }
        AnalyzeCommand::Profile {
            cloud,
            axis,
            bins,
            output,
        } => {
            let c = read_cloud(&cloud)?;
            let ax: Axis = axis.parse()?;
            let bins = bins.unwrap_or(defaults.profile_bins);
            let profile = density_profile(&c, ax, bins)?;
            let path = ctx.path(output, &format!("{}.profile_{axis}.csv", stem_of(&cloud)), false)?;
            write_profile_csv(&path, &profile)?;
            ctx.meta(&path, "analyze-profile", json!({ "cloud": cloud, "axis": ax, "bins": bins }))?;
            println!("inner/outer ratio {:.3} -> {}", profile.inner_outer_ratio(), path.display());
        }
        AnalyzeCommand::Occlusion {
            source,
            scan,
            match_radius,
            output,
        } => {
            let src = read_cloud(&source)?;
            let sc = read_cloud(&scan)?;
            let r = match_radius.unwrap_or_else(|| default_match_radius(ctx));
            let map = occlusion_map(&src, &sc, r)?;
            let path = ctx.path(output, &format!("{}.occlusion.csv", stem_of(&scan)), false)?;
            write_occlusion_csv(&path, &src, &map)?;
            let params = json!({
                "source": source,
                "scan": scan,
                "match_radius": r,
                "occluded_fraction": map.occluded_fraction,
            });
            ctx.meta(&path, "analyze-occlusion", params)?;
            println!("occluded {:.2}% -> {}", 100.0 * map.occluded_fraction, path.display());
        }
    }
    Ok(())
}

fn cmd_report(ctx: &Context, a: ReportArgs) -> Result<()> {
    let defaults = analysis_defaults(ctx);
    let source = read_cloud(&a.source)?;
    let control = read_cloud(&a.control)?;
    let scans = a
        .scans
        .iter()
        .map(|(n, p)| Ok((n.clone(), read_cloud(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let runs = [StandRuns {
        name: a.stand_name.clone(),
        source: &source,
        control: &control,
        scans: scans.iter().map(|(n, c)| (n.clone(), c)).collect(),
    }];
    let voxel = a.voxel_edge.unwrap_or(defaults.voxel_edge);
    let r = a.match_radius.unwrap_or_else(|| default_match_radius(ctx));
    let report = summary_report(&runs, voxel, r)?;
    let stem = ctx.path(a.output, "report", false)?;
    report.write(&stem)?;
    let params = json!({ "source": a.source, "control": a.control, "scans": a.scans, "voxel_edge": voxel, "match_radius": r });
    ctx.meta(&stem.with_extension("csv"), "report", params.clone())?;
    ctx.meta(&stem.with_extension("txt"), "report", params)?;
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_pipeline(ctx: &Context) -> Result<()> {
    let cfg = ctx.cfg()?;
    if cfg.scans.is_empty() {
        return Err(Error::config("the configuration defines no [[scans]]"));
    }
    let layout = cfg.stand_layout()?;
    let defs = cfg.tree_definitions(&ctx.base)?;
    let placements = layout.layout()?;
    info!("assembling {} trees", placements.len());
    let stand = build_stand(&layout, &defs)?;
    let stand_path = ctx.path(None, "stand", true)?;
    ctx.write_cloud(&stand_path, &stand, "stand", json!({ "layout": layout }))?;
    let ppath = placements_path(&stand_path);
    write_placements(&ppath, &placements)?;
    ctx.meta(&ppath, "stand", json!({ "layout": layout }))?;

    let mut scans = Vec::new();
    for (i, run) in cfg.scans.iter().enumerate() {
        let shape = cfg.sensor(&run.sensor)?;
        let traj = cfg.trajectory(&run.trajectory)?.build(Some(&layout), Some(&stand), &ctx.base)?;
        let tpath = ctx.path(None, &format!("trajectory_{}.csv", run.trajectory), false)?;
        write_trajectory(&tpath, &traj)?;
        ctx.meta(&tpath, "trajectory", json!({ "trajectory": traj.meta }))?;

        let params = cfg.scan_params(i);
        info!("scan `{}`: {} poses x {} samples", run.name, traj.len(), shape.sample_count());
        let res = scan_cloud(&stand, &shape, &traj, &params)?;
        let path = ctx.path(None, &format!("scan_{}", run.name), true)?;
        let meta = json!({ "scan": params, "sensor": shape.meta(), "run": run });
        ctx.write_cloud(&path, &res.cloud, "scan", meta)?;
        res.write_stats(&path.with_extension("stats.json"))?;
        scans.push((run.name.clone(), res.cloud));
    }

    let target = cfg.control.target_count.unwrap_or(scans[0].1.len());
    let control = control_sample(&stand, target, cfg.control_seed())?;
    let cpath = ctx.path(None, "control", true)?;
    ctx.write_cloud(&cpath, &control, "control", json!({ "count": target }))?;

    let a = &cfg.analysis;
    let r = cfg.match_radius();
    let all = std::iter::once(("control", &control)).chain(scans.iter().map(|(n, c)| (n.as_str(), c)));
    for (name, cloud) in all {
        for (ax, label) in [(Axis::RadialXy, "radial"), (Axis::Height, "height")] {
            let profile = density_profile(cloud, ax, a.profile_bins)?;
            let p = ctx.path(None, &format!("profile_{name}_{label}.csv"), false)?;
            write_profile_csv(&p, &profile)?;
            ctx.meta(&p, "analyze-profile", json!({ "cloud": name, "axis": ax, "bins": a.profile_bins }))?;
        }
        let map = occlusion_map(&stand, cloud, r)?;
        let p = ctx.path(None, &format!("occlusion_{name}.csv"), false)?;
        write_occlusion_csv(&p, &stand, &map)?;
        let params = json!({ "cloud": name, "match_radius": r, "occluded_fraction": map.occluded_fraction });
        ctx.meta(&p, "analyze-occlusion", params)?;
    }

    let runs = [StandRuns {
        name: layout.definition().to_owned(),
        source: &stand,
        control: &control,
        scans: scans.iter().map(|(n, c)| (n.clone(), c)).collect(),
    }];
    let report = summary_report(&runs, a.voxel_edge, r)?;
    let stem = ctx.path(None, "report", false)?;
    report.write(&stem)?;
    let params = json!({ "voxel_edge": a.voxel_edge, "match_radius": r });
    ctx.meta(&stem.with_extension("csv"), "report", params.clone())?;
    ctx.meta(&stem.with_extension("txt"), "report", params)?;
    print!("{}", report.to_text());
    Ok(())
}
