use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowsynth::benchmark::CameraRig;
use flowsynth::io::{read_flo, read_mask};
use flowsynth::losses::{trimmed_flow_loss, TrimConfig};
use flowsynth::pipeline::{run_evaluate, run_gt_from_lidar, run_synthesize, write_flow_png, Manifest, PipelineConfig};
use flowsynth::{Error, Result, ValidMask};

/// Optical flow supervision from single images with depth, and LiDAR flow benchmarks.
#[derive(Parser)]
#[command(name = "flowsynth", version)]
struct Cli {
    /// Configuration file (TOML); omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a novel view, flow and validity mask for every frame with depth.
    Synthesize {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Master seed for per-frame sampling.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Project LiDAR sweeps into a camera pair to build sparse flow ground truth.
    GtFromLidar {
        #[arg(long)]
        manifest: PathBuf,
        /// Camera rig (TOML).
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        occlusion: OcclusionArgs,
    },
    /// Score predictions on the test split and write a JSON-lines report.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        train_frac: Option<f64>,
    },
    /// Trimmed L1 loss between two flow files.
    Loss {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Mask PNG; defaults to pixels valid in both flows.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Percent of the largest residuals to drop.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Color-code a flow file.
    Viz {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Magnitude mapped to full saturation (default: largest in the file).
        #[arg(long)]
        max_radius: Option<f64>,
    },
    /// Per-sequence train/test split counts.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        train_frac: Option<f64>,
    },
    /// Print the effective configuration.
    Config,
}

#[derive(Args)]
struct OcclusionArgs {
    /// Pixel radius within which a nearer point hides a farther one.
    #[arg(long)]
    occlusion_radius: Option<f64>,
    /// Depth margin (meters) a hiding point must be nearer by.
    #[arg(long)]
    occlusion_depth: Option<f64>,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.run.workers = w;
    }
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Synthesize { manifest, out, seed } => {
            if let Some(s) = seed {
                cfg.pose.seed = s;
            }
            let m = Manifest::load(&manifest)?;
            let metas = run_synthesize(&m, &out, &cfg)?;
            let masked: usize = metas.iter().map(|m| m.triplet.masked).sum();
            println!("synthesized {} triplet(s), {masked} supervised pixel(s)", metas.len());
        }
        Command::GtFromLidar { manifest, rig, out, occlusion } => {
            if let Some(r) = occlusion.occlusion_radius {
                cfg.benchmark.occlusion.radius_px = r;
            }
            if let Some(d) = occlusion.occlusion_depth {
                cfg.benchmark.occlusion.depth_m = d;
            }
            let m = Manifest::load(&manifest)?;
            let rig = CameraRig::load(&rig)?;
            let gts = run_gt_from_lidar(&m, &rig, &out, &cfg)?;
            let points: usize = gts.iter().map(|g| g.n_points).sum();
            println!("wrote ground truth for {} frame(s), {points} labeled pixel(s)", gts.len());
        }
        Command::Evaluate { manifest, pred, gt, report, train_frac } => {
            if let Some(f) = train_frac {
                cfg.benchmark.train_frac = f;
            }
            let m = Manifest::load(&manifest)?;
            let r = run_evaluate(&m, &pred, &gt, &cfg)?;
            write_text(&report, &r.to_json_lines())?;
            print!("{}", r.to_table());
        }
        Command::Loss { pred, target, mask, tau } => {
            if let Some(t) = tau {
                cfg.trim.tau_percent = t;
            }
            let trim = TrimConfig::new(cfg.trim.tau_percent)?;
            let pred = read_flo(&pred)?;
            let target = read_flo(&target)?;
            let mask = match mask {
                Some(p) => read_mask(&p)?,
                None => {
                    let both = pred.valid.iter().zip(&target.valid).map(|(a, b)| *a && *b).collect();
                    ValidMask::from_values(pred.width, pred.height, both)?
                }
            };
            let (loss, kept) = trimmed_flow_loss(&pred, &target, &mask, &trim)?;
            println!("loss {loss}");
            println!("pixels {} kept of {} masked", kept.count(), mask.count());
        }
        Command::Viz { flow, out, max_radius } => {
            if let Some(r) = max_radius {
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::InvalidConfig(format!("max radius must be positive, got {r}")));
                }
            }
            write_flow_png(&out, &read_flo(&flow)?, max_radius)?;
        }
        Command::Split { manifest, train_frac } => {
            let m = Manifest::load(&manifest)?;
            let r = m.split_report(train_frac.unwrap_or(cfg.benchmark.train_frac))?;
            print!("{}", r.to_table());
        }
        Command::Config => {
            cfg.validate()?;
            print!("{}", cfg.to_toml_string()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
