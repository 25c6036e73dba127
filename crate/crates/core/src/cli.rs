use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use samlfd::bias::{run_bias_study_multi, to_csv, to_markdown, BiasStudyConfig};
use samlfd::engine::{
    best_reproduction, ClassifierKind, GridSpec, NormalizationScope, Session, SessionConfig,
};
use samlfd::io;
use samlfd::metrics::MetricId;
use samlfd::representations::RepresentationId;
use samlfd::service::{self, ServiceConfig, DEFAULT_PORT};
use samlfd::shapes;
use samlfd::trajectory::{ConstraintKind, Preprocess, Trajectory};
use samlfd::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "samlfd", version, about = "Similarity-aware multi-representational learning from demonstration")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reproduce the demonstration from a new start and/or goal with the best representation.
    Reproduce(ReproduceArgs),
    /// Survey a grid of endpoints and write the session (similarity map and region model).
    Region(RegionArgs),
    /// Run the metric-bias study over a shape corpus.
    BiasStudy(BiasArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct DemoArgs {
    /// Demonstration file (JSON or CSV).
    #[arg(long, conflicts_with = "shape", required_unless_present = "shape")]
    demo: Option<PathBuf>,
    /// Use a bundled shape instead of a file.
    #[arg(long)]
    shape: Option<String>,
    /// Skip smoothing and resampling.
    #[arg(long)]
    raw: bool,
}

impl DemoArgs {
    fn load(&self) -> Result<Trajectory> {
        let traj = match (&self.demo, &self.shape) {
            (Some(path), _) => io::load_trajectory(path)?,
            (None, Some(name)) => shapes::by_name(name, 100).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown shape {name:?}; bundled shapes: {}",
                    shapes::BUNDLED.join(", ")
                ))
            })?,
            (None, None) => unreachable!("clap requires one of --demo/--shape"),
        };
        if self.raw {
            Ok(traj)
        } else {
            Preprocess::default().apply(&traj)
        }
    }
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    #[command(flatten)]
    demo: DemoArgs,
    /// New initial point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    init: Option<Vec<f64>>,
    /// New goal point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    goal: Option<Vec<f64>>,
    #[arg(long, default_value = "frechet")]
    metric: MetricId,
    /// Comma-separated representations (ja, lte, dmp).
    #[arg(long, default_value = "ja,lte,dmp")]
    reps: String,
    /// Where to write the winning trajectory.
    #[arg(long, default_value = "reproduction.json")]
    out: PathBuf,
    /// Print the full result as JSON instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Classifier {
    Knn,
    Csvc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Normalization {
    Joint,
    PerRepresentation,
}

#[derive(Debug, Args)]
struct RegionArgs {
    #[command(flatten)]
    demo: DemoArgs,
    /// Which endpoint the grid moves.
    #[arg(long, default_value = "initial")]
    kind: ConstraintKind,
    #[arg(long, default_value = "frechet")]
    metric: MetricId,
    #[arg(long, default_value = "ja,lte,dmp")]
    reps: String,
    /// Grid points per dimension.
    #[arg(long, default_value_t = 9)]
    resolution: usize,
    /// Grid half-width per dimension; defaults to a quarter of the demo's bounding-box diagonal.
    #[arg(long, value_delimiter = ',')]
    extent: Option<Vec<f64>>,
    /// Grid center; defaults to the moved endpoint.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    center: Option<Vec<f64>>,
    /// Mark points whose best similarity score is at least this value.
    #[arg(long)]
    robust: Option<f64>,
    #[arg(long, value_enum, default_value = "knn")]
    classifier: Classifier,
    /// Neighbours for the KNN classifier.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, value_enum, default_value = "joint")]
    normalization: Normalization,
    #[arg(long, default_value = "session.json")]
    out: PathBuf,
    /// Write a PNG of the combined region (2-D demos only).
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Worker threads for the grid survey.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct BiasArgs {
    /// Use the bundled shapes.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    bundled: bool,
    /// Directory of CSV demonstrations.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated metric ids; empty means all.
    #[arg(long, default_value = "")]
    metrics: String,
    #[arg(long, default_value_t = 9)]
    resolution: usize,
    #[arg(long, default_value_t = 0.10)]
    tie_margin: f64,
    /// Grid half-width as a fraction of each demo's bounding-box diagonal.
    #[arg(long, default_value_t = 0.25)]
    extent_fraction: f64,
    /// Keep the demo's goal pinned instead of constraining the initial point only.
    #[arg(long)]
    pin_goal: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    md: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "SAMLFD_PORT", default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory to write session JSON to (and reload from at startup).
    #[arg(long)]
    persist: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reproduce(args) => reproduce(args),
        Command::Region(args) => region(args),
        Command::BiasStudy(args) => bias_study(args),
        Command::Serve(args) => serve(args),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn reproduce(args: ReproduceArgs) -> Result<()> {
    let (kind, point) = match (args.init, args.goal) {
        (Some(i), None) => (ConstraintKind::Initial, i),
        (None, Some(g)) => (ConstraintKind::Final, g),
        (Some(i), Some(g)) => (ConstraintKind::Both, [i, g].concat()),
        (None, None) => {
            return Err(Error::InvalidArgument("one of --init or --goal is required".into()))
        }
    };
    let demo = args.demo.load()?;
    let reps = RepresentationId::parse_list(&args.reps)?;
    let options = SessionConfig::default().eval_options(Some(1));
    let result = best_reproduction(&demo, &point, kind, &reps, args.metric, &options)?;
    io::save_trajectory(
        &args.out,
        &result.trajectory,
        &format!("{} reproduction", result.representation),
        &format!("best of {} under {}", args.reps, args.metric),
    )?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result).expect("result serializes"));
        return Ok(());
    }
    println!("winner: {}", result.representation);
    println!("raw distance: {:.6}", result.raw_distance);
    println!("similarity: {:.4}", result.similarity);
    for c in &result.candidates {
        match (&c.raw_distance, &c.error) {
            (Some(d), _) => println!("  {:<4} distance {d:.6} similarity {:.4}", c.representation, c.similarity),
            (None, Some(e)) => println!("  {:<4} failed: {e}", c.representation),
            (None, None) => {}
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn region(args: RegionArgs) -> Result<()> {
    if let Some(t) = args.robust {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("--robust must be in (0, 1], got {t}")));
        }
    }
    let demo = args.demo.load()?;
    let config = SessionConfig {
        representations: RepresentationId::parse_list(&args.reps)?,
        metric: args.metric,
        constraint_kind: args.kind,
        grid: GridSpec {
            center: args.center,
            extent: args.extent,
            resolution: args.resolution,
            ..GridSpec::default()
        },
        normalization: match args.normalization {
            Normalization::Joint => NormalizationScope::Joint,
            Normalization::PerRepresentation => NormalizationScope::PerRepresentation,
        },
        classifier: match args.classifier {
            Classifier::Knn => ClassifierKind::Knn { k: args.k },
            Classifier::Csvc => ClassifierKind::default_csvc(),
        },
        ..SessionConfig::default()
    };
    let session = Session::compute(demo, config, args.workers)?;
    io::save_session(&args.out, &session)?;
    let view = session.region_view(args.robust)?;
    for rep in &view.representations {
        let cells = view.labels.iter().filter(|l| *l == rep).count();
        println!("{rep}: {cells} of {} cells", view.labels.len());
    }
    if let Some(mask) = &view.robust_mask {
        println!(
            "robust at {}: {} cells",
            args.robust.unwrap_or_default(),
            mask.iter().filter(|m| **m).count()
        );
    }
    let failed = session.map.failed.iter().filter(|f| **f).count();
    if failed > 0 {
        println!("{failed} reproductions failed and scored 0");
    }
    if let Some(path) = &args.heatmap {
        write_heatmap(path, &session, view.robust_mask.as_deref())?;
    }
    println!("session {} written to {}", session.id, args.out.display());
    Ok(())
}

const CELL_PX: u32 = 24;

fn label_color(rep: RepresentationId) -> [f64; 3] {
    match rep {
        RepresentationId::Ja => [31.0, 119.0, 180.0],
        RepresentationId::Lte => [214.0, 39.0, 40.0],
        RepresentationId::Dmp => [44.0, 160.0, 44.0],
    }
}

/// Cell colour is the winning representation, brightness its best score.
/// Robust cells (if any) get a dark border.
fn write_heatmap(path: &Path, session: &Session, mask: Option<&[bool]>) -> Result<()> {
    let grid = &session.map.grid;
    if grid.dims() != 2 {
        return Err(Error::InvalidArgument("heatmaps need a 2-D demonstration".into()));
    }
    let n = grid.resolution() as u32;
    let mut img = image::RgbImage::new(n * CELL_PX, n * CELL_PX);
    for (idx, (label, score)) in session.map.best_label.iter().zip(&session.map.best_score).enumerate() {
        let (col, row) = (idx as u32 % n, idx as u32 / n);
        // Second coordinate grows upward.
        let top = (n - 1 - row) * CELL_PX;
        let base = label_color(*label);
        let shade = 0.25 + 0.75 * score.clamp(0.0, 1.0);
        let fill = image::Rgb(base.map(|c| (255.0 - (255.0 - c) * shade) as u8));
        let robust = mask.is_some_and(|m| m[idx]);
        for dy in 0..CELL_PX {
            for dx in 0..CELL_PX {
                let edge = dx < 2 || dy < 2 || dx >= CELL_PX - 2 || dy >= CELL_PX - 2;
                let px = if robust && edge { image::Rgb([20, 20, 20]) } else { fill };
                img.put_pixel(col * CELL_PX + dx, top + dy, px);
            }
        }
    }
    img.save(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })
}

fn bias_study(args: BiasArgs) -> Result<()> {
    let corpus = match &args.corpus {
        Some(dir) => {
            let corpus = io::ingest_lasa_csv(dir, &Preprocess::default())?;
            for w in &corpus.warnings {
                eprintln!("warning: {w}");
            }
            corpus.demos
        }
        None => shapes::bundled_corpus(),
    };
    let metrics = MetricId::parse_list(&args.metrics)?;
    let config = BiasStudyConfig {
        grid_resolution: args.resolution,
        tie_margin: args.tie_margin,
        extent_fraction: args.extent_fraction,
        pin_goal: args.pin_goal,
        ..BiasStudyConfig::default()
    };
    let records = run_bias_study_multi(&corpus, &metrics, &config)?;
    let md = to_markdown(&records);
    print!("{md}");
    let excluded: usize = records.iter().map(|r| r.excluded).sum();
    if excluded > 0 {
        eprintln!("{excluded} cells excluded after failed reproductions");
    }
    if let Some(path) = &args.csv {
        write_text(path, &to_csv(&records))?;
    }
    if let Some(path) = &args.md {
        write_text(path, &md)?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
        path: PathBuf::new(),
        source: e,
    })?;
    let addr = std::net::SocketAddr::new(args.host, args.port);
    let config = ServiceConfig {
        persist: args.persist,
        workers: args.workers,
    };
    runtime
        .block_on(service::serve(addr, config))
        .map_err(|source| Error::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })
}
