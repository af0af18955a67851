//! `wcdim`: dimension bounds, attractors, covers and box counting for
//! weak-contraction IFS scenes.
//!
//! Exit codes: 0 ok, 1 runtime error, 2 usage/parse error or missing file,
//! 3 coefficient error, 4 contraction check failed, 5 bound inconsistent.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use wcdim::attractor::{self, ChaosGameOptions, PointCloud};
use wcdim::boxdim;
use wcdim::cover;
use wcdim::format::sig17;
use wcdim::ifs::{Metric, MetricDomain};
use wcdim::report::{self, ReportError};
use wcdim::scene::{parse_scene, SceneConfig};

#[derive(Parser)]
#[command(
    name = "wcdim",
    version,
    about = "Hausdorff dimension bounds for weak-contraction IFS"
)]
struct Cli {
    /// Worker threads (overrides WCDIM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the upper bound x0.
    Bound {
        scene: PathBuf,
        /// Write the curve t,x to this CSV file.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        curve_points: Option<usize>,
    },
    /// Approximate the attractor and write its points as CSV.
    Attractor {
        scene: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Chaos)]
        method: Method,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        burn_in: Option<usize>,
        /// Cell size for the grid method (default D/256).
        #[arg(long)]
        cell: Option<f64>,
        #[arg(long, default_value_t = 64)]
        max_iter: usize,
        #[arg(short, long, visible_alias = "out")]
        output: Option<PathBuf>,
    },
    /// Print the word-cover table.
    Cover {
        scene: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Exponent for the premeasure sums, or `auto` for x0.
        #[arg(long, default_value = "auto")]
        exponent: String,
        #[arg(long)]
        word_limit: Option<u64>,
    },
    /// Estimate the box-counting dimension of a point CSV or of a scene's
    /// chaos-game cloud; prints the slope.
    Boxdim {
        /// Point CSV (header x1,..) or scene file.
        input: PathBuf,
        /// Scene whose domain anchors the grid for a CSV input; otherwise the
        /// data bounding box.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Explicit decreasing scales, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["base", "ratio", "k_min", "k_max"])]
        scales: Option<Vec<f64>>,
        #[arg(long)]
        base: Option<f64>,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        k_min: Option<i32>,
        #[arg(long)]
        k_max: Option<i32>,
        /// Inclusive fit window `lo:hi` into the scale list.
        #[arg(long)]
        window: Option<String>,
        /// Write epsilon,count CSV to this file.
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Run the full pipeline and write a JSON report.
    Verify {
        scene: PathBuf,
        #[arg(short, long, visible_alias = "out")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Chaos,
    Grid,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(SceneConfig, String), Failure> {
    let text = read(path)?;
    let scene = parse_scene(&text).map_err(|e| {
        let code = if e.is_coefficient_error() { 3 } else { 2 };
        Failure::new(code, format!("{}: {e}", path.display()))
    })?;
    Ok((scene, text))
}

fn report_failure(e: ReportError) -> Failure {
    match e {
        ReportError::Coeff(_) => Failure::new(3, e),
        _ => Failure::new(1, e),
    }
}

fn bound(scene: &Path, curve: Option<&Path>, points: Option<usize>) -> Outcome {
    let (s, _) = load(scene)?;
    let d = s.domain().diameter_bound();
    let n = points.unwrap_or(s.options.curve_points());
    let summary = report::bound_summary(&s, &report::curve_grid(d, n)).map_err(report_failure)?;
    println!("{}", sig17(summary.x0));
    if let Some(path) = curve {
        write(path, &summary.curve.to_csv())?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn attractor_cmd(
    scene: &Path,
    method: Method,
    points: Option<usize>,
    seed: Option<u64>,
    burn_in: Option<usize>,
    cell: Option<f64>,
    max_iter: usize,
    output: Option<&Path>,
) -> Outcome {
    let (s, _) = load(scene)?;
    let d = s.domain().diameter_bound();
    let csv = match method {
        Method::Chaos => {
            let mut o = ChaosGameOptions::new(
                points.unwrap_or(s.options.points()),
                seed.unwrap_or(s.options.seed()),
            );
            o.burn_in = burn_in.unwrap_or(s.options.burn_in());
            attractor::chaos_game(&s.system, &o)
                .map_err(|e| Failure::new(1, e))?
                .to_csv()
        }
        Method::Grid => {
            let h = cell.unwrap_or(d / 256.0);
            let set = attractor::iterate_sets(&s.system, h, max_iter, h)
                .map_err(|e| Failure::new(1, e))?;
            if !set.converged {
                warn!("set iteration stopped after {} steps", set.iterations);
            }
            PointCloud::from_points(s.domain().dim(), set.centers()).to_csv()
        }
    };
    match output {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cover_cmd(
    scene: &Path,
    depth: Option<usize>,
    exponent: &str,
    word_limit: Option<u64>,
) -> Outcome {
    let (s, _) = load(scene)?;
    let d = s.domain().diameter_bound();
    let limit = word_limit.unwrap_or(s.options.word_limit());
    let envs = s.system.envelopes().map_err(|e| Failure::new(3, e))?;
    let p = if exponent == "auto" {
        let inf: Vec<f64> = envs.iter().map(|e| e.value_at_zero()).collect();
        wcdim::moran::solve_coefficients(&inf).map_err(|e| Failure::new(1, e))?
    } else {
        exponent
            .parse::<f64>()
            .ok()
            .filter(|p| p.is_finite() && *p >= 0.0)
            .ok_or_else(|| Failure::new(2, format!("bad exponent `{exponent}`")))?
    };
    let n = match depth {
        Some(n) => n,
        None => {
            cover::depth_for_epsilon(&envs, d, d / 100.0, limit).map_err(|e| Failure::new(1, e))?
        }
    };
    let rows = cover::cover_table(&envs, d, n, p, limit).map_err(|e| Failure::new(1, e))?;
    print!("{}", cover::cover_table_csv(&rows));
    Ok(0)
}

fn parse_window(w: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::new(2, format!("bad window `{w}` (expected lo:hi)"));
    let (a, b) = w.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

struct ScaleArgs {
    scales: Option<Vec<f64>>,
    base: Option<f64>,
    ratio: Option<f64>,
    k_min: Option<i32>,
    k_max: Option<i32>,
}

fn bounding_domain(cloud: &PointCloud) -> Result<MetricDomain, Failure> {
    let dim = cloud.dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in &cloud.points {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    // degenerate extents still need a box of positive size
    for i in 0..dim {
        if hi[i] <= lo[i] {
            hi[i] = lo[i] + 1.0;
        }
    }
    MetricDomain::new(Metric::Euclidean, lo, hi).map_err(|e| Failure::new(1, e))
}

fn is_point_csv(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("x1"))
}

fn boxdim_cmd(
    input: &Path,
    scene: Option<&Path>,
    scale_args: ScaleArgs,
    window: Option<&str>,
    counts: Option<&Path>,
) -> Outcome {
    let text = read(input)?;
    let (cloud, dom, opts) = if is_point_csv(&text) {
        let cloud = PointCloud::from_csv(&text).map_err(|e| Failure::new(2, e))?;
        if cloud.is_empty() {
            return Err(Failure::new(1, "point cloud is empty"));
        }
        match scene {
            Some(p) => {
                let (s, _) = load(p)?;
                (cloud, s.domain().clone(), s.options)
            }
            None => {
                let dom = bounding_domain(&cloud)?;
                (cloud, dom, Default::default())
            }
        }
    } else {
        let (s, _) = load(input)?;
        let mut o = ChaosGameOptions::new(s.options.points(), s.options.seed());
        o.burn_in = s.options.burn_in();
        let cloud = attractor::chaos_game(&s.system, &o).map_err(|e| Failure::new(1, e))?;
        (cloud, s.domain().clone(), s.options)
    };
    let d = dom.diameter_bound();
    let scales = match scale_args.scales {
        Some(v) => v,
        None => boxdim::scale_ladder(
            scale_args.base.unwrap_or(opts.scale_base(d)),
            scale_args.ratio.unwrap_or(opts.scale_ratio()),
            scale_args.k_min.unwrap_or(opts.scale_k_min()),
            scale_args.k_max.unwrap_or(opts.scale_k_max()),
        ),
    };
    let window = window.map(parse_window).transpose()?;
    let series = boxdim::box_counts(&cloud, &dom, &scales).map_err(|e| Failure::new(2, e))?;
    if let Some(p) = counts {
        write(p, &series.to_csv())?;
    }
    let fitted = boxdim::fit_dimension(series, window).map_err(|e| Failure::new(1, e))?;
    let fit = fitted.fit.expect("fit present");
    info!("r2 = {}", sig17(fit.r2));
    println!("{}", sig17(fit.slope));
    Ok(0)
}

fn verify_cmd(scene: &Path, output: Option<&Path>) -> Outcome {
    let (s, text) = load(scene)?;
    let r = report::verify(&s, &text).map_err(report_failure)?;
    let json = r.to_json_string();
    let target = output
        .map(Path::to_path_buf)
        .or_else(|| s.options.report_out.as_ref().map(PathBuf::from));
    match target {
        Some(p) => write(&p, &json)?,
        None => print!("{json}"),
    }
    let code = r.exit_code();
    if code == 4 {
        warn!("weak-contraction check failed");
    } else if code == 5 {
        warn!("fitted box dimension exceeds x0 + bound_tol");
    }
    Ok(code as u8)
}

fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| {
        std::env::var("WCDIM_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
    });
    if let Some(n) = n.filter(|n| *n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            warn!("could not size thread pool: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads(cli.threads);
    let outcome = match cli.command {
        Command::Bound {
            scene,
            curve,
            curve_points,
        } => bound(&scene, curve.as_deref(), curve_points),
        Command::Attractor {
            scene,
            method,
            points,
            seed,
            burn_in,
            cell,
            max_iter,
            output,
        } => attractor_cmd(
            &scene,
            method,
            points,
            seed,
            burn_in,
            cell,
            max_iter,
            output.as_deref(),
        ),
        Command::Cover {
            scene,
            depth,
            exponent,
            word_limit,
        } => cover_cmd(&scene, depth, &exponent, word_limit),
        Command::Boxdim {
            input,
            scene,
            scales,
            base,
            ratio,
            k_min,
            k_max,
            window,
            counts,
        } => boxdim_cmd(
            &input,
            scene.as_deref(),
            ScaleArgs {
                scales,
                base,
                ratio,
                k_min,
                k_max,
            },
            window.as_deref(),
            counts.as_deref(),
        ),
        Command::Verify { scene, output } => verify_cmd(&scene, output.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("wcdim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
