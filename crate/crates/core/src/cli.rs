//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cluster::{self, KMedoidsOptions, SilhouetteBand};
use crate::curve::{Domain, EventCurve, Mode};
use crate::dtw::euclidean;
use crate::error::Error;
use crate::io as csvio;
use crate::pairwise::{self, PairOptions, DEFAULT_DELTA};
use crate::registration::{self, RegisteredCurve, RegistrationOptions, WarpingEstimate, DEFAULT_GRID_SIZE};
use crate::synth::{self, BaseCurve, LatentMode, WarpFamily, WarpScenario};

#[derive(Debug, Parser)]
#[command(name = "eventwarp", version, about = "Register and cluster event-time curves by pairwise dynamic time warping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align two curves and print the alignment.
    Align(AlignArgs),
    /// Estimate warping functions for every curve and register them.
    Register(RegisterArgs),
    /// Cluster curves by their estimated warping functions.
    Cluster(ClusterArgs),
    /// Write a synthetic dataset with known warps.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Event CSV with header curve_id,event_time[,value].
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value = "standardized", value_parser = parse_mode)]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub domain_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub domain_max: f64,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Slope used to spread many-to-one runs.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Align the last observed events of every pair with each other.
    #[arg(long)]
    pub force_last_event: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub source: String,
    #[arg(long)]
    pub target: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct RegistrationArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Points of the common grid.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid: usize,
    /// Make the implied warps average to the identity.
    #[arg(long)]
    pub recenter: bool,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub registration: RegistrationArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Event CSV; warping functions are estimated first.
    #[arg(long, conflicts_with = "warpings", required_unless_present = "warpings")]
    pub input: Option<PathBuf>,
    /// Previously written warpings.csv.
    #[arg(long)]
    pub warpings: Option<PathBuf>,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value = "standardized", value_parser = parse_mode)]
    pub mode: Mode,
    #[command(flatten)]
    pub registration: RegistrationArgs,
    /// Fixed number of clusters; skips the silhouette scan.
    #[arg(long, conflicts_with = "k_range")]
    pub k: Option<usize>,
    /// Inclusive scan range, e.g. 2..6.
    #[arg(long, value_parser = parse_k_range)]
    pub k_range: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = cluster::DEFAULT_N_INIT)]
    pub n_init: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    Sine,
    TwoRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseKind {
    Linear,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatentKind {
    Quantile,
    Iid,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "sine")]
    pub scenario: ScenarioKind,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub min_events: usize,
    #[arg(long, default_value_t = 15)]
    pub max_events: usize,
    /// Sine amplitude (sine scenario) or late-regime shift (two-regime).
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub base: BaseKind,
    /// Rate of the exponential base curve.
    #[arg(long, default_value_t = 3.0)]
    pub rate: f64,
    #[arg(long, value_enum, default_value = "quantile")]
    pub latent: LatentKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub domain_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub domain_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points of the grid used for truth_warps.csv.
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    Ok((a, b))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input or parameters (exit 2).
    Usage(String),
    /// Anything else (exit 1).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut report = Vec::new();
    let result = execute(cli.command, &mut report);
    let _ = io::stdout().write_all(&report);
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut (dyn Write + Send)) -> CliResult<()> {
    match command {
        Command::Align(a) => with_threads(a.run.threads, || cmd_align(&a, out)),
        Command::Register(a) => with_threads(a.run.threads, || cmd_register(&a, out)),
        Command::Cluster(a) => with_threads(a.run.threads, || cmd_cluster(&a, out)),
        Command::Simulate(a) => cmd_simulate(&a, out),
    }
}

fn with_threads<F>(threads: usize, f: F) -> CliResult<()>
where
    F: FnOnce() -> CliResult<()> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(f)
}

fn domain_of(d: &DomainArgs) -> CliResult<Domain> {
    Ok(Domain::new(d.domain_min, d.domain_max)?)
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn anchor_all(curves: &[EventCurve]) -> CliResult<Vec<EventCurve>> {
    Ok(curves.iter().map(EventCurve::anchored).collect::<Result<_, _>>()?)
}

fn registration_options(r: &RegistrationArgs) -> RegistrationOptions {
    RegistrationOptions {
        pair: PairOptions {
            delta: r.pair.delta,
            force_last_event: r.pair.force_last_event,
        },
        grid_size: r.grid,
        recenter: r.recenter,
    }
}

fn cmd_align(args: &AlignArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let domain = domain_of(&args.input.domain)?;
    let curves = csvio::read_events_path(&args.input.input, domain, args.input.mode)?;
    let find = |id: &str| {
        curves
            .iter()
            .find(|c| c.id() == id)
            .ok_or_else(|| CliError::Usage(format!("curve {id:?} not found in input")))
    };
    let a = find(&args.source)?.anchored()?;
    let b = find(&args.target)?.anchored()?;
    let options = PairOptions {
        delta: args.pair.delta,
        force_last_event: args.pair.force_last_event,
    };
    let maps = pairwise::warp_pair(&a, &b, euclidean, &options)?;
    writeln!(out, "source: {} ({} points)", a.id(), a.len())?;
    writeln!(out, "target: {} ({} points)", b.id(), b.len())?;
    writeln!(out, "steps: {}", maps.alignment)?;
    writeln!(out, "cost: {}", maps.cost.total())?;
    writeln!(out, "{}", maps.alignment.diagram("a", "b"))?;
    let mut w = create(&args.run.out_dir, "pairwise_map.csv")?;
    csvio::write_pairwise_map(&mut w, &maps)?;
    w.flush()?;
    Ok(())
}

fn cmd_register(args: &RegisterArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let started = Instant::now();
    let domain = domain_of(&args.input.domain)?;
    let curves = csvio::read_events_path(&args.input.input, domain, args.input.mode)?;
    let anchored = anchor_all(&curves)?;
    let options = registration_options(&args.registration);
    let reg = registration::estimate_warpings(&anchored, euclidean, &options)?;

    let registered: Vec<RegisteredCurve> = anchored
        .iter()
        .zip(&reg.estimates)
        .map(|(c, e)| registration::register(c, e))
        .collect::<Result<_, _>>()?;
    let before: Vec<RegisteredCurve> = anchored.iter().map(RegisteredCurve::unregistered).collect();
    let g = options.grid_size;
    let mean_before = registration::mean_curve(&before, g)?;
    let mean_after = registration::mean_curve(&registered, g)?;
    let counts: Vec<usize> = curves.iter().map(EventCurve::n_events).collect();
    let groups = registration::group_means(&registered, &counts, g)?;

    let dir = &args.run.out_dir;
    let mut w = create(dir, "warpings.csv")?;
    csvio::write_warpings(&mut w, &reg.estimates)?;
    w.flush()?;
    let mut w = create(dir, "registered.csv")?;
    csvio::write_registered(&mut w, &registered)?;
    w.flush()?;
    let mut w = create(dir, "mean_curve.csv")?;
    csvio::write_mean_curve(&mut w, &mean_before, &mean_after)?;
    w.flush()?;
    let mut w = create(dir, "group_means.csv")?;
    csvio::write_group_means(&mut w, &groups)?;
    w.flush()?;

    let mean_events = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    writeln!(out, "curves: {}", curves.len())?;
    writeln!(out, "mean events per curve: {mean_events:.3}")?;
    writeln!(out, "pairwise alignments: {}", reg.pair_count)?;
    writeln!(out, "runtime: {:.3} s", started.elapsed().as_secs_f64())?;
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let domain = domain_of(&args.domain)?;
    let options = registration_options(&args.registration);
    let mut anchored = None;
    let estimates: Vec<WarpingEstimate> = match (&args.input, &args.warpings) {
        (Some(input), _) => {
            let curves = anchor_all(&csvio::read_events_path(input, domain, args.mode)?)?;
            let reg = registration::estimate_warpings(&curves, euclidean, &options)?;
            anchored = Some(curves);
            reg.estimates
        }
        (None, Some(path)) => {
            let mut e = csvio::read_warpings_path(path, domain, options.grid_size)?;
            if options.recenter {
                registration::recenter(&mut e);
            }
            e
        }
        (None, None) => return Err(CliError::Usage("either --input or --warpings is required".into())),
    };
    let n = estimates.len();
    if n < 3 {
        return Err(CliError::Usage(format!(
            "{}; clustering needs at least 3 curves so that 2 <= k <= n - 1",
            Error::BadK { k: 2, n }
        )));
    }
    let d = cluster::distance_matrix(&estimates)?;
    let base = KMedoidsOptions {
        k: 2,
        seed: args.seed,
        max_iter: cluster::DEFAULT_MAX_ITER,
        n_init: args.n_init,
    };
    let ids: Vec<String> = estimates.iter().map(|e| e.curve_id.clone()).collect();
    let clustering = match args.k {
        Some(k) => {
            if k < 2 || k >= n {
                return Err(Error::BadK { k, n }.into());
            }
            cluster::kmedoids(&d, &KMedoidsOptions { k, ..base })?
        }
        None => {
            let range = match args.k_range {
                Some((a, b)) => a..=b,
                None => cluster::default_k_range(n),
            };
            let sel = cluster::select_k(&d, range, &base)?;
            let mut w = create(&args.run.out_dir, "silhouette_scan.csv")?;
            csvio::write_silhouette_scan(&mut w, &sel.scan)?;
            w.flush()?;
            sel.clustering
        }
    };
    let mut w = create(&args.run.out_dir, "clusters.csv")?;
    csvio::write_clusters(&mut w, &ids, &clustering)?;
    w.flush()?;

    if let Some(curves) = anchored {
        let registered: Vec<RegisteredCurve> = curves
            .iter()
            .zip(&estimates)
            .map(|(c, e)| registration::register(c, e))
            .collect::<Result<_, _>>()?;
        let labels: Vec<usize> = clustering.labels.iter().map(|l| l + 1).collect();
        let groups = registration::group_means(&registered, &labels, options.grid_size)?;
        let mut w = create(&args.run.out_dir, "cluster_means.csv")?;
        csvio::write_group_means(&mut w, &groups)?;
        w.flush()?;
    }

    writeln!(out, "curves: {n}")?;
    writeln!(out, "k: {}", clustering.k)?;
    writeln!(
        out,
        "silhouette coefficient: {:.4} ({})",
        clustering.coefficient,
        SilhouetteBand::of(clustering.coefficient)
    )?;
    for label in 0..clustering.k {
        let size = clustering.labels.iter().filter(|&&l| l == label).count();
        writeln!(
            out,
            "cluster {}: {size} curves, medoid {}",
            label + 1,
            ids[clustering.medoids[label]]
        )?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let domain = Domain::new(args.domain_min, args.domain_max)?;
    let defaults = WarpScenario::two_regime(args.n, args.seed);
    let warp = match args.scenario {
        ScenarioKind::Sine => WarpFamily::Sine {
            components: args.components,
            amplitude: args.amplitude.unwrap_or(0.08),
        },
        ScenarioKind::TwoRegime => match defaults.warp {
            WarpFamily::TwoRegime { late, jitter, .. } => WarpFamily::TwoRegime {
                late: args.amplitude.unwrap_or(late),
                jitter,
                components: args.components,
            },
            other => other,
        },
    };
    let scenario = WarpScenario {
        n: args.n,
        min_events: args.min_events,
        max_events: args.max_events,
        base: match args.base {
            BaseKind::Linear => BaseCurve::Linear,
            BaseKind::Exponential => BaseCurve::Exponential { rate: args.rate },
        },
        warp,
        latent: match args.latent {
            LatentKind::Quantile => LatentMode::Quantile,
            LatentKind::Iid => LatentMode::Iid,
        },
        domain,
        seed: args.seed,
    };
    let sample = synth::simulate_sample(&scenario)?;
    let ids: Vec<String> = sample.curves.iter().map(|c| c.id().to_owned()).collect();
    let dir = &args.out_dir;
    let mut w = create(dir, "events.csv")?;
    csvio::write_events(&mut w, &sample.curves, true)?;
    w.flush()?;
    let mut w = create(dir, "truth_warps.csv")?;
    csvio::write_truth_warps(&mut w, &ids, &sample.warps, args.grid)?;
    w.flush()?;
    let mut w = create(dir, "regimes.csv")?;
    csvio::write_regimes(&mut w, &ids, &sample.regimes)?;
    w.flush()?;
    let events: usize = sample.curves.iter().map(EventCurve::n_events).sum();
    writeln!(out, "curves: {}", sample.curves.len())?;
    writeln!(out, "events: {events}")?;
    Ok(())
}
