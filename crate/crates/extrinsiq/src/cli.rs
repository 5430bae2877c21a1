//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use extrinsiq_core::pipeline::Method;

use crate::commands::{self, Init, PairSelection, SweepSettings};
use crate::config::{env_seed, parse_assignment, parse_pair, ExperimentConfig};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "extrinsiq",
    version,
    about = "LIDAR/camera extrinsic calibration on simulated target sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset and write dataset.json.
    Gen(GenArgs),
    /// Calibrate sensor pairs and write calib_<method>.json.
    Calibrate(CalibrateArgs),
    /// Score calibration results: mlre.csv, stereo.csv, pose_error.csv.
    Eval(EvalArgs),
    /// Random-initialization sweep over one pair: sweep_<method>.csv.
    Sweep(SweepArgs),
    /// MSG with and without one sensor: ablation.csv.
    Ablate(AblateArgs),
    /// Everything an experiment configuration asks for.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ppc,
    Pbpc,
    Msg,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ppc => Method::Ppc,
            MethodArg::Pbpc => Method::Pbpc,
            MethodArg::Msg => Method::Msg,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Experiment configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `default` or a rig JSON file.
    #[arg(long)]
    pub rig: Option<String>,
    #[arg(long)]
    pub poses: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// NAME=SIGMA: range sigma (m) for a LIDAR, pixel sigma for a camera. Repeatable.
    #[arg(long, value_parser = parse_assignment, value_name = "NAME=SIGMA")]
    pub noise: Vec<(String, f64)>,
    /// NAME=FRACTION of off-target LIDAR returns. Repeatable.
    #[arg(long, value_parser = parse_assignment, value_name = "NAME=FRACTION")]
    pub clutter: Vec<(String, f64)>,
    /// Start from the noisy benchmark: 100 poses, 3 cm os1_64, 1 cm vlp_32,
    /// 10% clutter, 0.5 px cameras.
    #[arg(long)]
    pub benchmark: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// A:B, estimating a_from_b. Camera first for ppc and pbpc.
    #[arg(
        long,
        required_unless_present = "all_pairs",
        conflicts_with = "all_pairs"
    )]
    pub pair: Option<String>,
    /// Every camera/LIDAR pair; for msg, the global graph over all sensors.
    #[arg(long)]
    pub all_pairs: bool,
    /// identity, random, or a calibration file to start from.
    #[arg(long, default_value = "identity")]
    pub init: String,
    /// Seed for a random init (default: EXTRINSIQ_SEED, then the dataset seed).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Calibration result; repeat for one column per result.
    #[arg(long, required = true)]
    pub result: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write every table as JSON, with full breakdowns.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub pair: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Rotation sigma, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub sigma_rot: f64,
    /// Translation sigma, meters.
    #[arg(long, default_value_t = 0.5)]
    pub sigma_t: f64,
    /// Default: EXTRINSIQ_SEED, then the dataset seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cluster radius in radians and meters.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Sensor to leave out.
    #[arg(long)]
    pub drop: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub json: bool,
}

/// Seed precedence: flag, then `EXTRINSIQ_SEED`, then the configuration.
pub fn gen_config(args: &GenArgs) -> CliResult<ExperimentConfig> {
    let mut c = match (&args.config, args.benchmark) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, true) => ExperimentConfig::benchmark(0),
        (None, false) => ExperimentConfig::default(),
    };
    if let (Some(_), true) = (&args.config, args.benchmark) {
        let b = ExperimentConfig::benchmark(0);
        c.poses = b.poses;
        c.noise = b.noise;
    }
    if let Some(r) = &args.rig {
        c.rig = r.clone();
    }
    if let Some(n) = args.poses {
        c.poses = n;
    }
    if let Some(s) = env_seed()? {
        c.seed = s;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(o) = &args.out {
        c.out = o.clone();
    }
    let (rig, _) = c.rig()?;
    for (name, sigma) in &args.noise {
        c.set_sigma(&rig, name, *sigma)?;
    }
    for (name, f) in &args.clutter {
        c.set_clutter(&rig, name, *f)?;
    }
    Ok(c)
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => commands::gen(&gen_config(&a)?).map(drop),
        Command::Calibrate(a) => {
            let pairs = match &a.pair {
                Some(p) => {
                    let (x, y) = parse_pair(p)?;
                    PairSelection::One(x, y)
                }
                None => PairSelection::All,
            };
            commands::calibrate(
                &a.dataset,
                a.method.into(),
                &pairs,
                &Init::parse(&a.init),
                a.seed,
                &a.out,
            )
            .map(drop)
        }
        Command::Eval(a) => commands::eval(&a.dataset, &a.result, &a.out, a.json).map(drop),
        Command::Sweep(a) => {
            let (x, y) = parse_pair(&a.pair)?;
            let s = SweepSettings {
                method: a.method.into(),
                a: x,
                b: y,
                trials: a.trials,
                sigma_rot_deg: a.sigma_rot,
                sigma_t: a.sigma_t,
                seed: a.seed,
                tolerance: a.tolerance,
            };
            commands::sweep(&a.dataset, &s, &a.out, a.json).map(drop)
        }
        Command::Ablate(a) => commands::ablate(&a.dataset, &a.drop, &a.out, a.json).map(drop),
        Command::Run(a) => {
            let mut c = ExperimentConfig::load(&a.config)?;
            if let Some(s) = env_seed()? {
                c.seed = s;
            }
            commands::run(&c, a.json)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
