use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ferrolab", version, about = "Virtual ferrofluid bench: scripts, experiments and reservoir readout")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Chaos seed of the emulated device [default: config file, else 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, env = "FERROLAB_OUT", default_value = "ferrolab-out")]
    pub out: PathBuf,
    /// Device parameter file (`key = value` lines)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Device parameter override, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write SVG line plots next to the CSVs
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Statically check a script
    Check {
        script: PathBuf,
    },
    /// Run a script on a fresh bench
    Run {
        script: PathBuf,
        /// Abort after this many executed statements
        #[arg(long, default_value_t = ferrolab_core::script::DEFAULT_STEP_LIMIT)]
        step_limit: u64,
    },
    /// Run a canned experiment
    #[command(subcommand)]
    Experiment(Experiment),
    /// Fit the arm resistance so that Z22 at equilibrium equals a target
    Calibrate {
        /// Target collapsed Z22 in ohms
        #[arg(long, default_value_t = 15_300.0)]
        target: f64,
    },
    /// Collect reservoir samples by streaming digits through the device
    PrcCollect(CollectArgs),
    /// Train the readout network on collected samples
    PrcTrain(TrainArgs),
    /// Serve a trained readout over UDP
    PrcServe(ServeArgs),
    /// Stream digits from a bench to a running service
    PrcStream(StreamArgs),
    /// Post-process a bench log
    #[command(subcommand)]
    Analyze(Analyze),
    /// Re-run the command recorded in a manifest into --out
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArg {
    /// Digit bitmap file [default: built-in digits]
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Triangular staircase bias sweep
    Hysteresis {
        #[arg(long, default_value_t = -3.8, allow_negative_numbers = true)]
        v_min: f64,
        #[arg(long, default_value_t = 3.8, allow_negative_numbers = true)]
        v_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Seconds per level, latency and sweep included
        #[arg(long, default_value_t = 1.0)]
        dwell: f64,
        #[arg(long, default_value_t = 50)]
        loops: usize,
        /// Disable the chaotic perturbation
        #[arg(long)]
        chaos_off: bool,
    },
    /// Reset / write / hold ladder with write durations step, 2 step, ...
    Memory {
        #[arg(long, default_value_t = 14_338.0)]
        setpoint: f64,
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        levels: usize,
        /// Write duration increment (s)
        #[arg(long, default_value_t = 4.0)]
        t_step: f64,
        #[arg(long, default_value_t = 3.3, allow_negative_numbers = true)]
        v_write: f64,
        #[arg(long, default_value_t = 25.0)]
        settle: f64,
        #[arg(long, default_value_t = 30.0)]
        hold: f64,
        #[arg(long, default_value_t = 1.0)]
        interval: f64,
    },
    /// Pulse-train writes, counts step, 2 step, ...
    Pulse {
        #[arg(long, default_value_t = 14_338.0)]
        setpoint: f64,
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        count_step: usize,
        #[arg(long, default_value_t = 3.3, allow_negative_numbers = true)]
        v_high: f64,
        #[arg(long, default_value_t = 0.25)]
        t_high: f64,
        #[arg(long, default_value_t = 0.75)]
        t_low: f64,
        #[arg(long, default_value_t = 25.0)]
        settle: f64,
        #[arg(long, default_value_t = 30.0)]
        hold: f64,
        #[arg(long, default_value_t = 1.0)]
        interval: f64,
    },
    /// Stream all digits with constant pixel weights
    Differentiate {
        /// Seconds per pixel
        #[arg(long, default_value_t = 4.0)]
        weight: f64,
        #[command(flatten)]
        dataset: DatasetArg,
    },
    /// Weighted in-memory classification, each weighting on a fresh bench
    Classify {
        /// Weighted digit [default: every digit]
        #[arg(long)]
        digit: Option<usize>,
        #[arg(long, default_value_t = 14_338.0)]
        setpoint: f64,
        #[command(flatten)]
        dataset: DatasetArg,
    },
    /// Repeated weighted streaming with an offset ramp
    Progressive {
        #[arg(long, default_value_t = 1)]
        digit: usize,
        /// Offset ramp amplitude K (V)
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 15_100.0)]
        setpoint: f64,
        #[command(flatten)]
        dataset: DatasetArg,
    },
    /// Repeated classification until the dynamics shrink, then restoration
    Dynamics {
        #[arg(long, default_value_t = 4)]
        digit: usize,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Restoration hold at -10 V (s)
        #[arg(long, default_value_t = 60.0)]
        restore: f64,
        #[command(flatten)]
        dataset: DatasetArg,
    },
    /// Alternating set-point drives on Z22
    Chaos {
        #[arg(long, default_value_t = 16_250.0)]
        low: f64,
        #[arg(long, default_value_t = 16_300.0)]
        high: f64,
        #[arg(long, default_value_t = 10.0)]
        pause: f64,
        #[arg(long, default_value_t = 20)]
        cycles: usize,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Hysteresis { .. } => "hysteresis",
            Experiment::Memory { .. } => "memory",
            Experiment::Pulse { .. } => "pulse",
            Experiment::Differentiate { .. } => "differentiate",
            Experiment::Classify { .. } => "classify",
            Experiment::Progressive { .. } => "progressive",
            Experiment::Dynamics { .. } => "dynamics",
            Experiment::Chaos { .. } => "chaos",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StreamingArgs {
    /// Seconds per pixel
    #[arg(long, default_value_t = 2.0)]
    pub pixel_dwell: f64,
    #[arg(long, default_value_t = 16_350.0)]
    pub reset_low: f64,
    #[arg(long, default_value_t = 16_450.0)]
    pub reset_high: f64,
    #[arg(long, default_value_t = 16_400.0)]
    pub reset_star: f64,
    #[arg(long, default_value_t = 2.5)]
    pub reset_tol: f64,
    /// Number of digits used, starting from 0
    #[arg(long, default_value_t = 4)]
    pub digits: usize,
    #[command(flatten)]
    pub dataset: DatasetArg,
}

#[derive(Debug, Clone, Args)]
pub struct CollectArgs {
    /// Passes over the digits
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[command(flatten)]
    pub streaming: StreamingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Sample CSV written by prc-collect
    #[arg(long)]
    pub samples: PathBuf,
    /// full, single_layer or two_layer_4_1
    #[arg(long, default_value = "full")]
    pub variant: String,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Minibatch size [default: full batch]
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Model file written by prc-train
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, default_value_t = 5005)]
    pub port: u16,
    /// Stop after this many seconds [default: run until interrupted]
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    /// Service address, host:port
    #[arg(long)]
    pub server: String,
    /// Digits to stream
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Seed of the random label sequence
    #[arg(long, default_value_t = 11)]
    pub labels_seed: u64,
    /// Seconds to wait for each reply
    #[arg(long, default_value_t = 2.0)]
    pub timeout: f64,
    #[command(flatten)]
    pub streaming: StreamingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LogArgs {
    /// Bench log CSV
    pub log: PathBuf,
    /// t_s, bias_v, zc11, zc12, zc21 or zc22
    #[arg(long, default_value = "zc22")]
    pub column: String,
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Nearest-neighbour divergence curve and Lyapunov slope
    Lyapunov {
        #[command(flatten)]
        input: LogArgs,
        /// Leading rows to drop
        #[arg(long, default_value_t = 0)]
        skip: usize,
        /// Neighbour radius on the normalized series
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        /// First k of the slope fit [default: 1]
        #[arg(long)]
        fit_lo: Option<usize>,
        /// Last k of the slope fit [default: k_max / 4]
        #[arg(long)]
        fit_hi: Option<usize>,
    },
    /// Per-loop area, branch crossings and range of a staircase sweep
    Hysteresis {
        #[command(flatten)]
        input: LogArgs,
        /// Leading rows to drop (the initial zero-bias reading)
        #[arg(long, default_value_t = 1)]
        skip: usize,
        /// Samples per loop
        #[arg(long, default_value_t = 153)]
        per_loop: usize,
    },
    /// Mean, standard deviation and histogram
    Stats {
        #[command(flatten)]
        input: LogArgs,
        /// Leading rows to drop
        #[arg(long, default_value_t = 0)]
        skip: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
}
