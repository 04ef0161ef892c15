//! `mio` command-line front end.
//!
//! Every subcommand accepts `--config <file.json>` whose keys mirror the
//! long flag names (with `_` for `-`); flags given on the command line win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::dataset::samples_from_sequence;
use crate::error::Error;
use crate::eval::{imu_dead_reckoning, report};
use crate::imaging::ImagingConfig;
use crate::model::{checkpoint, loss_curve_csv, train, ModelConfig, TrainingConfig};
use crate::pipeline::{run_sequence, serve_sink, Mode, PipelineConfig};
use crate::se3::Trajectory;
use crate::sim::{record_sequence, routes, Floorplan, MotionScript, Sequence, SensorNoiseConfig};

#[derive(Debug, Parser)]
#[command(name = "mio", version, about = "mmWave radar + IMU fusion odometry toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a walk through the apartment and write a sequence directory.
    Simulate(SimulateArgs),
    /// Train the fusion network on one or more sequences.
    Train(TrainArgs),
    /// Offline (unpaced, lossless) pipeline over a sequence.
    Infer(InferArgs),
    /// Real-time pipeline over a sequence, paced by its timestamps.
    Run(RunArgs),
    /// Collect uplinked poses into one CSV per connection.
    Serve(ServeArgs),
    /// Score an estimated trajectory against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output sequence directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// One of sweep_all, living_loop, east_bedroom, west_bedroom.
    #[arg(long)]
    pub route: Option<String>,
    /// Walk duration, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Random waypoint displacement, metres.
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    out: Option<PathBuf>,
    seed: Option<u64>,
    route: Option<String>,
    duration: Option<f64>,
    jitter: Option<f64>,
    hold: Option<f64>,
    turn_rate: Option<f64>,
    waypoints: Option<Vec<[f64; 2]>>,
    sensor: Option<SensorNoiseConfig>,
    floorplan: Option<Floorplan>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sequence directories (repeatable).
    #[arg(long, num_args = 1..)]
    pub data: Vec<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Checkpoint path, e.g. `model.mio`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    data: Option<Vec<PathBuf>>,
    epochs: Option<usize>,
    seed: Option<u64>,
    learning_rate: Option<f64>,
    out: Option<PathBuf>,
    training: Option<TrainingConfig>,
    imaging: Option<ImagingConfig>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sequence directory.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Checkpoint written by `mio train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory for `trajectory.csv` and `stats.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: InferArgs,
    /// Pose sink `host:port`; overrides `MIO_UPLINK_ADDR`.
    #[arg(long)]
    pub uplink: Option<String>,
    /// Replay speed multiplier.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Artificial per-frame inference delay, seconds.
    #[arg(long)]
    pub inference_delay: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineFile {
    data: Option<PathBuf>,
    model: Option<PathBuf>,
    out: Option<PathBuf>,
    uplink: Option<String>,
    speed: Option<f64>,
    inference_delay: Option<f64>,
    pipeline: Option<PipelineConfig>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Listen address, `host:port`.
    #[arg(long)]
    pub bind: Option<String>,
    /// Directory receiving one CSV per connection.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit after this many connections have closed.
    #[arg(long)]
    pub max_connections: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServeFile {
    bind: Option<String>,
    out: Option<PathBuf>,
    max_connections: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Estimated trajectory CSV.
    #[arg(long)]
    pub est: Option<PathBuf>,
    /// Ground-truth trajectory CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Sequence directory; adds the IMU dead-reckoning baseline and supplies
    /// truth when `--truth` is absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// RPE interval in frames.
    #[arg(long)]
    pub delta: Option<usize>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalFile {
    est: Option<PathBuf>,
    truth: Option<PathBuf>,
    data: Option<PathBuf>,
    delta: Option<usize>,
    out: Option<PathBuf>,
}

/// Bad invocation (exit 1) versus failure while working (exit 2).
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_file<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

fn required<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing required --{flag}")))
}

fn existing(path: PathBuf, flag: &str) -> CliResult<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(usage(format!("--{flag}: {} does not exist", path.display())))
    }
}

fn route_by_name(name: &str) -> CliResult<&'static [[f64; 2]]> {
    Ok(match name {
        "sweep_all" => routes::SWEEP_ALL,
        "living_loop" => routes::LIVING_LOOP,
        "east_bedroom" => routes::EAST_BEDROOM,
        "west_bedroom" => routes::WEST_BEDROOM,
        other => return Err(usage(format!("unknown route `{other}`"))),
    })
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let file: SimulateFile = load_file(args.config.as_deref())?;
    let out = required(args.out.or(file.out), "out")?;
    let seed = required(args.seed.or(file.seed), "seed")?;
    let plan = file.floorplan.unwrap_or_else(Floorplan::apartment);
    let path = match file.waypoints {
        Some(w) if args.route.is_none() => w,
        _ => route_by_name(args.route.or(file.route).as_deref().unwrap_or("sweep_all"))?.to_vec(),
    };
    let jitter = args.jitter.or(file.jitter).unwrap_or(0.0);
    let path = if jitter > 0.0 {
        MotionScript::jittered_path(&path, &plan, jitter, seed)
    } else {
        path
    };
    let duration = args.duration.or(file.duration).unwrap_or(60.0);
    let script = MotionScript::walk(&path, duration, file.hold.unwrap_or(1.0), file.turn_rate.unwrap_or(1.5))?;
    let sensor = file.sensor.unwrap_or_default().with_seed(seed);
    let seq = record_sequence(&plan, &script, &sensor, &out)?;
    let points: usize = seq.scans.iter().map(|s| s.points.len()).sum();
    log::info!(
        "wrote {}: {} radar frames, {} IMU samples, {:.0} points/s",
        out.display(),
        seq.scans.len(),
        seq.imu.len(),
        points as f64 / seq.meta.duration
    );
    Ok(())
}

fn train_cmd(args: TrainArgs) -> CliResult<()> {
    let file: TrainFile = load_file(args.config.as_deref())?;
    let data = if args.data.is_empty() {
        file.data.unwrap_or_default()
    } else {
        args.data
    };
    if data.is_empty() {
        return Err(usage("missing required --data"));
    }
    let data = data.into_iter().map(|p| existing(p, "data")).collect::<CliResult<Vec<_>>>()?;
    let out = required(args.out.or(file.out), "out")?;
    let seed = required(args.seed.or(file.seed), "seed")?;
    let mut cfg = file.training.unwrap_or_default();
    cfg.rng_seed = seed;
    if let Some(e) = args.epochs.or(file.epochs) {
        cfg.epochs = e;
    }
    if let Some(lr) = args.learning_rate.or(file.learning_rate) {
        cfg.learning_rate = lr;
    }
    let imaging = file.imaging.unwrap_or_default();

    let mut dataset = Vec::with_capacity(data.len());
    for dir in &data {
        let seq = Sequence::read(dir)?;
        dataset.push(samples_from_sequence(&seq, &imaging)?);
    }
    let pairs: usize = dataset.iter().map(Vec::len).sum();
    log::info!("training on {pairs} frame pairs from {} sequences, {} epochs", data.len(), cfg.epochs);
    let model = ModelConfig {
        height: imaging.height,
        width: imaging.width,
    };
    let outcome = train(&dataset, model, &cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(Error::from)?;
    }
    checkpoint::save(&outcome.params, &out)?;
    print!("{}", loss_curve_csv(&outcome.loss_curve));
    Ok(())
}

fn pipeline_cmd(common: InferArgs, run: Option<(Option<String>, Option<f64>, Option<f64>)>) -> CliResult<()> {
    let file: PipelineFile = load_file(common.config.as_deref())?;
    let data = existing(required(common.data.or(file.data), "data")?, "data")?;
    let model = existing(required(common.model.or(file.model), "model")?, "model")?;
    let out = required(common.out.or(file.out), "out")?;

    let mut cfg = file.pipeline.unwrap_or_default();
    if let Some(u) = file.uplink {
        cfg.uplink = Some(u);
    }
    cfg = cfg.with_env_uplink();
    match run {
        Some((uplink, speed, delay)) => {
            cfg.mode = Mode::Realtime;
            if let Some(u) = uplink {
                cfg.uplink = Some(u);
            }
            if let Some(s) = speed.or(file.speed) {
                cfg.replay_speed = s;
            }
            if let Some(d) = delay.or(file.inference_delay) {
                cfg.inference_delay_s = d;
            }
        }
        None => cfg.mode = Mode::Offline,
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let params = checkpoint::load(&model)?;
    let seq = Sequence::read(&data)?;
    let output = run_sequence(&seq, &params, &cfg)?;
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    output.trajectory.write_csv(out.join("trajectory.csv"))?;
    std::fs::write(out.join("stats.json"), output.stats.to_json()).map_err(Error::from)?;
    log::info!(
        "{} poses, {} dropped, {:.1} FPS",
        output.stats.processed,
        output.stats.dropped,
        output.stats.fps
    );
    Ok(())
}

fn serve(args: ServeArgs) -> CliResult<()> {
    let file: ServeFile = load_file(args.config.as_deref())?;
    let bind = args.bind.or(file.bind).unwrap_or_else(|| "0.0.0.0:7700".into());
    let out = required(args.out.or(file.out), "out")?;
    let max = args.max_connections.or(file.max_connections);
    let sink = serve_sink(&bind, &out)?;
    eprintln!("listening on {}", sink.local_addr());
    match max {
        Some(n) => {
            while sink.closed().len() < n {
                std::thread::sleep(std::time::Duration::from_millis(20));
            }
            for r in sink.shutdown() {
                log::info!("{}: {} poses", r.path.display(), r.frames);
            }
        }
        None => sink.join(),
    }
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> CliResult<()> {
    let file: EvalFile = load_file(args.config.as_deref())?;
    let est = existing(required(args.est.or(file.est), "est")?, "est")?;
    let data = args.data.or(file.data).map(|p| existing(p, "data")).transpose()?;
    let truth_path = args.truth.or(file.truth).map(|p| existing(p, "truth")).transpose()?;
    let out = required(args.out.or(file.out), "out")?;
    let delta = args.delta.or(file.delta).unwrap_or(10);
    if delta == 0 {
        return Err(usage("--delta must be >= 1"));
    }

    let est = Trajectory::read_csv(est)?;
    let seq = data.map(Sequence::read).transpose()?;
    let truth = match (truth_path, &seq) {
        (Some(p), _) => Trajectory::read_csv(p)?,
        (None, Some(s)) => s.truth.clone(),
        (None, None) => return Err(usage("one of --truth or --data is required")),
    };
    let baseline = match &seq {
        Some(s) => {
            let t0 = s.imu.first().map(|i| i.timestamp).ok_or(Error::EmptyInput)?;
            let origin = *truth.pose_near(t0, 1e-6).ok_or(Error::NoTemporalOverlap)?;
            Some(imu_dead_reckoning(&s.imu, origin)?)
        }
        None => None,
    };
    let metrics = report(&est, &truth, baseline.as_ref(), delta, &out)?;
    println!("{}", serde_json::to_string(&metrics).map_err(Error::from)?);
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train_cmd(a),
        Command::Infer(a) => pipeline_cmd(a, None),
        Command::Run(a) => pipeline_cmd(a.common, Some((a.uplink, a.speed, a.inference_delay))),
        Command::Serve(a) => serve(a),
        Command::Eval(a) => eval_cmd(a),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 usage error, 2 runtime error.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let sub = args.get(1).and_then(|a| a.to_str()).unwrap_or_default().to_string();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = <Cli as clap::CommandFactory>::command();
            let help = match cmd.find_subcommand_mut(&sub) {
                Some(sc) => sc.render_help(),
                None => cmd.render_help(),
            };
            eprintln!("{help}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
