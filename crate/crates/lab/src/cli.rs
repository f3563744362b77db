//! The `inpaint-lab` command line.
//!
//! Every flag can also be set through the environment: global flags as
//! `INPAINT_<FLAG>` and subcommand flags as `INPAINT_<SUBCOMMAND>_<FLAG>`,
//! upper-cased with dashes turned into underscores. `--config FILE` reads
//! flags from a JSON object (for example a run's `resolved-config.json`);
//! explicit flags win over the file, and the file wins over the environment.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use inpaint_core::embedder::{train_embedder, EmbedTrainConfig, ToyEmbedder};
use inpaint_core::image::Image;
use inpaint_core::initializer::{train_initializer_with, InitTrainConfig, InitializerCheckpoint};
use inpaint_core::inpaint::{optimize_latent, OptimConfig, OptimizerKind};
use inpaint_core::mask::{apply_mask, make_mask, CorruptionSpec, MaskKind, CHECKERBOARD_SIZES};
use inpaint_core::metrics::{psnr, temporal_consistency};
use inpaint_core::model::{train_gan_with, Architecture, GanTrainConfig, ModelCheckpoint};
use inpaint_core::pseudo::build_pseudo_sequence;
use inpaint_core::seqinit::{train_sequence_initializer_with, SeqInitTrainConfig};
use inpaint_core::sequence::{optimize_window, smoothness_loss, window_ranges, SequenceOptimConfig, SequenceWindow};
use inpaint_core::{rng, LatentVector};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::checkpoint;
use crate::dataset::{self, DatasetManifest, Split, SplitSpec, ToyFaceSpec};
use crate::error::{LabError, Result};
use crate::experiments::{self, AblationConfig, ConvergenceConfig, InitMethod, Stack};
use crate::files::{self, write_csv, write_json};
use crate::logging;
use crate::plot::{self, Series};
use crate::results;

pub const ENV_PREFIX: &str = "INPAINT";

#[derive(Debug, Parser, Serialize)]
#[command(name = "inpaint-lab", version, about = "Latent-space GAN inpainting experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Verbosity {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl Verbosity {
    fn filter(self) -> log::LevelFilter {
        match self {
            Verbosity::Error => log::LevelFilter::Error,
            Verbosity::Warn => log::LevelFilter::Warn,
            Verbosity::Info => log::LevelFilter::Info,
            Verbosity::Debug => log::LevelFilter::Debug,
            Verbosity::Trace => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GlobalArgs {
    /// Root of all run directories.
    #[arg(long, global = true, default_value = "runs")]
    pub outdir: PathBuf,
    /// Global seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Verbosity::Info)]
    pub verbosity: Verbosity,
    /// Worker threads for per-item work in eval, ablate and data loading.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// JSON file of flag values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Render a toy face dataset with identities and expression sequences.
    SynthData(SynthArgs),
    /// Train the generator and discriminator.
    TrainGan(TrainGanArgs),
    /// Train the single-frame latent initializer against a frozen GAN.
    TrainInit(TrainInitArgs),
    /// Train the recurrent sequence initializer against a frozen GAN.
    TrainSeqInit(TrainSeqInitArgs),
    /// Inpaint one image.
    Inpaint(InpaintArgs),
    /// Inpaint a frame sequence window by window.
    InpaintSeq(InpaintSeqArgs),
    /// Random versus learned initialization over a dataset's test images.
    Eval(EvalArgs),
    /// Baseline / smoothness / LSTM+smoothness comparison on pseudo sequences.
    Ablate(AblateArgs),
    /// Render trace CSVs as a line plot and images as a grid.
    Plot(PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SynthData(_) => "synth-data",
            Command::TrainGan(_) => "train-gan",
            Command::TrainInit(_) => "train-init",
            Command::TrainSeqInit(_) => "train-seq-init",
            Command::Inpaint(_) => "inpaint",
            Command::InpaintSeq(_) => "inpaint-seq",
            Command::Eval(_) => "eval",
            Command::Ablate(_) => "ablate",
            Command::Plot(_) => "plot",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub count: usize,
    #[arg(long, default_value_t = 32)]
    pub resolution: usize,
    #[arg(long, default_value_t = 50)]
    pub identities: usize,
    #[arg(long, default_value_t = 2)]
    pub sequences_per_identity: usize,
    #[arg(long, default_value_t = 8)]
    pub sequence_length: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SplitArgs {
    /// Fraction of items (or identities, or sequences) held out for testing.
    #[arg(long, default_value_t = 0.1)]
    pub test_fraction: f64,
    /// Keep each identity entirely on one side of the split.
    #[arg(long)]
    pub identity_disjoint: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DataArgs {
    /// Manifest file, directory holding `manifest.json`, or image folder.
    #[arg(long)]
    pub data: PathBuf,
    /// Resolution when indexing an image folder.
    #[arg(long, default_value_t = 32)]
    pub data_resolution: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainGanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = Architecture::DEFAULT_LATENT_DIM)]
    pub latent_dim: usize,
    #[arg(long, default_value_t = 8)]
    pub base_width: usize,
    #[arg(long, default_value_t = 3000)]
    pub steps: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = GanTrainConfig::default().lr_generator)]
    pub lr_generator: f64,
    #[arg(long, default_value_t = GanTrainConfig::default().lr_discriminator)]
    pub lr_discriminator: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta1: f64,
    /// Prior samples for re-estimating generator batch-norm statistics.
    #[arg(long, default_value_t = 512)]
    pub bn_recalibration: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InitTrainArgs {
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3000)]
    pub steps: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    /// Mask kinds drawn while training.
    #[arg(long, value_delimiter = ',', default_values_t = MaskKind::ALL.to_vec())]
    pub mask_kinds: Vec<MaskKind>,
    /// Encoder base width; defaults to the GAN's (or the warm start's).
    #[arg(long)]
    pub width: Option<usize>,
}

impl InitTrainArgs {
    fn config(&self, seed: u64) -> InitTrainConfig {
        InitTrainConfig {
            lambda: self.lambda,
            batch_size: self.batch_size,
            steps: self.steps,
            learning_rate: self.learning_rate,
            seed,
            mask_kinds: self.mask_kinds.clone(),
            width: self.width,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainInitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// GAN checkpoint directory.
    #[arg(long)]
    pub gan: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: InitTrainArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WindowSource {
    /// Each training still repeated `window` times.
    Pseudo,
    /// Sliding windows over the training sequences.
    Sequences,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainSeqInitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub gan: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: InitTrainArgs,
    #[arg(long, default_value_t = inpaint_core::seqinit::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = inpaint_core::seqinit::DEFAULT_HIDDEN)]
    pub h_dim: usize,
    /// Adds the perceptual term weighted by --lambda.
    #[arg(long)]
    pub perceptual: bool,
    /// Initializer checkpoint whose encoder seeds the shared encoder.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WindowSource::Pseudo)]
    pub windows: WindowSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerArg {
    Adam,
    SgdMomentum,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimArgs {
    /// Perceptual weight.
    #[arg(long, default_value_t = 0.003)]
    pub eta: f64,
    /// Iteration budget; defaults to 700 for random and 50 for learned init.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
}

impl OptimArgs {
    fn config(&self, init: InitMethod, seed: u64) -> OptimConfig {
        let base = match init {
            InitMethod::Random => OptimConfig::random_init(),
            InitMethod::Learned | InitMethod::Lstm => OptimConfig::learned_init(),
        };
        OptimConfig {
            eta: self.eta,
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            learning_rate: self.learning_rate,
            optimizer: match self.optimizer {
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::SgdMomentum => OptimizerKind::SgdMomentum,
            },
            record_every: self.record_every,
            seed,
            restarts: self.restarts,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MaskArgs {
    #[arg(long, default_value_t = MaskKind::Central)]
    pub mask_kind: MaskKind,
    /// Corrupted fraction for central and freehand masks.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = CHECKERBOARD_SIZES.to_vec())]
    pub block_sizes: Vec<usize>,
}

impl MaskArgs {
    fn spec(&self, seed: u64) -> CorruptionSpec {
        let mut s = CorruptionSpec::new(self.mask_kind, seed).with_block_sizes(&self.block_sizes);
        s.fraction = self.fraction;
        s
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InpaintArgs {
    #[arg(long)]
    pub gan: PathBuf,
    /// Image to corrupt and inpaint; cropped and resized to the GAN's resolution.
    #[arg(long)]
    pub image: PathBuf,
    /// Mask PNG (255 observed, 0 corrupted) instead of a generated mask.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub mask_args: MaskArgs,
    #[arg(long, value_enum, default_value_t = InitMethod::Random)]
    pub init: InitMethod,
    #[arg(long)]
    pub initializer: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub optim: OptimArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InpaintSeqArgs {
    #[arg(long)]
    pub gan: PathBuf,
    /// Directory of frames, taken in lexicographic order.
    #[arg(long, conflicts_with = "image", required_unless_present = "image")]
    pub frames: Option<PathBuf>,
    /// Single image turned into a pseudo sequence of --window frames.
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Frames between window starts; defaults to the window length.
    #[arg(long)]
    pub stride: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub mask_args: MaskArgs,
    #[arg(long, value_enum, default_value_t = InitMethod::Random)]
    pub init: InitMethod,
    #[arg(long)]
    pub initializer: Option<PathBuf>,
    #[arg(long)]
    pub seq_init: Option<PathBuf>,
    /// Smoothness weight.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub optim: OptimArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    #[arg(long)]
    pub gan: PathBuf,
    #[arg(long)]
    pub initializer: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Test images to evaluate (all when larger than the split).
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub mask_args: MaskArgs,
    #[arg(long, default_value_t = 0.003)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 700)]
    pub random_iters: usize,
    /// Budget of the learned-init runs; defaults to --random-iters.
    #[arg(long)]
    pub learned_iters: Option<usize>,
    /// Rows in the comparison grid.
    #[arg(long, default_value_t = 8)]
    pub grid_items: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AblateArgs {
    #[arg(long)]
    pub gan: PathBuf,
    #[arg(long)]
    pub seq_init: PathBuf,
    /// Identity embedder; trained on the labelled training stills when absent.
    #[arg(long)]
    pub embedder: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Pseudo sequences, one per test image.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub mask_args: MaskArgs,
    #[arg(long, default_value_t = 0.003)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 700)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1500)]
    pub embed_steps: usize,
    #[arg(long, default_value_t = inpaint_core::embedder::DEFAULT_EMBED_DIM)]
    pub embed_dim: usize,
    /// Pseudo sequences drawn in the grid.
    #[arg(long, default_value_t = 4)]
    pub grid_items: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PlotArgs {
    /// Trace CSVs (`iteration` plus value columns); one line each.
    #[arg(long, value_delimiter = ',')]
    pub trace: Vec<PathBuf>,
    /// Column to plot from every trace.
    #[arg(long, default_value = "total")]
    pub column: String,
    #[arg(long)]
    pub log_y: bool,
    /// Images for a grid, laid out row by row.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<PathBuf>,
    /// Grid columns; the grid layout of three is original, damaged, inpainted.
    #[arg(long, default_value_t = 3)]
    pub columns: usize,
    #[arg(long, default_value_t = 4)]
    pub scale: u32,
}

fn env_name(parts: &[&str]) -> String {
    let mut s = String::from(ENV_PREFIX);
    for p in parts {
        s.push('_');
        s.push_str(&p.to_ascii_uppercase().replace('-', "_"));
    }
    s
}

fn arg_ids(cmd: &clap::Command) -> Vec<String> {
    cmd.get_arguments()
        .filter(|a| !matches!(a.get_id().as_str(), "help" | "version"))
        .filter(|a| !a.is_global_set() || cmd.get_name() == "inpaint-lab")
        .filter_map(|a| a.get_long().map(|_| a.get_id().to_string()))
        .collect()
}

/// The clap command with an environment variable attached to every flag.
pub fn command() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    for id in arg_ids(&cmd) {
        let long = cmd.get_arguments().find(|a| a.get_id() == id.as_str()).and_then(|a| a.get_long()).unwrap().to_string();
        cmd = cmd.mut_arg(&id, |a| a.env(env_name(&[&long])));
    }
    let subs: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in subs {
        cmd = cmd.mut_subcommand(&name, |mut s| {
            s = s.args_override_self(true);
            let args: Vec<(String, String)> = s
                .get_arguments()
                .filter(|a| !a.is_global_set() && !matches!(a.get_id().as_str(), "help" | "version"))
                .filter_map(|a| a.get_long().map(|l| (a.get_id().to_string(), l.to_string())))
                .collect();
            for (id, long) in args {
                s = s.mut_arg(&id, |a| a.env(env_name(&[&name, &long])));
            }
            s
        });
    }
    cmd
}

/// The on-disk form of a parsed invocation.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedConfig {
    pub command: String,
    pub args: Map<String, Value>,
}

impl ResolvedConfig {
    pub fn of(cli: &Cli) -> Self {
        let mut args = Map::new();
        for v in [
            serde_json::to_value(&cli.global).expect("serializable"),
            serde_json::to_value(&cli.command).expect("serializable"),
        ] {
            if let Value::Object(m) = v {
                args.extend(m);
            }
        }
        args.retain(|_, v| !v.is_null());
        Self {
            command: cli.command.name().to_string(),
            args,
        }
    }
}

fn value_to_arg(key: &str, v: &Value) -> Result<Vec<OsString>> {
    let flag = format!("--{key}");
    let scalar = |v: &Value| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            _ => Err(LabError::Usage(format!("config key {key:?} has an unsupported value {v}"))),
        }
    };
    Ok(match v {
        Value::Null | Value::Bool(false) => vec![],
        Value::Bool(true) => vec![flag.into()],
        Value::Array(items) => {
            if items.is_empty() {
                return Ok(vec![]);
            }
            let joined = items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(",");
            vec![format!("{flag}={joined}").into()]
        }
        other => vec![format!("{flag}={}", scalar(other)?).into()],
    })
}

/// Splices the flags of a `--config` file in front of the explicit flags.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut i = 0;
    while i < argv.len() {
        if strs[i] == "--config" && i + 1 < argv.len() {
            path = Some(PathBuf::from(&argv[i + 1]));
            i += 2;
            continue;
        }
        if let Some(p) = strs[i].strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
            i += 1;
            continue;
        }
        rest.push(argv[i].clone());
        i += 1;
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::Usage(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| LabError::Usage(format!("{}: {e}", path.display())))?;
    let (command, args) = match serde_json::from_value::<ResolvedConfig>(value.clone()) {
        Ok(rc) => (Some(rc.command), rc.args),
        Err(_) => match value {
            Value::Object(m) => (None, m),
            _ => return Err(LabError::Usage(format!("{}: expected a JSON object", path.display()))),
        },
    };
    let subs: Vec<String> = command_names();
    let pos = rest.iter().position(|a| subs.iter().any(|s| a.to_str() == Some(s.as_str())));
    let pos = match (pos, &command) {
        (Some(p), Some(c)) if rest[p].to_str() != Some(c.as_str()) => {
            return Err(LabError::Usage(format!(
                "config is for `{c}` but the command line runs `{}`",
                rest[p].to_string_lossy()
            )))
        }
        (Some(p), _) => p,
        (None, Some(c)) => {
            rest.insert(1.min(rest.len()), c.into());
            1.min(rest.len() - 1)
        }
        (None, None) => return Err(LabError::Usage("config file given without a subcommand".into())),
    };
    let mut extra = Vec::new();
    for (k, v) in &args {
        extra.extend(value_to_arg(k, v)?);
    }
    let mut out = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    Ok(out)
}

fn command_names() -> Vec<String> {
    Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect()
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns 0 on success, 2 on usage errors and 1 on runtime failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match command().try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    logging::init(cli.global.verbosity.filter());
    match execute(&cli) {
        Ok(dir) => {
            log::info!("run directory: {}", dir.display());
            logging::detach();
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            log::error!("{e}");
            logging::detach();
            match e {
                LabError::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}

/// `<outdir>/<command>/<timestamp>`, suffixed when the name is taken.
fn create_run_dir(outdir: &Path, command: &str) -> Result<PathBuf> {
    let base = outdir.join(command);
    files::ensure_dir(&base)?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S%.3f").to_string();
    let mut dir = base.join(&stamp);
    let mut k = 1;
    while dir.exists() {
        k += 1;
        dir = base.join(format!("{stamp}-{k}"));
    }
    std::fs::create_dir(&dir).map_err(crate::error::io_err(&dir))?;
    Ok(dir)
}

fn execute(cli: &Cli) -> Result<PathBuf> {
    validate(cli)?;
    let dir = create_run_dir(&cli.global.outdir, cli.command.name())?;
    logging::attach(&dir.join("logs.txt")).map_err(crate::error::io_err(&dir))?;
    write_json(&dir.join("resolved-config.json"), &ResolvedConfig::of(cli))?;
    log::info!("{} in {}", cli.command.name(), dir.display());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs)
        .build()
        .map_err(|e| LabError::Usage(format!("thread pool: {e}")))?;
    let g = &cli.global;
    pool.install(|| match &cli.command {
        Command::SynthData(a) => synth_data(a, g, &dir),
        Command::TrainGan(a) => train_gan_cmd(a, g, &dir),
        Command::TrainInit(a) => train_init_cmd(a, g, &dir),
        Command::TrainSeqInit(a) => train_seq_init_cmd(a, g, &dir),
        Command::Inpaint(a) => inpaint_cmd(a, g, &dir),
        Command::InpaintSeq(a) => inpaint_seq_cmd(a, g, &dir),
        Command::Eval(a) => eval_cmd(a, g, &dir),
        Command::Ablate(a) => ablate_cmd(a, g, &dir),
        Command::Plot(a) => plot_cmd(a, &dir),
    })?;
    Ok(dir)
}

/// Checks that need no IO, so usage errors leave nothing on disk.
fn validate(cli: &Cli) -> Result<()> {
    let usage = |m: String| Err(LabError::Usage(m));
    if cli.global.jobs == 0 {
        return usage("--jobs must be at least 1".into());
    }
    match &cli.command {
        Command::Inpaint(a) if a.init == InitMethod::Lstm => usage("inpaint supports --init random or learned".into()),
        Command::Inpaint(a) if a.init == InitMethod::Learned && a.initializer.is_none() => {
            usage("--init learned needs --initializer".into())
        }
        Command::InpaintSeq(a) if a.init == InitMethod::Learned && a.initializer.is_none() => {
            usage("--init learned needs --initializer".into())
        }
        Command::InpaintSeq(a) if a.init == InitMethod::Lstm && a.seq_init.is_none() => {
            usage("--init lstm needs --seq-init".into())
        }
        Command::Plot(a) if a.trace.is_empty() && a.grid.is_empty() => usage("plot needs --trace or --grid".into()),
        Command::Plot(a) if a.columns == 0 || a.scale == 0 => usage("--columns and --scale must be positive".into()),
        _ => Ok(()),
    }
}

fn split_spec(s: &SplitArgs, seed: u64) -> SplitSpec {
    SplitSpec {
        test_fraction: s.test_fraction,
        seed,
        identity_disjoint: s.identity_disjoint,
    }
}

fn open_data(a: &DataArgs, seed: u64) -> Result<DatasetManifest> {
    let is_manifest = a.data.is_file() || a.data.join(dataset::MANIFEST_FILE).is_file();
    let m = if is_manifest {
        DatasetManifest::open(&a.data)?
    } else {
        dataset::load_dataset(&a.data, a.data_resolution, &split_spec(&a.split, seed))?
    };
    log::info!(
        "dataset {}: {} train / {} test items at {}px",
        m.root_path.display(),
        m.count(Split::Train),
        m.count(Split::Test),
        m.resolution
    );
    Ok(m)
}

/// Training stills, or every training item when the set has no stills.
fn training_images(m: &DatasetManifest) -> Result<(Vec<Image>, Vec<Option<usize>>)> {
    let mut items = m.stills(Split::Train);
    if items.is_empty() {
        items = m.items.iter().filter(|i| i.split == Split::Train).collect();
    }
    let labels = items.iter().map(|i| i.identity_label).collect();
    Ok((m.load_images(&items)?, labels))
}

fn test_stills(m: &DatasetManifest, count: usize) -> Result<Vec<(String, Image)>> {
    let items: Vec<_> = m.stills(Split::Test).into_iter().take(count).collect();
    if items.is_empty() {
        return Err(inpaint_core::Error::Data("the dataset has no test stills".into()).into());
    }
    let images = m.load_images(&items)?;
    Ok(items.iter().map(|i| i.item_id.clone()).zip(images).collect())
}

fn synth_data(a: &SynthArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let spec = ToyFaceSpec {
        count: a.count,
        resolution: a.resolution,
        identities: a.identities,
        sequences_per_identity: a.sequences_per_identity,
        sequence_length: a.sequence_length,
        seed: g.seed,
    };
    let m = dataset::synthesize_toy_faces(&dir.join("data"), &spec, &split_spec(&a.split, g.seed))?;
    log::info!("wrote {} items ({} test)", m.items.len(), m.count(Split::Test));
    let preview: Vec<Image> = m.load_images(&m.items.iter().take(16).collect::<Vec<_>>())?;
    let rows: Vec<Vec<Image>> = preview.chunks(8).map(<[Image]>::to_vec).collect();
    files::save_rgb(&dir.join("preview.png"), &plot::image_grid(&rows, 2, 2))
}

fn loss_plot(path: &Path, series: Vec<Series>) -> Result<()> {
    files::save_rgb(path, &plot::line_plot(&series, false, 640, 360))
}

fn train_gan_cmd(a: &TrainGanArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let m = open_data(&a.data, g.seed)?;
    let (images, _) = training_images(&m)?;
    let arch = Architecture::new(a.latent_dim, m.resolution, a.base_width)?;
    let cfg = GanTrainConfig {
        batch_size: a.batch_size,
        steps: a.steps,
        lr_generator: a.lr_generator,
        lr_discriminator: a.lr_discriminator,
        beta1: a.beta1,
        seed: g.seed,
        bn_recalibration: a.bn_recalibration,
    };
    let every = (a.steps / 20).max(1);
    let ckpt = train_gan_with(&images, arch, &cfg, |r| {
        if r.step % every == 0 {
            log::info!(
                "step {} d_loss {:.4} g_loss {:.4} D(real) {:.3} D(fake) {:.3}",
                r.step,
                r.d_loss,
                r.g_loss,
                r.d_real,
                r.d_fake
            );
        }
    })?;
    checkpoint::save_gan(&dir.join("checkpoint"), &ckpt)?;
    let mut r = rng::child(g.seed, 77);
    let zs: Vec<LatentVector> = (0..32).map(|_| LatentVector::sample_prior(arch.latent_dim, &mut r)).collect();
    let samples = ckpt.generate(&zs)?;
    let rows: Vec<Vec<Image>> = samples.chunks(8).map(<[Image]>::to_vec).collect();
    files::save_rgb(&dir.join("samples.png"), &plot::image_grid(&rows, 2, 2))?;
    let pts = |f: fn(&inpaint_core::model::GanStepRecord) -> f64| -> Vec<(f64, f64)> {
        ckpt.history.iter().map(|h| (h.step as f64, f(h))).collect()
    };
    loss_plot(
        &dir.join("losses.png"),
        vec![
            Series { name: "d_loss".into(), points: pts(|h| h.d_loss) },
            Series { name: "g_loss".into(), points: pts(|h| h.g_loss) },
        ],
    )
}

fn load_gan(path: &Path) -> Result<ModelCheckpoint> {
    let g = checkpoint::load_gan(path)?;
    log::info!(
        "GAN {}: latent_dim {} at {}px, {} steps",
        path.display(),
        g.latent_dim(),
        g.resolution(),
        g.step
    );
    Ok(g)
}

fn check_resolution(m: &DatasetManifest, gan: &ModelCheckpoint) -> Result<()> {
    if m.resolution != gan.resolution() {
        return Err(inpaint_core::Error::Dimension(format!(
            "dataset at {}px, GAN at {}px",
            m.resolution,
            gan.resolution()
        ))
        .into());
    }
    Ok(())
}

fn init_history_plot(path: &Path, history: &[inpaint_core::initializer::InitStepRecord]) -> Result<()> {
    loss_plot(
        path,
        vec![Series {
            name: "loss".into(),
            points: history.iter().map(|h| (h.step as f64, h.loss)).collect(),
        }],
    )
}

fn init_logger(every: usize) -> impl FnMut(&inpaint_core::initializer::InitStepRecord) {
    move |r| {
        if r.step % every == 0 {
            log::info!("step {} loss {:.5} mse {:.5} perceptual {:.4}", r.step, r.loss, r.mse, r.perceptual);
        }
    }
}

fn train_init_cmd(a: &TrainInitArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let m = open_data(&a.data, g.seed)?;
    check_resolution(&m, &gan)?;
    let (images, _) = training_images(&m)?;
    let cfg = a.train.config(g.seed);
    let p = train_initializer_with(&images, &gan, &cfg, init_logger((a.train.steps / 20).max(1)))?;
    checkpoint::save_initializer(&dir.join("checkpoint"), &p)?;
    init_history_plot(&dir.join("losses.png"), &p.history)
}

fn train_seq_init_cmd(a: &TrainSeqInitArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let m = open_data(&a.data, g.seed)?;
    check_resolution(&m, &gan)?;
    let windows: Vec<Vec<Image>> = match a.windows {
        WindowSource::Pseudo => training_images(&m)?.0.into_iter().map(|im| vec![im; a.window]).collect(),
        WindowSource::Sequences => {
            let mut out = Vec::new();
            for (_, frames) in m.sequences(Split::Train) {
                let imgs = m.load_images(&frames)?;
                for r in window_ranges(imgs.len(), a.window, 1)? {
                    out.push(imgs[r].to_vec());
                }
            }
            out
        }
    };
    if windows.is_empty() {
        return Err(inpaint_core::Error::Data("no training windows".into()).into());
    }
    log::info!("{} training windows of {}", windows.len(), a.window);
    let warm: Option<InitializerCheckpoint> = a.warm_start.as_deref().map(checkpoint::load_initializer).transpose()?;
    let cfg = SeqInitTrainConfig {
        base: a.train.config(g.seed),
        window: a.window,
        h_dim: a.h_dim,
        perceptual: a.perceptual,
    };
    let ckpt = train_sequence_initializer_with(&windows, &gan, &cfg, warm.as_ref(), init_logger((a.train.steps / 20).max(1)))?;
    checkpoint::save_sequence_initializer(&dir.join("checkpoint"), &ckpt)?;
    init_history_plot(&dir.join("losses.png"), &ckpt.history)
}

fn load_input_image(path: &Path, resolution: usize) -> Result<Image> {
    Ok(dataset::fit_to_resolution(&files::load_rgb(path)?, resolution))
}

fn inpaint_cmd(a: &InpaintArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let clean = load_input_image(&a.image, gan.resolution())?;
    let mask = match &a.mask {
        Some(p) => {
            let m = files::load_mask(p, a.mask_args.mask_kind)?;
            if m.dims() != clean.dims() {
                return Err(inpaint_core::Error::Dimension(format!(
                    "mask {:?} for a {:?} image",
                    m.dims(),
                    clean.dims()
                ))
                .into());
            }
            m
        }
        None => make_mask(&a.mask_args.spec(rng::derive_seed(g.seed, 1)), clean.dims())?,
    };
    let damaged = apply_mask(&clean, &mask)?;
    let init = a.initializer.as_deref().map(checkpoint::load_initializer).transpose()?;
    let mut stack = Stack::new(&gan);
    stack.initializer = init.as_ref();
    let z0 = experiments::initial_latents(a.init, &stack, std::slice::from_ref(&damaged), rng::derive_seed(g.seed, 2))?.remove(0);
    let cfg = a.optim.config(a.init, g.seed);
    let res = optimize_latent(&damaged, &mask, &z0, &gan, &cfg)?;
    log::info!(
        "{} init: total {:.4} -> best {:.4} at iteration {}; PSNR vs input {:.2} dB",
        a.init,
        res.trace[0].total,
        res.best_total,
        res.best_iteration,
        psnr(&res.inpainted, &clean)?
    );
    results::write_inpaint_result(&dir.join("result"), &res, &damaged, &mask, Some(&clean))?;
    files::save_rgb(
        &dir.join("triplet.png"),
        &plot::image_grid(&[vec![clean, damaged, res.inpainted.clone()]], 4, 2),
    )?;
    trace_plot(&dir.join("trace.png"), &[("total".to_string(), res.trace.clone())])
}

fn trace_plot(path: &Path, traces: &[(String, Vec<inpaint_core::inpaint::TracePoint>)]) -> Result<()> {
    let series: Vec<Series> = traces
        .iter()
        .map(|(n, t)| Series {
            name: n.clone(),
            points: t.iter().map(|p| (p.iteration as f64, p.total)).collect(),
        })
        .collect();
    files::save_rgb(path, &plot::line_plot(&series, true, 640, 360))
}

#[derive(Serialize)]
struct WindowRow {
    window: usize,
    start: usize,
    end: usize,
    eta_temp_db: f64,
    l_sm: f64,
    best_iteration: usize,
}

fn inpaint_seq_cmd(a: &InpaintSeqArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let res = gan.resolution();
    let spec = a.mask_args.spec(0);
    // Clean frames (when known), damaged frames and masks.
    let (clean, damaged, masks): (Vec<Image>, Vec<Image>, Vec<_>) = if let Some(img) = &a.image {
        let src = load_input_image(img, res)?;
        let p = build_pseudo_sequence(&src, a.window, std::slice::from_ref(&spec), rng::derive_seed(g.seed, 1))?;
        (p.frames(), p.damaged, p.masks)
    } else {
        let root = a.frames.as_deref().expect("clap enforces --frames or --image");
        let m = dataset::load_dataset(root, res, &SplitSpec { test_fraction: 0.0, ..SplitSpec::default() })?;
        let frames = m.load_images(&m.items.iter().collect::<Vec<_>>())?;
        let mut masks = Vec::with_capacity(frames.len());
        let mut damaged = Vec::with_capacity(frames.len());
        for (k, f) in frames.iter().enumerate() {
            let mk = make_mask(&spec.clone().with_seed(rng::derive_seed(g.seed, 100 + k as u64)), f.dims())?;
            damaged.push(apply_mask(f, &mk)?);
            masks.push(mk);
        }
        (frames, damaged, masks)
    };
    let init = a.initializer.as_deref().map(checkpoint::load_initializer).transpose()?;
    let seq = a.seq_init.as_deref().map(checkpoint::load_sequence_initializer).transpose()?;
    let mut stack = Stack::new(&gan);
    stack.initializer = init.as_ref();
    stack.sequence_initializer = seq.as_ref();
    let cfg = SequenceOptimConfig::new(a.optim.config(a.init, g.seed), a.mu);
    let mut rows = Vec::new();
    let mut grid = Vec::new();
    for (k, r) in window_ranges(damaged.len(), a.window, a.stride.unwrap_or(a.window))?.into_iter().enumerate() {
        let w = SequenceWindow::new(damaged[r.clone()].to_vec(), masks[r.clone()].to_vec())?;
        let z0 = experiments::initial_latents(a.init, &stack, &w.frames, rng::derive_seed(g.seed, 200 + k as u64))?;
        let w = optimize_window(w, &z0, &gan, &cfg)?;
        let inpainted = w.inpainted();
        rows.push(WindowRow {
            window: k,
            start: r.start,
            end: r.end,
            eta_temp_db: temporal_consistency(&inpainted)?,
            l_sm: smoothness_loss(&w.latents())?,
            best_iteration: w.results[0].best_iteration,
        });
        log::info!("window {k} frames {r:?}: eta_temp {:.2} dB, l_sm {:.5}", rows[k].eta_temp_db, rows[k].l_sm);
        results::write_window(&dir.join(format!("window_{k:03}")), &w, Some(&clean[r.clone()]))?;
        grid.push(clean[r.clone()].to_vec());
        grid.push(w.frames.clone());
        grid.push(inpainted);
    }
    write_csv(&dir.join("windows.csv"), &rows)?;
    files::save_rgb(&dir.join("grid.png"), &plot::image_grid(&grid, 3, 2))
}

fn optim(eta: f64, lr: f64, iters: usize, seed: u64) -> OptimConfig {
    OptimConfig {
        eta,
        max_iters: iters,
        learning_rate: lr,
        seed,
        ..OptimConfig::random_init()
    }
}

fn eval_cmd(a: &EvalArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let init = checkpoint::load_initializer(&a.initializer)?;
    let m = open_data(&a.data, g.seed)?;
    check_resolution(&m, &gan)?;
    let items = test_stills(&m, a.count)?;
    let cfg = ConvergenceConfig {
        mask: a.mask_args.spec(0),
        random: optim(a.eta, a.learning_rate, a.random_iters, g.seed),
        learned: optim(a.eta, a.learning_rate, a.learned_iters.unwrap_or(a.random_iters), g.seed),
        seed: g.seed,
    };
    let mut stack = Stack::new(&gan);
    stack.initializer = Some(&init);
    let out = experiments::run_convergence(&items, &stack, &cfg)?;
    let s = &out.summary;
    log::info!(
        "{} items: median learned hit {} of {} iterations (ratio {:.3}); iteration-0 loss {:.2} vs {:.2}, p = {:.3e}",
        s.items,
        s.median_learned_hit,
        s.random_budget,
        s.median_hit_ratio,
        s.median_initial_learned,
        s.median_initial_random,
        s.initial_loss_p_value
    );
    results::write_report(dir, &out.report)?;
    write_json(&dir.join("summary.json"), s)?;
    write_csv(&dir.join("convergence.csv"), &out.initial_rows())?;
    for it in &out.items {
        let d = dir.join("traces").join(it.item_id.replace('/', "_"));
        results::write_trace(&d.join("random.csv"), &it.random.trace)?;
        results::write_trace(&d.join("learned.csv"), &it.learned.trace)?;
    }
    let first = &out.items[0];
    trace_plot(
        &dir.join("traces.png"),
        &[
            ("random".into(), first.random.trace.clone()),
            ("learned".into(), first.learned.trace.clone()),
        ],
    )?;
    let n = a.grid_items.min(out.items.len());
    let clean: Vec<Image> = items[..n].iter().map(|(_, im)| im.clone()).collect();
    files::save_rgb(
        &dir.join("grid.png"),
        &plot::image_grid(&experiments::triplet_rows(&out.items[..n], &clean), 3, 2),
    )
}

fn ablation_embedder(a: &AblateArgs, g: &GlobalArgs, m: &DatasetManifest, dir: &Path) -> Result<Option<ToyEmbedder>> {
    if let Some(p) = &a.embedder {
        return Ok(Some(checkpoint::load_embedder(p)?));
    }
    let (images, labels) = training_images(m)?;
    let pairs: Vec<(Image, usize)> = images.into_iter().zip(labels).filter_map(|(im, l)| l.map(|l| (im, l))).collect();
    if pairs.is_empty() {
        log::warn!("no labelled training images; identity loss is skipped");
        return Ok(None);
    }
    let (images, labels): (Vec<Image>, Vec<usize>) = pairs.into_iter().unzip();
    let cfg = EmbedTrainConfig {
        e_dim: a.embed_dim,
        steps: a.embed_steps,
        seed: rng::derive_seed(g.seed, 3),
        ..EmbedTrainConfig::default()
    };
    let (emb, acc) = train_embedder(&images, &labels, &cfg)?;
    log::info!("trained identity embedder on {} images, final batch accuracy {acc:.3}", images.len());
    checkpoint::save_embedder(&dir.join("embedder"), &emb)?;
    Ok(Some(emb))
}

#[derive(Serialize)]
struct SmoothnessCurve {
    method: String,
    iteration: usize,
    median_l_sm: f64,
}

fn ablate_cmd(a: &AblateArgs, g: &GlobalArgs, dir: &Path) -> Result<()> {
    let gan = load_gan(&a.gan)?;
    let seq = checkpoint::load_sequence_initializer(&a.seq_init)?;
    let m = open_data(&a.data, g.seed)?;
    check_resolution(&m, &gan)?;
    let emb = ablation_embedder(a, g, &m, dir)?;
    let items = test_stills(&m, a.count)?;
    let cfg = AblationConfig {
        window: a.window,
        mask: a.mask_args.spec(0),
        optim: optim(a.eta, a.learning_rate, a.max_iters, g.seed),
        mu: a.mu,
        seed: g.seed,
    };
    let mut stack = Stack::new(&gan);
    stack.sequence_initializer = Some(&seq);
    stack.embedder = emb.as_ref();
    let out = experiments::run_ablation(&items, &stack, &cfg)?;
    for r in &out.table {
        log::info!(
            "{:<12} eta_temp median {:.2} dB, l_sm median {:.5}, identity {:?}, p vs previous {:?}",
            r.method,
            r.eta_temp_median_db,
            r.l_sm_median,
            r.identity_loss_mean,
            r.p_eta_temp_vs_previous
        );
    }
    write_csv(&dir.join("ablation.csv"), &out.table)?;
    results::write_report(dir, &out.report)?;
    // Median smoothness per recorded iteration and rung.
    let mut curve = Vec::new();
    let mut series = Vec::new();
    for (k, method) in experiments::LADDER.iter().enumerate() {
        let len = out.items[0].windows[k].smoothness_trace.len();
        let mut pts = Vec::with_capacity(len);
        for t in 0..len {
            let vals: Vec<f64> = out.items.iter().map(|i| i.windows[k].smoothness_trace[t].l_sm).collect();
            let it = out.items[0].windows[k].smoothness_trace[t].iteration;
            let med = inpaint_core::stats::median(&vals);
            curve.push(SmoothnessCurve {
                method: method.to_string(),
                iteration: it,
                median_l_sm: med,
            });
            pts.push((it as f64, med));
        }
        series.push(Series {
            name: method.to_string(),
            points: pts,
        });
    }
    write_csv(&dir.join("smoothness_curve.csv"), &curve)?;
    files::save_rgb(&dir.join("smoothness_curve.png"), &plot::line_plot(&series, true, 640, 360))?;
    let mut rows = Vec::new();
    for it in out.items.iter().take(a.grid_items) {
        rows.extend(experiments::ablation_grid_rows(it));
    }
    files::save_rgb(&dir.join("grid.png"), &plot::image_grid(&rows, 3, 2))
}

#[derive(Serialize)]
struct PlotPoint {
    series: String,
    iteration: f64,
    value: f64,
}

fn read_series(path: &Path, column: &str) -> Result<Series> {
    let mut r = csv::Reader::from_path(path).map_err(crate::error::csv_err(path))?;
    let headers = r.headers().map_err(crate::error::csv_err(path))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Usage(format!("{} has no column {name:?}", path.display())))
    };
    let (xi, yi) = (find("iteration")?, find(column)?);
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(crate::error::csv_err(path))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| inpaint_core::Error::Data(format!("{}: bad number {:?}", path.display(), &rec[i])).into())
        };
        points.push((num(xi)?, num(yi)?));
    }
    Ok(Series {
        name: path.display().to_string(),
        points,
    })
}

fn plot_cmd(a: &PlotArgs, dir: &Path) -> Result<()> {
    if !a.trace.is_empty() {
        let series: Vec<Series> = a.trace.iter().map(|p| read_series(p, &a.column)).collect::<Result<_>>()?;
        let rows: Vec<PlotPoint> = series
            .iter()
            .flat_map(|s| {
                s.points.iter().map(|&(x, y)| PlotPoint {
                    series: s.name.clone(),
                    iteration: x,
                    value: y,
                })
            })
            .collect();
        write_csv(&dir.join("plot.csv"), &rows)?;
        files::save_rgb(&dir.join("plot.png"), &plot::line_plot(&series, a.log_y, 800, 450))?;
    }
    if !a.grid.is_empty() {
        let images: Vec<Image> = a.grid.iter().map(|p| files::load_png(p)).collect::<Result<_>>()?;
        let side = images[0].dims();
        if let Some(bad) = images.iter().position(|im| im.dims() != side) {
            return Err(inpaint_core::Error::Dimension(format!(
                "{} is {:?}, the first grid image is {side:?}",
                a.grid[bad].display(),
                images[bad].dims()
            ))
            .into());
        }
        let rows: Vec<Vec<Image>> = images.chunks(a.columns).map(<[Image]>::to_vec).collect();
        files::save_rgb(&dir.join("grid.png"), &plot::image_grid(&rows, a.scale, 2))?;
    }
    Ok(())
}
