//! Paired experiments shared by the command line and the acceptance suite:
//! random versus learned initialization on single images, and the
//! baseline / smoothness / LSTM-plus-smoothness ladder on pseudo sequences.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use inpaint_core::embedder::ToyEmbedder;
use inpaint_core::image::{Image, LatentVector};
use inpaint_core::initializer::{predict_latents, InitializerCheckpoint};
use inpaint_core::inpaint::{optimize_latent, InpaintResult, OptimConfig};
use inpaint_core::mask::{apply_mask, make_mask, CorruptionSpec};
use inpaint_core::metrics::{identity_loss, iterations_to_threshold, psnr, temporal_consistency, Metric, MetricsReport, ReportRow};
use inpaint_core::model::ModelCheckpoint;
use inpaint_core::pseudo::{build_pseudo_sequence, PseudoSequence};
use inpaint_core::seqinit::{predict_latent_sequence, SequenceInitCheckpoint};
use inpaint_core::sequence::{optimize_window, smoothness_loss, SequenceOptimConfig, SequenceWindow};
use inpaint_core::{rng, stats, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    Random,
    Learned,
    Lstm,
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMethod::Random => "random",
            InitMethod::Learned => "learned",
            InitMethod::Lstm => "lstm",
        })
    }
}

impl FromStr for InitMethod {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitMethod::Random),
            "learned" => Ok(InitMethod::Learned),
            "lstm" => Ok(InitMethod::Lstm),
            _ => Err(LabError::Usage(format!("unknown init method {s:?}"))),
        }
    }
}

/// The trained models an experiment may draw on.
#[derive(Clone, Copy)]
pub struct Stack<'a> {
    pub gan: &'a ModelCheckpoint,
    pub initializer: Option<&'a InitializerCheckpoint>,
    pub sequence_initializer: Option<&'a SequenceInitCheckpoint>,
    pub embedder: Option<&'a ToyEmbedder>,
}

impl<'a> Stack<'a> {
    pub fn new(gan: &'a ModelCheckpoint) -> Self {
        Self {
            gan,
            initializer: None,
            sequence_initializer: None,
            embedder: None,
        }
    }
}

fn missing(what: &str) -> LabError {
    LabError::Usage(format!("this run needs a {what} checkpoint"))
}

/// Starting latents for each damaged frame. Random draws for frame `k` come
/// from a sub-seed of `seed`.
pub fn initial_latents(method: InitMethod, stack: &Stack, damaged: &[Image], seed: u64) -> Result<Vec<LatentVector>> {
    let d = stack.gan.latent_dim();
    match method {
        InitMethod::Random => Ok((0..damaged.len())
            .map(|k| LatentVector::sample_prior(d, &mut rng::child(seed, k as u64)))
            .collect()),
        InitMethod::Learned => {
            let p = stack.initializer.ok_or_else(|| missing("initializer"))?;
            p.ensure_pairs_with(stack.gan)?;
            Ok(predict_latents(damaged, p)?)
        }
        InitMethod::Lstm => {
            let p = stack.sequence_initializer.ok_or_else(|| missing("sequence initializer"))?;
            Ok(predict_latent_sequence(damaged, p)?)
        }
    }
}

/// Maps `f` over `0..items` on the rayon pool, logging each tenth finished.
fn in_pool<T: Send>(items: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let done = AtomicUsize::new(0);
    let step = items.div_ceil(10).max(1);
    (0..items)
        .into_par_iter()
        .map(|i| {
            let out = f(i)?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            if n.is_multiple_of(step) || n == items {
                log::info!("{n}/{items} items done");
            }
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub mask: CorruptionSpec,
    pub random: OptimConfig,
    pub learned: OptimConfig,
    pub seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            mask: CorruptionSpec::new(inpaint_core::MaskKind::Central, 0),
            random: OptimConfig::random_init(),
            learned: OptimConfig::learned_init(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceItem {
    pub item_id: String,
    pub damaged: Image,
    pub mask: inpaint_core::Mask,
    pub random: InpaintResult,
    pub learned: InpaintResult,
    /// Final recorded total of the random-init run.
    pub threshold: f64,
    pub learned_hit: usize,
    pub learned_reached: bool,
    pub random_hit: usize,
    pub psnr_random: f64,
    pub psnr_learned: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub items: usize,
    pub random_budget: usize,
    pub learned_budget: usize,
    pub median_learned_hit: f64,
    /// Median learned-run hit iteration over the random-init budget.
    pub median_hit_ratio: f64,
    pub reached_fraction: f64,
    pub median_initial_random: f64,
    pub median_initial_learned: f64,
    pub initial_loss_p_value: f64,
    pub mean_psnr_random: f64,
    pub mean_psnr_learned: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialLossRow {
    pub item_id: String,
    pub random: f64,
    pub learned: f64,
    pub threshold: f64,
    pub learned_hit: usize,
    pub learned_reached: bool,
}

pub struct ConvergenceOutcome {
    pub items: Vec<ConvergenceItem>,
    pub report: MetricsReport,
    pub summary: ConvergenceSummary,
}

impl ConvergenceOutcome {
    pub fn initial_rows(&self) -> Vec<InitialLossRow> {
        self.items
            .iter()
            .map(|i| InitialLossRow {
                item_id: i.item_id.clone(),
                random: i.random.trace[0].total,
                learned: i.learned.trace[0].total,
                threshold: i.threshold,
                learned_hit: i.learned_hit,
                learned_reached: i.learned_reached,
            })
            .collect()
    }
}

fn convergence_item(id: &str, clean: &Image, stack: &Stack, cfg: &ConvergenceConfig, index: usize) -> Result<ConvergenceItem> {
    let item_seed = rng::derive_seed(cfg.seed, index as u64);
    let spec = cfg.mask.clone().with_seed(rng::derive_seed(item_seed, 1));
    let mask = make_mask(&spec, clean.dims())?;
    let damaged = apply_mask(clean, &mask)?;
    let frames = std::slice::from_ref(&damaged);
    let z_random = initial_latents(InitMethod::Random, stack, frames, rng::derive_seed(item_seed, 2))?.remove(0);
    let z_learned = initial_latents(InitMethod::Learned, stack, frames, 0)?.remove(0);
    let random = optimize_latent(&damaged, &mask, &z_random, stack.gan, &cfg.random)?;
    let learned = optimize_latent(&damaged, &mask, &z_learned, stack.gan, &cfg.learned)?;
    let threshold = random.trace.last().expect("non-empty trace").total;
    let hit = iterations_to_threshold(&learned.trace, threshold)?;
    let own = iterations_to_threshold(&random.trace, threshold)?;
    Ok(ConvergenceItem {
        item_id: id.to_string(),
        psnr_random: psnr(&random.inpainted, clean)?,
        psnr_learned: psnr(&learned.inpainted, clean)?,
        damaged,
        mask,
        random,
        learned,
        threshold,
        // A learned run that never gets there counts as the full random budget.
        learned_hit: if hit.reached { hit.iteration } else { cfg.random.max_iters },
        learned_reached: hit.reached,
        random_hit: own.iteration,
    })
}

/// Inpaints every `(item_id, clean image)` twice, from a prior draw and from
/// the initializer's prediction, and measures how quickly the learned run
/// reaches the random run's final loss.
pub fn run_convergence(items: &[(String, Image)], stack: &Stack, cfg: &ConvergenceConfig) -> Result<ConvergenceOutcome> {
    if items.is_empty() {
        return Err(Error::Data("no items to evaluate".into()).into());
    }
    let out = in_pool(items.len(), |i| convergence_item(&items[i].0, &items[i].1, stack, cfg, i))?;
    let mut rows = Vec::new();
    for it in &out {
        let mut r = ReportRow::new(&it.item_id, "random", it.psnr_random);
        r.iters_to_threshold = Some(it.random_hit);
        rows.push(r);
        let mut l = ReportRow::new(&it.item_id, "learned", it.psnr_learned);
        l.iters_to_threshold = Some(it.learned_hit);
        rows.push(l);
    }
    let report = MetricsReport::build(rows, &[("learned".into(), "random".into())])?;
    let hits: Vec<f64> = out.iter().map(|i| i.learned_hit as f64).collect();
    let init_r: Vec<f64> = out.iter().map(|i| i.random.trace[0].total).collect();
    let init_l: Vec<f64> = out.iter().map(|i| i.learned.trace[0].total).collect();
    let p = if out.len() >= stats::MIN_PAIRS {
        stats::wilcoxon_signed_rank(&init_l, &init_r)?
    } else {
        f64::NAN
    };
    let summary = ConvergenceSummary {
        items: out.len(),
        random_budget: cfg.random.max_iters,
        learned_budget: cfg.learned.max_iters,
        median_learned_hit: stats::median(&hits),
        median_hit_ratio: stats::median(&hits) / cfg.random.max_iters as f64,
        reached_fraction: out.iter().filter(|i| i.learned_reached).count() as f64 / out.len() as f64,
        median_initial_random: stats::median(&init_r),
        median_initial_learned: stats::median(&init_l),
        initial_loss_p_value: p,
        mean_psnr_random: stats::mean(&out.iter().map(|i| i.psnr_random).collect::<Vec<_>>()),
        mean_psnr_learned: stats::mean(&out.iter().map(|i| i.psnr_learned).collect::<Vec<_>>()),
    };
    Ok(ConvergenceOutcome {
        items: out,
        report,
        summary,
    })
}

pub const BASELINE: &str = "baseline";
pub const SMOOTH: &str = "smooth";
pub const LSTM_SMOOTH: &str = "lstm+smooth";
pub const LADDER: [&str; 3] = [BASELINE, SMOOTH, LSTM_SMOOTH];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub window: usize,
    /// One spec reused for every frame; frames draw independent sub-seeds.
    pub mask: CorruptionSpec,
    pub optim: OptimConfig,
    /// Smoothness weight of the two upper rungs; the baseline uses 0.
    pub mu: f64,
    pub seed: u64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            window: 3,
            mask: CorruptionSpec::new(inpaint_core::MaskKind::Central, 0),
            optim: OptimConfig::random_init(),
            mu: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AblationItem {
    pub pseudo: PseudoSequence,
    /// One optimized window per ladder rung, in [`LADDER`] order.
    pub windows: Vec<SequenceWindow>,
    pub rows: Vec<ReportRow>,
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub method: String,
    pub sequences: usize,
    pub eta_temp_median_db: f64,
    pub eta_temp_mean_db: f64,
    pub psnr_mean_db: f64,
    pub l_sm_median: f64,
    pub identity_loss_mean: Option<f64>,
    /// Wilcoxon p-value of η_temp against the rung below.
    pub p_eta_temp_vs_previous: Option<f64>,
    /// Wilcoxon p-value of final l_sm against the baseline.
    pub p_l_sm_vs_baseline: Option<f64>,
    /// Wilcoxon p-value of identity loss against the baseline.
    pub p_identity_vs_baseline: Option<f64>,
}

pub struct AblationOutcome {
    pub items: Vec<AblationItem>,
    pub report: MetricsReport,
    pub table: Vec<LadderRow>,
}

fn rung_row(
    item_id: &str,
    method: &str,
    window: &SequenceWindow,
    source: &Image,
    embedder: Option<&ToyEmbedder>,
) -> Result<ReportRow> {
    let inpainted = window.inpainted();
    let psnrs: Vec<f64> = inpainted.iter().map(|f| psnr(f, source)).collect::<inpaint_core::Result<_>>()?;
    let mut row = ReportRow::new(item_id, method, stats::mean(&psnrs));
    row.eta_temp_db = Some(temporal_consistency(&inpainted)?);
    row.smoothness = Some(smoothness_loss(&window.latents())?);
    if let Some(e) = embedder {
        row.identity_loss = Some(identity_loss(&inpainted, source, e)?);
    }
    Ok(row)
}

fn ablation_item(id: &str, source: &Image, stack: &Stack, cfg: &AblationConfig, index: usize) -> Result<AblationItem> {
    let item_seed = rng::derive_seed(cfg.seed, index as u64);
    let mut pseudo = build_pseudo_sequence(source, cfg.window, std::slice::from_ref(&cfg.mask), rng::derive_seed(item_seed, 1))?;
    pseudo.source_item_id = id.to_string();
    let z_random = initial_latents(InitMethod::Random, stack, &pseudo.damaged, rng::derive_seed(item_seed, 2))?;
    let z_lstm = initial_latents(InitMethod::Lstm, stack, &pseudo.damaged, 0)?;
    let mut windows = Vec::with_capacity(3);
    let mut rows = Vec::with_capacity(3);
    for (method, z0, mu) in [
        (BASELINE, &z_random, 0.0),
        (SMOOTH, &z_random, cfg.mu),
        (LSTM_SMOOTH, &z_lstm, cfg.mu),
    ] {
        let w = SequenceWindow::new(pseudo.damaged.clone(), pseudo.masks.clone())?;
        let w = optimize_window(w, z0, stack.gan, &SequenceOptimConfig::new(cfg.optim, mu))?;
        rows.push(rung_row(id, method, &w, source, stack.embedder)?);
        windows.push(w);
    }
    Ok(AblationItem { pseudo, windows, rows })
}

fn paired(report: &MetricsReport, a: &str, b: &str, metric: Metric) -> Option<f64> {
    report.test_for(a, b, metric).map(|t| t.p_value)
}

/// Runs all three rungs on a pseudo sequence built from each source image.
pub fn run_ablation(items: &[(String, Image)], stack: &Stack, cfg: &AblationConfig) -> Result<AblationOutcome> {
    if items.is_empty() {
        return Err(Error::Data("no items to ablate".into()).into());
    }
    if cfg.window < 2 {
        return Err(Error::Config(format!("window {} below 2", cfg.window)).into());
    }
    let seq = stack.sequence_initializer.ok_or_else(|| missing("sequence initializer"))?;
    if seq.window != cfg.window {
        return Err(Error::Config(format!(
            "sequence initializer expects windows of {}, ablation uses {}",
            seq.window, cfg.window
        ))
        .into());
    }
    let out = in_pool(items.len(), |i| ablation_item(&items[i].0, &items[i].1, stack, cfg, i))?;
    let rows: Vec<ReportRow> = out.iter().flat_map(|i| i.rows.iter().cloned()).collect();
    let pairs: Vec<(String, String)> = [(SMOOTH, BASELINE), (LSTM_SMOOTH, SMOOTH), (LSTM_SMOOTH, BASELINE)]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let report = MetricsReport::build(rows, &pairs)?;
    let table = LADDER
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let agg = |metric| report.aggregate_for(m, metric);
            let eta = agg(Metric::EtaTemp).expect("every rung has η_temp");
            LadderRow {
                method: m.to_string(),
                sequences: eta.count,
                eta_temp_median_db: eta.median,
                eta_temp_mean_db: eta.mean,
                psnr_mean_db: agg(Metric::Psnr).map_or(f64::NAN, |a| a.mean),
                l_sm_median: agg(Metric::Smoothness).map_or(f64::NAN, |a| a.median),
                identity_loss_mean: agg(Metric::IdentityLoss).map(|a| a.mean),
                p_eta_temp_vs_previous: k.checked_sub(1).and_then(|j| paired(&report, m, LADDER[j], Metric::EtaTemp)),
                p_l_sm_vs_baseline: (k > 0).then(|| paired(&report, m, BASELINE, Metric::Smoothness)).flatten(),
                p_identity_vs_baseline: (k > 0).then(|| paired(&report, m, BASELINE, Metric::IdentityLoss)).flatten(),
            }
        })
        .collect();
    Ok(AblationOutcome {
        items: out,
        report,
        table,
    })
}

/// Grid rows for one pseudo sequence: the source and its damaged frames,
/// then each rung's inpainted frames beside the source.
pub fn ablation_grid_rows(item: &AblationItem) -> Vec<Vec<Image>> {
    let mut rows = Vec::with_capacity(1 + item.windows.len());
    let mut top = vec![item.pseudo.source.clone()];
    top.extend(item.pseudo.damaged.iter().cloned());
    rows.push(top);
    for w in &item.windows {
        let mut r = vec![item.pseudo.source.clone()];
        r.extend(w.inpainted());
        rows.push(r);
    }
    rows
}

/// One row per item: original, damaged, random-init and learned-init results.
pub fn triplet_rows(items: &[ConvergenceItem], clean: &[Image]) -> Vec<Vec<Image>> {
    items
        .iter()
        .zip(clean)
        .map(|(i, c)| vec![c.clone(), i.damaged.clone(), i.random.inpainted.clone(), i.learned.inpainted.clone()])
        .collect()
}
