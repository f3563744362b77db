//! PSNR, temporal consistency, identity loss, convergence speed, and the
//! per-item report with its aggregates.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::image::Image;
use crate::inpaint::TracePoint;
use crate::math;
use crate::stats;

/// Returned for identical images; also the upper bound of every PSNR value.
pub const PSNR_CAP_DB: f64 = 100.0;

/// Peak signal-to-noise ratio in dB after mapping `[-1, 1]` to `[0, 255]`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let n = a.planar().len() as f64;
    let sse: f64 = a
        .planar()
        .iter()
        .zip(b.planar())
        .map(|(x, y)| {
            let d = (x - y) * 127.5;
            d * d
        })
        .sum();
    let mse = sse / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * math::log10(255.0 * 255.0 / mse)).min(PSNR_CAP_DB))
}

fn check_window(len: usize) -> Result<()> {
    if len < 2 {
        bail!(Arity, "need at least 2 frames, got {len}");
    }
    Ok(())
}

/// Mean PSNR over all unordered frame pairs; higher is more consistent.
pub fn temporal_consistency(frames: &[Image]) -> Result<f64> {
    check_window(frames.len())?;
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..frames.len() {
        for j in i + 1..frames.len() {
            sum += psnr(&frames[i], &frames[j])?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Maps an image to an identity embedding of fixed dimension.
pub trait Embedder {
    fn dim(&self) -> usize;
    fn embed(&self, image: &Image) -> Vec<f64>;
}

/// Mean squared embedding distance between each frame and the original.
pub fn identity_loss(frames: &[Image], original: &Image, embedder: &dyn Embedder) -> Result<f64> {
    if frames.is_empty() {
        bail!(Arity, "identity loss needs at least one frame");
    }
    let dim = embedder.dim();
    let reference = embedder.embed(original);
    if reference.len() != dim {
        bail!(Interface, "embedder returned {} values, declares {dim}", reference.len());
    }
    let mut sum = 0.0;
    for f in frames {
        f.ensure_same_shape(original)?;
        let e = embedder.embed(f);
        if e.len() != dim {
            bail!(Interface, "embedder returned {} values, declares {dim}", e.len());
        }
        sum += e.iter().zip(&reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(sum / frames.len() as f64)
}

/// First recorded iteration whose total loss is at or below a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdHit {
    pub iteration: usize,
    pub reached: bool,
}

pub fn iterations_to_threshold(trace: &[TracePoint], threshold: f64) -> Result<ThresholdHit> {
    let Some(last) = trace.last() else {
        bail!(Data, "empty trace");
    };
    Ok(trace
        .iter()
        .find(|p| p.total <= threshold)
        .map(|p| ThresholdHit {
            iteration: p.iteration,
            reached: true,
        })
        .unwrap_or(ThresholdHit {
            iteration: last.iteration,
            reached: false,
        }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdRule {
    Absolute(f64),
    /// Final recorded total loss of the trace with this label.
    FinalOf(String),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceRow {
    pub label: String,
    pub threshold: f64,
    pub iteration: usize,
    pub reached: bool,
}

pub fn convergence_report(traces: &[(String, Vec<TracePoint>)], rule: &ThresholdRule) -> Result<Vec<ConvergenceRow>> {
    let threshold = match rule {
        ThresholdRule::Absolute(t) => *t,
        ThresholdRule::FinalOf(label) => {
            let Some((_, t)) = traces.iter().find(|(l, _)| l == label) else {
                bail!(Data, "no trace labelled {label}");
            };
            match t.last() {
                Some(p) => p.total,
                None => bail!(Data, "trace {label} is empty"),
            }
        }
    };
    traces
        .iter()
        .map(|(label, trace)| {
            let hit = iterations_to_threshold(trace, threshold)?;
            Ok(ConvergenceRow {
                label: label.clone(),
                threshold,
                iteration: hit.iteration,
                reached: hit.reached,
            })
        })
        .collect()
}

/// Two-sided Wilcoxon signed-rank p-value; see [`stats::wilcoxon_signed_rank`].
pub fn significance_test(a: &[f64], b: &[f64]) -> Result<f64> {
    stats::wilcoxon_signed_rank(a, b)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportRow {
    pub item_id: String,
    pub method: String,
    pub psnr_db: f64,
    pub eta_temp_db: Option<f64>,
    pub identity_loss: Option<f64>,
    pub iters_to_threshold: Option<usize>,
    pub smoothness: Option<f64>,
}

impl ReportRow {
    pub fn new(item_id: &str, method: &str, psnr_db: f64) -> Self {
        Self {
            item_id: item_id.to_string(),
            method: method.to_string(),
            psnr_db,
            eta_temp_db: None,
            identity_loss: None,
            iters_to_threshold: None,
            smoothness: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Metric {
    Psnr,
    EtaTemp,
    IdentityLoss,
    ItersToThreshold,
    Smoothness,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Psnr,
        Metric::EtaTemp,
        Metric::IdentityLoss,
        Metric::ItersToThreshold,
        Metric::Smoothness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Psnr => "psnr_db",
            Metric::EtaTemp => "eta_temp_db",
            Metric::IdentityLoss => "identity_loss",
            Metric::ItersToThreshold => "iters_to_threshold",
            Metric::Smoothness => "smoothness",
        }
    }

    pub fn of(self, row: &ReportRow) -> Option<f64> {
        match self {
            Metric::Psnr => Some(row.psnr_db),
            Metric::EtaTemp => row.eta_temp_db,
            Metric::IdentityLoss => row.identity_loss,
            Metric::ItersToThreshold => row.iters_to_threshold.map(|v| v as f64),
            Metric::Smoothness => row.smoothness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aggregate {
    pub method: String,
    pub metric: Metric,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedTest {
    pub method_a: String,
    pub method_b: String,
    pub metric: Metric,
    pub pairs: usize,
    pub median_a: f64,
    pub median_b: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<Aggregate>,
    pub tests: Vec<PairedTest>,
}

impl MetricsReport {
    /// Aggregates every metric per method, and runs paired tests for each
    /// requested method pair over items present in both.
    pub fn build(rows: Vec<ReportRow>, pairs: &[(String, String)]) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for r in &rows {
            if !(r.psnr_db >= 0.0) || r.psnr_db > PSNR_CAP_DB {
                bail!(Data, "psnr {} out of range for {}", r.psnr_db, r.item_id);
            }
            if seen.insert((r.method.clone(), r.item_id.clone()), ()).is_some() {
                bail!(Data, "duplicate row {}/{}", r.method, r.item_id);
            }
        }
        let aggregates = aggregate(&rows);
        let mut tests = Vec::new();
        for (a, b) in pairs {
            for metric in Metric::ALL {
                let (xa, xb) = paired_values(&rows, a, b, metric);
                if xa.len() < stats::MIN_PAIRS {
                    continue;
                }
                tests.push(PairedTest {
                    method_a: a.clone(),
                    method_b: b.clone(),
                    metric,
                    pairs: xa.len(),
                    median_a: stats::median(&xa),
                    median_b: stats::median(&xb),
                    p_value: stats::wilcoxon_signed_rank(&xa, &xb)?,
                });
            }
        }
        Ok(Self {
            rows,
            aggregates,
            tests,
        })
    }

    /// Recomputes all aggregates and tests from the rows and checks equality.
    pub fn verify(&self) -> Result<()> {
        let again = aggregate(&self.rows);
        if again != self.aggregates {
            bail!(Data, "aggregates do not match per-item rows");
        }
        for t in &self.tests {
            let (xa, xb) = paired_values(&self.rows, &t.method_a, &t.method_b, t.metric);
            let p = stats::wilcoxon_signed_rank(&xa, &xb)?;
            if p != t.p_value || xa.len() != t.pairs {
                bail!(Data, "test {} vs {} on {} not reproducible", t.method_a, t.method_b, t.metric.name());
            }
            if !(0.0..=1.0).contains(&t.p_value) {
                bail!(Data, "p-value {} outside [0, 1]", t.p_value);
            }
        }
        Ok(())
    }

    pub fn aggregate_for(&self, method: &str, metric: Metric) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method && a.metric == metric)
    }

    pub fn test_for(&self, a: &str, b: &str, metric: Metric) -> Option<&PairedTest> {
        self.tests
            .iter()
            .find(|t| t.method_a == a && t.method_b == b && t.metric == metric)
    }

    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }
}

fn aggregate(rows: &[ReportRow]) -> Vec<Aggregate> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut out = Vec::new();
    for m in methods {
        for metric in Metric::ALL {
            let xs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == m)
                .filter_map(|r| metric.of(r))
                .collect();
            if xs.is_empty() {
                continue;
            }
            out.push(Aggregate {
                method: m.to_string(),
                metric,
                count: xs.len(),
                mean: stats::mean(&xs),
                median: stats::median(&xs),
            });
        }
    }
    out
}

fn paired_values(rows: &[ReportRow], a: &str, b: &str, metric: Metric) -> (Vec<f64>, Vec<f64>) {
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    for ra in rows.iter().filter(|r| r.method == a) {
        let Some(va) = metric.of(ra) else { continue };
        if let Some(vb) = rows
            .iter()
            .find(|r| r.method == b && r.item_id == ra.item_id)
            .and_then(|r| metric.of(r))
        {
            xa.push(va);
            xb.push(vb);
        }
    }
    (xa, xb)
}

pub fn format_db(v: f64) -> String {
    format!("{v:.2}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;
    use rand::Rng;

    fn random_image(r: &mut rng::Rng, n: usize) -> Image {
        let data = (0..3 * n * n).map(|_| r.random_range(-1.0..=1.0)).collect();
        Image::from_planar(n, n, data).unwrap()
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Image::filled(8, 8, 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), 100.0);
        let b = Image::filled(8, 8, 1.0 / 127.5);
        assert!((psnr(&a, &b).unwrap() - 10.0 * 65025f64.log10()).abs() < 1e-9);
        assert!((psnr(&a, &b).unwrap() - 48.13).abs() < 0.005);
        let black = Image::filled(8, 8, -1.0);
        let white = Image::filled(8, 8, 1.0);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
        assert!(psnr(&a, &Image::filled(4, 4, 0.0)).is_err());
    }

    #[test]
    fn psnr_is_symmetric() {
        let mut r = rng::seeded(1);
        for _ in 0..20 {
            let (a, b) = (random_image(&mut r, 8), random_image(&mut r, 8));
            assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        }
    }

    #[test]
    fn temporal_consistency_matches_pair_loop() {
        let mut r = rng::seeded(2);
        for _ in 0..10 {
            let t: Vec<Image> = (0..3).map(|_| random_image(&mut r, 8)).collect();
            let brute = (psnr(&t[0], &t[1]).unwrap() + psnr(&t[0], &t[2]).unwrap() + psnr(&t[1], &t[2]).unwrap()) / 3.0;
            assert!((temporal_consistency(&t).unwrap() - brute).abs() < 1e-12);
            let perm = vec![t[2].clone(), t[0].clone(), t[1].clone()];
            assert!((temporal_consistency(&perm).unwrap() - brute).abs() < 1e-12);
        }
        let a = random_image(&mut r, 8);
        assert_eq!(temporal_consistency(&[a.clone(), a.clone(), a.clone()]).unwrap(), 100.0);
        let b = random_image(&mut r, 8);
        assert_eq!(temporal_consistency(&[a.clone(), b.clone()]).unwrap(), psnr(&a, &b).unwrap());
        assert!(temporal_consistency(&[a]).is_err());
    }

    struct MeanColor;
    impl Embedder for MeanColor {
        fn dim(&self) -> usize {
            3
        }
        fn embed(&self, im: &Image) -> Vec<f64> {
            let p = im.plane();
            let mut e: Vec<f64> = (0..3).map(|c| im.planar()[c * p..(c + 1) * p].iter().sum::<f64>() + 0.1).collect();
            let n = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            e.iter_mut().for_each(|v| *v /= n);
            e
        }
    }

    struct Broken;
    impl Embedder for Broken {
        fn dim(&self) -> usize {
            4
        }
        fn embed(&self, _: &Image) -> Vec<f64> {
            vec![1.0]
        }
    }

    #[test]
    fn identity_loss_properties() {
        let mut r = rng::seeded(3);
        let orig = random_image(&mut r, 8);
        assert_eq!(identity_loss(&[orig.clone(), orig.clone()], &orig, &MeanColor).unwrap(), 0.0);
        let f = random_image(&mut r, 8);
        let g = random_image(&mut r, 8);
        let single = identity_loss(std::slice::from_ref(&f), &orig, &MeanColor).unwrap();
        let e1 = MeanColor.embed(&f);
        let e0 = MeanColor.embed(&orig);
        let d: f64 = e1.iter().zip(&e0).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((single - d).abs() < 1e-15);
        let fg = identity_loss(&[f.clone(), g.clone()], &orig, &MeanColor).unwrap();
        let gf = identity_loss(&[g, f], &orig, &MeanColor).unwrap();
        assert_eq!(fg, gf);
        assert!((0.0..=4.0).contains(&fg));
        assert!(matches!(identity_loss(std::slice::from_ref(&orig), &orig, &Broken), Err(crate::Error::Interface(_))));
    }

    fn trace(totals: &[f64], every: usize) -> Vec<TracePoint> {
        totals
            .iter()
            .enumerate()
            .map(|(i, &t)| TracePoint {
                iteration: i * every,
                contextual: t,
                perceptual: 0.0,
                total: t,
            })
            .collect()
    }

    #[test]
    fn threshold_iterations() {
        let t = trace(&[5.0, 4.0, 3.0, 2.0], 10);
        assert_eq!(iterations_to_threshold(&t, 6.0).unwrap(), ThresholdHit { iteration: 0, reached: true });
        assert_eq!(iterations_to_threshold(&t, 2.5).unwrap(), ThresholdHit { iteration: 30, reached: true });
        assert_eq!(iterations_to_threshold(&t, 1.0).unwrap(), ThresholdHit { iteration: 30, reached: false });
        assert!(iterations_to_threshold(&[], 1.0).is_err());
        let rows = convergence_report(
            &[("random".into(), t.clone()), ("learned".into(), trace(&[2.5, 1.5], 10))],
            &ThresholdRule::FinalOf("random".into()),
        )
        .unwrap();
        assert_eq!(rows[0].iteration, 30);
        assert_eq!(rows[1].iteration, 10);
        assert_eq!(rows[1].threshold, 2.0);
    }

    #[test]
    fn report_aggregates_are_recomputable() {
        let mut rows = Vec::new();
        for i in 0..25 {
            let id = format!("item{i}");
            let mut a = ReportRow::new(&id, "a", 20.0 + i as f64 * 0.1);
            a.eta_temp_db = Some(30.0 + i as f64);
            let mut b = ReportRow::new(&id, "b", 21.0 + i as f64 * 0.1);
            b.eta_temp_db = Some(31.5 + i as f64);
            rows.push(a);
            rows.push(b);
        }
        let report = MetricsReport::build(rows, &[("a".into(), "b".into())]).unwrap();
        report.verify().unwrap();
        let t = report.test_for("a", "b", Metric::EtaTemp).unwrap();
        assert!(t.p_value < 1e-3);
        assert_eq!(report.aggregate_for("b", Metric::Psnr).unwrap().count, 25);
        let mut tampered = report.clone();
        tampered.aggregates[0].mean += 1.0;
        assert!(tampered.verify().is_err());
    }
}
