//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Criterion numbers given as arguments
//! (`cargo test --test acceptance -- 1 2`) restrict the run.
//!
//! Criterion 8 runs the cold-start pipeline through the binary; criteria 3
//! to 7 reuse its checkpoints and outputs. Stage outputs are kept under the
//! cargo target tmpdir (or `INPAINT_ACCEPTANCE_DIR`) and a stage is reused
//! when a marker with identical arguments exists; delete the directory to
//! force a cold run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use inpaint_core::embedder::ToyEmbedder;
use inpaint_core::inpaint::{contextual_loss, evaluate, optimize_latent, perceptual_loss, OptimConfig};
use inpaint_core::mask::{apply_mask, make_mask, MaskKind, CHECKERBOARD_SIZES};
use inpaint_core::metrics::{identity_loss, psnr, temporal_consistency};
use inpaint_core::model::{Architecture, ModelCheckpoint};
use inpaint_core::pseudo::build_pseudo_sequence;
use inpaint_core::sequence::{optimize_window, smoothness_gradient, smoothness_loss, SequenceOptimConfig, SequenceWindow};
use inpaint_core::{rng, CorruptionSpec, Image, LatentVector};
use inpaint_lab::checkpoint;
use inpaint_lab::dataset::{DatasetManifest, Split};
use inpaint_lab::experiments::{ConvergenceSummary, LadderRow};
use rand::Rng;

const MINUTE: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

type Check = Result<Outcome, String>;

fn within(elapsed: Duration, limit: Duration, mut o: Outcome) -> Outcome {
    if elapsed > limit {
        o.pass = false;
        o.detail.push_str(&format!("; over the {} min limit", limit.as_secs() / 60));
    }
    o.detail.push_str(&format!(" [{:.1}s]", elapsed.as_secs_f64()));
    o
}

fn fmt_err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_image<R: Rng>(r: &mut R, n: usize) -> Image {
    Image::from_planar(n, n, (0..3 * n * n).map(|_| r.random_range(-1.0..=1.0)).collect()).unwrap()
}

// ---------------------------------------------------------------- gradients

const FD_STEP: f64 = 1e-5;

/// Largest coordinate error of `analytic` against central differences of
/// `f`, relative to the larger of the two gradients' max norms. `None` when
/// the stencil straddles a kink of the piecewise-linear losses (the h and 2h
/// estimates disagree beyond rounding), so the point must be redrawn.
fn fd_error(z: &LatentVector, analytic: &[f64], f: impl Fn(&LatentVector) -> f64) -> Option<f64> {
    let central = |k: usize, h: f64| {
        let mut up = z.clone();
        up.0[k] += h;
        let mut down = z.clone();
        down.0[k] -= h;
        (f(&up) - f(&down)) / (2.0 * h)
    };
    let fd: Vec<f64> = (0..z.dim()).map(|k| central(k, FD_STEP)).collect();
    let coarse: Vec<f64> = (0..z.dim()).map(|k| central(k, 2.0 * FD_STEP)).collect();
    let scale = fd.iter().chain(analytic).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let rounding = 8.0 * f64::EPSILON * f(z).abs().max(1.0) / FD_STEP;
    let smooth = fd.iter().zip(&coarse).all(|(a, b)| (a - b).abs() <= 1e-4 * scale + rounding);
    smooth.then(|| fd.iter().zip(analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
}

fn criterion_1() -> Check {
    let mut worst = [0.0f64; 3];
    let mut redraws = 0;
    for seed in 0..10u64 {
        let arch = Architecture::new(16, 16, 4).map_err(fmt_err)?;
        let gan = ModelCheckpoint::init(arch, seed).map_err(fmt_err)?;
        let mut r = rng::seeded(1000 + seed);
        let clean = random_image(&mut r, 16);
        let kind = MaskKind::ALL[seed as usize % MaskKind::ALL.len()];
        let spec = CorruptionSpec::new(kind, seed).with_block_sizes(&[8]);
        let mask = make_mask(&spec, (16, 16)).map_err(fmt_err)?;
        let damaged = apply_mask(&clean, &mask).map_err(fmt_err)?;
        let mut done = false;
        for _attempt in 0..20 {
            let z = LatentVector::sample_prior(16, &mut r);
            let con = evaluate(&z, &damaged, &mask, &gan, 0.0, true).map_err(fmt_err)?.gradient.unwrap();
            let both = evaluate(&z, &damaged, &mask, &gan, 1.0, true).map_err(fmt_err)?.gradient.unwrap();
            let per: Vec<f64> = both.iter().zip(&con).map(|(a, b)| a - b).collect();
            let ec = fd_error(&z, &con, |z| contextual_loss(z, &damaged, &mask, &gan).unwrap());
            let ep = fd_error(&z, &per, |z| perceptual_loss(z, &gan).unwrap());
            let (Some(ec), Some(ep)) = (ec, ep) else {
                redraws += 1;
                continue;
            };
            worst[0] = worst[0].max(ec);
            worst[1] = worst[1].max(ep);
            done = true;
            break;
        }
        if !done {
            return Err(format!("seed {seed}: every draw straddled a kink"));
        }
        // The smoothness term is quadratic, so its differences are exact up
        // to rounding.
        let zs: Vec<LatentVector> = (0..3).map(|_| LatentVector::sample_prior(16, &mut r)).collect();
        let g = smoothness_gradient(&zs).map_err(fmt_err)?;
        for (i, gi) in g.iter().enumerate() {
            let f = |z: &LatentVector| {
                let mut p = zs.clone();
                p[i] = z.clone();
                smoothness_loss(&p).unwrap()
            };
            let e = fd_error(&zs[i], gi, f).ok_or("smoothness loss reported a kink")?;
            worst[2] = worst[2].max(e);
        }
    }
    let pass = worst[0] <= 1e-3 && worst[1] <= 1e-3 && worst[2] <= 1e-6;
    Ok(Outcome::new(
        pass,
        format!(
            "max rel err contextual {:.2e}, perceptual {:.2e}, smoothness {:.2e} over 10 seeds ({redraws} kinked draws redrawn)",
            worst[0], worst[1], worst[2]
        ),
    ))
}

// ---------------------------------------------------------------- exactness

fn criterion_2() -> Check {
    let mut failures = Vec::new();
    let mut r = rng::seeded(2);

    // Blending copies observed pixels bit for bit.
    let arch = Architecture::new(8, 32, 2).map_err(fmt_err)?;
    let gan = ModelCheckpoint::init(arch, 2).map_err(fmt_err)?;
    for (k, kind) in MaskKind::ALL.iter().enumerate() {
        let clean = random_image(&mut r, 32);
        let spec = CorruptionSpec::new(*kind, k as u64).with_block_sizes(&CHECKERBOARD_SIZES);
        let mask = make_mask(&spec, (32, 32)).map_err(fmt_err)?;
        let damaged = apply_mask(&clean, &mask).map_err(fmt_err)?;
        let z = LatentVector::sample_prior(8, &mut r);
        let cfg = OptimConfig {
            max_iters: 3,
            ..OptimConfig::default()
        };
        let res = optimize_latent(&damaged, &mask, &z, &gan, &cfg).map_err(fmt_err)?;
        let generated = gan.generate(std::slice::from_ref(&res.z_hat)).map_err(fmt_err)?.remove(0);
        let plane = 32 * 32;
        for c in 0..3 {
            for p in 0..plane {
                let i = c * plane + p;
                let want = if mask.is_observed(p) { damaged.planar()[i] } else { generated.planar()[i] };
                if res.inpainted.planar()[i].to_bits() != want.to_bits() {
                    failures.push(format!("blend differs at {kind} pixel {i}"));
                    break;
                }
            }
        }
    }

    // Smoothness: zero exactly on identical latents, quadratic in scale.
    for _ in 0..20 {
        let z = LatentVector::sample_prior(16, &mut r);
        if smoothness_loss(&[z.clone(), z.clone(), z.clone()]).map_err(fmt_err)? != 0.0 {
            failures.push("smoothness of identical latents is not zero".into());
        }
        let zs: Vec<LatentVector> = (0..3).map(|_| LatentVector::sample_prior(16, &mut r)).collect();
        let base = smoothness_loss(&zs).map_err(fmt_err)?;
        if base <= 0.0 {
            failures.push("smoothness of distinct latents is not positive".into());
        }
        let c = r.random_range(0.1..5.0);
        let scaled: Vec<LatentVector> = zs.iter().map(|z| LatentVector(z.iter().map(|v| c * v).collect())).collect();
        let s = smoothness_loss(&scaled).map_err(fmt_err)?;
        if (s - c * c * base).abs() > 1e-12 * s.max(1.0) {
            failures.push(format!("smoothness not quadratic: {s} vs {}", c * c * base));
        }
    }

    // PSNR closed forms and symmetry.
    let mid = Image::filled(16, 16, 0.0);
    let one_level = Image::filled(16, 16, 2.0 / 255.0);
    let p1 = psnr(&mid, &one_level).map_err(fmt_err)?;
    if (p1 - 48.13).abs() > 0.005 {
        failures.push(format!("PSNR at MSE 1 is {p1}"));
    }
    let p0 = psnr(&Image::filled(16, 16, -1.0), &Image::filled(16, 16, 1.0)).map_err(fmt_err)?;
    if p0.abs() > 1e-12 {
        failures.push(format!("PSNR at MSE 255² is {p0}"));
    }
    for _ in 0..20 {
        let (a, b) = (random_image(&mut r, 16), random_image(&mut r, 16));
        if psnr(&a, &b).map_err(fmt_err)? != psnr(&b, &a).map_err(fmt_err)? {
            failures.push("PSNR is not symmetric".into());
        }
    }

    // Temporal consistency against the pair loop.
    for _ in 0..20 {
        let t: Vec<Image> = (0..3).map(|_| random_image(&mut r, 16)).collect();
        let mut sum = 0.0;
        let mut n = 0;
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                sum += psnr(&t[i], &t[j]).map_err(fmt_err)?;
                n += 1;
            }
        }
        let got = temporal_consistency(&t).map_err(fmt_err)?;
        if (got - sum / n as f64).abs() > 1e-12 {
            failures.push(format!("temporal consistency {got} vs pair loop {}", sum / n as f64));
        }
    }

    // Identity loss vanishes on identical inputs.
    let emb = ToyEmbedder::init(16, 32, 4, 9).map_err(fmt_err)?;
    for _ in 0..5 {
        let a = random_image(&mut r, 32);
        let l = identity_loss(&[a.clone(), a.clone(), a.clone()], &a, &emb).map_err(fmt_err)?;
        if l != 0.0 {
            failures.push(format!("identity loss on identical inputs is {l}"));
        }
    }

    Ok(match failures.first() {
        None => Outcome::new(true, "blend, smoothness, PSNR, consistency and identity checks exact".into()),
        Some(f) => Outcome::new(false, format!("{} failures, first: {f}", failures.len())),
    })
}

// ---------------------------------------------------------------- pipeline

const SEED: &str = "17";

/// Flags of each pipeline stage after its data and checkpoint arguments.
const GAN_FLAGS: &[&str] = &["--latent-dim", "16", "--base-width", "8", "--steps", "10000"];
const INIT_FLAGS: &[&str] = &["--steps", "3000"];
const SEQ_FLAGS: &[&str] = &["--steps", "3000", "--window", "3"];
const EVAL_FLAGS: &[&str] = &["--count", "50", "--mask-kind", "central"];
const ABLATE_FLAGS: &[&str] = &["--count", "100", "--window", "3", "--mu", "0.1", "--mask-kind", "central"];

struct Pipeline {
    root: PathBuf,
    total: Duration,
}

impl Pipeline {
    fn new() -> Self {
        let root = std::env::var_os("INPAINT_ACCEPTANCE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance"));
        fs::create_dir_all(&root).unwrap();
        Self {
            root,
            total: Duration::ZERO,
        }
    }

    /// Runs one stage unless a previous run with the same arguments left its
    /// marker; returns the run directory and the time spent (the recorded
    /// time when reused).
    fn stage(&mut self, name: &str, args: &[&str]) -> Result<(PathBuf, Duration), String> {
        let marker = self.root.join(format!("{name}.done"));
        let key = args.join(" ");
        if let Ok(text) = fs::read_to_string(&marker) {
            let mut lines = text.lines();
            let (dir, secs, prev) = (lines.next(), lines.next().and_then(|s| s.parse::<f64>().ok()), lines.next());
            if let (Some(dir), Some(secs), Some(prev)) = (dir, secs, prev) {
                if prev == key && Path::new(dir).is_dir() {
                    let took = Duration::from_secs_f64(secs);
                    self.total += took;
                    eprintln!("reusing {name} from {dir}");
                    return Ok((PathBuf::from(dir), took));
                }
            }
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_inpaint-lab"));
        for (k, _) in std::env::vars_os() {
            if k.to_string_lossy().starts_with("INPAINT_") {
                cmd.env_remove(k);
            }
        }
        cmd.arg("--outdir").arg(self.root.join("runs")).args(["--seed", SEED]).arg(name).args(args);
        eprintln!("running {name}");
        let start = Instant::now();
        let out = cmd.output().map_err(fmt_err)?;
        let took = start.elapsed();
        if !out.status.success() {
            return Err(format!("{name} failed: {}", String::from_utf8_lossy(&out.stderr).trim_end()));
        }
        let dir = PathBuf::from(String::from_utf8_lossy(&out.stdout).trim());
        fs::write(&marker, format!("{}\n{}\n{key}\n", dir.display(), took.as_secs_f64())).map_err(fmt_err)?;
        self.total += took;
        Ok((dir, took))
    }
}

struct Runs {
    data: PathBuf,
    gan: PathBuf,
    ablate: PathBuf,
    ablate_time: Duration,
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn criterion_8(p: &mut Pipeline) -> Result<(Outcome, Runs), String> {
    let (synth, _) = p.stage("synth-data", &[])?;
    let data = synth.join("data");
    let (gan, _) = p.stage("train-gan", &[&["--data", s(&data)], GAN_FLAGS].concat())?;
    let gan = gan.join("checkpoint");
    let (init, _) = p.stage("train-init", &[&["--data", s(&data), "--gan", s(&gan)], INIT_FLAGS].concat())?;
    let init = init.join("checkpoint");
    let (seq, _) = p.stage("train-seq-init", &[&["--data", s(&data), "--gan", s(&gan)], SEQ_FLAGS].concat())?;
    let seq = seq.join("checkpoint");
    let (ablate, ablate_time) = p.stage(
        "ablate",
        &[&["--data", s(&data), "--gan", s(&gan), "--seq-init", s(&seq)], ABLATE_FLAGS].concat(),
    )?;
    let expected = ["ablation.csv", "per_item.csv", "aggregates.csv", "tests.csv", "grid.png", "smoothness_curve.png"];
    let missing: Vec<&str> = expected.iter().copied().filter(|f| !ablate.join(f).is_file()).collect();
    let rows = fs::read_to_string(ablate.join("ablation.csv")).map(|t| t.lines().count()).unwrap_or(0);
    let pass = missing.is_empty() && rows == 4;
    let detail = if pass {
        format!("cold-start pipeline wrote ablation.csv with 3 rungs and grids in {:.1} min", p.total.as_secs_f64() / 60.0)
    } else {
        format!("missing {missing:?}, ablation.csv has {rows} lines")
    };
    let out = within(p.total, 240 * MINUTE, Outcome::new(pass, detail));
    fs::write(p.root.join("initializer.path"), s(&init)).map_err(fmt_err)?;
    Ok((
        out,
        Runs {
            data,
            gan,
            ablate,
            ablate_time,
        },
    ))
}

// ---------------------------------------------------------------- decoupling

fn criterion_3(runs: &Runs) -> Check {
    let gan = checkpoint::load_gan(&runs.gan).map_err(fmt_err)?;
    let m = DatasetManifest::open(&runs.data).map_err(fmt_err)?;
    let items: Vec<_> = m.stills(Split::Test).into_iter().take(5).collect();
    let images = m.load_images(&items).map_err(fmt_err)?;
    let mut compared = 0;
    for (i, im) in images.iter().enumerate() {
        let spec = CorruptionSpec::new(MaskKind::Freehand, 0);
        let p = build_pseudo_sequence(im, 3, &[spec], rng::derive_seed(5, i as u64)).map_err(fmt_err)?;
        let window = SequenceWindow::new(p.damaged.clone(), p.masks.clone()).map_err(fmt_err)?;
        let zs: Vec<LatentVector> = (0..3)
            .map(|k| LatentVector::sample_prior(gan.latent_dim(), &mut rng::child(i as u64, k)))
            .collect();
        let base = OptimConfig::random_init();
        let joint = optimize_window(window, &zs, &gan, &SequenceOptimConfig::new(base, 0.0)).map_err(fmt_err)?;
        for (k, z) in zs.iter().enumerate() {
            let single = optimize_latent(&p.damaged[k], &p.masks[k], z, &gan, &base).map_err(fmt_err)?;
            if single.trace != joint.results[k].trace {
                return Ok(Outcome::new(false, format!("sequence {i} frame {k}: traces differ")));
            }
            compared += 1;
        }
    }
    Ok(Outcome::new(
        true,
        format!("{compared} frames: mu=0 joint traces equal per-frame traces over 700 iterations"),
    ))
}

// ---------------------------------------------------------------- directional

fn criterion_4(p: &mut Pipeline, runs: &Runs) -> Check {
    let init = fs::read_to_string(p.root.join("initializer.path")).map_err(fmt_err)?;
    let (dir, took) = p.stage(
        "eval",
        &[&["--data", s(&runs.data), "--gan", s(&runs.gan), "--initializer", init.trim()], EVAL_FLAGS].concat(),
    )?;
    let text = fs::read_to_string(dir.join("summary.json")).map_err(fmt_err)?;
    let sm: ConvergenceSummary = serde_json::from_str(&text).map_err(fmt_err)?;
    let pass = sm.items >= 50
        && sm.median_hit_ratio <= 0.20
        && sm.median_initial_learned < sm.median_initial_random
        && sm.initial_loss_p_value < 0.05;
    Ok(within(
        took,
        30 * MINUTE,
        Outcome::new(
            pass,
            format!(
                "{} images: median learned hit {:.0}/{} iterations (ratio {:.3}, needs <= 0.20); iteration-0 loss {:.1} vs {:.1}, p = {:.2e}",
                sm.items,
                sm.median_learned_hit,
                sm.random_budget,
                sm.median_hit_ratio,
                sm.median_initial_learned,
                sm.median_initial_random,
                sm.initial_loss_p_value
            ),
        ),
    ))
}

fn ladder(runs: &Runs) -> Result<Vec<LadderRow>, String> {
    let mut r = csv::Reader::from_path(runs.ablate.join("ablation.csv")).map_err(fmt_err)?;
    let rows: Vec<LadderRow> = r.deserialize().collect::<Result<_, _>>().map_err(fmt_err)?;
    let names: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    if names != ["baseline", "smooth", "lstm+smooth"] {
        return Err(format!("unexpected ladder {names:?}"));
    }
    Ok(rows)
}

fn p_ok(p: Option<f64>) -> bool {
    p.is_some_and(|p| p < 0.05)
}

fn fmt_p(p: Option<f64>) -> String {
    p.map_or("n/a".into(), |p| format!("{p:.2e}"))
}

fn criterion_5(runs: &Runs) -> Check {
    let rows = ladder(runs)?;
    let (b, sm, ls) = (&rows[0], &rows[1], &rows[2]);
    let pass = b.sequences >= 100
        && ls.eta_temp_median_db > sm.eta_temp_median_db
        && sm.eta_temp_median_db > b.eta_temp_median_db
        && p_ok(sm.p_eta_temp_vs_previous)
        && p_ok(ls.p_eta_temp_vs_previous);
    Ok(within(
        runs.ablate_time,
        60 * MINUTE,
        Outcome::new(
            pass,
            format!(
                "{} sequences: median eta_temp lstm+smooth {:.2} > smooth {:.2} > baseline {:.2} dB (p {} , {})",
                b.sequences,
                ls.eta_temp_median_db,
                sm.eta_temp_median_db,
                b.eta_temp_median_db,
                fmt_p(ls.p_eta_temp_vs_previous),
                fmt_p(sm.p_eta_temp_vs_previous)
            ),
        ),
    ))
}

fn criterion_6(runs: &Runs) -> Check {
    let rows = ladder(runs)?;
    let (b, sm) = (&rows[0], &rows[1]);
    let pass = b.sequences >= 50 && sm.l_sm_median < b.l_sm_median && p_ok(sm.p_l_sm_vs_baseline);
    Ok(Outcome::new(
        pass,
        format!(
            "{} sequences: median final l_sm mu=0.1 {:.4} < mu=0 {:.4} (p {})",
            b.sequences,
            sm.l_sm_median,
            b.l_sm_median,
            fmt_p(sm.p_l_sm_vs_baseline)
        ),
    ))
}

fn criterion_7(runs: &Runs) -> Check {
    let rows = ladder(runs)?;
    let (b, ls) = (&rows[0], &rows[2]);
    let (Some(lb), Some(ll)) = (b.identity_loss_mean, ls.identity_loss_mean) else {
        return Ok(Outcome::new(false, "identity loss missing from the ladder".into()));
    };
    let pass = ll < lb && p_ok(ls.p_identity_vs_baseline);
    Ok(Outcome::new(
        pass,
        format!(
            "{} sequences: mean identity loss lstm+smooth {ll:.4} < baseline {lb:.4} (p {})",
            b.sequences,
            fmt_p(ls.p_identity_vs_baseline)
        ),
    ))
}

// ---------------------------------------------------------------- driver

fn report(n: usize, name: &str, start: Instant, limit: Option<Duration>, c: Check) -> bool {
    let o = match c {
        Ok(o) => match limit {
            Some(l) => within(start.elapsed(), l, o),
            None => o,
        },
        Err(e) => Outcome::new(false, format!("error: {e}")),
    };
    println!("criterion {n} {:<24} {} {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    o.pass
}

/// Criterion numbers given on the command line; empty runs them all.
fn selected() -> Vec<usize> {
    std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect()
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only = selected();
    let wants = |n: usize| only.is_empty() || only.contains(&n);
    let mut ok = true;
    if wants(1) {
        let t = Instant::now();
        ok &= report(1, "gradient suite", t, Some(MINUTE), criterion_1());
    }
    if wants(2) {
        let t = Instant::now();
        ok &= report(2, "exactness suite", t, Some(MINUTE), criterion_2());
    }
    if !(3..=8).any(wants) {
        std::process::exit(if ok { 0 } else { 1 });
    }

    let mut p = Pipeline::new();
    match criterion_8(&mut p) {
        Ok((c8, runs)) => {
            let t = Instant::now();
            ok &= report(3, "mu=0 decoupling", t, Some(5 * MINUTE), criterion_3(&runs));
            ok &= report(4, "convergence speedup", t, None, criterion_4(&mut p, &runs));
            ok &= report(5, "consistency ladder", t, None, criterion_5(&runs));
            ok &= report(6, "smoothness disparity", t, None, criterion_6(&runs));
            ok &= report(7, "identity retention", t, None, criterion_7(&runs));
            ok &= report(8, "end-to-end ablate", t, None, Ok(c8));
        }
        Err(e) => {
            for (n, name) in [(3, "mu=0 decoupling"), (4, "convergence speedup"), (5, "consistency ladder")]
                .into_iter()
                .chain([(6, "smoothness disparity"), (7, "identity retention"), (8, "end-to-end ablate")])
            {
                ok &= report(n, name, Instant::now(), None, Err(format!("pipeline: {e}")));
            }
        }
    }
    if !ok {
        std::process::exit(1);
    }
}
