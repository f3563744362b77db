//! Result directories for single-image and window inpainting, and metric
//! reports.

use std::path::Path;

use inpaint_core::image::Image;
use inpaint_core::inpaint::{InpaintResult, TracePoint};
use inpaint_core::mask::Mask;
use inpaint_core::metrics::MetricsReport;
use inpaint_core::sequence::{SequenceWindow, SmoothnessPoint};
use serde::Serialize;

use crate::error::Result;
use crate::files::{read_csv, save_mask, save_png, write_csv, write_csv_with_header, write_json};

pub const TRACE_HEADER: [&str; 4] = ["iteration", "contextual", "perceptual", "total"];
pub const SMOOTHNESS_HEADER: [&str; 2] = ["iteration", "l_sm"];

pub fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<()> {
    write_csv_with_header(path, &TRACE_HEADER, trace)
}

pub fn read_trace(path: &Path) -> Result<Vec<TracePoint>> {
    read_csv(path)
}

/// Writes `inpainted.png`, `damaged.png`, `mask.png`, `trace.csv`,
/// `z_hat.json` and, when given, `original.png`.
pub fn write_inpaint_result(
    dir: &Path,
    result: &InpaintResult,
    damaged: &Image,
    mask: &Mask,
    original: Option<&Image>,
) -> Result<()> {
    save_png(&dir.join("inpainted.png"), &result.inpainted)?;
    save_png(&dir.join("damaged.png"), damaged)?;
    save_mask(&dir.join("mask.png"), mask)?;
    if let Some(o) = original {
        save_png(&dir.join("original.png"), o)?;
    }
    write_trace(&dir.join("trace.csv"), &result.trace)?;
    write_json(&dir.join("z_hat.json"), &result.z_hat)
}

#[derive(Serialize)]
struct WindowSummary<'a> {
    frames: usize,
    best_iteration: Option<usize>,
    frame_best_totals: Vec<f64>,
    latents: Vec<&'a [f64]>,
}

/// One `frame_<k>` directory per frame plus `smoothness_trace.csv`,
/// `joint_trace.csv` and `window.json`.
pub fn write_window(dir: &Path, window: &SequenceWindow, originals: Option<&[Image]>) -> Result<()> {
    for (k, res) in window.results.iter().enumerate() {
        write_inpaint_result(
            &dir.join(format!("frame_{k:02}")),
            res,
            &window.frames[k],
            &window.masks[k],
            originals.map(|o| &o[k]),
        )?;
    }
    write_csv_with_header::<SmoothnessPoint>(&dir.join("smoothness_trace.csv"), &SMOOTHNESS_HEADER, &window.smoothness_trace)?;
    write_trace(&dir.join("joint_trace.csv"), &window.joint_trace)?;
    write_json(
        &dir.join("window.json"),
        &WindowSummary {
            frames: window.len(),
            best_iteration: window.results.first().map(|r| r.best_iteration),
            frame_best_totals: window.results.iter().map(|r| r.best_total).collect(),
            latents: window.results.iter().map(|r| r.z_hat.0.as_slice()).collect(),
        },
    )
}

/// `per_item.csv`, `aggregates.csv`, `tests.csv` and the whole report as
/// `report.json`.
pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<()> {
    write_csv(&dir.join("per_item.csv"), &report.rows)?;
    write_csv(&dir.join("aggregates.csv"), &report.aggregates)?;
    write_csv(&dir.join("tests.csv"), &report.tests)?;
    write_json(&dir.join("report.json"), report)
}
