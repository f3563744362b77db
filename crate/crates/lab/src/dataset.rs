//! Image-folder datasets and their JSON manifests.
//!
//! Layout conventions: a path component `id_<n>` labels every file below it
//! with identity `n`, and a file named with six digits (`000000.png`) is a
//! frame of the sequence formed by its directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use inpaint_core::image::Image;
use inpaint_core::{rng, toyface};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Result};
use crate::files::{ensure_dir, load_rgb, read_json, rgb_to_image, save_png, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";
const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    /// Keeps every identity on one side of the split.
    pub identity_disjoint: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.1,
            seed: 0,
            identity_disjoint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    pub item_id: String,
    /// Relative to the manifest's `root_path`.
    pub file_path: PathBuf,
    pub identity_label: Option<usize>,
    pub sequence_id: Option<String>,
    pub frame_index: Option<usize>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub root_path: PathBuf,
    pub resolution: usize,
    pub split_spec: SplitSpec,
    pub items: Vec<ManifestItem>,
}

fn data_err(msg: String) -> crate::error::LabError {
    inpaint_core::Error::Data(msg).into()
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Items sharing a key always land on the same side.
fn split_key(item: &ManifestItem, spec: &SplitSpec) -> String {
    match (spec.identity_disjoint, item.identity_label, &item.sequence_id) {
        (true, Some(l), _) => format!("identity:{l}"),
        (_, _, Some(s)) => format!("sequence:{s}"),
        _ => format!("item:{}", item.item_id),
    }
}

/// Ranks the split keys by a seeded hash and sends the first
/// `round(test_fraction * keys)` of them to the test side.
pub fn assign_splits(items: &mut [ManifestItem], spec: &SplitSpec) -> Result<()> {
    if !(0.0..=1.0).contains(&spec.test_fraction) {
        return Err(inpaint_core::Error::Config(format!("test_fraction {} outside [0, 1]", spec.test_fraction)).into());
    }
    let keys: BTreeSet<String> = items.iter().map(|i| split_key(i, spec)).collect();
    let mut ranked: Vec<(u64, &String)> = keys
        .iter()
        .map(|k| (rng::derive_seed(spec.seed, fnv1a(k)), k))
        .collect();
    ranked.sort();
    let n_test = (spec.test_fraction * keys.len() as f64).round() as usize;
    let test: BTreeSet<&String> = ranked.iter().take(n_test).map(|(_, k)| *k).collect();
    for item in items.iter_mut() {
        item.split = if test.contains(&split_key(item, spec)) {
            Split::Test
        } else {
            Split::Train
        };
    }
    Ok(())
}

fn parse_identity(rel: &Path) -> Option<usize> {
    rel.parent()?
        .components()
        .filter_map(|c| c.as_os_str().to_str())
        .filter_map(|c| c.strip_prefix("id_"))
        .find_map(|n| n.parse().ok())
}

fn parse_frame(rel: &Path) -> Option<(String, usize)> {
    let stem = rel.file_stem()?.to_str()?;
    if stem.len() != 6 || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let dir = rel.parent()?.to_str()?.replace('\\', "/");
    Some((dir, stem.parse().ok()?))
}

fn item_for(rel: &Path) -> ManifestItem {
    let id = rel.with_extension("").to_string_lossy().replace('\\', "/");
    let frame = parse_frame(rel);
    ManifestItem {
        item_id: id,
        file_path: rel.to_path_buf(),
        identity_label: parse_identity(rel),
        sequence_id: frame.as_ref().map(|f| f.0.clone()),
        frame_index: frame.map(|f| f.1),
        split: Split::Train,
    }
}

/// Center-crops to a square and resizes; images already at `resolution`
/// pass through unchanged.
pub fn fit_to_resolution(rgb: &image::RgbImage, resolution: usize) -> Image {
    let (w, h) = rgb.dimensions();
    let side = w.min(h);
    let cropped = image::imageops::crop_imm(rgb, (w - side) / 2, (h - side) / 2, side, side).to_image();
    let r = resolution as u32;
    if side == r {
        return rgb_to_image(&cropped);
    }
    rgb_to_image(&image::imageops::resize(&cropped, r, r, FilterType::Triangle))
}

/// Indexes every PNG/JPEG under `root` in lexicographic path order. Files
/// that fail to decode are skipped with a warning.
pub fn load_dataset(root: &Path, resolution: usize, split: &SplitSpec) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(data_err(format!("{} is not a directory", root.display())));
    }
    let root = root.canonicalize().map_err(io_err(root))?;
    let mut candidates = Vec::new();
    for entry in walkdir::WalkDir::new(&root).sort_by_file_name() {
        let entry = entry.map_err(|e| data_err(format!("walking {}: {e}", root.display())))?;
        let path = entry.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if entry.file_type().is_file() && ext.is_some_and(|e| EXTENSIONS.contains(&e.as_str())) {
            candidates.push(path.strip_prefix(&root).expect("walk stays under root").to_path_buf());
        }
    }
    candidates.sort();
    let decodable: Vec<bool> = candidates
        .par_iter()
        .map(|rel| match load_rgb(&root.join(rel)) {
            Ok(_) => true,
            Err(e) => {
                log::warn!("skipping undecodable file: {e}");
                false
            }
        })
        .collect();
    let mut items: Vec<ManifestItem> = candidates
        .iter()
        .zip(decodable)
        .filter(|(_, ok)| *ok)
        .map(|(rel, _)| item_for(rel))
        .collect();
    if items.is_empty() {
        return Err(data_err(format!("no decodable images under {}", root.display())));
    }
    assign_splits(&mut items, split)?;
    Ok(DatasetManifest {
        root_path: root,
        resolution,
        split_spec: *split,
        items,
    })
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Accepts a manifest file or a directory holding `manifest.json`.
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_dir() {
            read_json(&path.join(MANIFEST_FILE))
        } else {
            read_json(path)
        }
    }

    pub fn path_of(&self, item: &ManifestItem) -> PathBuf {
        self.root_path.join(&item.file_path)
    }

    pub fn load_image(&self, item: &ManifestItem) -> Result<Image> {
        Ok(fit_to_resolution(&load_rgb(&self.path_of(item))?, self.resolution))
    }

    pub fn load_images(&self, items: &[&ManifestItem]) -> Result<Vec<Image>> {
        items.par_iter().map(|i| self.load_image(i)).collect()
    }

    /// Still images (not sequence frames) of one split.
    pub fn stills(&self, split: Split) -> Vec<&ManifestItem> {
        self.items
            .iter()
            .filter(|i| i.split == split && i.sequence_id.is_none())
            .collect()
    }

    /// Sequences of one split with frames ordered by index.
    pub fn sequences(&self, split: Split) -> Vec<(String, Vec<&ManifestItem>)> {
        let mut seqs: BTreeMap<&str, Vec<&ManifestItem>> = BTreeMap::new();
        for i in self.items.iter().filter(|i| i.split == split) {
            if let Some(s) = &i.sequence_id {
                seqs.entry(s).or_default().push(i);
            }
        }
        seqs.into_iter()
            .map(|(k, mut v)| {
                v.sort_by_key(|i| i.frame_index);
                (k.to_string(), v)
            })
            .collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.items.iter().filter(|i| i.split == split).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyFaceSpec {
    pub count: usize,
    pub resolution: usize,
    pub identities: usize,
    pub sequences_per_identity: usize,
    pub sequence_length: usize,
    pub seed: u64,
}

impl Default for ToyFaceSpec {
    fn default() -> Self {
        Self {
            count: 2000,
            resolution: 32,
            identities: 50,
            sequences_per_identity: 2,
            sequence_length: 8,
            seed: 0,
        }
    }
}

/// Renders a toy face dataset to `out_dir` and writes its manifest there.
///
/// Stills go to `faces/id_<n>/face_<i>.png` and sequences to
/// `sequences/id_<n>/seq_<k>/<frame>.png`.
pub fn synthesize_toy_faces(out_dir: &Path, spec: &ToyFaceSpec, split: &SplitSpec) -> Result<DatasetManifest> {
    let set = toyface::synthesize(spec.count, spec.resolution, spec.identities, spec.seed)?;
    let seqs = if spec.sequences_per_identity > 0 {
        toyface::synthesize_sequences(
            spec.identities,
            spec.sequences_per_identity,
            spec.sequence_length,
            spec.resolution,
            spec.seed,
        )?
    } else {
        Vec::new()
    };
    ensure_dir(out_dir)?;
    let root = out_dir.canonicalize().map_err(io_err(out_dir))?;
    let mut files: Vec<(PathBuf, &Image)> = Vec::new();
    for (i, (img, label)) in set.images.iter().zip(&set.labels).enumerate() {
        files.push((PathBuf::from(format!("faces/id_{label:04}/face_{i:06}.png")), img));
    }
    let mut per_label = BTreeMap::new();
    for s in &seqs {
        let k = per_label.entry(s.label).or_insert(0usize);
        for (f, img) in s.frames.iter().enumerate() {
            files.push((
                PathBuf::from(format!("sequences/id_{:04}/seq_{:02}/{f:06}.png", s.label, k)),
                img,
            ));
        }
        *k += 1;
    }
    files.par_iter().try_for_each(|(rel, img)| save_png(&root.join(rel), img))?;
    files.sort_by(|a, b| a.0.cmp(&b.0));
    let mut items: Vec<ManifestItem> = files.iter().map(|(rel, _)| item_for(rel)).collect();
    assign_splits(&mut items, split)?;
    let manifest = DatasetManifest {
        root_path: root.clone(),
        resolution: spec.resolution,
        split_spec: *split,
        items,
    };
    manifest.save(&root.join(MANIFEST_FILE))?;
    Ok(manifest)
}
