//! Checkpoint directories: a `manifest.json`, one weight file per network
//! and a CSV of the training history.

use std::path::Path;

use inpaint_core::embedder::ToyEmbedder;
use inpaint_core::initializer::{InitStepRecord, InitializerCheckpoint};
use inpaint_core::model::{Architecture, GanStepRecord, ModelCheckpoint};
use inpaint_core::seqinit::SequenceInitCheckpoint;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::files::{read_bytes, read_csv, read_json, write_bytes, write_csv_with_header, write_json};

pub const GAN_FORMAT: &str = "gan/1";
pub const INITIALIZER_FORMAT: &str = "initializer/1";
pub const SEQUENCE_INITIALIZER_FORMAT: &str = "sequence-initializer/1";
pub const EMBEDDER_FORMAT: &str = "embedder/1";

const MANIFEST: &str = "manifest.json";
const HISTORY: &str = "history.csv";
const GAN_HISTORY_HEADER: [&str; 5] = ["step", "d_loss", "g_loss", "d_real", "d_fake"];
const INIT_HISTORY_HEADER: [&str; 4] = ["step", "loss", "mse", "perceptual"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub format_version: String,
    pub latent_dim: usize,
    pub resolution: usize,
    pub base_width: usize,
    pub step: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "window_W")]
    pub window: Option<usize>,
}

impl CheckpointManifest {
    fn new(format: &str, arch: &Architecture, step: usize) -> Self {
        Self {
            format_version: format.to_string(),
            latent_dim: arch.latent_dim,
            resolution: arch.resolution,
            base_width: arch.base_width,
            step,
            h_dim: None,
            window: None,
        }
    }

    pub fn arch(&self) -> Result<Architecture> {
        Architecture::new(self.latent_dim, self.resolution, self.base_width)
            .map_err(|e| inpaint_core::Error::Load(e.to_string()).into())
    }
}

/// Reads a checkpoint manifest and checks its format tag.
pub fn read_manifest(dir: &Path, format: &str) -> Result<CheckpointManifest> {
    let m: CheckpointManifest = read_json(&dir.join(MANIFEST))?;
    if m.format_version != format {
        return Err(inpaint_core::Error::Load(format!(
            "{} holds a {} checkpoint, expected {format}",
            dir.display(),
            m.format_version
        ))
        .into());
    }
    Ok(m)
}

fn read_history<T: serde::de::DeserializeOwned>(dir: &Path) -> Result<Vec<T>> {
    let p = dir.join(HISTORY);
    if p.exists() {
        read_csv(&p)
    } else {
        Ok(Vec::new())
    }
}

pub fn save_gan(dir: &Path, ckpt: &ModelCheckpoint) -> Result<()> {
    write_bytes(&dir.join("generator.bin"), &ckpt.generator_bytes())?;
    write_bytes(&dir.join("discriminator.bin"), &ckpt.discriminator_bytes())?;
    write_csv_with_header(&dir.join(HISTORY), &GAN_HISTORY_HEADER, &ckpt.history)?;
    write_json(&dir.join(MANIFEST), &CheckpointManifest::new(GAN_FORMAT, &ckpt.arch, ckpt.step))
}

pub fn load_gan(dir: &Path) -> Result<ModelCheckpoint> {
    let m = read_manifest(dir, GAN_FORMAT)?;
    let g = read_bytes(&dir.join("generator.bin"))?;
    let d = read_bytes(&dir.join("discriminator.bin"))?;
    let history: Vec<GanStepRecord> = read_history(dir)?;
    Ok(ModelCheckpoint::from_parts(m.arch()?, &g, &d, m.step, history)?)
}

pub fn save_initializer(dir: &Path, ckpt: &InitializerCheckpoint) -> Result<()> {
    write_bytes(&dir.join("encoder.bin"), &ckpt.weight_bytes())?;
    write_csv_with_header(&dir.join(HISTORY), &INIT_HISTORY_HEADER, &ckpt.history)?;
    write_json(
        &dir.join(MANIFEST),
        &CheckpointManifest::new(INITIALIZER_FORMAT, &ckpt.arch, ckpt.step),
    )
}

pub fn load_initializer(dir: &Path) -> Result<InitializerCheckpoint> {
    let m = read_manifest(dir, INITIALIZER_FORMAT)?;
    let bytes = read_bytes(&dir.join("encoder.bin"))?;
    let history: Vec<InitStepRecord> = read_history(dir)?;
    Ok(InitializerCheckpoint::from_parts(m.arch()?, &bytes, m.step, history)?)
}

pub fn save_sequence_initializer(dir: &Path, ckpt: &SequenceInitCheckpoint) -> Result<()> {
    write_bytes(&dir.join("encoder.bin"), &ckpt.encoder_bytes())?;
    write_bytes(&dir.join("lstm.bin"), &ckpt.lstm_bytes())?;
    write_bytes(&dir.join("head.bin"), &ckpt.head_bytes())?;
    write_csv_with_header(&dir.join(HISTORY), &INIT_HISTORY_HEADER, &ckpt.history)?;
    let mut m = CheckpointManifest::new(SEQUENCE_INITIALIZER_FORMAT, &ckpt.arch, ckpt.step);
    m.h_dim = Some(ckpt.h_dim);
    m.window = Some(ckpt.window);
    write_json(&dir.join(MANIFEST), &m)
}

pub fn load_sequence_initializer(dir: &Path) -> Result<SequenceInitCheckpoint> {
    let m = read_manifest(dir, SEQUENCE_INITIALIZER_FORMAT)?;
    let (Some(h_dim), Some(window)) = (m.h_dim, m.window) else {
        return Err(LabError::Core(inpaint_core::Error::Load(format!(
            "{}: sequence initializer manifest lacks h_dim or window_W",
            dir.display()
        ))));
    };
    let enc = read_bytes(&dir.join("encoder.bin"))?;
    let lstm = read_bytes(&dir.join("lstm.bin"))?;
    let head = read_bytes(&dir.join("head.bin"))?;
    let history: Vec<InitStepRecord> = read_history(dir)?;
    Ok(SequenceInitCheckpoint::from_parts(
        m.arch()?,
        window,
        h_dim,
        [&enc, &lstm, &head],
        m.step,
        history,
    )?)
}

pub fn save_embedder(dir: &Path, emb: &ToyEmbedder) -> Result<()> {
    write_bytes(&dir.join("embedder.bin"), &emb.weight_bytes())?;
    write_json(&dir.join(MANIFEST), &CheckpointManifest::new(EMBEDDER_FORMAT, &emb.arch, 0))
}

pub fn load_embedder(dir: &Path) -> Result<ToyEmbedder> {
    let m = read_manifest(dir, EMBEDDER_FORMAT)?;
    let bytes = read_bytes(&dir.join("embedder.bin"))?;
    Ok(ToyEmbedder::from_parts(m.arch()?, &bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch() -> Architecture {
        Architecture::new(8, 16, 2).unwrap()
    }

    #[test]
    fn gan_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut ckpt = ModelCheckpoint::init(arch(), 3).unwrap();
        ckpt.step = 7;
        ckpt.history.push(GanStepRecord {
            step: 0,
            d_loss: 1.25,
            g_loss: 0.5,
            d_real: 0.4,
            d_fake: 0.6,
        });
        save_gan(dir.path(), &ckpt).unwrap();
        let back = load_gan(dir.path()).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.generator_bytes(), ckpt.generator_bytes());
    }

    #[test]
    fn initializer_and_sequence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let init = InitializerCheckpoint::init(arch(), 1).unwrap();
        save_initializer(&dir.path().join("p"), &init).unwrap();
        assert_eq!(load_initializer(&dir.path().join("p")).unwrap(), init);
        let seq = SequenceInitCheckpoint::init(arch(), 3, 5, 2).unwrap();
        save_sequence_initializer(&dir.path().join("s"), &seq).unwrap();
        assert_eq!(load_sequence_initializer(&dir.path().join("s")).unwrap(), seq);
        let text = std::fs::read_to_string(dir.path().join("s/manifest.json")).unwrap();
        assert!(text.contains("\"window_W\": 3") && text.contains("\"h_dim\": 5"));
    }

    #[test]
    fn wrong_kind_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        save_initializer(dir.path(), &InitializerCheckpoint::init(arch(), 1).unwrap()).unwrap();
        let err = load_gan(dir.path()).unwrap_err();
        assert!(matches!(err, LabError::Core(inpaint_core::Error::Load(_))), "{err}");
    }

    #[test]
    fn corrupted_weights_fail_to_load() {
        let dir = tempfile::tempdir().unwrap();
        save_gan(dir.path(), &ModelCheckpoint::init(arch(), 3).unwrap()).unwrap();
        let p = dir.path().join("generator.bin");
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_gan(dir.path()).is_err());
    }

    #[test]
    fn unknown_manifest_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        save_gan(dir.path(), &ModelCheckpoint::init(arch(), 3).unwrap()).unwrap();
        let p = dir.path().join(MANIFEST);
        let text = std::fs::read_to_string(&p).unwrap().replacen('{', "{\"extra\": 1,", 1);
        std::fs::write(&p, text).unwrap();
        assert!(matches!(load_gan(dir.path()), Err(LabError::Json { .. })));
    }
}
