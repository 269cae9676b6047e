//! Media assets and their mapping to and from signal blocks.

mod convert;
pub mod pgm;
pub mod wav;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use convert::{from_signal, to_signal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MediaKind {
    /// 8-bit grayscale image, samples row-major in `0..=255`.
    Image8 { width: u32, height: u32 },
    /// 16-bit mono PCM, samples in `-32768..=32767`.
    Pcm16 { sample_rate: u32 },
}

impl MediaKind {
    pub fn extension(&self) -> &'static str {
        match self {
            MediaKind::Image8 { .. } => "pgm",
            MediaKind::Pcm16 { .. } => "wav",
        }
    }

    pub fn is_image(&self) -> bool {
        matches!(self, MediaKind::Image8 { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaAsset {
    kind: MediaKind,
    samples: Vec<i32>,
}

impl MediaAsset {
    pub fn image8(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParams(format!("image dimensions {width}x{height}")));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Dimension(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        let samples = pixels.into_iter().map(i32::from).collect();
        Ok(MediaAsset { kind: MediaKind::Image8 { width, height }, samples })
    }

    pub fn pcm16(sample_rate: u32, samples: Vec<i16>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParams("sample rate must be positive".into()));
        }
        let samples = samples.into_iter().map(i32::from).collect();
        Ok(MediaAsset { kind: MediaKind::Pcm16 { sample_rate }, samples })
    }

    /// Same metadata as `template`, new samples. Values are range checked.
    pub fn like(template: &MediaAsset, samples: Vec<i32>) -> Result<Self> {
        if samples.len() != template.samples.len() {
            return Err(Error::Dimension(format!(
                "{} samples, template has {}",
                samples.len(),
                template.samples.len()
            )));
        }
        let (lo, hi) = template.sample_range();
        if let Some(v) = samples.iter().find(|v| **v < lo || **v > hi) {
            return Err(Error::InvalidParams(format!("sample {v} outside {lo}..={hi}")));
        }
        Ok(MediaAsset { kind: template.kind, samples })
    }

    pub fn kind(&self) -> MediaKind {
        self.kind
    }

    pub fn samples(&self) -> &[i32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_range(&self) -> (i32, i32) {
        match self.kind {
            MediaKind::Image8 { .. } => (0, 255),
            MediaKind::Pcm16 { .. } => (i16::MIN as i32, i16::MAX as i32),
        }
    }
}

/// Reads a binary PGM (P5, maxval 255) or a 16-bit mono PCM WAV file,
/// chosen by magic bytes.
pub fn load_asset(path: impl AsRef<Path>) -> Result<MediaAsset> {
    let bytes = std::fs::read(path.as_ref())?;
    decode_asset(&bytes)
}

pub fn decode_asset(bytes: &[u8]) -> Result<MediaAsset> {
    if bytes.starts_with(b"P5") {
        pgm::decode(bytes)
    } else if bytes.starts_with(b"RIFF") {
        wav::decode(bytes)
    } else {
        Err(Error::Unsupported("neither a P5 PGM nor a RIFF WAV file".into()))
    }
}

pub fn encode_asset(asset: &MediaAsset) -> Vec<u8> {
    match asset.kind {
        MediaKind::Image8 { .. } => pgm::encode(asset),
        MediaKind::Pcm16 { .. } => wav::encode(asset),
    }
}

pub fn store_asset(asset: &MediaAsset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), encode_asset(asset))?;
    Ok(())
}
