//! RIFF/WAVE, 16-bit little-endian mono PCM only.
//!
//! Unknown chunks are skipped on read. Writes use the canonical 44-byte
//! header (`RIFF`, `fmt ` of 16 bytes, `data`).

use super::{MediaAsset, MediaKind};
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn decode(bytes: &[u8]) -> Result<MediaAsset> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut sample_rate = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Format(format!("chunk {:?} overruns the file", String::from_utf8_lossy(id))))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Format("fmt chunk too short".into()));
                }
                let format = u16_at(body, 0);
                let channels = u16_at(body, 2);
                let bits = u16_at(body, 14);
                if format != FORMAT_PCM {
                    return Err(Error::Unsupported(format!("WAV format tag {format}, only PCM is supported")));
                }
                if channels != 1 {
                    return Err(Error::Unsupported(format!("{channels} channels, only mono is supported")));
                }
                if bits != 16 {
                    return Err(Error::Unsupported(format!("{bits}-bit samples, only 16-bit is supported")));
                }
                sample_rate = Some(u32_at(body, 4));
            }
            b"data" => {
                let rate = sample_rate.ok_or_else(|| Error::Format("data chunk before fmt chunk".into()))?;
                if body.len() % 2 != 0 {
                    return Err(Error::Format("odd-sized 16-bit data chunk".into()));
                }
                let samples = body.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
                return MediaAsset::pcm16(rate, samples);
            }
            _ => {}
        }
        pos = body_end + (size & 1);
    }
    Err(Error::Format("no data chunk".into()))
}

pub fn encode(asset: &MediaAsset) -> Vec<u8> {
    let MediaKind::Pcm16 { sample_rate } = asset.kind() else {
        panic!("wav::encode called on a non-audio asset");
    };
    let data_len = (asset.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &v in asset.samples() {
        out.extend_from_slice(&(v as i16).to_le_bytes());
    }
    out
}
