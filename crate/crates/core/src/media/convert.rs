use super::{MediaAsset, MediaKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::calibrate;
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind, MIN_SEGMENT_LEN};

const PCM_SCALE: f64 = 32768.0;

fn normalize(kind: MediaKind, v: i32) -> f64 {
    match kind {
        MediaKind::Image8 { .. } => 2.0 * v as f64 / 255.0 - 1.0,
        MediaKind::Pcm16 { .. } => v as f64 / PCM_SCALE,
    }
}

/// Splits an asset into `p` contiguous segments of `T = ceil(N / p)`
/// normalized samples, zero-padding the tail of the last segment(s).
///
/// Images map `v` to `2v/255 - 1`, audio maps `v` to `v/32768`.
pub fn to_signal<T: Scalar>(asset: &MediaAsset, p: usize) -> Result<SignalBlock<T>> {
    if p == 0 {
        return Err(Error::InvalidParams("P must be at least 1".into()));
    }
    let n = asset.len();
    if n == 0 {
        return Err(Error::InvalidSignal("empty asset".into()));
    }
    let t = n.div_ceil(p);
    if t < MIN_SEGMENT_LEN {
        return Err(Error::InvalidSignal(format!(
            "{n} samples in {p} segments gives length {t} < {MIN_SEGMENT_LEN}"
        )));
    }
    let kind = asset.kind();
    let samples = asset.samples();
    let m = Matrix::from_fn(p, t, |i, j| {
        let k = i * t + j;
        if k < n {
            T::of(normalize(kind, samples[k]))
        } else {
            T::zero()
        }
    });
    SignalBlock::new(m, n, SignalKind::Plaintext)
}

/// Inverse of [`to_signal`], quantizing back to the template's integer
/// range and dropping padding.
///
/// With `calibrate` set, image segments are first stretched so their
/// minimum maps to 0 and maximum to 255. Audio is always clamped to
/// `[-1, 1]` and scaled by 32768.
pub fn from_signal<T: Scalar>(sig: &SignalBlock<T>, template: &MediaAsset, calibrated: bool) -> Result<MediaAsset> {
    if sig.original_length() != template.len() {
        return Err(Error::Dimension(format!(
            "signal holds {} samples, template has {}",
            sig.original_length(),
            template.len()
        )));
    }
    let mut out = Vec::with_capacity(template.len());
    for i in 0..sig.segment_count() {
        let seg = sig.valid_segment(i);
        match template.kind() {
            MediaKind::Image8 { .. } => {
                if calibrated {
                    out.extend(calibrate(seg).into_iter().map(|v| v.round().clamp(0.0, 255.0) as i32));
                } else {
                    out.extend(seg.iter().map(|v| ((v.as_f64() + 1.0) * 127.5).round().clamp(0.0, 255.0) as i32));
                }
            }
            MediaKind::Pcm16 { .. } => {
                out.extend(seg.iter().map(|v| {
                    let s = v.as_f64().clamp(-1.0, 1.0);
                    (s * PCM_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i32
                }));
            }
        }
    }
    MediaAsset::like(template, out)
}
