//! Reconstruction quality: MAE against ground truth and MANE, a blind
//! smoothness score.
//!
//! Images are scored on the calibrated 0..255 scale (each segment mapped
//! so its minimum lands on 0 and its maximum on 255); audio on the raw
//! `[-1, 1]` scale. Padding never enters a metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::MediaKind;
use crate::scalar::Scalar;
use crate::signal::SignalBlock;

pub const CALIBRATED_MAX: f64 = 255.0;

/// Which representation a metric is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Calibrated 0..255 per segment.
    Image,
    /// Raw samples.
    Audio,
}

impl From<MediaKind> for Domain {
    fn from(kind: MediaKind) -> Self {
        if kind.is_image() {
            Domain::Image
        } else {
            Domain::Audio
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QualityReport {
    /// Absent when no ground truth was available.
    pub per_segment_mae: Option<Vec<f64>>,
    pub per_segment_mane: Vec<f64>,
    /// Sample-weighted mean absolute error over all `original_length`
    /// samples.
    pub aggregate_mae: Option<f64>,
}

impl QualityReport {
    pub fn mean_mane(&self) -> f64 {
        if self.per_segment_mane.is_empty() {
            return 0.0;
        }
        self.per_segment_mane.iter().sum::<f64>() / self.per_segment_mane.len() as f64
    }
}

/// Affine map of `seg` onto `[0, 255]`, min to 0 and max to 255. A constant
/// segment maps to all zeros.
pub fn calibrate<T: Scalar>(seg: &[T]) -> Vec<f64> {
    let (lo, hi) = seg.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let v = v.as_f64();
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return vec![0.0; seg.len()];
    }
    seg.iter().map(|v| (v.as_f64() - lo) / range * CALIBRATED_MAX).collect()
}

/// Valid samples of every segment in the representation of `domain`.
pub fn render<T: Scalar>(sig: &SignalBlock<T>, domain: Domain) -> Vec<Vec<f64>> {
    (0..sig.segment_count())
        .map(|i| {
            let seg = sig.valid_segment(i);
            match domain {
                Domain::Image => calibrate(seg),
                Domain::Audio => seg.iter().map(|v| v.as_f64()).collect(),
            }
        })
        .collect()
}

/// Mean absolute neighbouring error of one segment:
/// `1/(T-2) * sum_{t=2}^{T-1} (|s(t)-s(t-1)| + |s(t)-s(t+1)|) / 2`
/// with 1-based `t`.
pub fn mane_of(seg: &[f64]) -> Result<f64> {
    let n = seg.len();
    if n < 3 {
        return Err(Error::InvalidSignal(format!("MANE needs at least 3 samples, got {n}")));
    }
    let sum: f64 = seg
        .windows(3)
        .map(|w| ((w[1] - w[0]).abs() + (w[1] - w[2]).abs()) / 2.0)
        .sum();
    Ok(sum / (n - 2) as f64)
}

fn segment_mane(seg: &[f64]) -> f64 {
    // Segments cut short by padding to fewer than 3 samples carry no
    // neighbourhood information.
    mane_of(seg).unwrap_or(0.0)
}

fn check_pair<T: Scalar>(a: &SignalBlock<T>, b: &SignalBlock<T>) -> Result<()> {
    if !a.same_shape(b) || a.original_length() != b.original_length() {
        return Err(Error::Dimension(format!(
            "cannot compare {}x{} (n={}) with {}x{} (n={})",
            a.segment_count(),
            a.segment_len(),
            a.original_length(),
            b.segment_count(),
            b.segment_len(),
            b.original_length()
        )));
    }
    Ok(())
}

fn mae_rendered(a: &[Vec<f64>], b: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut total = 0.0;
    let mut count = 0usize;
    let per = a
        .iter()
        .zip(b)
        .map(|(sa, sb)| {
            let s: f64 = sa.iter().zip(sb).map(|(x, y)| (x - y).abs()).sum();
            total += s;
            count += sa.len();
            if sa.is_empty() {
                0.0
            } else {
                s / sa.len() as f64
            }
        })
        .collect();
    (per, total / count as f64)
}

/// Raw-scale MAE per segment.
pub fn mae<T: Scalar>(a: &SignalBlock<T>, b: &SignalBlock<T>) -> Result<QualityReport> {
    mae_in(Domain::Audio, a, b)
}

/// MAE on the representation of `domain`; for images both sides are
/// calibrated first.
pub fn mae_in<T: Scalar>(domain: Domain, a: &SignalBlock<T>, b: &SignalBlock<T>) -> Result<QualityReport> {
    check_pair(a, b)?;
    let (per, agg) = mae_rendered(&render(a, domain), &render(b, domain));
    Ok(QualityReport { per_segment_mae: Some(per), aggregate_mae: Some(agg), per_segment_mane: Vec::new() })
}

/// Raw-scale MANE per segment.
pub fn mane<T: Scalar>(sig: &SignalBlock<T>) -> QualityReport {
    mane_in(Domain::Audio, sig)
}

pub fn mane_in<T: Scalar>(domain: Domain, sig: &SignalBlock<T>) -> QualityReport {
    let per = render(sig, domain).iter().map(|s| segment_mane(s)).collect();
    QualityReport { per_segment_mane: per, ..QualityReport::default() }
}

/// MANE of `recon`, plus MAE against `reference` when one is given.
pub fn assess<T: Scalar>(domain: Domain, recon: &SignalBlock<T>, reference: Option<&SignalBlock<T>>) -> Result<QualityReport> {
    let rendered = render(recon, domain);
    let per_segment_mane = rendered.iter().map(|s| segment_mane(s)).collect();
    let (per_segment_mae, aggregate_mae) = match reference {
        Some(r) => {
            check_pair(recon, r)?;
            let (per, agg) = mae_rendered(&rendered, &render(r, domain));
            (Some(per), Some(agg))
        }
        None => (None, None),
    };
    Ok(QualityReport { per_segment_mae, per_segment_mane, aggregate_mae })
}
