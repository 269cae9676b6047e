//! Segmented signal blocks: P rows of T samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Smallest segment length; MANE needs at least one interior sample.
pub const MIN_SEGMENT_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Plaintext,
    Ciphertext,
    Keystream,
    Differential,
}

impl SignalKind {
    /// Plaintexts and keystreams must stay inside `[-1, 1]`.
    pub fn is_bounded(self) -> bool {
        matches!(self, SignalKind::Plaintext | SignalKind::Keystream)
    }
}

/// A P×T block of samples in column-per-instant layout: row `i` is segment
/// `i`, column `t` is the vector `s(t)`.
///
/// `original_length` counts the samples of the flattened source
/// (segment-major) before zero padding; everything past it is padding and is
/// excluded from metrics. Plaintext and keystream padding is exactly zero.
/// Ciphertext and differential padding is not: each column mixes every
/// segment, so a padded position of one row carries data needed to
/// invert the other rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalBlock<T = f64> {
    segments: Matrix<T>,
    original_length: usize,
    kind: SignalKind,
}

impl<T: Scalar> SignalBlock<T> {
    /// Validating constructor. Bounded kinds are checked against `[-1, 1]`.
    pub fn new(segments: Matrix<T>, original_length: usize, kind: SignalKind) -> Result<Self> {
        let block = Self::build(segments, original_length, kind)?;
        if kind.is_bounded() {
            if let Some(v) = block.segments.as_slice().iter().find(|v| !(v.abs() <= T::one())) {
                return Err(Error::InvalidSignal(format!("{kind:?} sample {v} outside [-1, 1]")));
            }
        }
        Ok(block)
    }

    /// Full-length block (no padding) built from rows.
    pub fn from_rows(rows: &[Vec<T>], kind: SignalKind) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        let n = m.rows() * m.cols();
        Self::new(m, n, kind)
    }

    /// Shape and padding checks only. Used for computed outputs such as
    /// decryptions under a wrong key, which may leave `[-1, 1]`.
    pub(crate) fn build(segments: Matrix<T>, original_length: usize, kind: SignalKind) -> Result<Self> {
        let (p, t) = segments.shape();
        if p == 0 {
            return Err(Error::InvalidSignal("block needs at least one segment".into()));
        }
        if t < MIN_SEGMENT_LEN {
            return Err(Error::InvalidSignal(format!(
                "segment length {t} is below the minimum of {MIN_SEGMENT_LEN}"
            )));
        }
        if original_length == 0 || original_length > p * t {
            return Err(Error::InvalidSignal(format!(
                "original length {original_length} outside 1..={}",
                p * t
            )));
        }
        if kind.is_bounded() && segments.as_slice()[original_length..].iter().any(|v| *v != T::zero()) {
            return Err(Error::InvalidSignal("non-zero sample in padding".into()));
        }
        Ok(SignalBlock { segments, original_length, kind })
    }

    /// All-zero full-length block.
    pub fn zeros(p: usize, t: usize, kind: SignalKind) -> Result<Self> {
        Self::new(Matrix::zeros(p, t), p * t, kind)
    }

    pub fn segment_count(&self) -> usize {
        self.segments.rows()
    }

    pub fn segment_len(&self) -> usize {
        self.segments.cols()
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.segments
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.segments
    }

    pub fn segment(&self, i: usize) -> &[T] {
        self.segments.row(i)
    }

    pub fn sample(&self, i: usize, t: usize) -> T {
        self.segments[(i, t)]
    }

    pub fn column(&self, t: usize) -> Vec<T> {
        (0..self.segment_count()).map(|i| self.segments[(i, t)]).collect()
    }

    /// Number of non-padding samples in segment `i`.
    pub fn valid_len(&self, i: usize) -> usize {
        let t = self.segment_len();
        self.original_length.saturating_sub(i * t).min(t)
    }

    /// Non-padding prefix of segment `i`.
    pub fn valid_segment(&self, i: usize) -> &[T] {
        &self.segment(i)[..self.valid_len(i)]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.segments.shape() == other.segments.shape()
    }

    pub fn max_abs(&self) -> T {
        self.segments.max_abs()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.segments.max_abs_diff(&other.segments)
    }

    /// `self - other` as a differential block.
    pub fn differential(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::Dimension(format!(
                "differential of {:?} and {:?} blocks",
                self.segments.shape(),
                other.segments.shape()
            )));
        }
        let m = self.segments.sub(&other.segments)?;
        Self::build(m, self.original_length.max(other.original_length), SignalKind::Differential)
    }

    /// Applies `f` to every valid sample and zeroes the padding.
    pub fn map_valid(&self, f: impl Fn(T) -> T) -> Self {
        let n = self.original_length;
        let data: Vec<T> = self
            .segments
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, &v)| if k < n { f(v) } else { T::zero() })
            .collect();
        let m = Matrix::from_vec(self.segment_count(), self.segment_len(), data).expect("same shape");
        SignalBlock { segments: m, original_length: n, kind: self.kind }
    }

    /// Builds an output block from a computed matrix. For bounded kinds the
    /// padding is zeroed so the invariant survives arithmetic such as
    /// `A^-1 (x - A_k k)`.
    pub(crate) fn from_computed(mut m: Matrix<T>, original_length: usize, kind: SignalKind) -> Result<Self> {
        let (p, t) = m.shape();
        if kind.is_bounded() {
            for k in original_length.min(p * t)..p * t {
                m[(k / t, k % t)] = T::zero();
            }
        }
        Self::build(m, original_length, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_segments_and_bad_lengths() {
        assert!(SignalBlock::<f64>::zeros(2, 2, SignalKind::Plaintext).is_err());
        assert!(SignalBlock::<f64>::zeros(0, 5, SignalKind::Plaintext).is_err());
        let m = Matrix::<f64>::zeros(2, 3);
        assert!(SignalBlock::new(m.clone(), 0, SignalKind::Plaintext).is_err());
        assert!(SignalBlock::new(m.clone(), 7, SignalKind::Plaintext).is_err());
        assert!(SignalBlock::new(m, 6, SignalKind::Plaintext).is_ok());
    }

    #[test]
    fn bounded_kinds_are_range_checked() {
        let rows = vec![vec![0.0, 1.5, 0.0]];
        assert!(SignalBlock::from_rows(&rows, SignalKind::Plaintext).is_err());
        assert!(SignalBlock::from_rows(&rows, SignalKind::Keystream).is_err());
        assert!(SignalBlock::from_rows(&rows, SignalKind::Ciphertext).is_ok());
        assert!(SignalBlock::from_rows(&rows, SignalKind::Differential).is_ok());
    }

    #[test]
    fn padding_must_be_zero() {
        let m = Matrix::from_rows(&[vec![0.1, 0.2, 0.3], vec![0.4, 0.0, 0.5]]).unwrap();
        assert!(SignalBlock::new(m.clone(), 4, SignalKind::Plaintext).is_err());
        assert!(SignalBlock::new(m.clone(), 4, SignalKind::Ciphertext).is_ok());
        let b = SignalBlock::new(m, 6, SignalKind::Plaintext).unwrap();
        assert_eq!(b.valid_len(1), 3);
    }

    #[test]
    fn valid_lengths_follow_original_length() {
        // 10 samples in 4 segments of 3: the last segment holds one sample.
        let mut m = Matrix::<f64>::zeros(4, 3);
        for k in 0..10 {
            m[(k / 3, k % 3)] = 0.5;
        }
        let b = SignalBlock::new(m, 10, SignalKind::Plaintext).unwrap();
        assert_eq!((0..4).map(|i| b.valid_len(i)).collect::<Vec<_>>(), vec![3, 3, 3, 1]);
    }
}
