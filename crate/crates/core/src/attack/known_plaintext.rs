//! Known-plaintext key recovery.
//!
//! Plaintext differentials cancel the keystream: `dx(t) = A_s ds(t)` for
//! every `t`. Collecting `P` linearly independent columns `ds(t)` gives
//! `A_s = dX dS^-1`, after which the mask `A_k k(t) = x(t) - A_s s(t)` is
//! read off any known pair.

use serde::{Deserialize, Serialize};

use super::{AttackResult, Ranking};
use crate::cipher::MAX_CONDITION;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind};

/// `A_s` plus the mask `A_k k(t)` for `t < mask.cols()`. Equivalent to the
/// secret key on every ciphertext no longer than the mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredKey<T = f64> {
    pub a_s: Matrix<T>,
    pub mask: Matrix<T>,
}

impl<T: Scalar> RecoveredKey<T> {
    pub fn new(a_s: Matrix<T>, mask: Matrix<T>) -> Self {
        RecoveredKey { a_s, mask }
    }

    pub fn coverage(&self) -> usize {
        self.mask.cols()
    }

    fn mask_for(&self, p: usize, t: usize) -> Result<Matrix<T>> {
        if p != self.a_s.rows() {
            return Err(Error::Dimension(format!("signal has {p} segments, key has P={}", self.a_s.rows())));
        }
        if t > self.coverage() {
            return Err(Error::BeyondCoverage { requested: t, available: self.coverage() });
        }
        Ok(self.mask.columns(0, t))
    }

    pub fn encrypt(&self, plain: &SignalBlock<T>) -> Result<SignalBlock<T>> {
        let mask = self.mask_for(plain.segment_count(), plain.segment_len())?;
        let x = self.a_s.matmul(plain.matrix())?.add(&mask)?;
        SignalBlock::from_computed(x, plain.original_length(), SignalKind::Ciphertext)
    }

    pub fn decrypt(&self, cipher: &SignalBlock<T>) -> Result<SignalBlock<T>> {
        let mask = self.mask_for(cipher.segment_count(), cipher.segment_len())?;
        let s = self.a_s.inverse()?.matmul(&cipher.matrix().sub(&mask)?)?;
        SignalBlock::from_computed(s, cipher.original_length(), SignalKind::Plaintext)
    }
}

/// Greedy pivoted Gram-Schmidt: repeatedly takes the candidate column with
/// the largest component orthogonal to those already taken.
fn select_columns(pool: &[Vec<f64>], p: usize) -> Option<Vec<usize>> {
    let mut residual: Vec<Vec<f64>> = pool.to_vec();
    let scale = pool.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut chosen = Vec::with_capacity(p);
    for _ in 0..p {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .filter(|(k, _)| !chosen.contains(k))
            .map(|(k, c)| (k, c.iter().map(|v| v * v).sum::<f64>().sqrt()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?;
        if norm <= scale * 1e-10 {
            return None;
        }
        let q: Vec<f64> = residual[best].iter().map(|v| v / norm).collect();
        for c in residual.iter_mut() {
            let dot: f64 = c.iter().zip(&q).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(&q).for_each(|(a, b)| *a -= dot * b);
        }
        chosen.push(best);
    }
    Some(chosen)
}

pub fn known_plaintext_attack<T: Scalar>(pairs: &[(SignalBlock<T>, SignalBlock<T>)]) -> Result<AttackResult<T>> {
    if pairs.len() < 2 {
        return Err(Error::InvalidParams("known-plaintext attack needs at least two pairs".into()));
    }
    let p = pairs[0].0.segment_count();
    for (s, x) in pairs {
        if s.segment_count() != p || x.segment_count() != p || s.segment_len() != x.segment_len() {
            return Err(Error::Dimension("plaintext/ciphertext pairs disagree in shape".into()));
        }
    }

    // Candidate columns (ds(t), dx(t)) from every pairwise differential.
    let mut ds_pool = Vec::new();
    let mut dx_pool = Vec::new();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            let (sa, xa) = &pairs[a];
            let (sb, xb) = &pairs[b];
            for t in 0..sa.segment_len().min(sb.segment_len()) {
                ds_pool.push((0..p).map(|i| (sa.sample(i, t) - sb.sample(i, t)).as_f64()).collect::<Vec<_>>());
                dx_pool.push((0..p).map(|i| xa.sample(i, t) - xb.sample(i, t)).collect::<Vec<T>>());
            }
        }
    }
    let chosen = select_columns(&ds_pool, p)
        .ok_or_else(|| Error::RankDeficient(format!("plaintext differentials span fewer than {p} dimensions")))?;
    let ds = Matrix::from_fn(p, p, |i, j| T::of(ds_pool[chosen[j]][i]));
    let dx = Matrix::from_fn(p, p, |i, j| dx_pool[chosen[j]][i]);
    let cond = ds.condition_number().as_f64();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::RankDeficient(format!("best differential system has condition number {cond:.3e}")));
    }
    let a_s = dx.matmul(&ds.inverse()?)?;

    let (s, x) = pairs.iter().max_by_key(|(s, _)| s.segment_len()).expect("at least two pairs");
    let mask = x.matrix().sub(&a_s.matmul(s.matrix())?)?;

    let mut result = AttackResult::empty(Ranking::TrialIndex);
    result.recovered_as = Some(a_s);
    result.recovered_mask = Some(mask);
    Ok(result)
}

/// `k(t) = (B^-1 x(t) - s(t)) / beta` for a structured key.
pub fn recover_keystream_structured<T: Scalar>(plain: &SignalBlock<T>, cipher: &SignalBlock<T>, b: &Matrix<T>, beta: T) -> Result<SignalBlock<T>> {
    if !plain.same_shape(cipher) || b.shape() != (plain.segment_count(), plain.segment_count()) {
        return Err(Error::Dimension("pair and B disagree in shape".into()));
    }
    if beta == T::zero() {
        return Err(Error::InvalidParams("beta must be non-zero".into()));
    }
    let k = b.inverse()?.matmul(cipher.matrix())?.sub(plain.matrix())?.scale(T::one() / beta);
    let len = k.rows() * k.cols();
    SignalBlock::from_computed(k, len, SignalKind::Keystream)
}
