//! Ciphertext-only exhaustive guessing of the mixing matrix with the seed
//! known, ranked blind by MANE.
//!
//! Each round draws a random guess, decrypts, and scores every segment.
//! The output keeps, for each segment, the reconstruction from the round
//! with the lowest MANE on that segment, and row `i` of that round's
//! decryption matrix as the estimate of row `i` of the true one.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_well_conditioned, tags, trial_rng, AttackResult, Candidate, Ranking};
use crate::cipher::{decrypt, CipherParams, MixingKey, Mode};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{assess, mane_in, Domain};
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind};

/// Candidates kept besides the per-segment winners.
pub const DEFAULT_RETAINED: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveConfig {
    pub rounds: usize,
    pub master_seed: u64,
    pub domain: Domain,
    pub retained: usize,
}

impl ExhaustiveConfig {
    pub fn new(rounds: usize, master_seed: u64, domain: Domain) -> Self {
        ExhaustiveConfig { rounds, master_seed, domain, retained: DEFAULT_RETAINED }
    }
}

/// The guessed key of round `trial`. Structured mode guesses `B` (with the
/// known `beta`), general mode the full P×(P+Q) matrix. Entries are uniform
/// on `[-1, 1)` and redrawn until the guess is well conditioned.
pub fn guess_key<T: Scalar>(params: &CipherParams, master_seed: u64, trial: u64) -> Result<MixingKey<T>> {
    let mut rng = trial_rng(master_seed, tags::EXHAUSTIVE, trial);
    match params.mode {
        Mode::Structured => MixingKey::structured(draw_well_conditioned(&mut rng, params.p, params.p), T::of(params.beta)),
        Mode::General => {
            let a = draw_well_conditioned(&mut rng, params.p, params.p + params.q);
            MixingKey::general(a.columns(0, params.p), a.columns(params.p, params.p + params.q))
        }
    }
}

fn guess_matrix<T: Scalar>(key: &MixingKey<T>) -> Matrix<T> {
    match key.structured_form() {
        Some(s) => s.b.clone(),
        None => key.mixing(),
    }
}

fn inverse_rows<T: Scalar>(key: &MixingKey<T>) -> Result<Matrix<T>> {
    match key.structured_form() {
        Some(s) => Ok(s.b.inverse()?),
        None => key.ahat(),
    }
}

fn round_scores<T: Scalar>(cipher: &SignalBlock<T>, ks: &SignalBlock<T>, params: &CipherParams, cfg: &ExhaustiveConfig, trial: u64) -> Result<Vec<f64>> {
    let key = guess_key(params, cfg.master_seed, trial)?;
    let recovered = decrypt(cipher, &key, ks)?;
    Ok(mane_in(cfg.domain, &recovered).per_segment_mane)
}

pub fn exhaustive_guess_attack<T: Scalar>(
    cipher: &SignalBlock<T>,
    ks: &SignalBlock<T>,
    params: &CipherParams,
    cfg: &ExhaustiveConfig,
) -> Result<AttackResult<T>> {
    params.validate()?;
    if cfg.rounds == 0 {
        return Err(Error::InvalidParams("exhaustive search needs at least one round".into()));
    }
    if cipher.segment_count() != params.p || ks.segment_count() != params.q {
        return Err(Error::Dimension("ciphertext or keystream does not match P and Q".into()));
    }
    let p = params.p;
    let scores = (0..cfg.rounds as u64)
        .into_par_iter()
        .map(|trial| round_scores(cipher, ks, params, cfg, trial))
        .collect::<Result<Vec<_>>>()?;

    // Per-segment winners; ties go to the earliest round.
    let winners: Vec<usize> = (0..p)
        .map(|i| {
            (0..scores.len())
                .min_by(|&a, &b| scores[a][i].total_cmp(&scores[b][i]).then(a.cmp(&b)))
                .expect("at least one round")
        })
        .collect();
    let mean = |trial: usize| scores[trial].iter().sum::<f64>() / p as f64;
    let mut by_mean: Vec<usize> = (0..scores.len()).collect();
    by_mean.sort_by(|&a, &b| mean(a).total_cmp(&mean(b)).then(a.cmp(&b)));
    let kept: BTreeSet<usize> = by_mean.iter().take(cfg.retained).copied().chain(winners.iter().copied()).collect();

    let mut candidates = kept
        .into_iter()
        .map(|trial| {
            let key = guess_key::<T>(params, cfg.master_seed, trial as u64)?;
            let reconstruction = decrypt(cipher, &key, ks)?;
            let quality = assess(cfg.domain, &reconstruction, None)?;
            let won_segments = (0..p).filter(|&i| winners[i] == trial).collect();
            Ok(Candidate {
                trial_index: trial as u64,
                guess: guess_matrix(&key),
                reconstruction,
                score: quality.mean_mane(),
                quality,
                won_segments,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.trial_index.cmp(&b.trial_index)));

    let find = |trial: usize| candidates.iter().find(|c| c.trial_index == trial as u64).expect("winner retained");
    let t = cipher.segment_len();
    let mut assembled = Matrix::zeros(p, t);
    let mut rows: Option<Matrix<T>> = None;
    for (i, &trial) in winners.iter().enumerate() {
        assembled.row_mut(i).copy_from_slice(find(trial).reconstruction.segment(i));
        let key = guess_key::<T>(params, cfg.master_seed, trial as u64)?;
        let inv = inverse_rows(&key)?;
        let est = rows.get_or_insert_with(|| Matrix::zeros(p, inv.cols()));
        est.row_mut(i).copy_from_slice(inv.row(i));
    }
    let assembled = SignalBlock::from_computed(assembled, cipher.original_length(), SignalKind::Plaintext)?;
    let assembled_quality = assess(cfg.domain, &assembled, None)?;

    let mut result = AttackResult::empty(Ranking::MeanMane);
    result.assembled = Some(assembled);
    result.assembled_quality = Some(assembled_quality);
    result.estimated_inverse_rows = rows;
    result.candidates = candidates;
    Ok(result)
}
