//! Ciphertext-only differential attack.
//!
//! Two ciphertexts under the same key and keystream differ by
//! `dx(t) = A_s ds(t)`; the keystream term cancels. A guessed `A_s` then
//! yields a candidate plaintext differential. Differentials of natural
//! signals look natural themselves, so no candidate is preferred
//! automatically and every one is returned in trial order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_well_conditioned, tags, trial_rng, AttackResult, Candidate, Ranking};
use crate::cipher::MAX_CONDITION;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{assess, Domain};
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Guesses<T = f64> {
    /// This many random P×P guesses, uniform on `[-1, 1)`.
    Random(usize),
    Explicit(Vec<Matrix<T>>),
}

/// `guess^-1 dx` for one guessed `A_s`.
pub fn differential_guess<T: Scalar>(diff: &SignalBlock<T>, guess: &Matrix<T>) -> Result<SignalBlock<T>> {
    let p = diff.segment_count();
    if guess.shape() != (p, p) {
        return Err(Error::Dimension(format!("guess is {:?}, expected {p}x{p}", guess.shape())));
    }
    let cond = guess.condition_number().as_f64();
    if !(cond <= MAX_CONDITION) {
        return Err(if cond.is_finite() { Error::IllConditioned(cond) } else { Error::Singular });
    }
    let ds = guess.inverse()?.matmul(diff.matrix())?;
    SignalBlock::from_computed(ds, diff.original_length(), SignalKind::Differential)
}

pub fn differential_attack<T: Scalar>(
    cipher1: &SignalBlock<T>,
    cipher2: &SignalBlock<T>,
    guesses: &Guesses<T>,
    master_seed: u64,
    domain: Domain,
) -> Result<AttackResult<T>> {
    if !cipher1.same_shape(cipher2) {
        return Err(Error::Dimension("ciphertexts differ in shape".into()));
    }
    let diff = cipher1.differential(cipher2)?;
    let p = diff.segment_count();
    let matrices: Vec<Matrix<T>> = match guesses {
        Guesses::Random(n) => (0..*n as u64)
            .map(|trial| draw_well_conditioned(&mut trial_rng(master_seed, tags::DIFFERENTIAL, trial), p, p))
            .collect(),
        Guesses::Explicit(list) => list.clone(),
    };
    let candidates = matrices
        .into_par_iter()
        .enumerate()
        .map(|(trial, guess)| {
            let reconstruction = differential_guess(&diff, &guess)?;
            let quality = assess(domain, &reconstruction, None)?;
            Ok(Candidate {
                trial_index: trial as u64,
                guess,
                reconstruction,
                score: trial as f64,
                quality,
                won_segments: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = AttackResult::empty(Ranking::TrialIndex);
    result.candidates = candidates;
    Ok(result)
}
