//! Attacks on the mixing cipher.
//!
//! Every randomized attack draws trial `n` from
//! `CounterRng::new(master_seed).split(<attack tag>).split(n)`, so a trial
//! can be replayed on its own and trials may run in any order.

mod chosen;
mod dac;
mod differential;
mod exhaustive;
mod keyspace;
mod known_plaintext;
mod probability;
pub mod report;
mod sensitivity;

use serde::{Deserialize, Serialize};

pub use chosen::{chosen_ciphertext_attack, chosen_plaintext_attack, IMPULSE_AMPLITUDE};
pub use dac::dac_row_decrypt;
pub use differential::{differential_attack, differential_guess, Guesses};
pub use exhaustive::{exhaustive_guess_attack, guess_key, ExhaustiveConfig};
pub use keyspace::{
    approximate_keyspace_size, keyspace_size, required_plaintexts, KeySpaceModel, RequiredPlaintexts,
};
pub use known_plaintext::{known_plaintext_attack, recover_keystream_structured, RecoveredKey};
pub use probability::hit_probability;
pub use sensitivity::{sensitivity_scan, SensitivityConfig, SensitivityCurve, SensitivityPoint, DEFAULT_EPSILONS};

use crate::cipher::MAX_CONDITION;
use crate::linalg::Matrix;
use crate::metrics::QualityReport;
use crate::rng::CounterRng;
use crate::scalar::Scalar;
use crate::signal::SignalBlock;

/// Stream tags separating the randomness of different attacks.
pub(crate) mod tags {
    pub const SENSITIVITY: u64 = 0x5345_4E53;
    pub const EXHAUSTIVE: u64 = 0x4558_4841;
    pub const DIFFERENTIAL: u64 = 0x4449_4646;
}

/// Draws for a single trial.
pub(crate) fn trial_rng(master_seed: u64, tag: u64, trial: u64) -> CounterRng {
    CounterRng::new(master_seed).split(tag).split(trial)
}

/// Uniform `[-1, 1)` matrix whose leading square block is invertible with
/// condition number at most [`MAX_CONDITION`]; redraws from the same stream
/// until one qualifies.
pub(crate) fn draw_well_conditioned<T: Scalar>(rng: &mut CounterRng, rows: usize, cols: usize) -> Matrix<T> {
    loop {
        let m: Matrix<T> = Matrix::from_fn(rows, cols, |_, _| T::of(rng.next_symmetric()));
        let cond = m.columns(0, rows).condition_number().as_f64();
        if cond <= MAX_CONDITION {
            return m;
        }
    }
}

/// How `AttackResult::candidates` is ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    /// Ascending mean per-segment MANE.
    MeanMane,
    /// Ascending trial index; no automatic preference.
    TrialIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T = f64> {
    pub trial_index: u64,
    /// The guessed matrix (full mixing matrix, `B`, or `A_s`).
    pub guess: Matrix<T>,
    pub reconstruction: SignalBlock<T>,
    pub quality: QualityReport,
    /// The value the candidate list is sorted by.
    pub score: f64,
    /// Segments for which this trial was the per-segment winner.
    pub won_segments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult<T = f64> {
    pub recovered_as: Option<Matrix<T>>,
    /// `A_k k(t)` for every recovered instant, P rows.
    pub recovered_mask: Option<Matrix<T>>,
    pub recovered_keystream: Option<SignalBlock<T>>,
    /// Row `i` estimates row `i` of the decryption matrix: `B^-1` in
    /// structured mode, `A_hat = [A_s^-1, -A_s^-1 A_k]` otherwise.
    pub estimated_inverse_rows: Option<Matrix<T>>,
    /// Segment-wise best reconstruction assembled from the candidates.
    pub assembled: Option<SignalBlock<T>>,
    pub assembled_quality: Option<QualityReport>,
    pub ranking: Ranking,
    pub candidates: Vec<Candidate<T>>,
    pub oracle_queries: usize,
}

impl<T: Scalar> AttackResult<T> {
    pub(crate) fn empty(ranking: Ranking) -> Self {
        AttackResult {
            recovered_as: None,
            recovered_mask: None,
            recovered_keystream: None,
            estimated_inverse_rows: None,
            assembled: None,
            assembled_quality: None,
            ranking,
            candidates: Vec::new(),
            oracle_queries: 0,
        }
    }

    /// `(A_s, mask)` when both were recovered.
    pub fn recovered_key(&self) -> Option<RecoveredKey<T>> {
        Some(RecoveredKey::new(self.recovered_as.clone()?, self.recovered_mask.clone()?))
    }
}
