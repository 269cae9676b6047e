//! Key sensitivity scan: how badly does decryption degrade when the mixing
//! matrix is off by `epsilon` in every entry?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tags, trial_rng};
use crate::cipher::{decrypt_general, encrypt, generate_key, generate_keystream, CipherParams, MixingKey, SeedKey};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{mae_in, Domain};
use crate::scalar::Scalar;
use crate::signal::SignalBlock;

pub const DEFAULT_EPSILONS: [f64; 10] = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.3, 0.5];

/// Redraws of the sign matrix allowed when `A_s + eps R_s` is unusable.
const PERTURBATION_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityConfig {
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub epsilon: f64,
    pub mean_mae: f64,
    pub std_mae: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub points: Vec<SensitivityPoint>,
}

impl SensitivityCurve {
    pub const CSV_HEADER: &'static str = "epsilon,mean_mae,std_mae,trials";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.epsilon, p.mean_mae, p.std_mae, p.trials));
        }
        out
    }
}

/// One trial: fresh key and seed, encrypt, decrypt under `A + eps R` with
/// `R` a random ±1 matrix, score the result.
fn run_trial<T: Scalar>(plain: &SignalBlock<T>, params: &CipherParams, eps: f64, domain: Domain, master_seed: u64, trial: u64) -> Result<f64> {
    let mut rng = trial_rng(master_seed, tags::SENSITIVITY, trial);
    let key: MixingKey<T> = generate_key(params, rng.next_u64())?;
    let ks = generate_keystream(SeedKey::new(rng.next_u64()), params.q, plain.segment_len())?;
    let cipher = encrypt(plain, &key, &ks)?;
    let mixing = key.mixing();
    for _ in 0..PERTURBATION_REDRAWS {
        let signs: Matrix<T> = Matrix::from_fn(mixing.rows(), mixing.cols(), |_, _| T::of(rng.next_sign()));
        let perturbed = MixingKey::from_mixing(&mixing.add(&signs.scale(T::of(eps)))?)?;
        match decrypt_general(&cipher, &perturbed, &ks) {
            Ok(recovered) => {
                let report = mae_in(domain, &recovered, plain)?;
                return Ok(report.aggregate_mae.expect("mae_in always aggregates"));
            }
            Err(Error::Singular | Error::IllConditioned(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::KeyGeneration(PERTURBATION_REDRAWS))
}

/// Mean and standard deviation of the recovery MAE for each `epsilon`.
///
/// Every trial uses a fresh key, seed and sign matrix drawn from
/// `(master_seed, point_index * trials + trial)`.
pub fn sensitivity_scan<T: Scalar>(plain: &SignalBlock<T>, params: &CipherParams, config: &SensitivityConfig) -> Result<SensitivityCurve> {
    params.validate()?;
    if config.trials == 0 {
        return Err(Error::InvalidParams("sensitivity scan needs at least one trial".into()));
    }
    if config.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::InvalidParams("every epsilon must lie in (0, 1)".into()));
    }
    if config.epsilons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("epsilons must be strictly increasing".into()));
    }
    if plain.segment_count() != params.p {
        return Err(Error::Dimension(format!("plaintext has {} segments, P={}", plain.segment_count(), params.p)));
    }
    let n = config.trials;
    let points = config
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let maes = (0..n)
                .into_par_iter()
                .map(|j| run_trial(plain, params, eps, config.domain, config.master_seed, (k * n + j) as u64))
                .collect::<Result<Vec<f64>>>()?;
            let mean = maes.iter().sum::<f64>() / n as f64;
            let var = if n > 1 { maes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
            Ok(SensitivityPoint { epsilon: eps, mean_mae: mean, std_mae: var.sqrt(), trials: n })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityCurve { points })
}
