//! Chosen-plaintext and chosen-ciphertext attacks: query a zero block and
//! `P` unit impulses, then run the known-plaintext attack on the replies.

use super::known_plaintext::known_plaintext_attack;
use super::AttackResult;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind};

/// Height of each impulse query.
pub const IMPULSE_AMPLITUDE: f64 = 1.0;

/// The zero block followed by one impulse at `(i, 0)` per segment.
fn queries<T: Scalar>(p: usize, t: usize, kind: SignalKind) -> Result<Vec<SignalBlock<T>>> {
    if p == 0 || t == 0 {
        return Err(Error::InvalidParams("P and T must be positive".into()));
    }
    (0..=p)
        .map(|n| {
            let mut m = Matrix::zeros(p, t);
            if n > 0 {
                m[(n - 1, 0)] = T::of(IMPULSE_AMPLITUDE);
            }
            SignalBlock::new(m, p * t, kind)
        })
        .collect()
}

/// Recovers `A_s` and the mask for the first `t` instants from `P + 1`
/// encryption queries. The reply to the zero query is the mask itself.
pub fn chosen_plaintext_attack<T: Scalar>(
    mut oracle: impl FnMut(&SignalBlock<T>) -> Result<SignalBlock<T>>,
    p: usize,
    t: usize,
) -> Result<AttackResult<T>> {
    let pairs = queries(p, t, SignalKind::Plaintext)?
        .into_iter()
        .map(|s| {
            let x = oracle(&s)?;
            Ok((s, x))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = known_plaintext_attack(&pairs)?;
    result.oracle_queries = pairs.len();
    Ok(result)
}

/// Same, with a decryption oracle. Also reports `A_s^-1` as the estimated
/// decryption rows.
pub fn chosen_ciphertext_attack<T: Scalar>(
    mut oracle: impl FnMut(&SignalBlock<T>) -> Result<SignalBlock<T>>,
    p: usize,
    t: usize,
) -> Result<AttackResult<T>> {
    let pairs = queries(p, t, SignalKind::Ciphertext)?
        .into_iter()
        .map(|x| {
            let s = oracle(&x)?;
            Ok((s, x))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut result = known_plaintext_attack(&pairs)?;
    result.oracle_queries = pairs.len();
    result.estimated_inverse_rows = match &result.recovered_as {
        Some(a) => Some(a.inverse()?),
        None => None,
    };
    Ok(result)
}
