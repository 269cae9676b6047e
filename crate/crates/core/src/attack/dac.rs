use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::SignalBlock;

/// Recovers segment `i` from one row of `A_hat = [A_s^-1, -A_s^-1 A_k]`:
/// `s_i(t) = ahat_row . [x(t); k(t)]`.
///
/// The other rows of `A_hat` play no part, which is what lets each row be
/// searched on its own.
pub fn dac_row_decrypt<T: Scalar>(cipher: &SignalBlock<T>, ahat_row: &[T], ks: &SignalBlock<T>, i: usize) -> Result<Vec<T>> {
    let p = cipher.segment_count();
    let q = ks.segment_count();
    if i >= p {
        return Err(Error::Dimension(format!("segment index {i} with P={p}")));
    }
    if ahat_row.len() != p + q {
        return Err(Error::Dimension(format!("row of length {} for P+Q={}", ahat_row.len(), p + q)));
    }
    if ks.segment_len() != cipher.segment_len() {
        return Err(Error::Dimension("keystream and ciphertext lengths differ".into()));
    }
    let len = cipher.segment_len();
    let mut out = vec![T::zero(); len];
    for (j, &w) in ahat_row.iter().enumerate() {
        let src = if j < p { cipher.segment(j) } else { ks.segment(j - p) };
        for (o, &v) in out.iter_mut().zip(src) {
            *o += w * v;
        }
    }
    // Padding of a plaintext segment is zero by definition.
    for o in out.iter_mut().skip(cipher.valid_len(i)) {
        *o = T::zero();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{encrypt, generate_key, generate_keystream, CipherParams, MixingKey, SeedKey};
    use crate::media::{to_signal, MediaAsset};

    fn fixture() -> (SignalBlock, SignalBlock, SignalBlock, MixingKey) {
        let asset = MediaAsset::pcm16(8000, (0..60).map(|v| (v * 500 - 15000) as i16).collect()).unwrap();
        let s = to_signal(&asset, 3).unwrap();
        let key = generate_key(&CipherParams::general(3, 2), 5).unwrap();
        let k = generate_keystream(SeedKey::new(6), 2, s.segment_len()).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        (s, x, k, key)
    }

    #[test]
    fn true_row_recovers_segment() {
        let (s, x, k, key) = fixture();
        let ahat = key.ahat().unwrap();
        for i in 0..3 {
            let seg = dac_row_decrypt(&x, ahat.row(i), &k, i).unwrap();
            for (a, b) in seg.iter().zip(s.segment(i)) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn zero_row_gives_zero() {
        let (_, x, k, _) = fixture();
        assert!(dac_row_decrypt(&x, &[0.0; 5], &k, 1).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shape_errors() {
        let (_, x, k, _) = fixture();
        assert!(dac_row_decrypt(&x, &[0.0; 4], &k, 0).is_err());
        assert!(dac_row_decrypt(&x, &[0.0; 5], &k, 3).is_err());
    }
}
