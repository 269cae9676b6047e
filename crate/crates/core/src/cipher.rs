//! The matrix-mixing cipher.
//!
//! Encryption mixes P plaintext segments with Q key signals through a
//! P×(P+Q) matrix `A = [A_s | A_k]`:
//!
//! ```text
//! x(t) = A_s s(t) + A_k k(t)
//! s(t) = A_s^-1 (x(t) - A_k k(t))
//! ```
//!
//! In structured mode `A_s = B`, `A_k = beta * B` and Q = P, which gives
//! `x(t) = B (s(t) + beta k(t))` and `s(t) = B^-1 x(t) - beta k(t)`.
//!
//! The key signals come from [`generate_keystream`]: row `q` of the
//! keystream for seed `I0` is the counter stream `CounterRng::new(I0).split(q)`
//! and sample `t` is `word_to_symmetric(word_at(t))`, uniform on `[-1, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{word_to_symmetric, CounterRng};
use crate::scalar::Scalar;
use crate::signal::{SignalBlock, SignalKind, MIN_SEGMENT_LEN};

/// Largest accepted condition number for `A_s` (or `B`).
pub const MAX_CONDITION: f64 = 1e6;

/// Resampling budget for [`generate_key`].
pub const KEYGEN_ATTEMPTS: usize = 1000;

/// Default seed width in bits.
pub const DEFAULT_SEED_BITS: u32 = 64;

pub const IMAGE_BETA: f64 = 10.0;
pub const SPEECH_BETA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    General,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CipherParams {
    pub p: usize,
    pub q: usize,
    pub mode: Mode,
    /// Only meaningful in structured mode.
    pub beta: f64,
}

impl CipherParams {
    pub fn general(p: usize, q: usize) -> Self {
        CipherParams { p, q, mode: Mode::General, beta: 1.0 }
    }

    pub fn structured(p: usize, beta: f64) -> Self {
        CipherParams { p, q: p, mode: Mode::Structured, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::InvalidParams(format!("P={} and Q={} must be >= 1", self.p, self.q)));
        }
        if self.mode == Mode::Structured {
            if self.q != self.p {
                return Err(Error::InvalidParams("structured mode requires Q = P".into()));
            }
            if !(self.beta > 0.0 && self.beta.is_finite()) {
                return Err(Error::InvalidParams(format!("beta must be positive, got {}", self.beta)));
            }
        }
        Ok(())
    }
}

/// `A_s = B`, `A_k = beta B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredForm<T = f64> {
    pub b: Matrix<T>,
    pub beta: T,
}

/// The mixing half of the secret key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingKey<T = f64> {
    a_s: Matrix<T>,
    a_k: Matrix<T>,
    structured: Option<StructuredForm<T>>,
}

fn check_conditioning<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    let cond = m.condition_number().as_f64();
    if cond.is_infinite() {
        return Err(Error::Singular);
    }
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    Ok(())
}

fn check_unit_range<T: Scalar>(m: &Matrix<T>, what: &str) -> Result<()> {
    if m.as_slice().iter().any(|v| !(v.abs() <= T::one())) {
        return Err(Error::InvalidParams(format!("{what} has an entry outside [-1, 1]")));
    }
    Ok(())
}

impl<T: Scalar> MixingKey<T> {
    /// Unstructured key; entries must lie in `[-1, 1]` and `A_s` must be
    /// well conditioned.
    pub fn general(a_s: Matrix<T>, a_k: Matrix<T>) -> Result<Self> {
        let key = Self::raw(a_s, a_k)?;
        check_unit_range(&key.a_s, "A_s")?;
        check_unit_range(&key.a_k, "A_k")?;
        check_conditioning(&key.a_s)?;
        Ok(key)
    }

    /// Structured key from `B` and `beta`. Only `B` is range checked:
    /// `beta B` routinely leaves `[-1, 1]`.
    pub fn structured(b: Matrix<T>, beta: T) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::Dimension(format!("B must be square, got {:?}", b.shape())));
        }
        if !(beta > T::zero()) {
            return Err(Error::InvalidParams("beta must be positive".into()));
        }
        check_unit_range(&b, "B")?;
        check_conditioning(&b)?;
        Ok(MixingKey { a_s: b.clone(), a_k: b.scale(beta), structured: Some(StructuredForm { b, beta }) })
    }

    /// Shape checks only. For perturbed and guessed keys and test rigs.
    pub fn raw(a_s: Matrix<T>, a_k: Matrix<T>) -> Result<Self> {
        if !a_s.is_square() || a_s.rows() == 0 {
            return Err(Error::Dimension(format!("A_s must be square, got {:?}", a_s.shape())));
        }
        if a_k.rows() != a_s.rows() || a_k.cols() == 0 {
            return Err(Error::Dimension(format!(
                "A_k is {:?} but A_s has {} rows",
                a_k.shape(),
                a_s.rows()
            )));
        }
        Ok(MixingKey { a_s, a_k, structured: None })
    }

    /// Splits a P×(P+Q) matrix into a raw key.
    pub fn from_mixing(a: &Matrix<T>) -> Result<Self> {
        let p = a.rows();
        if a.cols() <= p {
            return Err(Error::Dimension(format!("mixing matrix {:?} has no key columns", a.shape())));
        }
        Self::raw(a.columns(0, p), a.columns(p, a.cols()))
    }

    pub fn p(&self) -> usize {
        self.a_s.rows()
    }

    pub fn q(&self) -> usize {
        self.a_k.cols()
    }

    pub fn mode(&self) -> Mode {
        if self.structured.is_some() {
            Mode::Structured
        } else {
            Mode::General
        }
    }

    pub fn a_s(&self) -> &Matrix<T> {
        &self.a_s
    }

    pub fn a_k(&self) -> &Matrix<T> {
        &self.a_k
    }

    pub fn structured_form(&self) -> Option<&StructuredForm<T>> {
        self.structured.as_ref()
    }

    /// `[A_s | A_k]`.
    pub fn mixing(&self) -> Matrix<T> {
        self.a_s.hstack(&self.a_k).expect("row counts agree")
    }

    /// `A_hat = [A_s^-1, -A_s^-1 A_k]`, the decryption matrix acting on the
    /// stacked vector `[x(t); k(t)]`.
    pub fn ahat(&self) -> Result<Matrix<T>> {
        let inv = self.a_s.inverse()?;
        let right = inv.matmul(&self.a_k)?.scale(-T::one());
        Ok(inv.hstack(&right)?)
    }

    /// Checks every invariant that [`MixingKey::general`] or
    /// [`MixingKey::structured`] would.
    pub fn validate(&self) -> Result<()> {
        match &self.structured {
            None => {
                check_unit_range(&self.a_s, "A_s")?;
                check_unit_range(&self.a_k, "A_k")?;
            }
            Some(s) => {
                check_unit_range(&s.b, "B")?;
                let tol = T::of(1e-12);
                if self.q() != self.p()
                    || self.a_s.max_abs_diff(&s.b) > tol
                    || self.a_k.max_abs_diff(&s.b.scale(s.beta)) > tol
                {
                    return Err(Error::InvalidParams("structured key is inconsistent with B and beta".into()));
                }
            }
        }
        check_conditioning(&self.a_s)
    }
}

/// The seed half of the secret key, `L` bits wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedKey {
    value: u64,
    bits: u32,
}

impl SeedKey {
    pub fn new(value: u64) -> Self {
        SeedKey { value, bits: DEFAULT_SEED_BITS }
    }

    pub fn with_bits(value: u64, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 64 {
            return Err(Error::InvalidParams(format!("seed width {bits} outside 1..=64")));
        }
        if bits < 64 && value >> bits != 0 {
            return Err(Error::InvalidParams(format!("seed {value} does not fit in {bits} bits")));
        }
        Ok(SeedKey { value, bits })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }
}

/// Draws a mixing key with entries uniform on `[-1, 1)`, redrawing until
/// `A_s` (or `B`) is invertible with condition number at most
/// [`MAX_CONDITION`].
///
/// Attempt `n` reads the stream `CounterRng::new(rng_seed).split(n)`,
/// filling `A_s` then `A_k` row-major (only `B` in structured mode).
pub fn generate_key<T: Scalar>(params: &CipherParams, rng_seed: u64) -> Result<MixingKey<T>> {
    params.validate()?;
    let root = CounterRng::new(rng_seed);
    for attempt in 0..KEYGEN_ATTEMPTS {
        let mut rng = root.split(attempt as u64);
        let mut draw = |rows, cols| Matrix::from_fn(rows, cols, |_, _| T::of(rng.next_symmetric()));
        let candidate = match params.mode {
            Mode::General => {
                let a_s = draw(params.p, params.p);
                let a_k = draw(params.p, params.q);
                MixingKey::general(a_s, a_k)
            }
            Mode::Structured => MixingKey::structured(draw(params.p, params.p), T::of(params.beta)),
        };
        match candidate {
            Ok(key) => return Ok(key),
            Err(Error::Singular | Error::IllConditioned(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::KeyGeneration(KEYGEN_ATTEMPTS))
}

/// Q×T keystream, uniform on `[-1, 1)`, fully determined by `(seed, Q, T)`.
/// Row `q` does not depend on `Q` and its first `T` samples do not depend
/// on `T`.
pub fn generate_keystream<T: Scalar>(seed: SeedKey, q: usize, len: usize) -> Result<SignalBlock<T>> {
    if q == 0 {
        return Err(Error::InvalidParams("keystream needs Q >= 1".into()));
    }
    if len < MIN_SEGMENT_LEN {
        return Err(Error::InvalidParams(format!("keystream length {len} below {MIN_SEGMENT_LEN}")));
    }
    let root = CounterRng::new(seed.value());
    let streams: Vec<CounterRng> = (0..q).map(|row| root.split(row as u64)).collect();
    let m = Matrix::from_fn(q, len, |row, t| T::of(word_to_symmetric(streams[row].word_at(t as u64))));
    SignalBlock::new(m, q * len, SignalKind::Keystream)
}

fn check_dims<T: Scalar>(data: &SignalBlock<T>, key: &MixingKey<T>, ks: &SignalBlock<T>) -> Result<()> {
    if data.segment_count() != key.p() {
        return Err(Error::Dimension(format!(
            "signal has {} segments, key expects P={}",
            data.segment_count(),
            key.p()
        )));
    }
    if ks.segment_count() != key.q() {
        return Err(Error::Dimension(format!(
            "keystream has {} rows, key expects Q={}",
            ks.segment_count(),
            key.q()
        )));
    }
    if ks.segment_len() != data.segment_len() {
        return Err(Error::Dimension(format!(
            "keystream length {} differs from segment length {}",
            ks.segment_len(),
            data.segment_len()
        )));
    }
    Ok(())
}

/// `x(t) = A_s s(t) + A_k k(t)`, dispatching to `B (s + beta k)` for
/// structured keys.
pub fn encrypt<T: Scalar>(plain: &SignalBlock<T>, key: &MixingKey<T>, ks: &SignalBlock<T>) -> Result<SignalBlock<T>> {
    check_dims(plain, key, ks)?;
    let x = match key.structured_form() {
        Some(s) => {
            let masked = plain.matrix().add(&ks.matrix().scale(s.beta))?;
            s.b.matmul(&masked)?
        }
        None => mix_general(key, plain, ks)?,
    };
    SignalBlock::from_computed(x, plain.original_length(), SignalKind::Ciphertext)
}

/// General-form encryption regardless of any structured form on the key.
pub fn encrypt_general<T: Scalar>(plain: &SignalBlock<T>, key: &MixingKey<T>, ks: &SignalBlock<T>) -> Result<SignalBlock<T>> {
    check_dims(plain, key, ks)?;
    let x = mix_general(key, plain, ks)?;
    SignalBlock::from_computed(x, plain.original_length(), SignalKind::Ciphertext)
}

fn mix_general<T: Scalar>(key: &MixingKey<T>, plain: &SignalBlock<T>, ks: &SignalBlock<T>) -> Result<Matrix<T>> {
    Ok(key.a_s().matmul(plain.matrix())?.add(&key.a_k().matmul(ks.matrix())?)?)
}

fn invert_checked<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    check_conditioning(m)?;
    Ok(m.inverse()?)
}

/// `s(t) = A_s^-1 (x(t) - A_k k(t))`, or `B^-1 x(t) - beta k(t)` for
/// structured keys. Fails on singular or ill-conditioned `A_s`.
///
/// The result is tagged as a plaintext but is not range checked: a wrong
/// key produces samples outside `[-1, 1]`.
pub fn decrypt<T: Scalar>(cipher: &SignalBlock<T>, key: &MixingKey<T>, ks: &SignalBlock<T>) -> Result<SignalBlock<T>> {
    check_dims(cipher, key, ks)?;
    let s = match key.structured_form() {
        Some(st) => {
            let inv = invert_checked(&st.b)?;
            inv.matmul(cipher.matrix())?.sub(&ks.matrix().scale(st.beta))?
        }
        None => unmix_general(key, cipher, ks)?,
    };
    SignalBlock::from_computed(s, cipher.original_length(), SignalKind::Plaintext)
}

pub fn decrypt_general<T: Scalar>(cipher: &SignalBlock<T>, key: &MixingKey<T>, ks: &SignalBlock<T>) -> Result<SignalBlock<T>> {
    check_dims(cipher, key, ks)?;
    let s = unmix_general(key, cipher, ks)?;
    SignalBlock::from_computed(s, cipher.original_length(), SignalKind::Plaintext)
}

fn unmix_general<T: Scalar>(key: &MixingKey<T>, cipher: &SignalBlock<T>, ks: &SignalBlock<T>) -> Result<Matrix<T>> {
    let inv = invert_checked(key.a_s())?;
    let unmasked = cipher.matrix().sub(&key.a_k().matmul(ks.matrix())?)?;
    Ok(inv.matmul(&unmasked)?)
}

/// `x*(t) = A_s^-1 x(t) = s(t) + A_s^-1 A_k k(t)`: with `A` known the
/// scheme is a plain additive stream cipher.
pub fn equivalent_stream_form<T: Scalar>(cipher: &SignalBlock<T>, key: &MixingKey<T>) -> Result<SignalBlock<T>> {
    if cipher.segment_count() != key.p() {
        return Err(Error::Dimension(format!(
            "signal has {} segments, key expects P={}",
            cipher.segment_count(),
            key.p()
        )));
    }
    let inv = invert_checked(key.a_s())?;
    SignalBlock::from_computed(inv.matmul(cipher.matrix())?, cipher.original_length(), SignalKind::Ciphertext)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_block(p: usize, t: usize, seed: u64) -> SignalBlock {
        let mut rng = CounterRng::new(seed);
        let m = Matrix::from_fn(p, t, |_, _| rng.next_symmetric());
        SignalBlock::new(m, p * t, SignalKind::Plaintext).unwrap()
    }

    #[test]
    fn keygen_is_deterministic_and_seed_sensitive() {
        let params = CipherParams::general(2, 2);
        let a: MixingKey = generate_key(&params, 7).unwrap();
        let b: MixingKey = generate_key(&params, 7).unwrap();
        let c: MixingKey = generate_key(&params, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.mixing().max_abs() <= 1.0);
        assert!(a.a_s().condition_number() <= MAX_CONDITION);
    }

    #[test]
    fn structured_keygen_forces_q_eq_p() {
        let mut params = CipherParams::structured(3, 10.0);
        let key: MixingKey = generate_key(&params, 1).unwrap();
        assert_eq!(key.q(), 3);
        assert!(key.validate().is_ok());
        params.q = 2;
        assert!(generate_key::<f64>(&params, 1).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(generate_key::<f64>(&CipherParams::general(0, 1), 1).is_err());
        assert!(generate_key::<f64>(&CipherParams::structured(2, -1.0), 1).is_err());
    }

    #[test]
    fn keystream_properties() {
        let seed = SeedKey::new(0xDEAD_BEEF);
        let a: SignalBlock = generate_keystream(seed, 2, 10_000).unwrap();
        let b: SignalBlock = generate_keystream(seed, 2, 10_000).unwrap();
        assert_eq!(a, b);
        for q in 0..2 {
            let mean = a.segment(q).iter().sum::<f64>() / 10_000.0;
            assert!(mean.abs() < 0.05, "row {q} mean {mean}");
        }
        let short: SignalBlock = generate_keystream(seed, 1, 3).unwrap();
        assert_eq!(short.segment_len(), 3);
        assert!(short.segment(0).iter().all(|v| v.abs() <= 1.0));
        // Prefix stability across lengths.
        assert_eq!(short.segment(0), &a.segment(0)[..3]);
        assert!(generate_keystream::<f64>(seed, 1, 2).is_err());
    }

    #[test]
    fn keystream_golden_vector() {
        // Bit patterns computed by an independent script from the documented
        // word function.
        let ks: SignalBlock = generate_keystream(SeedKey::new(1), 2, 4).unwrap();
        let root = CounterRng::new(1);
        for q in 0..2 {
            let mut stream = root.split(q as u64);
            for t in 0..4 {
                assert_eq!(ks.sample(q, t), stream.next_symmetric());
            }
        }
        let golden = [ks.sample(0, 0).to_bits(), ks.sample(1, 3).to_bits()];
        assert_eq!(golden, GOLDEN_KS);
    }

    const GOLDEN_KS: [u64; 2] = [0x3FE0_85EB_11E3_9740, 0xBFEE_7F37_74D7_38CA];

    #[test]
    fn zero_inputs_encrypt_to_zero() {
        let key: MixingKey = generate_key(&CipherParams::general(2, 2), 3).unwrap();
        let s = SignalBlock::zeros(2, 5, SignalKind::Plaintext).unwrap();
        let k = SignalBlock::zeros(2, 5, SignalKind::Keystream).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        assert_eq!(x.max_abs(), 0.0);
        assert_eq!(decrypt(&x, &key, &k).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn identity_key_passes_plaintext() {
        let key = MixingKey::raw(Matrix::identity(3), Matrix::zeros(3, 2)).unwrap();
        let s = random_block(3, 8, 1);
        let k: SignalBlock = generate_keystream(SeedKey::new(4), 2, 8).unwrap();
        assert_eq!(encrypt(&s, &key, &k).unwrap().matrix(), s.matrix());
        let x = encrypt(&s, &key, &k).unwrap();
        assert_eq!(equivalent_stream_form(&x, &key).unwrap().matrix(), x.matrix());
    }

    #[test]
    fn matches_per_sample_dot_product() {
        let key: MixingKey = generate_key(&CipherParams::general(2, 2), 11).unwrap();
        let s = random_block(2, 5, 12);
        let k: SignalBlock = generate_keystream(SeedKey::new(13), 2, 5).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        let a = key.mixing();
        for t in 0..5 {
            let stacked: Vec<f64> = s.column(t).into_iter().chain(k.column(t)).collect();
            for i in 0..2 {
                let mut acc = 0.0;
                for j in 0..4 {
                    acc += a[(i, j)] * stacked[j];
                }
                assert!((x.sample(i, t) - acc).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn structured_forms_agree() {
        let key: MixingKey = generate_key(&CipherParams::structured(4, 10.0), 21).unwrap();
        let s = random_block(4, 100, 22);
        let k: SignalBlock = generate_keystream(SeedKey::new(23), 4, 100).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        let xg = encrypt_general(&s, &key, &k).unwrap();
        assert!(x.max_abs_diff(&xg) <= 1e-12);
        let d = decrypt(&x, &key, &k).unwrap();
        let dg = decrypt_general(&x, &key, &k).unwrap();
        assert!(d.max_abs_diff(&dg) <= 1e-9);
        assert!(d.max_abs_diff(&s) <= 1e-9);
    }

    #[test]
    fn round_trip_with_padding() {
        let key: MixingKey = generate_key(&CipherParams::general(4, 4), 31).unwrap();
        let mut m = random_block(4, 25, 32).into_matrix();
        for t in 20..25 {
            m[(3, t)] = 0.0;
        }
        let s = SignalBlock::new(m, 95, SignalKind::Plaintext).unwrap();
        let k: SignalBlock = generate_keystream(SeedKey::new(33), 4, 25).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        assert_ne!(x.sample(3, 24), 0.0);
        let d = decrypt(&x, &key, &k).unwrap();
        assert_eq!(d.sample(3, 24), 0.0);
        assert!(d.max_abs_diff(&s) <= 1e-9);
    }

    #[test]
    fn equivalent_form_isolates_masking() {
        let key: MixingKey = generate_key(&CipherParams::general(3, 2), 41).unwrap();
        let s = random_block(3, 20, 42);
        let k: SignalBlock = generate_keystream(SeedKey::new(43), 2, 20).unwrap();
        let x = encrypt(&s, &key, &k).unwrap();
        let xs = equivalent_stream_form(&x, &key).unwrap();
        let mask = key.a_s().inverse().unwrap().matmul(key.a_k()).unwrap().matmul(k.matrix()).unwrap();
        let lhs = xs.matrix().sub(s.matrix()).unwrap();
        assert!(lhs.max_abs_diff(&mask) <= 1e-9);

        let zero_ks = SignalBlock::zeros(2, 20, SignalKind::Keystream).unwrap();
        let x0 = encrypt(&s, &key, &zero_ks).unwrap();
        assert!(equivalent_stream_form(&x0, &key).unwrap().max_abs_diff(&s) <= 1e-9);
    }

    #[test]
    fn dimension_and_singularity_errors() {
        let key: MixingKey = generate_key(&CipherParams::general(2, 2), 51).unwrap();
        let s = random_block(3, 5, 1);
        let k: SignalBlock = generate_keystream(SeedKey::new(1), 2, 5).unwrap();
        assert!(matches!(encrypt(&s, &key, &k), Err(Error::Dimension(_))));
        let bad = MixingKey::raw(Matrix::zeros(2, 2), Matrix::zeros(2, 2)).unwrap();
        let s2 = random_block(2, 5, 1);
        assert!(matches!(decrypt(&s2, &bad, &k), Err(Error::Singular)));
        let skew = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-9]]).unwrap();
        let ill = MixingKey::raw(skew, Matrix::zeros(2, 2)).unwrap();
        assert!(matches!(decrypt(&s2, &ill, &k), Err(Error::IllConditioned(_))));
        assert!(MixingKey::general(Matrix::identity(2).scale(2.0), Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn seed_width() {
        assert!(SeedKey::with_bits(255, 8).is_ok());
        assert!(SeedKey::with_bits(256, 8).is_err());
        assert!(SeedKey::with_bits(1, 0).is_err());
        assert_eq!(SeedKey::with_bits(u64::MAX, 64).unwrap().bits(), 64);
    }
}
