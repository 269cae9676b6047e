//! Blind-source-separation mixing cipher and its cryptanalysis.
//!
//! Plaintext segments `s(t)` and keystream rows `k(t)` are mixed by a
//! secret matrix: `x(t) = A_s s(t) + A_k k(t)`. Everything numeric is
//! generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`
//! or `f32` for everyday use.

pub mod attack;
pub mod cipher;
pub mod container;
pub mod error;
pub mod keyfile;
pub mod linalg;
pub mod media;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod signal;

pub use cipher::{
    decrypt, decrypt_general, encrypt, encrypt_general, equivalent_stream_form, generate_key, generate_keystream,
    CipherParams, Mode, SeedKey,
};
pub use error::{Error, Result};
pub use media::{MediaAsset, MediaKind};
pub use metrics::{Domain, QualityReport};
pub use rng::CounterRng;
pub use scalar::Scalar;
pub use signal::SignalKind;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type SignalBlock64 = signal::SignalBlock<f64>;
pub type SignalBlock32 = signal::SignalBlock<f32>;
pub type MixingKey64 = cipher::MixingKey<f64>;
pub type MixingKey32 = cipher::MixingKey<f32>;
pub type AttackResult64 = attack::AttackResult<f64>;
pub type AttackResult32 = attack::AttackResult<f32>;
