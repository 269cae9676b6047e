use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bss_core::container::CipherFile;
use bss_core::keyfile::KeyFile;
use bss_core::media::{from_signal, load_asset, store_asset, to_signal};
use bss_core::signal::SignalBlock;
use bss_core::{decrypt as decrypt_block, encrypt as encrypt_block, generate_key, generate_keystream, CipherParams, MediaAsset, MediaKind, MixingKey64, SeedKey};

use crate::ModeArg;

#[derive(clap::Args)]
pub struct KeygenArgs {
    /// Number of plaintext segments.
    #[arg(long, short = 'p')]
    pub p: usize,
    /// Number of keystream rows (general mode; structured mode uses P).
    #[arg(long, short = 'q')]
    pub q: Option<usize>,
    #[arg(long, value_enum, default_value = "structured")]
    pub mode: ModeArg,
    /// Keystream gain in structured mode.
    #[arg(long, default_value_t = 10.0)]
    pub beta: f64,
    /// Seed of the mixing-matrix draw.
    #[arg(long)]
    pub key_seed: u64,
    /// Keystream seed I0.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub seed_bits: u32,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct EncryptArgs {
    #[arg(long, short = 'k')]
    pub key: PathBuf,
    /// PGM or WAV file.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct DecryptArgs {
    #[arg(long, short = 'k')]
    pub key: PathBuf,
    /// Ciphertext container.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Use this keystream seed instead of the one in the key file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stretch each image segment to the full 0..255 range.
    #[arg(long)]
    pub calibrate: bool,
}

pub fn params_from(p: usize, q: Option<usize>, mode: ModeArg, beta: f64) -> CipherParams {
    match mode {
        ModeArg::Structured => CipherParams::structured(p, beta),
        ModeArg::General => CipherParams::general(p, q.unwrap_or(p)),
    }
}

pub fn keygen(a: &KeygenArgs) -> Result<()> {
    if a.mode == ModeArg::Structured && a.q.is_some_and(|q| q != a.p) {
        bail!("structured keys have Q = P");
    }
    let params = params_from(a.p, a.q, a.mode, a.beta);
    let key: MixingKey64 = generate_key(&params, a.key_seed)?;
    let seed = SeedKey::with_bits(a.seed, a.seed_bits)?;
    KeyFile::new(&key, seed).store(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn load_key(path: &PathBuf) -> Result<(KeyFile, MixingKey64)> {
    let file = KeyFile::load(path).with_context(|| format!("reading key {}", path.display()))?;
    let key = file.key()?;
    Ok((file, key))
}

pub fn encrypt(a: &EncryptArgs) -> Result<()> {
    let (file, key) = load_key(&a.key)?;
    let asset = load_asset(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let plain: SignalBlock<f64> = to_signal(&asset, key.p())?;
    let ks = generate_keystream(file.seed()?, key.q(), plain.segment_len())?;
    let block = encrypt_block(&plain, &key, &ks)?;
    CipherFile { q: key.q(), media: Some(asset.kind()), block }.store(&a.out)?;
    Ok(())
}

/// An all-zero asset of the right kind and length, used as the output
/// template when decrypting.
fn template(kind: MediaKind, len: usize) -> Result<MediaAsset> {
    Ok(match kind {
        MediaKind::Image8 { width, height } => {
            if width as usize * height as usize != len {
                bail!("container holds {len} samples for a {width}x{height} image");
            }
            MediaAsset::image8(width, height, vec![0; len])?
        }
        MediaKind::Pcm16 { sample_rate } => MediaAsset::pcm16(sample_rate, vec![0; len])?,
    })
}

pub fn decrypt(a: &DecryptArgs) -> Result<()> {
    let (file, key) = load_key(&a.key)?;
    let cipher = CipherFile::load(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    if cipher.block.segment_count() != key.p() || cipher.q != key.q() {
        bail!(
            "ciphertext has P={} Q={}, key has P={} Q={}",
            cipher.block.segment_count(),
            cipher.q,
            key.p(),
            key.q()
        );
    }
    let seed = match a.seed {
        Some(s) => SeedKey::with_bits(s, file.seed_bits)?,
        None => file.seed()?,
    };
    let ks = generate_keystream(seed, key.q(), cipher.block.segment_len())?;
    let plain = decrypt_block(&cipher.block, &key, &ks)?;
    let kind = cipher.media.context("container carries no media metadata")?;
    let asset = from_signal(&plain, &template(kind, plain.original_length())?, a.calibrate)?;
    store_asset(&asset, &a.out)?;
    Ok(())
}
