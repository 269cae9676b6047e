//! JSON key files.
//!
//! Every matrix entry is stored twice: as a decimal for people and as the
//! hex of its IEEE-754 bits. Readers use the bits, so a key survives any
//! number of save/load cycles unchanged.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cipher::{CipherParams, MixingKey, Mode, SeedKey};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub value: f64,
    pub bits: String,
}

impl Entry {
    fn new(v: f64) -> Self {
        Entry { value: v, bits: format!("{:016x}", v.to_bits()) }
    }

    fn get(&self) -> Result<f64> {
        u64::from_str_radix(&self.bits, 16)
            .map(f64::from_bits)
            .map_err(|_| Error::Format(format!("bad entry bits {:?}", self.bits)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFile {
    pub p: usize,
    pub q: usize,
    pub mode: Mode,
    pub beta: f64,
    /// Decimal, so 64-bit seeds survive JSON readers that use doubles.
    pub seed: String,
    pub seed_bits: u32,
    /// `B` in structured mode, `A_s` otherwise.
    pub a_s: Vec<Vec<Entry>>,
    /// Absent in structured mode, where `A_k = beta B`.
    pub a_k: Option<Vec<Vec<Entry>>>,
}

fn encode_matrix(m: &Matrix<f64>) -> Vec<Vec<Entry>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(Entry::new).collect()).collect()
}

fn decode_matrix(rows: &[Vec<Entry>]) -> Result<Matrix<f64>> {
    let rows = rows.iter().map(|r| r.iter().map(Entry::get).collect()).collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(Matrix::from_rows(&rows)?)
}

impl KeyFile {
    pub fn new(key: &MixingKey<f64>, seed: SeedKey) -> Self {
        let (mode, beta, a_s, a_k) = match key.structured_form() {
            Some(s) => (Mode::Structured, s.beta, encode_matrix(&s.b), None),
            None => (Mode::General, 1.0, encode_matrix(key.a_s()), Some(encode_matrix(key.a_k()))),
        };
        KeyFile { p: key.p(), q: key.q(), mode, beta, seed: seed.value().to_string(), seed_bits: seed.bits(), a_s, a_k }
    }

    pub fn params(&self) -> CipherParams {
        match self.mode {
            Mode::Structured => CipherParams::structured(self.p, self.beta),
            Mode::General => CipherParams::general(self.p, self.q),
        }
    }

    pub fn seed(&self) -> Result<SeedKey> {
        let value = self.seed.parse().map_err(|_| Error::Format(format!("bad seed {:?}", self.seed)))?;
        SeedKey::with_bits(value, self.seed_bits)
    }

    pub fn key(&self) -> Result<MixingKey<f64>> {
        let a_s = decode_matrix(&self.a_s)?;
        let key = match (self.mode, &self.a_k) {
            (Mode::Structured, None) => MixingKey::structured(a_s, self.beta)?,
            (Mode::General, Some(a_k)) => MixingKey::general(a_s, decode_matrix(a_k)?)?,
            _ => return Err(Error::Format("key file mode does not match its matrices".into())),
        };
        if key.p() != self.p || key.q() != self.q {
            return Err(Error::Format("key file P/Q do not match its matrices".into()));
        }
        Ok(key)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_json()?)?)
    }
}
