//! Binary ciphertext container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        b"BSSC"
//! version      u16 (1)
//! P            u32
//! Q            u32
//! T            u64
//! original_len u64
//! media tag    u8   0 none, 1 image (u32 width, u32 height), 2 pcm (u32 rate)
//! samples      P*T f64, row-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::media::MediaKind;
use crate::signal::{SignalBlock, SignalKind};

pub const MAGIC: &[u8; 4] = b"BSSC";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CipherFile {
    /// Keystream rows the ciphertext was produced with.
    pub q: usize,
    /// Format of the plaintext, needed to write the decryption back out.
    pub media: Option<MediaKind>,
    pub block: SignalBlock<f64>,
}

impl CipherFile {
    pub fn encode(&self) -> Vec<u8> {
        let m = self.block.matrix();
        let mut out = Vec::with_capacity(40 + 8 * m.as_slice().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(self.q as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
        out.extend_from_slice(&(self.block.original_length() as u64).to_le_bytes());
        match self.media {
            None => out.push(0),
            Some(MediaKind::Image8 { width, height }) => {
                out.push(1);
                out.extend_from_slice(&width.to_le_bytes());
                out.extend_from_slice(&height.to_le_bytes());
            }
            Some(MediaKind::Pcm16 { sample_rate }) => {
                out.push(2);
                out.extend_from_slice(&sample_rate.to_le_bytes());
            }
        }
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a ciphertext container".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Format(format!("container version {version}")));
        }
        let p = r.u32()? as usize;
        let q = r.u32()? as usize;
        let t = r.u64()? as usize;
        let original_length = r.u64()? as usize;
        let media = match r.take(1)?[0] {
            0 => None,
            1 => Some(MediaKind::Image8 { width: r.u32()?, height: r.u32()? }),
            2 => Some(MediaKind::Pcm16 { sample_rate: r.u32()? }),
            tag => return Err(Error::Format(format!("unknown media tag {tag}"))),
        };
        let count = p.checked_mul(t).ok_or_else(|| Error::Format("sample count overflows".into()))?;
        if r.remaining() != count.checked_mul(8).ok_or_else(|| Error::Format("sample count overflows".into()))? {
            return Err(Error::Format(format!("expected {count} samples, found {} bytes", r.remaining())));
        }
        let data = (0..count).map(|_| r.array().map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
        let block = SignalBlock::new(Matrix::from_vec(p, t, data)?, original_length, SignalKind::Ciphertext)?;
        Ok(CipherFile { q, media, block })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.encode())?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| Error::Format("container is truncated".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}
