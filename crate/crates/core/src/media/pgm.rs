//! Binary Netpbm graymaps (P5) with maxval 255.
//!
//! The decoder accepts comments and arbitrary whitespace in the header; the
//! encoder always writes `P5\n<width> <height>\n255\n`.

use super::{MediaAsset, MediaKind};
use crate::error::{Error, Result};

struct Header<'a> {
    rest: &'a [u8],
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        loop {
            match self.rest.first() {
                Some(b) if b.is_ascii_whitespace() => self.rest = &self.rest[1..],
                Some(b'#') => {
                    let end = self.rest.iter().position(|&b| b == b'\n').unwrap_or(self.rest.len());
                    self.rest = &self.rest[end..];
                }
                _ => return,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let len = self.rest.iter().take_while(|b| b.is_ascii_digit()).count();
        if len == 0 {
            return Err(Error::Format(format!("PGM header: missing {what}")));
        }
        let text = std::str::from_utf8(&self.rest[..len]).expect("ascii digits");
        self.rest = &self.rest[len..];
        text.parse().map_err(|_| Error::Format(format!("PGM header: {what} out of range")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<MediaAsset> {
    let rest = bytes
        .strip_prefix(b"P5")
        .ok_or_else(|| Error::Format("missing P5 magic".into()))?;
    let mut header = Header { rest };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Unsupported(format!("PGM maxval {maxval}, only 255 is supported")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match header.rest.split_first() {
        Some((b, data)) if b.is_ascii_whitespace() => header.rest = data,
        _ => return Err(Error::Format("PGM header not terminated by whitespace".into())),
    }
    let n = width as usize * height as usize;
    if header.rest.len() < n {
        return Err(Error::Format(format!(
            "PGM raster has {} bytes, expected {n}",
            header.rest.len()
        )));
    }
    MediaAsset::image8(width, height, header.rest[..n].to_vec())
}

pub fn encode(asset: &MediaAsset) -> Vec<u8> {
    let MediaKind::Image8 { width, height } = asset.kind() else {
        panic!("pgm::encode called on a non-image asset");
    };
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(asset.samples().iter().map(|&v| v as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let a = decode(b"P5\n1 1\n255\n\x7f").unwrap();
        assert_eq!(a.samples(), &[127]);
        assert_eq!(encode(&a), b"P5\n1 1\n255\n\x7f");
    }

    #[test]
    fn header_with_comments() {
        let a = decode(b"P5 # made by hand\n2 # width\n 1\n255\n\x00\xff").unwrap();
        assert_eq!(a.kind(), MediaKind::Image8 { width: 2, height: 1 });
        assert_eq!(a.samples(), &[0, 255]);
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(decode(b"P2\n1 1\n255\n0"), Err(Error::Format(_))));
        assert!(matches!(decode(b"P5\n1\n"), Err(Error::Format(_))));
        assert!(matches!(decode(b"P5\n2 2\n255\n\x00"), Err(Error::Format(_))));
        assert!(matches!(decode(b"P5\n1 1\n65535\n\x00\x00"), Err(Error::Unsupported(_))));
        assert!(decode(b"P5\n0 1\n255\n").is_err());
    }
}
