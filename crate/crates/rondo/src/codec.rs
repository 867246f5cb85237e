//! Little-endian binary framing for the versioned on-disk formats.
//!
//! All multi-byte values are little-endian. Strings and sequences are
//! length-prefixed with u32. Readers report the byte offset of the first
//! inconsistency instead of panicking.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic at offset {offset}: expected {expected}")]
    BadMagic { offset: usize, expected: String },
    #[error("truncated input at offset {offset}: needed {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("invalid value at offset {offset}: {what}")]
    Invalid { offset: usize, what: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn magic(&mut self, magic: &[u8]) {
        self.buf.extend_from_slice(magic);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn f64_slice(&mut self, vs: &[f64]) {
        self.u32(vs.len() as u32);
        for &v in vs {
            self.f64(v);
        }
    }

    pub fn bytes(&mut self, bs: &[u8]) {
        self.buf.extend_from_slice(bs);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        ByteReader { data, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.remaining() < n {
            return Err(FormatError::Truncated {
                offset: self.pos,
                needed: n - self.remaining(),
            });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn magic(&mut self, expected: &[u8]) -> Result<(), FormatError> {
        let offset = self.pos;
        let got = self.take(expected.len())?;
        if got != expected {
            return Err(FormatError::BadMagic {
                offset,
                expected: String::from_utf8_lossy(expected).into_owned(),
            });
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn str(&mut self) -> Result<String, FormatError> {
        let offset = self.pos;
        let n = self.u32()? as usize;
        if n > 1 << 24 {
            return Err(FormatError::Invalid {
                offset,
                what: format!("string length {n} out of range"),
            });
        }
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| FormatError::Invalid {
            offset,
            what: "string is not valid utf-8".into(),
        })
    }

    pub fn f64_vec(&mut self) -> Result<Vec<f64>, FormatError> {
        let offset = self.pos;
        let n = self.u32()? as usize;
        if n > 1 << 28 {
            return Err(FormatError::Invalid {
                offset,
                what: format!("sequence length {n} out of range"),
            });
        }
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn raw(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        self.take(n)
    }

    pub fn expect_end(&self) -> Result<(), FormatError> {
        if self.remaining() != 0 {
            return Err(FormatError::Invalid {
                offset: self.pos,
                what: format!("{} trailing bytes", self.remaining()),
            });
        }
        Ok(())
    }
}

/// FNV-1a hash, used for config hashes and named seed streams.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_primitives() {
        let mut w = ByteWriter::new();
        w.magic(b"TEST1");
        w.u32(42);
        w.f64(-1.5);
        w.str("hello");
        w.f64_slice(&[1.0, 2.0]);
        let bytes = w.into_bytes();

        let mut r = ByteReader::new(&bytes);
        r.magic(b"TEST1").unwrap();
        assert_eq!(r.u32().unwrap(), 42);
        assert_eq!(r.f64().unwrap(), -1.5);
        assert_eq!(r.str().unwrap(), "hello");
        assert_eq!(r.f64_vec().unwrap(), vec![1.0, 2.0]);
        r.expect_end().unwrap();
    }

    #[test]
    fn truncation_reports_offset() {
        let mut w = ByteWriter::new();
        w.u32(7);
        let bytes = w.into_bytes();
        let mut r = ByteReader::new(&bytes);
        r.u32().unwrap();
        match r.f64() {
            Err(FormatError::Truncated { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_detected() {
        let bytes = b"WRONG".to_vec();
        let mut r = ByteReader::new(&bytes);
        assert!(matches!(
            r.magic(b"RIGHT"),
            Err(FormatError::BadMagic { offset: 0, .. })
        ));
    }
}
