//! Big-endian framing shared by the packed feature format and template records.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("bad magic bytes {0:02x?}")]
    BadMagic(Vec<u8>),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("input truncated at offset {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after checksum")]
    TrailingBytes(usize),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed {what} at offset {offset}")]
    Malformed { what: &'static str, offset: usize },
}

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn i64(&mut self, v: i64) {
        self.bytes(&v.to_be_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    /// u16 length prefix, then UTF-8 bytes.
    pub fn str16(&mut self, s: &str) {
        let len = u16::try_from(s.len()).expect("string longer than 65535 bytes");
        self.u16(len);
        self.bytes(s.as_bytes());
    }

    /// Tagged section: tag byte, u32 payload length, payload.
    pub fn section(&mut self, tag: u8, body: Writer) {
        self.u8(tag);
        self.u32(u32::try_from(body.buf.len()).expect("section over 4 GiB"));
        self.bytes(&body.buf);
    }

    /// Appends CRC-32 (IEEE) of everything written so far and returns the buffer.
    pub fn finish_with_crc(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.remaining() < n {
            return Err(WireError::Truncated(self.buf.len()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn i64(&mut self) -> Result<i64, WireError> {
        Ok(i64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn str16(&mut self) -> Result<String, WireError> {
        let len = self.u16()? as usize;
        let at = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| WireError::Malformed {
            what: "utf-8 string",
            offset: at,
        })
    }

    pub fn magic(&mut self, expected: &[u8; 4]) -> Result<(), WireError> {
        let got = self.take(4).map_err(|_| WireError::BadMagic(self.buf.to_vec()))?;
        if got != expected {
            return Err(WireError::BadMagic(got.to_vec()));
        }
        Ok(())
    }

    /// Reads a section header with the expected tag and returns a reader over its payload.
    pub fn section(&mut self, tag: u8) -> Result<Reader<'a>, WireError> {
        let at = self.pos;
        let got = self.u8()?;
        if got != tag {
            return Err(WireError::Malformed {
                what: "section tag",
                offset: at,
            });
        }
        let len = self.u32()? as usize;
        Ok(Reader::new(self.take(len)?))
    }

    /// Errors unless the section payload was consumed exactly.
    pub fn expect_end(&self, what: &'static str) -> Result<(), WireError> {
        if self.remaining() != 0 {
            return Err(WireError::Malformed {
                what,
                offset: self.pos,
            });
        }
        Ok(())
    }

    /// Expects exactly the 4-byte CRC trailer and validates it against all bytes before it.
    pub fn finish_with_crc(mut self) -> Result<(), WireError> {
        let body_end = self.pos;
        match self.remaining() {
            n if n < 4 => return Err(WireError::Truncated(self.buf.len())),
            n if n > 4 => return Err(WireError::TrailingBytes(n - 4)),
            _ => {}
        }
        let stored = self.u32()?;
        let computed = crc32fast::hash(&self.buf[..body_end]);
        if stored != computed {
            return Err(WireError::ChecksumMismatch { stored, computed });
        }
        Ok(())
    }
}
