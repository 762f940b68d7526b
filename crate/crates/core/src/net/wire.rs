//! Byte formats.
//!
//! Cache encoding (all integers big-endian):
//!
//! ```text
//! cache-file := "EGGC" u16:version(=1) cache
//! cache      := u32:n pair*n            pairs in canonical (sorted) order
//! pair       := datum cache
//! datum      := u32:n entry*n           entries sorted by type name
//! entry      := str:type value
//! value      := u8:0                    bottom
//!             | u8:1 i64                integer
//!             | u8:2 str                string
//! str        := u32:len utf8-bytes
//! ```
//!
//! Message frame:
//!
//! ```text
//! frame := "EGGW" u16:version(=1) u32:len payment-bytes u32:len body-bytes
//! ```
//!
//! The payment segment is a check in its canonical byte form (possibly
//! empty); the body is a cache file.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::cache::{self, Cache, Pair, DEFAULT_DEPTH_LIMIT};
use crate::data::{DataUniverse, Datum, Value};

pub const CACHE_MAGIC: &[u8; 4] = b"EGGC";
pub const FRAME_MAGIC: &[u8; 4] = b"EGGW";
pub const VERSION: u16 = 1;
pub const MAX_FRAME: usize = 16 * 1024 * 1024;
pub const DEFAULT_MAX_PAIRS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated input at byte {0}")]
    Truncated(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("bad value tag {0}")]
    BadTag(u8),
    #[error("invalid utf-8 string")]
    BadUtf8,
    #[error("invalid datum: {0}")]
    BadDatum(String),
    #[error("cache deeper than {0}")]
    DepthLimit(usize),
    #[error("cache larger than {0} pairs")]
    SizeLimit(usize),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("frame of {0} bytes exceeds limit")]
    FrameTooLarge(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<io::Error> for WireError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            WireError::Truncated(0)
        } else {
            WireError::Io(e.to_string())
        }
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_be_bytes());
    out.extend_from_slice(s.as_bytes());
}

pub(crate) fn encode_datum(out: &mut Vec<u8>, d: &Datum) {
    out.extend_from_slice(&(d.len() as u32).to_be_bytes());
    for (t, v) in d.entries() {
        put_str(out, t);
        match v {
            Value::Bottom => out.push(0),
            Value::Int(i) => {
                out.push(1);
                out.extend_from_slice(&i.to_be_bytes());
            }
            Value::Str(s) => {
                out.push(2);
                put_str(out, s);
            }
        }
    }
}

fn encode_cache(out: &mut Vec<u8>, c: &Cache, depth_left: usize) -> Result<(), WireError> {
    if !c.is_empty() && depth_left == 0 {
        return Err(WireError::DepthLimit(DEFAULT_DEPTH_LIMIT));
    }
    out.extend_from_slice(&(c.len() as u32).to_be_bytes());
    for p in c {
        encode_datum(out, &p.datum);
        encode_cache(out, &p.contents, depth_left.saturating_sub(1))?;
    }
    Ok(())
}

/// Canonical bytes of `c`.
pub fn serialize(c: &Cache) -> Result<Vec<u8>, WireError> {
    serialize_with_limit(c, DEFAULT_DEPTH_LIMIT)
}

pub fn serialize_with_limit(c: &Cache, depth_limit: usize) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::with_capacity(16);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&VERSION.to_be_bytes());
    encode_cache(&mut out, c, depth_limit).map_err(|_| WireError::DepthLimit(depth_limit))?;
    Ok(out)
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(WireError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().expect("two bytes")))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    pub(crate) fn i64(&mut self) -> Result<i64, WireError> {
        Ok(i64::from_be_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }

    pub(crate) fn str(&mut self) -> Result<&'a str, WireError> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?).map_err(|_| WireError::BadUtf8)
    }

    pub(crate) fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub(crate) fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<(), WireError> {
        if self.take(4).map_err(|_| WireError::BadMagic)? != magic {
            return Err(WireError::BadMagic);
        }
        match self.u16()? {
            VERSION => Ok(()),
            v => Err(WireError::BadVersion(v)),
        }
    }
}

pub(crate) fn decode_datum(r: &mut Reader<'_>) -> Result<Datum, WireError> {
    let n = r.u32()? as usize;
    if n > r.remaining() {
        return Err(WireError::Truncated(r.pos));
    }
    let mut d = Datum::top();
    for _ in 0..n {
        let t = r.str()?.to_owned();
        let v = match r.u8()? {
            0 => Value::Bottom,
            1 => Value::Int(r.i64()?),
            2 => Value::Str(r.str()?.to_owned()),
            tag => return Err(WireError::BadTag(tag)),
        };
        if d.contains(&t) {
            return Err(WireError::BadDatum(format!("duplicate type {t}")));
        }
        d.insert(t, v);
    }
    Ok(d)
}

struct Decoder<'u> {
    u: &'u DataUniverse,
    depth_limit: usize,
    max_pairs: usize,
    pairs: usize,
}

impl Decoder<'_> {
    fn cache(&mut self, r: &mut Reader<'_>, depth: usize) -> Result<Cache, WireError> {
        let n = r.u32()? as usize;
        if n == 0 {
            return Ok(Cache::empty());
        }
        if depth >= self.depth_limit {
            return Err(WireError::DepthLimit(self.depth_limit));
        }
        if n > r.remaining() {
            return Err(WireError::Truncated(r.pos));
        }
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            self.pairs += 1;
            if self.pairs > self.max_pairs {
                return Err(WireError::SizeLimit(self.max_pairs));
            }
            let raw = decode_datum(r)?;
            let contents = self.cache(r, depth + 1)?;
            let datum = self.u.canonicalize(&raw).map_err(|e| WireError::BadDatum(e.to_string()))?;
            if self.u.in_d(&datum) {
                pairs.push(Pair::new(datum, contents));
            }
        }
        Ok(cache::maximalize(self.u, pairs))
    }
}

/// Parses a cache file, canonicalizing data and restoring the antichain
/// property. Pairs whose data fall outside D are dropped.
pub fn deserialize(u: &DataUniverse, bytes: &[u8]) -> Result<Cache, WireError> {
    deserialize_with_limits(u, bytes, DEFAULT_DEPTH_LIMIT, DEFAULT_MAX_PAIRS)
}

pub fn deserialize_with_limits(u: &DataUniverse, bytes: &[u8], depth_limit: usize, max_pairs: usize) -> Result<Cache, WireError> {
    let mut r = Reader::new(bytes);
    r.expect_magic(CACHE_MAGIC)?;
    let mut dec = Decoder { u, depth_limit, max_pairs, pairs: 0 };
    let c = dec.cache(&mut r, 0)?;
    match r.remaining() {
        0 => Ok(c),
        n => Err(WireError::Trailing(n)),
    }
}

/// One request or reply on the wire.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WireMessage {
    pub payment: Vec<u8>,
    pub body: Vec<u8>,
}

impl WireMessage {
    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        let total = 14 + self.payment.len() + self.body.len();
        if total > MAX_FRAME {
            return Err(WireError::FrameTooLarge(total));
        }
        let mut out = Vec::with_capacity(total);
        out.extend_from_slice(FRAME_MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        out.extend_from_slice(&(self.payment.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payment);
        out.extend_from_slice(&(self.body.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.body);
        Ok(out)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), WireError> {
        w.write_all(&self.encode()?)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, WireError> {
        let mut head = [0u8; 6];
        r.read_exact(&mut head)?;
        Reader::new(&head).expect_magic(FRAME_MAGIC)?;
        let payment = read_segment(r, 6)?;
        let body = read_segment(r, 10 + payment.len())?;
        Ok(Self { payment, body })
    }
}

fn read_segment(r: &mut impl Read, used: usize) -> Result<Vec<u8>, WireError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let n = u32::from_be_bytes(len) as usize;
    if used + 4 + n > MAX_FRAME {
        return Err(WireError::FrameTooLarge(used + 4 + n));
    }
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
