//! Checks: recursively signed payloads.
//!
//! A check is either a leaf `[payload, recipient]` signed by anyone, or a
//! node `[payload, inner, recipient]` signed by the owner of `inner`. The
//! owner of a check is the recipient of its outermost layer.
//!
//! Canonical bytes (big-endian lengths):
//!
//! ```text
//! check   := "EGGK" u16:version(=1) layer
//! layer   := u8:0 payload key:signer key:recipient sig         leaf
//!          | u8:1 payload layer:inner key:recipient sig         node
//! payload := str:denomination str:start str:expiration str:tracking u8:payment
//! sig     := u32:len bytes
//! ```
//!
//! Denominations are exact decimal strings and dates RFC 3339 in UTC.
//! A layer's signature covers the magic, version and the layer with its
//! own signature omitted.

use chrono::{DateTime, SecondsFormat, Utc};
use rust_decimal::Decimal;

use crate::net::wire::{Reader, WireError};

use super::crypto::{PublicKey, SignatureScheme};

pub const CHECK_MAGIC: &[u8; 4] = b"EGGK";
pub const CHECK_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Payload {
    pub denomination: Decimal,
    pub start: DateTime<Utc>,
    pub expiration: DateTime<Utc>,
    pub tracking: String,
    pub payment: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Leaf { payload: Payload, signer: PublicKey, recipient: PublicKey, signature: Vec<u8> },
    Node { payload: Payload, inner: Box<Check>, recipient: PublicKey, signature: Vec<u8> },
}

/// One hop of a check's name chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub key: PublicKey,
    pub payment: bool,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_be_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as u32).to_be_bytes());
    out.extend_from_slice(b);
}

pub(crate) fn format_date(d: &DateTime<Utc>) -> String {
    d.to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl Payload {
    fn encode(&self, out: &mut Vec<u8>) {
        put_str(out, &self.denomination.to_string());
        put_str(out, &format_date(&self.start));
        put_str(out, &format_date(&self.expiration));
        put_str(out, &self.tracking);
        out.push(u8::from(self.payment));
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self, WireError> {
        let bad = |what: &str| WireError::BadDatum(format!("check payload: bad {what}"));
        let denomination: Decimal = r.str()?.parse().map_err(|_| bad("denomination"))?;
        let start = DateTime::parse_from_rfc3339(r.str()?).map_err(|_| bad("start date"))?.with_timezone(&Utc);
        let expiration = DateTime::parse_from_rfc3339(r.str()?).map_err(|_| bad("expiration date"))?.with_timezone(&Utc);
        let tracking = r.str()?.to_owned();
        let payment = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(bad("payment bit")),
        };
        Ok(Self { denomination, start, expiration, tracking, payment })
    }
}

impl Check {
    pub fn payload(&self) -> &Payload {
        match self {
            Check::Leaf { payload, .. } | Check::Node { payload, .. } => payload,
        }
    }

    pub fn recipient(&self) -> PublicKey {
        match self {
            Check::Leaf { recipient, .. } | Check::Node { recipient, .. } => *recipient,
        }
    }

    /// The recipient of the outermost layer.
    pub fn owner(&self) -> PublicKey {
        self.recipient()
    }

    /// Who must have signed the outermost layer.
    pub fn signer(&self) -> PublicKey {
        match self {
            Check::Leaf { signer, .. } => *signer,
            Check::Node { inner, .. } => inner.owner(),
        }
    }

    pub fn signature(&self) -> &[u8] {
        match self {
            Check::Leaf { signature, .. } | Check::Node { signature, .. } => signature,
        }
    }

    pub fn inner(&self) -> Option<&Check> {
        match self {
            Check::Leaf { .. } => None,
            Check::Node { inner, .. } => Some(inner),
        }
    }

    /// The signer of the innermost layer.
    pub fn minter(&self) -> PublicKey {
        match self {
            Check::Leaf { signer, .. } => *signer,
            Check::Node { inner, .. } => inner.minter(),
        }
    }

    pub fn denomination(&self) -> Decimal {
        self.payload().denomination
    }

    pub fn tracking(&self) -> &str {
        &self.payload().tracking
    }

    pub fn is_payment(&self) -> bool {
        self.payload().payment
    }

    /// Layers from the outermost inwards.
    pub fn layers(&self) -> Vec<&Check> {
        let mut out = vec![self];
        let mut cur = self;
        while let Some(inner) = cur.inner() {
            out.push(inner);
            cur = inner;
        }
        out
    }

    /// The minter followed by each layer's recipient, innermost first. A
    /// leaf minted to its own signer contributes only the minter.
    pub fn hops(&self) -> Vec<Hop> {
        let layers = self.layers();
        let mut hops = vec![Hop { key: self.minter(), payment: false }];
        for l in layers.iter().rev() {
            let self_minted = matches!(l, Check::Leaf { signer, recipient, payload, .. } if signer == recipient && !payload.payment);
            if !self_minted {
                hops.push(Hop { key: l.recipient(), payment: l.is_payment() });
            }
        }
        hops
    }

    pub fn has_payment_layer(&self) -> bool {
        self.layers().iter().any(|l| l.is_payment())
    }

    /// Position of the first payment hop and the number of returns after
    /// it, when the check contains a payment.
    pub(crate) fn payment_progress(&self) -> Option<(usize, usize)> {
        let hops = self.hops();
        let k = hops.iter().position(|h| h.payment)?;
        Some((k, hops.len() - 1 - k))
    }

    /// A payment whose value has come back to the minter.
    pub fn is_receipt(&self) -> bool {
        matches!(self.payment_progress(), Some((k, returns)) if returns >= k)
    }

    fn encode_layer(&self, out: &mut Vec<u8>, with_signature: bool) {
        match self {
            Check::Leaf { payload, signer, recipient, signature } => {
                out.push(0);
                payload.encode(out);
                out.extend_from_slice(&signer.0);
                out.extend_from_slice(&recipient.0);
                if with_signature {
                    put_bytes(out, signature);
                }
            }
            Check::Node { payload, inner, recipient, signature } => {
                out.push(1);
                payload.encode(out);
                inner.encode_layer(out, true);
                out.extend_from_slice(&recipient.0);
                if with_signature {
                    put_bytes(out, signature);
                }
            }
        }
    }

    fn header(out: &mut Vec<u8>) {
        out.extend_from_slice(CHECK_MAGIC);
        out.extend_from_slice(&CHECK_VERSION.to_be_bytes());
    }

    /// The bytes the outermost layer's signature covers.
    pub fn signed_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        Self::header(&mut out);
        self.encode_layer(&mut out, false);
        out
    }

    /// Canonical wire form.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        Self::header(&mut out);
        self.encode_layer(&mut out, true);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        if r.take(4).map_err(|_| WireError::BadMagic)? != CHECK_MAGIC {
            return Err(WireError::BadMagic);
        }
        match r.u16()? {
            CHECK_VERSION => {}
            v => return Err(WireError::BadVersion(v)),
        }
        let c = Self::decode_layer(&mut r, 0)?;
        match r.remaining() {
            0 => Ok(c),
            n => Err(WireError::Trailing(n)),
        }
    }

    fn decode_layer(r: &mut Reader<'_>, depth: usize) -> Result<Self, WireError> {
        const MAX_LAYERS: usize = 1024;
        if depth > MAX_LAYERS {
            return Err(WireError::DepthLimit(MAX_LAYERS));
        }
        let key = |r: &mut Reader<'_>| -> Result<PublicKey, WireError> { Ok(PublicKey(r.take(32)?.try_into().expect("32 bytes"))) };
        let sig = |r: &mut Reader<'_>| -> Result<Vec<u8>, WireError> {
            let n = r.u32()? as usize;
            Ok(r.take(n)?.to_vec())
        };
        match r.u8()? {
            0 => {
                let payload = Payload::decode(r)?;
                let signer = key(r)?;
                let recipient = key(r)?;
                Ok(Check::Leaf { payload, signer, recipient, signature: sig(r)? })
            }
            1 => {
                let payload = Payload::decode(r)?;
                let inner = Box::new(Self::decode_layer(r, depth + 1)?);
                let recipient = key(r)?;
                Ok(Check::Node { payload, inner, recipient, signature: sig(r)? })
            }
            t => Err(WireError::BadTag(t)),
        }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, WireError> {
        let bytes = hex::decode(s.trim()).map_err(|e| WireError::BadDatum(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

/// True iff every layer's signature verifies under the key that must have
/// made it, dates are ordered, and no layer claims more than it wraps.
pub fn verify_chain(scheme: &dyn SignatureScheme, c: &Check) -> bool {
    c.layers().iter().all(|layer| {
        let p = layer.payload();
        let sound = p.start <= p.expiration
            && p.denomination >= Decimal::ZERO
            && layer.inner().is_none_or(|i| p.denomination <= i.denomination());
        sound && scheme.verify(&layer.signer(), &layer.signed_bytes(), layer.signature())
    })
}
