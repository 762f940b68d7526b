//! Signature schemes and identities.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ed25519_dalek::{Signer, SigningKey, Verifier, VerifyingKey};
use rand::rngs::OsRng;
use rand::RngCore;
use sha2::{Digest, Sha256};

/// A 32-byte verification key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublicKey(pub [u8; 32]);

impl PublicKey {
    /// Short hex prefix used where no name is known.
    pub fn fingerprint(&self) -> String {
        hex::encode(&self.0[..6])
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.fingerprint())
    }
}

impl fmt::Display for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for PublicKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = hex::decode(s.trim()).map_err(|e| e.to_string())?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| "public keys are 32 bytes".to_owned())?;
        Ok(PublicKey(arr))
    }
}

/// Sign and verify over canonical bytes.
pub trait SignatureScheme: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn public_key(&self, secret: &[u8; 32]) -> PublicKey;
    fn sign(&self, secret: &[u8; 32], message: &[u8]) -> Vec<u8>;
    fn verify(&self, key: &PublicKey, message: &[u8], signature: &[u8]) -> bool;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Ed25519;

impl SignatureScheme for Ed25519 {
    fn name(&self) -> &'static str {
        "ed25519"
    }

    fn public_key(&self, secret: &[u8; 32]) -> PublicKey {
        PublicKey(SigningKey::from_bytes(secret).verifying_key().to_bytes())
    }

    fn sign(&self, secret: &[u8; 32], message: &[u8]) -> Vec<u8> {
        SigningKey::from_bytes(secret).sign(message).to_bytes().to_vec()
    }

    fn verify(&self, key: &PublicKey, message: &[u8], signature: &[u8]) -> bool {
        let Ok(vk) = VerifyingKey::from_bytes(&key.0) else { return false };
        let Ok(sig) = ed25519_dalek::Signature::from_slice(signature) else { return false };
        vk.verify(message, &sig).is_ok()
    }
}

/// Deterministic stand-in for tests: the public key is a hash of the
/// secret and a signature is a hash of key and message. Offers no security.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockScheme;

impl MockScheme {
    fn digest(key: &PublicKey, message: &[u8]) -> Vec<u8> {
        let mut h = Sha256::new();
        h.update(key.0);
        h.update(message);
        h.finalize().to_vec()
    }
}

impl SignatureScheme for MockScheme {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn public_key(&self, secret: &[u8; 32]) -> PublicKey {
        let mut h = Sha256::new();
        h.update(b"mock-public");
        h.update(secret);
        PublicKey(h.finalize().into())
    }

    fn sign(&self, secret: &[u8; 32], message: &[u8]) -> Vec<u8> {
        Self::digest(&self.public_key(secret), message)
    }

    fn verify(&self, key: &PublicKey, message: &[u8], signature: &[u8]) -> bool {
        Self::digest(key, message) == signature
    }
}

pub fn scheme_by_name(name: &str) -> Option<Arc<dyn SignatureScheme>> {
    match name {
        "ed25519" => Some(Arc::new(Ed25519)),
        "mock" => Some(Arc::new(MockScheme)),
        _ => None,
    }
}

/// A named key pair. Identities known only from a rolodex have no secret.
#[derive(Clone)]
pub struct Identity {
    pub name: String,
    pub public: PublicKey,
    secret: Option<[u8; 32]>,
    scheme: Arc<dyn SignatureScheme>,
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Identity")
            .field("name", &self.name)
            .field("public", &self.public)
            .field("scheme", &self.scheme.name())
            .field("has_secret", &self.secret.is_some())
            .finish()
    }
}

impl Identity {
    pub fn from_secret(name: &str, secret: [u8; 32], scheme: Arc<dyn SignatureScheme>) -> Self {
        Self { name: name.to_owned(), public: scheme.public_key(&secret), secret: Some(secret), scheme }
    }

    pub fn generate(name: &str, scheme: Arc<dyn SignatureScheme>) -> Self {
        let mut secret = [0u8; 32];
        OsRng.fill_bytes(&mut secret);
        Self::from_secret(name, secret, scheme)
    }

    /// A reproducible identity derived from a seed phrase.
    pub fn from_seed(name: &str, seed: &str, scheme: Arc<dyn SignatureScheme>) -> Self {
        Self::from_secret(name, Sha256::digest(seed.as_bytes()).into(), scheme)
    }

    pub fn public_only(name: &str, public: PublicKey, scheme: Arc<dyn SignatureScheme>) -> Self {
        Self { name: name.to_owned(), public, secret: None, scheme }
    }

    pub fn scheme(&self) -> &Arc<dyn SignatureScheme> {
        &self.scheme
    }

    pub fn secret(&self) -> Option<&[u8; 32]> {
        self.secret.as_ref()
    }

    pub fn can_sign(&self) -> bool {
        self.secret.is_some()
    }

    pub fn sign(&self, message: &[u8]) -> Option<Vec<u8>> {
        self.secret.as_ref().map(|s| self.scheme.sign(s, message))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(scheme: Arc<dyn SignatureScheme>) {
        let id = Identity::from_seed("a", "seed", scheme.clone());
        let sig = id.sign(b"msg").unwrap();
        assert!(scheme.verify(&id.public, b"msg", &sig));
        assert!(!scheme.verify(&id.public, b"msh", &sig));
        let mut bad = sig.clone();
        bad[0] ^= 1;
        assert!(!scheme.verify(&id.public, b"msg", &bad));
        let other = Identity::from_seed("b", "other", scheme.clone());
        assert!(!scheme.verify(&other.public, b"msg", &sig));
    }

    #[test]
    fn ed25519_signs() {
        round_trip(Arc::new(Ed25519));
    }

    #[test]
    fn mock_signs() {
        round_trip(Arc::new(MockScheme));
    }

    #[test]
    fn keys_parse() {
        let id = Identity::from_seed("a", "seed", Arc::new(Ed25519));
        assert_eq!(id.public.to_hex().parse::<PublicKey>().unwrap(), id.public);
        assert!("abc".parse::<PublicKey>().is_err());
    }
}
