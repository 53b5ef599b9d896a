//! Phone-number pseudonymization.
//!
//! Raw numbers are normalized, salted and run through SHA-256; the digest is
//! truncated to a fixed number of hex characters. Identifiers compare in the
//! byte order of their hex rendering, which is what dyad canonicalization
//! relies on.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest digest prefix we keep, in bytes (64 hex characters).
pub const MAX_ID_BYTES: usize = 32;
/// Width used by the operator extract: 20 hex characters.
pub const DEFAULT_HEX_LEN: usize = 20;

/// A pseudonymized phone identifier: a truncated digest rendered as
/// lowercase hex.
#[derive(Clone, Copy, Eq)]
pub struct HashedId {
    len: u8,
    bytes: [u8; MAX_ID_BYTES],
}

impl HashedId {
    pub fn from_bytes(raw: &[u8]) -> Result<Self> {
        if raw.is_empty() || raw.len() > MAX_ID_BYTES {
            return Err(Error::Contract(format!(
                "hashed id must be 1..={MAX_ID_BYTES} bytes, got {}",
                raw.len()
            )));
        }
        let mut bytes = [0u8; MAX_ID_BYTES];
        bytes[..raw.len()].copy_from_slice(raw);
        Ok(HashedId {
            len: raw.len() as u8,
            bytes,
        })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes[..self.len as usize]
    }

    /// Number of hex characters in the rendered form.
    pub fn hex_len(&self) -> usize {
        self.len as usize * 2
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.as_bytes())
    }
}

impl PartialEq for HashedId {
    fn eq(&self, other: &Self) -> bool {
        self.as_bytes() == other.as_bytes()
    }
}

impl Hash for HashedId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // digest bytes are already uniform; the leading word is plenty
        let mut word = [0u8; 8];
        let n = self.len.min(8) as usize;
        word[..n].copy_from_slice(&self.bytes[..n]);
        state.write_u64(u64::from_le_bytes(word));
    }
}

impl Ord for HashedId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_bytes().cmp(other.as_bytes())
    }
}

impl PartialOrd for HashedId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HashedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.as_bytes() {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for HashedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashedId({self})")
    }
}

impl FromStr for HashedId {
    type Err = Error;

    /// Parses an already-hashed identifier. Uppercase hex is accepted and
    /// folded to lowercase.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() % 2 != 0 || s.len() > MAX_ID_BYTES * 2 {
            return Err(Error::Contract(format!(
                "hashed id must be an even number (2..=64) of hex characters: {s:?}"
            )));
        }
        let raw = hex::decode(s)
            .map_err(|e| Error::Contract(format!("hashed id {s:?} is not hex: {e}")))?;
        HashedId::from_bytes(&raw)
    }
}

impl Serialize for HashedId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HashedId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Why a raw phone string could not be hashed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhoneRejection {
    Empty,
    Garbage,
}

/// Strips formatting (spaces, dashes, dots, parentheses) and keeps an
/// optional leading `+` followed by digits. Anything else is garbage.
pub fn normalize_phone(raw: &[u8]) -> std::result::Result<Vec<u8>, PhoneRejection> {
    let mut out = Vec::with_capacity(raw.len());
    for (i, &c) in raw.iter().enumerate() {
        match c {
            b'0'..=b'9' => out.push(c),
            b'+' if out.is_empty() && raw[..i].iter().all(|c| is_filler(*c)) => out.push(c),
            c if is_filler(c) => {}
            _ => return Err(PhoneRejection::Garbage),
        }
    }
    match out.iter().filter(|c| c.is_ascii_digit()).count() {
        0 if out.is_empty() => Err(PhoneRejection::Empty),
        0 => Err(PhoneRejection::Garbage),
        _ => Ok(out),
    }
}

fn is_filler(c: u8) -> bool {
    matches!(c, b' ' | b'\t' | b'-' | b'.' | b'(' | b')')
}

/// Salted, truncated SHA-256 over normalized phone numbers.
#[derive(Clone)]
pub struct PhoneHasher {
    salted: Sha256,
    id_bytes: usize,
}

impl fmt::Debug for PhoneHasher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhoneHasher")
            .field("hex_len", &(self.id_bytes * 2))
            .finish_non_exhaustive()
    }
}

impl PhoneHasher {
    /// `hex_len` must be even and within `2..=64`.
    pub fn new(salt: &[u8], hex_len: usize) -> Result<Self> {
        if hex_len == 0 || hex_len % 2 != 0 || hex_len > MAX_ID_BYTES * 2 {
            return Err(Error::Config(format!(
                "hash hex length must be even and in 2..=64, got {hex_len}"
            )));
        }
        let mut salted = Sha256::new();
        // length prefix keeps (salt, phone) boundaries unambiguous
        salted.update((salt.len() as u64).to_le_bytes());
        salted.update(salt);
        Ok(PhoneHasher {
            salted,
            id_bytes: hex_len / 2,
        })
    }

    pub fn hex_len(&self) -> usize {
        self.id_bytes * 2
    }

    pub fn hash_phone(&self, raw: &str) -> std::result::Result<HashedId, PhoneRejection> {
        self.hash_phone_bytes(raw.as_bytes())
    }

    pub fn hash_phone_bytes(&self, raw: &[u8]) -> std::result::Result<HashedId, PhoneRejection> {
        let normalized = normalize_phone(raw)?;
        Ok(self.hash_normalized(&normalized))
    }

    pub(crate) fn hash_normalized(&self, normalized: &[u8]) -> HashedId {
        let mut h = self.salted.clone();
        h.update(normalized);
        let digest = h.finalize();
        let mut bytes = [0u8; MAX_ID_BYTES];
        bytes[..self.id_bytes].copy_from_slice(&digest[..self.id_bytes]);
        HashedId {
            len: self.id_bytes as u8,
            bytes,
        }
    }
}

/// Hashes an arbitrary token (surname, owner id) with the same salt
/// construction. Used by the synthetic generator to emit opaque tokens.
pub fn hash_token(salt: &[u8], token: &str, hex_len: usize) -> String {
    let mut h = Sha256::new();
    h.update((salt.len() as u64).to_le_bytes());
    h.update(salt);
    h.update(token.as_bytes());
    let digest = h.finalize();
    let mut s = hex::encode(digest);
    s.truncate(hex_len.min(64));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_raw_same_salt_is_deterministic() {
        let h = PhoneHasher::new(b"pepper", 20).unwrap();
        let a = h.hash_phone("+56 9 8765-4321").unwrap();
        let b = h.hash_phone("+56987654321").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_hex().len(), 20);
        assert!(a.to_hex().chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }

    #[test]
    fn salt_changes_output() {
        let a = PhoneHasher::new(b"salt-a", 20).unwrap();
        let b = PhoneHasher::new(b"salt-b", 20).unwrap();
        assert_ne!(
            a.hash_phone("+56912345678").unwrap(),
            b.hash_phone("+56912345678").unwrap()
        );
    }

    #[test]
    fn empty_and_garbage_rejected() {
        let h = PhoneHasher::new(b"s", 20).unwrap();
        assert_eq!(h.hash_phone("").unwrap_err(), PhoneRejection::Empty);
        assert_eq!(h.hash_phone("  - ").unwrap_err(), PhoneRejection::Empty);
        assert_eq!(h.hash_phone("+").unwrap_err(), PhoneRejection::Garbage);
        assert_eq!(h.hash_phone("12a45").unwrap_err(), PhoneRejection::Garbage);
        assert_eq!(h.hash_phone("12+45").unwrap_err(), PhoneRejection::Garbage);
    }

    #[test]
    fn bad_hex_len_is_config_error() {
        assert!(PhoneHasher::new(b"s", 0).is_err());
        assert!(PhoneHasher::new(b"s", 21).is_err());
        assert!(PhoneHasher::new(b"s", 66).is_err());
    }

    #[test]
    fn hex_roundtrip_and_order() {
        let a: HashedId = "71e61e625c967f98da69".parse().unwrap();
        let b: HashedId = "BBB818A312F0FDB0771D".parse().unwrap();
        assert_eq!(a.to_string(), "71e61e625c967f98da69");
        assert_eq!(b.to_string(), "bbb818a312f0fdb0771d");
        assert!(a < b);
        assert!("xyz".parse::<HashedId>().is_err());
        assert!("abc".parse::<HashedId>().is_err());
    }

    #[test]
    fn million_distinct_raws_give_million_distinct_hashes() {
        let h = PhoneHasher::new(b"census", 20).unwrap();
        let mut seen = rustc_hash::FxHashSet::default();
        for i in 0..1_000_000u64 {
            let raw = format!("+569{i:08}");
            seen.insert(h.hash_phone(&raw).unwrap());
        }
        assert_eq!(seen.len(), 1_000_000);
    }
}
