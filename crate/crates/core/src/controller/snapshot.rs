//! Verified RAM snapshots for the restore-based reset strategy.
//!
//! Wire format (all integers little-endian):
//!
//! ```text
//! u64 image_len | image bytes | 32-byte SHA-256 of image
//! u32 entry_count | { u32 name_len | name (UTF-8) | f64 value } * entry_count
//! ```

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("snapshot capture requires a stable controller with no attacker present")]
    UnsafeCapture,
    #[error("malformed snapshot: {0}")]
    Malformed(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    image: Vec<u8>,
    digest: [u8; 32],
    persisted: BTreeMap<String, f64>,
}

pub fn digest(image: &[u8]) -> [u8; 32] {
    Sha256::digest(image).into()
}

impl Snapshot {
    /// Capture `ram`. Only allowed from a stable controller in a secure
    /// environment, i.e. before any attacker is attached.
    pub fn capture(
        ram: &[u8],
        persisted: &BTreeMap<String, f64>,
        stable: bool,
        attacker_enabled: bool,
    ) -> Result<Self, SnapshotError> {
        if !stable || attacker_enabled {
            return Err(SnapshotError::UnsafeCapture);
        }
        Ok(Self {
            image: ram.to_vec(),
            digest: digest(ram),
            persisted: persisted.clone(),
        })
    }

    pub fn image(&self) -> &[u8] {
        &self.image
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn persisted(&self) -> &BTreeMap<String, f64> {
        &self.persisted
    }

    pub fn verify(&self) -> bool {
        digest(&self.image) == self.digest
    }

    /// Tamper hook for tests and fault-injection scenarios.
    pub fn image_mut_unchecked(&mut self) -> &mut [u8] {
        &mut self.image
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.image.len() + 32 + 4);
        out.extend_from_slice(&(self.image.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.image);
        out.extend_from_slice(&self.digest);
        out.extend_from_slice(&(self.persisted.len() as u32).to_le_bytes());
        for (name, value) in &self.persisted {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&value.to_le_bytes());
        }
        out
    }

    /// Decode without verifying the digest; call [`Snapshot::verify`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let mut r = Reader { bytes, pos: 0 };
        let len = u64::from_le_bytes(r.take(8)?.try_into().unwrap()) as usize;
        let image = r.take(len)?.to_vec();
        let digest: [u8; 32] = r.take(32)?.try_into().unwrap();
        let count = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        let mut persisted = BTreeMap::new();
        for _ in 0..count {
            let n = u32::from_le_bytes(r.take(4)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(r.take(n)?)
                .map_err(|_| SnapshotError::Malformed("entry name is not UTF-8"))?
                .to_string();
            let value = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
            persisted.insert(name, value);
        }
        if r.pos != bytes.len() {
            return Err(SnapshotError::Malformed("trailing bytes"));
        }
        Ok(Self { image, digest, persisted })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).ok_or(SnapshotError::Malformed("length overflow"))?;
        let out = self.bytes.get(self.pos..end).ok_or(SnapshotError::Malformed("truncated"))?;
        self.pos = end;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Snapshot {
        let mut persisted = BTreeMap::new();
        persisted.insert("gyro_bias_x".to_string(), 0.0125);
        Snapshot::capture(&[1, 2, 3, 4], &persisted, true, false).unwrap()
    }

    #[test]
    fn capture_then_verify() {
        assert!(sample().verify());
    }

    #[test]
    fn flipped_byte_fails_verification() {
        let mut s = sample();
        s.image_mut_unchecked()[2] ^= 0x01;
        assert!(!s.verify());
    }

    #[test]
    fn capture_preconditions() {
        let p = BTreeMap::new();
        assert_eq!(Snapshot::capture(&[0], &p, true, true), Err(SnapshotError::UnsafeCapture));
        assert_eq!(Snapshot::capture(&[0], &p, false, false), Err(SnapshotError::UnsafeCapture));
    }

    #[test]
    fn wire_format_layout() {
        let s = sample();
        let b = s.to_bytes();
        assert_eq!(&b[..8], &4u64.to_le_bytes());
        assert_eq!(&b[8..12], &[1, 2, 3, 4]);
        assert_eq!(&b[12..44], s.digest());
        assert_eq!(&b[44..48], &1u32.to_le_bytes());
        assert_eq!(&b[48..52], &11u32.to_le_bytes());
        assert_eq!(&b[52..63], b"gyro_bias_x");
        assert_eq!(&b[63..71], &0.0125f64.to_le_bytes());
        assert_eq!(b.len(), 71);
    }

    #[test]
    fn sha256_known_vector() {
        // SHA-256("abc")
        let d = digest(b"abc");
        assert_eq!(d[0], 0xba);
        assert_eq!(d[31], 0xad);
    }

    #[test]
    fn truncated_input_rejected() {
        let b = sample().to_bytes();
        assert!(Snapshot::from_bytes(&b[..b.len() - 1]).is_err());
        let mut extra = b.clone();
        extra.push(0);
        assert!(Snapshot::from_bytes(&extra).is_err());
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(image in proptest::collection::vec(any::<u8>(), 0..512), v in any::<f64>()) {
            prop_assume!(!v.is_nan());
            let mut p = BTreeMap::new();
            p.insert("waypoint".to_string(), v);
            let s = Snapshot::capture(&image, &p, true, false).unwrap();
            let back = Snapshot::from_bytes(&s.to_bytes()).unwrap();
            prop_assert!(back.verify());
            prop_assert_eq!(back, s);
        }
    }
}
