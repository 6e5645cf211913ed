//! Content digests. Every digest in the system is SHA-256 over a
//! domain tag plus the canonical encoding of the value, so values of
//! different kinds can never collide even when their encodings do.

use std::fmt;

use sha2::{Digest as _, Sha256};

/// Version prefix folded into every digest.
pub const DOMAIN: &[u8] = b"fastset/v1/";

/// 32-byte content digest, ordered lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const LEN: usize = 32;

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Digest> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Digest(arr))
    }

    /// Short prefix used in traces and rendered values.
    pub fn short(&self) -> String {
        hex::encode(&self.0[..8])
    }
}

/// Hashes `bytes` under the given domain tag. The tag is
/// NUL-terminated inside the hash so no tag is a prefix of another.
pub fn digest_tagged(tag: &str, bytes: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update(bytes);
    Digest(h.finalize().into())
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.short())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_do_not_prefix_collide() {
        // "ab" + "c" must differ from "a" + "bc" thanks to the NUL
        // terminator after the tag.
        assert_ne!(digest_tagged("ab", b"c"), digest_tagged("a", b"bc"));
        assert_ne!(digest_tagged("a", b""), digest_tagged("", b"a"));
    }

    #[test]
    fn hex_round_trip() {
        let d = digest_tagged("t", b"payload");
        assert_eq!(Digest::from_hex(&d.to_hex()), Some(d));
        assert_eq!(Digest::from_hex("zz"), None);
    }
}
