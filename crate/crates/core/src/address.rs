//! Account addresses.
//!
//! A user address is the account's signature public key; it exists
//! without any registration step. Contract and instance addresses are
//! derived from the creating account and that account's creation
//! counter, so every replica that applies the same creation claim
//! derives the same fresh address.

use std::fmt;

use crate::digest::{digest_tagged, Digest};

/// 32-byte account identifier, ordered lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 32]);

impl Address {
    pub const LEN: usize = 32;

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Address> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Address(arr))
    }

    /// Short prefix used in traces and error messages.
    pub fn short(&self) -> String {
        hex::encode(&self.0[..4])
    }

    /// Test helper: address with every byte set to `b`.
    pub fn filled(b: u8) -> Address {
        Address([b; 32])
    }
}

/// What kind of account a derived address names.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DerivedKind {
    Contract,
    Instance,
}

/// Derives the address of the `counter`-th account created by
/// `creator`. Injective in (creator, counter, kind) up to digest
/// collisions, so two distinct creations never alias.
pub fn derive_address(creator: &Address, counter: u64, kind: DerivedKind) -> Address {
    let mut buf = Vec::with_capacity(Address::LEN + 9);
    buf.extend_from_slice(creator.as_bytes());
    buf.extend_from_slice(&counter.to_le_bytes());
    buf.push(match kind {
        DerivedKind::Contract => b'C',
        DerivedKind::Instance => b'I',
    });
    let Digest(raw) = digest_tagged("addr", &buf);
    Address(raw)
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "addr:{}", self.short())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_distinguishes_all_inputs() {
        let a = Address::filled(1);
        let b = Address::filled(2);
        let d = |addr: &Address, n, k| derive_address(addr, n, k);
        let all = [
            d(&a, 0, DerivedKind::Contract),
            d(&a, 0, DerivedKind::Instance),
            d(&a, 1, DerivedKind::Contract),
            d(&b, 0, DerivedKind::Contract),
        ];
        for (i, x) in all.iter().enumerate() {
            for y in &all[i + 1..] {
                assert_ne!(x, y);
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let a = derive_address(&Address::filled(7), 3, DerivedKind::Instance);
        assert_eq!(Address::from_hex(&a.to_hex()), Some(a));
        assert_eq!(Address::from_hex("abcd"), None);
    }
}
