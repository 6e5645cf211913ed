//! Core of a consensus-free settlement system.
//!
//! Accounts issue *claims* (payments, field writes, guards, data
//! assertions, contract calls) grouped into atomic, signed blocks.
//! Blocks carry a per-account nonce, so each account's blocks form a
//! totally ordered stream, while blocks of different accounts settle
//! independently. As long as concurrent claims commute on the state
//! they touch, replicas that settle them in different orders converge
//! to the same state; nothing here elects a leader or orders a log.
//!
//! This crate holds the deterministic substrate shared by every
//! replica:
//!
//! * [`claim`] / [`state`]: claim and block types, the pure validity
//!   and application semantics, account state.
//! * [`codec`] / [`digest`]: the canonical byte encoding and the
//!   content digests built on it.
//! * [`crypto`]: signing keys, signed messages, verifier
//!   co-signatures, validator certificates, quorum arithmetic.
//! * [`setl`]: the contract language — parser, pretty-printer,
//!   template instantiation, and the compiler that lowers contract
//!   blocks to primitive claims.

pub mod address;
pub mod claim;
pub mod codec;
pub mod crypto;
pub mod digest;
pub mod expr;
pub mod setl;
pub mod state;
pub mod value;

pub use address::Address;
pub use claim::{Claim, ClaimBlock, ClaimBody, WriteOp};
pub use digest::Digest;
pub use state::{AccountData, AccountKind, EvalContext, GlobalState};
pub use value::Value;
