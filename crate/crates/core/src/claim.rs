//! Claims and claim blocks.
//!
//! A claim is the unit of meaning: one payment, one field write, one
//! guard, one assertion. A claim block is the unit of settlement: a
//! non-empty sequence of claims by one issuer that applies atomically,
//! each claim validated in the state left by its predecessors.
//!
//! Claim fields that depend on state are expressions, evaluated when
//! the claim settles. Compiled contract blocks rely on this: replicas
//! settle independent blocks in different orders, and a block must
//! read fields as they are *at its own settlement*, wherever that
//! falls. Plain payments built by clients carry literal expressions.

use std::fmt;

use crate::address::Address;
use crate::codec::Encode;
use crate::digest::{digest_tagged, Digest};
use crate::expr::Expr;
use crate::value::Value;

/// Field update operator carried by a write claim.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum WriteOp {
    /// Replace the field (or one map key).
    Set,
    /// Integer add / string append.
    Add,
    /// Integer subtract.
    Sub,
    /// Set insertion; inserting a member is a valid no-op.
    Insert,
    /// Set removal; removing a non-member is a valid no-op.
    Remove,
    /// List append.
    Push,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ClaimBody {
    /// Native token transfer from the issuer. Valid when `value`
    /// evaluates to an integer in `0..=balance(issuer)`.
    Transfer { to: Expr, value: Expr },
    /// Field write on `owner`: the issuer itself, or the issuer's
    /// parent contract when an instance block writes contract state.
    /// Any other owner is invalid.
    FieldWrite {
        owner: Address,
        field: String,
        index: Option<Expr>,
        op: WriteOp,
        value: Expr,
    },
    /// Pure precondition: valid exactly when `expr` is true.
    Guard { expr: Expr },
    /// Co-signature requirement on the enclosing message. Checked at
    /// validation; certificates don't carry the co-signatures, so at
    /// settlement it holds vacuously (the approving quorum checked it).
    Verify { signers: Expr, quorum: Expr },
    /// Data settlement. Settling records an issuer-independent content
    /// digest over (tag, evaluated payload) that `IsSettled` matches.
    /// Tag "setl" additionally registers the payload string as a
    /// parsed template script.
    Data { tag: String, payload: Vec<Expr> },
    /// Valid when the digest `claim` evaluates to is already settled.
    IsSettled { claim: Expr },
    /// Creates a contract account from a registered template script,
    /// binding `args` to its template parameters and running its
    /// constructor as the new account.
    CreateContract { script: Digest, args: Vec<Value> },
    /// Creates an instance account of `contract` owned by the issuer
    /// and runs the instance constructor as the new account.
    CreateInstance { contract: Address },
    /// Cross-account block call: compiles the named block of `target`
    /// with `args` (evaluated in the caller's frame) and applies the
    /// result as `target`. Requires owner(issuer) == owner(target).
    Call {
        target: Address,
        block: String,
        args: Vec<Expr>,
    },
    /// Applies an inline claim sequence (quoted code bound at compile
    /// time), each claim issued by the same issuer.
    Apply { inner: Vec<Claim> },
    /// Conditional group: when `cond` is false the claim is valid and
    /// inert. Effects inside the branch settle without per-claim
    /// digest records, so replicas that disagree on `cond` (allowed
    /// only for non-commuting contracts) never diverge on the record.
    Cond { cond: Expr, then: Vec<Claim> },
}

/// One claim: an issuer plus what it asserts or effects. Claims with
/// different issuers are never equal and never digest alike.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Claim {
    pub issuer: Address,
    pub body: ClaimBody,
}

impl Claim {
    /// Plain payment with literal fields.
    pub fn transfer(issuer: Address, to: Address, value: u64) -> Claim {
        Claim {
            issuer,
            body: ClaimBody::Transfer {
                to: Expr::lit_addr(to),
                value: Expr::Lit(Value::Int(value.into())),
            },
        }
    }

    pub fn guard(issuer: Address, expr: Expr) -> Claim {
        Claim {
            issuer,
            body: ClaimBody::Guard { expr },
        }
    }

    pub fn data(issuer: Address, tag: &str, payload: Vec<Value>) -> Claim {
        Claim {
            issuer,
            body: ClaimBody::Data {
                tag: tag.to_string(),
                payload: payload.into_iter().map(Expr::Lit).collect(),
            },
        }
    }

    /// Structural content digest; covers the issuer and every field.
    pub fn digest(&self) -> Digest {
        digest_tagged("claim", &self.encode())
    }
}

/// Non-empty, single-issuer claim sequence settled atomically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ClaimBlock {
    claims: Vec<Claim>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum BlockShapeError {
    #[error("claim block must not be empty")]
    Empty,
    #[error("claim block mixes issuers")]
    MixedIssuers,
}

impl ClaimBlock {
    pub fn new(claims: Vec<Claim>) -> Result<ClaimBlock, BlockShapeError> {
        let first = claims.first().ok_or(BlockShapeError::Empty)?;
        if claims.iter().any(|c| c.issuer != first.issuer) {
            return Err(BlockShapeError::MixedIssuers);
        }
        Ok(ClaimBlock { claims })
    }

    /// Single-claim convenience constructor.
    pub fn single(claim: Claim) -> ClaimBlock {
        ClaimBlock {
            claims: vec![claim],
        }
    }

    pub fn issuer(&self) -> Address {
        self.claims[0].issuer
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn len(&self) -> usize {
        self.claims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn digest(&self) -> Digest {
        digest_tagged("block", &self.encode())
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> ", self.issuer)?;
        match &self.body {
            ClaimBody::Transfer { to, value } => write!(f, "transfer({to}, {value})"),
            ClaimBody::FieldWrite {
                owner,
                field,
                index,
                op,
                value,
            } => {
                write!(f, "write({owner}, {field}")?;
                if let Some(k) = index {
                    write!(f, "[{k}]")?;
                }
                write!(f, ", {op:?}, {value})")
            }
            ClaimBody::Guard { expr } => write!(f, "guard({expr})"),
            ClaimBody::Verify { signers, quorum } => write!(f, "verify({signers}, {quorum})"),
            ClaimBody::Data { tag, payload } => {
                write!(f, "claim({tag:?}")?;
                for p in payload {
                    write!(f, ", {p}")?;
                }
                f.write_str(")")
            }
            ClaimBody::IsSettled { claim } => write!(f, "isSettled({claim})"),
            ClaimBody::CreateContract { script, args } => {
                write!(f, "contract({script}")?;
                for a in args {
                    write!(f, ", {a}")?;
                }
                f.write_str(")")
            }
            ClaimBody::CreateInstance { contract } => write!(f, "instance({contract})"),
            ClaimBody::Call {
                target,
                block,
                args,
            } => {
                write!(f, "{target}.{block}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ClaimBody::Apply { inner } => write!(f, "apply[{} claims]", inner.len()),
            ClaimBody::Cond { cond, then } => write!(f, "if({cond})[{} claims]", then.len()),
        }
    }
}
