//! Replicated settlement state and claim application.
//!
//! Every replica maintains the same `GlobalState` and mutates it only
//! by settling claims. A claim is an atomic conditional update:
//! *validity* and *applicability* are the same judgement, so a replica
//! never needs to ask whether a claim it could apply was allowed. A
//! block settles all of its claims in order or none of them.
//!
//! Replicas settle independent blocks in different orders, so every
//! state transition here must commute with transitions touching
//! disjoint accounts. That is why claims carry expressions evaluated
//! at settlement time against this state, and why errors are plain
//! verdicts instead of panics: an invalid claim is a normal outcome.
//!
//! Settling also records digests. The settled set holds the structural
//! digest of every top-level claim of every settled block, plus the
//! content digest of top-level data claims (so `isSettled` can match a
//! data claim issued by someone else). Claims that only exist as the
//! expansion of a call, constructor, or apply are not recorded: the
//! expansion is an implementation detail of the enclosing claim, and
//! conditional branches must leave no trace at all, or replicas that
//! were forced to settle a stuck block inertly (see
//! `ValidatorState`'s nonce resolution) could never agree with the
//! replicas that settled it normally.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;

use crate::address::{derive_address, Address, DerivedKind};
use crate::claim::{Claim, ClaimBlock, ClaimBody, WriteOp};
use crate::codec::Encode;
use crate::digest::{digest_tagged, Digest};
use crate::expr::{data_content_digest, eval, split_data_args, Env, EvalError};
use crate::setl::compile::{self, CompileError, Frame};
use crate::value::Value;

/// Maximum nesting of claim expansions (calls within constructors
/// within calls, ...). Scripts have no loops, so any chain deeper than
/// this is a pathological block, not a program.
const MAX_DEPTH: u32 = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum AccountKind {
    User,
    Contract,
    Instance,
}

/// Per-account state. Protocol sequencing data (nonce, pending,
/// presettled) lives in `ValidatorState`, not here: this is the part
/// every replica agrees on once the same claims have settled.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AccountData {
    pub kind: AccountKind,
    /// Controlling user: itself for user accounts, the creating user
    /// for contracts and instances. The owner's key signs this
    /// account's messages.
    pub owner: Address,
    /// For instances, the contract they instantiate.
    pub parent: Option<Address>,
    /// For contracts, the script they were created from.
    pub script: Option<Digest>,
    /// For contracts, the values bound to the script's template
    /// parameters at creation.
    pub template_args: Vec<Value>,
    pub balance: u128,
    pub fields: BTreeMap<String, Value>,
    /// How many accounts this account has created; the derivation
    /// counter for the next contract or instance address.
    pub created: u64,
}

impl AccountData {
    fn fresh_user(addr: Address) -> AccountData {
        AccountData {
            kind: AccountKind::User,
            owner: addr,
            parent: None,
            script: None,
            template_args: Vec::new(),
            balance: 0,
            fields: BTreeMap::new(),
            created: 0,
        }
    }

    /// True when this entry carries no information beyond "a user
    /// account exists", which is true of every address that was never
    /// touched. Such entries are invisible to the state digest, so
    /// merely materializing an account never makes replicas diverge.
    fn is_default_user(&self, addr: &Address) -> bool {
        self.kind == AccountKind::User
            && self.owner == *addr
            && self.parent.is_none()
            && self.script.is_none()
            && self.template_args.is_empty()
            && self.balance == 0
            && self.fields.is_empty()
            && self.created == 0
    }
}

impl Encode for AccountData {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(match self.kind {
            AccountKind::User => 0,
            AccountKind::Contract => 1,
            AccountKind::Instance => 2,
        });
        self.owner.encode_into(out);
        self.parent.encode_into(out);
        self.script.encode_into(out);
        self.template_args.encode_into(out);
        self.balance.encode_into(out);
        self.fields.encode_into(out);
        self.created.encode_into(out);
    }
}

/// A registered script: the exact source that settled plus its parse,
/// cached because compilation happens on every call.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScriptEntry {
    pub source: String,
    pub parsed: Arc<crate::setl::ast::Script>,
}

/// Digest under which a script source is registered and later named by
/// contract creation claims.
pub fn script_digest(source: &str) -> Digest {
    digest_tagged("script", source.as_bytes())
}

/// Ambient facts a claim may consult: the enclosing message's
/// timestamp (`time` in scripts) and, before settlement, the set of
/// verifier co-signers on the message.
///
/// `verifiers` is `None` at settlement on purpose. Quorum checks are
/// the sender's burden when the message is validated; once a claim is
/// settled (or certified by someone else), its `verify` is vacuous.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EvalContext {
    pub timestamp: i64,
    pub verifiers: Option<BTreeSet<Address>>,
}

impl EvalContext {
    /// Settlement context: verification is vacuous.
    pub fn at(timestamp: i64) -> EvalContext {
        EvalContext {
            timestamp,
            verifiers: None,
        }
    }

    /// Validation context: `verify` counts these co-signers.
    pub fn with_verifiers(timestamp: i64, verifiers: BTreeSet<Address>) -> EvalContext {
        EvalContext {
            timestamp,
            verifiers: Some(verifiers),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ClaimError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("guard is false")]
    GuardFailed,
    #[error("{have} of {need} required signers present")]
    QuorumNotMet { have: usize, need: usize },
    #[error("referenced claim not settled")]
    NotSettled(Digest),
    #[error("transfer amount must be a non-negative integer")]
    AmountRange,
    #[error("insufficient balance: have {have}, need {need}")]
    InsufficientBalance { have: u128, need: u128 },
    #[error("balance overflow on {0}")]
    BalanceOverflow(Address),
    #[error("unknown script {0}")]
    UnknownScript(Digest),
    #[error("script does not parse: {0}")]
    InvalidScript(String),
    #[error("script registration payload must be a single string")]
    BadScriptPayload,
    #[error("{addr} is not a {expected} account")]
    WrongAccountKind {
        addr: Address,
        expected: &'static str,
    },
    #[error("{issuer} may not write fields of {target}")]
    UnauthorizedWrite { issuer: Address, target: Address },
    #[error("field `{field}`: expected {expected}, got {got}")]
    FieldType {
        field: String,
        expected: &'static str,
        got: &'static str,
    },
    #[error("field `{0}` is unset")]
    UnsetField(String),
    #[error("{op}: expected {expected}, got {got}")]
    WrongType {
        op: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    #[error("claim nesting too deep")]
    TooDeep,
}

/// A block failure, pinned to the claim that caused it.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("claim {index}: {source}")]
pub struct BlockError {
    pub index: usize,
    #[source]
    pub source: ClaimError,
}

/// The replicated state: accounts, the settled-claim digest set, and
/// registered scripts. All mutation goes through claim application,
/// which works on a scratch copy, so a failed apply can simply be
/// dropped; the public API takes and returns immutable snapshots.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GlobalState {
    accounts: BTreeMap<Address, AccountData>,
    settled: BTreeSet<Digest>,
    scripts: BTreeMap<Digest, ScriptEntry>,
}

impl GlobalState {
    pub fn genesis<I: IntoIterator<Item = (Address, u128)>>(balances: I) -> GlobalState {
        let mut state = GlobalState::default();
        for (addr, amount) in balances {
            state.account_mut(addr).balance = amount;
        }
        state
    }

    pub fn account(&self, addr: &Address) -> Option<&AccountData> {
        self.accounts.get(addr)
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &AccountData)> {
        self.accounts.iter()
    }

    /// Owner of an account. An address never seen is a user account
    /// owning itself.
    pub fn owner_of(&self, addr: &Address) -> Address {
        self.accounts.get(addr).map_or(*addr, |a| a.owner)
    }

    pub fn balance(&self, addr: &Address) -> u128 {
        self.accounts.get(addr).map_or(0, |a| a.balance)
    }

    pub fn field(&self, addr: &Address, name: &str) -> Option<&Value> {
        self.accounts.get(addr).and_then(|a| a.fields.get(name))
    }

    pub fn is_settled(&self, digest: &Digest) -> bool {
        self.settled.contains(digest)
    }

    pub fn settled(&self) -> &BTreeSet<Digest> {
        &self.settled
    }

    pub fn script(&self, digest: &Digest) -> Option<&ScriptEntry> {
        self.scripts.get(digest)
    }

    /// Digest of the whole state, for replica comparison. Default user
    /// entries are skipped so that merely having materialized an
    /// account (a zero transfer, a failed apply's scratch copy) can
    /// never distinguish two replicas.
    pub fn digest(&self) -> Digest {
        let mut buf = Vec::new();
        let live: Vec<_> = self
            .accounts
            .iter()
            .filter(|(addr, data)| !data.is_default_user(addr))
            .collect();
        (live.len() as u32).encode_into(&mut buf);
        for (addr, data) in live {
            addr.encode_into(&mut buf);
            data.encode_into(&mut buf);
        }
        self.settled.encode_into(&mut buf);
        (self.scripts.len() as u32).encode_into(&mut buf);
        for (digest, entry) in &self.scripts {
            digest.encode_into(&mut buf);
            entry.source.encode_into(&mut buf);
        }
        digest_tagged("state", &buf)
    }

    /// Validity is applicability: a claim is valid in this state iff
    /// applying it succeeds.
    pub fn is_valid(&self, claim: &Claim, ctx: &EvalContext) -> bool {
        self.apply_claim(claim, ctx).is_ok()
    }

    pub fn is_valid_block(&self, block: &ClaimBlock, ctx: &EvalContext) -> bool {
        self.apply_block(block, ctx).is_ok()
    }

    /// Settles one claim, returning the successor state. The claim's
    /// structural digest is recorded; data content digests are
    /// recorded by the claim's own application.
    pub fn apply_claim(&self, claim: &Claim, ctx: &EvalContext) -> Result<GlobalState, ClaimError> {
        let mut next = self.clone();
        next.apply_claim_at(claim, ctx, 0, true)?;
        next.settled.insert(claim.digest());
        Ok(next)
    }

    /// Settles a whole block atomically: either every claim applies in
    /// order or the error identifies the first that does not.
    pub fn apply_block(
        &self,
        block: &ClaimBlock,
        ctx: &EvalContext,
    ) -> Result<GlobalState, BlockError> {
        let mut next = self.clone();
        for (index, claim) in block.claims().iter().enumerate() {
            next.apply_claim_at(claim, ctx, 0, true)
                .map_err(|source| BlockError { index, source })?;
            next.settled.insert(claim.digest());
        }
        Ok(next)
    }

    /// Records a block's digests without applying any effect: the
    /// structural digest of each top-level claim, plus content digests
    /// of top-level data claims when their payload still evaluates.
    ///
    /// This is the inert half of forced nonce resolution. A replica
    /// whose divergent settlement order left this block permanently
    /// invalid must still account for it exactly like the replicas
    /// that settled it normally, or their settled sets (and hence
    /// state digests) could never re-converge.
    pub fn mark_settled(&self, block: &ClaimBlock, ctx: &EvalContext) -> GlobalState {
        let mut next = self.clone();
        for claim in block.claims() {
            next.settled.insert(claim.digest());
            if let ClaimBody::Data { tag, payload } = &claim.body {
                let content = {
                    let env = Env {
                        state: &next,
                        ctx,
                        issuer: claim.issuer,
                    };
                    let mut vals = Vec::with_capacity(payload.len() + 1);
                    if !tag.is_empty() {
                        vals.push(Value::Str(tag.clone()));
                    }
                    payload
                        .iter()
                        .try_fold(vals, |mut acc, e| {
                            acc.push(eval(e, &env)?);
                            Ok::<_, EvalError>(acc)
                        })
                        .ok()
                        .map(|vals| {
                            let (tag, payload) = split_data_args(&vals);
                            data_content_digest(&tag, &payload)
                        })
                };
                if let Some(digest) = content {
                    next.settled.insert(digest);
                }
            }
        }
        next
    }

    fn account_mut(&mut self, addr: Address) -> &mut AccountData {
        self.accounts
            .entry(addr)
            .or_insert_with(|| AccountData::fresh_user(addr))
    }

    fn env<'a>(&'a self, ctx: &'a EvalContext, issuer: Address) -> Env<'a> {
        Env {
            state: self,
            ctx,
            issuer,
        }
    }

    fn register_script(&mut self, source: &str) -> Result<Digest, ClaimError> {
        let digest = script_digest(source);
        if self.scripts.contains_key(&digest) {
            return Ok(digest);
        }
        let script = crate::setl::parse(source)
            .map_err(|e| ClaimError::InvalidScript(e.to_string()))?;
        self.scripts.insert(
            digest,
            ScriptEntry {
                source: source.to_string(),
                parsed: Arc::new(script),
            },
        );
        Ok(digest)
    }

    /// Applies one claim in place. On error the state may be partially
    /// modified; every caller works on a scratch clone and discards it
    /// on failure.
    ///
    /// `record` gates data content digests: true everywhere except
    /// inside a conditional branch, whose claims must settle without
    /// leaving a trace (the branch taken depends on settlement-time
    /// state, which other accounts cannot reconstruct).
    fn apply_claim_at(
        &mut self,
        claim: &Claim,
        ctx: &EvalContext,
        depth: u32,
        record: bool,
    ) -> Result<(), ClaimError> {
        if depth > MAX_DEPTH {
            return Err(ClaimError::TooDeep);
        }
        let issuer = claim.issuer;
        match &claim.body {
            ClaimBody::Transfer { to, value } => {
                let (to, amount) = {
                    let env = self.env(ctx, issuer);
                    let to_v = eval(to, &env)?;
                    let to = to_v.as_addr().ok_or(ClaimError::WrongType {
                        op: "transfer",
                        expected: "address",
                        got: to_v.type_name(),
                    })?;
                    let amount = match eval(value, &env)? {
                        Value::Int(n) => u128::try_from(&n).map_err(|_| ClaimError::AmountRange)?,
                        other => {
                            return Err(ClaimError::WrongType {
                                op: "transfer",
                                expected: "int",
                                got: other.type_name(),
                            })
                        }
                    };
                    (to, amount)
                };
                let have = self.balance(&issuer);
                if have < amount {
                    return Err(ClaimError::InsufficientBalance { have, need: amount });
                }
                self.account_mut(issuer).balance -= amount;
                let credit = self.account_mut(to);
                credit.balance = credit
                    .balance
                    .checked_add(amount)
                    .ok_or(ClaimError::BalanceOverflow(to))?;
                Ok(())
            }
            ClaimBody::FieldWrite {
                owner,
                field,
                index,
                op,
                value,
            } => {
                // An account writes its own fields; an instance also
                // writes its contract's. Compiled code can name
                // nothing else, so nothing else is authorized.
                let own = *owner == issuer
                    || self
                        .account(&issuer)
                        .is_some_and(|a| a.parent == Some(*owner));
                if !own {
                    return Err(ClaimError::UnauthorizedWrite {
                        issuer,
                        target: *owner,
                    });
                }
                let (key, val) = {
                    let env = self.env(ctx, issuer);
                    let key = match index {
                        Some(e) => Some(eval(e, &env)?),
                        None => None,
                    };
                    (key, eval(value, &env)?)
                };
                write_field(&mut self.account_mut(*owner).fields, field, key, *op, val)
            }
            ClaimBody::Guard { expr } => {
                let v = eval(expr, &self.env(ctx, issuer))?;
                match v {
                    Value::Bool(true) => Ok(()),
                    Value::Bool(false) => Err(ClaimError::GuardFailed),
                    other => Err(ClaimError::WrongType {
                        op: "guard",
                        expected: "bool",
                        got: other.type_name(),
                    }),
                }
            }
            ClaimBody::Verify { signers, quorum } => {
                // Vacuous at settlement: the co-signatures were the
                // message's to carry and the validator's to check.
                let Some(present) = &ctx.verifiers else {
                    return Ok(());
                };
                let env = self.env(ctx, issuer);
                let signers_v = eval(signers, &env)?;
                let set = match signers_v {
                    Value::Addr(a) => BTreeSet::from([a]),
                    Value::Set(items) => items
                        .into_iter()
                        .map(|v| {
                            v.as_addr().ok_or(ClaimError::WrongType {
                                op: "verify",
                                expected: "set of addresses",
                                got: "set",
                            })
                        })
                        .collect::<Result<_, _>>()?,
                    other => {
                        return Err(ClaimError::WrongType {
                            op: "verify",
                            expected: "address or set of addresses",
                            got: other.type_name(),
                        })
                    }
                };
                let need = match eval(quorum, &env)? {
                    Value::Int(n) => {
                        if n <= BigInt::from(0) {
                            0
                        } else {
                            usize::try_from(&n).unwrap_or(usize::MAX)
                        }
                    }
                    other => {
                        return Err(ClaimError::WrongType {
                            op: "verify",
                            expected: "int",
                            got: other.type_name(),
                        })
                    }
                };
                // The issuer's own signature is on the message itself,
                // so its owner counts without co-signing.
                let issuer_owner = self.owner_of(&issuer);
                let have = set
                    .iter()
                    .filter(|s| present.contains(s) || **s == issuer_owner)
                    .count();
                if have >= need {
                    Ok(())
                } else {
                    Err(ClaimError::QuorumNotMet { have, need })
                }
            }
            ClaimBody::Data { tag, payload } => {
                let vals = {
                    let env = self.env(ctx, issuer);
                    let mut vals = Vec::with_capacity(payload.len() + 1);
                    if !tag.is_empty() {
                        vals.push(Value::Str(tag.clone()));
                    }
                    for e in payload {
                        vals.push(eval(e, &env)?);
                    }
                    vals
                };
                // Re-split so the statement form and the claim(...)
                // expression agree on tag vs payload no matter how the
                // arguments were written.
                let (tag, payload) = split_data_args(&vals);
                if tag == "setl" {
                    match payload.as_slice() {
                        [Value::Str(source)] => {
                            self.register_script(source)?;
                        }
                        _ => return Err(ClaimError::BadScriptPayload),
                    }
                }
                if record {
                    self.settled.insert(data_content_digest(&tag, &payload));
                }
                Ok(())
            }
            ClaimBody::IsSettled { claim } => {
                let v = eval(claim, &self.env(ctx, issuer))?;
                let digest = match v {
                    Value::Digest(d) => d,
                    other => {
                        return Err(ClaimError::WrongType {
                            op: "isSettled",
                            expected: "digest",
                            got: other.type_name(),
                        })
                    }
                };
                if self.settled.contains(&digest) {
                    Ok(())
                } else {
                    Err(ClaimError::NotSettled(digest))
                }
            }
            ClaimBody::CreateContract { script, args } => {
                let entry = self
                    .scripts
                    .get(script)
                    .ok_or(ClaimError::UnknownScript(*script))?
                    .clone();
                let closed = compile::instantiate(&entry.parsed, args)?;
                let owner = self.owner_of(&issuer);
                let creator = self.account_mut(issuer);
                let counter = creator.created;
                creator.created += 1;
                let addr = derive_address(&issuer, counter, DerivedKind::Contract);
                self.accounts.insert(
                    addr,
                    AccountData {
                        kind: AccountKind::Contract,
                        owner,
                        parent: None,
                        script: Some(*script),
                        template_args: args.clone(),
                        balance: 0,
                        fields: BTreeMap::new(),
                        created: 0,
                    },
                );
                let ctor = compile::compile_ctor(
                    &closed,
                    Frame {
                        contract: addr,
                        instance: None,
                    },
                )?;
                for c in &ctor {
                    self.apply_claim_at(c, ctx, depth + 1, record)?;
                }
                Ok(())
            }
            ClaimBody::CreateInstance { contract } => {
                let (script_digest, template_args) = match self.account(contract) {
                    Some(data) if data.kind == AccountKind::Contract => match data.script {
                        Some(d) => (d, data.template_args.clone()),
                        None => {
                            return Err(ClaimError::WrongAccountKind {
                                addr: *contract,
                                expected: "contract",
                            })
                        }
                    },
                    _ => {
                        return Err(ClaimError::WrongAccountKind {
                            addr: *contract,
                            expected: "contract",
                        })
                    }
                };
                let entry = self
                    .scripts
                    .get(&script_digest)
                    .ok_or(ClaimError::UnknownScript(script_digest))?
                    .clone();
                let closed = compile::instantiate(&entry.parsed, &template_args)?;
                let owner = self.owner_of(&issuer);
                let creator = self.account_mut(issuer);
                let counter = creator.created;
                creator.created += 1;
                let addr = derive_address(&issuer, counter, DerivedKind::Instance);
                self.accounts.insert(
                    addr,
                    AccountData {
                        kind: AccountKind::Instance,
                        owner,
                        parent: Some(*contract),
                        script: None,
                        template_args: Vec::new(),
                        balance: 0,
                        fields: BTreeMap::new(),
                        created: 0,
                    },
                );
                let ctor = compile::compile_instance_ctor(
                    &closed,
                    Frame {
                        contract: *contract,
                        instance: Some(addr),
                    },
                )?;
                for c in &ctor {
                    self.apply_claim_at(c, ctx, depth + 1, record)?;
                }
                Ok(())
            }
            ClaimBody::Call {
                target,
                block,
                args,
            } => {
                let vals = {
                    let env = self.env(ctx, issuer);
                    args.iter()
                        .map(|e| eval(e, &env))
                        .collect::<Result<Vec<_>, _>>()?
                };
                let compiled = compile::compile_call(self, issuer, *target, block, &vals)?;
                for c in compiled.claims() {
                    self.apply_claim_at(c, ctx, depth + 1, record)?;
                }
                Ok(())
            }
            ClaimBody::Apply { inner } => {
                for c in inner {
                    self.apply_claim_at(c, ctx, depth + 1, record)?;
                }
                Ok(())
            }
            ClaimBody::Cond { cond, then } => {
                let v = eval(cond, &self.env(ctx, issuer))?;
                let taken = match v {
                    Value::Bool(b) => b,
                    other => {
                        return Err(ClaimError::WrongType {
                            op: "if",
                            expected: "bool",
                            got: other.type_name(),
                        })
                    }
                };
                if taken {
                    for c in then {
                        self.apply_claim_at(c, ctx, depth + 1, false)?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Applies a write op to one field. `key` selects a map entry;
/// read-modify-write ops demand the current value have the matching
/// shape. Missing fields default to the op's empty collection (or 0
/// under a key), except plain `+=`/`-=`, which require the field to
/// have been written: silently materializing a counter is how replicas
/// drift.
fn write_field(
    fields: &mut BTreeMap<String, Value>,
    field: &str,
    key: Option<Value>,
    op: WriteOp,
    val: Value,
) -> Result<(), ClaimError> {
    fn shape_err(field: &str, expected: &'static str, got: &Value) -> ClaimError {
        ClaimError::FieldType {
            field: field.to_string(),
            expected,
            got: got.type_name(),
        }
    }

    if let Some(key) = key {
        let entry = fields
            .entry(field.to_string())
            .or_insert_with(|| Value::Map(BTreeMap::new()));
        let Value::Map(map) = entry else {
            return Err(shape_err(field, "map", entry));
        };
        match op {
            WriteOp::Set => {
                map.insert(key, val);
            }
            WriteOp::Add | WriteOp::Sub => {
                let cur = map.get(&key).cloned().unwrap_or(Value::int(0));
                let next = combine(field, cur, op, val)?;
                map.insert(key, next);
            }
            WriteOp::Insert | WriteOp::Remove => {
                let slot = map.entry(key).or_insert_with(|| Value::Set(BTreeSet::new()));
                let Value::Set(set) = slot else {
                    return Err(shape_err(field, "set", slot));
                };
                if op == WriteOp::Insert {
                    set.insert(val);
                } else {
                    set.remove(&val);
                }
            }
            WriteOp::Push => {
                let slot = map.entry(key).or_insert_with(|| Value::List(Vec::new()));
                let Value::List(list) = slot else {
                    return Err(shape_err(field, "list", slot));
                };
                list.push(val);
            }
        }
        return Ok(());
    }

    match op {
        WriteOp::Set => {
            fields.insert(field.to_string(), val);
        }
        WriteOp::Add | WriteOp::Sub => {
            let cur = fields
                .get(field)
                .cloned()
                .ok_or_else(|| ClaimError::UnsetField(field.to_string()))?;
            let next = combine(field, cur, op, val)?;
            fields.insert(field.to_string(), next);
        }
        WriteOp::Insert | WriteOp::Remove => {
            let slot = fields
                .entry(field.to_string())
                .or_insert_with(|| Value::Set(BTreeSet::new()));
            let Value::Set(set) = slot else {
                return Err(shape_err(field, "set", slot));
            };
            if op == WriteOp::Insert {
                set.insert(val);
            } else {
                set.remove(&val);
            }
        }
        WriteOp::Push => {
            let slot = fields
                .entry(field.to_string())
                .or_insert_with(|| Value::List(Vec::new()));
            let Value::List(list) = slot else {
                return Err(shape_err(field, "list", slot));
            };
            list.push(val);
        }
    }
    Ok(())
}

fn combine(field: &str, cur: Value, op: WriteOp, val: Value) -> Result<Value, ClaimError> {
    match (op, cur, val) {
        (WriteOp::Add, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
        (WriteOp::Add, Value::Str(a), Value::Str(b)) => Ok(Value::Str(format!("{a}{b}"))),
        (WriteOp::Sub, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a - b)),
        (WriteOp::Add, cur, _) => Err(ClaimError::FieldType {
            field: field.to_string(),
            expected: "int or string",
            got: cur.type_name(),
        }),
        (_, cur, _) => Err(ClaimError::FieldType {
            field: field.to_string(),
            expected: "int",
            got: cur.type_name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claim::Claim;
    use crate::expr::Expr;

    fn addr(n: u8) -> Address {
        Address::from_bytes([n; 32])
    }

    #[test]
    fn transfer_moves_balance() {
        let alice = addr(1);
        let bob = addr(2);
        let s = GlobalState::genesis([(alice, 11)]);
        let ctx = EvalContext::at(0);

        let t = Claim::transfer(alice, bob, 10);
        let s2 = s.apply_claim(&t, &ctx).unwrap();
        assert_eq!(s2.balance(&alice), 1);
        assert_eq!(s2.balance(&bob), 10);
        assert!(s2.is_settled(&t.digest()));

        let too_much = Claim::transfer(alice, bob, 100);
        assert_eq!(
            s.apply_claim(&too_much, &ctx).unwrap_err(),
            ClaimError::InsufficientBalance { have: 11, need: 100 }
        );
    }

    #[test]
    fn untouched_accounts_are_invisible_to_the_digest() {
        let alice = addr(1);
        let empty = GlobalState::genesis([]);
        let with_default = GlobalState::genesis([(alice, 0)]);
        assert_eq!(empty.digest(), with_default.digest());
        assert_ne!(
            empty.digest(),
            GlobalState::genesis([(alice, 1)]).digest()
        );
    }

    #[test]
    fn block_is_atomic() {
        let alice = addr(1);
        let bob = addr(2);
        let s = GlobalState::genesis([(alice, 10)]);
        let ctx = EvalContext::at(0);
        let block = ClaimBlock::new(vec![
            Claim::transfer(alice, bob, 5),
            Claim::guard(alice, Expr::Lit(Value::Bool(false))),
        ])
        .unwrap();
        let err = s.apply_block(&block, &ctx).unwrap_err();
        assert_eq!(err.index, 1);
        assert!(matches!(err.source, ClaimError::GuardFailed));
        assert!(!s.is_valid_block(&block, &ctx));
    }

    #[test]
    fn data_claim_settles_content_digest() {
        let alice = addr(1);
        let s = GlobalState::default();
        let ctx = EvalContext::at(0);
        let c = Claim::data(alice, "greeting", vec![Value::Str("hello".into())]);
        let s2 = s.apply_claim(&c, &ctx).unwrap();
        let content = data_content_digest(
            "greeting",
            &[Value::Str("hello".into())],
        );
        assert!(s2.is_settled(&content));
        assert!(s2.is_settled(&c.digest()));

        let probe = Claim {
            issuer: addr(9),
            body: ClaimBody::IsSettled {
                claim: Expr::Lit(Value::Digest(content)),
            },
        };
        assert!(s2.is_valid(&probe, &ctx));
        assert!(!s.is_valid(&probe, &ctx));
    }

    #[test]
    fn conditional_branch_leaves_no_trace() {
        let alice = addr(1);
        let bob = addr(2);
        let ctx = EvalContext::at(0);
        let s = GlobalState::genesis([(alice, 5)]);
        let inner_transfer = Claim::transfer(alice, bob, 5);
        let inner_data = Claim::data(alice, "note", vec![Value::int(1)]);
        let c = Claim {
            issuer: alice,
            body: ClaimBody::Cond {
                cond: Expr::Lit(Value::Bool(true)),
                then: vec![inner_transfer.clone(), inner_data],
            },
        };
        let s2 = s.apply_claim(&c, &ctx).unwrap();
        assert_eq!(s2.balance(&bob), 5);
        assert!(s2.is_settled(&c.digest()));
        assert!(!s2.is_settled(&inner_transfer.digest()));
        assert!(!s2.is_settled(&data_content_digest("note", &[Value::int(1)])));
    }

    #[test]
    fn verify_counts_cosigners_and_issuer_owner() {
        let alice = addr(1);
        let bob = addr(2);
        let carol = addr(3);
        let s = GlobalState::default();
        let claim = Claim {
            issuer: alice,
            body: ClaimBody::Verify {
                signers: Expr::Lit(Value::Set(
                    [Value::Addr(alice), Value::Addr(bob), Value::Addr(carol)].into(),
                )),
                quorum: Expr::lit_int(2),
            },
        };
        // At settlement: vacuous.
        assert!(s.is_valid(&claim, &EvalContext::at(0)));
        // Validation: bob co-signed, alice is the issuer's owner.
        let ok = EvalContext::with_verifiers(0, BTreeSet::from([bob]));
        assert!(s.is_valid(&claim, &ok));
        // Only the owner: one short.
        let short = EvalContext::with_verifiers(0, BTreeSet::new());
        assert_eq!(
            s.apply_claim(&claim, &short).unwrap_err(),
            ClaimError::QuorumNotMet { have: 1, need: 2 }
        );
    }

    #[test]
    fn mark_settled_records_without_effects() {
        let alice = addr(1);
        let bob = addr(2);
        let ctx = EvalContext::at(0);
        let s = GlobalState::genesis([(alice, 10)]);
        let block = ClaimBlock::new(vec![
            Claim::transfer(alice, bob, 5),
            Claim::data(alice, "note", vec![Value::int(7)]),
        ])
        .unwrap();
        let inert = s.mark_settled(&block, &ctx);
        assert_eq!(inert.balance(&alice), 10);
        assert_eq!(inert.balance(&bob), 0);
        for claim in block.claims() {
            assert!(inert.is_settled(&claim.digest()));
        }
        assert!(inert.is_settled(&data_content_digest("note", &[Value::int(7)])));

        // Same digests a normal settlement of the block records.
        let applied = s.apply_block(&block, &ctx).unwrap();
        assert_eq!(applied.settled(), inert.settled());
    }
}
