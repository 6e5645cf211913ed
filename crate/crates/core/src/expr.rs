//! Expressions and their evaluation.
//!
//! Claims carry expressions, not pre-computed values: a compiled
//! contract block reads fields at *settlement* time, and replicas may
//! settle independent blocks in different orders. Anything that was
//! resolvable statically (template and block parameters, the executing
//! account's identity) is already a literal by the time an expression
//! reaches a claim.
//!
//! Evaluation is a pure function of (state, context, executing
//! account). It never panics on malformed input; a type error makes
//! the enclosing claim invalid.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;

use crate::address::Address;
use crate::codec::Encode;
use crate::digest::{digest_tagged, Digest};
use crate::state::{AccountKind, EvalContext, GlobalState};
use crate::value::Value;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    /// Set / list membership.
    In,
    /// Integer addition or string concatenation.
    Add,
    /// Integer subtraction.
    Sub,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    Lit(Value),
    /// Unresolved name. Before compilation: a template or block
    /// parameter, or a field. In a compiled claim: a field read of the
    /// executing account, falling back to its contract.
    Ident(String),
    /// Harness-level alias (`@name`). Must be substituted before a
    /// script is settled or compiled; evaluation rejects it.
    Alias(String),
    /// The executing contract account (the account itself for contract
    /// frames, the parent contract for instance frames).
    Contract,
    /// The executing instance account.
    Instance,
    /// The enclosing message's timestamp, identical on every replica.
    Time,
    /// `e.owner`: owner of the account `e` evaluates to.
    OwnerOf(Box<Expr>),
    /// `e.last`: last element of a list.
    Last(Box<Expr>),
    /// `size(e)`: element count of a set, list, map, or string.
    Size(Box<Expr>),
    /// `e[k]`: map lookup; missing fields read as empty maps and
    /// missing keys as 0 so read-modify-write updates need no init.
    Index(Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    ListLit(Vec<Expr>),
    /// `claim(a1, ..., ak)` in expression position: the content digest
    /// the matching data claim records when it settles.
    ClaimRef(Vec<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn lit_int(n: i64) -> Expr {
        Expr::Lit(Value::int(n))
    }

    pub fn lit_addr(a: Address) -> Expr {
        Expr::Lit(Value::Addr(a))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("unresolved alias `@{0}`")]
    UnresolvedAlias(String),
    #[error("{op}: expected {expected}, got {got}")]
    Type {
        op: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    #[error("last of empty list")]
    EmptyList,
    #[error("no such account {0}")]
    NoAccount(Address),
    #[error("no contract in scope")]
    NoContract,
    #[error("no instance in scope")]
    NoInstance,
}

/// Evaluation frame: the state being read, the message context, and
/// the account the enclosing claim executes as.
pub struct Env<'a> {
    pub state: &'a GlobalState,
    pub ctx: &'a EvalContext,
    pub issuer: Address,
}

impl<'a> Env<'a> {
    /// The contract account of the frame: the issuer itself when it is
    /// a contract, its parent when it is an instance.
    fn contract_addr(&self) -> Result<Address, EvalError> {
        let acct = self
            .state
            .account(&self.issuer)
            .ok_or(EvalError::NoAccount(self.issuer))?;
        match acct.kind {
            AccountKind::Contract => Ok(self.issuer),
            AccountKind::Instance => acct.parent.ok_or(EvalError::NoContract),
            AccountKind::User => Err(EvalError::NoContract),
        }
    }

    /// Reads a field: the issuer's own first, then (for instances) the
    /// parent contract's.
    fn read_field(&self, name: &str) -> Result<Value, EvalError> {
        if let Some(acct) = self.state.account(&self.issuer) {
            if let Some(v) = acct.fields.get(name) {
                return Ok(v.clone());
            }
            if acct.kind == AccountKind::Instance {
                if let Some(parent) = acct.parent.and_then(|p| self.state.account(&p)) {
                    if let Some(v) = parent.fields.get(name) {
                        return Ok(v.clone());
                    }
                }
            }
        }
        Err(EvalError::Unbound(name.to_string()))
    }

    /// Like `read_field` but yields None instead of an unbound error,
    /// for the contexts that default missing fields.
    fn read_field_opt(&self, name: &str) -> Option<Value> {
        self.read_field(name).ok()
    }
}

fn type_err(op: &'static str, expected: &'static str, got: &Value) -> EvalError {
    EvalError::Type {
        op,
        expected,
        got: got.type_name(),
    }
}

/// Content digest of a data claim with the given tag and evaluated
/// payload. Issuer-independent on purpose: one account settles the
/// claim, any other may check it settled.
pub fn data_content_digest(tag: &str, payload: &[Value]) -> Digest {
    let mut buf = Vec::new();
    (tag.to_string()).encode_into(&mut buf);
    (payload.len() as u32).encode_into(&mut buf);
    for v in payload {
        v.encode_into(&mut buf);
    }
    digest_tagged("data", &buf)
}

/// Splits `claim(...)` arguments into the data-claim tag and payload:
/// a leading string literal is the tag, everything else is payload.
pub fn split_data_args(args: &[Value]) -> (String, Vec<Value>) {
    match args.split_first() {
        Some((Value::Str(tag), rest)) => (tag.clone(), rest.to_vec()),
        _ => (String::new(), args.to_vec()),
    }
}

pub fn eval(expr: &Expr, env: &Env) -> Result<Value, EvalError> {
    match expr {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Ident(name) => env.read_field(name),
        Expr::Alias(name) => Err(EvalError::UnresolvedAlias(name.clone())),
        Expr::Contract => env.contract_addr().map(Value::Addr),
        Expr::Instance => {
            let acct = env
                .state
                .account(&env.issuer)
                .ok_or(EvalError::NoAccount(env.issuer))?;
            match acct.kind {
                AccountKind::Instance => Ok(Value::Addr(env.issuer)),
                _ => Err(EvalError::NoInstance),
            }
        }
        Expr::Time => Ok(Value::Int(BigInt::from(env.ctx.timestamp))),
        Expr::OwnerOf(e) => {
            let v = eval(e, env)?;
            let addr = v.as_addr().ok_or_else(|| type_err("owner", "address", &v))?;
            // Unknown accounts are user accounts that own themselves.
            Ok(Value::Addr(env.state.owner_of(&addr)))
        }
        Expr::Last(e) => {
            let v = eval(e, env)?;
            match v {
                Value::List(items) => items.last().cloned().ok_or(EvalError::EmptyList),
                other => Err(type_err("last", "list", &other)),
            }
        }
        Expr::Size(e) => {
            let v = eval(e, env)?;
            let n = match &v {
                Value::Set(s) => s.len(),
                Value::List(l) => l.len(),
                Value::Map(m) => m.len(),
                Value::Str(s) => s.chars().count(),
                other => return Err(type_err("size", "set, list, map, or string", other)),
            };
            Ok(Value::Int(BigInt::from(n)))
        }
        Expr::Index(base, key) => {
            let k = eval(key, env)?;
            // A missing map field reads as empty, and a missing key as
            // 0, so `m[k] += v` works without initialization.
            let map = match base.as_ref() {
                Expr::Ident(name) => match env.read_field_opt(name) {
                    None => return Ok(Value::int(0)),
                    Some(v) => v,
                },
                _ => eval(base, env)?,
            };
            match map {
                Value::Map(entries) => Ok(entries.get(&k).cloned().unwrap_or(Value::int(0))),
                other => Err(type_err("index", "map", &other)),
            }
        }
        Expr::SetLit(items) => {
            let mut out = BTreeSet::new();
            for e in items {
                out.insert(eval(e, env)?);
            }
            Ok(Value::Set(out))
        }
        Expr::ListLit(items) => {
            let mut out = Vec::with_capacity(items.len());
            for e in items {
                out.push(eval(e, env)?);
            }
            Ok(Value::List(out))
        }
        Expr::ClaimRef(args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval(a, env)?);
            }
            let (tag, payload) = split_data_args(&vals);
            Ok(Value::Digest(data_content_digest(&tag, &payload)))
        }
        Expr::Not(e) => {
            let v = eval(e, env)?;
            match v {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => Err(type_err("not", "bool", &other)),
            }
        }
        Expr::Bin(op, l, r) => eval_bin(*op, l, r, env),
    }
}

fn eval_bin(op: BinOp, l: &Expr, r: &Expr, env: &Env) -> Result<Value, EvalError> {
    // `and`/`or` short-circuit: the right side may only be meaningful
    // when the left decides (a tie-break comparing an address field
    // that starts out as an integer sentinel, for example).
    if let BinOp::And | BinOp::Or = op {
        let lv = eval(l, env)?;
        let lb = lv
            .as_bool()
            .ok_or_else(|| type_err("and/or", "bool", &lv))?;
        match (op, lb) {
            (BinOp::And, false) => return Ok(Value::Bool(false)),
            (BinOp::Or, true) => return Ok(Value::Bool(true)),
            _ => {}
        }
        let rv = eval(r, env)?;
        return match rv {
            Value::Bool(b) => Ok(Value::Bool(b)),
            other => Err(type_err("and/or", "bool", &other)),
        };
    }

    let lv = eval(l, env)?;
    let rv = eval(r, env)?;
    match op {
        BinOp::Eq => Ok(Value::Bool(lv == rv)),
        // Ordered comparison uses the canonical total order, so it is
        // defined across kinds (and Int < Infinity in particular).
        BinOp::Lt => Ok(Value::Bool(lv < rv)),
        BinOp::Le => Ok(Value::Bool(lv <= rv)),
        BinOp::Gt => Ok(Value::Bool(lv > rv)),
        BinOp::Ge => Ok(Value::Bool(lv >= rv)),
        BinOp::In => match &rv {
            Value::Set(s) => Ok(Value::Bool(s.contains(&lv))),
            Value::List(items) => Ok(Value::Bool(items.contains(&lv))),
            other => Err(type_err("in", "set or list", other)),
        },
        BinOp::Add => match (&lv, &rv) {
            (Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
            (Value::Str(a), Value::Str(b)) => Ok(Value::Str(format!("{a}{b}"))),
            (Value::Int(_), other) | (other, _) => Err(type_err("+", "int or string", other)),
        },
        BinOp::Sub => match (&lv, &rv) {
            (Value::Int(a), Value::Int(b)) => Ok(Value::Int(a - b)),
            (Value::Int(_), other) | (other, _) => Err(type_err("-", "int", other)),
        },
        BinOp::And | BinOp::Or => unreachable!("handled above"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::setl::pretty::fmt_expr(self, f)
    }
}
