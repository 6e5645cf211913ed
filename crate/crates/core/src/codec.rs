//! Canonical binary encoding.
//!
//! Every digest and every signature in the system is computed over
//! this encoding, so it must be injective and canonical: one value,
//! one byte string. The decoder enforces canonicity — set and map
//! elements strictly ascending, integers without trailing zero limbs,
//! booleans exactly 0 or 1 — so `decode(encode(x)) == x` and
//! `encode(decode(b)) == b` both hold wherever decoding succeeds.
//!
//! Layout rules (see docs/wire-format.md for the full table):
//! * integers little-endian; lengths and counts are u32
//! * enums start with a one-byte variant tag
//! * arbitrary-precision integers: sign byte (0 zero / 1 positive /
//!   2 negative), u32 magnitude length, magnitude bytes little-endian
//!   with no trailing zero
//! * strings: u32 byte length + UTF-8 bytes
//! * sequences: u32 count + elements; sets and maps in ascending order
//!
//! The decoder is meant for untrusted input: allocations are bounded
//! by the remaining input length and recursion is depth-capped.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, Sign};

use crate::address::Address;
use crate::claim::{Claim, ClaimBlock, ClaimBody, WriteOp};
use crate::digest::Digest;
use crate::expr::{BinOp, Expr};
use crate::setl::ast::{AssignOp, Stmt};
use crate::value::Value;

pub trait Encode {
    fn encode_into(&self, out: &mut Vec<u8>);

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("unexpected end of input")]
    Eof,
    #[error("bad {what} tag {tag}")]
    BadTag { what: &'static str, tag: u8 },
    #[error("non-canonical {0}")]
    NonCanonical(&'static str),
    #[error("invalid utf-8 in string")]
    Utf8,
    #[error("trailing bytes after value")]
    Trailing,
    #[error("nesting too deep")]
    TooDeep,
    #[error("length exceeds input")]
    LengthOverflow,
}

const MAX_DEPTH: u32 = 64;

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
    depth: u32,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Decoder<'a> {
        Decoder {
            buf,
            pos: 0,
            depth: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::Eof);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn i64(&mut self) -> Result<i64, DecodeError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn u128(&mut self) -> Result<u128, DecodeError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }

    /// Reads a u32 length that must fit in the remaining input when
    /// each element takes at least `min_elem_size` bytes; this bounds
    /// allocation by input size.
    pub fn len(&mut self, min_elem_size: usize) -> Result<usize, DecodeError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_elem_size.max(1)) > self.remaining() {
            return Err(DecodeError::LengthOverflow);
        }
        Ok(n)
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let n = self.len(1)?;
        Ok(self.take(n)?.to_vec())
    }

    fn enter(&mut self) -> Result<(), DecodeError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(DecodeError::TooDeep);
        }
        Ok(())
    }

    fn exit(&mut self) {
        self.depth -= 1;
    }
}

pub trait Decode: Sized {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError>;
}

/// Decodes a value that must consume the whole input.
pub fn decode_exact<T: Decode>(bytes: &[u8]) -> Result<T, DecodeError> {
    let mut d = Decoder::new(bytes);
    let v = T::decode_from(&mut d)?;
    if d.remaining() != 0 {
        return Err(DecodeError::Trailing);
    }
    Ok(v)
}

// ---- primitives ----

impl Encode for u32 {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl Encode for u64 {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl Encode for i64 {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl Encode for u128 {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl Encode for String {
    fn encode_into(&self, out: &mut Vec<u8>) {
        (self.len() as u32).encode_into(out);
        out.extend_from_slice(self.as_bytes());
    }
}

impl Decode for String {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = d.len(1)?;
        let raw = d.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::Utf8)
    }
}

impl Encode for Vec<u8> {
    fn encode_into(&self, out: &mut Vec<u8>) {
        (self.len() as u32).encode_into(out);
        out.extend_from_slice(self);
    }
}

impl Decode for Vec<u8> {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        d.bytes()
    }
}

impl Encode for Address {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(self.as_bytes());
    }
}

impl Decode for Address {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Address(d.take(32)?.try_into().unwrap()))
    }
}

impl Encode for Digest {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(self.as_bytes());
    }
}

impl Decode for Digest {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Digest(d.take(32)?.try_into().unwrap()))
    }
}

impl Encode for BigInt {
    fn encode_into(&self, out: &mut Vec<u8>) {
        let (sign, mag) = self.to_bytes_le();
        // to_bytes_le yields no trailing zeros (zero yields [0]).
        match sign {
            Sign::NoSign => {
                out.push(0);
                0u32.encode_into(out);
            }
            Sign::Plus => {
                out.push(1);
                mag.encode_into(out);
            }
            Sign::Minus => {
                out.push(2);
                mag.encode_into(out);
            }
        }
    }
}

impl Decode for BigInt {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let sign = d.u8()?;
        let mag = d.bytes()?;
        match sign {
            0 => {
                if !mag.is_empty() {
                    return Err(DecodeError::NonCanonical("zero with magnitude"));
                }
                Ok(BigInt::from(0))
            }
            1 | 2 => {
                if mag.is_empty() || *mag.last().unwrap() == 0 {
                    return Err(DecodeError::NonCanonical("integer magnitude"));
                }
                let s = if sign == 1 { Sign::Plus } else { Sign::Minus };
                Ok(BigInt::from_bytes_le(s, &mag))
            }
            t => Err(DecodeError::BadTag {
                what: "integer sign",
                tag: t,
            }),
        }
    }
}

impl<T: Encode> Encode for Option<T> {
    fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            None => out.push(0),
            Some(v) => {
                out.push(1);
                v.encode_into(out);
            }
        }
    }
}

impl<T: Decode> Decode for Option<T> {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        match d.u8()? {
            0 => Ok(None),
            1 => Ok(Some(T::decode_from(d)?)),
            t => Err(DecodeError::BadTag {
                what: "option",
                tag: t,
            }),
        }
    }
}

impl<T: Encode> Encode for Vec<T> {
    fn encode_into(&self, out: &mut Vec<u8>) {
        (self.len() as u32).encode_into(out);
        for item in self {
            item.encode_into(out);
        }
    }
}

impl<T: Decode> Decode for Vec<T> {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = d.len(1)?;
        let mut out = Vec::with_capacity(n.min(d.remaining()));
        for _ in 0..n {
            out.push(T::decode_from(d)?);
        }
        Ok(out)
    }
}

impl<T: Encode + Ord> Encode for BTreeSet<T> {
    fn encode_into(&self, out: &mut Vec<u8>) {
        (self.len() as u32).encode_into(out);
        for item in self {
            item.encode_into(out);
        }
    }
}

impl<T: Decode + Ord> Decode for BTreeSet<T> {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = d.len(1)?;
        let mut out = BTreeSet::new();
        for _ in 0..n {
            let item = T::decode_from(d)?;
            if let Some(max) = out.iter().next_back() {
                if *max >= item {
                    return Err(DecodeError::NonCanonical("set order"));
                }
            }
            out.insert(item);
        }
        Ok(out)
    }
}

impl<K: Encode + Ord, V: Encode> Encode for BTreeMap<K, V> {
    fn encode_into(&self, out: &mut Vec<u8>) {
        (self.len() as u32).encode_into(out);
        for (k, v) in self {
            k.encode_into(out);
            v.encode_into(out);
        }
    }
}

impl<K: Decode + Ord, V: Decode> Decode for BTreeMap<K, V> {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = d.len(1)?;
        let mut out = BTreeMap::new();
        for _ in 0..n {
            let k = K::decode_from(d)?;
            if let Some((max, _)) = out.iter().next_back() {
                if *max >= k {
                    return Err(DecodeError::NonCanonical("map key order"));
                }
            }
            let v = V::decode_from(d)?;
            out.insert(k, v);
        }
        Ok(out)
    }
}

// ---- values ----

impl Encode for Value {
    fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Value::Bool(b) => {
                out.push(0);
                out.push(*b as u8);
            }
            Value::Int(n) => {
                out.push(1);
                n.encode_into(out);
            }
            Value::Infinity => out.push(2),
            Value::Str(s) => {
                out.push(3);
                s.encode_into(out);
            }
            Value::Bytes(b) => {
                out.push(4);
                b.encode_into(out);
            }
            Value::Addr(a) => {
                out.push(5);
                a.encode_into(out);
            }
            Value::Digest(d) => {
                out.push(6);
                d.encode_into(out);
            }
            Value::Set(items) => {
                out.push(7);
                items.encode_into(out);
            }
            Value::List(items) => {
                out.push(8);
                items.encode_into(out);
            }
            Value::Map(entries) => {
                out.push(9);
                entries.encode_into(out);
            }
            Value::Code(stmts) => {
                out.push(10);
                stmts.encode_into(out);
            }
        }
    }
}

impl Decode for Value {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        d.enter()?;
        let v = match d.u8()? {
            0 => match d.u8()? {
                0 => Value::Bool(false),
                1 => Value::Bool(true),
                t => {
                    return Err(DecodeError::BadTag {
                        what: "bool",
                        tag: t,
                    })
                }
            },
            1 => Value::Int(BigInt::decode_from(d)?),
            2 => Value::Infinity,
            3 => Value::Str(String::decode_from(d)?),
            4 => Value::Bytes(Vec::<u8>::decode_from(d)?),
            5 => Value::Addr(Address::decode_from(d)?),
            6 => Value::Digest(Digest::decode_from(d)?),
            7 => Value::Set(BTreeSet::decode_from(d)?),
            8 => Value::List(Vec::decode_from(d)?),
            9 => Value::Map(BTreeMap::decode_from(d)?),
            10 => Value::Code(Vec::decode_from(d)?),
            t => {
                return Err(DecodeError::BadTag {
                    what: "value",
                    tag: t,
                })
            }
        };
        d.exit();
        Ok(v)
    }
}

// ---- expressions ----

impl Encode for BinOp {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(match self {
            BinOp::And => 0,
            BinOp::Or => 1,
            BinOp::Eq => 2,
            BinOp::Lt => 3,
            BinOp::Le => 4,
            BinOp::Gt => 5,
            BinOp::Ge => 6,
            BinOp::In => 7,
            BinOp::Add => 8,
            BinOp::Sub => 9,
        });
    }
}

impl Decode for BinOp {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(match d.u8()? {
            0 => BinOp::And,
            1 => BinOp::Or,
            2 => BinOp::Eq,
            3 => BinOp::Lt,
            4 => BinOp::Le,
            5 => BinOp::Gt,
            6 => BinOp::Ge,
            7 => BinOp::In,
            8 => BinOp::Add,
            9 => BinOp::Sub,
            t => {
                return Err(DecodeError::BadTag {
                    what: "binop",
                    tag: t,
                })
            }
        })
    }
}

impl Encode for Expr {
    fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Expr::Lit(v) => {
                out.push(0);
                v.encode_into(out);
            }
            Expr::Ident(s) => {
                out.push(1);
                s.encode_into(out);
            }
            Expr::Alias(s) => {
                out.push(2);
                s.encode_into(out);
            }
            Expr::Contract => out.push(3),
            Expr::Instance => out.push(4),
            Expr::Time => out.push(5),
            Expr::OwnerOf(e) => {
                out.push(6);
                e.encode_into(out);
            }
            Expr::Last(e) => {
                out.push(7);
                e.encode_into(out);
            }
            Expr::Size(e) => {
                out.push(8);
                e.encode_into(out);
            }
            Expr::Index(b, k) => {
                out.push(9);
                b.encode_into(out);
                k.encode_into(out);
            }
            Expr::SetLit(items) => {
                out.push(10);
                items.encode_into(out);
            }
            Expr::ListLit(items) => {
                out.push(11);
                items.encode_into(out);
            }
            Expr::ClaimRef(args) => {
                out.push(12);
                args.encode_into(out);
            }
            Expr::Not(e) => {
                out.push(13);
                e.encode_into(out);
            }
            Expr::Bin(op, l, r) => {
                out.push(14);
                op.encode_into(out);
                l.encode_into(out);
                r.encode_into(out);
            }
        }
    }
}

impl Decode for Expr {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        d.enter()?;
        let e = match d.u8()? {
            0 => Expr::Lit(Value::decode_from(d)?),
            1 => Expr::Ident(String::decode_from(d)?),
            2 => Expr::Alias(String::decode_from(d)?),
            3 => Expr::Contract,
            4 => Expr::Instance,
            5 => Expr::Time,
            6 => Expr::OwnerOf(Box::new(Expr::decode_from(d)?)),
            7 => Expr::Last(Box::new(Expr::decode_from(d)?)),
            8 => Expr::Size(Box::new(Expr::decode_from(d)?)),
            9 => Expr::Index(
                Box::new(Expr::decode_from(d)?),
                Box::new(Expr::decode_from(d)?),
            ),
            10 => Expr::SetLit(Vec::decode_from(d)?),
            11 => Expr::ListLit(Vec::decode_from(d)?),
            12 => Expr::ClaimRef(Vec::decode_from(d)?),
            13 => Expr::Not(Box::new(Expr::decode_from(d)?)),
            14 => Expr::Bin(
                BinOp::decode_from(d)?,
                Box::new(Expr::decode_from(d)?),
                Box::new(Expr::decode_from(d)?),
            ),
            t => {
                return Err(DecodeError::BadTag {
                    what: "expr",
                    tag: t,
                })
            }
        };
        d.exit();
        Ok(e)
    }
}

// ---- statements ----

impl Encode for AssignOp {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(match self {
            AssignOp::Set => 0,
            AssignOp::Add => 1,
            AssignOp::Sub => 2,
            AssignOp::Insert => 3,
            AssignOp::Remove => 4,
            AssignOp::Push => 5,
        });
    }
}

impl Decode for AssignOp {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(match d.u8()? {
            0 => AssignOp::Set,
            1 => AssignOp::Add,
            2 => AssignOp::Sub,
            3 => AssignOp::Insert,
            4 => AssignOp::Remove,
            5 => AssignOp::Push,
            t => {
                return Err(DecodeError::BadTag {
                    what: "assign op",
                    tag: t,
                })
            }
        })
    }
}

impl Encode for Stmt {
    fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Stmt::Guard(e) => {
                out.push(0);
                e.encode_into(out);
            }
            Stmt::Assign {
                field,
                index,
                op,
                value,
            } => {
                out.push(1);
                field.encode_into(out);
                index.encode_into(out);
                op.encode_into(out);
                value.encode_into(out);
            }
            Stmt::Verify { signers, quorum } => {
                out.push(2);
                signers.encode_into(out);
                quorum.encode_into(out);
            }
            Stmt::Transfer { to, value } => {
                out.push(3);
                to.encode_into(out);
                value.encode_into(out);
            }
            Stmt::Claim { args } => {
                out.push(4);
                args.encode_into(out);
            }
            Stmt::IsSettled { claim } => {
                out.push(5);
                claim.encode_into(out);
            }
            Stmt::Apply { code } => {
                out.push(6);
                code.encode_into(out);
            }
            Stmt::If { cond, then } => {
                out.push(7);
                cond.encode_into(out);
                then.encode_into(out);
            }
            Stmt::Splice { param } => {
                out.push(8);
                param.encode_into(out);
            }
            Stmt::Call {
                target,
                block,
                args,
            } => {
                out.push(9);
                target.encode_into(out);
                block.encode_into(out);
                args.encode_into(out);
            }
        }
    }
}

impl Decode for Stmt {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        d.enter()?;
        let s = match d.u8()? {
            0 => Stmt::Guard(Expr::decode_from(d)?),
            1 => Stmt::Assign {
                field: String::decode_from(d)?,
                index: Option::decode_from(d)?,
                op: AssignOp::decode_from(d)?,
                value: Expr::decode_from(d)?,
            },
            2 => Stmt::Verify {
                signers: Expr::decode_from(d)?,
                quorum: Expr::decode_from(d)?,
            },
            3 => Stmt::Transfer {
                to: Expr::decode_from(d)?,
                value: Expr::decode_from(d)?,
            },
            4 => Stmt::Claim {
                args: Vec::decode_from(d)?,
            },
            5 => Stmt::IsSettled {
                claim: Expr::decode_from(d)?,
            },
            6 => Stmt::Apply {
                code: Expr::decode_from(d)?,
            },
            7 => Stmt::If {
                cond: Expr::decode_from(d)?,
                then: Vec::decode_from(d)?,
            },
            8 => Stmt::Splice {
                param: String::decode_from(d)?,
            },
            9 => Stmt::Call {
                target: Expr::decode_from(d)?,
                block: String::decode_from(d)?,
                args: Vec::decode_from(d)?,
            },
            t => {
                return Err(DecodeError::BadTag {
                    what: "stmt",
                    tag: t,
                })
            }
        };
        d.exit();
        Ok(s)
    }
}

// ---- claims ----

impl Encode for WriteOp {
    fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(match self {
            WriteOp::Set => 0,
            WriteOp::Add => 1,
            WriteOp::Sub => 2,
            WriteOp::Insert => 3,
            WriteOp::Remove => 4,
            WriteOp::Push => 5,
        });
    }
}

impl Decode for WriteOp {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(match d.u8()? {
            0 => WriteOp::Set,
            1 => WriteOp::Add,
            2 => WriteOp::Sub,
            3 => WriteOp::Insert,
            4 => WriteOp::Remove,
            5 => WriteOp::Push,
            t => {
                return Err(DecodeError::BadTag {
                    what: "write op",
                    tag: t,
                })
            }
        })
    }
}

impl Encode for ClaimBody {
    fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            ClaimBody::Transfer { to, value } => {
                out.push(0);
                to.encode_into(out);
                value.encode_into(out);
            }
            ClaimBody::FieldWrite {
                owner,
                field,
                index,
                op,
                value,
            } => {
                out.push(1);
                owner.encode_into(out);
                field.encode_into(out);
                index.encode_into(out);
                op.encode_into(out);
                value.encode_into(out);
            }
            ClaimBody::Guard { expr } => {
                out.push(2);
                expr.encode_into(out);
            }
            ClaimBody::Verify { signers, quorum } => {
                out.push(3);
                signers.encode_into(out);
                quorum.encode_into(out);
            }
            ClaimBody::Data { tag, payload } => {
                out.push(4);
                tag.encode_into(out);
                payload.encode_into(out);
            }
            ClaimBody::IsSettled { claim } => {
                out.push(5);
                claim.encode_into(out);
            }
            ClaimBody::CreateContract { script, args } => {
                out.push(6);
                script.encode_into(out);
                args.encode_into(out);
            }
            ClaimBody::CreateInstance { contract } => {
                out.push(7);
                contract.encode_into(out);
            }
            ClaimBody::Call {
                target,
                block,
                args,
            } => {
                out.push(8);
                target.encode_into(out);
                block.encode_into(out);
                args.encode_into(out);
            }
            ClaimBody::Apply { inner } => {
                out.push(9);
                inner.encode_into(out);
            }
            ClaimBody::Cond { cond, then } => {
                out.push(10);
                cond.encode_into(out);
                then.encode_into(out);
            }
        }
    }
}

impl Decode for ClaimBody {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(match d.u8()? {
            0 => ClaimBody::Transfer {
                to: Expr::decode_from(d)?,
                value: Expr::decode_from(d)?,
            },
            1 => ClaimBody::FieldWrite {
                owner: Address::decode_from(d)?,
                field: String::decode_from(d)?,
                index: Option::decode_from(d)?,
                op: WriteOp::decode_from(d)?,
                value: Expr::decode_from(d)?,
            },
            2 => ClaimBody::Guard {
                expr: Expr::decode_from(d)?,
            },
            3 => ClaimBody::Verify {
                signers: Expr::decode_from(d)?,
                quorum: Expr::decode_from(d)?,
            },
            4 => ClaimBody::Data {
                tag: String::decode_from(d)?,
                payload: Vec::decode_from(d)?,
            },
            5 => ClaimBody::IsSettled {
                claim: Expr::decode_from(d)?,
            },
            6 => ClaimBody::CreateContract {
                script: Digest::decode_from(d)?,
                args: Vec::decode_from(d)?,
            },
            7 => ClaimBody::CreateInstance {
                contract: Address::decode_from(d)?,
            },
            8 => ClaimBody::Call {
                target: Address::decode_from(d)?,
                block: String::decode_from(d)?,
                args: Vec::decode_from(d)?,
            },
            9 => ClaimBody::Apply {
                inner: Vec::decode_from(d)?,
            },
            10 => ClaimBody::Cond {
                cond: Expr::decode_from(d)?,
                then: Vec::decode_from(d)?,
            },
            t => {
                return Err(DecodeError::BadTag {
                    what: "claim body",
                    tag: t,
                })
            }
        })
    }
}

impl Encode for Claim {
    fn encode_into(&self, out: &mut Vec<u8>) {
        self.issuer.encode_into(out);
        self.body.encode_into(out);
    }
}

impl Decode for Claim {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        d.enter()?;
        let c = Claim {
            issuer: Address::decode_from(d)?,
            body: ClaimBody::decode_from(d)?,
        };
        d.exit();
        Ok(c)
    }
}

impl Encode for ClaimBlock {
    fn encode_into(&self, out: &mut Vec<u8>) {
        self.claims().to_vec().encode_into(out);
    }
}

impl Decode for ClaimBlock {
    fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let claims = Vec::<Claim>::decode_from(d)?;
        ClaimBlock::new(claims).map_err(|_| DecodeError::NonCanonical("claim block shape"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_decode_rejects_disorder() {
        let a = Value::int(2);
        let b = Value::int(1);
        let mut buf = Vec::new();
        buf.push(7u8); // set tag
        2u32.encode_into(&mut buf);
        a.encode_into(&mut buf);
        b.encode_into(&mut buf);
        assert!(matches!(
            decode_exact::<Value>(&buf),
            Err(DecodeError::NonCanonical(_))
        ));
    }

    #[test]
    fn bool_decode_rejects_junk() {
        assert!(matches!(
            decode_exact::<Value>(&[0, 2]),
            Err(DecodeError::BadTag { .. })
        ));
    }

    #[test]
    fn length_bomb_rejected() {
        // Claims 4 billion list elements with 6 bytes of input.
        let mut buf = vec![8u8];
        u32::MAX.encode_into(&mut buf);
        buf.push(0);
        assert!(matches!(
            decode_exact::<Value>(&buf),
            Err(DecodeError::LengthOverflow)
        ));
    }
}
