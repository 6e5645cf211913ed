//! Runtime values: what account fields hold, what expressions evaluate
//! to, and what travels as template or block arguments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use crate::address::Address;
use crate::digest::Digest;
use crate::setl::ast::Stmt;

/// A runtime value.
///
/// Integers are arbitrary precision. `Infinity` compares greater than
/// every integer (the derived order puts the variant after `Int`), so
/// a field can hold a time bound that no timestamp reaches. `Code` is
/// a quoted statement list: block-typed arguments are passed
/// unevaluated and spliced or applied by the callee.
///
/// The derived `Ord` is the canonical total order used for set and map
/// layout, serialization, and the ordered comparison operators of the
/// contract language.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Infinity,
    Str(String),
    Bytes(Vec<u8>),
    Addr(Address),
    Digest(Digest),
    Set(BTreeSet<Value>),
    List(Vec<Value>),
    Map(BTreeMap<Value, Value>),
    Code(Vec<Stmt>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn str(s: &str) -> Value {
        Value::Str(s.to_string())
    }

    pub fn set<I: IntoIterator<Item = Value>>(items: I) -> Value {
        Value::Set(items.into_iter().collect())
    }

    pub fn list<I: IntoIterator<Item = Value>>(items: I) -> Value {
        Value::List(items.into_iter().collect())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Infinity => "infinity",
            Value::Str(_) => "string",
            Value::Bytes(_) => "bytes",
            Value::Addr(_) => "address",
            Value::Digest(_) => "digest",
            Value::Set(_) => "set",
            Value::List(_) => "list",
            Value::Map(_) => "map",
            Value::Code(_) => "code",
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_addr(&self) -> Option<Address> {
        match self {
            Value::Addr(a) => Some(*a),
            _ => None,
        }
    }
}

/// Renders the value as contract-language literal syntax where one
/// exists (maps have no literal form and render as `map{...}`).
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Infinity => f.write_str("infinity"),
            Value::Str(s) => write!(f, "{:?}", s),
            Value::Bytes(b) => write!(f, "bytes(\"{}\")", hex::encode(b)),
            Value::Addr(a) => write!(f, "0x{}", a.to_hex()),
            Value::Digest(d) => write!(f, "digest(\"{}\")", d.to_hex()),
            Value::Set(items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Map(entries) => {
                f.write_str("map{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Code(stmts) => {
                f.write_str("code { ")?;
                for s in stmts {
                    write!(f, "{s} ")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_tops_every_int() {
        let big = Value::Int(BigInt::from(u128::MAX) * 1000);
        assert!(big < Value::Infinity);
        assert!(Value::int(-5) < Value::Infinity);
        assert!(Value::int(0) < Value::Infinity);
    }

    #[test]
    fn order_is_total_across_kinds() {
        // Cross-kind comparison never panics and is antisymmetric.
        let vals = [
            Value::Bool(true),
            Value::int(3),
            Value::Infinity,
            Value::str("x"),
            Value::Addr(Address::filled(1)),
            Value::set([Value::int(1)]),
            Value::list([Value::int(1)]),
        ];
        for a in &vals {
            for b in &vals {
                let ab = a.cmp(b);
                let ba = b.cmp(a);
                assert_eq!(ab, ba.reverse());
            }
        }
    }
}
