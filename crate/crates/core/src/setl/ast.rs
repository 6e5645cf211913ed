//! Syntax tree for the contract language.
//!
//! A script declares a template: named parameters, contract-level and
//! instance-level fields, optional constructors, and named blocks.
//! Blocks marked `instance` execute against an instance account of the
//! contract; the rest execute against the contract account itself.
//!
//! Nodes carry no source positions — parse errors do — so structural
//! equality, ordering, and digests see only meaning. Statement lists
//! double as runtime values (quoted code), which is why the whole tree
//! derives the canonical order.

use std::fmt;

use crate::expr::Expr;

/// A parsed template.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Script {
    /// Header name; documentation only, identity is the source digest.
    pub name: String,
    /// Template parameters, substituted by value at instantiation.
    pub params: Vec<String>,
    pub contract_fields: Vec<FieldDecl>,
    pub instance_fields: Vec<FieldDecl>,
    pub contract_ctor: Option<Vec<Stmt>>,
    pub instance_ctor: Option<Vec<Stmt>>,
    /// Declaration order preserved for printing and snapshots.
    pub blocks: Vec<BlockDef>,
}

impl Script {
    pub fn block(&self, name: &str) -> Option<&BlockDef> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn field_decl(&self, name: &str) -> Option<(&FieldDecl, bool)> {
        if let Some(d) = self.contract_fields.iter().find(|d| d.name == name) {
            return Some((d, false));
        }
        self.instance_fields
            .iter()
            .find(|d| d.name == name)
            .map(|d| (d, true))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FieldDecl {
    pub name: String,
    pub ty: TypeAnn,
}

/// Field type annotation. Annotations document intent; evaluation is
/// dynamically typed and mismatches surface as invalid claims.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum TypeAnn {
    Int,
    Str,
    Bool,
    Set,
    List,
    Bytes,
    Address,
    /// `K -> V` map annotation.
    Map(Box<TypeAnn>, Box<TypeAnn>),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BlockDef {
    pub name: String,
    /// True for `instance` blocks, callable on instance accounts.
    pub instance: bool,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

/// How an assignment statement updates its target field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum AssignOp {
    /// `:=`
    Set,
    /// `+=` (integer add or string append)
    Add,
    /// `-=`
    Sub,
    /// `.add(e)` set insertion
    Insert,
    /// `.sub(e)` / `.remove(e)` set removal
    Remove,
    /// `.next(e)` / `.append(e)` list append
    Push,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Stmt {
    /// Bare boolean expression; the block is invalid unless it holds.
    Guard(Expr),
    /// Field update. `index` addresses one key of a map-valued field.
    Assign {
        field: String,
        index: Option<Expr>,
        op: AssignOp,
        value: Expr,
    },
    /// `verify(signers, quorum)`: requires that many co-signatures on
    /// the enclosing message (the sender's own always counts).
    Verify { signers: Expr, quorum: Expr },
    /// `transfer(to, value)`: native tokens from the executing account.
    Transfer { to: Expr, value: Expr },
    /// `claim(a1, ..., ak)`: settles a data claim.
    Claim { args: Vec<Expr> },
    /// `isSettled(e)`: requires the digest `e` evaluates to settled.
    IsSettled { claim: Expr },
    /// `apply(e)`: applies a quoted code value as the executing account.
    Apply { code: Expr },
    /// `if (cond) { ... }` — no else; a false condition is valid and
    /// inert, not a failure.
    If { cond: Expr, then: Vec<Stmt> },
    /// Bare parameter of block type: the argument's statements run
    /// here, re-issued by the executing account.
    Splice { param: String },
    /// `target.block(args)`: cross-account block call.
    Call {
        target: Expr,
        block: String,
        args: Vec<Expr>,
    },
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::setl::pretty::fmt_stmt_inline(self, f)
    }
}
