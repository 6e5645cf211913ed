//! Recursive-descent parser for the contract language.
//!
//! The grammar is small and statement-oriented; the interesting part
//! is how a statement is classified, since almost anything can start
//! with an identifier:
//!
//! * a built-in statement head (`if`, `verify`, `transfer`, `claim`,
//!   `isSettled`, `apply`) followed by `(` parses as that statement;
//! * otherwise one full expression is parsed. An assignment operator
//!   after it makes a field update (the expression must then be a
//!   field or `field[key]`); a `.name(` makes a block call, except
//!   that `field.add(v)` and friends are field updates in method
//!   syntax; a bare block parameter is a splice; anything else is a
//!   guard.
//!
//! Statements end with `;` or the closing `}`; empty statements are
//! tolerated anywhere. `not` binds between `and` and the comparisons,
//! so `not x in s` reads as `not (x in s)`. `.owner` and `.last` are
//! postfix selectors, never block names.

use std::collections::BTreeSet;
use std::collections::BTreeMap;

use crate::digest::Digest;
use crate::expr::{BinOp, Expr};
use crate::value::Value;

use super::ast::{AssignOp, BlockDef, FieldDecl, Script, Stmt, TypeAnn};
use super::lexer::{tokenize, Tok, Token};

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(line: u32, column: u32, expected: &str, found: &str) -> ParseError {
        ParseError {
            line,
            column,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

/// Parses a whole template script.
pub fn parse(source: &str) -> Result<Script, ParseError> {
    let mut p = Parser::new(source)?;
    let script = p.script()?;
    p.expect_eof()?;
    Ok(script)
}

/// Parses a single expression spanning the whole input.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: tokenize(source)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)].tok
    }

    fn peek_n(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos.min(self.toks.len() - 1)];
        (t.line, t.column)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == w) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError::at(
            line,
            column,
            expected,
            &self.peek().to_string(),
        ))
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.fail(&t.to_string())
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        while self.eat(&Tok::Semi) {}
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(_) => match self.advance() {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => self.fail(what),
        }
    }

    fn script(&mut self) -> Result<Script, ParseError> {
        let name = self.ident("a template name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LBracket) {
            if !self.eat(&Tok::RBracket) {
                loop {
                    params.push(self.ident("a template parameter")?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
            }
        }
        self.expect(Tok::Colon)?;

        let mut script = Script {
            name,
            params,
            contract_fields: Vec::new(),
            instance_fields: Vec::new(),
            contract_ctor: None,
            instance_ctor: None,
            blocks: Vec::new(),
        };

        loop {
            while self.eat(&Tok::Semi) {}
            if self.peek() == &Tok::Eof {
                return Ok(script);
            }
            let instance = self.eat_word("instance");
            if matches!(self.peek(), Tok::Ident(w) if w == "constructor")
                && self.peek_n(1) == &Tok::LBrace
            {
                self.advance();
                let body = self.braced_stmts(&BTreeSet::new())?;
                let slot = if instance {
                    &mut script.instance_ctor
                } else {
                    &mut script.contract_ctor
                };
                if slot.is_some() {
                    return self.fail("at most one constructor per section");
                }
                *slot = Some(body);
                continue;
            }
            let name = self.ident(if instance {
                "a field or block declaration after `instance`"
            } else {
                "a field, block, or constructor declaration"
            })?;
            match self.peek() {
                Tok::Colon => {
                    self.advance();
                    let ty = self.type_ann()?;
                    self.expect(Tok::Semi)?;
                    let decl = FieldDecl { name, ty };
                    if instance {
                        script.instance_fields.push(decl);
                    } else {
                        script.contract_fields.push(decl);
                    }
                }
                Tok::LParen => {
                    self.advance();
                    let mut params = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            params.push(self.ident("a block parameter")?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RParen)?;
                    }
                    let param_set: BTreeSet<String> = params.iter().cloned().collect();
                    let body = self.braced_stmts(&param_set)?;
                    script.blocks.push(BlockDef {
                        name,
                        instance,
                        params,
                        body,
                    });
                }
                _ => return self.fail("`:` or `(`"),
            }
        }
    }

    fn type_ann(&mut self) -> Result<TypeAnn, ParseError> {
        let name = self.ident("a type")?;
        let base = match name.as_str() {
            "Int" => TypeAnn::Int,
            "String" => TypeAnn::Str,
            "Bool" => TypeAnn::Bool,
            "Set" => TypeAnn::Set,
            "List" => TypeAnn::List,
            "Bytes" => TypeAnn::Bytes,
            "Address" => TypeAnn::Address,
            _ => return self.fail("a type"),
        };
        if self.eat(&Tok::Arrow) {
            let value = self.type_ann()?;
            Ok(TypeAnn::Map(Box::new(base), Box::new(value)))
        } else {
            Ok(base)
        }
    }

    fn braced_stmts(&mut self, params: &BTreeSet<String>) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let out = self.stmts(params)?;
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn stmts(&mut self, params: &BTreeSet<String>) -> Result<Vec<Stmt>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                return Ok(out);
            }
            out.push(self.stmt(params)?);
        }
    }

    /// `;` or the closing `}` ends a statement.
    fn terminator(&mut self) -> Result<(), ParseError> {
        if self.eat(&Tok::Semi) || self.peek() == &Tok::RBrace {
            Ok(())
        } else {
            self.fail("`;`")
        }
    }

    fn stmt(&mut self, params: &BTreeSet<String>) -> Result<Stmt, ParseError> {
        if let Tok::Ident(w) = self.peek() {
            if self.peek_n(1) == &Tok::LParen {
                match w.as_str() {
                    "if" => {
                        self.advance();
                        self.expect(Tok::LParen)?;
                        let cond = self.expr()?;
                        self.expect(Tok::RParen)?;
                        let then = self.braced_stmts(params)?;
                        return Ok(Stmt::If { cond, then });
                    }
                    "verify" => {
                        self.advance();
                        let mut args = self.paren_args()?;
                        if args.len() != 2 {
                            return self.fail("verify(signers, quorum)");
                        }
                        self.terminator()?;
                        let quorum = args.pop().unwrap();
                        let signers = args.pop().unwrap();
                        return Ok(Stmt::Verify { signers, quorum });
                    }
                    "transfer" => {
                        self.advance();
                        let mut args = self.paren_args()?;
                        if args.len() != 2 {
                            return self.fail("transfer(to, value)");
                        }
                        self.terminator()?;
                        let value = args.pop().unwrap();
                        let to = args.pop().unwrap();
                        return Ok(Stmt::Transfer { to, value });
                    }
                    "claim" => {
                        self.advance();
                        let args = self.paren_args()?;
                        self.terminator()?;
                        return Ok(Stmt::Claim { args });
                    }
                    "isSettled" => {
                        self.advance();
                        let mut args = self.paren_args()?;
                        if args.len() != 1 {
                            return self.fail("isSettled(claim)");
                        }
                        self.terminator()?;
                        return Ok(Stmt::IsSettled {
                            claim: args.pop().unwrap(),
                        });
                    }
                    "apply" => {
                        self.advance();
                        let mut args = self.paren_args()?;
                        if args.len() != 1 {
                            return self.fail("apply(code)");
                        }
                        self.terminator()?;
                        return Ok(Stmt::Apply {
                            code: args.pop().unwrap(),
                        });
                    }
                    _ => {}
                }
            }
        }

        let e = self.expr()?;

        // Field update: `f := v`, `f += v`, `f -= v`, `f[k] := v`, ...
        let assign_op = match self.peek() {
            Tok::Assign => Some(AssignOp::Set),
            Tok::PlusAssign => Some(AssignOp::Add),
            Tok::MinusAssign => Some(AssignOp::Sub),
            _ => None,
        };
        if let Some(op) = assign_op {
            self.advance();
            let value = self.expr()?;
            self.terminator()?;
            let (field, index) = match e {
                Expr::Ident(f) => (f, None),
                Expr::Index(base, key) => match *base {
                    Expr::Ident(f) => (f, Some(*key)),
                    _ => return self.fail("a field or field[key] on the left of an assignment"),
                },
                _ => return self.fail("a field or field[key] on the left of an assignment"),
            };
            return Ok(Stmt::Assign {
                field,
                index,
                op,
                value,
            });
        }

        // `recv.name(args)`: method-syntax field update or block call.
        if self.peek() == &Tok::Dot {
            self.advance();
            let name = self.ident("a block or method name")?;
            let args = self.paren_args()?;
            self.terminator()?;
            let method = match name.as_str() {
                "add" => Some(AssignOp::Insert),
                "remove" | "sub" => Some(AssignOp::Remove),
                "next" | "append" => Some(AssignOp::Push),
                _ => None,
            };
            if let (Some(op), Expr::Ident(field), 1) = (method, &e, args.len()) {
                return Ok(Stmt::Assign {
                    field: field.clone(),
                    index: None,
                    op,
                    value: args.into_iter().next().unwrap(),
                });
            }
            return Ok(Stmt::Call {
                target: e,
                block: name,
                args,
            });
        }

        self.terminator()?;
        if let Expr::Ident(name) = &e {
            if params.contains(name) {
                return Ok(Stmt::Splice {
                    param: name.clone(),
                });
            }
        }
        Ok(Stmt::Guard(e))
    }

    fn paren_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat_word("or") {
            let rhs = self.and_expr()?;
            e = Expr::Bin(BinOp::Or, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.not_expr()?;
        while self.eat_word("and") {
            let rhs = self.not_expr()?;
            e = Expr::Bin(BinOp::And, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Ident(w) if w == "not") {
            self.advance();
            let inner = self.not_expr()?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            Tok::Ident(w) if w == "in" => Some(BinOp::In),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        self.advance();
        let rhs = self.add_expr()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.postfix_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(e),
            };
            self.advance();
            let rhs = self.postfix_expr()?;
            e = Expr::Bin(op, Box::new(e), Box::new(rhs));
        }
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Tok::LBracket => {
                    self.advance();
                    let key = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    e = Expr::Index(Box::new(e), Box::new(key));
                }
                // `.owner` and `.last` are selectors unless called like
                // a block; `.anythingElse(` is left for the statement
                // parser to read as a call.
                Tok::Dot => match (self.peek_n(1), self.peek_n(2)) {
                    (Tok::Ident(w), after) if w == "owner" && after != &Tok::LParen => {
                        self.advance();
                        self.advance();
                        e = Expr::OwnerOf(Box::new(e));
                    }
                    (Tok::Ident(w), after) if w == "last" && after != &Tok::LParen => {
                        self.advance();
                        self.advance();
                        e = Expr::Last(Box::new(e));
                    }
                    _ => return Ok(e),
                },
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Lit(Value::Int(n)))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Addr(a) => {
                self.advance();
                Ok(Expr::Lit(Value::Addr(a)))
            }
            Tok::Alias(a) => {
                self.advance();
                Ok(Expr::Alias(a))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.advance();
                if self.eat(&Tok::RBrace) {
                    return Ok(Expr::Lit(Value::Set(BTreeSet::new())));
                }
                let mut items = Vec::new();
                loop {
                    items.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Expr::SetLit(items))
            }
            Tok::LBracket => {
                self.advance();
                if self.eat(&Tok::RBracket) {
                    return Ok(Expr::Lit(Value::List(Vec::new())));
                }
                let mut items = Vec::new();
                loop {
                    items.push(self.expr()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(Expr::ListLit(items))
            }
            Tok::Ident(w) => match w.as_str() {
                "true" => {
                    self.advance();
                    Ok(Expr::Lit(Value::Bool(true)))
                }
                "false" => {
                    self.advance();
                    Ok(Expr::Lit(Value::Bool(false)))
                }
                "infinity" => {
                    self.advance();
                    Ok(Expr::Lit(Value::Infinity))
                }
                "empty" => {
                    self.advance();
                    Ok(Expr::Lit(Value::Set(BTreeSet::new())))
                }
                "nil" => {
                    self.advance();
                    Ok(Expr::Lit(Value::List(Vec::new())))
                }
                "contract" => {
                    self.advance();
                    Ok(Expr::Contract)
                }
                "instance" => {
                    self.advance();
                    Ok(Expr::Instance)
                }
                "time" => {
                    self.advance();
                    Ok(Expr::Time)
                }
                "size" => {
                    self.advance();
                    let mut args = self.paren_args()?;
                    if args.len() != 1 {
                        return self.fail("size(collection)");
                    }
                    Ok(Expr::Size(Box::new(args.pop().unwrap())))
                }
                "claim" => {
                    self.advance();
                    let args = self.paren_args()?;
                    Ok(Expr::ClaimRef(args))
                }
                "bytes" => {
                    self.advance();
                    self.hex_literal("bytes") // bytes("<hex>")
                        .map(|b| Expr::Lit(Value::Bytes(b)))
                }
                "digest" => {
                    self.advance();
                    let raw = self.hex_literal("digest")?;
                    let bytes: [u8; 32] = raw
                        .try_into()
                        .map_err(|_| {
                            let (line, column) = self.here();
                            ParseError::at(line, column, "64 hex digits", "a digest literal")
                        })?;
                    Ok(Expr::Lit(Value::Digest(Digest::from_bytes(bytes))))
                }
                "code" => {
                    self.advance();
                    let body = self.braced_stmts(&BTreeSet::new())?;
                    Ok(Expr::Lit(Value::Code(body)))
                }
                _ => {
                    self.advance();
                    Ok(Expr::Ident(w))
                }
            },
            _ => self.fail("an expression"),
        }
    }

    /// `("<hex>")` after `bytes` / `digest`.
    fn hex_literal(&mut self, what: &str) -> Result<Vec<u8>, ParseError> {
        self.expect(Tok::LParen)?;
        let (line, column) = self.here();
        let Tok::Str(s) = self.peek().clone() else {
            return self.fail(&format!("a hex string in {what}(...)"));
        };
        self.advance();
        self.expect(Tok::RParen)?;
        hex::decode(&s).map_err(|_| ParseError::at(line, column, "hex digits", &format!("{s:?}")))
    }
}

// Keeps `BTreeMap` available for parser siblings via this module path.
#[allow(unused_imports)]
use BTreeMap as _ReExportGuard;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_dynamic_multisig_shape() {
        let src = r#"
DYNAMIC_MULTISIG[SIGNERS, QUORUM]:
    signers : Set;
    quorum  : Int;
    constructor {
      signers := SIGNERS;
      quorum  := QUORUM;
    }
    addSigner(user)    { signers.add(user); }
    removeSigner(user) { signers.remove(user); }
    updateQuorum(q)    { quorum := q; }
    instance do(C)     { verify(signers, quorum); C }
"#;
        let s = parse(src).unwrap();
        assert_eq!(s.name, "DYNAMIC_MULTISIG");
        assert_eq!(s.params, vec!["SIGNERS", "QUORUM"]);
        assert_eq!(s.contract_fields.len(), 2);
        assert_eq!(s.blocks.len(), 4);
        assert!(s.contract_ctor.is_some());
        let do_block = s.block("do").unwrap();
        assert!(do_block.instance);
        // `C` is a parameter of `do`, so the bare statement splices it.
        assert_eq!(do_block.body[1], Stmt::Splice { param: "C".into() });
        // `signers.add(user)` is an insert, not a call.
        assert_eq!(
            s.block("addSigner").unwrap().body[0],
            Stmt::Assign {
                field: "signers".into(),
                index: None,
                op: AssignOp::Insert,
                value: Expr::Ident("user".into()),
            }
        );
    }

    #[test]
    fn guards_calls_and_indexed_writes() {
        let src = r#"
T[ITEM]:
    balance : Address -> Int;
    flag : Bool;
    instance use(v) {
        not flag;
        balance[instance.owner] >= v;
        balance[instance.owner] -= v;
        ITEM.transfer_token(contract, 1);
    };
"#;
        let s = parse(src).unwrap();
        let body = &s.block("use").unwrap().body;
        assert!(matches!(&body[0], Stmt::Guard(Expr::Not(_))));
        assert!(matches!(&body[1], Stmt::Guard(Expr::Bin(BinOp::Ge, _, _))));
        assert!(matches!(
            &body[2],
            Stmt::Assign {
                op: AssignOp::Sub,
                index: Some(_),
                ..
            }
        ));
        assert_eq!(
            body[3],
            Stmt::Call {
                target: Expr::Ident("ITEM".into()),
                block: "transfer_token".into(),
                args: vec![Expr::Contract, Expr::lit_int(1)],
            }
        );
    }

    #[test]
    fn primed_identifiers_and_claim_refs() {
        let src = r#"
F[G]:
    state : Bytes;
    step(s, claims, s') {
        state == s;
        isSettled(claim("compute", s, claims, s'));
        claims;
        state := s';
    }
"#;
        let s = parse(src).unwrap();
        let body = &s.block("step").unwrap().body;
        assert_eq!(s.block("step").unwrap().params[2], "s'");
        assert!(matches!(&body[1], Stmt::IsSettled { claim: Expr::ClaimRef(args) } if args.len() == 4));
        assert_eq!(body[2], Stmt::Splice { param: "claims".into() });
        assert_eq!(
            body[3],
            Stmt::Assign {
                field: "state".into(),
                index: None,
                op: AssignOp::Set,
                value: Expr::Ident("s'".into()),
            }
        );
    }

    #[test]
    fn if_statement_and_selectors() {
        let src = r#"
A:
    highestBidder : Address;
    highestBid : Int;
    instance bid(amount) {
        if (amount > highestBid) {
            transfer(highestBidder, highestBid);
            highestBidder := instance;
        }
    }
    end() { transfer(contract.owner, highestBid); }
"#;
        let s = parse(src).unwrap();
        let bid = &s.block("bid").unwrap().body[0];
        let Stmt::If { then, .. } = bid else {
            panic!("expected if, got {bid:?}")
        };
        assert_eq!(then.len(), 2);
        let end = &s.block("end").unwrap().body[0];
        assert_eq!(
            *end,
            Stmt::Transfer {
                to: Expr::OwnerOf(Box::new(Expr::Contract)),
                value: Expr::Ident("highestBid".into()),
            }
        );
    }

    #[test]
    fn rejects_garbage_with_position() {
        let err = parse("T:\n    f : Int\n    g : Int;\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 5));
        assert_eq!(err.expected, "`;`");
    }

    #[test]
    fn empty_collections_and_infinity() {
        let src = "F:\n  a : Set;\n  b : List;\n  t : Int;\n  constructor { a := {}; b := []; a := empty; b := nil; t := infinity; }\n";
        let s = parse(src).unwrap();
        let ctor = s.contract_ctor.as_ref().unwrap();
        assert_eq!(ctor.len(), 5);
        assert!(matches!(&ctor[4], Stmt::Assign { value: Expr::Lit(Value::Infinity), .. }));
    }
}
