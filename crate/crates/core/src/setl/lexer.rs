//! Tokenizer for the contract language.
//!
//! Keywords are not distinguished here: the parser matches identifier
//! text in context, which keeps words like `time` or `size` usable as
//! ordinary names wherever the grammar is unambiguous. Apostrophes
//! continue identifiers (`s'` is one name), `//` starts a line
//! comment, and `0x` literals are either an address (exactly 64 hex
//! digits) or a hexadecimal integer.

use num_bigint::BigInt;

use super::parser::ParseError;
use crate::address::Address;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    /// `@name`, a harness-level alias for an address.
    Alias(String),
    Addr(Address),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Dot,
    /// `->` in map type annotations.
    Arrow,
    /// `:=`
    Assign,
    /// `+=`
    PlusAssign,
    /// `-=`
    MinusAssign,
    EqEq,
    Le,
    Ge,
    Lt,
    Gt,
    Plus,
    Minus,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(_) => write!(f, "string literal"),
            Tok::Alias(a) => write!(f, "`@{a}`"),
            Tok::Addr(_) => write!(f, "address literal"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::PlusAssign => write!(f, "`+=`"),
            Tok::MinusAssign => write!(f, "`-=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    loop {
        let (tl, tc) = (line, column);
        let Some(&c) = chars.peek() else {
            toks.push(Token {
                tok: Tok::Eof,
                line: tl,
                column: tc,
            });
            return Ok(toks);
        };

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(ParseError::at(tl, tc, "a token", "`/`"));
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            toks.push(Token {
                tok: Tok::Ident(word),
                line: tl,
                column: tc,
            });
            continue;
        }

        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() {
                    digits.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let tok = if let Some(hex) = digits.strip_prefix("0x").or(digits.strip_prefix("0X")) {
                if hex.len() == 64 {
                    let bytes: [u8; 32] = hex::decode(hex)
                        .ok()
                        .and_then(|v| v.try_into().ok())
                        .ok_or_else(|| ParseError::at(tl, tc, "hex digits", &digits))?;
                    Tok::Addr(Address::from_bytes(bytes))
                } else {
                    Tok::Int(
                        BigInt::parse_bytes(hex.as_bytes(), 16)
                            .ok_or_else(|| ParseError::at(tl, tc, "hex digits", &digits))?,
                    )
                }
            } else {
                Tok::Int(
                    BigInt::parse_bytes(digits.as_bytes(), 10)
                        .ok_or_else(|| ParseError::at(tl, tc, "a number", &digits))?,
                )
            };
            toks.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            continue;
        }

        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    None => return Err(ParseError::at(tl, tc, "closing `\"`", "end of input")),
                    Some('"') => break,
                    Some('\\') => match bump!() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        other => {
                            return Err(ParseError::at(
                                line,
                                column,
                                "an escape (\\\" \\\\ \\n \\t)",
                                &other.map_or("end of input".to_string(), |c| format!("`\\{c}`")),
                            ))
                        }
                    },
                    Some(c) => s.push(c),
                }
            }
            toks.push(Token {
                tok: Tok::Str(s),
                line: tl,
                column: tc,
            });
            continue;
        }

        if c == '@' {
            bump!();
            let mut name = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    name.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            if name.is_empty() {
                return Err(ParseError::at(tl, tc, "an alias name after `@`", "`@`"));
            }
            toks.push(Token {
                tok: Tok::Alias(name),
                line: tl,
                column: tc,
            });
            continue;
        }

        bump!();
        let next = chars.peek().copied();
        let tok = match (c, next) {
            ('[', _) => Tok::LBracket,
            (']', _) => Tok::RBracket,
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            ('{', _) => Tok::LBrace,
            ('}', _) => Tok::RBrace,
            (',', _) => Tok::Comma,
            (';', _) => Tok::Semi,
            ('.', _) => Tok::Dot,
            (':', Some('=')) => {
                bump!();
                Tok::Assign
            }
            (':', _) => Tok::Colon,
            ('+', Some('=')) => {
                bump!();
                Tok::PlusAssign
            }
            ('+', _) => Tok::Plus,
            ('-', Some('=')) => {
                bump!();
                Tok::MinusAssign
            }
            ('-', Some('>')) => {
                bump!();
                Tok::Arrow
            }
            ('-', _) => Tok::Minus,
            ('=', Some('=')) => {
                bump!();
                Tok::EqEq
            }
            ('<', Some('=')) => {
                bump!();
                Tok::Le
            }
            ('<', _) => Tok::Lt,
            ('>', Some('=')) => {
                bump!();
                Tok::Ge
            }
            ('>', _) => Tok::Gt,
            other => {
                return Err(ParseError::at(
                    tl,
                    tc,
                    "a token",
                    &format!("`{}`", other.0),
                ))
            }
        };
        toks.push(Token {
            tok,
            line: tl,
            column: tc,
        });
    }
}

