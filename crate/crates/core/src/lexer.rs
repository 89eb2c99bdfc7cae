use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Numeral,
    Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_symbol(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Symbol, lexeme)
    }

    pub fn is_keyword(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }
}

pub const KEYWORDS: &[&str] = &[
    "def", "postulate", "import", "#check", "#eval", "U", "fst", "snd", "inl", "inr", "case",
    "absurd", "natrec", "Id", "refl", "J", "Trunc", "tr", "trec", "tind", "htr", "Nat", "zero",
    "suc", "Unit", "star", "Empty",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IllegalCharacter {
    pub span: Span,
    pub character: char,
}

impl fmt::Display for IllegalCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "illegal character {:?}", self.character)
    }
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_subscript_digit(c: char) -> bool {
    ('\u{2080}'..='\u{2089}').contains(&c)
}

/// End of the identifier whose first character ends at `pos`.
fn ident_end(source: &str, mut pos: usize) -> usize {
    let mut rest = source[pos..].chars();
    while let Some(d) = rest.next() {
        if ident_continue(d) {
            pos += d.len_utf8();
        } else if d == '-' && rest.clone().next().is_some_and(ident_continue) {
            pos += 1;
        } else {
            break;
        }
        rest = source[pos..].chars();
    }
    pos
}

/// Splits source text into tokens. `--` comments run to the end of the line.
///
/// A `-` belongs to an identifier when it is followed by an identifier
/// character, so `fix-isProp` is one token while `A->B` is three.
pub fn tokenize(source: &str) -> Result<Vec<Token>, IllegalCharacter> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let push = |tokens: &mut Vec<Token>, kind, start: usize, end: usize| {
        tokens.push(Token {
            kind,
            lexeme: source[start..end].into(),
            span: Span::new(start, end),
        });
    };
    while pos < bytes.len() {
        let c = source[pos..].chars().next().unwrap();
        let next = source[pos + c.len_utf8()..].chars().next();
        if c.is_whitespace() {
            pos += c.len_utf8();
        } else if c == '-' && next == Some('-') {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if ident_start(c) {
            let start = pos;
            pos = ident_end(source, pos + c.len_utf8());
            let word = &source[start..pos];
            let kind = if is_keyword(word) { TokenKind::Keyword } else { TokenKind::Ident };
            push(&mut tokens, kind, start, pos);
        } else if c.is_ascii_digit() {
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            // `0₂` names a point, not a numeral.
            if source[pos..].chars().next().is_some_and(is_subscript_digit) {
                pos = ident_end(source, pos);
                push(&mut tokens, TokenKind::Ident, start, pos);
            } else {
                push(&mut tokens, TokenKind::Numeral, start, pos);
            }
        } else if c == '#' {
            let start = pos;
            pos += 1;
            while pos < bytes.len() && (bytes[pos] as char).is_ascii_alphabetic() {
                pos += 1;
            }
            let word = &source[start..pos];
            if !is_keyword(word) {
                return Err(IllegalCharacter { span: Span::new(start, start + 1), character: '#' });
            }
            push(&mut tokens, TokenKind::Keyword, start, pos);
        } else {
            let start = pos;
            let len = match (c, next) {
                ('-', Some('>')) | (':', Some('=')) => 2,
                ('(' | ')' | ':' | ',' | '*' | '+' | '\\' | '.', _) => 1,
                _ => {
                    return Err(IllegalCharacter {
                        span: Span::new(start, start + c.len_utf8()),
                        character: c,
                    })
                }
            };
            pos += len;
            push(&mut tokens, TokenKind::Symbol, start, pos);
        }
    }
    Ok(tokens)
}
