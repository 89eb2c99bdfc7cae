//! Surface syntax and a recursive-descent parser over the token stream.
//!
//! Precedence, lowest first: lambda and `->` (right associative), `*`
//! (right associative), `+` (right associative), application (left
//! associative). Keyword-headed forms take a fixed number of atomic
//! arguments and may then be applied further.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lexer::{tokenize, IllegalCharacter, Token, TokenKind};
use crate::syntax::{Name, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Fst,
    Snd,
    Inl,
    Inr,
    Case,
    Absurd,
    NatRec,
    Id,
    Refl,
    J,
    Trunc,
    Tr,
    TRec,
    TInd,
    Htr,
    Nat,
    Zero,
    Suc,
    Unit,
    Star,
    Empty,
}

impl Keyword {
    pub fn from_lexeme(s: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match s {
            "fst" => Fst,
            "snd" => Snd,
            "inl" => Inl,
            "inr" => Inr,
            "case" => Case,
            "absurd" => Absurd,
            "natrec" => NatRec,
            "Id" => Id,
            "refl" => Refl,
            "J" => J,
            "Trunc" => Trunc,
            "tr" => Tr,
            "trec" => TRec,
            "tind" => TInd,
            "htr" => Htr,
            "Nat" => Nat,
            "zero" => Zero,
            "suc" => Suc,
            "Unit" => Unit,
            "star" => Star,
            "Empty" => Empty,
            _ => return None,
        })
    }

    pub fn lexeme(self) -> &'static str {
        use Keyword::*;
        match self {
            Fst => "fst",
            Snd => "snd",
            Inl => "inl",
            Inr => "inr",
            Case => "case",
            Absurd => "absurd",
            NatRec => "natrec",
            Id => "Id",
            Refl => "refl",
            J => "J",
            Trunc => "Trunc",
            Tr => "tr",
            TRec => "trec",
            TInd => "tind",
            Htr => "htr",
            Nat => "Nat",
            Zero => "zero",
            Suc => "suc",
            Unit => "Unit",
            Star => "star",
            Empty => "Empty",
        }
    }

    /// Number of arguments the keyword form consumes.
    pub fn arity(self) -> usize {
        use Keyword::*;
        match self {
            Nat | Zero | Unit | Star | Empty => 0,
            Fst | Snd | Inl | Inr | Refl | Trunc | Tr | Suc => 1,
            Absurd | Htr => 2,
            Id | J => 3,
            Case | NatRec | TRec | TInd => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Surface {
    pub span: Span,
    pub kind: SurfaceKind,
}

#[derive(Clone, Debug)]
pub enum SurfaceKind {
    Var(Name),
    Univ(u32),
    Pi(Name, Box<Surface>, Box<Surface>),
    Sigma(Name, Box<Surface>, Box<Surface>),
    Lam(Name, Option<Box<Surface>>, Box<Surface>),
    App(Box<Surface>, Box<Surface>),
    Pair(Box<Surface>, Box<Surface>),
    Sum(Box<Surface>, Box<Surface>),
    Ann(Box<Surface>, Box<Surface>),
    Form(Keyword, Vec<Surface>),
}

impl Surface {
    fn new(span: Span, kind: SurfaceKind) -> Surface {
        Surface { span, kind }
    }
}

#[derive(Clone, Debug)]
pub enum SurfaceDeclKind {
    Def { name: Name, ty: Surface, body: Surface },
    Postulate { name: Name, ty: Surface },
    Import(Name),
    Check(Surface),
    Eval(Surface),
}

#[derive(Clone, Debug)]
pub struct SurfaceDecl {
    pub span: Span,
    /// Span of the declared or imported name, or of the directive keyword.
    pub name_span: Span,
    pub kind: SurfaceDeclKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    IllegalCharacter { span: Span, character: char },
    UnexpectedToken { span: Span, found: Option<String>, expected: Vec<&'static str> },
    UnbalancedDelimiter { span: Span },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::IllegalCharacter { span, .. }
            | ParseError::UnexpectedToken { span, .. }
            | ParseError::UnbalancedDelimiter { span } => *span,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ParseError::IllegalCharacter { .. } => "IllegalCharacter",
            ParseError::UnexpectedToken { .. } => "UnexpectedToken",
            ParseError::UnbalancedDelimiter { .. } => "UnbalancedDelimiter",
        }
    }
}

impl From<IllegalCharacter> for ParseError {
    fn from(e: IllegalCharacter) -> ParseError {
        ParseError::IllegalCharacter { span: e.span, character: e.character }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::IllegalCharacter { character, .. } => {
                write!(f, "illegal character {:?}", character)
            }
            ParseError::UnexpectedToken { found, expected, .. } => {
                match found {
                    Some(tok) => write!(f, "unexpected token `{}`", tok)?,
                    None => write!(f, "unexpected end of input")?,
                }
                if !expected.is_empty() {
                    write!(f, ", expected one of: {}", expected.join(" "))?;
                }
                Ok(())
            }
            ParseError::UnbalancedDelimiter { .. } => write!(f, "unbalanced delimiter"),
        }
    }
}

/// Tokenizes and parses a whole source file.
pub fn parse_source(source: &str) -> Result<Vec<SurfaceDecl>, ParseError> {
    let tokens = tokenize(source)?;
    parse_program(&tokens)
}

/// Parses a single term, e.g. for tests and inline evaluation.
pub fn parse_term(source: &str) -> Result<Surface, ParseError> {
    let tokens = tokenize(source)?;
    check_delimiters(&tokens)?;
    let mut p = Parser { tokens: &tokens, pos: 0 };
    let t = p.expr()?;
    if p.pos < tokens.len() {
        return Err(p.unexpected(&["end of input"]));
    }
    Ok(t)
}

pub fn parse_program(tokens: &[Token]) -> Result<Vec<SurfaceDecl>, ParseError> {
    check_delimiters(tokens)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while p.pos < tokens.len() {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

fn check_delimiters(tokens: &[Token]) -> Result<(), ParseError> {
    let mut open = Vec::new();
    for tok in tokens {
        if tok.is_symbol("(") {
            open.push(tok.span);
        } else if tok.is_symbol(")") && open.pop().is_none() {
            return Err(ParseError::UnbalancedDelimiter { span: tok.span });
        }
    }
    match open.pop() {
        Some(span) => Err(ParseError::UnbalancedDelimiter { span }),
        None => Ok(()),
    }
}

const DECL_STARTS: &[&str] = &["def", "postulate", "import", "#check", "#eval"];

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

type Binders = Vec<(Name, Span, Option<Surface>)>;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_symbol(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is_symbol(s))
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError::UnexpectedToken {
                span: tok.span,
                found: Some(tok.lexeme.clone()),
                expected: expected.to_vec(),
            },
            None => ParseError::UnexpectedToken {
                span: self.tokens.last().map_or(Span::new(0, 0), |t| t.span),
                found: None,
                expected: expected.to_vec(),
            },
        }
    }

    fn expect_symbol(&mut self, s: &'static str) -> Result<Span, ParseError> {
        match self.peek() {
            Some(tok) if tok.is_symbol(s) => {
                self.pos += 1;
                Ok(tok.span)
            }
            _ => Err(self.unexpected(&[s])),
        }
    }

    fn ident(&mut self) -> Result<(Name, Span), ParseError> {
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok((tok.lexeme.as_str().into(), tok.span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn prev_end(&self) -> usize {
        self.tokens[self.pos - 1].span.end
    }

    fn decl(&mut self) -> Result<SurfaceDecl, ParseError> {
        let tok = self.peek().unwrap();
        let start = tok.span.start;
        if !tok.is(TokenKind::Keyword, tok.lexeme.as_str())
            || !DECL_STARTS.contains(&tok.lexeme.as_str())
        {
            return Err(self.unexpected(DECL_STARTS));
        }
        self.pos += 1;
        let kind_word = tok.lexeme.as_str();
        let (kind, name_span) = match kind_word {
            "def" | "postulate" => {
                let (name, name_span) = self.ident()?;
                let params = self.param_groups()?;
                self.expect_symbol(":")?;
                let ty = self.expr()?;
                let ty = wrap_pis(&params, ty);
                if kind_word == "def" {
                    self.expect_symbol(":=")?;
                    let body = self.expr()?;
                    let body = wrap_lams(&params, body);
                    (SurfaceDeclKind::Def { name, ty, body }, name_span)
                } else {
                    (SurfaceDeclKind::Postulate { name, ty }, name_span)
                }
            }
            "import" => {
                let (name, span) = self.ident()?;
                (SurfaceDeclKind::Import(name), span)
            }
            "#check" => (SurfaceDeclKind::Check(self.expr()?), tok.span),
            _ => (SurfaceDeclKind::Eval(self.expr()?), tok.span),
        };
        if let Some(next) = self.peek() {
            if !(next.kind == TokenKind::Keyword && DECL_STARTS.contains(&next.lexeme.as_str())) {
                return Err(self.unexpected(DECL_STARTS));
            }
        }
        Ok(SurfaceDecl { span: Span::new(start, self.prev_end()), name_span, kind })
    }

    /// `(x y : A) (z : B) ...`, possibly empty.
    fn param_groups(&mut self) -> Result<Binders, ParseError> {
        let mut out = Vec::new();
        while self.peek_symbol("(") {
            self.binder_group(&mut out)?;
        }
        Ok(out)
    }

    fn binder_group(&mut self, out: &mut Binders) -> Result<(), ParseError> {
        self.expect_symbol("(")?;
        let mut names = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.kind != TokenKind::Ident {
                break;
            }
            names.push(self.ident()?);
        }
        if names.is_empty() {
            return Err(self.unexpected(&["identifier"]));
        }
        self.expect_symbol(":")?;
        let ty = self.expr()?;
        self.expect_symbol(")")?;
        for (name, span) in names {
            out.push((name, span, Some(ty.clone())));
        }
        Ok(())
    }

    /// Tries to read a telescope followed by `sep`; restores the position on failure.
    fn try_telescope(&mut self, sep: &str) -> Option<Binders> {
        if !self.peek_symbol("(") {
            return None;
        }
        let save = self.pos;
        let mut out = Vec::new();
        while self.peek_symbol("(") {
            if self.binder_group(&mut out).is_err() {
                self.pos = save;
                return None;
            }
        }
        if self.peek_symbol(sep) {
            self.pos += 1;
            Some(out)
        } else {
            self.pos = save;
            None
        }
    }

    fn expr(&mut self) -> Result<Surface, ParseError> {
        if self.peek_symbol("\\") {
            return self.lambda();
        }
        self.pi_level()
    }

    fn lambda(&mut self) -> Result<Surface, ParseError> {
        let start = self.expect_symbol("\\")?.start;
        let mut binders = Vec::new();
        loop {
            match self.peek() {
                Some(tok) if tok.kind == TokenKind::Ident => {
                    let (name, span) = self.ident()?;
                    binders.push((name, span, None));
                }
                Some(tok) if tok.is_symbol("(") => self.binder_group(&mut binders)?,
                _ => break,
            }
        }
        if binders.is_empty() {
            return Err(self.unexpected(&["identifier", "("]));
        }
        self.expect_symbol(".")?;
        let body = self.expr()?;
        let mut out = wrap_lams(&binders, body);
        out.span = Span::new(start, out.span.end);
        Ok(out)
    }

    fn pi_level(&mut self) -> Result<Surface, ParseError> {
        let start = self.peek().map(|t| t.span.start);
        if let Some(tele) = self.try_telescope("->") {
            let cod = self.expr()?;
            let mut out = wrap_pis(&tele, cod);
            out.span = Span::new(start.unwrap(), out.span.end);
            return Ok(out);
        }
        let lhs = self.sigma_level()?;
        if self.peek_symbol("->") {
            self.pos += 1;
            let rhs = self.expr()?;
            let span = lhs.span.merge(rhs.span);
            return Ok(Surface::new(
                span,
                SurfaceKind::Pi("_".into(), Box::new(lhs), Box::new(rhs)),
            ));
        }
        Ok(lhs)
    }

    fn sigma_level(&mut self) -> Result<Surface, ParseError> {
        let start = self.peek().map(|t| t.span.start);
        if let Some(tele) = self.try_telescope("*") {
            let mut out = self.sigma_level()?;
            for (name, _, ty) in tele.into_iter().rev() {
                let span = Span::new(start.unwrap(), out.span.end);
                out = Surface::new(
                    span,
                    SurfaceKind::Sigma(name, Box::new(ty.unwrap()), Box::new(out)),
                );
            }
            return Ok(out);
        }
        let lhs = self.sum_level()?;
        if self.peek_symbol("*") {
            self.pos += 1;
            let rhs = self.sigma_level()?;
            let span = lhs.span.merge(rhs.span);
            return Ok(Surface::new(
                span,
                SurfaceKind::Sigma("_".into(), Box::new(lhs), Box::new(rhs)),
            ));
        }
        Ok(lhs)
    }

    fn sum_level(&mut self) -> Result<Surface, ParseError> {
        let lhs = self.app_level()?;
        if self.peek_symbol("+") {
            self.pos += 1;
            let rhs = self.sum_level()?;
            let span = lhs.span.merge(rhs.span);
            return Ok(Surface::new(span, SurfaceKind::Sum(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            None => false,
            Some(tok) => match tok.kind {
                TokenKind::Ident | TokenKind::Numeral => true,
                TokenKind::Symbol => tok.lexeme == "(",
                TokenKind::Keyword => {
                    tok.lexeme == "U"
                        || Keyword::from_lexeme(&tok.lexeme).is_some_and(|k| k.arity() == 0)
                }
            },
        }
    }

    fn app_level(&mut self) -> Result<Surface, ParseError> {
        let mut head = match self.peek() {
            Some(tok) if tok.kind == TokenKind::Keyword => {
                match Keyword::from_lexeme(&tok.lexeme) {
                    Some(kw) if kw.arity() > 0 => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        let mut span = tok.span;
                        for _ in 0..kw.arity() {
                            let arg = self.atom()?;
                            span = span.merge(arg.span);
                            args.push(arg);
                        }
                        Surface::new(span, SurfaceKind::Form(kw, args))
                    }
                    _ => self.atom()?,
                }
            }
            _ => self.atom()?,
        };
        while self.starts_atom() {
            let arg = self.atom()?;
            let span = head.span.merge(arg.span);
            head = Surface::new(span, SurfaceKind::App(Box::new(head), Box::new(arg)));
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        const ATOM: &[&str] = &["identifier", "numeral", "(", "U", "Nat", "zero", "Unit", "star", "Empty"];
        let tok = match self.peek() {
            Some(tok) => tok,
            None => return Err(self.unexpected(ATOM)),
        };
        match tok.kind {
            TokenKind::Ident => {
                self.pos += 1;
                Ok(Surface::new(tok.span, SurfaceKind::Var(tok.lexeme.as_str().into())))
            }
            TokenKind::Numeral => {
                self.pos += 1;
                let n: u64 = tok.lexeme.parse().map_err(|_| ParseError::UnexpectedToken {
                    span: tok.span,
                    found: Some(tok.lexeme.clone()),
                    expected: alloc::vec!["numeral"],
                })?;
                Ok(numeral(n, tok.span))
            }
            TokenKind::Keyword if tok.lexeme == "U" => {
                self.pos += 1;
                match self.peek() {
                    Some(num) if num.kind == TokenKind::Numeral => {
                        self.pos += 1;
                        let level: u32 = num.lexeme.parse().map_err(|_| {
                            ParseError::UnexpectedToken {
                                span: num.span,
                                found: Some(num.lexeme.clone()),
                                expected: alloc::vec!["universe level"],
                            }
                        })?;
                        Ok(Surface::new(tok.span.merge(num.span), SurfaceKind::Univ(level)))
                    }
                    _ => Err(self.unexpected(&["numeral"])),
                }
            }
            TokenKind::Keyword => match Keyword::from_lexeme(&tok.lexeme) {
                Some(kw) if kw.arity() == 0 => {
                    self.pos += 1;
                    Ok(Surface::new(tok.span, SurfaceKind::Form(kw, Vec::new())))
                }
                _ => Err(self.unexpected(ATOM)),
            },
            TokenKind::Symbol if tok.lexeme == "(" => self.paren(),
            TokenKind::Symbol => Err(self.unexpected(ATOM)),
        }
    }

    fn paren(&mut self) -> Result<Surface, ParseError> {
        let start = self.expect_symbol("(")?.start;
        let first = self.expr()?;
        if self.peek_symbol(":") {
            self.pos += 1;
            let ty = self.expr()?;
            let end = self.expect_symbol(")")?.end;
            return Ok(Surface::new(
                Span::new(start, end),
                SurfaceKind::Ann(Box::new(first), Box::new(ty)),
            ));
        }
        let mut items = alloc::vec![first];
        while self.peek_symbol(",") {
            self.pos += 1;
            items.push(self.expr()?);
        }
        if !self.peek_symbol(")") {
            return Err(self.unexpected(&[")", ",", ":"]));
        }
        let end = self.expect_symbol(")")?.end;
        let span = Span::new(start, end);
        let mut out = items.pop().unwrap();
        if items.is_empty() {
            out.span = span;
            return Ok(out);
        }
        while let Some(prev) = items.pop() {
            let s = if items.is_empty() { span } else { prev.span.merge(out.span) };
            out = Surface::new(s, SurfaceKind::Pair(Box::new(prev), Box::new(out)));
        }
        Ok(out)
    }
}

fn numeral(n: u64, span: Span) -> Surface {
    let mut out = Surface::new(span, SurfaceKind::Form(Keyword::Zero, Vec::new()));
    for _ in 0..n {
        out = Surface::new(span, SurfaceKind::Form(Keyword::Suc, alloc::vec![out]));
    }
    out
}

fn wrap_pis(binders: &Binders, body: Surface) -> Surface {
    let mut out = body;
    for (name, span, ty) in binders.iter().rev() {
        let ty = ty.clone().expect("pi binders are annotated");
        let s = span.merge(out.span);
        out = Surface::new(s, SurfaceKind::Pi(name.clone(), Box::new(ty), Box::new(out)));
    }
    out
}

fn wrap_lams(binders: &Binders, body: Surface) -> Surface {
    let mut out = body;
    for (name, span, ty) in binders.iter().rev() {
        let s = span.merge(out.span);
        out = Surface::new(
            s,
            SurfaceKind::Lam(name.clone(), ty.clone().map(Box::new), Box::new(out)),
        );
    }
    out
}
