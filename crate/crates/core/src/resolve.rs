//! Name resolution: surface syntax to nameless core terms.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::parser::{Keyword, Surface, SurfaceDecl, SurfaceDeclKind, SurfaceKind};
use crate::syntax::{shift_term, Bound, Name, RcTerm, Span, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolveError {
    UnboundIdentifier { name: Name, span: Span },
    DuplicateDefinition { name: Name, span: Span },
    /// `import` reached the resolver; imports are handled by the file driver.
    UnexpectedImport { span: Span },
}

impl ResolveError {
    pub fn span(&self) -> Span {
        match self {
            ResolveError::UnboundIdentifier { span, .. }
            | ResolveError::DuplicateDefinition { span, .. }
            | ResolveError::UnexpectedImport { span } => *span,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ResolveError::UnboundIdentifier { .. } => "UnboundIdentifier",
            ResolveError::DuplicateDefinition { .. } => "DuplicateDefinition",
            ResolveError::UnexpectedImport { .. } => "UnexpectedImport",
        }
    }
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::UnboundIdentifier { name, .. } => write!(f, "unbound identifier `{}`", name),
            ResolveError::DuplicateDefinition { name, .. } => {
                write!(f, "`{}` is already defined", name)
            }
            ResolveError::UnexpectedImport { .. } => write!(f, "import outside of a file driver"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeclKind {
    Def,
    Postulate,
    Check,
    Eval,
}

impl DeclKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclKind::Def => "def",
            DeclKind::Postulate => "postulate",
            DeclKind::Check => "#check",
            DeclKind::Eval => "#eval",
        }
    }
}

/// A resolved declaration. Directives carry their term in `body`.
#[derive(Clone, Debug)]
pub struct Declaration {
    pub kind: DeclKind,
    pub name: Option<Name>,
    pub declared_type: Option<RcTerm>,
    pub body: Option<RcTerm>,
    pub span: Span,
    pub name_span: Span,
}

/// Which names are visible as globals.
pub trait Scope {
    fn contains(&self, name: &str) -> bool;
}

impl<F: Fn(&str) -> bool> Scope for F {
    fn contains(&self, name: &str) -> bool {
        self(name)
    }
}

pub fn resolve_decl(decl: &SurfaceDecl, scope: &dyn Scope) -> Result<Declaration, ResolveError> {
    let mut locals = Vec::new();
    let mut r = Resolver { locals: &mut locals, scope };
    let (kind, name, declared_type, body) = match &decl.kind {
        SurfaceDeclKind::Def { name, ty, body } => {
            if scope.contains(name) {
                return Err(ResolveError::DuplicateDefinition { name: name.clone(), span: decl.name_span });
            }
            (DeclKind::Def, Some(name.clone()), Some(r.term(ty)?), Some(r.term(body)?))
        }
        SurfaceDeclKind::Postulate { name, ty } => {
            if scope.contains(name) {
                return Err(ResolveError::DuplicateDefinition { name: name.clone(), span: decl.name_span });
            }
            (DeclKind::Postulate, Some(name.clone()), Some(r.term(ty)?), None)
        }
        SurfaceDeclKind::Check(t) => (DeclKind::Check, None, None, Some(r.term(t)?)),
        SurfaceDeclKind::Eval(t) => (DeclKind::Eval, None, None, Some(r.term(t)?)),
        SurfaceDeclKind::Import(_) => return Err(ResolveError::UnexpectedImport { span: decl.span }),
    };
    Ok(Declaration { kind, name, declared_type, body, span: decl.span, name_span: decl.name_span })
}

/// Resolves a closed surface term.
pub fn resolve_term(term: &Surface, scope: &dyn Scope) -> Result<RcTerm, ResolveError> {
    let mut locals = Vec::new();
    Resolver { locals: &mut locals, scope }.term(term)
}

struct Resolver<'a> {
    locals: &'a mut Vec<Name>,
    scope: &'a dyn Scope,
}

impl Resolver<'_> {
    fn term(&mut self, s: &Surface) -> Result<RcTerm, ResolveError> {
        let span = Some(s.span);
        let kind = match &s.kind {
            SurfaceKind::Var(name) => {
                match self.locals.iter().rev().position(|local| local == name) {
                    Some(ix) => TermKind::Var(ix),
                    None if self.scope.contains(name) => TermKind::Global(name.clone()),
                    None => {
                        return Err(ResolveError::UnboundIdentifier { name: name.clone(), span: s.span })
                    }
                }
            }
            SurfaceKind::Univ(l) => TermKind::Univ(crate::syntax::Level(*l)),
            SurfaceKind::Pi(x, a, b) => TermKind::Pi(self.term(a)?, self.under(x, b)?),
            SurfaceKind::Sigma(x, a, b) => TermKind::Sigma(self.term(a)?, self.under(x, b)?),
            SurfaceKind::Lam(x, dom, b) => {
                let dom = dom.as_ref().map(|d| self.term(d)).transpose()?;
                TermKind::Lam(dom, self.under(x, b)?)
            }
            SurfaceKind::App(f, a) => TermKind::App(self.term(f)?, self.term(a)?),
            SurfaceKind::Pair(a, b) => TermKind::Pair(self.term(a)?, self.term(b)?),
            SurfaceKind::Sum(a, b) => TermKind::Sum(self.term(a)?, self.term(b)?),
            SurfaceKind::Ann(a, b) => TermKind::Ann(self.term(a)?, self.term(b)?),
            SurfaceKind::Form(kw, args) => self.form(*kw, args)?,
        };
        Ok(Term::spanned(span, kind))
    }

    fn under(&mut self, name: &Name, body: &Surface) -> Result<Bound<1>, ResolveError> {
        self.locals.push(name.clone());
        let out = self.term(body);
        self.locals.pop();
        Ok(Bound::new([name.clone()], out?))
    }

    /// Resolves a term in a binding position of arity `N`. Leading lambdas
    /// supply the binders; any remaining ones are filled by eta-expansion.
    fn bind<const N: usize>(&mut self, s: &Surface, hints: [&str; N]) -> Result<Bound<N>, ResolveError> {
        let mut names: [Name; N] = hints.map(Name::from);
        let mut cur = s;
        let mut peeled = 0;
        while peeled < N {
            match &cur.kind {
                SurfaceKind::Lam(x, _, body) => {
                    names[peeled] = x.clone();
                    self.locals.push(x.clone());
                    cur = body;
                    peeled += 1;
                }
                _ => break,
            }
        }
        let body = self.term(cur);
        for _ in 0..peeled {
            self.locals.pop();
        }
        let mut body = body?;
        let rest = N - peeled;
        if rest > 0 {
            body = shift_term(&body, 0, rest as isize).expect("upward shift cannot underflow");
            for k in (0..rest).rev() {
                body = Term::spanned(Some(s.span), TermKind::App(body, Term::spanned(Some(s.span), TermKind::Var(k))));
            }
        }
        Ok(Bound::new(names, body))
    }

    fn form(&mut self, kw: Keyword, args: &[Surface]) -> Result<TermKind, ResolveError> {
        use Keyword::*;
        Ok(match kw {
            Nat => TermKind::NatT,
            Zero => TermKind::Zero,
            Unit => TermKind::UnitT,
            Star => TermKind::Star,
            Empty => TermKind::EmptyT,
            Fst => TermKind::Fst(self.term(&args[0])?),
            Snd => TermKind::Snd(self.term(&args[0])?),
            Inl => TermKind::Inl(self.term(&args[0])?),
            Inr => TermKind::Inr(self.term(&args[0])?),
            Refl => TermKind::Refl(self.term(&args[0])?),
            Trunc => TermKind::TruncT(self.term(&args[0])?),
            Tr => TermKind::TrIntro(self.term(&args[0])?),
            Suc => TermKind::Suc(self.term(&args[0])?),
            Case => TermKind::SumCase {
                motive: self.bind(&args[0], ["z"])?,
                on_left: self.bind(&args[1], ["a"])?,
                on_right: self.bind(&args[2], ["b"])?,
                scrut: self.term(&args[3])?,
            },
            Absurd => TermKind::Absurd {
                motive: self.bind(&args[0], ["z"])?,
                scrut: self.term(&args[1])?,
            },
            NatRec => TermKind::NatRec {
                motive: self.bind(&args[0], ["n"])?,
                zero: self.term(&args[1])?,
                suc: self.bind(&args[2], ["n", "ih"])?,
                scrut: self.term(&args[3])?,
            },
            Id => TermKind::IdT(self.term(&args[0])?, self.term(&args[1])?, self.term(&args[2])?),
            J => TermKind::J {
                motive: self.bind(&args[0], ["x", "y", "p"])?,
                base: self.bind(&args[1], ["x"])?,
                path: self.term(&args[2])?,
            },
            TRec => TermKind::TrRec {
                motive_ty: self.term(&args[0])?,
                prop: self.term(&args[1])?,
                fun: self.term(&args[2])?,
                scrut: self.term(&args[3])?,
                elem_ty: None,
            },
            TInd => TermKind::TrInd {
                motive: self.bind(&args[0], ["z"])?,
                prop: self.term(&args[1])?,
                fun: self.term(&args[2])?,
                scrut: self.term(&args[3])?,
                elem_ty: None,
            },
            Htr => TermKind::TruncEq {
                lhs: self.term(&args[0])?,
                rhs: self.term(&args[1])?,
                elem_ty: None,
            },
        })
    }
}

/// Convenience for tests: parse and resolve a closed term with no globals
/// other than those accepted by `scope`.
pub fn parse_and_resolve(src: &str, scope: &dyn Scope) -> Result<RcTerm, String> {
    use alloc::string::ToString;
    let s = crate::parser::parse_term(src).map_err(|e| e.to_string())?;
    resolve_term(&s, scope).map_err(|e| e.to_string())
}
