//! Core term language.
//!
//! Variables are de Bruijn indices. Binder names are kept only as printing
//! hints, and source spans never take part in equality.

use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt;

pub type Name = Rc<str>;
pub type RcTerm = Rc<Term>;

/// Half-open byte range into a source file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn merge(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

/// Universe index. There is no level polymorphism and no cumulativity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(pub u32);

impl Level {
    pub fn succ(self) -> Level {
        Level(self.0 + 1)
    }

    pub fn max(self, other: Level) -> Level {
        Level(self.0.max(other.0))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A term under `N` binders, together with their name hints.
#[derive(Clone, Debug)]
pub struct Bound<const N: usize> {
    pub names: [Name; N],
    pub body: RcTerm,
}

impl<const N: usize> Bound<N> {
    pub fn new(names: [Name; N], body: RcTerm) -> Bound<N> {
        Bound { names, body }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub span: Option<Span>,
    pub kind: TermKind,
}

#[derive(Clone, Debug)]
pub enum TermKind {
    Var(usize),
    Global(Name),
    Univ(Level),

    Pi(RcTerm, Bound<1>),
    /// The optional domain is an annotation that makes the lambda inferable.
    Lam(Option<RcTerm>, Bound<1>),
    App(RcTerm, RcTerm),

    Sigma(RcTerm, Bound<1>),
    Pair(RcTerm, RcTerm),
    Fst(RcTerm),
    Snd(RcTerm),

    Sum(RcTerm, RcTerm),
    Inl(RcTerm),
    Inr(RcTerm),
    SumCase {
        motive: Bound<1>,
        on_left: Bound<1>,
        on_right: Bound<1>,
        scrut: RcTerm,
    },

    UnitT,
    Star,
    EmptyT,
    Absurd {
        motive: Bound<1>,
        scrut: RcTerm,
    },

    NatT,
    Zero,
    Suc(RcTerm),
    NatRec {
        motive: Bound<1>,
        zero: RcTerm,
        suc: Bound<2>,
        scrut: RcTerm,
    },

    IdT(RcTerm, RcTerm, RcTerm),
    Refl(RcTerm),
    J {
        motive: Bound<3>,
        base: Bound<1>,
        path: RcTerm,
    },

    TruncT(RcTerm),
    TrIntro(RcTerm),
    /// `elem_ty` is the `A` of the scrutinee's `Trunc A`, filled in by the checker.
    TrRec {
        motive_ty: RcTerm,
        prop: RcTerm,
        fun: RcTerm,
        scrut: RcTerm,
        elem_ty: Option<RcTerm>,
    },
    TrInd {
        motive: Bound<1>,
        prop: RcTerm,
        fun: RcTerm,
        scrut: RcTerm,
        elem_ty: Option<RcTerm>,
    },
    TruncEq {
        lhs: RcTerm,
        rhs: RcTerm,
        elem_ty: Option<RcTerm>,
    },

    /// Type ascription `(t : T)`; erased by the checker.
    Ann(RcTerm, RcTerm),
}

impl Term {
    pub fn new(kind: TermKind) -> RcTerm {
        Rc::new(Term { span: None, kind })
    }

    pub fn spanned(span: Option<Span>, kind: TermKind) -> RcTerm {
        Rc::new(Term { span, kind })
    }

    pub fn var(ix: usize) -> RcTerm {
        Term::new(TermKind::Var(ix))
    }

    pub fn global(name: &str) -> RcTerm {
        Term::new(TermKind::Global(name.into()))
    }

    pub fn app(f: RcTerm, a: RcTerm) -> RcTerm {
        Term::new(TermKind::App(f, a))
    }

    pub fn lam(hint: &str, body: RcTerm) -> RcTerm {
        Term::new(TermKind::Lam(None, Bound::new([hint.into()], body)))
    }

    pub fn pi(hint: &str, dom: RcTerm, cod: RcTerm) -> RcTerm {
        Term::new(TermKind::Pi(dom, Bound::new([hint.into()], cod)))
    }

    pub fn sigma(hint: &str, dom: RcTerm, cod: RcTerm) -> RcTerm {
        Term::new(TermKind::Sigma(dom, Bound::new([hint.into()], cod)))
    }

    pub fn univ(level: u32) -> RcTerm {
        Term::new(TermKind::Univ(Level(level)))
    }

    /// Every immediate subterm together with the number of binders it sits under.
    /// Annotation-only slots (lambda domains, elaborated element types) are included.
    pub fn children(&self) -> Vec<(&RcTerm, usize)> {
        use TermKind::*;
        match &self.kind {
            Var(_) | Global(_) | Univ(_) | UnitT | Star | EmptyT | NatT | Zero => Vec::new(),
            Pi(a, b) | Sigma(a, b) => alloc::vec![(a, 0), (&b.body, 1)],
            Lam(dom, b) => {
                let mut out = Vec::new();
                if let Some(d) = dom {
                    out.push((d, 0));
                }
                out.push((&b.body, 1));
                out
            }
            App(a, b) | Pair(a, b) | Sum(a, b) | Ann(a, b) => alloc::vec![(a, 0), (b, 0)],
            Fst(a) | Snd(a) | Inl(a) | Inr(a) | Suc(a) | Refl(a) | TruncT(a) | TrIntro(a) => {
                alloc::vec![(a, 0)]
            }
            SumCase { motive, on_left, on_right, scrut } => alloc::vec![
                (&motive.body, 1),
                (&on_left.body, 1),
                (&on_right.body, 1),
                (scrut, 0)
            ],
            Absurd { motive, scrut } => alloc::vec![(&motive.body, 1), (scrut, 0)],
            NatRec { motive, zero, suc, scrut } => {
                alloc::vec![(&motive.body, 1), (zero, 0), (&suc.body, 2), (scrut, 0)]
            }
            IdT(a, b, c) => alloc::vec![(a, 0), (b, 0), (c, 0)],
            J { motive, base, path } => {
                alloc::vec![(&motive.body, 3), (&base.body, 1), (path, 0)]
            }
            TrRec { motive_ty, prop, fun, scrut, elem_ty } => {
                let mut out = alloc::vec![(motive_ty, 0), (prop, 0), (fun, 0), (scrut, 0)];
                if let Some(e) = elem_ty {
                    out.push((e, 0));
                }
                out
            }
            TrInd { motive, prop, fun, scrut, elem_ty } => {
                let mut out = alloc::vec![(&motive.body, 1), (prop, 0), (fun, 0), (scrut, 0)];
                if let Some(e) = elem_ty {
                    out.push((e, 0));
                }
                out
            }
            TruncEq { lhs, rhs, elem_ty } => {
                let mut out = alloc::vec![(lhs, 0), (rhs, 0)];
                if let Some(e) = elem_ty {
                    out.push((e, 0));
                }
                out
            }
        }
    }

    /// Rebuilds this node with every child replaced by `f(child, binders)`.
    /// Children are visited in the same order as [`Term::children`].
    pub fn map_children<E>(
        &self,
        f: &mut dyn FnMut(&RcTerm, usize) -> Result<RcTerm, E>,
    ) -> Result<RcTerm, E> {
        use TermKind::*;
        let b1 = |b: &Bound<1>, f: &mut dyn FnMut(&RcTerm, usize) -> Result<RcTerm, E>| {
            Ok::<_, E>(Bound::new(b.names.clone(), f(&b.body, 1)?))
        };
        let opt = |o: &Option<RcTerm>, f: &mut dyn FnMut(&RcTerm, usize) -> Result<RcTerm, E>| {
            o.as_ref().map(|t| f(t, 0)).transpose()
        };
        let kind = match &self.kind {
            k @ (Var(_) | Global(_) | Univ(_) | UnitT | Star | EmptyT | NatT | Zero) => k.clone(),
            Pi(a, b) => Pi(f(a, 0)?, b1(b, f)?),
            Sigma(a, b) => Sigma(f(a, 0)?, b1(b, f)?),
            Lam(dom, b) => Lam(opt(dom, f)?, b1(b, f)?),
            App(a, b) => App(f(a, 0)?, f(b, 0)?),
            Pair(a, b) => Pair(f(a, 0)?, f(b, 0)?),
            Sum(a, b) => Sum(f(a, 0)?, f(b, 0)?),
            Ann(a, b) => Ann(f(a, 0)?, f(b, 0)?),
            Fst(a) => Fst(f(a, 0)?),
            Snd(a) => Snd(f(a, 0)?),
            Inl(a) => Inl(f(a, 0)?),
            Inr(a) => Inr(f(a, 0)?),
            Suc(a) => Suc(f(a, 0)?),
            Refl(a) => Refl(f(a, 0)?),
            TruncT(a) => TruncT(f(a, 0)?),
            TrIntro(a) => TrIntro(f(a, 0)?),
            SumCase { motive, on_left, on_right, scrut } => SumCase {
                motive: b1(motive, f)?,
                on_left: b1(on_left, f)?,
                on_right: b1(on_right, f)?,
                scrut: f(scrut, 0)?,
            },
            Absurd { motive, scrut } => Absurd { motive: b1(motive, f)?, scrut: f(scrut, 0)? },
            NatRec { motive, zero, suc, scrut } => NatRec {
                motive: b1(motive, f)?,
                zero: f(zero, 0)?,
                suc: Bound::new(suc.names.clone(), f(&suc.body, 2)?),
                scrut: f(scrut, 0)?,
            },
            IdT(a, b, c) => IdT(f(a, 0)?, f(b, 0)?, f(c, 0)?),
            J { motive, base, path } => J {
                motive: Bound::new(motive.names.clone(), f(&motive.body, 3)?),
                base: b1(base, f)?,
                path: f(path, 0)?,
            },
            TrRec { motive_ty, prop, fun, scrut, elem_ty } => TrRec {
                motive_ty: f(motive_ty, 0)?,
                prop: f(prop, 0)?,
                fun: f(fun, 0)?,
                scrut: f(scrut, 0)?,
                elem_ty: opt(elem_ty, f)?,
            },
            TrInd { motive, prop, fun, scrut, elem_ty } => TrInd {
                motive: b1(motive, f)?,
                prop: f(prop, 0)?,
                fun: f(fun, 0)?,
                scrut: f(scrut, 0)?,
                elem_ty: opt(elem_ty, f)?,
            },
            TruncEq { lhs, rhs, elem_ty } => TruncEq {
                lhs: f(lhs, 0)?,
                rhs: f(rhs, 0)?,
                elem_ty: opt(elem_ty, f)?,
            },
        };
        Ok(Term::spanned(self.span, kind))
    }
}

/// A de Bruijn index fell below zero while shifting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftUnderflow {
    pub index: usize,
    pub amount: isize,
}

impl fmt::Display for ShiftUnderflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "internal error: shifting index {} by {} underflows",
            self.index, self.amount
        )
    }
}

/// Adds `amount` to every free variable at or above `cutoff`.
pub fn shift_term(t: &RcTerm, cutoff: usize, amount: isize) -> Result<RcTerm, ShiftUnderflow> {
    if amount == 0 {
        return Ok(t.clone());
    }
    if let TermKind::Var(ix) = t.kind {
        if ix < cutoff {
            return Ok(t.clone());
        }
        let shifted = ix as isize + amount;
        if shifted < cutoff as isize {
            return Err(ShiftUnderflow { index: ix, amount });
        }
        return Ok(Term::spanned(t.span, TermKind::Var(shifted as usize)));
    }
    t.map_children(&mut |child, binders| shift_term(child, cutoff + binders, amount))
}

/// Whether variable `ix` occurs free in `t`.
pub fn occurs(t: &Term, ix: usize) -> bool {
    match t.kind {
        TermKind::Var(i) => i == ix,
        _ => t
            .children()
            .into_iter()
            .any(|(child, binders)| occurs(child, ix + binders)),
    }
}

/// Calls `f` for every global name referenced in `t`.
pub fn for_each_global(t: &Term, f: &mut dyn FnMut(&Name)) {
    if let TermKind::Global(name) = &t.kind {
        f(name);
    }
    for (child, _) in t.children() {
        for_each_global(child, f);
    }
}

/// Syntactic equality up to name hints, spans and annotation-only slots.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    use TermKind::*;
    if core::ptr::eq(a, b) {
        return true;
    }
    match (&a.kind, &b.kind) {
        (Var(i), Var(j)) => i == j,
        (Global(x), Global(y)) => x == y,
        (Univ(i), Univ(j)) => i == j,
        (UnitT, UnitT) | (Star, Star) | (EmptyT, EmptyT) | (NatT, NatT) | (Zero, Zero) => true,
        (Lam(_, x), Lam(_, y)) => alpha_equal(&x.body, &y.body),
        (TrRec { .. }, TrRec { .. }) | (TrInd { .. }, TrInd { .. }) => {
            // The trailing element type is elaboration output only.
            let xs = a.children();
            let ys = b.children();
            xs.iter()
                .zip(ys.iter())
                .take(4)
                .all(|((x, _), (y, _))| alpha_equal(x, y))
        }
        (TruncEq { lhs: l1, rhs: r1, .. }, TruncEq { lhs: l2, rhs: r2, .. }) => {
            alpha_equal(l1, l2) && alpha_equal(r1, r2)
        }
        (ka, kb) if core::mem::discriminant(ka) == core::mem::discriminant(kb) => {
            let xs = a.children();
            let ys = b.children();
            xs.len() == ys.len()
                && xs
                    .iter()
                    .zip(ys.iter())
                    .all(|((x, _), (y, _))| alpha_equal(x, y))
        }
        _ => false,
    }
}
