//! Bidirectional, elaborating type checker.
//!
//! Elaboration only fills the element-type slots of the truncation forms,
//! which the evaluator needs to read stuck truncation redexes back at a type.

use alloc::boxed::Box;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::eval::{Globals, Nbe, Types};
use crate::print::print_term_in;
use crate::syntax::{Bound, Level, Name, RcTerm, Span, Term, TermKind};
use crate::value::{Closure, Env, EvalMode, RcValue, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    /// Printed normal forms of the two types.
    Mismatch { expected: String, actual: String },
    NotAFunction { ty: String },
    NotASigma { ty: String },
    NotASum { ty: String },
    NotAUniverse { ty: String },
    NotAnIdentity { ty: String },
    NotATruncation { ty: String },
    MotiveIllTyped { cause: Box<TypeError> },
    PropProofIllTyped { cause: Box<TypeError> },
    UnboundGlobal { name: Name },
    LevelError { expected: Level, actual: Level },
    /// A lambda, pair or injection in a position where its type is unknown.
    CannotInfer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Option<Span>,
    /// `name : type` for each local in scope, outermost first.
    pub context: Vec<String>,
}

impl TypeError {
    pub fn kind_name(&self) -> &'static str {
        use TypeErrorKind::*;
        match &self.kind {
            Mismatch { .. } => "Mismatch",
            NotAFunction { .. } => "NotAFunction",
            NotASigma { .. } => "NotASigma",
            NotASum { .. } => "NotASum",
            NotAUniverse { .. } => "NotAUniverse",
            NotAnIdentity { .. } => "NotAnIdentity",
            NotATruncation { .. } => "NotATruncation",
            MotiveIllTyped { .. } => "MotiveIllTyped",
            PropProofIllTyped { .. } => "PropProofIllTyped",
            UnboundGlobal { .. } => "UnboundGlobal",
            LevelError { .. } => "LevelError",
            CannotInfer => "CannotInfer",
        }
    }

    fn at(mut self, span: Option<Span>) -> TypeError {
        if self.span.is_none() {
            self.span = span;
        }
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TypeErrorKind::*;
        match &self.kind {
            Mismatch { expected, actual } => {
                write!(f, "type mismatch: expected `{}`, found `{}`", expected, actual)
            }
            NotAFunction { ty } => write!(f, "expected a function type, found `{}`", ty),
            NotASigma { ty } => write!(f, "expected a Σ-type, found `{}`", ty),
            NotASum { ty } => write!(f, "expected a sum type, found `{}`", ty),
            NotAUniverse { ty } => write!(f, "expected a type, found an element of `{}`", ty),
            NotAnIdentity { ty } => write!(f, "expected an identity type, found `{}`", ty),
            NotATruncation { ty } => write!(f, "expected a truncation, found `{}`", ty),
            MotiveIllTyped { cause } => write!(f, "ill-typed motive: {}", cause),
            PropProofIllTyped { cause } => write!(f, "ill-typed propositionality proof: {}", cause),
            UnboundGlobal { name } => write!(f, "`{}` is not available", name),
            LevelError { expected, actual } => {
                write!(f, "universe level mismatch: expected U {}, found U {}", expected, actual)
            }
            CannotInfer => write!(f, "cannot infer a type here; add an annotation"),
        }
    }
}

pub type Result<T> = core::result::Result<T, TypeError>;

/// Local typing context.
#[derive(Clone, Default)]
pub struct Context {
    pub names: Vec<Name>,
    pub types: Types,
    pub env: Env,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Adds a fresh variable and returns it with the extended context.
    pub fn bind(&self, name: &Name, ty: RcValue) -> (Context, RcValue) {
        let v = Value::var(self.len());
        let mut ctx = self.clone();
        ctx.names.push(name.clone());
        ctx.types.push(ty);
        ctx.env = ctx.env.push(v.clone());
        (ctx, v)
    }
}

pub struct Checker<'g> {
    nbe: Nbe<'g>,
}

fn rc(v: Value) -> RcValue {
    Rc::new(v)
}

fn rebuild(t: &Term, kind: TermKind) -> RcTerm {
    Term::spanned(t.span, kind)
}

impl<'g> Checker<'g> {
    pub fn new(globals: &'g dyn Globals, mode: EvalMode) -> Checker<'g> {
        Checker { nbe: Nbe::new(globals, mode) }
    }

    pub fn nbe(&self) -> &Nbe<'g> {
        &self.nbe
    }

    /// Prints the normal form of a type in `ctx`.
    pub fn show_type(&self, ctx: &Context, ty: &RcValue) -> String {
        let t = self.nbe.readback_type(&mut ctx.types.clone(), ty);
        print_term_in(&t, &ctx.names)
    }

    fn error(&self, ctx: &Context, kind: TypeErrorKind) -> TypeError {
        let context = (0..ctx.len())
            .map(|i| {
                let t = self.nbe.readback_type(&mut ctx.types[..i].to_vec(), &ctx.types[i]);
                format!("{} : {}", ctx.names[i], print_term_in(&t, &ctx.names[..i]))
            })
            .collect();
        TypeError { kind, span: None, context }
    }

    fn closure<const N: usize>(&self, ctx: &Context, names: &[Name; N], body: RcTerm) -> Closure<N> {
        Closure { env: ctx.env.clone(), bound: Bound::new(names.clone(), body) }
    }

    fn eval(&self, ctx: &Context, t: &Term) -> RcValue {
        self.nbe.eval(&ctx.env, t)
    }

    /// Checks that `t` is a type and returns its universe level.
    pub fn check_type(&self, ctx: &Context, t: &RcTerm) -> Result<(RcTerm, Level)> {
        let (t2, ty) = self.infer(ctx, t)?;
        match &*ty {
            Value::Univ(l) => Ok((t2, *l)),
            _ => Err(self
                .error(ctx, TypeErrorKind::NotAUniverse { ty: self.show_type(ctx, &ty) })
                .at(t.span)),
        }
    }

    /// Motive bodies: errors are wrapped so they point at the motive.
    fn check_motive(&self, ctx: &Context, t: &RcTerm) -> Result<RcTerm> {
        self.check_type(ctx, t).map(|(t, _)| t).map_err(|e| {
            let span = e.span.or(t.span);
            self.error(ctx, TypeErrorKind::MotiveIllTyped { cause: Box::new(e) }).at(span)
        })
    }

    pub fn infer(&self, ctx: &Context, t: &RcTerm) -> Result<(RcTerm, RcValue)> {
        self.infer_inner(ctx, t).map_err(|e| e.at(t.span))
    }

    pub fn check(&self, ctx: &Context, t: &RcTerm, ty: &RcValue) -> Result<RcTerm> {
        self.check_inner(ctx, t, ty).map_err(|e| e.at(t.span))
    }

    fn expect_pi(&self, ctx: &Context, ty: &RcValue) -> Result<(RcValue, Closure<1>)> {
        match &**ty {
            Value::Pi(a, b) => Ok((a.clone(), b.clone())),
            _ => Err(self.error(ctx, TypeErrorKind::NotAFunction { ty: self.show_type(ctx, ty) })),
        }
    }

    fn infer_inner(&self, ctx: &Context, t: &RcTerm) -> Result<(RcTerm, RcValue)> {
        use TermKind::*;
        let nbe = &self.nbe;
        match &t.kind {
            Var(ix) => {
                let ty = ctx
                    .len()
                    .checked_sub(ix + 1)
                    .map(|l| ctx.types[l].clone())
                    .unwrap_or_else(|| panic!("internal error: variable {} out of scope", ix));
                Ok((t.clone(), ty))
            }
            Global(name) => match nbe.globals().global_type(name) {
                Some(ty) => Ok((t.clone(), ty)),
                None => Err(self.error(ctx, TypeErrorKind::UnboundGlobal { name: name.clone() })),
            },
            Univ(l) => Ok((t.clone(), rc(Value::Univ(l.succ())))),
            Pi(a, b) | Sigma(a, b) => {
                let (a2, la) = self.check_type(ctx, a)?;
                let (inner, _) = ctx.bind(&b.names[0], self.eval(ctx, &a2));
                let (body, lb) = self.check_type(&inner, &b.body)?;
                let bound = Bound::new(b.names.clone(), body);
                let kind = if matches!(t.kind, Pi(..)) { Pi(a2, bound) } else { Sigma(a2, bound) };
                Ok((rebuild(t, kind), rc(Value::Univ(la.max(lb)))))
            }
            Sum(a, b) => {
                let (a2, la) = self.check_type(ctx, a)?;
                let (b2, lb) = self.check_type(ctx, b)?;
                Ok((rebuild(t, Sum(a2, b2)), rc(Value::Univ(la.max(lb)))))
            }
            Lam(Some(dom), b) => {
                let (dom2, _) = self.check_type(ctx, dom)?;
                let dom_v = self.eval(ctx, &dom2);
                let (inner, _) = ctx.bind(&b.names[0], dom_v.clone());
                let (body, body_ty) = self.infer(&inner, &b.body)?;
                let cod = nbe.readback_type(&mut inner.types.clone(), &body_ty);
                let ty = rc(Value::Pi(dom_v, self.closure(ctx, &b.names, cod)));
                Ok((rebuild(t, Lam(Some(dom2), Bound::new(b.names.clone(), body))), ty))
            }
            App(f, a) => {
                let (f2, f_ty) = self.infer(ctx, f)?;
                let (dom, cod) = self.expect_pi(ctx, &f_ty).map_err(|e| e.at(f.span))?;
                let a2 = self.check(ctx, a, &dom)?;
                let ty = nbe.apply_closure(&cod, [self.eval(ctx, &a2)]);
                Ok((rebuild(t, App(f2, a2)), ty))
            }
            Fst(p) | Snd(p) => {
                let (p2, p_ty) = self.infer(ctx, p)?;
                let (dom, cod) = match &*p_ty {
                    Value::Sigma(a, b) => (a.clone(), b.clone()),
                    _ => {
                        return Err(self
                            .error(ctx, TypeErrorKind::NotASigma { ty: self.show_type(ctx, &p_ty) })
                            .at(p.span))
                    }
                };
                if matches!(t.kind, Fst(_)) {
                    Ok((rebuild(t, Fst(p2)), dom))
                } else {
                    let first = nbe.fst(&self.eval(ctx, &p2));
                    Ok((rebuild(t, Snd(p2)), nbe.apply_closure(&cod, [first])))
                }
            }
            SumCase { motive, on_left, on_right, scrut } => {
                let (scrut2, s_ty) = self.infer(ctx, scrut)?;
                let (l, r) = match &*s_ty {
                    Value::Sum(l, r) => (l.clone(), r.clone()),
                    _ => {
                        return Err(self
                            .error(ctx, TypeErrorKind::NotASum { ty: self.show_type(ctx, &s_ty) })
                            .at(scrut.span))
                    }
                };
                let (mctx, _) = ctx.bind(&motive.names[0], s_ty.clone());
                let m_body = self.check_motive(&mctx, &motive.body)?;
                let m = self.closure(ctx, &motive.names, m_body.clone());
                let (lctx, a) = ctx.bind(&on_left.names[0], l);
                let left = self.check(&lctx, &on_left.body, &nbe.apply_closure(&m, [rc(Value::Inl(a))]))?;
                let (rctx, b) = ctx.bind(&on_right.names[0], r);
                let right =
                    self.check(&rctx, &on_right.body, &nbe.apply_closure(&m, [rc(Value::Inr(b))]))?;
                let ty = nbe.apply_closure(&m, [self.eval(ctx, &scrut2)]);
                let kind = SumCase {
                    motive: Bound::new(motive.names.clone(), m_body),
                    on_left: Bound::new(on_left.names.clone(), left),
                    on_right: Bound::new(on_right.names.clone(), right),
                    scrut: scrut2,
                };
                Ok((rebuild(t, kind), ty))
            }
            UnitT | EmptyT | NatT => Ok((t.clone(), rc(Value::Univ(Level(0))))),
            Star => Ok((t.clone(), rc(Value::Unit))),
            Zero => Ok((t.clone(), rc(Value::Nat))),
            Suc(n) => {
                let n2 = self.check(ctx, n, &rc(Value::Nat))?;
                Ok((rebuild(t, Suc(n2)), rc(Value::Nat)))
            }
            Absurd { motive, scrut } => {
                let scrut2 = self.check(ctx, scrut, &rc(Value::Empty))?;
                let (mctx, _) = ctx.bind(&motive.names[0], rc(Value::Empty));
                let m_body = self.check_motive(&mctx, &motive.body)?;
                let m = self.closure(ctx, &motive.names, m_body.clone());
                let ty = nbe.apply_closure(&m, [self.eval(ctx, &scrut2)]);
                let kind = Absurd { motive: Bound::new(motive.names.clone(), m_body), scrut: scrut2 };
                Ok((rebuild(t, kind), ty))
            }
            NatRec { motive, zero, suc, scrut } => {
                let nat = rc(Value::Nat);
                let scrut2 = self.check(ctx, scrut, &nat)?;
                let (mctx, _) = ctx.bind(&motive.names[0], nat.clone());
                let m_body = self.check_motive(&mctx, &motive.body)?;
                let m = self.closure(ctx, &motive.names, m_body.clone());
                let zero2 = self.check(ctx, zero, &nbe.apply_closure(&m, [rc(Value::Zero)]))?;
                let (nctx, n) = ctx.bind(&suc.names[0], nat);
                let (ihctx, _) = nctx.bind(&suc.names[1], nbe.apply_closure(&m, [n.clone()]));
                let suc2 = self.check(&ihctx, &suc.body, &nbe.apply_closure(&m, [rc(Value::Suc(n))]))?;
                let ty = nbe.apply_closure(&m, [self.eval(ctx, &scrut2)]);
                let kind = NatRec {
                    motive: Bound::new(motive.names.clone(), m_body),
                    zero: zero2,
                    suc: Bound::new(suc.names.clone(), suc2),
                    scrut: scrut2,
                };
                Ok((rebuild(t, kind), ty))
            }
            IdT(a, x, y) => {
                let (a2, l) = self.check_type(ctx, a)?;
                let a_v = self.eval(ctx, &a2);
                let x2 = self.check(ctx, x, &a_v)?;
                let y2 = self.check(ctx, y, &a_v)?;
                Ok((rebuild(t, IdT(a2, x2, y2)), rc(Value::Univ(l))))
            }
            Refl(a) => {
                let (a2, a_ty) = self.infer(ctx, a)?;
                let v = self.eval(ctx, &a2);
                Ok((rebuild(t, Refl(a2)), rc(Value::Id(a_ty, v.clone(), v))))
            }
            J { motive, base, path } => {
                let (path2, p_ty) = self.infer(ctx, path)?;
                let (a, x, y) = match &*p_ty {
                    Value::Id(a, x, y) => (a.clone(), x.clone(), y.clone()),
                    _ => {
                        return Err(self
                            .error(ctx, TypeErrorKind::NotAnIdentity { ty: self.show_type(ctx, &p_ty) })
                            .at(path.span))
                    }
                };
                let (c1, vx) = ctx.bind(&motive.names[0], a.clone());
                let (c2, vy) = c1.bind(&motive.names[1], a.clone());
                let (c3, _) = c2.bind(&motive.names[2], rc(Value::Id(a.clone(), vx, vy)));
                let m_body = self.check_motive(&c3, &motive.body)?;
                let m = self.closure(ctx, &motive.names, m_body.clone());
                let (bctx, bx) = ctx.bind(&base.names[0], a);
                let base_ty = nbe.apply_closure(&m, [bx.clone(), bx.clone(), rc(Value::Refl(bx))]);
                let base2 = self.check(&bctx, &base.body, &base_ty)?;
                let ty = nbe.apply_closure(&m, [x, y, self.eval(ctx, &path2)]);
                let kind = J {
                    motive: Bound::new(motive.names.clone(), m_body),
                    base: Bound::new(base.names.clone(), base2),
                    path: path2,
                };
                Ok((rebuild(t, kind), ty))
            }
            TruncT(a) => {
                let (a2, l) = self.check_type(ctx, a)?;
                Ok((rebuild(t, TruncT(a2)), rc(Value::Univ(l))))
            }
            TrIntro(a) => {
                let (a2, a_ty) = self.infer(ctx, a)?;
                Ok((rebuild(t, TrIntro(a2)), rc(Value::Trunc(a_ty))))
            }
            TrRec { motive_ty, prop, fun, scrut, .. } => {
                let (scrut2, a) = self.infer_truncation(ctx, scrut)?;
                let motive2 = self.check_motive(ctx, motive_ty)?;
                let p = self.eval(ctx, &motive2);
                let prop2 = self.check_prop_proof(ctx, prop, &nbe.is_prop(p.clone()))?;
                let fun2 = self.check(ctx, fun, &nbe.arrow(a.clone(), p.clone()))?;
                let kind = TrRec {
                    motive_ty: motive2,
                    prop: prop2,
                    fun: fun2,
                    scrut: scrut2,
                    elem_ty: Some(nbe.readback_type(&mut ctx.types.clone(), &a)),
                };
                Ok((rebuild(t, kind), p))
            }
            TrInd { motive, prop, fun, scrut, .. } => {
                let (scrut2, a) = self.infer_truncation(ctx, scrut)?;
                let (mctx, _) = ctx.bind(&motive.names[0], rc(Value::Trunc(a.clone())));
                let m_body = self.check_motive(&mctx, &motive.body)?;
                let m = self.closure(ctx, &motive.names, m_body.clone());
                let prop2 = self.check_prop_proof(ctx, prop, &nbe.tr_ind_prop_type(a.clone(), &m))?;
                let fun2 = self.check(ctx, fun, &nbe.tr_ind_fun_type(a.clone(), &m))?;
                let ty = nbe.apply_closure(&m, [self.eval(ctx, &scrut2)]);
                let kind = TrInd {
                    motive: Bound::new(motive.names.clone(), m_body),
                    prop: prop2,
                    fun: fun2,
                    scrut: scrut2,
                    elem_ty: Some(nbe.readback_type(&mut ctx.types.clone(), &a)),
                };
                Ok((rebuild(t, kind), ty))
            }
            TruncEq { lhs, rhs, .. } => {
                let (lhs2, a, rhs2) = match self.infer_truncation(ctx, lhs) {
                    Ok((lhs2, a)) => {
                        let rhs2 = self.check(ctx, rhs, &rc(Value::Trunc(a.clone())))?;
                        (lhs2, a, rhs2)
                    }
                    Err(e) if matches!(e.kind, TypeErrorKind::CannotInfer) => {
                        let (rhs2, a) = self.infer_truncation(ctx, rhs)?;
                        let lhs2 = self.check(ctx, lhs, &rc(Value::Trunc(a.clone())))?;
                        (lhs2, a, rhs2)
                    }
                    Err(e) => return Err(e),
                };
                let trunc = rc(Value::Trunc(a.clone()));
                let ty = rc(Value::Id(trunc, self.eval(ctx, &lhs2), self.eval(ctx, &rhs2)));
                let kind = TruncEq {
                    lhs: lhs2,
                    rhs: rhs2,
                    elem_ty: Some(nbe.readback_type(&mut ctx.types.clone(), &a)),
                };
                Ok((rebuild(t, kind), ty))
            }
            Ann(inner, ty) => {
                let (ty2, _) = self.check_type(ctx, ty)?;
                let ty_v = self.eval(ctx, &ty2);
                let inner2 = self.check(ctx, inner, &ty_v)?;
                Ok((rebuild(t, Ann(inner2, ty2)), ty_v))
            }
            Lam(None, _) | Pair(..) | Inl(_) | Inr(_) => Err(self.error(ctx, TypeErrorKind::CannotInfer)),
        }
    }

    /// Infers `t : Trunc A` and returns `A`.
    fn infer_truncation(&self, ctx: &Context, t: &RcTerm) -> Result<(RcTerm, RcValue)> {
        let (t2, ty) = self.infer(ctx, t)?;
        match &*ty {
            Value::Trunc(a) => Ok((t2, a.clone())),
            _ => Err(self
                .error(ctx, TypeErrorKind::NotATruncation { ty: self.show_type(ctx, &ty) })
                .at(t.span)),
        }
    }

    fn check_prop_proof(&self, ctx: &Context, t: &RcTerm, ty: &RcValue) -> Result<RcTerm> {
        self.check(ctx, t, ty).map_err(|e| {
            let span = e.span.or(t.span);
            self.error(ctx, TypeErrorKind::PropProofIllTyped { cause: Box::new(e) }).at(span)
        })
    }

    fn check_inner(&self, ctx: &Context, t: &RcTerm, ty: &RcValue) -> Result<RcTerm> {
        use TermKind::*;
        let nbe = &self.nbe;
        match (&t.kind, &**ty) {
            (Lam(dom, b), _) => {
                let (a, cod) = self.expect_pi(ctx, ty)?;
                let dom2 = match dom {
                    Some(dom) => {
                        let (dom2, _) = self.check_type(ctx, dom)?;
                        let d = self.eval(ctx, &dom2);
                        if !nbe.convertible_types(&mut ctx.types.clone(), &d, &a) {
                            return Err(self.mismatch(ctx, &a, &d).at(dom.span));
                        }
                        Some(dom2)
                    }
                    None => None,
                };
                let (inner, x) = ctx.bind(&b.names[0], a);
                let body = self.check(&inner, &b.body, &nbe.apply_closure(&cod, [x]))?;
                Ok(rebuild(t, Lam(dom2, Bound::new(b.names.clone(), body))))
            }
            (Pair(a, b), Value::Sigma(dom, cod)) => {
                let a2 = self.check(ctx, a, dom)?;
                let b_ty = nbe.apply_closure(cod, [self.eval(ctx, &a2)]);
                let b2 = self.check(ctx, b, &b_ty)?;
                Ok(rebuild(t, Pair(a2, b2)))
            }
            (Pair(..), _) => {
                Err(self.error(ctx, TypeErrorKind::NotASigma { ty: self.show_type(ctx, ty) }))
            }
            (Inl(a), Value::Sum(l, _)) => Ok(rebuild(t, Inl(self.check(ctx, a, l)?))),
            (Inr(b), Value::Sum(_, r)) => Ok(rebuild(t, Inr(self.check(ctx, b, r)?))),
            (Inl(_) | Inr(_), _) => {
                Err(self.error(ctx, TypeErrorKind::NotASum { ty: self.show_type(ctx, ty) }))
            }
            (Refl(a), Value::Id(a_ty, x, y)) => {
                let a2 = self.check(ctx, a, a_ty)?;
                let v = self.eval(ctx, &a2);
                let mut types = ctx.types.clone();
                if nbe.convertible(&mut types, &v, x, a_ty) && nbe.convertible(&mut types, &v, y, a_ty) {
                    Ok(rebuild(t, Refl(a2)))
                } else {
                    let actual = rc(Value::Id(a_ty.clone(), v.clone(), v));
                    Err(self.mismatch(ctx, ty, &actual))
                }
            }
            (TrIntro(a), Value::Trunc(a_ty)) => Ok(rebuild(t, TrIntro(self.check(ctx, a, a_ty)?))),
            _ => {
                let (t2, actual) = self.infer(ctx, t)?;
                if nbe.convertible_types(&mut ctx.types.clone(), &actual, ty) {
                    Ok(t2)
                } else {
                    Err(self.mismatch(ctx, ty, &actual))
                }
            }
        }
    }

    fn mismatch(&self, ctx: &Context, expected: &RcValue, actual: &RcValue) -> TypeError {
        let kind = match (&**expected, &**actual) {
            (Value::Univ(e), Value::Univ(a)) => TypeErrorKind::LevelError { expected: *e, actual: *a },
            _ => TypeErrorKind::Mismatch {
                expected: self.show_type(ctx, expected),
                actual: self.show_type(ctx, actual),
            },
        };
        self.error(ctx, kind)
    }
}
