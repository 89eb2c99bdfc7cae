//! Evaluation, type-directed readback and definitional equality.
//!
//! Values are produced in weak-head form with closures under binders.
//! Readback is type-directed and eta-expands at Π, Σ and Unit; conversion
//! follows the same typing discipline without building terms.

use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::syntax::{alpha_equal, Bound, Name, RcTerm, Term, TermKind};
use crate::value::{Closure, Env, EvalMode, Frame, Head, RcValue, Value};

/// Access to the values and types of global declarations.
pub trait Globals {
    /// The value a global unfolds to (a neutral for postulates).
    fn global_value(&self, name: &str) -> Option<RcValue>;
    fn global_type(&self, name: &str) -> Option<RcValue>;
}

/// A global table with nothing in it.
pub struct NoGlobals;

impl Globals for NoGlobals {
    fn global_value(&self, _: &str) -> Option<RcValue> {
        None
    }
    fn global_type(&self, _: &str) -> Option<RcValue> {
        None
    }
}

/// Types of the free variables in scope, indexed by de Bruijn level.
pub type Types = Vec<RcValue>;

#[derive(Clone, Copy)]
pub struct Nbe<'g> {
    globals: &'g dyn Globals,
    mode: EvalMode,
}

fn rc(v: Value) -> RcValue {
    Rc::new(v)
}

fn closure<const N: usize>(env: &Env, bound: &Bound<N>) -> Closure<N> {
    Closure { env: env.clone(), bound: bound.clone() }
}

fn extend(head: &Head, spine: &[Frame], frame: Frame) -> RcValue {
    let mut spine = spine.to_vec();
    spine.push(frame);
    rc(Value::Neutral(head.clone(), spine))
}

fn var_term(depth: usize, level: usize) -> RcTerm {
    Term::var(depth - 1 - level)
}

impl<'g> Nbe<'g> {
    pub fn new(globals: &'g dyn Globals, mode: EvalMode) -> Nbe<'g> {
        Nbe { globals, mode }
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn globals(&self) -> &'g dyn Globals {
        self.globals
    }

    // ---------------------------------------------------------------------
    // Evaluation

    pub fn eval(&self, env: &Env, t: &Term) -> RcValue {
        use TermKind::*;
        match &t.kind {
            Var(ix) => env
                .get(*ix)
                .unwrap_or_else(|| panic!("internal error: variable {} out of scope", ix))
                .clone(),
            Global(name) => self
                .globals
                .global_value(name)
                .unwrap_or_else(|| panic!("internal error: unknown global `{}`", name)),
            Univ(l) => rc(Value::Univ(*l)),
            Pi(a, b) => rc(Value::Pi(self.eval(env, a), closure(env, b))),
            Lam(_, b) => rc(Value::Lam(closure(env, b))),
            App(f, a) => self.app(&self.eval(env, f), self.eval(env, a)),
            Sigma(a, b) => rc(Value::Sigma(self.eval(env, a), closure(env, b))),
            Pair(a, b) => rc(Value::Pair(self.eval(env, a), self.eval(env, b))),
            Fst(p) => self.fst(&self.eval(env, p)),
            Snd(p) => self.snd(&self.eval(env, p)),
            Sum(a, b) => rc(Value::Sum(self.eval(env, a), self.eval(env, b))),
            Inl(a) => rc(Value::Inl(self.eval(env, a))),
            Inr(a) => rc(Value::Inr(self.eval(env, a))),
            SumCase { motive, on_left, on_right, scrut } => self.sum_case(
                &self.eval(env, scrut),
                closure(env, motive),
                closure(env, on_left),
                closure(env, on_right),
            ),
            UnitT => rc(Value::Unit),
            Star => rc(Value::Star),
            EmptyT => rc(Value::Empty),
            Absurd { motive, scrut } => self.absurd(&self.eval(env, scrut), closure(env, motive)),
            NatT => rc(Value::Nat),
            Zero => rc(Value::Zero),
            Suc(n) => rc(Value::Suc(self.eval(env, n))),
            NatRec { motive, zero, suc, scrut } => self.nat_rec(
                &self.eval(env, scrut),
                closure(env, motive),
                self.eval(env, zero),
                closure(env, suc),
            ),
            IdT(a, x, y) => rc(Value::Id(self.eval(env, a), self.eval(env, x), self.eval(env, y))),
            Refl(a) => rc(Value::Refl(self.eval(env, a))),
            J { motive, base, path } => {
                self.j(&self.eval(env, path), closure(env, motive), closure(env, base))
            }
            TruncT(a) => rc(Value::Trunc(self.eval(env, a))),
            TrIntro(a) => rc(Value::TrIntro(self.eval(env, a))),
            TrRec { motive_ty, prop, fun, scrut, elem_ty } => self.tr_rec(
                &self.eval(env, scrut),
                self.eval(env, motive_ty),
                self.eval(env, prop),
                self.eval(env, fun),
                elem_ty.as_ref().map(|e| self.eval(env, e)),
            ),
            TrInd { motive, prop, fun, scrut, elem_ty } => self.tr_ind(
                &self.eval(env, scrut),
                closure(env, motive),
                self.eval(env, prop),
                self.eval(env, fun),
                elem_ty.as_ref().map(|e| self.eval(env, e)),
            ),
            TruncEq { lhs, rhs, elem_ty } => rc(Value::Neutral(
                Head::TruncEq {
                    elem_ty: elem_ty.as_ref().map(|e| self.eval(env, e)),
                    lhs: self.eval(env, lhs),
                    rhs: self.eval(env, rhs),
                },
                Vec::new(),
            )),
            Ann(t, _) => self.eval(env, t),
        }
    }

    /// Extends the captured environment with `args` and evaluates the body.
    pub fn apply_closure<const N: usize>(&self, cl: &Closure<N>, args: [RcValue; N]) -> RcValue {
        let mut env = cl.env.clone();
        for a in args {
            env = env.push(a);
        }
        self.eval(&env, &cl.bound.body)
    }

    pub fn app(&self, f: &RcValue, a: RcValue) -> RcValue {
        match &**f {
            Value::Lam(cl) => self.apply_closure(cl, [a]),
            Value::Neutral(h, sp) => extend(h, sp, Frame::App(a)),
            _ => panic!("internal error: application of a non-function"),
        }
    }

    pub fn fst(&self, p: &RcValue) -> RcValue {
        match &**p {
            Value::Pair(a, _) => a.clone(),
            Value::Neutral(h, sp) => extend(h, sp, Frame::Fst),
            _ => panic!("internal error: projection from a non-pair"),
        }
    }

    pub fn snd(&self, p: &RcValue) -> RcValue {
        match &**p {
            Value::Pair(_, b) => b.clone(),
            Value::Neutral(h, sp) => extend(h, sp, Frame::Snd),
            _ => panic!("internal error: projection from a non-pair"),
        }
    }

    pub fn sum_case(
        &self,
        scrut: &RcValue,
        motive: Closure<1>,
        on_left: Closure<1>,
        on_right: Closure<1>,
    ) -> RcValue {
        match &**scrut {
            Value::Inl(a) => self.apply_closure(&on_left, [a.clone()]),
            Value::Inr(b) => self.apply_closure(&on_right, [b.clone()]),
            Value::Neutral(h, sp) => extend(h, sp, Frame::SumCase { motive, on_left, on_right }),
            _ => panic!("internal error: case on a non-sum"),
        }
    }

    pub fn absurd(&self, scrut: &RcValue, motive: Closure<1>) -> RcValue {
        match &**scrut {
            Value::Neutral(h, sp) => extend(h, sp, Frame::Absurd { motive }),
            _ => panic!("internal error: absurd on a canonical value"),
        }
    }

    pub fn nat_rec(
        &self,
        scrut: &RcValue,
        motive: Closure<1>,
        zero: RcValue,
        suc: Closure<2>,
    ) -> RcValue {
        // Peel numerals iteratively, then fold the successor case upwards.
        let mut depth = 0usize;
        let mut cur = scrut.clone();
        while let Value::Suc(n) = &*cur {
            let next = n.clone();
            depth += 1;
            cur = next;
        }
        let mut acc = match &*cur {
            Value::Zero => zero,
            Value::Neutral(h, sp) => extend(
                h,
                sp,
                Frame::NatRec { motive: motive.clone(), zero, suc: suc.clone() },
            ),
            _ => panic!("internal error: natrec on a non-number"),
        };
        let mut preds = Vec::with_capacity(depth);
        let mut cur = scrut.clone();
        for _ in 0..depth {
            let next = match &*cur {
                Value::Suc(n) => n.clone(),
                _ => unreachable!(),
            };
            preds.push(next.clone());
            cur = next;
        }
        for n in preds.into_iter().rev() {
            acc = self.apply_closure(&suc, [n, acc]);
        }
        acc
    }

    pub fn j(&self, path: &RcValue, motive: Closure<3>, base: Closure<1>) -> RcValue {
        match &**path {
            Value::Refl(a) => self.apply_closure(&base, [a.clone()]),
            Value::Neutral(h, sp) => extend(h, sp, Frame::J { motive, base }),
            _ => panic!("internal error: J on a non-path"),
        }
    }

    pub fn tr_rec(
        &self,
        scrut: &RcValue,
        motive_ty: RcValue,
        prop: RcValue,
        fun: RcValue,
        elem_ty: Option<RcValue>,
    ) -> RcValue {
        let frame = || Frame::TrRec { motive_ty: motive_ty.clone(), prop: prop.clone(), fun: fun.clone() };
        match &**scrut {
            Value::TrIntro(a) if self.mode.trunc_beta => self.app(&fun, a.clone()),
            Value::TrIntro(a) => rc(Value::Neutral(
                Head::StuckTr { elem_ty, arg: a.clone() },
                alloc::vec![frame()],
            )),
            Value::Neutral(h, sp) => extend(h, sp, frame()),
            _ => panic!("internal error: trec on a non-truncation"),
        }
    }

    pub fn tr_ind(
        &self,
        scrut: &RcValue,
        motive: Closure<1>,
        prop: RcValue,
        fun: RcValue,
        elem_ty: Option<RcValue>,
    ) -> RcValue {
        let frame = || Frame::TrInd { motive: motive.clone(), prop: prop.clone(), fun: fun.clone() };
        match &**scrut {
            Value::TrIntro(a) if self.mode.trunc_beta => self.app(&fun, a.clone()),
            Value::TrIntro(a) => rc(Value::Neutral(
                Head::StuckTr { elem_ty, arg: a.clone() },
                alloc::vec![frame()],
            )),
            Value::Neutral(h, sp) => extend(h, sp, frame()),
            _ => panic!("internal error: tind on a non-truncation"),
        }
    }

    // ---------------------------------------------------------------------
    // Types used by the truncation rules

    /// `(x y : P) -> Id P x y`
    pub fn is_prop(&self, p: RcValue) -> RcValue {
        use TermKind::*;
        let body = Term::pi(
            "x",
            Term::var(0),
            Term::pi("y", Term::var(1), Term::new(IdT(Term::var(2), Term::var(1), Term::var(0)))),
        );
        self.eval(&Env::new().push(p), &body)
    }

    /// `A -> B`
    pub fn arrow(&self, a: RcValue, b: RcValue) -> RcValue {
        self.eval(&Env::from_values([a, b]), &Term::pi("x", Term::var(1), Term::var(1)))
    }

    /// `(z : Trunc A) -> isProp (P z)` for a motive closure `P`.
    pub fn tr_ind_prop_type(&self, a: RcValue, motive: &Closure<1>) -> RcValue {
        use TermKind::*;
        let pz = |m: usize, z: usize| Term::app(Term::var(m), Term::var(z));
        let body = Term::pi(
            "z",
            Term::new(TruncT(Term::var(1))),
            Term::pi(
                "x",
                pz(1, 0),
                Term::pi("y", pz(2, 1), Term::new(IdT(pz(3, 2), Term::var(1), Term::var(0)))),
            ),
        );
        let m = rc(Value::Lam(motive.clone()));
        self.eval(&Env::from_values([a, m]), &body)
    }

    /// `(x : A) -> P (tr x)` for a motive closure `P`.
    pub fn tr_ind_fun_type(&self, a: RcValue, motive: &Closure<1>) -> RcValue {
        let body = Term::pi(
            "x",
            Term::var(1),
            Term::app(Term::var(1), Term::new(TermKind::TrIntro(Term::var(0)))),
        );
        let m = rc(Value::Lam(motive.clone()));
        self.eval(&Env::from_values([a, m]), &body)
    }

    // ---------------------------------------------------------------------
    // Readback

    fn fresh<R>(
        &self,
        types: &mut Types,
        ty: RcValue,
        f: impl FnOnce(&mut Types, RcValue) -> R,
    ) -> R {
        let v = Value::var(types.len());
        types.push(ty);
        let out = f(types, v);
        types.pop();
        out
    }

    /// Normal form of `v : ty`, eta-long at Π, Σ and Unit.
    pub fn readback(&self, types: &mut Types, v: &RcValue, ty: &RcValue) -> RcTerm {
        match &**ty {
            Value::Pi(dom, cod) => {
                let hint = match &**v {
                    Value::Lam(cl) => cl.names()[0].clone(),
                    _ => cod.names()[0].clone(),
                };
                self.fresh(types, dom.clone(), |types, x| {
                    let body_ty = self.apply_closure(cod, [x.clone()]);
                    let body = self.readback(types, &self.app(v, x), &body_ty);
                    Term::new(TermKind::Lam(None, Bound::new([hint], body)))
                })
            }
            Value::Sigma(dom, cod) => {
                let a = self.fst(v);
                let b = self.snd(v);
                let b_ty = self.apply_closure(cod, [a.clone()]);
                Term::new(TermKind::Pair(self.readback(types, &a, dom), self.readback(types, &b, &b_ty)))
            }
            Value::Unit => Term::new(TermKind::Star),
            Value::Univ(_) => self.readback_type(types, v),
            _ => match (&**v, &**ty) {
                (Value::Zero, _) => Term::new(TermKind::Zero),
                (Value::Suc(_), _) => {
                    let mut n = 0;
                    let mut cur = v.clone();
                    while let Value::Suc(p) = &*cur.clone() {
                        n += 1;
                        cur = p.clone();
                    }
                    let mut out = self.readback(types, &cur, ty);
                    for _ in 0..n {
                        out = Term::new(TermKind::Suc(out));
                    }
                    out
                }
                (Value::Inl(a), Value::Sum(l, _)) => Term::new(TermKind::Inl(self.readback(types, a, l))),
                (Value::Inr(b), Value::Sum(_, r)) => Term::new(TermKind::Inr(self.readback(types, b, r))),
                (Value::Refl(a), Value::Id(t, _, _)) => Term::new(TermKind::Refl(self.readback(types, a, t))),
                (Value::TrIntro(a), Value::Trunc(t)) => {
                    Term::new(TermKind::TrIntro(self.readback(types, a, t)))
                }
                (Value::Neutral(h, sp), _) => self.readback_neutral(types, h, sp),
                _ => self.readback_untyped(types.len(), v),
            },
        }
    }

    /// Normal form of a value that is itself a type.
    pub fn readback_type(&self, types: &mut Types, v: &RcValue) -> RcTerm {
        use TermKind::*;
        match &**v {
            Value::Univ(l) => Term::new(Univ(*l)),
            Value::Pi(dom, cod) | Value::Sigma(dom, cod) => {
                let d = self.readback_type(types, dom);
                let body = self.fresh(types, dom.clone(), |types, x| {
                    self.readback_type(types, &self.apply_closure(cod, [x]))
                });
                let bound = Bound::new(cod.bound.names.clone(), body);
                if matches!(&**v, Value::Pi(..)) {
                    Term::new(Pi(d, bound))
                } else {
                    Term::new(Sigma(d, bound))
                }
            }
            Value::Sum(a, b) => Term::new(Sum(self.readback_type(types, a), self.readback_type(types, b))),
            Value::Unit => Term::new(UnitT),
            Value::Empty => Term::new(EmptyT),
            Value::Nat => Term::new(NatT),
            Value::Id(a, x, y) => Term::new(IdT(
                self.readback_type(types, a),
                self.readback(types, x, a),
                self.readback(types, y, a),
            )),
            Value::Trunc(a) => Term::new(TruncT(self.readback_type(types, a))),
            Value::Neutral(h, sp) => self.readback_neutral(types, h, sp),
            _ => self.readback_untyped(types.len(), v),
        }
    }

    /// Type of a neutral head, when it can be determined.
    fn head_type(&self, types: &Types, head: &Head) -> Option<RcValue> {
        match head {
            Head::Var(level) => types.get(*level).cloned(),
            Head::Postulate(name) => self.globals.global_type(name),
            Head::TruncEq { elem_ty: Some(a), lhs, rhs } => {
                Some(rc(Value::Id(rc(Value::Trunc(a.clone())), lhs.clone(), rhs.clone())))
            }
            Head::StuckTr { elem_ty: Some(a), .. } => Some(rc(Value::Trunc(a.clone()))),
            _ => None,
        }
    }

    fn readback_head(&self, types: &mut Types, head: &Head) -> RcTerm {
        match head {
            Head::Var(level) => var_term(types.len(), *level),
            Head::Postulate(name) => Term::new(TermKind::Global(name.clone())),
            Head::TruncEq { elem_ty: Some(a), lhs, rhs } => {
                let t = rc(Value::Trunc(a.clone()));
                Term::new(TermKind::TruncEq {
                    lhs: self.readback(types, lhs, &t),
                    rhs: self.readback(types, rhs, &t),
                    elem_ty: Some(self.readback_type(types, a)),
                })
            }
            Head::StuckTr { elem_ty: Some(a), arg } => {
                Term::new(TermKind::TrIntro(self.readback(types, arg, a)))
            }
            _ => self.readback_head_untyped(types.len(), head),
        }
    }

    fn readback_neutral(&self, types: &mut Types, head: &Head, spine: &[Frame]) -> RcTerm {
        let mut ty = match self.head_type(types, head) {
            Some(ty) => ty,
            None => return self.readback_neutral_untyped(types.len(), head, spine),
        };
        let mut term = self.readback_head(types, head);
        for (i, frame) in spine.iter().enumerate() {
            let cur = || rc(Value::Neutral(head.clone(), spine[..i].to_vec()));
            match self.readback_frame(types, term.clone(), frame, &ty, cur) {
                Some((t, next)) => {
                    term = t;
                    ty = next;
                }
                None => return self.readback_neutral_untyped(types.len(), head, spine),
            }
        }
        term
    }

    /// Reads back one elimination frame applied to `term : ty`; returns the
    /// new term and its type.
    fn readback_frame(
        &self,
        types: &mut Types,
        term: RcTerm,
        frame: &Frame,
        ty: &RcValue,
        cur: impl Fn() -> RcValue,
    ) -> Option<(RcTerm, RcValue)> {
        use TermKind::*;
        Some(match (frame, &**ty) {
            (Frame::App(a), Value::Pi(dom, cod)) => {
                let arg = self.readback(types, a, dom);
                (Term::new(App(term, arg)), self.apply_closure(cod, [a.clone()]))
            }
            (Frame::Fst, Value::Sigma(dom, _)) => (Term::new(Fst(term)), dom.clone()),
            (Frame::Snd, Value::Sigma(_, cod)) => {
                (Term::new(Snd(term)), self.apply_closure(cod, [self.fst(&cur())]))
            }
            (Frame::SumCase { motive, on_left, on_right }, Value::Sum(l, r)) => {
                let m = self.readback_motive(types, motive, ty.clone());
                let left = self.fresh(types, l.clone(), |types, a| {
                    let t = self.apply_closure(motive, [rc(Value::Inl(a.clone()))]);
                    self.readback(types, &self.apply_closure(on_left, [a]), &t)
                });
                let right = self.fresh(types, r.clone(), |types, b| {
                    let t = self.apply_closure(motive, [rc(Value::Inr(b.clone()))]);
                    self.readback(types, &self.apply_closure(on_right, [b]), &t)
                });
                let out = Term::new(SumCase {
                    motive: m,
                    on_left: Bound::new(on_left.bound.names.clone(), left),
                    on_right: Bound::new(on_right.bound.names.clone(), right),
                    scrut: term,
                });
                (out, self.apply_closure(motive, [cur()]))
            }
            (Frame::Absurd { motive }, Value::Empty) => {
                let m = self.readback_motive(types, motive, ty.clone());
                (Term::new(Absurd { motive: m, scrut: term }), self.apply_closure(motive, [cur()]))
            }
            (Frame::NatRec { motive, zero, suc }, Value::Nat) => {
                let m = self.readback_motive(types, motive, ty.clone());
                let z_ty = self.apply_closure(motive, [rc(Value::Zero)]);
                let z = self.readback(types, zero, &z_ty);
                let s = self.fresh(types, rc(Value::Nat), |types, n| {
                    let ih_ty = self.apply_closure(motive, [n.clone()]);
                    self.fresh(types, ih_ty, |types, ih| {
                        let t = self.apply_closure(motive, [rc(Value::Suc(n.clone()))]);
                        self.readback(types, &self.apply_closure(suc, [n, ih]), &t)
                    })
                });
                let out = Term::new(NatRec {
                    motive: m,
                    zero: z,
                    suc: Bound::new(suc.bound.names.clone(), s),
                    scrut: term,
                });
                (out, self.apply_closure(motive, [cur()]))
            }
            (Frame::J { motive, base }, Value::Id(a, x, y)) => {
                let m = self.with_path_vars(types, a, |nbe, types, vx, vy, vp| {
                    nbe.readback_type(types, &nbe.apply_closure(motive, [vx, vy, vp]))
                });
                let b = self.fresh(types, a.clone(), |types, vx| {
                    let t = self.apply_closure(
                        motive,
                        [vx.clone(), vx.clone(), rc(Value::Refl(vx.clone()))],
                    );
                    self.readback(types, &self.apply_closure(base, [vx]), &t)
                });
                let out = Term::new(J {
                    motive: Bound::new(motive.bound.names.clone(), m),
                    base: Bound::new(base.bound.names.clone(), b),
                    path: term,
                });
                (out, self.apply_closure(motive, [x.clone(), y.clone(), cur()]))
            }
            (Frame::TrRec { motive_ty, prop, fun }, Value::Trunc(a)) => {
                let out = Term::new(TrRec {
                    motive_ty: self.readback_type(types, motive_ty),
                    prop: self.readback(types, prop, &self.is_prop(motive_ty.clone())),
                    fun: self.readback(types, fun, &self.arrow(a.clone(), motive_ty.clone())),
                    scrut: term,
                    elem_ty: Some(self.readback_type(types, a)),
                });
                (out, motive_ty.clone())
            }
            (Frame::TrInd { motive, prop, fun }, Value::Trunc(a)) => {
                let m = self.readback_motive(types, motive, ty.clone());
                let out = Term::new(TrInd {
                    motive: m,
                    prop: self.readback(types, prop, &self.tr_ind_prop_type(a.clone(), motive)),
                    fun: self.readback(types, fun, &self.tr_ind_fun_type(a.clone(), motive)),
                    scrut: term,
                    elem_ty: Some(self.readback_type(types, a)),
                });
                (out, self.apply_closure(motive, [cur()]))
            }
            _ => return None,
        })
    }

    fn readback_motive(&self, types: &mut Types, motive: &Closure<1>, dom: RcValue) -> Bound<1> {
        let body = self.fresh(types, dom, |types, z| {
            self.readback_type(types, &self.apply_closure(motive, [z]))
        });
        Bound::new(motive.bound.names.clone(), body)
    }

    /// Runs `f` under fresh `x y : A` and `p : Id A x y`.
    fn with_path_vars<R>(
        &self,
        types: &mut Types,
        a: &RcValue,
        f: impl FnOnce(&Self, &mut Types, RcValue, RcValue, RcValue) -> R,
    ) -> R {
        self.fresh(types, a.clone(), |types, vx| {
            self.fresh(types, a.clone(), |types, vy| {
                let p_ty = rc(Value::Id(a.clone(), vx.clone(), vy.clone()));
                self.fresh(types, p_ty, |types, vp| f(self, types, vx, vy, vp))
            })
        })
    }

    // ---------------------------------------------------------------------
    // Untyped readback, used only where a type annotation is missing.

    pub fn readback_untyped(&self, depth: usize, v: &RcValue) -> RcTerm {
        use TermKind::*;
        let under = |cl: &Closure<1>| -> Bound<1> {
            let body = self.apply_closure(cl, [Value::var(depth)]);
            Bound::new(cl.bound.names.clone(), self.readback_untyped(depth + 1, &body))
        };
        match &**v {
            Value::Univ(l) => Term::new(Univ(*l)),
            Value::Pi(a, b) => Term::new(Pi(self.readback_untyped(depth, a), under(b))),
            Value::Sigma(a, b) => Term::new(Sigma(self.readback_untyped(depth, a), under(b))),
            Value::Lam(b) => Term::new(Lam(None, under(b))),
            Value::Pair(a, b) => Term::new(Pair(self.readback_untyped(depth, a), self.readback_untyped(depth, b))),
            Value::Sum(a, b) => Term::new(Sum(self.readback_untyped(depth, a), self.readback_untyped(depth, b))),
            Value::Inl(a) => Term::new(Inl(self.readback_untyped(depth, a))),
            Value::Inr(a) => Term::new(Inr(self.readback_untyped(depth, a))),
            Value::Unit => Term::new(UnitT),
            Value::Star => Term::new(Star),
            Value::Empty => Term::new(EmptyT),
            Value::Nat => Term::new(NatT),
            Value::Zero => Term::new(Zero),
            Value::Suc(n) => Term::new(Suc(self.readback_untyped(depth, n))),
            Value::Id(a, x, y) => Term::new(IdT(
                self.readback_untyped(depth, a),
                self.readback_untyped(depth, x),
                self.readback_untyped(depth, y),
            )),
            Value::Refl(a) => Term::new(Refl(self.readback_untyped(depth, a))),
            Value::Trunc(a) => Term::new(TruncT(self.readback_untyped(depth, a))),
            Value::TrIntro(a) => Term::new(TrIntro(self.readback_untyped(depth, a))),
            Value::Neutral(h, sp) => self.readback_neutral_untyped(depth, h, sp),
        }
    }

    fn readback_head_untyped(&self, depth: usize, head: &Head) -> RcTerm {
        match head {
            Head::Var(level) => var_term(depth, *level),
            Head::Postulate(name) => Term::new(TermKind::Global(name.clone())),
            Head::TruncEq { elem_ty, lhs, rhs } => Term::new(TermKind::TruncEq {
                lhs: self.readback_untyped(depth, lhs),
                rhs: self.readback_untyped(depth, rhs),
                elem_ty: elem_ty.as_ref().map(|a| self.readback_untyped(depth, a)),
            }),
            Head::StuckTr { arg, .. } => Term::new(TermKind::TrIntro(self.readback_untyped(depth, arg))),
        }
    }

    fn readback_neutral_untyped(&self, depth: usize, head: &Head, spine: &[Frame]) -> RcTerm {
        use TermKind::*;
        let elem_ty = match head {
            Head::StuckTr { elem_ty, .. } => elem_ty.as_ref().map(|a| self.readback_untyped(depth, a)),
            _ => None,
        };
        let under1 = |cl: &Closure<1>| -> Bound<1> {
            let body = self.apply_closure(cl, [Value::var(depth)]);
            Bound::new(cl.bound.names.clone(), self.readback_untyped(depth + 1, &body))
        };
        let mut term = self.readback_head_untyped(depth, head);
        for frame in spine {
            term = match frame {
                Frame::App(a) => Term::new(App(term, self.readback_untyped(depth, a))),
                Frame::Fst => Term::new(Fst(term)),
                Frame::Snd => Term::new(Snd(term)),
                Frame::SumCase { motive, on_left, on_right } => Term::new(SumCase {
                    motive: under1(motive),
                    on_left: under1(on_left),
                    on_right: under1(on_right),
                    scrut: term,
                }),
                Frame::Absurd { motive } => Term::new(Absurd { motive: under1(motive), scrut: term }),
                Frame::NatRec { motive, zero, suc } => {
                    let body = self.apply_closure(suc, [Value::var(depth), Value::var(depth + 1)]);
                    Term::new(NatRec {
                        motive: under1(motive),
                        zero: self.readback_untyped(depth, zero),
                        suc: Bound::new(suc.bound.names.clone(), self.readback_untyped(depth + 2, &body)),
                        scrut: term,
                    })
                }
                Frame::J { motive, base } => {
                    let m = self.apply_closure(
                        motive,
                        [Value::var(depth), Value::var(depth + 1), Value::var(depth + 2)],
                    );
                    Term::new(J {
                        motive: Bound::new(motive.bound.names.clone(), self.readback_untyped(depth + 3, &m)),
                        base: under1(base),
                        path: term,
                    })
                }
                Frame::TrRec { motive_ty, prop, fun } => Term::new(TrRec {
                    motive_ty: self.readback_untyped(depth, motive_ty),
                    prop: self.readback_untyped(depth, prop),
                    fun: self.readback_untyped(depth, fun),
                    scrut: term,
                    elem_ty: elem_ty.clone(),
                }),
                Frame::TrInd { motive, prop, fun } => Term::new(TrInd {
                    motive: under1(motive),
                    prop: self.readback_untyped(depth, prop),
                    fun: self.readback_untyped(depth, fun),
                    scrut: term,
                    elem_ty: elem_ty.clone(),
                }),
            };
        }
        term
    }

    // ---------------------------------------------------------------------
    // Conversion

    /// Definitional equality of `a, b : ty`.
    pub fn convertible(&self, types: &mut Types, a: &RcValue, b: &RcValue, ty: &RcValue) -> bool {
        if Rc::ptr_eq(a, b) {
            return true;
        }
        match &**ty {
            Value::Pi(dom, cod) => self.fresh(types, dom.clone(), |types, x| {
                let t = self.apply_closure(cod, [x.clone()]);
                self.convertible(types, &self.app(a, x.clone()), &self.app(b, x), &t)
            }),
            Value::Sigma(dom, cod) => {
                let (a1, b1) = (self.fst(a), self.fst(b));
                if !self.convertible(types, &a1, &b1, dom) {
                    return false;
                }
                let t = self.apply_closure(cod, [a1]);
                self.convertible(types, &self.snd(a), &self.snd(b), &t)
            }
            Value::Unit => true,
            Value::Univ(_) => self.convertible_types(types, a, b),
            _ => match (&**a, &**b, &**ty) {
                (Value::Zero, Value::Zero, _) => true,
                (Value::Suc(x), Value::Suc(y), _) => self.convertible(types, x, y, ty),
                (Value::Inl(x), Value::Inl(y), Value::Sum(l, _)) => self.convertible(types, x, y, l),
                (Value::Inr(x), Value::Inr(y), Value::Sum(_, r)) => self.convertible(types, x, y, r),
                (Value::Refl(x), Value::Refl(y), Value::Id(t, _, _)) => self.convertible(types, x, y, t),
                (Value::TrIntro(x), Value::TrIntro(y), Value::Trunc(t)) => {
                    self.convertible(types, x, y, t)
                }
                (Value::Neutral(h1, s1), Value::Neutral(h2, s2), _) => {
                    self.convertible_neutral(types, (h1, s1), (h2, s2))
                }
                _ => false,
            },
        }
    }

    /// Definitional equality of two types.
    pub fn convertible_types(&self, types: &mut Types, a: &RcValue, b: &RcValue) -> bool {
        if Rc::ptr_eq(a, b) {
            return true;
        }
        match (&**a, &**b) {
            (Value::Univ(i), Value::Univ(j)) => i == j,
            (Value::Pi(d1, c1), Value::Pi(d2, c2)) | (Value::Sigma(d1, c1), Value::Sigma(d2, c2)) => {
                if core::mem::discriminant(&**a) != core::mem::discriminant(&**b) {
                    return false;
                }
                self.convertible_types(types, d1, d2)
                    && self.fresh(types, d1.clone(), |types, x| {
                        self.convertible_types(
                            types,
                            &self.apply_closure(c1, [x.clone()]),
                            &self.apply_closure(c2, [x]),
                        )
                    })
            }
            (Value::Sum(a1, b1), Value::Sum(a2, b2)) => {
                self.convertible_types(types, a1, a2) && self.convertible_types(types, b1, b2)
            }
            (Value::Unit, Value::Unit) | (Value::Empty, Value::Empty) | (Value::Nat, Value::Nat) => true,
            (Value::Id(t1, x1, y1), Value::Id(t2, x2, y2)) => {
                self.convertible_types(types, t1, t2)
                    && self.convertible(types, x1, x2, t1)
                    && self.convertible(types, y1, y2, t1)
            }
            (Value::Trunc(t1), Value::Trunc(t2)) => self.convertible_types(types, t1, t2),
            (Value::Neutral(h1, s1), Value::Neutral(h2, s2)) => {
                self.convertible_neutral(types, (h1, s1), (h2, s2))
            }
            _ => false,
        }
    }

    fn convertible_heads(&self, types: &mut Types, h1: &Head, h2: &Head) -> Option<bool> {
        Some(match (h1, h2) {
            (Head::Var(i), Head::Var(j)) => i == j,
            (Head::Postulate(x), Head::Postulate(y)) => x == y,
            (
                Head::TruncEq { elem_ty: Some(a1), lhs: l1, rhs: r1 },
                Head::TruncEq { elem_ty: Some(a2), lhs: l2, rhs: r2 },
            ) => {
                let t = rc(Value::Trunc(a1.clone()));
                self.convertible_types(types, a1, a2)
                    && self.convertible(types, l1, l2, &t)
                    && self.convertible(types, r1, r2, &t)
            }
            (
                Head::StuckTr { elem_ty: Some(a1), arg: x1 },
                Head::StuckTr { elem_ty: Some(a2), arg: x2 },
            ) => self.convertible_types(types, a1, a2) && self.convertible(types, x1, x2, a1),
            (Head::TruncEq { .. }, Head::TruncEq { .. }) | (Head::StuckTr { .. }, Head::StuckTr { .. }) => {
                return None
            }
            _ => false,
        })
    }

    fn convertible_neutral(
        &self,
        types: &mut Types,
        (h1, s1): (&Head, &[Frame]),
        (h2, s2): (&Head, &[Frame]),
    ) -> bool {
        if s1.len() != s2.len() {
            return false;
        }
        let untyped = |nbe: &Self, types: &Types| {
            let d = types.len();
            alpha_equal(
                &nbe.readback_neutral_untyped(d, h1, s1),
                &nbe.readback_neutral_untyped(d, h2, s2),
            )
        };
        match self.convertible_heads(types, h1, h2) {
            Some(false) => return false,
            None => return untyped(self, types),
            Some(true) => {}
        }
        let mut ty = match self.head_type(types, h1) {
            Some(ty) => ty,
            None => return untyped(self, types),
        };
        for (i, (f1, f2)) in s1.iter().zip(s2.iter()).enumerate() {
            let cur = || rc(Value::Neutral(h1.clone(), s1[..i].to_vec()));
            match self.convertible_frame(types, f1, f2, &ty, cur) {
                Some(Some(next)) => ty = next,
                Some(None) => return false,
                None => return untyped(self, types),
            }
        }
        true
    }

    /// Compares two frames applied to the same neutral of type `ty`.
    /// `Some(Some(ty'))` on success, `Some(None)` on mismatch, `None` when the
    /// type does not have the shape the frame expects.
    fn convertible_frame(
        &self,
        types: &mut Types,
        f1: &Frame,
        f2: &Frame,
        ty: &RcValue,
        cur: impl Fn() -> RcValue,
    ) -> Option<Option<RcValue>> {
        let ok = |b: bool, next: RcValue| if b { Some(next) } else { None };
        Some(match (f1, f2, &**ty) {
            (Frame::App(a1), Frame::App(a2), Value::Pi(dom, cod)) => {
                ok(self.convertible(types, a1, a2, dom), self.apply_closure(cod, [a1.clone()]))
            }
            (Frame::Fst, Frame::Fst, Value::Sigma(dom, _)) => Some(dom.clone()),
            (Frame::Snd, Frame::Snd, Value::Sigma(_, cod)) => {
                Some(self.apply_closure(cod, [self.fst(&cur())]))
            }
            (
                Frame::SumCase { motive: m1, on_left: l1, on_right: r1 },
                Frame::SumCase { motive: m2, on_left: l2, on_right: r2 },
                Value::Sum(a, b),
            ) => {
                let same = self.convertible_motives(types, m1, m2, ty.clone())
                    && self.fresh(types, a.clone(), |types, x| {
                        let t = self.apply_closure(m1, [rc(Value::Inl(x.clone()))]);
                        self.convertible(
                            types,
                            &self.apply_closure(l1, [x.clone()]),
                            &self.apply_closure(l2, [x]),
                            &t,
                        )
                    })
                    && self.fresh(types, b.clone(), |types, x| {
                        let t = self.apply_closure(m1, [rc(Value::Inr(x.clone()))]);
                        self.convertible(
                            types,
                            &self.apply_closure(r1, [x.clone()]),
                            &self.apply_closure(r2, [x]),
                            &t,
                        )
                    });
                ok(same, self.apply_closure(m1, [cur()]))
            }
            (Frame::Absurd { motive: m1 }, Frame::Absurd { motive: m2 }, Value::Empty) => ok(
                self.convertible_motives(types, m1, m2, ty.clone()),
                self.apply_closure(m1, [cur()]),
            ),
            (
                Frame::NatRec { motive: m1, zero: z1, suc: s1 },
                Frame::NatRec { motive: m2, zero: z2, suc: s2 },
                Value::Nat,
            ) => {
                let same = self.convertible_motives(types, m1, m2, ty.clone())
                    && self.convertible(types, z1, z2, &self.apply_closure(m1, [rc(Value::Zero)]))
                    && self.fresh(types, rc(Value::Nat), |types, n| {
                        let ih_ty = self.apply_closure(m1, [n.clone()]);
                        self.fresh(types, ih_ty, |types, ih| {
                            let t = self.apply_closure(m1, [rc(Value::Suc(n.clone()))]);
                            self.convertible(
                                types,
                                &self.apply_closure(s1, [n.clone(), ih.clone()]),
                                &self.apply_closure(s2, [n, ih]),
                                &t,
                            )
                        })
                    });
                ok(same, self.apply_closure(m1, [cur()]))
            }
            (
                Frame::J { motive: m1, base: b1 },
                Frame::J { motive: m2, base: b2 },
                Value::Id(a, x, y),
            ) => {
                let same = self.with_path_vars(types, a, |nbe, types, vx, vy, vp| {
                    nbe.convertible_types(
                        types,
                        &nbe.apply_closure(m1, [vx.clone(), vy.clone(), vp.clone()]),
                        &nbe.apply_closure(m2, [vx, vy, vp]),
                    )
                }) && self.fresh(types, a.clone(), |types, vx| {
                    let t = self.apply_closure(m1, [vx.clone(), vx.clone(), rc(Value::Refl(vx.clone()))]);
                    self.convertible(
                        types,
                        &self.apply_closure(b1, [vx.clone()]),
                        &self.apply_closure(b2, [vx]),
                        &t,
                    )
                });
                ok(same, self.apply_closure(m1, [x.clone(), y.clone(), cur()]))
            }
            (
                Frame::TrRec { motive_ty: p1, prop: h1, fun: g1 },
                Frame::TrRec { motive_ty: p2, prop: h2, fun: g2 },
                Value::Trunc(a),
            ) => {
                let same = self.convertible_types(types, p1, p2)
                    && self.convertible(types, h1, h2, &self.is_prop(p1.clone()))
                    && self.convertible(types, g1, g2, &self.arrow(a.clone(), p1.clone()));
                ok(same, p1.clone())
            }
            (
                Frame::TrInd { motive: m1, prop: h1, fun: g1 },
                Frame::TrInd { motive: m2, prop: h2, fun: g2 },
                Value::Trunc(a),
            ) => {
                let same = self.convertible_motives(types, m1, m2, ty.clone())
                    && self.convertible(types, h1, h2, &self.tr_ind_prop_type(a.clone(), m1))
                    && self.convertible(types, g1, g2, &self.tr_ind_fun_type(a.clone(), m1));
                ok(same, self.apply_closure(m1, [cur()]))
            }
            (Frame::App(_), _, Value::Pi(..))
            | (Frame::Fst | Frame::Snd, _, Value::Sigma(..))
            | (Frame::SumCase { .. }, _, Value::Sum(..))
            | (Frame::Absurd { .. }, _, Value::Empty)
            | (Frame::NatRec { .. }, _, Value::Nat)
            | (Frame::J { .. }, _, Value::Id(..))
            | (Frame::TrRec { .. } | Frame::TrInd { .. }, _, Value::Trunc(..)) => None,
            _ => return None,
        })
    }

    fn convertible_motives(&self, types: &mut Types, m1: &Closure<1>, m2: &Closure<1>, dom: RcValue) -> bool {
        self.fresh(types, dom, |types, z| {
            self.convertible_types(types, &self.apply_closure(m1, [z.clone()]), &self.apply_closure(m2, [z]))
        })
    }

    /// Evaluates a closed term and reads it back at `ty`.
    pub fn normalize(&self, t: &Term, ty: &RcValue) -> RcTerm {
        let v = self.eval(&Env::new(), t);
        self.readback(&mut Vec::new(), &v, ty)
    }
}

/// Name of the binder hint used when none is available.
pub fn anonymous() -> Name {
    "_".into()
}
