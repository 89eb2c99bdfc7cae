//! Canonical concrete syntax for terms.
//!
//! Output re-parses to an alpha-equivalent term when every global it mentions
//! is in scope. Binder names are freshened against the enclosing context,
//! the globals of the term and keywords.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use crate::lexer::is_keyword;
use crate::syntax::{for_each_global, occurs, Bound, Name, Term, TermKind};

const EXPR: u8 = 0;
const SIGMA: u8 = 1;
const SUM: u8 = 2;
const APP: u8 = 3;
const ATOM: u8 = 4;

/// Prints a closed term.
pub fn print_term(t: &Term) -> String {
    print_term_in(t, &[])
}

/// Prints `t` under a context whose last entry is de Bruijn index 0.
pub fn print_term_in(t: &Term, ctx: &[Name]) -> String {
    let mut globals = BTreeSet::new();
    for_each_global(t, &mut |n| {
        globals.insert(n.clone());
    });
    let mut p = Printer { globals, ctx: ctx.to_vec(), out: String::new() };
    p.term(t, EXPR);
    p.out
}

struct Printer {
    globals: BTreeSet<Name>,
    ctx: Vec<Name>,
    out: String,
}

impl Printer {
    fn taken(&self, name: &str) -> bool {
        is_keyword(name) || self.globals.contains(name) || self.ctx.iter().any(|n| &**n == name)
    }

    fn fresh(&self, hint: &str, used: bool) -> Name {
        if !used {
            return if !self.taken(hint) {
                hint.into()
            } else {
                "_".into()
            };
        }
        let base = if hint == "_" || hint.is_empty() { "x" } else { hint };
        if !self.taken(base) {
            return base.into();
        }
        (1..)
            .map(|i| format!("{}{}", base, i))
            .find(|c| !self.taken(c))
            .unwrap()
            .into()
    }

    fn s(&mut self, text: &str) {
        self.out.push_str(text);
    }

    fn open(&mut self, cond: bool) {
        if cond {
            self.s("(");
        }
    }

    fn close(&mut self, cond: bool) {
        if cond {
            self.s(")");
        }
    }

    /// `\x y. body` for a binding position, parenthesized.
    fn binding<const N: usize>(&mut self, b: &Bound<N>) {
        let mut names = Vec::with_capacity(N);
        for i in 0..N {
            let name = self.fresh(&b.names[i], occurs(&b.body, N - 1 - i));
            self.ctx.push(name.clone());
            names.push(name);
        }
        self.s("(\\");
        self.s(&names.join(" "));
        self.s(". ");
        self.term(&b.body, EXPR);
        self.s(")");
        self.ctx.truncate(self.ctx.len() - N);
    }

    fn under(&mut self, name: Name, body: &Term, prec: u8) {
        self.ctx.push(name);
        self.term(body, prec);
        self.ctx.pop();
    }

    fn form(&mut self, prec: u8, keyword: &str, args: &[&dyn Fn(&mut Printer)]) {
        self.open(prec > APP);
        self.s(keyword);
        for arg in args {
            self.s(" ");
            arg(self);
        }
        self.close(prec > APP);
    }

    fn term(&mut self, t: &Term, prec: u8) {
        use TermKind::*;
        match &t.kind {
            Var(ix) => {
                let name = self
                    .ctx
                    .len()
                    .checked_sub(ix + 1)
                    .map(|l| self.ctx[l].clone())
                    .unwrap_or_else(|| format!("?{}", ix).into());
                self.s(&name);
            }
            Global(name) => self.s(name),
            Univ(l) => self.s(&format!("U {}", l)),
            Pi(a, b) | Sigma(a, b) => {
                let (sep, level, dom_level) = match &t.kind {
                    Pi(..) => (" -> ", EXPR, SIGMA),
                    _ => (" * ", SIGMA, SUM),
                };
                self.open(prec > level);
                if occurs(&b.body, 0) {
                    let name = self.fresh(&b.names[0], true);
                    self.s("(");
                    self.s(&name);
                    self.s(" : ");
                    self.term(a, EXPR);
                    self.s(")");
                    self.s(sep);
                    self.under(name, &b.body, level);
                } else {
                    self.term(a, dom_level);
                    self.s(sep);
                    self.under("_".into(), &b.body, level);
                }
                self.close(prec > level);
            }
            Lam(dom, b) => {
                self.open(prec > EXPR);
                let name = self.fresh(&b.names[0], occurs(&b.body, 0));
                self.s("\\");
                match dom {
                    Some(dom) => {
                        self.s("(");
                        self.s(&name);
                        self.s(" : ");
                        self.term(dom, EXPR);
                        self.s(")");
                    }
                    None => self.s(&name),
                }
                self.s(". ");
                self.under(name, &b.body, EXPR);
                self.close(prec > EXPR);
            }
            App(f, a) => {
                self.open(prec > APP);
                self.term(f, APP);
                self.s(" ");
                self.term(a, ATOM);
                self.close(prec > APP);
            }
            Pair(a, b) => {
                self.s("(");
                self.term(a, EXPR);
                self.s(", ");
                self.term(b, EXPR);
                self.s(")");
            }
            Sum(a, b) => {
                self.open(prec > SUM);
                self.term(a, APP);
                self.s(" + ");
                self.term(b, SUM);
                self.close(prec > SUM);
            }
            Fst(a) => self.form(prec, "fst", &[&|p| p.term(a, ATOM)]),
            Snd(a) => self.form(prec, "snd", &[&|p| p.term(a, ATOM)]),
            Inl(a) => self.form(prec, "inl", &[&|p| p.term(a, ATOM)]),
            Inr(a) => self.form(prec, "inr", &[&|p| p.term(a, ATOM)]),
            Suc(a) => self.form(prec, "suc", &[&|p| p.term(a, ATOM)]),
            Refl(a) => self.form(prec, "refl", &[&|p| p.term(a, ATOM)]),
            TruncT(a) => self.form(prec, "Trunc", &[&|p| p.term(a, ATOM)]),
            TrIntro(a) => self.form(prec, "tr", &[&|p| p.term(a, ATOM)]),
            SumCase { motive, on_left, on_right, scrut } => self.form(
                prec,
                "case",
                &[
                    &|p| p.binding(motive),
                    &|p| p.binding(on_left),
                    &|p| p.binding(on_right),
                    &|p| p.term(scrut, ATOM),
                ],
            ),
            Absurd { motive, scrut } => {
                self.form(prec, "absurd", &[&|p| p.binding(motive), &|p| p.term(scrut, ATOM)])
            }
            NatRec { motive, zero, suc, scrut } => self.form(
                prec,
                "natrec",
                &[
                    &|p| p.binding(motive),
                    &|p| p.term(zero, ATOM),
                    &|p| p.binding(suc),
                    &|p| p.term(scrut, ATOM),
                ],
            ),
            IdT(a, x, y) => self.form(
                prec,
                "Id",
                &[&|p| p.term(a, ATOM), &|p| p.term(x, ATOM), &|p| p.term(y, ATOM)],
            ),
            J { motive, base, path } => self.form(
                prec,
                "J",
                &[&|p| p.binding(motive), &|p| p.binding(base), &|p| p.term(path, ATOM)],
            ),
            TrRec { motive_ty, prop, fun, scrut, .. } => self.form(
                prec,
                "trec",
                &[
                    &|p| p.term(motive_ty, ATOM),
                    &|p| p.term(prop, ATOM),
                    &|p| p.term(fun, ATOM),
                    &|p| p.term(scrut, ATOM),
                ],
            ),
            TrInd { motive, prop, fun, scrut, .. } => self.form(
                prec,
                "tind",
                &[
                    &|p| p.binding(motive),
                    &|p| p.term(prop, ATOM),
                    &|p| p.term(fun, ATOM),
                    &|p| p.term(scrut, ATOM),
                ],
            ),
            TruncEq { lhs, rhs, .. } => {
                self.form(prec, "htr", &[&|p| p.term(lhs, ATOM), &|p| p.term(rhs, ATOM)])
            }
            UnitT => self.s("Unit"),
            Star => self.s("star"),
            EmptyT => self.s("Empty"),
            NatT => self.s("Nat"),
            Zero => self.s("zero"),
            Ann(a, ty) => {
                self.s("(");
                self.term(a, EXPR);
                self.s(" : ");
                self.term(ty, EXPR);
                self.s(")");
            }
        }
    }
}
