//! Semantic domain for normalization by evaluation.

use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::syntax::{Bound, Level, Name};

pub type RcValue = Rc<Value>;

/// Persistent evaluation environment. Index 0 is the most recent entry.
#[derive(Clone, Default)]
pub struct Env {
    head: Option<Rc<EnvNode>>,
    len: usize,
}

struct EnvNode {
    value: RcValue,
    next: Option<Rc<EnvNode>>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&self, value: RcValue) -> Env {
        Env {
            head: Some(Rc::new(EnvNode { value, next: self.head.clone() })),
            len: self.len + 1,
        }
    }

    pub fn get(&self, ix: usize) -> Option<&RcValue> {
        let mut node = self.head.as_ref()?;
        for _ in 0..ix {
            node = node.next.as_ref()?;
        }
        Some(&node.value)
    }

    pub fn from_values(values: impl IntoIterator<Item = RcValue>) -> Env {
        values.into_iter().fold(Env::new(), |env, v| env.push(v))
    }
}

/// An open term of `N` binders paired with the environment it was built in.
#[derive(Clone)]
pub struct Closure<const N: usize> {
    pub env: Env,
    pub bound: Bound<N>,
}

impl<const N: usize> Closure<N> {
    pub fn names(&self) -> &[Name; N] {
        &self.bound.names
    }
}

#[derive(Clone)]
pub enum Head {
    /// De Bruijn level of a free variable.
    Var(usize),
    Postulate(Name),
    /// `htr lhs rhs`; never reduces.
    TruncEq { elem_ty: Option<RcValue>, lhs: RcValue, rhs: RcValue },
    /// `tr arg` under a truncation eliminator when the computation rule is off.
    StuckTr { elem_ty: Option<RcValue>, arg: RcValue },
}

#[derive(Clone)]
pub enum Frame {
    App(RcValue),
    Fst,
    Snd,
    SumCase { motive: Closure<1>, on_left: Closure<1>, on_right: Closure<1> },
    Absurd { motive: Closure<1> },
    NatRec { motive: Closure<1>, zero: RcValue, suc: Closure<2> },
    J { motive: Closure<3>, base: Closure<1> },
    TrRec { motive_ty: RcValue, prop: RcValue, fun: RcValue },
    TrInd { motive: Closure<1>, prop: RcValue, fun: RcValue },
}

#[derive(Clone)]
pub enum Value {
    Univ(Level),
    Pi(RcValue, Closure<1>),
    Lam(Closure<1>),
    Sigma(RcValue, Closure<1>),
    Pair(RcValue, RcValue),
    Sum(RcValue, RcValue),
    Inl(RcValue),
    Inr(RcValue),
    Unit,
    Star,
    Empty,
    Nat,
    Zero,
    Suc(RcValue),
    Id(RcValue, RcValue, RcValue),
    Refl(RcValue),
    Trunc(RcValue),
    TrIntro(RcValue),
    Neutral(Head, Vec<Frame>),
}

impl Value {
    pub fn var(level: usize) -> RcValue {
        Rc::new(Value::Neutral(Head::Var(level), Vec::new()))
    }

    pub fn postulate(name: Name) -> RcValue {
        Rc::new(Value::Neutral(Head::Postulate(name), Vec::new()))
    }

    pub fn is_neutral(&self) -> bool {
        matches!(self, Value::Neutral(..))
    }

    /// Meta-level numeral, if this value is `suc^k zero`.
    pub fn as_numeral(&self) -> Option<u64> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Value::Zero => return Some(n),
                Value::Suc(v) => {
                    n += 1;
                    cur = v;
                }
                _ => return None,
            }
        }
    }
}

/// Whether the truncation eliminators compute on `tr a`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvalMode {
    pub trunc_beta: bool,
}

impl EvalMode {
    pub const WEAK: EvalMode = EvalMode { trunc_beta: false };
    pub const JUDGMENTAL: EvalMode = EvalMode { trunc_beta: true };
}
