//! A checking session: the global table and per-declaration processing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::check::{Checker, Context, TypeError};
use crate::eval::Globals;
use crate::parser::{ParseError, SurfaceDecl};
use crate::print::print_term;
use crate::resolve::{resolve_decl, DeclKind, ResolveError};
use crate::syntax::{for_each_global, Name, RcTerm, Span, Term};
use crate::value::{Env, EvalMode, RcValue, Value};

#[derive(Clone)]
pub struct GlobalEntry {
    pub kind: DeclKind,
    /// Elaborated declared type.
    pub ty_term: RcTerm,
    pub ty: RcValue,
    /// Elaborated body, for definitions.
    pub body: Option<RcTerm>,
    pub value: RcValue,
    /// Postulates this declaration depends on, transitively.
    pub postulates: BTreeSet<Name>,
}

#[derive(Clone, Default)]
pub struct GlobalTable {
    entries: BTreeMap<Name, GlobalEntry>,
    order: Vec<Name>,
}

impl GlobalTable {
    pub fn get(&self, name: &str) -> Option<&GlobalEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Entries in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&Name, &GlobalEntry)> {
        self.order.iter().map(move |n| (n, &self.entries[n]))
    }

    fn insert(&mut self, name: Name, entry: GlobalEntry) {
        self.order.push(name.clone());
        self.entries.insert(name, entry);
    }

    /// Union of the postulate sets of every global referenced by `terms`.
    fn postulates_of(&self, terms: &[&Term]) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for t in terms {
            for_each_global(t, &mut |n| {
                if let Some(e) = self.entries.get(n) {
                    out.extend(e.postulates.iter().cloned());
                }
            });
        }
        out
    }
}

impl Globals for GlobalTable {
    fn global_value(&self, name: &str) -> Option<RcValue> {
        self.entries.get(name).map(|e| e.value.clone())
    }

    fn global_type(&self, name: &str) -> Option<RcValue> {
        self.entries.get(name).map(|e| e.ty.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeclError {
    Parse(ParseError),
    Resolve(ResolveError),
    Type(TypeError),
}

impl DeclError {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DeclError::Parse(e) => e.kind_name(),
            DeclError::Resolve(e) => e.kind_name(),
            DeclError::Type(e) => e.kind_name(),
        }
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            DeclError::Parse(e) => Some(e.span()),
            DeclError::Resolve(e) => Some(e.span()),
            DeclError::Type(e) => e.span,
        }
    }
}

impl fmt::Display for DeclError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeclError::Parse(e) => e.fmt(f),
            DeclError::Resolve(e) => e.fmt(f),
            DeclError::Type(e) => e.fmt(f),
        }
    }
}

impl From<ResolveError> for DeclError {
    fn from(e: ResolveError) -> DeclError {
        DeclError::Resolve(e)
    }
}

impl From<TypeError> for DeclError {
    fn from(e: TypeError) -> DeclError {
        DeclError::Type(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checked {
    /// The declared type for definitions and postulates, the inferred normal
    /// form for directives.
    pub ty: String,
    pub postulates: Vec<Name>,
    /// Text a directive prints.
    pub output: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclOutcome {
    pub kind: DeclKind,
    pub name: Option<Name>,
    pub span: Span,
    pub result: Result<Checked, DeclError>,
}

pub struct Session {
    mode: EvalMode,
    table: GlobalTable,
    /// Declarations that failed to check; they stay in scope for name
    /// resolution but have no type.
    failed: BTreeSet<Name>,
}

impl Session {
    pub fn new(mode: EvalMode) -> Session {
        Session { mode, table: GlobalTable::default(), failed: BTreeSet::new() }
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn globals(&self) -> &GlobalTable {
        &self.table
    }

    pub fn checker(&self) -> Checker<'_> {
        Checker::new(&self.table, self.mode)
    }

    pub fn in_scope(&self, name: &str) -> bool {
        self.table.contains(name) || self.failed.contains(name)
    }

    pub fn declare(&mut self, decl: &SurfaceDecl) -> DeclOutcome {
        let scope = |n: &str| self.in_scope(n);
        let resolved = resolve_decl(decl, &scope);
        let kind = decl_kind(decl);
        let name = decl_name(decl);
        let result = resolved.map_err(DeclError::from).and_then(|d| {
            let ty = d.declared_type.clone();
            let body = d.body.clone();
            self.process(d.kind, d.name.clone(), ty, body)
        });
        if result.is_err() {
            if let Some(n) = &name {
                if matches!(kind, DeclKind::Def | DeclKind::Postulate) && !self.table.contains(n) {
                    self.failed.insert(n.clone());
                }
            }
        }
        DeclOutcome { kind, name, span: decl.span, result }
    }

    fn process(
        &mut self,
        kind: DeclKind,
        name: Option<Name>,
        ty: Option<RcTerm>,
        body: Option<RcTerm>,
    ) -> Result<Checked, DeclError> {
        let checker = Checker::new(&self.table, self.mode);
        let nbe = *checker.nbe();
        let ctx = Context::new();
        match kind {
            DeclKind::Def | DeclKind::Postulate => {
                let name = name.expect("named declaration");
                let (ty_term, _) = checker.check_type(&ctx, ty.as_ref().expect("declared type"))?;
                let ty_v = nbe.eval(&Env::new(), &ty_term);
                let (body, value, mut postulates) = match body {
                    Some(body) => {
                        let body = checker.check(&ctx, &body, &ty_v)?;
                        let value = nbe.eval(&Env::new(), &body);
                        let postulates = self.table.postulates_of(&[&ty_term, &body]);
                        (Some(body), value, postulates)
                    }
                    None => (None, Value::postulate(name.clone()), self.table.postulates_of(&[&ty_term])),
                };
                if kind == DeclKind::Postulate {
                    postulates.insert(name.clone());
                }
                let checked = Checked {
                    ty: print_term(&ty_term),
                    postulates: postulates.iter().cloned().collect(),
                    output: None,
                };
                let entry = GlobalEntry { kind, ty_term, ty: ty_v, body, value, postulates };
                self.table.insert(name, entry);
                Ok(checked)
            }
            DeclKind::Check | DeclKind::Eval => {
                let (t, ty) = checker.infer(&ctx, body.as_ref().expect("directive term"))?;
                let postulates = self.table.postulates_of(&[&t]).into_iter().collect();
                let ty_text = checker.show_type(&ctx, &ty);
                let output = if kind == DeclKind::Check {
                    ty_text.clone()
                } else {
                    print_term(&nbe.normalize(&t, &ty))
                };
                Ok(Checked { ty: ty_text, postulates, output: Some(output) })
            }
        }
    }
}

fn decl_kind(decl: &SurfaceDecl) -> DeclKind {
    use crate::parser::SurfaceDeclKind::*;
    match &decl.kind {
        Def { .. } | Import(_) => DeclKind::Def,
        Postulate { .. } => DeclKind::Postulate,
        Check(_) => DeclKind::Check,
        Eval(_) => DeclKind::Eval,
    }
}

fn decl_name(decl: &SurfaceDecl) -> Option<Name> {
    use crate::parser::SurfaceDeclKind::*;
    match &decl.kind {
        Def { name, .. } | Postulate { name, .. } => Some(name.clone()),
        _ => None,
    }
}
