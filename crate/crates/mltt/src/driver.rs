//! Loading `.tt` files, resolving imports and running a checking session.

use std::collections::BTreeSet;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use mltt_core::parser::{parse_source, SurfaceDeclKind};
use mltt_core::session::{DeclError, DeclOutcome, Session};
use mltt_core::syntax::Span;
use mltt_core::value::EvalMode;
use thiserror::Error;

/// Name of the environment variable holding fallback include directories.
pub const INCLUDE_VAR: &str = "MLTT_INCLUDE";

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub mode: EvalMode,
    /// Searched in order, before `MLTT_INCLUDE` and the importing file's directory.
    pub include: Vec<PathBuf>,
}

impl Options {
    pub fn new(mode: EvalMode) -> Options {
        Options { mode, include: Vec::new() }
    }

    /// Appends the directories listed in `MLTT_INCLUDE`.
    pub fn with_env_include(mut self) -> Options {
        if let Some(paths) = env::var_os(INCLUDE_VAR) {
            self.include.extend(env::split_paths(&paths).filter(|p| !p.as_os_str().is_empty()));
        }
        self
    }
}

/// A file named on the command line could not be read.
#[derive(Debug, Error)]
#[error("cannot read {path}: {source}")]
pub struct IoError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileErrorKind {
    ImportCycle,
    FileNotFound,
}

impl FileErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FileErrorKind::ImportCycle => "ImportCycle",
            FileErrorKind::FileNotFound => "FileNotFound",
        }
    }
}

/// Failure of one entry of a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryError {
    pub kind: &'static str,
    pub message: String,
    pub span: Option<Span>,
    /// Local bindings in scope at a type error, outermost first.
    pub context: Vec<String>,
}

impl EntryError {
    fn from_decl(e: DeclError) -> EntryError {
        let context = match &e {
            DeclError::Type(t) => t.context.clone(),
            _ => Vec::new(),
        };
        EntryError { kind: e.kind_name(), message: e.to_string(), span: e.span(), context }
    }

    fn import(kind: FileErrorKind, module: &str, span: Span) -> EntryError {
        let message = match kind {
            FileErrorKind::ImportCycle => format!("import of `{}` forms a cycle", module),
            FileErrorKind::FileNotFound => format!("cannot find module `{}`", module),
        };
        EntryError { kind: kind.as_str(), message, span: Some(span), context: Vec::new() }
    }
}

/// One declaration, directive, or failed import.
#[derive(Clone, Debug)]
pub struct Entry {
    /// `def`, `postulate`, `#check`, `#eval`, `import`, or `parse`.
    pub kind: &'static str,
    pub name: Option<String>,
    pub span: Span,
    pub result: Result<EntryOk, EntryError>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryOk {
    pub ty: String,
    pub postulates: Vec<String>,
    pub output: Option<String>,
}

impl Entry {
    fn from_outcome(o: DeclOutcome) -> Entry {
        Entry {
            kind: o.kind.as_str(),
            name: o.name.map(|n| n.to_string()),
            span: o.span,
            result: o
                .result
                .map(|c| EntryOk {
                    ty: c.ty,
                    postulates: c.postulates.iter().map(|n| n.to_string()).collect(),
                    output: c.output,
                })
                .map_err(EntryError::from_decl),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.result.is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct FileReport {
    /// The path as given or as found on the include path.
    pub path: String,
    pub source: String,
    pub entries: Vec<Entry>,
}

impl FileReport {
    pub fn errors(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.is_ok())
    }
}

/// Files in the order their checking finished: imports precede importers.
#[derive(Clone, Debug)]
pub struct Report {
    pub mode: EvalMode,
    pub files: Vec<FileReport>,
}

impl Report {
    pub fn error_count(&self) -> usize {
        self.files.iter().map(|f| f.errors().count()).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FileReport, &Entry)> {
        self.files.iter().flat_map(|f| f.entries.iter().map(move |e| (f, e)))
    }

    /// The entry for a named declaration.
    pub fn find(&self, name: &str) -> Option<&Entry> {
        self.entries().map(|(_, e)| e).find(|e| e.name.as_deref() == Some(name))
    }
}

struct Driver {
    options: Options,
    session: Session,
    loaded: BTreeSet<PathBuf>,
    stack: Vec<PathBuf>,
    files: Vec<FileReport>,
}

fn canonical(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

impl Driver {
    fn find_module(&self, module: &str, importer: &Path) -> Option<PathBuf> {
        let file = format!("{}.tt", module);
        let importer_dir = importer.parent().map(Path::to_path_buf).unwrap_or_default();
        self.options
            .include
            .iter()
            .cloned()
            .chain(std::iter::once(importer_dir))
            .map(|dir| dir.join(&file))
            .find(|p| p.is_file())
    }

    fn load(&mut self, path: &Path, source: String) {
        let key = canonical(path);
        self.loaded.insert(key.clone());
        self.stack.push(key);
        let mut entries = Vec::new();
        match parse_source(&source) {
            Err(e) => entries.push(Entry {
                kind: "parse",
                name: None,
                span: e.span(),
                result: Err(EntryError::from_decl(DeclError::Parse(e))),
            }),
            Ok(decls) => {
                for decl in &decls {
                    match &decl.kind {
                        SurfaceDeclKind::Import(module) => {
                            if let Err(kind) = self.import(module, path) {
                                entries.push(Entry {
                                    kind: "import",
                                    name: None,
                                    span: decl.span,
                                    result: Err(EntryError::import(kind, module, decl.span)),
                                });
                            }
                        }
                        _ => entries.push(Entry::from_outcome(self.session.declare(decl))),
                    }
                }
            }
        }
        self.stack.pop();
        self.files.push(FileReport { path: path.display().to_string(), source, entries });
    }

    fn import(&mut self, module: &str, importer: &Path) -> Result<(), FileErrorKind> {
        let path = self.find_module(module, importer).ok_or(FileErrorKind::FileNotFound)?;
        let key = canonical(&path);
        if self.stack.contains(&key) {
            return Err(FileErrorKind::ImportCycle);
        }
        if self.loaded.contains(&key) {
            return Ok(());
        }
        let source = fs::read_to_string(&path).map_err(|_| FileErrorKind::FileNotFound)?;
        self.load(&path, source);
        Ok(())
    }
}

/// Checks `paths` in order in one session. Files already loaded through an
/// import are not checked twice.
pub fn check_files(paths: &[PathBuf], options: &Options) -> Result<Report, IoError> {
    check_files_then(paths, options, None)
}

/// Like [`check_files`], then checks `extra` (a name and source text) in the
/// same session.
pub fn check_files_then(
    paths: &[PathBuf],
    options: &Options,
    extra: Option<(&str, &str)>,
) -> Result<Report, IoError> {
    let mut sources = Vec::new();
    for path in paths {
        let source = fs::read_to_string(path)
            .map_err(|source| IoError { path: path.display().to_string(), source })?;
        sources.push(source);
    }
    let mut driver = Driver {
        options: options.clone(),
        session: Session::new(options.mode),
        loaded: BTreeSet::new(),
        stack: Vec::new(),
        files: Vec::new(),
    };
    for (path, source) in paths.iter().zip(sources) {
        if driver.loaded.contains(&canonical(path)) {
            continue;
        }
        driver.load(path, source);
    }
    if let Some((name, source)) = extra {
        driver.load(Path::new(name), source.to_string());
    }
    Ok(Report { mode: options.mode, files: driver.files })
}

/// Checks a single in-memory source with no import support beyond `options`.
pub fn check_source(name: &str, source: &str, options: &Options) -> Report {
    let mut driver = Driver {
        options: options.clone(),
        session: Session::new(options.mode),
        loaded: BTreeSet::new(),
        stack: Vec::new(),
        files: Vec::new(),
    };
    driver.load(Path::new(name), source.to_string());
    Report { mode: options.mode, files: driver.files }
}

/// Runs `f` on a thread with a large stack; deep proofs recurse deeply.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .expect("spawn checker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
