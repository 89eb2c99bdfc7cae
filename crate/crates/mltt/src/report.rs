//! Human-readable and line-delimited JSON renderings of a [`Report`].

use serde::Serialize;

use crate::driver::{Entry, FileReport, Report};
use mltt_core::syntax::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rendered {
    pub stdout: String,
    pub stderr: String,
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, col)
}

#[derive(Serialize)]
struct SpanRecord {
    start: usize,
    end: usize,
    line: usize,
    column: usize,
}

impl SpanRecord {
    fn new(source: &str, span: Span) -> SpanRecord {
        let (line, column) = line_col(source, span.start);
        SpanRecord { start: span.start, end: span.end, line, column }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: &'a str,
    span: Option<SpanRecord>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    context: &'a [String],
}

#[derive(Serialize)]
struct Record<'a> {
    file: &'a str,
    name: Option<&'a str>,
    kind: &'a str,
    status: &'a str,
    #[serde(rename = "type")]
    ty: Option<&'a str>,
    postulates: &'a [String],
    span: SpanRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorRecord<'a>>,
}

fn record<'a>(file: &'a FileReport, entry: &'a Entry) -> Record<'a> {
    let (status, ty, postulates, output, error) = match &entry.result {
        Ok(ok) => ("ok", Some(ok.ty.as_str()), ok.postulates.as_slice(), ok.output.as_deref(), None),
        Err(e) => (
            "error",
            None,
            &[][..],
            None,
            Some(ErrorRecord {
                kind: e.kind,
                message: &e.message,
                span: e.span.map(|s| SpanRecord::new(&file.source, s)),
                context: &e.context,
            }),
        ),
    };
    Record {
        file: &file.path,
        name: entry.name.as_deref(),
        kind: entry.kind,
        status,
        ty,
        postulates,
        span: SpanRecord::new(&file.source, entry.span),
        output,
        error,
    }
}

pub fn render(report: &Report, format: Format, report_postulates: bool) -> Rendered {
    let mut out = Rendered::default();
    let mut count = 0;
    for (file, entry) in report.entries() {
        count += 1;
        match format {
            Format::Json => {
                let line = serde_json::to_string(&record(file, entry)).expect("records serialize");
                out.stdout.push_str(&line);
                out.stdout.push('\n');
            }
            Format::Text => match &entry.result {
                Ok(ok) => {
                    if let Some(text) = &ok.output {
                        out.stdout.push_str(text);
                        out.stdout.push('\n');
                    }
                    if let (true, Some(name)) = (report_postulates, &entry.name) {
                        out.stdout.push_str(&format!("{}: {{{}}}\n", name, ok.postulates.join(", ")));
                    }
                }
                Err(e) => {
                    let (line, col) = line_col(&file.source, e.span.unwrap_or(entry.span).start);
                    out.stderr.push_str(&format!(
                        "{}:{}:{}: error[{}]: {}\n",
                        file.path, line, col, e.kind, e.message
                    ));
                    for binding in &e.context {
                        out.stderr.push_str(&format!("    {}\n", binding));
                    }
                }
            },
        }
    }
    let errors = report.error_count();
    out.stderr.push_str(&format!(
        "{} file(s), {} entries, {} error(s)\n",
        report.files.len(),
        count,
        errors
    ));
    out
}
