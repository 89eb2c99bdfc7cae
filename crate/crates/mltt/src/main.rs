use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mltt::driver::{check_files_then, with_big_stack, Options};
use mltt::report::{render, Format, Rendered};
use mltt::EvalMode;

#[derive(Parser)]
#[command(name = "mltt", version, about = "Proof checker for type theory with propositional truncation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check files in order with a shared scope.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        /// Print each declaration's postulate set.
        #[arg(long)]
        report_postulates: bool,
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
    /// Load files, then print the normal form of a term.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, short = 'e', value_name = "TERM")]
        term: String,
        #[arg(value_name = "FILE")]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Make the truncation eliminators compute on `tr a`.
    #[arg(long)]
    trunc_beta: bool,
    /// Directory searched for imports; may be repeated.
    #[arg(long = "include", value_name = "DIR")]
    include: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    #[value(name = "json-like", alias = "json")]
    JsonLike,
}

impl Common {
    fn options(&self) -> Options {
        let mode = if self.trunc_beta { EvalMode::JUDGMENTAL } else { EvalMode::WEAK };
        Options { mode, include: self.include.clone() }.with_env_include()
    }
}

fn run(cli: Cli) -> (Rendered, u8) {
    let (files, options, extra, format, postulates) = match cli.command {
        Command::Check { common, format, report_postulates, files } => {
            let format = match format {
                FormatArg::Text => Format::Text,
                FormatArg::JsonLike => Format::Json,
            };
            (files, common.options(), None, format, report_postulates)
        }
        Command::Eval { common, term, files } => {
            (files, common.options(), Some(format!("#eval {}\n", term)), Format::Text, false)
        }
    };
    let extra = extra.as_deref().map(|src| ("<command line>", src));
    match check_files_then(&files, &options, extra) {
        Ok(report) => {
            let code = if report.error_count() == 0 { 0 } else { 1 };
            (render(&report, format, postulates), code)
        }
        Err(e) => (Rendered { stdout: String::new(), stderr: format!("mltt: {}\n", e) }, 2),
    }
}

const SYNOPSIS: &str = "\
Usage: mltt check [--trunc-beta] [--include DIR]... [--format text|json-like] [--report-postulates] FILE...
       mltt eval [--trunc-beta] [--include DIR]... -e TERM [FILE]...
";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{}", text);
            if !text.contains("Usage:") {
                eprint!("\n{}", SYNOPSIS);
            }
            return ExitCode::from(2);
        }
    };
    let (out, code) = with_big_stack(move || run(cli));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(code)
}
