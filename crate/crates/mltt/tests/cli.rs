use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{}.tt", name))
}

fn mltt(args: &[&str]) -> Output {
    mltt_env(args, None)
}

fn mltt_env(args: &[&str], include: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mltt"));
    cmd.args(args).env_remove("MLTT_INCLUDE");
    if let Some(dir) = include {
        cmd.env("MLTT_INCLUDE", dir);
    }
    cmd.output().expect("run mltt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn prelude_checks() {
    let out = mltt(&["check", corpus("prelude").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).ends_with("0 error(s)\n"));
}

#[test]
fn directive_output_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "a.tt", "#eval suc 2\n#check zero\n");
    let out = mltt(&["check", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "suc (suc (suc zero))\nNat\n");
    assert_eq!(stderr(&out), "1 file(s), 2 entries, 0 error(s)\n");
}

#[test]
fn empty_file_has_no_entries() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "empty.tt", "");
    let out = mltt(&["check", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stderr(&out), "1 file(s), 0 entries, 0 error(s)\n");
}

#[test]
fn type_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.tt", "def ok : Nat := 1\n\ndef bad : Nat := star\n");
    let out = mltt(&["check", &file]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with(&format!("{}:3:18: error[Mismatch]: ", file)), "{}", err);
    assert!(err.ends_with("1 file(s), 2 entries, 1 error(s)\n"));
}

#[test]
fn usage_errors_exit_two_with_synopsis() {
    for args in [&["check"][..], &["check", "--format", "yaml", "x.tt"], &["frobnicate"], &[]] {
        let out = mltt(args);
        assert_eq!(out.status.code(), Some(2), "{:?}", args);
        assert!(stderr(&out).contains("Usage: mltt"), "{:?}: {}", args, stderr(&out));
    }
}

#[test]
fn unreadable_file_exits_two() {
    let out = mltt(&["check", "/nonexistent/missing.tt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read /nonexistent/missing.tt"));
}

#[test]
fn flags_are_order_independent() {
    let file = corpus("prelude");
    let file = file.to_str().unwrap();
    let a = mltt(&["check", "--trunc-beta", "--format", "json-like", file]);
    let b = mltt(&["check", file, "--format", "json-like", "--trunc-beta"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn json_records_have_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "a.tt", "def one : Nat := 1\ndef bad : Nat := star\n");
    let out = mltt(&["check", "--format", "json-like", &file]);
    let lines: Vec<serde_json::Value> =
        stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["name"], "one");
    assert_eq!(lines[0]["status"], "ok");
    assert_eq!(lines[0]["type"], "Nat");
    assert_eq!(lines[0]["postulates"], serde_json::json!([]));
    assert_eq!(lines[0]["span"]["line"], 1);
    assert_eq!(lines[1]["status"], "error");
    assert_eq!(lines[1]["error"]["kind"], "Mismatch");
    assert_eq!(lines[1]["error"]["span"]["start"], 36);
}

#[test]
fn report_postulates_lists_each_declaration() {
    let out = mltt(&[
        "check",
        "--report-postulates",
        corpus("prelude").to_str().unwrap(),
        corpus("axioms").to_str().unwrap(),
    ]);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "funext: {funext}"), "{}", text);
    assert!(text.lines().any(|l| l == "ua-beta: {ua, ua-beta}"));
    assert!(text.lines().any(|l| l == "concat: {}"));
}

#[test]
fn eval_prints_normal_form() {
    let out = mltt(&["eval", "-e", "plus 2 3", corpus("prelude").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("suc (suc (suc (suc (suc zero))))\n"));
    let out = mltt(&["eval", "-e", "trec (Trunc Nat) (\\x y. htr x y) (\\n. tr (suc n)) (tr 0)"]);
    assert_eq!(stdout(&out), "trec (Trunc Nat) (\\x. \\y. htr x y) (\\n. tr (suc n)) (tr zero)\n");
    let out = mltt(&["eval", "--trunc-beta", "-e", "trec (Trunc Nat) (\\x y. htr x y) (\\n. tr (suc n)) (tr 0)"]);
    assert_eq!(stdout(&out), "tr (suc zero)\n");
    let out = mltt(&["eval", "-e", "fst star"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[NotASigma]"));
}

#[test]
fn imports_resolve_through_include_paths() {
    let lib = tempfile::tempdir().unwrap();
    let src = tempfile::tempdir().unwrap();
    write(lib.path(), "base.tt", "def two : Nat := 2\n");
    let main = write(src.path(), "main.tt", "import base\n#eval suc two\n");

    let out = mltt(&["check", &main]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[FileNotFound]"));

    let lib_dir = lib.path().to_str().unwrap();
    let out = mltt(&["check", "--include", lib_dir, &main]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "suc (suc (suc zero))\n");
    assert!(stderr(&out).starts_with("2 file(s)"));

    let out = mltt_env(&["check", &main], Some(lib.path()));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn importing_itself_is_a_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "loop.tt", "import loop\n");
    let out = mltt(&["check", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[ImportCycle]"));
}

#[test]
fn shared_imports_are_checked_once() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "base.tt", "def two : Nat := 2\n");
    let a = write(dir.path(), "a.tt", "import base\ndef a : Nat := two\n");
    let b = write(dir.path(), "b.tt", "import base\ndef b : Nat := two\n");
    let out = mltt(&["check", &a, &b]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stderr(&out), "3 file(s), 3 entries, 0 error(s)\n");
}

#[test]
fn weak_files_check_identically_in_both_modes() {
    let files: Vec<String> = ["prelude", "axioms", "hedberg", "fixedpoint", "factor", "populated", "taboos"]
        .iter()
        .map(|f| corpus(f).display().to_string())
        .collect();
    let mut weak = vec!["check", "--format", "json-like"];
    weak.extend(files.iter().map(String::as_str));
    let mut beta = weak.clone();
    beta.insert(1, "--trunc-beta");
    let (w, b) = (mltt(&weak), mltt(&beta));
    assert_eq!(w.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let status = |o: &Output| -> Vec<(String, String, String)> {
        stdout(o)
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .map(|r| (r["name"].to_string(), r["status"].to_string(), r["postulates"].to_string()))
            .collect()
    };
    assert_eq!(status(&w), status(&b));
}

#[test]
fn judgmental_file_fails_without_the_flag() {
    let file = corpus("judgmental");
    let out = mltt(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let first = stderr(&out).lines().next().unwrap().to_string();
    assert!(first.contains("judgmental.tt:14:51: error[Mismatch]"), "{}", first);
    let out = mltt(&["check", "--trunc-beta", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l == "suc (suc (suc zero))"));
}
