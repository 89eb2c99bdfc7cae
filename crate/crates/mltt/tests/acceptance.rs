//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use mltt::driver::with_big_stack;
use mltt_core::check::Context;
use mltt_core::parser::{parse_source, SurfaceDeclKind};
use mltt_core::resolve::parse_and_resolve;
use mltt_core::session::Session;
use mltt_core::print::print_term;
use mltt_core::syntax::{alpha_equal, RcTerm};
use mltt_core::value::EvalMode;
use serde_json::Value as Json;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const WEAK_FILES: [&str; 7] =
    ["prelude", "axioms", "hedberg", "fixedpoint", "factor", "populated", "taboos"];

const NO_POSTULATES: [&str; 8] = [
    "hedberg",
    "fix-isProp",
    "constEndo-iff-splitSup",
    "factor-set",
    "coll-to-discrete",
    "trunc-large-small",
    "pop-large-small",
    "chain",
];

const FUNEXT_ONLY: [&str; 4] = ["separated-set", "factor-coprod", "pop-isProp", "negneg-pop-iff-lem"];

const MYST_CHECK: &str = r"#check ((\n. refl n) : (n : Nat) -> Id Nat (myst-nat (tr n)) n)";
const MYST_EVAL: &str = "#eval myst-nat (tr 3)";

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus(name: &str) -> String {
    corpus_dir().join(format!("{}.tt", name)).display().to_string()
}

fn mltt(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mltt"))
        .args(args)
        .env_remove("MLTT_INCLUDE")
        .output()
        .expect("run mltt")
}

fn args(flags: &[&str], files: &[String]) -> Vec<String> {
    let mut out: Vec<String> = vec!["check".into()];
    out.extend(flags.iter().map(|s| s.to_string()));
    out.extend(files.iter().cloned());
    out
}

fn weak_files() -> Vec<String> {
    WEAK_FILES.iter().map(|f| corpus(f)).collect()
}

fn records(out: &Output) -> Vec<Json> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("record parses"))
        .collect()
}

fn base_name(record: &Json) -> String {
    let file = record["file"].as_str().unwrap_or_default();
    Path::new(file).file_name().unwrap().to_string_lossy().into_owned()
}

fn postulates(record: &Json) -> Vec<String> {
    record["postulates"]
        .as_array()
        .map(|a| a.iter().map(|p| p.as_str().unwrap().to_string()).collect())
        .unwrap_or_default()
}

/// Source text covered by a span record.
fn span_text(record: &Json, span: &Json) -> String {
    let source = fs::read_to_string(record["file"].as_str().unwrap()).unwrap();
    let start = span["start"].as_u64().unwrap() as usize;
    let end = span["end"].as_u64().unwrap() as usize;
    source[start..end].to_string()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let out = mltt(&args(&[], &weak_files()));
    let elapsed = start.elapsed();
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(exit_code(&out) == 0, || format!("exit {}: {}", exit_code(&out), stderr.lines().next().unwrap_or("")))?;
    ensure(stderr.trim_end().ends_with(" 0 error(s)"), || format!("summary: {}", stderr.trim_end()))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {:.1} s", elapsed.as_secs_f64()))?;
    Ok(format!("{} in {:.1} s", stderr.trim_end(), elapsed.as_secs_f64()))
}

/// (file, name) to record, for every named entry.
fn named(records: &[Json]) -> BTreeMap<(String, String), Json> {
    records
        .iter()
        .filter_map(|r| r["name"].as_str().map(|n| ((base_name(r), n.to_string()), r.clone())))
        .collect()
}

fn criterion_2() -> Outcome {
    let manifest: Json =
        serde_json::from_str(&fs::read_to_string(corpus_dir().join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    let order: Vec<String> =
        files.iter().map(|f| corpus(f["file"].as_str().unwrap().trim_end_matches(".tt"))).collect();
    let weak = named(&records(&mltt(&args(&["--format", "json-like"], &weak_files()))));
    let beta = named(&records(&mltt(&args(&["--trunc-beta", "--format", "json-like"], &order))));

    let mut listed = BTreeMap::new();
    let mut checked = 0;
    for file in files {
        let fname = file["file"].as_str().unwrap().to_string();
        let modes: Vec<&BTreeMap<_, _>> = match file["mode"].as_str() {
            Some("either") => vec![&weak, &beta],
            _ => vec![&beta],
        };
        let allowed: BTreeSet<String> = file["allowed_postulates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p.as_str().unwrap().to_string())
            .collect();
        for table in &modes {
            for ((f, name), r) in table.iter().filter(|((f, _), _)| *f == fname) {
                let extra: Vec<String> = postulates(r).into_iter().filter(|p| !allowed.contains(p)).collect();
                ensure(extra.is_empty(), || format!("{}:{} uses {:?}", f, name, extra))?;
            }
            for thm in file["theorems"].as_array().unwrap() {
                let name = thm["name"].as_str().unwrap().to_string();
                let expected = postulates(thm);
                let r = table
                    .get(&(fname.clone(), name.clone()))
                    .ok_or_else(|| format!("{}: `{}` not in report", fname, name))?;
                ensure(r["status"] == "ok", || format!("`{}` failed to check", name))?;
                ensure(postulates(r) == expected, || {
                    format!("`{}`: expected {:?}, got {:?}", name, expected, postulates(r))
                })?;
                listed.insert(name, expected);
                checked += 1;
            }
        }
    }
    for name in NO_POSTULATES {
        let set = listed.get(name).ok_or_else(|| format!("`{}` missing from manifest", name))?;
        ensure(set.is_empty(), || format!("`{}` should be postulate-free, manifest says {:?}", name, set))?;
    }
    for name in FUNEXT_ONLY {
        let set = listed.get(name).ok_or_else(|| format!("`{}` missing from manifest", name))?;
        ensure(*set == ["funext"], || format!("`{}` should need exactly funext, manifest says {:?}", name, set))?;
    }
    let axioms = beta.iter().filter(|((f, _), r)| f == "axioms.tt" && r["kind"] == "postulate").count();
    ensure(axioms == 3, || format!("axioms.tt declares {} postulates", axioms))?;
    Ok(format!("{} theorem/mode pairs match the manifest", checked))
}

fn judgmental(flags: &[&str]) -> Output {
    mltt(&args(flags, &[corpus("judgmental")]))
}

fn directive<'a>(records: &'a [Json], text: &str) -> Option<&'a Json> {
    records
        .iter()
        .filter(|r| base_name(r) == "judgmental.tt" && r["kind"].as_str().unwrap().starts_with('#'))
        .find(|r| span_text(r, &r["span"]) == text)
}

fn criterion_3() -> Outcome {
    let out = judgmental(&["--trunc-beta", "--format", "json-like"]);
    ensure(exit_code(&out) == 0, || format!("exit {}", exit_code(&out)))?;
    let rs = records(&out);
    let check = directive(&rs, MYST_CHECK).ok_or("myst-nat #check not found")?;
    ensure(check["status"] == "ok", || format!("myst-nat #check: {}", check["error"]))?;
    let eval = directive(&rs, MYST_EVAL).ok_or("myst-nat #eval not found")?;
    ensure(eval["output"] == "suc (suc (suc zero))", || format!("#eval printed {}", eval["output"]))?;
    let text = judgmental(&["--trunc-beta"]);
    let stdout = String::from_utf8_lossy(&text.stdout);
    ensure(stdout.lines().any(|l| l == "suc (suc (suc zero))"), || "text output lacks the eval line".into())?;
    Ok("myst-nat (tr 3) evaluates to suc (suc (suc zero))".into())
}

fn criterion_4() -> Outcome {
    let out = judgmental(&["--format", "json-like"]);
    ensure(exit_code(&out) == 1, || format!("exit {}", exit_code(&out)))?;
    let rs = records(&out);
    let hit = rs.iter().find(|r| {
        r["kind"] == "#check"
            && r["error"]["kind"] == "Mismatch"
            && span_text(r, &r["error"]["span"]).starts_with("refl")
    });
    let r = hit.ok_or("no Mismatch located at a refl in a #check directive")?;
    Ok(format!(
        "Mismatch at {}:{}:{}",
        base_name(r),
        r["error"]["span"]["line"],
        r["error"]["span"]["column"]
    ))
}

fn criterion_5() -> Outcome {
    let rs = named(&records(&judgmental(&["--trunc-beta", "--format", "json-like"])));
    let get = |name: &str| {
        rs.get(&("judgmental.tt".to_string(), name.to_string()))
            .filter(|r| r["status"] == "ok")
            .map(postulates)
            .ok_or_else(|| format!("`{}` missing or failed", name))
    };
    let funext = get("funext-derived")?;
    ensure(funext.is_empty(), || format!("funext-derived uses {:?}", funext))?;
    let nat = get("transitive-Nat")?;
    ensure(nat == ["ua", "ua-beta"], || format!("transitive-Nat uses {:?}", nat))?;
    Ok("funext-derived {}, transitive-Nat {ua, ua-beta}".into())
}

fn criterion_6() -> Outcome {
    let rs = records(&judgmental(&["--trunc-beta", "--format", "json-like"]));
    let mut found = 0;
    for (point, endpoint) in [("0₂", "y₀"), ("1₂", "y₁")] {
        let r = rs
            .iter()
            .filter(|r| base_name(r) == "judgmental.tt" && r["kind"] == "#check")
            .find(|r| {
                let text = span_text(r, &r["span"]);
                text.contains(&format!("(tr {})", point)) && text.contains(&format!("refl {}", endpoint))
            })
            .ok_or_else(|| format!("no #check for tr {}", point))?;
        ensure(r["status"] == "ok", || format!("tr {} equation: {}", point, r["error"]))?;
        found += 1;
    }
    Ok(format!("{} interval equations hold by refl", found))
}

/// A session over the named corpus files, imports skipped.
fn session(mode: EvalMode, files: &[&str]) -> Result<Session, String> {
    let mut s = Session::new(mode);
    for f in files {
        let src = fs::read_to_string(corpus(f)).unwrap();
        for d in parse_source(&src).map_err(|e| e.to_string())? {
            if matches!(d.kind, SurfaceDeclKind::Import(_)) {
                continue;
            }
            s.declare(&d).result.map_err(|e| format!("{}: {}", f, e))?;
        }
    }
    Ok(s)
}

fn idempotence(s: &Session) -> Result<usize, String> {
    let nbe = *s.checker().nbe();
    let mut n = 0;
    for (name, entry) in s.globals().iter() {
        let Some(body) = &entry.body else { continue };
        let once = nbe.normalize(body, &entry.ty);
        let twice = nbe.normalize(&once, &entry.ty);
        ensure(alpha_equal(&once, &twice), || format!("normalizing `{}` twice changes it", name))?;
        n += 1;
    }
    Ok(n)
}

fn eta_types() -> Vec<String> {
    let atoms = ["Nat", "Unit", "Trunc Nat", "Id Nat zero zero"];
    let mut out = Vec::new();
    for (sep, dom_paren) in [(" -> ", true), (" * ", false)] {
        for (i, a) in atoms.iter().enumerate() {
            for b in atoms.iter().skip(i % 2).step_by(2).take(2) {
                let a = if dom_paren && a.contains(' ') { format!("({})", a) } else { a.to_string() };
                out.push(format!("{}{}{}", a, sep, b));
            }
        }
    }
    out.push("(n : Nat) -> Id Nat n n".into());
    out.push("(n : Nat) * Id Nat n zero".into());
    out.push("(Nat -> Nat) * Unit".into());
    out.push("Unit".into());
    out
}

fn eta_expand(ty: &str) -> &'static str {
    if ty == "Unit" {
        "star"
    } else if ty.contains(" -> ") && !ty.starts_with("(Nat -> Nat) *") && !ty.starts_with("(n : Nat) *") {
        "\\x. f x"
    } else {
        "(fst f, snd f)"
    }
}

fn eta_instances(s: &mut Session) -> Result<usize, String> {
    let types = eta_types();
    for (i, ty) in types.iter().enumerate() {
        let src = format!("def eta-{} : (f : {ty}) -> Id ({ty}) f ({}) := \\f. refl f\n", i, eta_expand(ty));
        for d in parse_source(&src).map_err(|e| e.to_string())? {
            s.declare(&d).result.map_err(|e| format!("η at `{}`: {}", ty, e))?;
        }
        let lhs = format!("(\\f. f : ({ty}) -> {ty})");
        let rhs = format!("(\\f. {} : ({ty}) -> {ty})", eta_expand(ty));
        let (l, r) = (normal(s, &lhs)?, normal(s, &rhs)?);
        ensure(alpha_equal(&l, &r), || format!("η normal forms differ at `{}`", ty))?;
    }
    Ok(types.len())
}

/// Normal form of a closed term.
fn normal(s: &Session, src: &str) -> Result<RcTerm, String> {
    let t = parse_and_resolve(src, &|n: &str| s.in_scope(n))?;
    let checker = s.checker();
    let (t, ty) = checker.infer(&Context::new(), &t).map_err(|e| format!("{}: {}", src, e))?;
    Ok(checker.nbe().normalize(&t, &ty))
}

/// Redex, reduct and the type both live at.
const BETA_PAIRS: [(&str, &str, &str); 10] = [
    ("(\\(x : Nat). suc x) 2", "3", "Nat"),
    ("fst ((1, star) : Nat * Unit)", "1", "Nat"),
    ("snd ((1, star) : Nat * Unit)", "star", "Unit"),
    ("case (\\_. Nat) (\\a. suc a) (\\b. zero) (inl 4 : Nat + Unit)", "5", "Nat"),
    ("case (\\_. Nat) (\\a. suc a) (\\b. zero) (inr star : Nat + Unit)", "0", "Nat"),
    ("natrec (\\_. Nat) 7 (\\k r. suc r) zero", "7", "Nat"),
    ("natrec (\\_. Nat) 7 (\\k r. suc r) 2", "9", "Nat"),
    ("J (\\x y p. Nat) (\\x. suc x) (refl 3 : Id Nat 3 3)", "4", "Nat"),
    ("trec (Trunc Nat) (\\x y. htr x y) (\\n. tr (suc n)) (tr 1)", "tr 2", "Trunc Nat"),
    ("tind (\\_. Trunc Nat) (\\_ x y. htr x y) (\\n. tr (suc n)) (tr 1)", "tr 2", "Trunc Nat"),
];

fn beta_pairs() -> Result<usize, String> {
    let beta = Session::new(EvalMode::JUDGMENTAL);
    let weak = Session::new(EvalMode::WEAK);
    for (redex, reduct, ty) in BETA_PAIRS {
        let expected = normal(&beta, &format!("({} : {})", reduct, ty))?;
        let got = normal(&beta, &format!("({} : {})", redex, ty))?;
        ensure(alpha_equal(&got, &expected), || {
            format!("`{}` reduced to `{}`, expected `{}`", redex, print_term(&got), reduct)
        })?;
        let weak_nf = normal(&weak, redex)?;
        let truncation = redex.starts_with("trec") || redex.starts_with("tind");
        ensure(alpha_equal(&weak_nf, &expected) != truncation, || {
            format!("`{}` in weak mode normalized to `{}`", redex, print_term(&weak_nf))
        })?;
    }
    Ok(BETA_PAIRS.len())
}

fn criterion_7() -> Outcome {
    let mut all = WEAK_FILES.to_vec();
    all.push("judgmental");
    let weak = idempotence(&session(EvalMode::WEAK, &WEAK_FILES)?)?;
    let mut beta_session = session(EvalMode::JUDGMENTAL, &all)?;
    let beta = idempotence(&beta_session)?;
    let eta = eta_instances(&mut beta_session)?;
    let pairs = beta_pairs()?;
    Ok(format!(
        "{} + {} bodies idempotent, {} η instances, {} β pairs",
        weak, beta, eta, pairs
    ))
}

fn fixtures() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/negative");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "tt"))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let files = fixtures();
    ensure(files.len() >= 10, || format!("only {} fixtures", files.len()))?;
    let mut kinds = BTreeSet::new();
    for path in &files {
        let source = fs::read_to_string(path).unwrap();
        let expected = source
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("-- expect: "))
            .ok_or_else(|| format!("{} has no expect line", path.display()))?
            .trim();
        let out = mltt(&args(&["--format", "json-like"], &[path.display().to_string()]));
        ensure(exit_code(&out) == 1, || format!("{}: exit {}", path.display(), exit_code(&out)))?;
        let hit = records(&out).into_iter().find(|r| r["error"]["kind"] == expected);
        let r = hit.ok_or_else(|| format!("{}: no {} error", path.display(), expected))?;
        let span = &r["error"]["span"];
        let (start, end) = (span["start"].as_u64().unwrap_or(u64::MAX), span["end"].as_u64().unwrap_or(0));
        ensure(start <= end && end as usize <= source.len(), || {
            format!("{}: span {}..{} outside the file", path.display(), start, end)
        })?;
        kinds.insert(expected.to_string());
    }
    Ok(format!("{} fixtures rejected, {} distinct error kinds", files.len(), kinds.len()))
}

fn criterion_9() -> Outcome {
    let runs: Vec<Vec<String>> = vec![
        args(&[], &weak_files()),
        args(&["--format", "json-like"], &weak_files()),
        args(&["--trunc-beta"], &[corpus("judgmental")]),
        args(&["--trunc-beta", "--format", "json-like"], &[corpus("judgmental")]),
    ];
    for a in &runs {
        let first = mltt(a);
        let second = mltt(a);
        ensure(first.stdout == second.stdout && first.stderr == second.stderr, || {
            format!("`mltt {}` differs between runs", a.join(" "))
        })?;
        ensure(first.status == second.status, || "exit codes differ".into())?;
    }
    Ok(format!("{} invocations byte-identical across two runs", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("corpus checks in weak mode", criterion_1),
        ("postulate sets match the manifest", criterion_2),
        ("judgmental file with truncation beta", criterion_3),
        ("judgmental file fails without truncation beta", criterion_4),
        ("derived function extensionality", criterion_5),
        ("interval point equations", criterion_6),
        ("evaluator properties", criterion_7),
        ("negative fixtures", criterion_8),
        ("determinism", criterion_9),
    ];
    let results = with_big_stack(move || {
        criteria.iter().map(|(desc, f)| (*desc, f())).collect::<Vec<_>>()
    });
    let mut failed = 0;
    for (i, (desc, result)) in results.iter().enumerate() {
        match result {
            Ok(detail) => println!("PASS {} {}: {}", i + 1, desc, detail),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {}: {}", i + 1, desc, why);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
