use mltt_core::check::{Checker, Context};
use mltt_core::eval::{Nbe, NoGlobals};
use mltt_core::lexer::{tokenize, TokenKind};
use mltt_core::parser::{parse_source, SurfaceDeclKind};
use mltt_core::print::print_term;
use mltt_core::resolve::parse_and_resolve;
use mltt_core::session::{DeclOutcome, Session};
use mltt_core::syntax::{alpha_equal, shift_term, RcTerm, Term, TermKind};
use mltt_core::value::{Env, EvalMode, Value};

const PLUS: &str = "def plus (n m : Nat) : Nat := natrec (\\_. Nat) m (\\_ r. suc r) n\n";

fn closed(src: &str) -> RcTerm {
    parse_and_resolve(src, &|_: &str| false).unwrap()
}

fn run(mode: EvalMode, src: &str) -> (Session, Vec<DeclOutcome>) {
    let mut session = Session::new(mode);
    let outcomes = parse_source(src).unwrap().iter().map(|d| session.declare(d)).collect();
    (session, outcomes)
}

fn all_ok(mode: EvalMode, src: &str) -> Vec<DeclOutcome> {
    let (_, outcomes) = run(mode, src);
    for o in &outcomes {
        assert!(o.result.is_ok(), "{:?}", o.result);
    }
    outcomes
}

fn error_kind(o: &DeclOutcome) -> &'static str {
    o.result.as_ref().unwrap_err().kind_name()
}

fn output(o: &DeclOutcome) -> String {
    o.result.as_ref().unwrap().output.clone().unwrap()
}

/// Builds `suc^n zero` without going through the parser.
fn numeral(n: u64) -> RcTerm {
    (0..n).fold(Term::new(TermKind::Zero), |t, _| Term::new(TermKind::Suc(t)))
}

#[test]
fn shift_free_variable() {
    let t = shift_term(&Term::var(0), 0, 1).unwrap();
    assert!(alpha_equal(&t, &Term::var(1)));
}

#[test]
fn shift_leaves_bound_variable() {
    let t = shift_term(&Term::lam("x", Term::var(0)), 0, 1).unwrap();
    assert!(alpha_equal(&t, &Term::lam("x", Term::var(0))));
}

#[test]
fn shift_under_binder() {
    let t = shift_term(&Term::lam("x", Term::var(1)), 0, 2).unwrap();
    assert!(alpha_equal(&t, &Term::lam("x", Term::var(3))));
}

#[test]
fn shift_underflow_is_reported() {
    assert!(shift_term(&Term::var(0), 0, -1).is_err());
}

#[test]
fn alpha_equality_basics() {
    assert!(alpha_equal(&Term::lam("x", Term::var(0)), &Term::lam("y", Term::var(0))));
    assert!(!alpha_equal(&Term::var(0), &Term::var(1)));
    let a = Term::new(TermKind::NatT);
    assert!(!alpha_equal(&Term::pi("x", a.clone(), Term::var(0)), &Term::sigma("x", a, Term::var(0))));
}

#[test]
fn lexer_tokens() {
    let kinds = |src: &str| -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    };
    assert_eq!(
        kinds("def id"),
        vec![(TokenKind::Keyword, "def".into()), (TokenKind::Ident, "id".into())]
    );
    assert_eq!(
        kinds("-- c\nU 0"),
        vec![(TokenKind::Keyword, "U".into()), (TokenKind::Numeral, "0".into())]
    );
    let lexemes: Vec<String> = kinds("(x : A) -> B").into_iter().map(|(_, l)| l).collect();
    assert_eq!(lexemes, ["(", "x", ":", "A", ")", "->", "B"]);
}

#[test]
fn numeral_sugar_in_definitions() {
    let decls = parse_source("def k : Nat := 2").unwrap();
    let SurfaceDeclKind::Def { name, .. } = &decls[0].kind else { panic!("not a def") };
    assert_eq!(&**name, "k");
    assert!(alpha_equal(&closed("2"), &numeral(2)));
}

#[test]
fn arrows_associate_right_and_application_left() {
    let nat = || Term::new(TermKind::NatT);
    let unit = || Term::new(TermKind::UnitT);
    let expected = Term::pi("x", nat(), Term::pi("y", unit(), Term::new(TermKind::EmptyT)));
    assert!(alpha_equal(&closed("(x : Nat) -> (y : Unit) -> Empty"), &expected));
    let t = closed("\\f a b. f a b");
    let body = Term::app(Term::app(Term::var(2), Term::var(1)), Term::var(0));
    assert!(alpha_equal(&t, &Term::lam("f", Term::lam("a", Term::lam("b", body)))));
}

#[test]
fn name_resolution() {
    assert!(alpha_equal(&closed("\\x. \\x. x"), &Term::lam("x", Term::lam("x", Term::var(0)))));
    assert!(alpha_equal(&closed("\\x. \\y. x"), &Term::lam("x", Term::lam("y", Term::var(1)))));
    let err = parse_and_resolve("\\x. y", &|_: &str| false).unwrap_err();
    assert!(err.contains('y'), "{}", err);
}

#[test]
fn beta_on_identity() {
    let nbe = Nbe::new(&NoGlobals, EvalMode::WEAK);
    let v = nbe.eval(&Env::new(), &closed("(\\x. x) star"));
    assert!(matches!(*v, Value::Star));
}

#[test]
fn closures_apply_in_their_environment() {
    let nbe = Nbe::new(&NoGlobals, EvalMode::WEAK);
    let star = nbe.eval(&Env::new(), &closed("star"));
    let id = nbe.eval(&Env::new(), &Term::lam("x", Term::var(0)));
    assert!(matches!(*nbe.app(&id, star.clone()), Value::Star));

    let w = nbe.eval(&Env::new(), &numeral(7));
    let konst = nbe.eval(&Env::from_values([w]), &Term::lam("x", Term::var(1)));
    assert_eq!(nbe.app(&konst, star).as_numeral(), Some(7));

    let succ = nbe.eval(&Env::new(), &closed("\\n. suc n"));
    let two = nbe.eval(&Env::new(), &numeral(2));
    assert_eq!(nbe.app(&succ, two).as_numeral(), Some(2 + 1));
}

#[test]
fn plus_adds_numerals() {
    let (session, _) = run(EvalMode::WEAK, PLUS);
    let nbe = Nbe::new(session.globals(), EvalMode::WEAK);
    let scope = |n: &str| session.in_scope(n);
    for (a, b) in [(2u64, 2u64), (0, 5), (3, 0), (4, 9)] {
        let t = parse_and_resolve(&format!("plus {} {}", a, b), &scope).unwrap();
        assert_eq!(nbe.eval(&Env::new(), &t).as_numeral(), Some(a + b));
    }
}

#[test]
fn readback_is_eta_long() {
    let nbe = Nbe::new(&NoGlobals, EvalMode::WEAK);
    let fun_ty = nbe.eval(&Env::new(), &closed("Nat -> Nat"));
    let mut types = vec![fun_ty.clone()];
    let t = nbe.readback(&mut types, &Value::var(0), &fun_ty);
    assert!(alpha_equal(&t, &Term::lam("x", Term::app(Term::var(1), Term::var(0)))));

    let unit = nbe.eval(&Env::new(), &closed("Unit"));
    let mut types = vec![unit.clone()];
    let t = nbe.readback(&mut types, &Value::var(0), &unit);
    assert!(matches!(t.kind, TermKind::Star));
}

#[test]
fn eta_for_functions_is_judgmental() {
    let src = "def eta : (f : Nat -> Nat) -> Id (Nat -> Nat) f (\\x. f x) := \\f. refl f\n";
    all_ok(EvalMode::WEAK, src);
}

const TREC_BETA: &str = "def trec-beta : (P : U 0) (h : (x y : P) -> Id P x y) (f : Nat -> P) (a : Nat) \
     -> Id P (trec P h f (tr a)) (f a) := \\P h f a. refl (f a)\n";

#[test]
fn truncation_beta_only_with_flag() {
    all_ok(EvalMode::JUDGMENTAL, TREC_BETA);
    let (_, outcomes) = run(EvalMode::WEAK, TREC_BETA);
    assert_eq!(error_kind(&outcomes[0]), "Mismatch");
}

#[test]
fn truncation_beta_evaluates_to_the_function() {
    let src = "#eval trec (Trunc Nat) (\\x y. htr x y) (\\n. tr (suc n)) (tr 4)\n";
    let outcomes = all_ok(EvalMode::JUDGMENTAL, src);
    assert_eq!(output(&outcomes[0]), format!("tr ({})", print_term(&numeral(5))));
    let outcomes = all_ok(EvalMode::WEAK, src);
    assert!(output(&outcomes[0]).starts_with("trec "));
}

#[test]
fn truncation_path_is_not_refl() {
    let src = "def p : (A : U 0) (a : A) -> Id (Id (Trunc A) (tr a) (tr a)) (htr (tr a) (tr a)) (refl (tr a)) \
               := \\A a. refl (refl (tr a))\n";
    for mode in [EvalMode::WEAK, EvalMode::JUDGMENTAL] {
        let (_, outcomes) = run(mode, src);
        assert_eq!(error_kind(&outcomes[0]), "Mismatch");
    }
}

#[test]
fn inference_examples() {
    let outcomes = all_ok(EvalMode::WEAK, "#check U 0\n#check htr (tr zero) (tr (suc zero))\n");
    assert_eq!(output(&outcomes[0]), "U 1");
    assert_eq!(output(&outcomes[1]), "Id (Trunc Nat) (tr zero) (tr (suc zero))");

    let checker = Checker::new(&NoGlobals, EvalMode::WEAK);
    let Err(err) = checker.infer(&Context::new(), &closed("fst star")) else { panic!("fst star inferred") };
    assert_eq!(err.kind_name(), "NotASigma");
}

#[test]
fn checking_examples() {
    let checker = Checker::new(&NoGlobals, EvalMode::WEAK);
    let nbe = *checker.nbe();
    let ctx = Context::new();
    let ty = |src: &str| nbe.eval(&Env::new(), &closed(src));

    checker.check(&ctx, &closed("\\x. x"), &ty("(x : Nat) -> Nat")).unwrap();
    checker.check(&ctx, &closed("(zero, refl zero)"), &ty("(n : Nat) * Id Nat n zero")).unwrap();
    let err = checker.check(&ctx, &closed("star"), &ty("Nat")).unwrap_err();
    assert_eq!(err.kind_name(), "Mismatch");
    let msg = err.to_string();
    assert!(msg.contains("Nat") && msg.contains("Unit"), "{}", msg);
}

#[test]
fn postulate_sets() {
    let src = "postulate ax : (A : U 0) -> A\n\
               def uses : (A : U 0) -> A := ax\n\
               def again : Nat := uses Nat\n\
               def clean : Nat := zero\n";
    let outcomes = all_ok(EvalMode::WEAK, src);
    let sets: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| o.result.as_ref().unwrap().postulates.iter().map(|n| n.to_string()).collect())
        .collect();
    assert_eq!(sets[0], ["ax"]);
    assert_eq!(sets[1], ["ax"]);
    assert_eq!(sets[2], ["ax"]);
    assert!(sets[3].is_empty());
}
