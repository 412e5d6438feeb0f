//! End-to-end acceptance checks. Each test prints one PASS or FAIL line
//! straight to stdout so the verdicts survive output capture.

use indexmap::IndexMap;
use proptest::prelude::{any, prop_assert, prop_assert_eq, Just, Strategy as _};
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use tbc::checker::{check, check_bundle, induct, parse_bundle, BoolRule, Ctx, Dir, Goal, ProofScript, Step, Verdict as Check};
use tbc::conjecture::{collect_pool, generate_conjectures, GenOptions};
use tbc::evaluator::{enumerate_values, Evaluator};
use tbc::frontend::{parse_problem, Problem, Theory};
use tbc::kernel::{Formula, Ident, Prop, Sort, Subst, Term};
use tbc::prover::simp::{replay, simp};
use tbc::refuter::{refute, RefutationBudget, Verdict};

// Pinned tolerances.
const E2E_SECONDS: u64 = 60;
const MAX_CONJECTURES: usize = 60;
const UNPROVED_SHARE: f64 = 0.20;
const MIN_LOW_UNPROVED: usize = 12;
const MIN_CORPUS: usize = 15;
const MIN_EXTRA_SOLVED: usize = 3;
const DELTA_MINUTES: u64 = 15;
const MIN_REFUTER_CONJECTURES: usize = 1000;
const ORACLE_SIZE: usize = 4;
const MUTATIONS_PER_SCRIPT: usize = 100;
const NAT_COUNT_UP_TO: usize = 10;
const PROPERTY_CASES: u32 = 256;

fn report(n: u32, result: Result<String, String>) {
    let line = match &result {
        Ok(m) => format!("PASS criterion {n}: {m}\n"),
        Err(m) => format!("FAIL criterion {n}: {m}\n"),
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    if let Err(m) = result {
        panic!("criterion {n} failed: {m}");
    }
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn corpus_dir() -> PathBuf {
    manifest().join("corpus")
}

fn tbc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tbc"))
}

fn load(name: &str) -> Problem {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.tbc"))).unwrap();
    parse_problem(&text, name).unwrap()
}

/// One `tbc bench` run through the CLI.
struct BenchRun {
    csv: String,
    bundles: BTreeMap<String, String>,
    elapsed: Duration,
}

#[derive(Debug)]
struct Row {
    problem: String,
    solved: bool,
    generated: usize,
    refuted: usize,
    proved: usize,
    unproved: usize,
}

impl BenchRun {
    fn rows(&self) -> Vec<Row> {
        self.csv
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with("summary,"))
            .map(|l| {
                let c: Vec<&str> = l.split(',').collect();
                let n = |i: usize| c[i].parse::<usize>().unwrap_or(usize::MAX);
                Row {
                    problem: c[0].to_string(),
                    solved: c[2] == "true",
                    generated: n(5),
                    refuted: n(6),
                    proved: n(7),
                    unproved: n(8),
                }
            })
            .collect()
    }
}

fn bench_cli(tag: &str, extra: &[&str]) -> BenchRun {
    let dir = tempfile::Builder::new().prefix(tag).tempdir().unwrap().keep();
    let csv = dir.join("out.csv");
    let bundles = dir.join("bundles");
    let start = Instant::now();
    let status = tbc()
        .arg("bench")
        .arg(corpus_dir())
        .args(["--deterministic", "--seed", "7", "--csv"])
        .arg(&csv)
        .arg("--bundles")
        .arg(&bundles)
        .args(extra)
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    assert!(status.success(), "bench exited with {status}");
    let mut map = BTreeMap::new();
    if let Ok(rd) = std::fs::read_dir(&bundles) {
        for e in rd.flatten() {
            let name = e.path().file_stem().unwrap().to_string_lossy().to_string();
            map.insert(name, std::fs::read_to_string(e.path()).unwrap());
        }
    }
    BenchRun {
        csv: std::fs::read_to_string(csv).unwrap(),
        bundles: map,
        elapsed,
    }
}

fn full_run() -> &'static BenchRun {
    static RUN: OnceLock<BenchRun> = OnceLock::new();
    RUN.get_or_init(|| bench_cli("full", &[]))
}

fn closure(scripts: &[ProofScript], root: &ProofScript) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut todo = root.dependencies();
    while let Some(d) = todo.pop() {
        if seen.insert(d.clone()) {
            if let Some(s) = scripts.iter().find(|s| s.name == d) {
                todo.extend(s.dependencies());
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------
// An evaluator written independently of the library's, used as oracle.

fn oracle_match(pat: &Term, t: &Term, s: &mut BTreeMap<Ident, Term>) -> bool {
    match (pat, t) {
        (Term::Var { name, .. }, _) => match s.get(name) {
            Some(bound) => bound == t,
            None => {
                s.insert(name.clone(), t.clone());
                true
            }
        },
        (Term::App { sym: a, args: xs }, Term::App { sym: b, args: ys }) => {
            a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| oracle_match(x, y, s))
        }
        _ => false,
    }
}

fn oracle_subst(t: &Term, s: &BTreeMap<Ident, Term>) -> Term {
    match t {
        Term::Var { name, .. } => s.get(name).cloned().unwrap_or_else(|| t.clone()),
        Term::App { sym, args } => Term::App {
            sym: sym.clone(),
            args: args.iter().map(|a| oracle_subst(a, s)).collect(),
        },
    }
}

fn oracle_eval(th: &Theory, t: &Term, fuel: &mut u64) -> Option<Term> {
    if *fuel == 0 {
        return None;
    }
    *fuel -= 1;
    let Term::App { sym, args } = t else { return None };
    let args: Vec<Term> = args.iter().map(|a| oracle_eval(th, a, fuel)).collect::<Option<_>>()?;
    let t = Term::App { sym: sym.clone(), args };
    let Some(def) = th.functions.get(sym) else {
        return Some(t);
    };
    for eq in &def.equations {
        let mut s = BTreeMap::new();
        if oracle_match(&eq.lhs, &t, &mut s) {
            return oracle_eval(th, &oracle_subst(&eq.rhs, &s), fuel);
        }
    }
    None
}

fn oracle_prop(th: &Theory, p: &Prop, s: &BTreeMap<Ident, Term>, fuel: &mut u64) -> Option<bool> {
    let ev = |t: &Term, fuel: &mut u64| oracle_eval(th, &oracle_subst(t, s), fuel);
    Some(match p {
        Prop::Eq(l, r) => ev(l, fuel)? == ev(r, fuel)?,
        Prop::Atom(t) => ev(t, fuel)? == Term::App { sym: "true".into(), args: vec![] },
        Prop::Implies(hs, c) => {
            for h in hs {
                if !oracle_prop(th, h, s, fuel)? {
                    return Some(true);
                }
            }
            oracle_prop(th, c, s, fuel)?
        }
        Prop::Or(ps) => {
            let mut any = false;
            for q in ps {
                any |= oracle_prop(th, q, s, fuel)?;
            }
            any
        }
        Prop::And(ps) => {
            let mut all = true;
            for q in ps {
                all &= oracle_prop(th, q, s, fuel)?;
            }
            all
        }
    })
}

/// All constructor terms of `sort` with exactly `size` nodes, by brute
/// force over the declarations.
fn oracle_values(th: &Theory, sort: &Sort, size: usize) -> Vec<Term> {
    if size == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    for c in th.sig.constructors(sort) {
        let arg_sorts = th.sig.get(c).unwrap().args.clone();
        let mut partial: Vec<(Vec<Term>, usize)> = vec![(vec![], size - 1)];
        for s in &arg_sorts {
            let mut next = Vec::new();
            for (args, left) in &partial {
                for k in 1..=*left {
                    for v in oracle_values(th, s, k) {
                        let mut a = args.clone();
                        a.push(v);
                        next.push((a, left - k));
                    }
                }
            }
            partial = next;
        }
        for (args, left) in partial {
            if left == 0 {
                out.push(Term::App { sym: c.clone(), args });
            }
        }
    }
    out
}

/// Assignments of total size at most `max`, each variable at least one.
fn oracle_assignments(th: &Theory, vars: &[(Ident, Sort)], max: usize) -> Vec<BTreeMap<Ident, Term>> {
    let mut out = vec![(BTreeMap::new(), 0usize)];
    for (name, sort) in vars {
        let mut next = Vec::new();
        for (m, used) in &out {
            for k in 1..=max.saturating_sub(*used) {
                for v in oracle_values(th, sort, k) {
                    let mut m2 = m.clone();
                    m2.insert(name.clone(), v);
                    next.push((m2, used + k));
                }
            }
        }
        out = next;
    }
    out.into_iter().map(|(m, _)| m).collect()
}

/// `Some(false)` if some small instance is false, `Some(true)` if all
/// decidable instances hold.
fn oracle_holds(th: &Theory, f: &Formula, max: usize) -> bool {
    oracle_assignments(th, &f.vars, max).iter().all(|a| {
        let mut fuel = 100_000;
        oracle_prop(th, &f.body, a, &mut fuel) != Some(false)
    })
}

// ---------------------------------------------------------------------

fn is_identity(f: &Formula, right: bool) -> bool {
    let Prop::Eq(Term::App { args, .. }, Term::Var { .. }) = &f.body else {
        return false;
    };
    args.len() == 2 && {
        let (e, x) = if right { (&args[1], &args[0]) } else { (&args[0], &args[1]) };
        e.vars().is_empty() && x.is_var()
    }
}

#[test]
fn criterion_1_running_example() {
    let r = (|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("even_add.tbcp");
        let start = Instant::now();
        let status = tbc()
            .arg("prove")
            .arg(corpus_dir().join("even_add.tbc"))
            .arg("--deterministic")
            .arg("--emit")
            .arg(&out)
            .output()
            .unwrap();
        let secs = start.elapsed().as_secs_f64();
        if !status.status.success() {
            return Err(format!("prove exited with {}", status.status));
        }
        if secs >= E2E_SECONDS as f64 {
            return Err(format!("took {secs:.1}s"));
        }
        let rounds = String::from_utf8_lossy(&status.stdout);
        if !rounds.contains("(round1)") && !rounds.contains("(round2)") {
            return Err(format!("not solved within two rounds: {rounds}"));
        }
        let p = load("even_add");
        let scripts = parse_bundle(&p.theory, &std::fs::read_to_string(&out).unwrap()).map_err(|e| e.to_string())?;
        let verdicts = check_bundle(&p.theory, &scripts);
        if !verdicts.iter().all(Check::is_accepted) {
            return Err(format!("bundle rejected: {verdicts:?}"));
        }
        let has = |prefix: &str| scripts.iter().any(|s| s.name.starts_with(&format!("{prefix}_")));
        let ids = |right| scripts.iter().any(|s| s.name.starts_with("identity_") && is_identity(&s.statement, right));
        let mut missing: Vec<&str> = ["commutativity", "idempotent_Element", "swap_Unary", "composite_Commutativity"]
            .into_iter()
            .filter(|k| !has(k))
            .collect();
        if !ids(false) {
            missing.push("left identity");
        }
        if !ids(true) {
            missing.push("right identity");
        }
        if !missing.is_empty() {
            return Err(format!("missing template kinds {missing:?}"));
        }
        let goal = scripts.last().unwrap();
        if !goal.name.starts_with("original_goal_") {
            return Err(format!("last script is `{}`", goal.name));
        }
        let deps = closure(&scripts, goal);
        if !deps.iter().any(|d| d.starts_with("commutativity_")) {
            return Err(format!("goal closure {deps:?} lacks commutativity"));
        }
        Ok(format!("even_add solved in {secs:.2}s, {} scripts accepted, goal uses {deps:?}", scripts.len()))
    })();
    report(1, r);
}

#[test]
fn criterion_2_conjecture_accounting() {
    let rows = full_run().rows();
    let r = (|| {
        if rows.len() < MIN_CORPUS {
            return Err(format!("corpus has {} problems", rows.len()));
        }
        let mut low = 0;
        for row in &rows {
            if row.refuted + row.proved + row.unproved != row.generated {
                return Err(format!("{row:?} does not add up"));
            }
            if row.generated > MAX_CONJECTURES {
                return Err(format!("{} generated {}", row.problem, row.generated));
            }
            if row.unproved as f64 <= UNPROVED_SHARE * row.generated as f64 {
                low += 1;
            }
        }
        if low < MIN_LOW_UNPROVED {
            return Err(format!("only {low} problems with at most 20% unproved"));
        }
        Ok(format!("{} problems add up, {low} have at most 20% unproved", rows.len()))
    })();
    report(2, r);
}

#[test]
fn criterion_3_conjecturing_delta() {
    let full = full_run();
    let base = bench_cli("round0", &["--rounds", "0"]);
    let solved = |b: &BenchRun| -> BTreeSet<String> { b.rows().into_iter().filter(|r| r.solved).map(|r| r.problem).collect() };
    let (with, without) = (solved(full), solved(&base));
    let r = (|| {
        let total = full.elapsed + base.elapsed;
        if total >= Duration::from_secs(DELTA_MINUTES * 60) {
            return Err(format!("took {total:?}"));
        }
        let lost: Vec<_> = without.difference(&with).collect();
        if !lost.is_empty() {
            return Err(format!("conjecturing lost {lost:?}"));
        }
        let extra: Vec<_> = with.difference(&without).cloned().collect();
        if extra.len() < MIN_EXTRA_SOLVED || !extra.iter().any(|p| p == "even_add") {
            return Err(format!("additional problems {extra:?}"));
        }
        Ok(format!(
            "round0 solves {}, two rounds solve {} (+{extra:?}) in {:.1}s",
            without.len(),
            with.len(),
            total.as_secs_f64()
        ))
    })();
    report(3, r);
}

/// A random terminating theory over Nat: every function recurses on its
/// first argument only.
fn random_theory(rng: &mut ChaCha8Rng) -> String {
    fn term(rng: &mut ChaCha8Rng, depth: u32, leaves: &[&str], calls: &[(String, usize)]) -> String {
        if depth == 0 || rng.gen_bool(0.35) {
            return leaves[rng.gen_range(0..leaves.len())].to_string();
        }
        let k = rng.gen_range(0..=calls.len());
        if k == calls.len() {
            return format!("(S {})", term(rng, depth - 1, leaves, calls));
        }
        let (f, arity) = &calls[k];
        let args: Vec<String> = (0..*arity).map(|_| term(rng, depth - 1, leaves, calls)).collect();
        format!("({f} {})", args.join(" "))
    }
    let mut text = String::from("(datatype Nat (Z) (S Nat))\n");
    let mut defined: Vec<(String, usize)> = Vec::new();
    let n = rng.gen_range(2..=3);
    for i in 0..n {
        let name = format!("f{i}");
        let arity = rng.gen_range(1..=2);
        let (base_leaves, step_leaves): (&[&str], &[&str]) = if arity == 2 { (&["m", "Z"], &["n", "m", "Z"]) } else { (&["Z"], &["n", "Z"]) };
        let base = term(rng, 2, base_leaves, &defined);
        let rec = if arity == 2 {
            let inner = term(rng, 1, step_leaves, &defined);
            format!("({name} n {inner})")
        } else {
            format!("({name} n)")
        };
        let step = match rng.gen_range(0..3) {
            0 => format!("(S {rec})"),
            1 => rec,
            _ => term(rng, 2, step_leaves, &defined),
        };
        let (sig, z, s) = if arity == 2 {
            ("((Nat Nat) Nat)", format!("({name} Z m)"), format!("({name} (S n) m)"))
        } else {
            ("((Nat) Nat)", format!("({name} Z)"), format!("({name} (S n))"))
        };
        text += &format!("(fun {name} {sig}\n  ({z} {base})\n  ({s} {step}))\n");
        defined.push((name, arity));
    }
    // one relation over Nat so relational templates appear too
    text += "(fun r ((Nat Nat) Bool)\n  ((r Z m) true)\n  ((r (S n) Z) false)\n  ((r (S n) (S m)) (r n m)))\n";
    let (last, arity) = defined.last().unwrap();
    let call = if *arity == 2 { format!("({last} x y)") } else { format!("({last} x)") };
    text += &format!("(goal (forall ((x Nat) (y Nat)) (= {call} (f0 {}))))\n", if defined[0].1 == 2 { "y x" } else { "y" });
    text
}

#[test]
fn criterion_4_refuter_soundness_and_completeness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    let mut found = 0;
    let mut violations = Vec::new();
    let mut disagreements = Vec::new();
    let mut theories = 0;
    while total < MIN_REFUTER_CONJECTURES {
        let text = random_theory(&mut rng);
        let Ok(p) = parse_problem(&text, "random") else {
            continue;
        };
        theories += 1;
        let conjs = generate_conjectures(&collect_pool(&p), &p.theory, &GenOptions::default());
        let budget = RefutationBudget {
            max_tests: 2000,
            random_tests: 100,
            ..RefutationBudget::deterministic()
        };
        for c in &conjs {
            total += 1;
            let v = refute(&p.theory, &c.statement, &budget, total as u64);
            let oracle_false = !oracle_holds(&p.theory, &c.statement, ORACLE_SIZE);
            match &v {
                Verdict::CounterexampleFound(w) => {
                    found += 1;
                    let fresh = Evaluator::new(&p.theory).eval_instance(&c.statement.body, w);
                    let mut fuel = 1_000_000;
                    let m: BTreeMap<Ident, Term> = w.iter().map(|(k, t)| (k.clone(), t.clone())).collect();
                    let ours = oracle_prop(&p.theory, &c.statement.body, &m, &mut fuel);
                    if fresh != Ok(false) || ours != Some(false) {
                        violations.push(format!("{}: {:?}", c.statement, w));
                    }
                }
                Verdict::Survived { .. } if oracle_false => {
                    disagreements.push(format!("{} in\n{text}", c.statement));
                }
                Verdict::Survived { .. } => {}
            }
        }
    }
    let r = if violations.is_empty() && disagreements.is_empty() {
        Ok(format!("{total} conjectures over {theories} theories, {found} refuted, 0 violations, 0 disagreements"))
    } else {
        Err(format!("violations {violations:?}, disagreements {disagreements:?}"))
    };
    report(4, r);
}

/// Applies one random mutation; `false` if the chosen kind did not apply.
fn mutate(rng: &mut ChaCha8Rng, th: &Theory, lemmas: &IndexMap<String, Formula>, s: &mut ProofScript) -> bool {
    fn count(steps: &[Step]) -> usize {
        steps
            .iter()
            .map(|st| match st {
                Step::Induction { cases, .. } => 1 + cases.iter().map(|c| count(&c.proof)).sum::<usize>(),
                _ => 1,
            })
            .sum()
    }
    fn nth(steps: &mut [Step], mut i: usize) -> Result<&mut Step, usize> {
        for st in steps {
            if i == 0 {
                return Ok(st);
            }
            i -= 1;
            if let Step::Induction { cases, .. } = st {
                for c in cases {
                    match nth(&mut c.proof, i) {
                        Ok(found) => return Ok(found),
                        Err(rest) => i = rest,
                    }
                }
            }
        }
        Err(i)
    }
    let kind = rng.gen_range(0..5);
    if kind == 4 {
        let positions = s.statement.body.term_positions();
        if positions.is_empty() {
            return false;
        }
        let at = &positions[rng.gen_range(0..positions.len())];
        let Ok(t) = s.statement.body.term_at(at) else { return false };
        let Ok(sort) = th.sig.sort_of(t) else { return false };
        let smallest = enumerate_values(&th.sig, &sort, 3);
        let repl = match th.sig.constructors(&sort).iter().find(|c| th.sig.get(c).unwrap().args == vec![sort.clone()]) {
            Some(c) if rng.gen_bool(0.5) => Term::app(c, vec![t.clone()]),
            _ => match smallest.iter().find(|v| *v != t) {
                Some(v) => v.clone(),
                None => return false,
            },
        };
        let Ok(body) = s.statement.body.replace_term_at(&th.sig, at, repl) else { return false };
        s.statement = Formula::new(s.statement.vars.clone(), body);
        return true;
    }
    let n = count(&s.proof);
    if n == 0 {
        return false;
    }
    let pick = rng.gen_range(0..n);
    let st = nth(&mut s.proof, pick).unwrap();
    let bump = |rng: &mut ChaCha8Rng, at: &mut Vec<usize>| {
        if at.is_empty() || rng.gen_bool(0.3) {
            at.push(rng.gen_range(0..2));
        } else {
            let i = rng.gen_range(0..at.len());
            at[i] = (at[i] + rng.gen_range(1..3)) % 3;
        }
    };
    let perturb = |rng: &mut ChaCha8Rng, subst: &mut Subst| {
        let keys: Vec<Ident> = subst.iter().map(|(k, _)| k.clone()).collect();
        if keys.is_empty() {
            return false;
        }
        let k = &keys[rng.gen_range(0..keys.len())];
        let t = subst.get(k).unwrap().clone();
        let sort = th.sig.sort_of(&t).unwrap();
        let repl = match th.sig.constructors(&sort).iter().find(|c| th.sig.get(c).unwrap().args == vec![sort.clone()]) {
            Some(c) => Term::app(c, vec![t]),
            None => return false,
        };
        subst.insert(k.clone(), repl);
        true
    };
    match (kind, st) {
        (0, Step::RewriteDef { at, .. } | Step::RewriteLemma { at, .. } | Step::UseHyp { at, .. } | Step::BoolSimp { at, .. }) => {
            bump(rng, at);
            true
        }
        (1, Step::RewriteDef { eq, .. }) => {
            *eq = (*eq + 1) % 3;
            true
        }
        (1, Step::RewriteLemma { lemma, .. }) => {
            let others: Vec<&String> = lemmas.keys().filter(|k| *k != lemma).collect();
            *lemma = if others.is_empty() { "no_such_lemma".into() } else { others[rng.gen_range(0..others.len())].clone() };
            true
        }
        (1, Step::UseHyp { hyp, .. }) => {
            *hyp += 1;
            true
        }
        (1, Step::BoolSimp { rule, .. }) => {
            let others: Vec<BoolRule> = BoolRule::ALL.into_iter().filter(|r| r != rule).collect();
            *rule = others[rng.gen_range(0..others.len())];
            true
        }
        (1, Step::Induction { cases, .. }) if cases.len() > 1 => {
            cases.swap(0, 1);
            true
        }
        (2, Step::RewriteDef { dir, .. } | Step::RewriteLemma { dir, .. } | Step::UseHyp { dir, .. }) => {
            *dir = match dir {
                Dir::Fwd => Dir::Bwd,
                Dir::Bwd => Dir::Fwd,
            };
            true
        }
        (3, Step::RewriteDef { subst, .. } | Step::RewriteLemma { subst, .. } | Step::UseHyp { subst, .. }) => perturb(rng, subst),
        _ => false,
    }
}

#[test]
fn criterion_5_checker_robustness() {
    let full = full_run();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut scripts_seen = 0;
    let mut rejected = 0;
    let mut accepted_true = 0;
    let mut failures = Vec::new();
    for (name, text) in &full.bundles {
        let p = load(name);
        let scripts = match parse_bundle(&p.theory, text) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let verdicts = check_bundle(&p.theory, &scripts);
        if !verdicts.iter().all(Check::is_accepted) {
            failures.push(format!("{name}: bundle not accepted {verdicts:?}"));
            continue;
        }
        let mut lemmas = IndexMap::new();
        for s in &scripts {
            scripts_seen += 1;
            let mut done = 0;
            let mut tries = 0;
            while done < MUTATIONS_PER_SCRIPT && tries < MUTATIONS_PER_SCRIPT * 50 {
                tries += 1;
                let mut m = s.clone();
                if !mutate(&mut rng, &p.theory, &lemmas, &mut m) || m == *s {
                    continue;
                }
                done += 1;
                match check(&p.theory, &lemmas, &m) {
                    Check::Rejected(_) => rejected += 1,
                    Check::Accepted if oracle_holds(&p.theory, &m.statement, ORACLE_SIZE) => accepted_true += 1,
                    Check::Accepted => failures.push(format!("{name}/{}: accepted false mutant {}", s.name, m.statement)),
                }
            }
            if done < MUTATIONS_PER_SCRIPT {
                failures.push(format!("{name}/{}: only {done} mutants", s.name));
            }
            lemmas.insert(s.name.clone(), s.statement.clone());
        }
    }
    let r = if failures.is_empty() && scripts_seen > 0 {
        Ok(format!(
            "{} bundles replay, {scripts_seen} scripts x {MUTATIONS_PER_SCRIPT} mutants: {rejected} rejected, {accepted_true} accepted with a true statement, 0 wrong",
            full.bundles.len()
        ))
    } else {
        Err(format!("{failures:?}"))
    };
    report(5, r);
}

#[test]
fn criterion_6_determinism() {
    let a = full_run();
    let b = bench_cli("again", &[]);
    let r = if a.csv != b.csv {
        Err("CSV differs between runs".into())
    } else if a.bundles != b.bundles {
        Err("bundles differ between runs".into())
    } else {
        Ok(format!("CSV and {} bundles byte-identical", a.bundles.len()))
    };
    report(6, r);
}

fn nat_theory() -> Problem {
    load("even_add")
}

fn arb_term(vars: &'static [&'static str]) -> impl proptest::strategy::Strategy<Value = Term> {
    let nat = Sort::new("Nat");
    let leaf = proptest::prop_oneof![
        Just(Term::constant("Z")),
        proptest::sample::select(vars).prop_map(move |v| Term::var(v, &nat)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        proptest::prop_oneof![
            inner.clone().prop_map(|a| Term::app("S", vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("add", vec![a, b])),
        ]
    })
}

fn run_property<S: proptest::strategy::Strategy>(
    name: &str,
    strat: S,
    test: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: PROPERTY_CASES,
        ..Config::default()
    });
    runner.run(&strat, test).map_err(|e| format!("{name}: {e}"))
}

#[test]
fn criterion_7_property_suites() {
    let p = nat_theory();
    let th = &p.theory;
    let nat = Sort::new("Nat");
    let r = (|| {
        run_property("match/substitute round trip", (arb_term(&["x", "y"]), arb_term(&["a", "b"])), |(pat, t)| {
            if let Some(m) = pat.matches(&th.sig, &t) {
                prop_assert_eq!(m.apply(&pat), t);
            }
            Ok(())
        })?;
        run_property("instances match", (arb_term(&["x", "y"]), arb_term(&["a"]), arb_term(&["b"])), |(pat, a, b)| {
            let s: Subst = [(Ident::from("x"), a), (Ident::from("y"), b)].into_iter().collect();
            let inst = s.apply(&pat);
            let m = pat.matches(&th.sig, &inst);
            prop_assert!(m.is_some());
            prop_assert_eq!(m.unwrap().apply(&pat), inst);
            Ok(())
        })?;
        for k in 1..=NAT_COUNT_UP_TO {
            let got = enumerate_values(&th.sig, &nat, k);
            let brute: Vec<Term> = (1..=k).flat_map(|n| oracle_values(th, &nat, n)).collect();
            if got.len() != k || brute.len() != k || got.iter().map(|t| t.to_string()).collect::<BTreeSet<_>>() != brute.iter().map(|t| t.to_string()).collect::<BTreeSet<_>>() {
                return Err(format!("Nat values up to size {k}: {} enumerated, {} by brute force", got.len(), brute.len()));
            }
        }
        let lemmas: IndexMap<String, Formula> = IndexMap::new();
        let ctx = Ctx { theory: th, lemmas: &lemmas };
        run_property(
            "simp terminates within its step limit",
            (arb_term(&["x", "y"]), arb_term(&["x", "y"]), 1usize..300),
            |(l, r, limit)| {
                let f = Formula::new(vec![("x".into(), nat.clone()), ("y".into(), nat.clone())], Prop::Eq(l, r));
                let g = Goal::from_formula(&f);
                let out = simp(&ctx, &g, limit);
                prop_assert!(out.steps.len() <= limit + 1);
                prop_assert_eq!(replay(&ctx, &g, &out.steps), Ok(out.goal));
                Ok(())
            },
        )?;
        run_property("induction subgoal count", (arb_term(&["x", "y"]), arb_term(&["x", "y"]), any::<bool>()), |(l, r, gen)| {
            let f = Formula::new(vec![("x".into(), nat.clone()), ("y".into(), nat.clone())], Prop::Eq(l, r));
            let g = Goal::from_formula(&f);
            let generalize: Vec<Ident> = if gen { vec!["y".into()] } else { vec![] };
            let subgoals = induct(&th.sig, &g, "x", &generalize, &[vec![], vec!["x1".into()]]).unwrap();
            prop_assert_eq!(subgoals.len(), th.sig.constructors(&nat).len());
            prop_assert!(subgoals[0].hyps.is_empty());
            prop_assert_eq!(subgoals[1].hyps.len(), 1);
            prop_assert_eq!(subgoals[1].hyps[0].vars.len(), generalize.len());
            Ok(())
        })?;
        Ok(format!("{PROPERTY_CASES} cases each for match, substitution, simp and induction; Nat counts hold up to {NAT_COUNT_UP_TO}"))
    })();
    report(7, r);
}
