use super::hammer::{hammer, HammerLimits};
use super::induct::{induct_goal, old_smart_induct, smart_induct};
use super::simp::simp;
use super::*;
use super::strategy::Strategy as Strat;
use crate::checker::{check, Goal, Step};
use crate::frontend::{parse_formula, parse_problem, Problem};
use crate::kernel::{Prop, Sort, Term};
use proptest::prelude::{prop_assert, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig};

fn problem(name: &str) -> Problem {
    let text = match name {
        "even_add" => include_str!("../../corpus/even_add.tbc"),
        "add_comm" => include_str!("../../corpus/add_comm.tbc"),
        "rev_rev" => include_str!("../../corpus/rev_rev.tbc"),
        _ => unreachable!(),
    };
    parse_problem(text, name).unwrap()
}

fn lemmas(p: &Problem, src: &[(&str, &str)]) -> IndexMap<String, Formula> {
    src.iter()
        .map(|(n, f)| (n.to_string(), parse_formula(&p.theory, f).unwrap()))
        .collect()
}

fn identities(p: &Problem) -> IndexMap<String, Formula> {
    lemmas(
        p,
        &[
            ("identity_1", "(forall ((var_1 Nat)) (= (add Z var_1) var_1))"),
            ("identity_2", "(forall ((var_1 Nat)) (= (add var_1 Z) var_1))"),
        ],
    )
}

fn comm(p: &Problem) -> IndexMap<String, Formula> {
    lemmas(
        p,
        &[("commutativity_1", "(forall ((var_1 Nat) (var_2 Nat)) (= (add var_1 var_2) (add var_2 var_1)))")],
    )
}

fn goal(p: &Problem, f: &str) -> Goal {
    Goal::from_formula(&parse_formula(&p.theory, f).unwrap())
}

fn body(p: &Problem, f: &str) -> Prop {
    parse_formula(&p.theory, f).unwrap().body
}

fn even_add_cases(p: &Problem) -> Vec<Goal> {
    let g = Goal::from_formula(&p.goal);
    induct_goal(&p.theory, &g, "n", &[]).unwrap().into_iter().map(|c| c.2).collect()
}

fn limits() -> HammerLimits {
    let c = ProverConfig::default();
    HammerLimits {
        depth: c.hammer_depth,
        nodes: c.hammer_nodes,
        simp_steps: c.simp_steps,
    }
}

fn attempt(p: &Problem, lemmas: &IndexMap<String, Formula>, f: &Formula, s: &Strat) -> Option<ProofScript> {
    prove(&p.theory, lemmas, "g", f, s, ProverConfig::default(), Budget::nodes(20_000)).0
}

#[test]
fn simp_closes_the_base_case() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let r = simp(&ctx, &even_add_cases(&p)[0], 200);
    assert!(r.goal.is_closed());
    assert!(!r.incomplete);
}

#[test]
fn simp_gets_stuck_in_the_step_case() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let r = simp(&ctx, &even_add_cases(&p)[1], 200);
    assert!(!r.goal.is_closed());
    let k = &r.goal.fixed[0].0;
    let expected = body(&p, &format!("(forall (({k} Nat)) (even (S (add {k} (S {k})))))"));
    assert_eq!(r.goal.concl, expected);
}

#[test]
fn simp_makes_no_progress_on_right_identity() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let g = goal(&p, "(forall ((var_1 Nat)) (= (add var_1 Z) var_1))");
    let r = simp(&ctx, &g, 200);
    assert!(!r.progressed());
    assert_eq!(r.goal, g);
}

#[test]
fn induction_subgoals_for_even_add() {
    let p = problem("even_add");
    let cases = induct_goal(&p.theory, &Goal::from_formula(&p.goal), "n", &[]).unwrap();
    assert_eq!(cases.len(), 2);
    assert_eq!(cases[0].0.as_ref(), "Z");
    assert!(cases[0].2.hyps.is_empty());
    assert_eq!(cases[1].0.as_ref(), "S");
    assert_eq!(cases[1].2.hyps.len(), 1);
    let k = &cases[1].1[0];
    assert_eq!(cases[1].2.hyps[0].body, body(&p, &format!("(forall (({k} Nat)) (even (add {k} {k})))")));
}

#[test]
fn smart_induct_ranks_the_matched_variable_first() {
    let p = problem("add_comm");
    let g = Goal::from_formula(&p.goal);
    let c = smart_induct(&p.theory, &g, 5);
    let first_var = &c[0].0;
    // add matches on its first argument, so the lhs's first variable wins
    let Prop::Eq(Term::App { args, .. }, _) = &g.concl else { panic!() };
    assert!(matches!(&args[0], Term::Var { name, .. } if name == first_var));
    assert!(!c[0].1.is_empty(), "first candidate generalizes");
    assert!(c.len() <= 5);
    assert!(old_smart_induct(&p.theory, &g, 5).iter().all(|(_, gen)| gen.is_empty()));
}

#[test]
fn hammer_cannot_prove_right_identity_without_induction() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let g = goal(&p, "(forall ((var_1 Nat)) (= (add var_1 Z) var_1))");
    assert!(hammer(&ctx, &g, limits(), &Budget::nodes(100_000)).is_none());
}

#[test]
fn hammer_returns_nothing_to_do_on_true() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let g = Goal::from_formula(&Formula::close(Prop::t()));
    assert_eq!(hammer(&ctx, &g, limits(), &Budget::nodes(10)), Some(vec![]));
}

#[test]
fn hammer_closes_the_step_case_with_commutativity() {
    let p = problem("even_add");
    let lm = comm(&p);
    let ctx = Ctx { theory: &p.theory, lemmas: &lm };
    let step = &even_add_cases(&p)[1];
    let steps = hammer(&ctx, step, limits(), &Budget::nodes(100_000)).expect("closed");
    let end = simp::replay(&ctx, step, &steps).unwrap();
    assert!(end.is_closed());
    assert!(steps.iter().any(|s| matches!(s, Step::RewriteLemma { .. })));
}

#[test]
fn tbc_closes_left_identity_at_the_first_branch() {
    let p = problem("even_add");
    let f = parse_formula(&p.theory, "(forall ((var Nat)) (= (add Z var) var))").unwrap();
    let s = attempt(&p, &IndexMap::new(), &f, &Strat::tbc()).expect("proved");
    assert!(s.proof.iter().all(|st| !matches!(st, Step::Induction { .. })));
    assert!(check(&p.theory, &IndexMap::new(), &s).is_accepted());
}

#[test]
fn tbc_proves_commutativity_from_the_identities() {
    let p = problem("add_comm");
    let lm = identities(&p);
    let s = attempt(&p, &lm, &p.goal, &Strat::tbc()).expect("proved");
    assert!(matches!(s.proof[0], Step::Induction { .. }));
    assert!(check(&p.theory, &lm, &s).is_accepted());
    let deps = s.dependencies();
    assert!(deps.iter().any(|d| d == "identity_1" || d == "identity_2"), "{deps:?}");
}

#[test]
fn tbc_fails_on_even_add_without_lemmas() {
    let p = problem("even_add");
    assert!(attempt(&p, &IndexMap::new(), &p.goal, &Strat::tbc()).is_none());
}

#[test]
fn tbc_proves_even_add_with_commutativity() {
    let p = problem("even_add");
    let lm = comm(&p);
    let s = attempt(&p, &lm, &p.goal, &Strat::tbc()).expect("proved");
    assert!(check(&p.theory, &lm, &s).is_accepted());
    assert_eq!(s.dependencies(), vec!["commutativity_1".to_string()]);
}

#[test]
fn is_solved_fails_with_open_goals() {
    let p = problem("even_add");
    let lm = IndexMap::new();
    let env = Env {
        ctx: Ctx { theory: &p.theory, lemmas: &lm },
        cfg: ProverConfig::default(),
        budget: Budget::nodes(100),
    };
    assert!(run_strategy(&env, &Strat::IsSolved, ProofState::new(&p.goal)).is_none());
}

#[test]
fn builtin_tree_shapes() {
    let Strat::Ors(v) = Strat::tbc() else { panic!() };
    assert_eq!(v.len(), 4);
    assert_eq!(v[0], Strat::Thens(vec![Strat::Auto, Strat::IsSolved]));
    let Strat::Ors(w) = Strat::tap21() else { panic!() };
    assert_eq!(w.len(), 3);
    assert!(Strat::tbc().validate().is_ok());
    assert!(Strat::tap21().validate().is_ok());
    assert!(Strat::RepeatN(RepeatCount::Fixed(0), Box::new(Strat::Auto)).validate().is_err());
}

#[test]
fn default_tree_matches_the_published_listing() {
    // The listing with highlighting and whitespace removed.
    let listing = "Ors [Thens [Auto, IsSolved], PThenOne [Smart_Induct, Thens [Auto, IsSolved]], \
        Thens [Hammer, IsSolved], PThenOne [Smart_Induct, Ors [Thens [Repeat (Ors [Fastforce, Hammer, \
        Thens [Clarsimp, IsSolved], Thens [Subgoal, Clarsimp, Repeat (Thens [Subgoal, Ors [Thens [Auto, IsSolved], \
        Thens [Smart_Induct, Auto, IsSolved]]]), IsSolved]]), IsSolved]]]]";
    assert_eq!(Strat::tbc().to_string(), listing);
}

#[test]
fn budget_exhaustion_fails() {
    let p = problem("add_comm");
    let lm = identities(&p);
    let (s, spent) = prove(&p.theory, &lm, "g", &p.goal, &Strat::tbc(), ProverConfig::default(), Budget::nodes(3));
    assert!(s.is_none());
    assert!(spent <= 3);
}

#[test]
fn rev_rev_needs_more_than_the_strategy() {
    let p = problem("rev_rev");
    assert!(attempt(&p, &IndexMap::new(), &p.goal, &Strat::tbc()).is_none());
}

fn nat_term(depth: u32) -> impl proptest::strategy::Strategy<Value = String> {
    let leaf = prop_oneof![Just("Z".to_string()), Just("x".to_string()), Just("y".to_string())];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("(S {a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("(add {a} {b})")),
        ]
    })
}

use proptest::strategy::Strategy as _;

fn mk_goal(p: &Problem, l: &str, r: &str) -> Goal {
    goal(p, &format!("(forall ((x Nat) (y Nat)) (= {l} {r}))"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simp_terminates_and_replays(l in nat_term(4), r in nat_term(4)) {
        let p = problem("even_add");
        let lm = comm(&p);
        let ctx = Ctx { theory: &p.theory, lemmas: &lm };
        let g = mk_goal(&p, &l, &r);
        let out = simp(&ctx, &g, 200);
        prop_assert!(out.steps.len() <= 201);
        prop_assert_eq!(simp::replay(&ctx, &g, &out.steps), Ok(out.goal.clone()));
        // a second pass over a finished result finds nothing new
        if !out.incomplete && !out.goal.is_closed() {
            prop_assert!(!simp(&ctx, &out.goal, 200).progressed());
        }
    }

    #[test]
    fn induction_makes_one_case_per_constructor(l in nat_term(3), r in nat_term(3)) {
        let p = problem("even_add");
        let g = mk_goal(&p, &l, &r);
        let cases = induct_goal(&p.theory, &g, "x", &[]).unwrap();
        prop_assert_eq!(cases.len(), 2);
        prop_assert!(cases[0].2.hyps.is_empty());
        prop_assert_eq!(cases[1].2.hyps.len(), 1);
        prop_assert_eq!(cases[1].1.len(), 1);
    }

    #[test]
    fn smart_induct_ignores_variable_names(l in nat_term(3), r in nat_term(3)) {
        let p = problem("even_add");
        let g = mk_goal(&p, &l, &r);
        let rename = |s: &str| s.replace('x', "u").replace('y', "v");
        let h = goal(&p, &format!("(forall ((u Nat) (v Nat)) (= {} {}))", rename(&l), rename(&r)));
        let back = |n: &str| if n == "u" { "x".to_string() } else { "y".to_string() };
        let a = smart_induct(&p.theory, &g, 5);
        let b: Vec<_> = smart_induct(&p.theory, &h, 5)
            .into_iter()
            .map(|(v, gen)| (back(&v), gen.iter().map(|n| back(n)).collect::<Vec<_>>()))
            .collect();
        let a: Vec<_> = a.into_iter().map(|(v, gen)| (v.to_string(), gen.iter().map(|n| n.to_string()).collect::<Vec<_>>())).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn goal_helper_fixes_both_variables() {
    let p = problem("even_add");
    let g = mk_goal(&p, "x", "y");
    assert_eq!(g.fixed, vec![("x".into(), Sort::new("Nat")), ("y".into(), Sort::new("Nat"))]);
}
