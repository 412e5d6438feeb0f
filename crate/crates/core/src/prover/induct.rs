use crate::checker::{induct, Goal, Reason};
use crate::frontend::Theory;
use crate::kernel::{Ident, Sort, Term};
use std::collections::{BTreeSet, HashMap};

/// Argument names for each constructor of `var`'s sort, fresh for `goal`.
pub fn fresh_names(theory: &Theory, goal: &Goal, var: &str) -> Option<Vec<Vec<Ident>>> {
    let sort = goal.fixed_sort(var)?;
    let mut used: BTreeSet<Ident> = goal.names();
    let mut out = Vec::new();
    for c in theory.sig.constructors(sort) {
        let arity = theory.sig.get(c)?.args.len();
        let mut names = Vec::new();
        for j in 0..arity {
            let mut n = if arity == 1 { format!("{var}'") } else { format!("{var}'{}", j + 1) };
            while used.contains(n.as_str()) || theory.sig.get(&n).is_some() {
                n.push('\'');
            }
            let n = Ident::from(n);
            used.insert(n.clone());
            names.push(n);
        }
        out.push(names);
    }
    Some(out)
}

/// Structural induction with generated fresh names. Returns, per
/// constructor, its name, the fresh argument names and the subgoal.
pub fn induct_goal(
    theory: &Theory,
    goal: &Goal,
    var: &str,
    generalize: &[Ident],
) -> Result<Vec<(Ident, Vec<Ident>, Goal)>, Reason> {
    let fresh = fresh_names(theory, goal, var).ok_or_else(|| Reason::Induction(format!("`{var}` is not fixed")))?;
    let subgoals = induct(&theory.sig, goal, var, generalize, &fresh)?;
    let sort = goal.fixed_sort(var).unwrap();
    Ok(theory
        .sig
        .constructors(sort)
        .iter()
        .cloned()
        .zip(fresh)
        .zip(subgoals)
        .map(|((c, f), g)| (c, f, g))
        .collect())
}

fn occurrences(theory: &Theory, t: &Term, scores: &mut HashMap<Ident, usize>) {
    if let Term::App { sym, args } = t {
        for i in theory.matching_positions(sym) {
            if let Some(Term::Var { name, .. }) = args.get(i) {
                *scores.entry(name.clone()).or_default() += 1;
            }
        }
        for a in args {
            occurrences(theory, a, scores);
        }
    }
}

/// Induction candidates `(var, generalize)`, best first. Variables are
/// ranked by how often they occur directly at a pattern-matched argument
/// position, then by first occurrence. Each contributes "generalize all
/// other generalizable variables" and then "generalize none".
pub fn smart_induct(theory: &Theory, goal: &Goal, k: usize) -> Vec<(Ident, Vec<Ident>)> {
    ranked(theory, goal, k, true)
}

/// The older ranking without generalization.
pub fn old_smart_induct(theory: &Theory, goal: &Goal, k: usize) -> Vec<(Ident, Vec<Ident>)> {
    ranked(theory, goal, k, false)
}

fn ranked(theory: &Theory, goal: &Goal, k: usize, generalizing: bool) -> Vec<(Ident, Vec<Ident>)> {
    let mut scores = HashMap::new();
    goal.concl.map_terms(&mut |t| {
        occurrences(theory, t, &mut scores);
        t.clone()
    });
    let inductive = |s: &Sort| !theory.sig.constructors(s).is_empty();
    let in_concl: Vec<(Ident, Sort)> = goal.concl.free_vars();
    let mut vars: Vec<(usize, &(Ident, Sort))> = in_concl
        .iter()
        .enumerate()
        .filter(|(_, (n, s))| inductive(s) && goal.fixed_sort(n) == Some(s))
        .collect();
    vars.sort_by_key(|(i, (n, _))| (std::cmp::Reverse(scores.get(n).copied().unwrap_or(0)), *i));
    let in_hyp = |n: &Ident| goal.hyps.iter().any(|h| h.free_vars().iter().any(|(m, _)| m == n));
    let mut out: Vec<(Ident, Vec<Ident>)> = Vec::new();
    for (_, (v, _)) in vars {
        let mut cands = Vec::new();
        if generalizing {
            let others: Vec<Ident> = in_concl
                .iter()
                .map(|(n, _)| n.clone())
                .filter(|n| n != v && !in_hyp(n) && goal.fixed_sort(n).is_some())
                .collect();
            cands.push((v.clone(), others));
        }
        cands.push((v.clone(), vec![]));
        for c in cands {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out.truncate(k);
    out
}

