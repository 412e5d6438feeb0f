use super::simp::{simp, usable};
use super::Budget;
use crate::checker::{apply_step, match_schematic, rule_of_formula, Ctx, Dir, Goal, Step, Target};
use crate::kernel::{Formula, Prop, Subst, Term};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

#[derive(Clone, Copy, Debug)]
pub struct HammerLimits {
    /// Rewrite moves along one path, not counting simplification.
    pub depth: usize,
    /// Children evaluated in one search.
    pub nodes: usize,
    pub simp_steps: usize,
}

fn rule_moves(out: &mut Vec<Step>, f: &Formula, subject: &Term, at: &[usize], mk: &dyn Fn(Vec<usize>, Dir, Subst) -> Step) {
    let Some(rule) = rule_of_formula(f) else {
        return;
    };
    for dir in [Dir::Fwd, Dir::Bwd] {
        let Some((src, dst)) = rule.sides(dir) else {
            continue;
        };
        if !usable(rule.vars, &src, &dst) {
            continue;
        }
        let mut s = Subst::new();
        if match_schematic(&src, subject, rule.vars, &mut s) {
            out.push(mk(at.to_vec(), dir, s));
        }
    }
}

/// Every single rewrite of a conclusion subterm: definitions folded
/// backwards, lemmas and hypotheses in both orientations.
fn moves(ctx: &Ctx, goal: &Goal) -> Vec<Step> {
    let sig = &ctx.theory.sig;
    let mut out = Vec::new();
    for at in goal.concl.term_positions() {
        let Ok(subject) = goal.concl.term_at(&at) else {
            continue;
        };
        if subject.is_var() || subject.args().is_empty() {
            continue;
        }
        for (fun, def) in &ctx.theory.functions {
            for (i, eq) in def.equations.iter().enumerate() {
                if eq.rhs.is_var() || eq.rhs.is_ground() {
                    continue;
                }
                let vars = eq.lhs.vars();
                if !usable(&vars, &eq.rhs, &eq.lhs) {
                    continue;
                }
                let mut s = Subst::new();
                if !match_schematic(&eq.rhs, subject, &vars, &mut s) {
                    continue;
                }
                let redex = s.apply(&eq.lhs);
                if def.equations[..i].iter().any(|e| Term::may_match(sig, &e.lhs, &redex)) {
                    continue;
                }
                out.push(Step::RewriteDef {
                    target: Target::Concl,
                    fun: fun.clone(),
                    eq: i,
                    at: at.clone(),
                    dir: Dir::Bwd,
                    subst: s,
                });
            }
        }
        for (name, f) in ctx.lemmas {
            rule_moves(&mut out, f, subject, &at, &|at, dir, subst| Step::RewriteLemma {
                target: Target::Concl,
                lemma: name.clone(),
                at,
                dir,
                subst,
            });
        }
        for (i, h) in goal.hyps.iter().enumerate() {
            rule_moves(&mut out, h, subject, &at, &|at, dir, subst| Step::UseHyp { hyp: i, at, dir, subst });
        }
    }
    out
}

/// Best-first search over single rewrites, each followed by
/// simplification, ordered by conclusion size. Returns a step list that
/// closes the goal.
pub fn hammer(ctx: &Ctx, goal: &Goal, limits: HammerLimits, budget: &Budget) -> Option<Vec<Step>> {
    let root = simp(ctx, goal, limits.simp_steps);
    if root.goal.is_closed() {
        return Some(root.steps);
    }
    let mut nodes = vec![(root.goal, root.steps, 0usize)];
    let mut queue = BinaryHeap::new();
    let mut seen: HashSet<Prop> = HashSet::new();
    seen.insert(nodes[0].0.concl.clone());
    queue.push(Reverse((nodes[0].0.size(), 0usize)));
    let mut evaluated = 0;
    while let Some(Reverse((_, idx))) = queue.pop() {
        let (g, steps, depth) = nodes[idx].clone();
        if depth >= limits.depth {
            continue;
        }
        for mv in moves(ctx, &g) {
            if evaluated >= limits.nodes || !budget.spend(1) {
                return None;
            }
            evaluated += 1;
            let Ok(moved) = apply_step(ctx, &g, &mv) else {
                continue;
            };
            let after = simp(ctx, &moved, limits.simp_steps);
            let mut path = steps.clone();
            path.push(mv);
            path.extend(after.steps);
            if after.goal.is_closed() {
                return Some(path);
            }
            if seen.insert(after.goal.concl.clone()) {
                queue.push(Reverse((after.goal.size(), nodes.len())));
                nodes.push((after.goal, path, depth + 1));
            }
        }
    }
    None
}
