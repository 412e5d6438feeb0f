use crate::checker::{apply_step, bool_rewrite, match_schematic, BoolRule, Ctx, Dir, Goal, Step, Target};
use crate::kernel::{term_order, Formula, Ident, Prop, Sort, Subst, Term};
use std::cmp::Ordering;
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleRef {
    Lemma(String),
    Hyp(usize),
}

/// An oriented rewrite rule from a lemma or hypothesis.
#[derive(Clone, Debug)]
pub struct OrientedRule {
    pub source: RuleRef,
    pub vars: Vec<(Ident, Sort)>,
    pub lhs: Term,
    pub rhs: Term,
    pub dir: Dir,
    /// Applies only when the result is smaller in the term order.
    pub ordered: bool,
}

impl OrientedRule {
    pub fn step(&self, target: Target, at: Vec<usize>, subst: Subst) -> Step {
        match &self.source {
            RuleRef::Lemma(name) => Step::RewriteLemma {
                target,
                lemma: name.clone(),
                at,
                dir: self.dir,
                subst,
            },
            RuleRef::Hyp(i) => Step::UseHyp {
                hyp: *i,
                at,
                dir: self.dir,
                subst,
            },
        }
    }
}

fn schematic_vars(t: &Term, vars: &[(Ident, Sort)]) -> HashSet<Ident> {
    t.vars()
        .into_iter()
        .filter(|v| vars.contains(v))
        .map(|(n, _)| n)
        .collect()
}

fn is_schematic_var(t: &Term, vars: &[(Ident, Sort)]) -> bool {
    matches!(t, Term::Var { name, sort } if vars.iter().any(|(n, s)| n == name && s == sort))
}

/// `lhs -> rhs` is usable when the lhs is not a bare schematic variable
/// and introduces no new schematic variables.
pub fn usable(vars: &[(Ident, Sort)], lhs: &Term, rhs: &Term) -> bool {
    !is_schematic_var(lhs, vars) && schematic_vars(rhs, vars).is_subset(&schematic_vars(lhs, vars))
}

fn permutative(vars: &[(Ident, Sort)], l: &Term, r: &Term) -> bool {
    l.size() == r.size() && schematic_vars(l, vars) == schematic_vars(r, vars)
}

fn rule(source: RuleRef, f: &Formula, lhs: &Term, rhs: &Term, dir: Dir, ordered: bool) -> OrientedRule {
    OrientedRule {
        source,
        vars: f.vars.clone(),
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        dir,
        ordered,
    }
}

/// Lemma rules, oriented as stated.
pub fn lemma_rule(name: &str, f: &Formula) -> Option<OrientedRule> {
    let src = RuleRef::Lemma(name.to_string());
    match &f.body {
        Prop::Eq(l, r) if usable(&f.vars, l, r) => {
            Some(rule(src, f, l, r, Dir::Fwd, permutative(&f.vars, l, r)))
        }
        Prop::Atom(t) if !is_schematic_var(t, &f.vars) => Some(rule(src, f, t, &Term::constant(crate::kernel::TRUE), Dir::Fwd, false)),
        _ => None,
    }
}

/// Hypothesis rules, oriented from the larger side to the smaller one;
/// permutative hypotheses are used both ways under the term order.
pub fn hyp_rules(i: usize, f: &Formula) -> Vec<OrientedRule> {
    let src = || RuleRef::Hyp(i);
    match &f.body {
        Prop::Eq(l, r) if l != r => {
            if permutative(&f.vars, l, r) && usable(&f.vars, l, r) && usable(&f.vars, r, l) {
                return vec![
                    rule(src(), f, l, r, Dir::Fwd, true),
                    rule(src(), f, r, l, Dir::Bwd, true),
                ];
            }
            let fwd = usable(&f.vars, l, r).then(|| rule(src(), f, l, r, Dir::Fwd, false));
            let bwd = usable(&f.vars, r, l).then(|| rule(src(), f, r, l, Dir::Bwd, false));
            let l_larger = term_order(l, r) == Ordering::Greater;
            let (first, second) = if l_larger { (fwd, bwd) } else { (bwd, fwd) };
            first.or(second).into_iter().collect()
        }
        Prop::Atom(t) if !f.body.is_true() && !is_schematic_var(t, &f.vars) => {
            vec![rule(src(), f, t, &Term::constant(crate::kernel::TRUE), Dir::Fwd, false)]
        }
        _ => vec![],
    }
}

#[derive(Clone, Debug)]
pub struct SimpResult {
    pub goal: Goal,
    pub steps: Vec<Step>,
    /// Stopped by the step limit or a detected loop.
    pub incomplete: bool,
}

impl SimpResult {
    pub fn progressed(&self) -> bool {
        !self.steps.is_empty()
    }
}

struct Simp<'c, 'a> {
    ctx: &'c Ctx<'a>,
    lemma_rules: Vec<OrientedRule>,
    hyp_rules: Vec<OrientedRule>,
    steps: Vec<Step>,
    left: usize,
    incomplete: bool,
    seen: HashSet<(Target, Vec<usize>, Term)>,
}

impl Simp<'_, '_> {
    fn stopped(&self) -> bool {
        self.incomplete
    }

    fn record(&mut self, step: Step) {
        self.steps.push(step);
        if self.left == 0 {
            self.incomplete = true;
        } else {
            self.left -= 1;
        }
    }

    fn rewrite_root(&mut self, t: &Term, at: &[usize], target: Target) -> Option<Term> {
        let sig = &self.ctx.theory.sig;
        let Term::App { sym, .. } = t else {
            return None;
        };
        if let Some(def) = self.ctx.theory.function(sym) {
            for (i, eq) in def.equations.iter().enumerate() {
                if let Some(s) = eq.lhs.matches(sig, t) {
                    if def.equations[..i].iter().any(|e| Term::may_match(sig, &e.lhs, t)) {
                        break;
                    }
                    let out = s.apply(&eq.rhs);
                    self.record(Step::RewriteDef {
                        target,
                        fun: sym.clone(),
                        eq: i,
                        at: at.to_vec(),
                        dir: Dir::Fwd,
                        subst: s,
                    });
                    return Some(out);
                }
            }
        }
        let hyps: &[OrientedRule] = if target == Target::Concl { &self.hyp_rules } else { &[] };
        for r in hyps.iter().chain(&self.lemma_rules) {
            let mut s = Subst::new();
            if !match_schematic(&r.lhs, t, &r.vars, &mut s) {
                continue;
            }
            let out = s.apply(&r.rhs);
            if r.ordered && term_order(&out, t) != Ordering::Less {
                continue;
            }
            let step = r.step(target, at.to_vec(), s);
            self.record(step);
            return Some(out);
        }
        None
    }

    fn norm_term(&mut self, mut t: Term, path: &mut Vec<usize>, target: Target) -> Term {
        loop {
            if let Term::App { sym, args } = t {
                let mut new_args = Vec::with_capacity(args.len());
                for (i, a) in args.into_iter().enumerate() {
                    path.push(i);
                    new_args.push(self.norm_term(a, path, target));
                    path.pop();
                }
                t = Term::App { sym, args: new_args };
            }
            if self.stopped() {
                return t;
            }
            match self.rewrite_root(&t, path, target) {
                Some(out) => {
                    if !self.seen.insert((target, path.clone(), out.clone())) {
                        self.incomplete = true;
                        return out;
                    }
                    t = out;
                }
                None => return t,
            }
        }
    }

    fn norm_prop(&mut self, p: Prop, path: &mut Vec<usize>, target: Target) -> Prop {
        let mut p = p;
        loop {
            let mut child = |this: &mut Self, i: usize, q: Prop| {
                path.push(i);
                let r = this.norm_prop(q, path, target);
                path.pop();
                r
            };
            p = match p {
                Prop::Eq(l, r) => {
                    path.push(0);
                    let l = self.norm_term(l, path, target);
                    path.pop();
                    path.push(1);
                    let r = self.norm_term(r, path, target);
                    path.pop();
                    Prop::Eq(l, r)
                }
                Prop::Atom(t) => {
                    path.push(0);
                    let t = self.norm_term(t, path, target);
                    path.pop();
                    Prop::Atom(t)
                }
                Prop::Implies(hs, c) => {
                    let n = hs.len();
                    let hs: Vec<Prop> = hs.into_iter().enumerate().map(|(i, h)| child(self, i, h)).collect();
                    let c = child(self, n, *c);
                    Prop::Implies(hs, Box::new(c))
                }
                Prop::Or(ps) => Prop::Or(ps.into_iter().enumerate().map(|(i, q)| child(self, i, q)).collect()),
                Prop::And(ps) => Prop::And(ps.into_iter().enumerate().map(|(i, q)| child(self, i, q)).collect()),
            };
            if self.stopped() {
                return p;
            }
            let at_root = path.is_empty() && target == Target::Concl;
            let fired = BoolRule::ALL.into_iter().find_map(|rule| {
                if rule == BoolRule::EqRefl && at_root {
                    return None;
                }
                bool_rewrite(&self.ctx.theory.sig, rule, &p).map(|q| (rule, q))
            });
            match fired {
                Some((rule, q)) => {
                    self.record(Step::BoolSimp {
                        target,
                        rule,
                        at: path.clone(),
                    });
                    p = q;
                }
                None => return p,
            }
        }
    }
}

/// Exhaustive innermost-leftmost rewriting of the hypotheses (with
/// definitions and lemmas) and the conclusion (also with hypotheses).
/// Never fails: a hit step limit or loop is reported as `incomplete`.
pub fn simp(ctx: &Ctx, goal: &Goal, step_limit: usize) -> SimpResult {
    let lemma_rules = ctx.lemmas.iter().filter_map(|(n, f)| lemma_rule(n, f)).collect();
    let mut s = Simp {
        ctx,
        lemma_rules,
        hyp_rules: vec![],
        steps: vec![],
        left: step_limit.max(1),
        incomplete: false,
        seen: HashSet::new(),
    };
    let mut g = goal.clone();
    for _round in 0..8 {
        if g.is_closed() || s.stopped() {
            break;
        }
        let before = s.steps.len();
        if matches!(g.concl, Prop::Implies(..)) {
            g = apply_step(ctx, &g, &Step::Intro).expect("intro");
            s.record(Step::Intro);
        }
        while let Some(i) = g.hyps.iter().position(|h| matches!(h.body, Prop::And(_))) {
            let step = Step::SplitHyp { hyp: i };
            g = apply_step(ctx, &g, &step).expect("split");
            s.record(step);
        }
        for i in 0..g.hyps.len() {
            let body = std::mem::replace(&mut g.hyps[i].body, Prop::t());
            g.hyps[i].body = s.norm_prop(body, &mut vec![], Target::Hyp(i));
        }
        if g.is_closed() || s.stopped() {
            break;
        }
        if g.hyps.iter().any(|h| matches!(h.body, Prop::And(_))) {
            continue;
        }
        s.hyp_rules = g.hyps.iter().enumerate().flat_map(|(i, h)| hyp_rules(i, h)).collect();
        let concl = std::mem::replace(&mut g.concl, Prop::t());
        g.concl = s.norm_prop(concl, &mut vec![], Target::Concl);
        if let Prop::Eq(l, r) = &g.concl {
            if l == r && !s.stopped() {
                g = apply_step(ctx, &g, &Step::Refl).expect("refl");
                s.record(Step::Refl);
            }
        }
        if s.steps.len() == before || !matches!(g.concl, Prop::Implies(..)) {
            break;
        }
    }
    debug_assert_eq!(replay(ctx, goal, &s.steps).as_ref(), Ok(&g), "simp trace does not replay");
    SimpResult {
        goal: g,
        steps: s.steps,
        incomplete: s.incomplete,
    }
}

/// Re-applies a step list with the checker's step function.
pub fn replay(ctx: &Ctx, goal: &Goal, steps: &[Step]) -> Result<Goal, String> {
    let mut g = goal.clone();
    for st in steps {
        g = apply_step(ctx, &g, st).map_err(|e| format!("{st:?}: {e}"))?;
    }
    Ok(g)
}
