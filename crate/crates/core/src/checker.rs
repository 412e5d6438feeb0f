//! Search-free replay of proof scripts.
//!
//! The prover applies the same step functions while searching, so a
//! script it emits is exactly the sequence of kernel steps it took.
//!
//! Bundle grammar (one `lemma` form per script, dependencies first):
//!
//! ```text
//! bundle  := lemma*
//! lemma   := (lemma NAME FORMULA (proof STEP*))
//! STEP    := (refl)
//!          | (intro)
//!          | (split_hyp I)
//!          | (def TARGET FUN EQ POS DIR SUBST)
//!          | (rw TARGET LEMMA POS DIR SUBST)
//!          | (hyp I POS DIR SUBST)
//!          | (bool TARGET RULE POS)
//!          | (induct VAR (GEN*) CASE*)
//! CASE    := (case CTOR (FRESH*) STEP*)
//! TARGET  := concl | (in_hyp I)
//! POS     := (I*)
//! DIR     := -> | <-
//! SUBST   := ((VAR SORT TERM)*)
//! RULE    := ctor_clash | ctor_inject | eq_refl | eq_true | and | or | imp
//! ```

use crate::frontend::{parse_formula_sexpr, parse_term_inferred, Diagnostic, Theory};
use crate::kernel::{Formula, Ident, Prop, Signature, Sort, Subst, Term};
use crate::sexpr::{read_all, Loc, SExpr};
use indexmap::IndexMap;
use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Concl,
    Hyp(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    /// Left-hand side to right-hand side.
    Fwd,
    Bwd,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Fwd => Dir::Bwd,
            Dir::Bwd => Dir::Fwd,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolRule {
    /// `C .. = D ..` with distinct constructors becomes `false`.
    CtorClash,
    /// `C a.. = C b..` becomes the conjunction of argument equations.
    CtorInject,
    /// `t = t` becomes `true`.
    EqRefl,
    /// `t = true` becomes the atom `t`.
    EqTrue,
    And,
    Or,
    Imp,
}

impl BoolRule {
    pub const ALL: [BoolRule; 7] = [
        BoolRule::EqRefl,
        BoolRule::CtorClash,
        BoolRule::CtorInject,
        BoolRule::EqTrue,
        BoolRule::And,
        BoolRule::Or,
        BoolRule::Imp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoolRule::CtorClash => "ctor_clash",
            BoolRule::CtorInject => "ctor_inject",
            BoolRule::EqRefl => "eq_refl",
            BoolRule::EqTrue => "eq_true",
            BoolRule::And => "and",
            BoolRule::Or => "or",
            BoolRule::Imp => "imp",
        }
    }

    pub fn from_name(s: &str) -> Option<BoolRule> {
        BoolRule::ALL.into_iter().find(|r| r.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// Closes a goal whose conclusion is an equation with identical sides.
    Refl,
    /// Moves the premises of an implication conclusion into the hypotheses.
    Intro,
    /// Replaces a conjunctive hypothesis by its members.
    SplitHyp { hyp: usize },
    RewriteDef {
        target: Target,
        fun: Ident,
        eq: usize,
        at: Vec<usize>,
        dir: Dir,
        subst: Subst,
    },
    RewriteLemma {
        target: Target,
        lemma: String,
        at: Vec<usize>,
        dir: Dir,
        subst: Subst,
    },
    /// Rewrites the conclusion with a hypothesis.
    UseHyp {
        hyp: usize,
        at: Vec<usize>,
        dir: Dir,
        subst: Subst,
    },
    BoolSimp {
        target: Target,
        rule: BoolRule,
        at: Vec<usize>,
    },
    /// Must be the last step of its list.
    Induction {
        var: Ident,
        generalize: Vec<Ident>,
        cases: Vec<Case>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Case {
    pub ctor: Ident,
    pub fresh: Vec<Ident>,
    pub proof: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofScript {
    pub name: String,
    pub statement: Formula,
    pub proof: Vec<Step>,
}

impl ProofScript {
    /// Lemmas cited anywhere in the proof, in first-use order.
    pub fn dependencies(&self) -> Vec<String> {
        fn walk(steps: &[Step], out: &mut Vec<String>) {
            for s in steps {
                match s {
                    Step::RewriteLemma { lemma, .. } if !out.contains(lemma) => out.push(lemma.clone()),
                    Step::Induction { cases, .. } => cases.iter().for_each(|c| walk(&c.proof, out)),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.proof, &mut out);
        out
    }

    pub fn step_count(&self) -> usize {
        fn count(steps: &[Step]) -> usize {
            steps
                .iter()
                .map(|s| match s {
                    Step::Induction { cases, .. } => 1 + cases.iter().map(|c| count(&c.proof)).sum::<usize>(),
                    _ => 1,
                })
                .sum()
        }
        count(&self.proof)
    }
}

/// A sequent: hypotheses and a conclusion over fixed variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Goal {
    pub fixed: Vec<(Ident, Sort)>,
    /// Bound variables of a hypothesis are schematic.
    pub hyps: Vec<Formula>,
    pub concl: Prop,
}

impl Goal {
    pub fn from_formula(f: &Formula) -> Goal {
        Goal {
            fixed: f.vars.clone(),
            hyps: vec![],
            concl: f.body.clone(),
        }
    }

    /// Conclusion `true`, or some hypothesis `false`.
    pub fn is_closed(&self) -> bool {
        self.concl.is_true() || self.hyps.iter().any(|h| h.body.is_false())
    }

    pub fn fixed_sort(&self, v: &str) -> Option<&Sort> {
        self.fixed.iter().find(|(n, _)| &**n == v).map(|(_, s)| s)
    }

    /// Every variable name in use, bound or free.
    pub fn names(&self) -> BTreeSet<Ident> {
        let mut out: BTreeSet<Ident> = self.fixed.iter().map(|(n, _)| n.clone()).collect();
        for h in &self.hyps {
            out.extend(h.all_names());
        }
        out.extend(self.concl.free_vars().into_iter().map(|(n, _)| n));
        out
    }

    pub fn size(&self) -> usize {
        self.concl.size()
    }

    pub fn target(&self, t: Target) -> Option<&Prop> {
        match t {
            Target::Concl => Some(&self.concl),
            Target::Hyp(i) => self.hyps.get(i).map(|h| &h.body),
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.hyps {
            write!(f, "{h}; ")?;
        }
        write!(f, "|- {}", self.concl)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Reason {
    #[error("no proof steps left but the goal is open")]
    OpenBranch,
    #[error("goal already closed")]
    AlreadyClosed,
    #[error("no hypothesis {0}")]
    NoSuchHyp(usize),
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
    #[error("no equation {1} for `{0}`")]
    UnknownEquation(Ident, usize),
    #[error("not a rewrite rule")]
    NotARule,
    #[error("invalid position")]
    BadPosition,
    #[error("substitution: {0}")]
    BadSubst(String),
    #[error("instance does not match `{0}`")]
    NoMatch(Term),
    #[error("an earlier equation may apply to `{0}`")]
    FirstMatch(Term),
    #[error("rule `{0}` does not apply")]
    BoolRule(&'static str),
    #[error("refl on an equation with different sides")]
    NotRefl,
    #[error("nothing to introduce")]
    NoIntro,
    #[error("hypothesis is not a conjunction")]
    NotConj,
    #[error("induction: {0}")]
    Induction(String),
    #[error("induction must end its step list")]
    StepsAfterInduction,
    #[error("ill-formed statement: {0}")]
    Statement(String),
    #[error("sort error: {0}")]
    Sort(String),
}

/// Where a script went wrong: alternating step and case indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub path: Vec<usize>,
    pub reason: Reason,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {:?}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// What rewriting steps may cite.
pub struct Ctx<'a> {
    pub theory: &'a Theory,
    pub lemmas: &'a IndexMap<String, Formula>,
}

/// One-way matching where only `schematic` variables of the pattern bind;
/// every other variable must occur literally in the subject.
pub fn match_schematic(pat: &Term, subj: &Term, schematic: &[(Ident, Sort)], s: &mut Subst) -> bool {
    match pat {
        Term::Var { name, sort } if schematic.iter().any(|(n, so)| n == name && so == sort) => {
            match s.get(name) {
                Some(b) => b == subj,
                None => {
                    if let Term::Var { sort: ss, .. } = subj {
                        if ss != sort {
                            return false;
                        }
                    }
                    s.insert(name.clone(), subj.clone());
                    true
                }
            }
        }
        Term::Var { .. } => pat == subj,
        Term::App { sym, args } => match subj {
            Term::App { sym: s2, args: a2 } if sym == s2 && args.len() == a2.len() => {
                args.iter().zip(a2).all(|(p, t)| match_schematic(p, t, schematic, s))
            }
            _ => false,
        },
    }
}

/// An equational or atomic rule with its schematic variables.
pub struct Rule<'r> {
    pub vars: &'r [(Ident, Sort)],
    pub lhs: Term,
    /// `None` for an atomic rule, which rewrites its instance to `true`.
    pub rhs: Option<Term>,
}

impl Rule<'_> {
    pub fn sides(&self, dir: Dir) -> Option<(Term, Term)> {
        match (&self.rhs, dir) {
            (Some(r), Dir::Fwd) => Some((self.lhs.clone(), r.clone())),
            (Some(r), Dir::Bwd) => Some((r.clone(), self.lhs.clone())),
            (None, Dir::Fwd) => Some((self.lhs.clone(), Term::constant(crate::kernel::TRUE))),
            (None, Dir::Bwd) => None,
        }
    }
}

pub fn rule_of_formula(f: &Formula) -> Option<Rule<'_>> {
    match &f.body {
        Prop::Eq(l, r) => Some(Rule {
            vars: &f.vars,
            lhs: l.clone(),
            rhs: Some(r.clone()),
        }),
        Prop::Atom(t) => Some(Rule {
            vars: &f.vars,
            lhs: t.clone(),
            rhs: None,
        }),
        _ => None,
    }
}

fn check_subst(
    sig: &Signature,
    goal: &Goal,
    target: Target,
    vars: &[(Ident, Sort)],
    src: &Term,
    dst: &Term,
    s: &Subst,
) -> Result<(), Reason> {
    let mut needed = Vec::new();
    src.collect_vars(&mut needed);
    dst.collect_vars(&mut needed);
    let needed: BTreeSet<&Ident> = needed
        .iter()
        .filter(|(n, so)| vars.iter().any(|(m, s2)| m == n && s2 == so))
        .map(|(n, _)| n)
        .collect();
    let domain: BTreeSet<&Ident> = s.iter().map(|(n, _)| n).collect();
    if needed != domain {
        return Err(Reason::BadSubst("domain differs from the rule's variables".into()));
    }
    let binder: &[(Ident, Sort)] = match target {
        Target::Concl => &[],
        Target::Hyp(i) => &goal.hyps[i].vars,
    };
    for (n, t) in s.iter() {
        let want = &vars.iter().find(|(m, _)| m == n).unwrap().1;
        let got = sig.sort_of(t).map_err(|e| Reason::Sort(e.to_string()))?;
        if &got != want {
            return Err(Reason::BadSubst(format!("`{n}` needs sort {want}")));
        }
        for (v, vs) in t.vars() {
            let in_scope = goal.fixed.iter().chain(binder).any(|(m, ms)| *m == v && *ms == vs);
            if !in_scope {
                return Err(Reason::BadSubst(format!("`{v}` is not in scope")));
            }
        }
    }
    Ok(())
}

fn target_prop(goal: &Goal, t: Target) -> Result<&Prop, Reason> {
    match t {
        Target::Concl => Ok(&goal.concl),
        Target::Hyp(i) => goal.hyps.get(i).map(|h| &h.body).ok_or(Reason::NoSuchHyp(i)),
    }
}

fn with_target(goal: &Goal, t: Target, p: Prop) -> Goal {
    let mut g = goal.clone();
    match t {
        Target::Concl => g.concl = p,
        Target::Hyp(i) => g.hyps[i].body = p,
    }
    g
}

#[allow(clippy::too_many_arguments)]
fn rewrite(
    sig: &Signature,
    goal: &Goal,
    target: Target,
    rule: &Rule,
    at: &[usize],
    dir: Dir,
    s: &Subst,
) -> Result<(Goal, Term), Reason> {
    let (src, dst) = rule.sides(dir).ok_or(Reason::NotARule)?;
    check_subst(sig, goal, target, rule.vars, &src, &dst, s)?;
    let prop = target_prop(goal, target)?;
    let subject = prop.term_at(at).map_err(|_| Reason::BadPosition)?;
    let inst = s.apply(&src);
    if &inst != subject {
        return Err(Reason::NoMatch(subject.clone()));
    }
    let out = s.apply(&dst);
    let p = prop
        .replace_term_at(sig, at, out)
        .map_err(|e| Reason::Sort(e.to_string()))?;
    Ok((with_target(goal, target, p), inst))
}

/// Applies one non-induction step.
pub fn apply_step(ctx: &Ctx, goal: &Goal, step: &Step) -> Result<Goal, Reason> {
    let sig = &ctx.theory.sig;
    match step {
        Step::Refl => match &goal.concl {
            Prop::Eq(l, r) if l == r => Ok(Goal {
                concl: Prop::t(),
                ..goal.clone()
            }),
            _ => Err(Reason::NotRefl),
        },
        Step::Intro => match &goal.concl {
            Prop::Implies(hs, c) => {
                let mut g = goal.clone();
                for h in hs {
                    match h {
                        Prop::And(ps) => g.hyps.extend(ps.iter().map(|p| Formula::new(vec![], p.clone()))),
                        h => g.hyps.push(Formula::new(vec![], h.clone())),
                    }
                }
                g.concl = (**c).clone();
                Ok(g)
            }
            _ => Err(Reason::NoIntro),
        },
        Step::SplitHyp { hyp } => {
            let h = goal.hyps.get(*hyp).ok_or(Reason::NoSuchHyp(*hyp))?;
            let Prop::And(ps) = &h.body else {
                return Err(Reason::NotConj);
            };
            let parts = ps.iter().map(|p| {
                let vars = h.vars.iter().filter(|(n, _)| p.contains_var(n)).cloned().collect();
                Formula::new(vars, p.clone())
            });
            let mut g = goal.clone();
            g.hyps.splice(*hyp..*hyp + 1, parts);
            Ok(g)
        }
        Step::RewriteDef {
            target,
            fun,
            eq,
            at,
            dir,
            subst,
        } => {
            let def = ctx
                .theory
                .function(fun)
                .ok_or_else(|| Reason::UnknownEquation(fun.clone(), *eq))?;
            let e = def
                .equations
                .get(*eq)
                .ok_or_else(|| Reason::UnknownEquation(fun.clone(), *eq))?;
            let vars = e.lhs.vars();
            let rule = Rule {
                vars: &vars,
                lhs: e.lhs.clone(),
                rhs: Some(e.rhs.clone()),
            };
            let (g, _) = rewrite(sig, goal, *target, &rule, at, *dir, subst)?;
            let redex = subst.apply(&e.lhs);
            if def.equations[..*eq].iter().any(|p| Term::may_match(sig, &p.lhs, &redex)) {
                return Err(Reason::FirstMatch(redex));
            }
            Ok(g)
        }
        Step::RewriteLemma {
            target,
            lemma,
            at,
            dir,
            subst,
        } => {
            let f = ctx.lemmas.get(lemma).ok_or_else(|| Reason::UnknownLemma(lemma.clone()))?;
            let rule = rule_of_formula(f).ok_or(Reason::NotARule)?;
            Ok(rewrite(sig, goal, *target, &rule, at, *dir, subst)?.0)
        }
        Step::UseHyp { hyp, at, dir, subst } => {
            let h = goal.hyps.get(*hyp).ok_or(Reason::NoSuchHyp(*hyp))?;
            let rule = rule_of_formula(h).ok_or(Reason::NotARule)?;
            Ok(rewrite(sig, goal, Target::Concl, &rule, at, *dir, subst)?.0)
        }
        Step::BoolSimp { target, rule, at } => {
            let prop = target_prop(goal, *target)?;
            let node = prop.prop_at(at).map_err(|_| Reason::BadPosition)?;
            let out = bool_rewrite(sig, *rule, node).ok_or(Reason::BoolRule(rule.name()))?;
            let p = prop.replace_prop_at(at, out).map_err(|_| Reason::BadPosition)?;
            Ok(with_target(goal, *target, p))
        }
        Step::Induction { .. } => Err(Reason::Induction("not a single-goal step".into())),
    }
}

/// The result of a built-in boolean rule at a node, if it applies and
/// changes something.
pub fn bool_rewrite(sig: &Signature, rule: BoolRule, p: &Prop) -> Option<Prop> {
    let out = match (rule, p) {
        (BoolRule::EqRefl, Prop::Eq(l, r)) if l == r => Prop::t(),
        (BoolRule::CtorClash, Prop::Eq(Term::App { sym: a, .. }, Term::App { sym: b, .. }))
            if a != b && sig.is_constructor(a) && sig.is_constructor(b) =>
        {
            Prop::f()
        }
        (BoolRule::CtorInject, Prop::Eq(Term::App { sym: a, args: xs }, Term::App { sym: b, args: ys }))
            if a == b && sig.is_constructor(a) =>
        {
            let mut eqs: Vec<Prop> = xs.iter().zip(ys).map(|(x, y)| Prop::Eq(x.clone(), y.clone())).collect();
            match eqs.len() {
                0 => Prop::t(),
                1 => eqs.pop().unwrap(),
                _ => Prop::And(eqs),
            }
        }
        (BoolRule::EqTrue, Prop::Eq(l, r)) => {
            let is_true = |t: &Term| t.head() == Some(crate::kernel::TRUE) && t.args().is_empty();
            if is_true(r) && !is_true(l) {
                Prop::Atom(l.clone())
            } else if is_true(l) && !is_true(r) {
                Prop::Atom(r.clone())
            } else {
                return None;
            }
        }
        (BoolRule::And, Prop::And(ps)) => {
            let mut flat = Vec::new();
            for q in ps {
                match q {
                    Prop::And(qs) => flat.extend(qs.iter().cloned()),
                    q => flat.push(q.clone()),
                }
            }
            if flat.iter().any(Prop::is_false) {
                Prop::f()
            } else {
                flat.retain(|q| !q.is_true());
                match flat.len() {
                    0 => Prop::t(),
                    1 => flat.pop().unwrap(),
                    _ => Prop::And(flat),
                }
            }
        }
        (BoolRule::Or, Prop::Or(ps)) => {
            let mut flat = Vec::new();
            for q in ps {
                match q {
                    Prop::Or(qs) => flat.extend(qs.iter().cloned()),
                    q => flat.push(q.clone()),
                }
            }
            if flat.iter().any(Prop::is_true) {
                Prop::t()
            } else {
                flat.retain(|q| !q.is_false());
                match flat.len() {
                    0 => Prop::f(),
                    1 => flat.pop().unwrap(),
                    _ => Prop::Or(flat),
                }
            }
        }
        (BoolRule::Imp, Prop::Implies(hs, c)) => {
            let mut flat = Vec::new();
            for h in hs {
                match h {
                    Prop::And(qs) => flat.extend(qs.iter().cloned()),
                    h => flat.push(h.clone()),
                }
            }
            let mut concl = (**c).clone();
            if let Prop::Implies(hs2, c2) = concl {
                flat.extend(hs2);
                concl = *c2;
            }
            if flat.iter().any(Prop::is_false) || concl.is_true() {
                Prop::t()
            } else {
                flat.retain(|h| !h.is_true());
                if flat.is_empty() {
                    concl
                } else {
                    Prop::Implies(flat, Box::new(concl))
                }
            }
        }
        _ => return None,
    };
    (&out != p).then_some(out)
}

/// Structural induction on `var`. `fresh[i]` names the arguments of the
/// i-th constructor of its sort.
pub fn induct(sig: &Signature, goal: &Goal, var: &str, generalize: &[Ident], fresh: &[Vec<Ident>]) -> Result<Vec<Goal>, Reason> {
    let bad = |m: String| Err(Reason::Induction(m));
    let Some(sort) = goal.fixed_sort(var).cloned() else {
        return bad(format!("`{var}` is not a fixed variable"));
    };
    let ctors = sig.constructors(&sort).to_vec();
    if ctors.is_empty() {
        return bad(format!("sort {sort} is not inductive"));
    }
    if fresh.len() != ctors.len() {
        return bad("one case per constructor expected".into());
    }
    let mut gen_vars = Vec::new();
    for g in generalize {
        if &**g == var || gen_vars.iter().any(|(n, _): &(Ident, Sort)| n == g) {
            return bad(format!("cannot generalize `{g}`"));
        }
        let Some(s) = goal.fixed_sort(g) else {
            return bad(format!("`{g}` is not a fixed variable"));
        };
        if goal.hyps.iter().any(|h| h.free_vars().iter().any(|(n, _)| n == g)) {
            return bad(format!("`{g}` occurs in a hypothesis"));
        }
        gen_vars.push((g.clone(), s.clone()));
    }
    let used = goal.names();
    let mut all_fresh = BTreeSet::new();
    for names in fresh {
        for n in names {
            if used.contains(n) || !all_fresh.insert(n.clone()) || sig.get(n).is_some() {
                return bad(format!("`{n}` is not fresh"));
            }
        }
    }
    let hyps_mention = goal.hyps.iter().any(|h| h.free_vars().iter().any(|(n, _)| &**n == var));
    let mut out = Vec::new();
    for (c, names) in ctors.iter().zip(fresh) {
        let args = &sig.get(c).unwrap().args;
        if names.len() != args.len() {
            return bad(format!("`{c}` takes {} arguments", args.len()));
        }
        let new_vars: Vec<Term> = names.iter().zip(args).map(|(n, s)| Term::var(n, s)).collect();
        let mut s = Subst::new();
        s.insert(Ident::from(var), Term::app(c, new_vars.clone()));
        let mut fixed: Vec<(Ident, Sort)> = goal.fixed.iter().filter(|(n, _)| &**n != var).cloned().collect();
        fixed.extend(names.iter().cloned().zip(args.iter().cloned()));
        let mut hyps: Vec<Formula> = goal.hyps.iter().map(|h| h.substitute_free(&s)).collect();
        if !hyps_mention {
            for (v, a) in new_vars.iter().zip(args) {
                if a == &sort {
                    let mut ih = Subst::new();
                    ih.insert(Ident::from(var), v.clone());
                    hyps.push(Formula::new(gen_vars.clone(), goal.concl.substitute(&ih)));
                }
            }
        }
        out.push(Goal {
            fixed,
            hyps,
            concl: goal.concl.substitute(&s),
        });
    }
    Ok(out)
}

fn replay(ctx: &Ctx, mut goal: Goal, steps: &[Step], path: &mut Vec<usize>) -> Result<(), Rejection> {
    let reject = |path: &Vec<usize>, i: usize, reason| {
        let mut p = path.clone();
        p.push(i);
        Err(Rejection { path: p, reason })
    };
    for (i, step) in steps.iter().enumerate() {
        if goal.is_closed() {
            return reject(path, i, Reason::AlreadyClosed);
        }
        if let Step::Induction {
            var,
            generalize,
            cases,
        } = step
        {
            if i + 1 != steps.len() {
                return reject(path, i, Reason::StepsAfterInduction);
            }
            let Some(sort) = goal.fixed_sort(var) else {
                return reject(path, i, Reason::Induction(format!("`{var}` is not fixed")));
            };
            let ctors = ctx.theory.sig.constructors(sort);
            if cases.len() != ctors.len() || cases.iter().zip(ctors).any(|(c, k)| &c.ctor != k) {
                return reject(path, i, Reason::Induction("cases must follow constructor order".into()));
            }
            let fresh: Vec<Vec<Ident>> = cases.iter().map(|c| c.fresh.clone()).collect();
            let subgoals = match induct(&ctx.theory.sig, &goal, var, generalize, &fresh) {
                Ok(g) => g,
                Err(r) => return reject(path, i, r),
            };
            for (ci, (case, sub)) in cases.iter().zip(subgoals).enumerate() {
                path.push(i);
                path.push(ci);
                replay(ctx, sub, &case.proof, path)?;
                path.pop();
                path.pop();
            }
            return Ok(());
        }
        goal = match apply_step(ctx, &goal, step) {
            Ok(g) => g,
            Err(r) => return reject(path, i, r),
        };
    }
    if goal.is_closed() {
        Ok(())
    } else {
        reject(path, steps.len(), Reason::OpenBranch)
    }
}

/// Replays a script against the theory and the already accepted lemmas.
pub fn check(theory: &Theory, lemmas: &IndexMap<String, Formula>, s: &ProofScript) -> Verdict {
    if let Err(e) = theory.sig.check_formula(&s.statement) {
        return Verdict::Rejected(Rejection {
            path: vec![],
            reason: Reason::Statement(e.to_string()),
        });
    }
    let ctx = Ctx { theory, lemmas };
    match replay(&ctx, Goal::from_formula(&s.statement), &s.proof, &mut Vec::new()) {
        Ok(()) => Verdict::Accepted,
        Err(r) => Verdict::Rejected(r),
    }
}

/// Checks scripts in order; only accepted ones become citable.
pub fn check_bundle(theory: &Theory, scripts: &[ProofScript]) -> Vec<Verdict> {
    let mut lemmas = IndexMap::new();
    let mut out = Vec::new();
    for s in scripts {
        let v = check(theory, &lemmas, s);
        if v.is_accepted() {
            lemmas.insert(s.name.clone(), s.statement.clone());
        }
        out.push(v);
    }
    out
}

// ---------------------------------------------------------------------------
// Text format

fn write_path(out: &mut String, at: &[usize]) {
    out.push('(');
    for (i, p) in at.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{p}").unwrap();
    }
    out.push(')');
}

fn write_target(out: &mut String, t: Target) {
    match t {
        Target::Concl => out.push_str("concl"),
        Target::Hyp(i) => write!(out, "(in_hyp {i})").unwrap(),
    }
}

fn write_subst(out: &mut String, sig: &Signature, s: &Subst) {
    out.push('(');
    for (i, (n, t)) in s.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let sort = sig.sort_of(t).map(|s| s.to_string()).unwrap_or_else(|_| "?".into());
        write!(out, "({n} {sort} {t})").unwrap();
    }
    out.push(')');
}

fn write_dir(out: &mut String, d: Dir) {
    out.push_str(match d {
        Dir::Fwd => "->",
        Dir::Bwd => "<-",
    });
}

fn write_steps(out: &mut String, sig: &Signature, steps: &[Step], indent: usize) {
    for s in steps {
        out.push('\n');
        out.push_str(&" ".repeat(indent));
        match s {
            Step::Refl => out.push_str("(refl)"),
            Step::Intro => out.push_str("(intro)"),
            Step::SplitHyp { hyp } => write!(out, "(split_hyp {hyp})").unwrap(),
            Step::RewriteDef {
                target,
                fun,
                eq,
                at,
                dir,
                subst,
            } => {
                out.push_str("(def ");
                write_target(out, *target);
                write!(out, " {fun} {eq} ").unwrap();
                write_path(out, at);
                out.push(' ');
                write_dir(out, *dir);
                out.push(' ');
                write_subst(out, sig, subst);
                out.push(')');
            }
            Step::RewriteLemma {
                target,
                lemma,
                at,
                dir,
                subst,
            } => {
                out.push_str("(rw ");
                write_target(out, *target);
                write!(out, " {lemma} ").unwrap();
                write_path(out, at);
                out.push(' ');
                write_dir(out, *dir);
                out.push(' ');
                write_subst(out, sig, subst);
                out.push(')');
            }
            Step::UseHyp { hyp, at, dir, subst } => {
                write!(out, "(hyp {hyp} ").unwrap();
                write_path(out, at);
                out.push(' ');
                write_dir(out, *dir);
                out.push(' ');
                write_subst(out, sig, subst);
                out.push(')');
            }
            Step::BoolSimp { target, rule, at } => {
                out.push_str("(bool ");
                write_target(out, *target);
                write!(out, " {} ", rule.name()).unwrap();
                write_path(out, at);
                out.push(')');
            }
            Step::Induction {
                var,
                generalize,
                cases,
            } => {
                let gen: Vec<&str> = generalize.iter().map(|g| &**g).collect();
                write!(out, "(induct {var} ({})", gen.join(" ")).unwrap();
                for c in cases {
                    out.push('\n');
                    out.push_str(&" ".repeat(indent + 2));
                    let fresh: Vec<&str> = c.fresh.iter().map(|g| &**g).collect();
                    write!(out, "(case {} ({})", c.ctor, fresh.join(" ")).unwrap();
                    write_steps(out, sig, &c.proof, indent + 4);
                    out.push(')');
                }
                out.push(')');
            }
        }
    }
}

/// Prints one script in the bundle format.
pub fn print_script(sig: &Signature, s: &ProofScript) -> String {
    let mut out = format!("(lemma {}\n  {}\n  (proof", s.name, s.statement);
    write_steps(&mut out, sig, &s.proof, 4);
    out.push_str("))\n");
    out
}

pub fn print_bundle(sig: &Signature, scripts: &[ProofScript]) -> String {
    scripts.iter().map(|s| print_script(sig, s)).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: {message}")]
pub struct FormatError {
    pub loc: Loc,
    pub message: String,
}

impl From<Diagnostic> for FormatError {
    fn from(d: Diagnostic) -> Self {
        FormatError {
            loc: d.loc,
            message: d.message,
        }
    }
}

fn ferr<T>(e: &SExpr, m: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        loc: e.loc(),
        message: m.into(),
    })
}

fn atom<'e>(e: &'e SExpr, what: &str) -> Result<&'e str, FormatError> {
    e.as_atom().map_or_else(|| ferr(e, format!("expected {what}")), Ok)
}

fn num(e: &SExpr) -> Result<usize, FormatError> {
    atom(e, "a number")?.parse().or_else(|_| ferr(e, "expected a number"))
}

fn path_of(e: &SExpr) -> Result<Vec<usize>, FormatError> {
    e.as_list()
        .map_or_else(|| ferr(e, "expected a position list"), Ok)?
        .iter()
        .map(num)
        .collect()
}

fn target_of(e: &SExpr) -> Result<Target, FormatError> {
    if e.as_atom() == Some("concl") {
        return Ok(Target::Concl);
    }
    match e.tagged("in_hyp") {
        Some([i]) => Ok(Target::Hyp(num(i)?)),
        _ => ferr(e, "expected `concl` or `(in_hyp I)`"),
    }
}

fn dir_of(e: &SExpr) -> Result<Dir, FormatError> {
    match e.as_atom() {
        Some("->") => Ok(Dir::Fwd),
        Some("<-") => Ok(Dir::Bwd),
        _ => ferr(e, "expected `->` or `<-`"),
    }
}

fn subst_of(sig: &Signature, e: &SExpr) -> Result<Subst, FormatError> {
    let Some(items) = e.as_list() else {
        return ferr(e, "expected a substitution list");
    };
    let mut s = Subst::new();
    for it in items {
        let Some([n, so, t]) = it.as_list() else {
            return ferr(it, "expected `(VAR SORT TERM)`");
        };
        let sort = Sort::new(atom(so, "a sort")?);
        if !sig.sorts.contains_key(&sort) {
            return ferr(so, format!("unknown sort `{sort}`"));
        }
        let term = parse_term_inferred(sig, t, &sort)?;
        if s.insert(Ident::from(atom(n, "a variable")?), term).is_some() {
            return ferr(n, "variable bound twice");
        }
    }
    Ok(s)
}

fn names_of(e: &SExpr) -> Result<Vec<Ident>, FormatError> {
    e.as_list()
        .map_or_else(|| ferr(e, "expected a name list"), Ok)?
        .iter()
        .map(|x| atom(x, "a name").map(Ident::from))
        .collect()
}

fn step_of(sig: &Signature, e: &SExpr) -> Result<Step, FormatError> {
    let Some([head, args @ ..]) = e.as_list() else {
        return ferr(e, "expected a step");
    };
    let step = match (atom(head, "a step keyword")?, args) {
        ("refl", []) => Step::Refl,
        ("intro", []) => Step::Intro,
        ("split_hyp", [i]) => Step::SplitHyp { hyp: num(i)? },
        ("def", [t, f, i, at, d, s]) => Step::RewriteDef {
            target: target_of(t)?,
            fun: Ident::from(atom(f, "a function")?),
            eq: num(i)?,
            at: path_of(at)?,
            dir: dir_of(d)?,
            subst: subst_of(sig, s)?,
        },
        ("rw", [t, l, at, d, s]) => Step::RewriteLemma {
            target: target_of(t)?,
            lemma: atom(l, "a lemma name")?.to_string(),
            at: path_of(at)?,
            dir: dir_of(d)?,
            subst: subst_of(sig, s)?,
        },
        ("hyp", [i, at, d, s]) => Step::UseHyp {
            hyp: num(i)?,
            at: path_of(at)?,
            dir: dir_of(d)?,
            subst: subst_of(sig, s)?,
        },
        ("bool", [t, r, at]) => Step::BoolSimp {
            target: target_of(t)?,
            rule: BoolRule::from_name(atom(r, "a rule")?).map_or_else(|| ferr(r, "unknown rule"), Ok)?,
            at: path_of(at)?,
        },
        ("induct", [v, gen, cases @ ..]) => Step::Induction {
            var: Ident::from(atom(v, "a variable")?),
            generalize: names_of(gen)?,
            cases: cases
                .iter()
                .map(|c| {
                    let Some([ctor, fresh, steps @ ..]) = c.tagged("case") else {
                        return ferr(c, "expected `(case CTOR (FRESH*) STEP*)`");
                    };
                    Ok(Case {
                        ctor: Ident::from(atom(ctor, "a constructor")?),
                        fresh: names_of(fresh)?,
                        proof: steps.iter().map(|s| step_of(sig, s)).collect::<Result<_, _>>()?,
                    })
                })
                .collect::<Result<_, _>>()?,
        },
        (k, _) => return ferr(e, format!("malformed `{k}` step")),
    };
    Ok(step)
}

/// Parses a bundle written by [`print_bundle`].
pub fn parse_bundle(theory: &Theory, text: &str) -> Result<Vec<ProofScript>, FormatError> {
    let forms = read_all(text).map_err(|e| FormatError {
        loc: e.loc(),
        message: e.to_string(),
    })?;
    let sig = &theory.sig;
    forms
        .iter()
        .map(|f| {
            let Some([name, stmt, proof]) = f.tagged("lemma") else {
                return ferr(f, "expected `(lemma NAME FORMULA (proof STEP*))`");
            };
            let Some(steps) = proof.tagged("proof") else {
                return ferr(proof, "expected `(proof STEP*)`");
            };
            Ok(ProofScript {
                name: atom(name, "a lemma name")?.to_string(),
                statement: parse_formula_sexpr(sig, stmt)?,
                proof: steps.iter().map(|s| step_of(sig, s)).collect::<Result<_, _>>()?,
            })
        })
        .collect()
}
