use super::hammer::{hammer, HammerLimits};
use super::induct::{induct_goal, old_smart_induct, smart_induct};
use super::simp::simp;
use super::state::ProofState;
use super::{Budget, ProverConfig};
use crate::checker::Ctx;
use std::fmt;
use std::iter;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepeatCount {
    Fixed(usize),
    /// As many times as there are goals when the combinator starts.
    GoalCount,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Ors(Vec<Strategy>),
    Thens(Vec<Strategy>),
    PThenOne(Box<Strategy>, Box<Strategy>),
    Repeat(Box<Strategy>),
    RepeatN(RepeatCount, Box<Strategy>),
    /// Inside `Thens`, runs the remaining elements on the first goal only.
    Subgoal,
    IsSolved,
    Auto,
    Clarsimp,
    Fastforce,
    Hammer,
    SmartInduct,
    OldSmartInduct,
}

use Strategy::*;

fn thens(v: Vec<Strategy>) -> Strategy {
    Thens(v)
}

fn pthen(a: Strategy, b: Strategy) -> Strategy {
    PThenOne(Box::new(a), Box::new(b))
}

fn repeat(s: Strategy) -> Strategy {
    Repeat(Box::new(s))
}

impl Strategy {
    /// The default strategy, combinator for combinator.
    pub fn tbc() -> Strategy {
        Ors(vec![
            thens(vec![Auto, IsSolved]),
            pthen(SmartInduct, thens(vec![Auto, IsSolved])),
            thens(vec![Hammer, IsSolved]),
            pthen(
                SmartInduct,
                Ors(vec![thens(vec![
                    repeat(Ors(vec![
                        Fastforce,
                        Hammer,
                        thens(vec![Clarsimp, IsSolved]),
                        thens(vec![
                            Subgoal,
                            Clarsimp,
                            repeat(thens(vec![
                                Subgoal,
                                Ors(vec![
                                    thens(vec![Auto, IsSolved]),
                                    thens(vec![SmartInduct, Auto, IsSolved]),
                                ]),
                            ])),
                            IsSolved,
                        ]),
                    ])),
                    IsSolved,
                ])]),
            ),
        ])
    }

    /// The baseline strategy.
    pub fn tap21() -> Strategy {
        let auto_solve = || thens(vec![Auto, IsSolved]);
        Ors(vec![
            auto_solve(),
            pthen(OldSmartInduct, auto_solve()),
            pthen(
                OldSmartInduct,
                thens(vec![Auto, RepeatN(RepeatCount::GoalCount, Box::new(Hammer)), IsSolved]),
            ),
        ])
    }

    pub fn by_name(name: &str) -> Option<Strategy> {
        match name {
            "tbc" => Some(Strategy::tbc()),
            "tap21" => Some(Strategy::tap21()),
            _ => None,
        }
    }

    /// Combinator lists are non-empty and repeat counts positive.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Ors(v) | Thens(v) => {
                if v.is_empty() {
                    return Err("empty combinator list".into());
                }
                v.iter().try_for_each(Strategy::validate)
            }
            PThenOne(a, b) => {
                a.validate()?;
                b.validate()
            }
            Repeat(s) => s.validate(),
            RepeatN(RepeatCount::Fixed(0), _) => Err("RepeatN needs a positive count".into()),
            RepeatN(_, s) => s.validate(),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[Strategy]| {
            write!(f, "{name} [")?;
            for (i, s) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{s}")?;
            }
            write!(f, "]")
        };
        match self {
            Ors(v) => list(f, "Ors", v),
            Thens(v) => list(f, "Thens", v),
            PThenOne(a, b) => write!(f, "PThenOne [{a}, {b}]"),
            Repeat(s) => write!(f, "Repeat ({s})"),
            RepeatN(RepeatCount::Fixed(n), s) => write!(f, "RepeatN {n} ({s})"),
            RepeatN(RepeatCount::GoalCount, s) => write!(f, "RepeatN ({s})"),
            Subgoal => write!(f, "Subgoal"),
            IsSolved => write!(f, "IsSolved"),
            Auto => write!(f, "Auto"),
            Clarsimp => write!(f, "Clarsimp"),
            Fastforce => write!(f, "Fastforce"),
            Hammer => write!(f, "Hammer"),
            SmartInduct => write!(f, "Smart_Induct"),
            OldSmartInduct => write!(f, "Old_Smart_Induct"),
        }
    }
}

/// What a strategy run can see.
pub struct Env<'a> {
    pub ctx: Ctx<'a>,
    pub cfg: ProverConfig,
    pub budget: Budget,
}

type Stream<'a> = Box<dyn Iterator<Item = ProofState> + 'a>;

fn none<'a>() -> Stream<'a> {
    Box::new(iter::empty())
}

fn one<'a>(st: ProofState) -> Stream<'a> {
    Box::new(iter::once(st))
}

fn auto(env: &Env, st: &ProofState) -> Option<ProofState> {
    let mut out = st.clone();
    let mut progress = false;
    // goals shrink as they close, so walk from the back
    for i in (0..st.goals.len()).rev() {
        if !env.budget.spend(1) {
            return None;
        }
        let r = simp(&env.ctx, &st.goals[i].goal, env.cfg.simp_steps);
        if r.progressed() {
            progress = true;
            out = out.with_steps(i, r.steps, r.goal);
        }
    }
    progress.then_some(out)
}

fn clarsimp(env: &Env, st: &ProofState) -> Option<ProofState> {
    let g = st.goals.first()?;
    if !env.budget.spend(1) {
        return None;
    }
    let r = simp(&env.ctx, &g.goal, env.cfg.simp_steps);
    r.progressed().then(|| st.with_steps(0, r.steps, r.goal))
}

fn hammer_first(env: &Env, st: &ProofState, depth: usize) -> Option<ProofState> {
    let g = st.goals.first()?;
    if !env.budget.spend(1) {
        return None;
    }
    let limits = HammerLimits {
        depth,
        nodes: env.cfg.hammer_nodes,
        simp_steps: env.cfg.simp_steps,
    };
    let steps = hammer(&env.ctx, &g.goal, limits, &env.budget)?;
    let closed = super::simp::replay(&env.ctx, &g.goal, &steps).ok()?;
    closed.is_closed().then(|| st.with_steps(0, steps, closed))
}

fn inductions<'a>(env: &'a Env<'a>, st: ProofState, old: bool) -> Stream<'a> {
    let Some(g) = st.goals.first() else {
        return none();
    };
    let th = env.ctx.theory;
    let cands = if old {
        old_smart_induct(th, &g.goal, env.cfg.induct_candidates)
    } else {
        smart_induct(th, &g.goal, env.cfg.induct_candidates)
    };
    Box::new(cands.into_iter().filter_map(move |(var, gen)| {
        if !env.budget.spend(1) {
            return None;
        }
        let cases = induct_goal(th, &st.goals[0].goal, &var, &gen).ok()?;
        Some(st.with_induction(0, var, gen, cases))
    }))
}

fn run_thens<'a>(env: &'a Env<'a>, v: &'a [Strategy], st: ProofState) -> Stream<'a> {
    match v.split_first() {
        None => one(st),
        Some((Subgoal, rest)) => {
            let Some((focused, hidden)) = st.focus() else {
                return none();
            };
            Box::new(run_thens(env, rest, focused).map(move |r| r.unfocus(hidden.clone())))
        }
        Some((first, rest)) => Box::new(run(env, first, st).flat_map(move |s| run_thens(env, rest, s))),
    }
}

fn run_repeat<'a>(env: &'a Env<'a>, s: &'a Strategy, st: ProofState) -> Stream<'a> {
    if env.budget.exhausted() {
        return none();
    }
    let mut it = run(env, s, st.clone()).peekable();
    if it.peek().is_none() {
        return one(st);
    }
    Box::new(it.flat_map(move |r| {
        if r.same_goals(&st) {
            one(r)
        } else {
            run_repeat(env, s, r)
        }
    }))
}

fn run_repeat_n<'a>(env: &'a Env<'a>, n: usize, s: &'a Strategy, st: ProofState) -> Stream<'a> {
    if n == 0 {
        return one(st);
    }
    Box::new(run(env, s, st).flat_map(move |r| run_repeat_n(env, n - 1, s, r)))
}

/// Lazily enumerates the states a strategy can reach, with backtracking.
pub fn run<'a>(env: &'a Env<'a>, s: &'a Strategy, st: ProofState) -> Stream<'a> {
    if env.budget.exhausted() {
        return none();
    }
    match s {
        Ors(v) => {
            for child in v {
                let mut it = run(env, child, st.clone());
                if let Some(first) = it.next() {
                    return Box::new(iter::once(first).chain(it));
                }
            }
            none()
        }
        Thens(v) => run_thens(env, v, st),
        PThenOne(a, b) => {
            for alt in run(env, a, st) {
                let mut it = run(env, b, alt);
                if let Some(first) = it.next() {
                    return Box::new(iter::once(first).chain(it));
                }
            }
            none()
        }
        Repeat(inner) => run_repeat(env, inner, st),
        RepeatN(count, inner) => {
            let n = match count {
                RepeatCount::Fixed(n) => *n,
                RepeatCount::GoalCount => st.goals.len(),
            };
            run_repeat_n(env, n, inner, st)
        }
        Subgoal => one(st),
        IsSolved => {
            if st.is_solved() {
                one(st)
            } else {
                none()
            }
        }
        Auto => auto(env, &st).map_or_else(none, one),
        Clarsimp => clarsimp(env, &st).map_or_else(none, one),
        Fastforce => {
            let r = clarsimp(env, &st).unwrap_or_else(|| st.clone());
            if r.goals.len() < st.goals.len() {
                return one(r);
            }
            hammer_first(env, &r, 2).map_or_else(none, one)
        }
        Hammer => hammer_first(env, &st, env.cfg.hammer_depth).map_or_else(none, one),
        SmartInduct => inductions(env, st, false),
        OldSmartInduct => inductions(env, st, true),
    }
}

/// The first fully closed state the strategy reaches, if any.
pub fn run_strategy(env: &Env, s: &Strategy, st: ProofState) -> Option<ProofState> {
    run(env, s, st).find(ProofState::is_solved)
}
