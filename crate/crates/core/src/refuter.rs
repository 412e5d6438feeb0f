//! Counterexample search by bounded-exhaustive and seeded random testing.

use crate::conjecture::{Conjecture, Status};
use crate::evaluator::{cartesian, compositions, EvalError, Evaluator, Value, ValueEnumerator};
use crate::frontend::Theory;
use crate::kernel::{Formula, Ident, Prop, Signature, Sort, Subst, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// How long each testing phase may run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    /// Total evaluator steps per phase: (exhaustive, random).
    Steps(u64, u64),
    /// Wall-clock milliseconds per phase: (exhaustive, random).
    WallMs(u64, u64),
}

#[derive(Clone, Debug)]
pub struct RefutationBudget {
    /// Largest total node count of an exhaustively tested assignment.
    pub exhaustive_size: usize,
    pub max_tests: usize,
    pub random_tests: usize,
    /// Evaluator steps allowed for a single instance.
    pub fuel_per_test: u64,
    pub limit: Limit,
}

impl Default for RefutationBudget {
    fn default() -> Self {
        RefutationBudget {
            exhaustive_size: 6,
            max_tests: 10_000,
            random_tests: 500,
            fuel_per_test: 20_000,
            limit: Limit::WallMs(1000, 2000),
        }
    }
}

impl RefutationBudget {
    /// Same shape with a step budget in place of the clock.
    pub fn deterministic() -> Self {
        RefutationBudget {
            limit: Limit::Steps(2_000_000, 4_000_000),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    CounterexampleFound(Subst),
    Survived {
        tests: usize,
        stuck: usize,
        /// Every instance tried got stuck.
        vacuous: bool,
    },
}

impl Verdict {
    pub fn witness(&self) -> Option<&Subst> {
        match self {
            Verdict::CounterexampleFound(w) => Some(w),
            Verdict::Survived { .. } => None,
        }
    }
}

enum Outcome {
    Holds,
    Fails,
    Stuck,
}

struct Session<'a> {
    ev: Evaluator<'a>,
    fuel_per_test: u64,
    steps_used: u64,
    tests: usize,
    stuck: usize,
}

impl Session<'_> {
    fn run(&mut self, body: &Prop, a: &Subst) -> Outcome {
        self.ev.refuel(self.fuel_per_test);
        let r = self.ev.eval_instance(body, a);
        self.steps_used += self.fuel_per_test - self.ev.fuel_left();
        self.tests += 1;
        match r {
            Ok(true) => Outcome::Holds,
            Ok(false) => Outcome::Fails,
            Err(EvalError::Stuck(_) | EvalError::OutOfFuel | EvalError::NotGround(_)) => {
                self.stuck += 1;
                Outcome::Stuck
            }
        }
    }

    fn hyps_hold(&mut self, hyps: &[Prop], a: &Subst) -> bool {
        self.ev.refuel(self.fuel_per_test);
        let ok = hyps.iter().all(|h| matches!(self.ev.eval_instance(h, a), Ok(true)));
        self.steps_used += self.fuel_per_test - self.ev.fuel_left();
        ok
    }
}

struct Clock {
    start: Instant,
    steps0: u64,
}

impl Clock {
    fn exceeded(&self, limit: u64, steps_mode: bool, s: &Session) -> bool {
        if steps_mode {
            s.steps_used - self.steps0 >= limit
        } else {
            self.start.elapsed() >= Duration::from_millis(limit)
        }
    }
}

/// Tries to falsify `f`. Every returned witness has been re-evaluated to
/// false by a fresh evaluator.
pub fn refute(theory: &Theory, f: &Formula, b: &RefutationBudget, seed: u64) -> Verdict {
    let mut s = Session {
        ev: Evaluator::new(theory),
        fuel_per_test: b.fuel_per_test,
        steps_used: 0,
        tests: 0,
        stuck: 0,
    };
    let (steps_mode, l_exh, l_rand) = match b.limit {
        Limit::Steps(a, r) => (true, a, r),
        Limit::WallMs(a, r) => (false, a, r),
    };
    let mut en = ValueEnumerator::new(&theory.sig);

    let found = exhaustive(&mut s, &mut en, f, b, steps_mode, l_exh)
        .or_else(|| random_phase(&mut s, theory, f, b, seed, steps_mode, l_rand));

    if let Some(w) = found {
        let w = shrink(&mut s, &mut en, f, w);
        let recheck = Evaluator::with_fuel(theory, b.fuel_per_test).eval_instance(&f.body, &w);
        assert_eq!(recheck, Ok(false), "refuter witness failed re-verification");
        return Verdict::CounterexampleFound(w);
    }
    let vacuous = s.tests > 0 && s.stuck == s.tests;
    Verdict::Survived {
        tests: s.tests,
        stuck: s.stuck,
        vacuous,
    }
}

fn assignment(vars: &[(Ident, Sort)], vals: Vec<Value>) -> Subst {
    vars.iter().map(|(n, _)| n.clone()).zip(vals).collect()
}

fn exhaustive(
    s: &mut Session,
    en: &mut ValueEnumerator,
    f: &Formula,
    b: &RefutationBudget,
    steps_mode: bool,
    limit: u64,
) -> Option<Subst> {
    let clock = Clock {
        start: Instant::now(),
        steps0: s.steps_used,
    };
    let n = f.vars.len();
    if n == 0 {
        return match s.run(&f.body, &Subst::new()) {
            Outcome::Fails => Some(Subst::new()),
            _ => None,
        };
    }
    let mut tried = 0;
    for total in n..=b.exhaustive_size {
        for split in compositions(total, n) {
            let per: Vec<Vec<Value>> = f
                .vars
                .iter()
                .zip(&split)
                .map(|((_, sort), &k)| en.of_size(sort, k))
                .collect();
            if per.iter().any(|v| v.is_empty()) {
                continue;
            }
            for vals in cartesian(&per) {
                if tried >= b.max_tests || clock.exceeded(limit, steps_mode, s) {
                    return None;
                }
                tried += 1;
                let a = assignment(&f.vars, vals);
                if let Outcome::Fails = s.run(&f.body, &a) {
                    return Some(a);
                }
            }
        }
    }
    None
}

/// Uniform sampling of constructor values of a given size.
pub struct Sampler<'a> {
    sig: &'a Signature,
    counts: HashMap<(Sort, usize), u128>,
}

impl<'a> Sampler<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        Sampler {
            sig,
            counts: HashMap::new(),
        }
    }

    /// Number of values of `sort` with exactly `size` nodes, saturating.
    pub fn count(&mut self, sort: &Sort, size: usize) -> u128 {
        if size == 0 {
            return 0;
        }
        if let Some(&c) = self.counts.get(&(sort.clone(), size)) {
            return c;
        }
        let mut total: u128 = 0;
        for c in self.sig.constructors(sort).to_vec() {
            total = total.saturating_add(self.count_ctor(&c, size));
        }
        self.counts.insert((sort.clone(), size), total);
        total
    }

    fn count_ctor(&mut self, c: &str, size: usize) -> u128 {
        let args = self.sig.get(c).unwrap().args.clone();
        if args.is_empty() {
            return u128::from(size == 1);
        }
        if size < 1 + args.len() {
            return 0;
        }
        let mut total: u128 = 0;
        for split in compositions(size - 1, args.len()) {
            total = total.saturating_add(self.count_split(&args, &split));
        }
        total
    }

    fn count_split(&mut self, args: &[Sort], split: &[usize]) -> u128 {
        args.iter()
            .zip(split)
            .map(|(s, &k)| self.count(s, k))
            .fold(1u128, |a, x| a.saturating_mul(x))
    }

    pub fn sample(&mut self, sort: &Sort, size: usize, rng: &mut impl Rng) -> Option<Value> {
        let total = self.count(sort, size);
        if total == 0 {
            return None;
        }
        let mut pick = rng.gen_range(0..total);
        for c in self.sig.constructors(sort).to_vec() {
            let args = self.sig.get(&c).unwrap().args.clone();
            if args.is_empty() {
                if size == 1 {
                    if pick == 0 {
                        return Some(Term::constant(&c));
                    }
                    pick -= 1;
                }
                continue;
            }
            if size < 1 + args.len() {
                continue;
            }
            for split in compositions(size - 1, args.len()) {
                let n = self.count_split(&args, &split);
                if pick < n {
                    let vals = args
                        .iter()
                        .zip(&split)
                        .map(|(s, &k)| self.sample(s, k, rng))
                        .collect::<Option<Vec<_>>>()?;
                    return Some(Term::app(&c, vals));
                }
                pick -= n;
            }
        }
        None
    }
}

fn random_phase(
    s: &mut Session,
    theory: &Theory,
    f: &Formula,
    b: &RefutationBudget,
    seed: u64,
    steps_mode: bool,
    limit: u64,
) -> Option<Subst> {
    if f.vars.is_empty() {
        return None;
    }
    let clock = Clock {
        start: Instant::now(),
        steps0: s.steps_used,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampler = Sampler::new(&theory.sig);
    let max = 3 * b.exhaustive_size;
    let sizes: Vec<Vec<usize>> = f
        .vars
        .iter()
        .map(|(_, sort)| (1..=max).filter(|&k| sampler.count(sort, k) > 0).collect())
        .collect();
    if sizes.iter().any(|v| v.is_empty()) {
        return None;
    }
    let hyps: &[Prop] = match &f.body {
        Prop::Implies(h, _) => h,
        _ => &[],
    };
    for _ in 0..b.random_tests {
        if clock.exceeded(limit, steps_mode, s) {
            return None;
        }
        let mut draw = |rng: &mut ChaCha8Rng| {
            let vals = f
                .vars
                .iter()
                .zip(&sizes)
                .map(|((_, sort), ks)| {
                    let k = ks[rng.gen_range(0..ks.len())];
                    sampler.sample(sort, k, rng).unwrap()
                })
                .collect();
            assignment(&f.vars, vals)
        };
        let mut a = draw(&mut rng);
        if !hyps.is_empty() {
            let mut rejections = 0;
            while !s.hyps_hold(hyps, &a) && rejections < 50 {
                rejections += 1;
                a = draw(&mut rng);
            }
        }
        if let Outcome::Fails = s.run(&f.body, &a) {
            return Some(a);
        }
    }
    None
}

/// Replaces each value by the first smaller one that still falsifies,
/// until nothing changes.
fn shrink(s: &mut Session, en: &mut ValueEnumerator, f: &Formula, mut w: Subst) -> Subst {
    let mut changed = true;
    while changed {
        changed = false;
        for (name, sort) in &f.vars {
            let cur = w.get(name).unwrap().size();
            for cand in en.up_to(sort, cur.saturating_sub(1)) {
                let mut w2 = w.clone();
                w2.insert(name.clone(), cand);
                if let Outcome::Fails = s.run(&f.body, &w2) {
                    w = w2;
                    changed = true;
                    break;
                }
            }
        }
    }
    w
}

/// Refutes every pending conjecture, in order, with per-conjecture seeds
/// derived from `seed`. Returns the survivors flagged vacuous.
pub fn refute_all(theory: &Theory, conjs: &mut [Conjecture], b: &RefutationBudget, seed: u64) -> Vec<usize> {
    let mut vacuous = Vec::new();
    for c in conjs.iter_mut().filter(|c| c.status == Status::Pending) {
        let sub_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c.id as u64);
        match refute(theory, &c.statement, b, sub_seed) {
            Verdict::CounterexampleFound(w) => c.status = Status::Refuted(w),
            Verdict::Survived { vacuous: true, .. } => vacuous.push(c.id),
            Verdict::Survived { .. } => {}
        }
    }
    vacuous
}
