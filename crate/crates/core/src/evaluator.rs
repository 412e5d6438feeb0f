//! Ground evaluation under the theory's equations, and enumeration of
//! constructor values by size.

use crate::frontend::Theory;
use crate::kernel::{Prop, Signature, Sort, Subst, Term, TRUE};
use std::collections::HashMap;
use thiserror::Error;

/// A ground constructor term.
pub type Value = Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no equation matches `{0}`")]
    Stuck(Term),
    #[error("evaluation ran out of fuel")]
    OutOfFuel,
    #[error("term is not ground: `{0}`")]
    NotGround(Term),
}

/// One evaluation session: memo table plus a step budget. Not shared
/// between threads; make one per refutation.
pub struct Evaluator<'a> {
    theory: &'a Theory,
    memo: HashMap<Term, Result<Value, EvalError>>,
    /// Term nodes held by `memo`.
    memo_nodes: usize,
    fuel: u64,
}

/// The memo table is dropped once it holds this many term nodes.
const MEMO_NODES: usize = 1 << 20;

impl<'a> Evaluator<'a> {
    pub fn new(theory: &'a Theory) -> Self {
        Self::with_fuel(theory, u64::MAX)
    }

    pub fn with_fuel(theory: &'a Theory, fuel: u64) -> Self {
        Evaluator {
            theory,
            memo: HashMap::new(),
            memo_nodes: 0,
            fuel,
        }
    }

    pub fn fuel_left(&self) -> u64 {
        self.fuel
    }

    /// Resets the step budget, keeping the memo table.
    pub fn refuel(&mut self, fuel: u64) {
        self.fuel = fuel;
    }

    fn burn(&mut self, n: u64) -> Result<(), EvalError> {
        if self.fuel < n {
            self.fuel = 0;
            return Err(EvalError::OutOfFuel);
        }
        self.fuel -= n;
        Ok(())
    }

    /// Every constructor node built and every node copied out of the memo
    /// costs one unit of fuel, so fuel also bounds memory.
    pub fn eval_term(&mut self, t: &Term) -> Result<Value, EvalError> {
        let Term::App { sym, args } = t else {
            return Err(EvalError::NotGround(t.clone()));
        };
        if self.theory.sig.is_constructor(sym) {
            self.burn(1)?;
            let args = args
                .iter()
                .map(|a| self.eval_term(a))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Term::App {
                sym: sym.clone(),
                args,
            });
        }
        if let Some(r) = self.memo.get(t) {
            let r = r.clone();
            if let Ok(v) = &r {
                self.burn(v.size() as u64)?;
            }
            return r;
        }
        let r = self.call(sym, args);
        if !matches!(r, Err(EvalError::OutOfFuel)) {
            let n = t.size() + r.as_ref().map_or(1, Term::size);
            if self.memo_nodes + n > MEMO_NODES {
                self.memo.clear();
                self.memo_nodes = 0;
            }
            self.memo_nodes += n;
            self.memo.insert(t.clone(), r.clone());
        }
        r
    }

    fn call(&mut self, f: &str, args: &[Term]) -> Result<Value, EvalError> {
        self.burn(1)?;
        let vals = args
            .iter()
            .map(|a| self.eval_term(a))
            .collect::<Result<Vec<_>, _>>()?;
        let redex = Term::app(f, vals);
        let def = self
            .theory
            .function(f)
            .ok_or_else(|| EvalError::Stuck(redex.clone()))?;
        for eq in &def.equations {
            if let Some(s) = eq.lhs.matches(&self.theory.sig, &redex) {
                let body = s.apply(&eq.rhs);
                return self.eval_term(&body);
            }
        }
        Err(EvalError::Stuck(redex))
    }

    /// Classical truth value of a ground formula body.
    pub fn eval_prop(&mut self, p: &Prop) -> Result<bool, EvalError> {
        match p {
            Prop::Eq(l, r) => Ok(self.eval_term(l)? == self.eval_term(r)?),
            Prop::Atom(t) => Ok(self.eval_term(t)?.head() == Some(TRUE)),
            Prop::Implies(hs, c) => {
                for h in hs {
                    if !self.eval_prop(h)? {
                        return Ok(true);
                    }
                }
                self.eval_prop(c)
            }
            Prop::Or(ps) => {
                for q in ps {
                    if self.eval_prop(q)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Prop::And(ps) => {
                for q in ps {
                    if !self.eval_prop(q)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Evaluates `p` under a ground assignment of its variables.
    pub fn eval_instance(&mut self, p: &Prop, assignment: &Subst) -> Result<bool, EvalError> {
        self.eval_prop(&p.substitute(assignment))
    }
}

pub fn eval_term(theory: &Theory, t: &Term) -> Result<Value, EvalError> {
    Evaluator::new(theory).eval_term(t)
}

pub fn eval_formula(theory: &Theory, p: &Prop) -> Result<bool, EvalError> {
    Evaluator::new(theory).eval_prop(p)
}

/// Caches the constructor values of each sort by exact size.
pub struct ValueEnumerator<'a> {
    sig: &'a Signature,
    cache: HashMap<(Sort, usize), Vec<Value>>,
}

impl<'a> ValueEnumerator<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        ValueEnumerator {
            sig,
            cache: HashMap::new(),
        }
    }

    /// All values with exactly `size` nodes: constructors in declaration
    /// order, then argument size splits in lexicographic order, then the
    /// product of argument values with the first argument varying slowest.
    pub fn of_size(&mut self, sort: &Sort, size: usize) -> Vec<Value> {
        if size == 0 {
            return vec![];
        }
        let key = (sort.clone(), size);
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let mut out = Vec::new();
        for c in self.sig.constructors(sort).to_vec() {
            let arg_sorts = self.sig.get(&c).unwrap().args.clone();
            if arg_sorts.is_empty() {
                if size == 1 {
                    out.push(Term::App {
                        sym: c.clone(),
                        args: vec![],
                    });
                }
                continue;
            }
            if size < 1 + arg_sorts.len() {
                continue;
            }
            for split in compositions(size - 1, arg_sorts.len()) {
                let per_arg: Vec<Vec<Value>> = arg_sorts
                    .iter()
                    .zip(&split)
                    .map(|(s, &k)| self.of_size(s, k))
                    .collect();
                for combo in cartesian(&per_arg) {
                    out.push(Term::App {
                        sym: c.clone(),
                        args: combo,
                    });
                }
            }
        }
        self.cache.insert(key, out.clone());
        out
    }

    /// Every value of size at most `max_size`, smallest first.
    pub fn up_to(&mut self, sort: &Sort, max_size: usize) -> Vec<Value> {
        (1..=max_size).flat_map(|k| self.of_size(sort, k)).collect()
    }

    pub fn count_of_size(&mut self, sort: &Sort, size: usize) -> usize {
        self.of_size(sort, size).len()
    }

    pub fn smallest(&mut self, sort: &Sort) -> Option<Value> {
        (1..=16).find_map(|k| self.of_size(sort, k).into_iter().next())
    }
}

pub fn enumerate_values(sig: &Signature, sort: &Sort, max_size: usize) -> Vec<Value> {
    ValueEnumerator::new(sig).up_to(sort, max_size)
}

/// Ordered ways of writing `total` as `parts` positive summands, in
/// lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if total < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Cartesian product, first list varying slowest.
pub fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for l in lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for prefix in &out {
            for x in l {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
