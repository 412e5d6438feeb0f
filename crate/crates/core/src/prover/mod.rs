//! Proof search: a rewriting simplifier, structural induction, a bounded
//! equational search and an interpreter for strategy trees.
//!
//! Everything here produces checker steps, and a closed proof state
//! is turned into a script that [`crate::checker::check`] accepts.

pub mod hammer;
pub mod induct;
pub mod simp;
pub mod state;
pub mod strategy;

#[cfg(test)]
mod tests;

use crate::checker::{Ctx, ProofScript};
use crate::frontend::Theory;
use crate::kernel::Formula;
use indexmap::IndexMap;
use std::cell::Cell;
use std::time::{Duration, Instant};

pub use state::ProofState;
pub use strategy::{run_strategy, Env, RepeatCount, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProverConfig {
    pub simp_steps: usize,
    pub hammer_depth: usize,
    pub hammer_nodes: usize,
    pub induct_candidates: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            simp_steps: 200,
            hammer_depth: 4,
            hammer_nodes: 300,
            induct_candidates: 5,
        }
    }
}

/// Search effort shared by everything in one proof attempt. Counts
/// search nodes and optionally a wall-clock deadline.
#[derive(Debug)]
pub struct Budget {
    left: Cell<u64>,
    spent: Cell<u64>,
    deadline: Option<Instant>,
}

impl Budget {
    pub fn nodes(n: u64) -> Budget {
        Budget {
            left: Cell::new(n),
            spent: Cell::new(0),
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, d: Duration) -> Budget {
        self.deadline = Some(Instant::now() + d);
        self
    }

    pub fn spend(&self, n: u64) -> bool {
        if self.exhausted() {
            return false;
        }
        let left = self.left.get();
        self.spent.set(self.spent.get() + n.min(left));
        self.left.set(left.saturating_sub(n));
        true
    }

    pub fn exhausted(&self) -> bool {
        self.left.get() == 0 || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn spent(&self) -> u64 {
        self.spent.get()
    }
}

/// Runs `strategy` on `statement` and returns the resulting script, or
/// `None` if the search failed or ran out of budget.
pub fn prove(
    theory: &Theory,
    lemmas: &IndexMap<String, Formula>,
    name: &str,
    statement: &Formula,
    strategy: &Strategy,
    cfg: ProverConfig,
    budget: Budget,
) -> (Option<ProofScript>, u64) {
    let env = Env {
        ctx: Ctx { theory, lemmas },
        cfg,
        budget,
    };
    let closed = run_strategy(&env, strategy, ProofState::new(statement));
    let script = closed.map(|st| ProofScript {
        name: name.to_string(),
        statement: statement.clone(),
        proof: st.script(),
    });
    (script, env.budget.spent())
}
