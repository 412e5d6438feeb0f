//! Automated inductive theorem proving with template-based conjecturing.
//!
//! The pipeline attacks a goal with a tactic strategy. When that fails it
//! instantiates a fixed set of lemma templates over the functions the goal
//! mentions, throws away the ones a bounded tester can falsify, proves the
//! rest and retries the goal with them. Every proof is emitted as a script
//! that the small [`checker`] replays without search.

pub mod checker;
pub mod conjecture;
pub mod evaluator;
pub mod frontend;
pub mod kernel;
pub mod orchestrator;
pub mod prover;
pub mod refuter;
pub mod sexpr;
