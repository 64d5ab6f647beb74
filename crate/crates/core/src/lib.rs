//! Logically-constrained reinforcement learning: Q-learning over the on-the-fly
//! product of an MDP with a limit-deterministic Büchi automaton, a
//! satisfaction-probability estimator, and an exact model-checking oracle.

pub mod automata;
pub mod env;
pub mod graph;
pub mod label;
pub mod learner;
pub mod ltl;
pub mod oracle;
pub mod product;
pub mod psp;

/// Random number generator used for every stochastic component.
pub type SimRng = rand_chacha::ChaCha8Rng;
