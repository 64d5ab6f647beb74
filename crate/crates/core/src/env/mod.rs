//! Labelled MDP environments: the sampling interface used by the learner and
//! explicit enumeration for the oracle.

mod explicit;
mod grid;
mod pacman;

use thiserror::Error;

use crate::label::{Alphabet, Letter};
use crate::SimRng;

pub use explicit::{explicit_mdp, random_mdp, ExplicitMdp, RandomMdpSpec, MAX_EXPLICIT_STATES};
pub use grid::{
    five_by_five_fixture, load_grid, region3_fixture, region_fixture, GridEnv, GridSpec, GRID_ACTIONS,
};
pub use pacman::{load_pacman, pacman_fixture, PacmanEnv, PacmanSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("action {action} is not available in state {state}")]
    InvalidAction { state: usize, action: usize },
    #[error("environment is not enumerable")]
    NotEnumerable,
    #[error("environment has {states} states, more than the limit of {limit}")]
    TooLarge { states: usize, limit: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unknown fixture `{0}`")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// A samplable MDP with a labelling function. States and actions are dense
/// indices; `step` must be a pure function of its arguments and the RNG draw.
pub trait LabeledEnv {
    fn alphabet(&self) -> &Alphabet;

    fn initial(&self) -> usize;

    fn actions(&self, s: usize) -> &[usize];

    fn action_name(&self, a: usize) -> String;

    fn step(&self, s: usize, a: usize, rng: &mut SimRng) -> Result<usize, EnvError>;

    fn label(&self, s: usize) -> Letter;

    /// Upper bound on state indices when the environment is enumerable.
    fn state_space(&self) -> Option<usize>;

    /// Exact successor distribution of `(s, a)` for enumerable environments.
    fn law(&self, s: usize, a: usize) -> Result<Vec<(usize, f64)>, EnvError>;

    /// The part of the state a learner keys its tables on.
    fn observe(&self, s: usize) -> usize {
        s
    }

    fn describe(&self, s: usize) -> String {
        s.to_string()
    }
}
