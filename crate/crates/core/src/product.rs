//! On-the-fly product of a labelled environment with an LDBA.

use std::fmt;

use thiserror::Error;

use crate::automata::{accepting_frontier, find_sinks, FrontierSet, Ldba};
use crate::env::{EnvError, LabeledEnv};
use crate::label::{Letter, LetterProjection};
use crate::SimRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductError {
    #[error("action {action} is not available in product state {state}")]
    InvalidAction { state: ProductState, action: ProductAction },
    #[error("automaton atom `{0}` is not an environment label")]
    UnknownAtom(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub env: usize,
    pub aut: usize,
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.env, self.aut)
    }
}

/// What a learner keys its tables on: the environment observation and the
/// automaton state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductKey {
    pub obs: usize,
    pub aut: usize,
}

/// Environment actions come first in the ordering, then epsilon moves by
/// target state. `Stay` is the only action of the reject state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductAction {
    Env(usize),
    Eps(usize),
    Stay,
}

impl fmt::Display for ProductAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProductAction::Env(a) => write!(f, "{a}"),
            ProductAction::Eps(q) => write!(f, "eps{q}"),
            ProductAction::Stay => write!(f, "stay"),
        }
    }
}

/// Positive reward and learning constants. The neutral reward is fixed at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub r_p: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            r_p: 1.0,
            gamma: 0.9,
            mu: 0.9,
        }
    }
}

pub struct Product<'a, E: LabeledEnv + ?Sized> {
    env: &'a E,
    ldba: &'a Ldba,
    // indexed by automaton state, reject included
    sink: Vec<bool>,
    projection: LetterProjection,
}

impl<'a, E: LabeledEnv + ?Sized> Product<'a, E> {
    pub fn new(env: &'a E, ldba: &'a Ldba) -> Result<Self, ProductError> {
        if let Some(missing) = ldba.alphabet().names().iter().find(|n| !env.alphabet().contains(n)) {
            return Err(ProductError::UnknownAtom(missing.clone()));
        }
        let mut sink = vec![false; ldba.num_states() + 1];
        sink[ldba.reject()] = true;
        for q in find_sinks(ldba) {
            sink[q] = true;
        }
        Ok(Product {
            env,
            ldba,
            sink,
            projection: env.alphabet().projection_to(ldba.alphabet()),
        })
    }

    pub fn env(&self) -> &'a E {
        self.env
    }

    pub fn ldba(&self) -> &'a Ldba {
        self.ldba
    }

    pub fn initial(&self) -> ProductState {
        ProductState {
            env: self.env.initial(),
            aut: self.ldba.initial(),
        }
    }

    /// SINK automaton states, reject included.
    pub fn is_sink(&self, q: usize) -> bool {
        self.sink[q]
    }

    /// Environment label restricted to the automaton's atoms.
    pub fn label(&self, s: usize) -> Letter {
        self.projection.apply(self.env.label(s))
    }

    pub fn key(&self, p: ProductState) -> ProductKey {
        ProductKey {
            obs: self.env.observe(p.env),
            aut: p.aut,
        }
    }

    pub fn available_actions(&self, p: ProductState) -> Vec<ProductAction> {
        if p.aut == self.ldba.reject() {
            return vec![ProductAction::Stay];
        }
        let mut out: Vec<ProductAction> = self
            .env
            .actions(p.env)
            .iter()
            .map(|&a| ProductAction::Env(a))
            .collect();
        let mut eps = self.ldba.eps_successors(p.aut).to_vec();
        eps.sort_unstable();
        eps.dedup();
        out.extend(eps.into_iter().map(ProductAction::Eps));
        out
    }

    fn check(&self, p: ProductState, a: ProductAction) -> Result<(), ProductError> {
        let ok = match a {
            ProductAction::Stay => p.aut == self.ldba.reject(),
            ProductAction::Eps(q) => self.ldba.eps_successors(p.aut).contains(&q),
            ProductAction::Env(x) => p.aut != self.ldba.reject() && self.env.actions(p.env).contains(&x),
        };
        if ok {
            Ok(())
        } else {
            Err(ProductError::InvalidAction { state: p, action: a })
        }
    }

    pub fn step(&self, p: ProductState, a: ProductAction, rng: &mut SimRng) -> Result<ProductState, ProductError> {
        self.check(p, a)?;
        Ok(match a {
            ProductAction::Stay => p,
            ProductAction::Eps(q) => ProductState { env: p.env, aut: q },
            ProductAction::Env(x) => {
                let s = self.env.step(p.env, x, rng)?;
                ProductState {
                    env: s,
                    aut: self.ldba.step(p.aut, self.label(s)),
                }
            }
        })
    }

    /// Exact successor distribution, for enumerable environments.
    pub fn law(&self, p: ProductState, a: ProductAction) -> Result<Vec<(ProductState, f64)>, ProductError> {
        self.check(p, a)?;
        Ok(match a {
            ProductAction::Stay => vec![(p, 1.0)],
            ProductAction::Eps(q) => vec![(ProductState { env: p.env, aut: q }, 1.0)],
            ProductAction::Env(x) => self
                .env
                .law(p.env, x)?
                .into_iter()
                .map(|(s, pr)| {
                    let q = self.ldba.step(p.aut, self.label(s));
                    (ProductState { env: s, aut: q }, pr)
                })
                .collect(),
        })
    }

    /// Reward for arriving in `next`, followed by the frontier update.
    pub fn reward_and_update(&self, next: ProductState, frontier: &FrontierSet, params: &RewardParams) -> (f64, FrontierSet) {
        reward_and_update(self.ldba, next.aut, frontier, params)
    }
}

/// `r_p` when `q` is still owed a visit, 0 otherwise; the frontier is then
/// advanced by `Acc`. The reject state never earns a reward.
pub fn reward_and_update(ldba: &Ldba, q: usize, frontier: &FrontierSet, params: &RewardParams) -> (f64, FrontierSet) {
    if q >= ldba.num_states() {
        return (0.0, frontier.clone());
    }
    let reward = if frontier.contains(q) { params.r_p } else { 0.0 };
    (reward, accepting_frontier(q, frontier, ldba.acceptance()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::builtin_automaton;
    use crate::env::{load_grid, GridEnv};
    use rand::SeedableRng;

    fn deterministic_grid() -> GridEnv {
        let text = "slip: 1.0\nabsorbing: t\nactions: t = stay\nstart: 0,0\ninnt\n";
        GridEnv::new(load_grid(text).unwrap()).unwrap()
    }

    fn fig4() -> Ldba {
        builtin_automaton("fig4_fg_t").unwrap()
    }

    #[test]
    fn epsilon_actions_follow_env_actions() {
        let env = deterministic_grid();
        let a = fig4();
        let p = Product::new(&env, &a).unwrap();
        let s0 = p.initial();
        let acts = p.available_actions(s0);
        assert_eq!(acts.last(), Some(&ProductAction::Eps(1)));
        assert!(acts[..acts.len() - 1].iter().all(|x| matches!(x, ProductAction::Env(_))));
        let q1 = ProductState { env: s0.env, aut: 1 };
        assert!(!p.available_actions(q1).iter().any(|x| matches!(x, ProductAction::Eps(_))));
        let rej = ProductState { env: s0.env, aut: a.reject() };
        assert_eq!(p.available_actions(rej), vec![ProductAction::Stay]);
    }

    #[test]
    fn epsilon_keeps_env_state() {
        let env = deterministic_grid();
        let a = fig4();
        let p = Product::new(&env, &a).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let s0 = p.initial();
        let s1 = p.step(s0, ProductAction::Eps(1), &mut rng).unwrap();
        assert_eq!(s1, ProductState { env: s0.env, aut: 1 });
        assert_eq!(p.law(s0, ProductAction::Eps(1)).unwrap(), vec![(s1, 1.0)]);
        // moving right lands on an unlabelled cell, which q1 cannot read
        let s2 = p.step(s1, ProductAction::Env(1), &mut rng).unwrap();
        assert_eq!(s2.aut, a.reject());
        assert!(p.is_sink(s2.aut));
    }

    #[test]
    fn invalid_actions_are_rejected() {
        let env = deterministic_grid();
        let a = fig4();
        let p = Product::new(&env, &a).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let q1 = ProductState { env: 0, aut: 1 };
        assert!(p.step(q1, ProductAction::Eps(1), &mut rng).is_err());
        assert!(p.step(q1, ProductAction::Stay, &mut rng).is_err());
    }

    #[test]
    fn reward_repeats_with_single_set() {
        let a = fig4();
        let params = RewardParams::default();
        let mut f = FrontierSet::initial(&a);
        for _ in 0..3 {
            let (r, next) = reward_and_update(&a, 1, &f, &params);
            assert_eq!(r, 1.0);
            f = next;
        }
        let (r, _) = reward_and_update(&a, 0, &f, &params);
        assert_eq!(r, 0.0);
        let (r, _) = reward_and_update(&a, a.reject(), &f, &params);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn frontier_shrinks_with_two_sets() {
        let alpha = crate::label::Alphabet::new(["a"]).unwrap();
        let mut b = crate::automata::LdbaBuilder::new(alpha);
        let q0 = b.add_state("q0");
        let q1 = b.add_state("q1");
        b.set_initial(q0);
        b.set_part(q0, true);
        b.set_part(q1, true);
        b.add_transitions(q0, q1, |_| true);
        b.add_transitions(q1, q0, |_| true);
        b.add_acceptance_set(vec![q0]);
        b.add_acceptance_set(vec![q1]);
        let a = b.build().unwrap();
        let params = RewardParams::default();
        let f = FrontierSet::initial(&a);
        let (r, f) = reward_and_update(&a, q0, &f, &params);
        assert_eq!(r, 1.0);
        assert_eq!(f.states(), vec![q1]);
        let (r, f2) = reward_and_update(&a, q0, &f, &params);
        assert_eq!(r, 0.0);
        assert_eq!(f2, f);
        let (r, f3) = reward_and_update(&a, q1, &f, &params);
        assert_eq!(r, 1.0);
        assert_eq!(f3.states(), vec![q0]);
    }

    #[test]
    fn law_matches_env_law() {
        let env = crate::env::region3_fixture();
        let a = fig4();
        let p = Product::new(&env, &a).unwrap();
        let s0 = p.initial();
        for act in p.available_actions(s0) {
            let row = p.law(s0, act).unwrap();
            let total: f64 = row.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            if let ProductAction::Env(x) = act {
                let env_row = env.law(s0.env, x).unwrap();
                for ((ps, pp), (es, ep)) in row.iter().zip(env_row) {
                    assert_eq!(ps.env, es);
                    assert_eq!(*pp, ep);
                }
            }
        }
    }
}
