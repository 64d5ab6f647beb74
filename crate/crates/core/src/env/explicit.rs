use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};

use super::{EnvError, LabeledEnv};
use crate::label::{Alphabet, Letter};
use crate::SimRng;

pub const MAX_EXPLICIT_STATES: usize = 200_000;

/// Fully enumerated MDP. State `i` corresponds to `env_ids[i]` of the source
/// environment; `transitions[i][k]` is the distribution of the `k`-th action
/// in `actions[i]`.
#[derive(Debug, Clone)]
pub struct ExplicitMdp {
    pub alphabet: Alphabet,
    pub env_ids: Vec<usize>,
    pub initial: usize,
    pub actions: Vec<Vec<usize>>,
    pub transitions: Vec<Vec<Vec<(usize, f64)>>>,
    pub labels: Vec<Letter>,
    /// What a learner observes of each state (see [`LabeledEnv::observe`]).
    pub observations: Vec<usize>,
    pub action_names: Vec<String>,
}

impl ExplicitMdp {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, s: usize, a: usize) -> Option<&[(usize, f64)]> {
        let k = self.actions[s].iter().position(|&x| x == a)?;
        Some(&self.transitions[s][k])
    }

    pub fn index_of(&self, env_id: usize) -> Option<usize> {
        self.env_ids.binary_search(&env_id).ok()
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        self.transitions
            .iter()
            .flatten()
            .map(|row| (row.iter().map(|p| p.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl LabeledEnv for ExplicitMdp {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> usize {
        self.initial
    }

    fn actions(&self, s: usize) -> &[usize] {
        &self.actions[s]
    }

    fn action_name(&self, a: usize) -> String {
        self.action_names
            .get(a)
            .cloned()
            .unwrap_or_else(|| format!("a{a}"))
    }

    fn step(&self, s: usize, a: usize, rng: &mut SimRng) -> Result<usize, EnvError> {
        let row = self
            .row(s, a)
            .ok_or(EnvError::InvalidAction { state: s, action: a })?;
        let mut r: f64 = rng.gen();
        for &(t, p) in row {
            if r < p {
                return Ok(t);
            }
            r -= p;
        }
        Ok(row.last().map(|x| x.0).unwrap_or(s))
    }

    fn label(&self, s: usize) -> Letter {
        self.labels[s]
    }

    fn state_space(&self) -> Option<usize> {
        Some(self.num_states())
    }

    fn law(&self, s: usize, a: usize) -> Result<Vec<(usize, f64)>, EnvError> {
        self.row(s, a)
            .map(<[_]>::to_vec)
            .ok_or(EnvError::InvalidAction { state: s, action: a })
    }

    fn observe(&self, s: usize) -> usize {
        self.observations[s]
    }
}

/// Enumerates the states reachable from the initial state together with
/// their exact transition laws.
pub fn explicit_mdp(env: &dyn LabeledEnv) -> Result<ExplicitMdp, EnvError> {
    let space = env.state_space().ok_or(EnvError::NotEnumerable)?;
    if space > MAX_EXPLICIT_STATES {
        return Err(EnvError::TooLarge {
            states: space,
            limit: MAX_EXPLICIT_STATES,
        });
    }
    let mut seen = BTreeSet::from([env.initial()]);
    let mut stack = vec![env.initial()];
    let mut laws: BTreeMap<usize, Vec<Vec<(usize, f64)>>> = BTreeMap::new();
    while let Some(s) = stack.pop() {
        let mut rows = Vec::new();
        for &a in env.actions(s) {
            let row = env.law(s, a)?;
            for &(t, _) in &row {
                if seen.insert(t) {
                    if seen.len() > MAX_EXPLICIT_STATES {
                        return Err(EnvError::TooLarge {
                            states: seen.len(),
                            limit: MAX_EXPLICIT_STATES,
                        });
                    }
                    stack.push(t);
                }
            }
            rows.push(row);
        }
        laws.insert(s, rows);
    }
    let env_ids: Vec<usize> = seen.into_iter().collect();
    let index = |id: usize| env_ids.binary_search(&id).unwrap();
    let mut actions = Vec::with_capacity(env_ids.len());
    let mut transitions = Vec::with_capacity(env_ids.len());
    let mut labels = Vec::with_capacity(env_ids.len());
    let mut max_action = 0;
    for &id in &env_ids {
        let acts = env.actions(id).to_vec();
        max_action = max_action.max(acts.iter().copied().max().unwrap_or(0));
        actions.push(acts);
        transitions.push(
            laws[&id]
                .iter()
                .map(|row| {
                    let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
                    for &(t, p) in row {
                        *merged.entry(index(t)).or_default() += p;
                    }
                    merged.into_iter().collect()
                })
                .collect(),
        );
        labels.push(env.label(id));
    }
    let observations = env_ids.iter().map(|&id| env.observe(id)).collect();
    Ok(ExplicitMdp {
        alphabet: env.alphabet().clone(),
        initial: index(env.initial()),
        env_ids,
        actions,
        transitions,
        labels,
        observations,
        action_names: (0..=max_action).map(|a| env.action_name(a)).collect(),
    })
}

/// Parameters of [`random_mdp`].
#[derive(Debug, Clone)]
pub struct RandomMdpSpec {
    pub states: usize,
    pub max_actions: usize,
    pub max_successors: usize,
    pub alphabet: Alphabet,
    /// Letters a state label is drawn from.
    pub letters: Vec<Letter>,
}

/// Samples an MDP with random labels, action sets and sparse transition rows.
pub fn random_mdp(spec: &RandomMdpSpec, seed: u64) -> ExplicitMdp {
    let mut rng = SimRng::seed_from_u64(seed);
    let n = spec.states.max(1);
    let mut actions = Vec::with_capacity(n);
    let mut transitions = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(spec.letters[rng.gen_range(0..spec.letters.len())]);
        let k = rng.gen_range(1..=spec.max_actions.max(1));
        actions.push((0..k).collect::<Vec<_>>());
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            let m = rng.gen_range(1..=spec.max_successors.max(1));
            let mut succ: BTreeMap<usize, f64> = BTreeMap::new();
            for _ in 0..m {
                *succ.entry(rng.gen_range(0..n)).or_default() += rng.gen_range(0.1..1.0);
            }
            let total: f64 = succ.values().sum();
            rows.push(succ.into_iter().map(|(t, w)| (t, w / total)).collect());
        }
        transitions.push(rows);
    }
    ExplicitMdp {
        alphabet: spec.alphabet.clone(),
        env_ids: (0..n).collect(),
        initial: 0,
        actions,
        transitions,
        labels,
        observations: (0..n).collect(),
        action_names: (0..spec.max_actions.max(1)).map(|a| format!("a{a}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> RandomMdpSpec {
        let alphabet = Alphabet::new(["t", "u"]).unwrap();
        RandomMdpSpec {
            states: 12,
            max_actions: 3,
            max_successors: 3,
            letters: alphabet.letters().collect(),
            alphabet,
        }
    }

    #[test]
    fn random_rows_are_distributions() {
        let m = random_mdp(&spec(), 3);
        assert!(m.max_row_error() < 1e-12);
        assert!(m.transitions.iter().flatten().flatten().all(|&(_, p)| p > 0.0));
    }

    #[test]
    fn sampling_matches_rows() {
        let m = random_mdp(&spec(), 5);
        let mut rng = SimRng::seed_from_u64(1);
        let row = m.row(0, 0).unwrap().to_vec();
        let mut counts = vec![0usize; m.num_states()];
        let n = 100_000;
        for _ in 0..n {
            counts[m.step(0, 0, &mut rng).unwrap()] += 1;
        }
        let tv: f64 = (0..m.num_states())
            .map(|t| {
                let p = row.iter().find(|x| x.0 == t).map_or(0.0, |x| x.1);
                (p - counts[t] as f64 / n as f64).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "{tv}");
    }

    #[test]
    fn explicit_of_explicit_is_reachable_part() {
        let m = random_mdp(&spec(), 9);
        let e = explicit_mdp(&m).unwrap();
        assert!(e.num_states() <= m.num_states());
        assert_eq!(e.env_ids[e.initial], 0);
        assert!(e.max_row_error() < 1e-12);
    }
}
