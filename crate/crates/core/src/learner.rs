//! Episodic Q-learning over the on-the-fly product with frontier rewards,
//! visit counting and interleaved PSP updates.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::automata::{FrontierSet, Ldba};
use crate::env::{EnvError, LabeledEnv};
use crate::product::{Product, ProductAction, ProductError, ProductKey, ProductState, RewardParams};
use crate::psp::{CountTables, PspTable};
use crate::SimRng;

pub const CONVERGENCE_WINDOW: usize = 30;
pub const CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("invalid {field}: {message}")]
    Config { field: &'static str, message: String },
    #[error(transparent)]
    Product(#[from] ProductError),
}

impl From<EnvError> for LearnError {
    fn from(e: EnvError) -> Self {
        LearnError::Product(ProductError::Env(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnParams {
    pub mu: f64,
    pub gamma: f64,
    pub r_p: f64,
    pub episodes: usize,
    pub it_threshold: usize,
    pub epsilon0: f64,
    /// Decay constant of the exploration rate; `None` means `episodes / 10`.
    pub tau: Option<f64>,
    /// Stop early once Q has settled (see [`Learner::converged`]).
    pub stop_on_convergence: bool,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            mu: 0.9,
            gamma: 0.9,
            r_p: 1.0,
            episodes: 100,
            it_threshold: 1000,
            epsilon0: 1.0,
            tau: None,
            stop_on_convergence: true,
        }
    }
}

fn config(field: &'static str, message: impl Into<String>) -> LearnError {
    LearnError::Config {
        field,
        message: message.into(),
    }
}

impl LearnParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(config("mu", format!("{} is outside (0, 1]", self.mu)));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(config("gamma", format!("{} is outside [0, 1)", self.gamma)));
        }
        if !(self.r_p > 0.0 && self.r_p.is_finite()) {
            return Err(config("rp", format!("{} is not a positive reward", self.r_p)));
        }
        if self.it_threshold == 0 {
            return Err(config("it_threshold", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return Err(config("epsilon0", format!("{} is outside [0, 1]", self.epsilon0)));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(config("tau", format!("{tau} is not positive")));
            }
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or((self.episodes as f64 / 10.0).max(1.0))
    }

    /// Exploration rate in episode `t`: `ε₀ / (1 + t/τ)`.
    pub fn epsilon(&self, t: usize) -> f64 {
        self.epsilon0 / (1.0 + t as f64 / self.tau())
    }

    pub fn reward(&self) -> RewardParams {
        RewardParams {
            r_p: self.r_p,
            gamma: self.gamma,
            mu: self.mu,
        }
    }

    /// Upper bound on any Q value.
    pub fn q_bound(&self) -> f64 {
        self.r_p / (1.0 - self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Sink,
    Threshold,
}

impl Terminal {
    pub fn as_str(self) -> &'static str {
        match self {
            Terminal::Sink => "sink",
            Terminal::Threshold => "threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub iterations: usize,
    pub reward: f64,
    pub terminal: Terminal,
    /// Step at which the first positive reward arrived.
    pub steps: Option<usize>,
    pub psp0: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub records: Vec<EpisodeRecord>,
    pub wall_times: Vec<Duration>,
    pub q_min: f64,
    pub q_max: f64,
    pub converged_at: Option<usize>,
}

/// `Q(s,a) + μ (r + γ max Q(s',·) − Q(s,a))`.
pub fn q_update(q: f64, reward: f64, next_max: f64, params: &RewardParams) -> f64 {
    q + params.mu * (reward + params.gamma * next_max - q)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice among `values.len()` actions.
pub fn select_action(values: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..values.len())
    } else {
        argmax(values)
    }
}

/// Deterministic stationary policy over learner keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Policy {
    pub map: BTreeMap<ProductKey, ProductAction>,
}

impl Policy {
    pub fn action(&self, key: ProductKey) -> Option<ProductAction> {
        self.map.get(&key).copied()
    }
}

pub struct Learner<'a, E: LabeledEnv + ?Sized> {
    product: Product<'a, E>,
    params: LearnParams,
    rng: SimRng,
    index: HashMap<ProductKey, usize>,
    pub keys: Vec<ProductKey>,
    pub actions: Vec<Vec<ProductAction>>,
    pub q: Vec<Vec<f64>>,
    pub counts: CountTables,
    pub psp: PspTable,
    episode: usize,
    log: RunLog,
    window: VecDeque<f64>,
    initial: usize,
}

impl<'a, E: LabeledEnv + ?Sized> Learner<'a, E> {
    pub fn new(env: &'a E, ldba: &'a Ldba, params: LearnParams, seed: u64) -> Result<Self, LearnError> {
        params.validate()?;
        let product = Product::new(env, ldba)?;
        let mut learner = Learner {
            product,
            params,
            rng: SimRng::seed_from_u64(seed),
            index: HashMap::new(),
            keys: Vec::new(),
            actions: Vec::new(),
            q: Vec::new(),
            counts: CountTables::default(),
            psp: PspTable::default(),
            episode: 0,
            log: RunLog::default(),
            window: VecDeque::new(),
            initial: 0,
        };
        learner.initial = learner.intern(learner.product.initial());
        Ok(learner)
    }

    pub fn product(&self) -> &Product<'a, E> {
        &self.product
    }

    pub fn params(&self) -> &LearnParams {
        &self.params
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn episodes_run(&self) -> usize {
        self.episode
    }

    pub fn state_index(&self, key: ProductKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn initial_index(&self) -> usize {
        self.initial
    }

    fn intern(&mut self, p: ProductState) -> usize {
        let key = self.product.key(p);
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let acts = self.product.available_actions(p);
        let i = self.keys.len();
        self.index.insert(key, i);
        self.keys.push(key);
        self.q.push(vec![0.0; acts.len()]);
        self.counts.add_state(acts.len());
        self.psp.add_state(self.product.is_sink(p.aut));
        self.actions.push(acts);
        i
    }

    /// Q has settled: the largest per-episode change stayed below the
    /// tolerance for a full window, after some positive reward was seen.
    pub fn converged(&self) -> bool {
        self.window.len() == CONVERGENCE_WINDOW
            && self.log.q_max > 0.0
            && self.window.iter().all(|&d| d < CONVERGENCE_TOL)
    }

    pub fn run_episode(&mut self) -> Result<&EpisodeRecord, LearnError> {
        let start = Instant::now();
        let eps = self.params.epsilon(self.episode);
        let rp = self.params.reward();
        let ldba = self.product.ldba();
        let mut p = self.product.initial();
        let mut s = self.initial;
        let mut frontier = FrontierSet::initial(ldba);
        let mut it = 0;
        let mut total = 0.0;
        let mut first = None;
        let mut max_dq: f64 = 0.0;
        let terminal = loop {
            if self.product.is_sink(p.aut) {
                break Terminal::Sink;
            }
            if it >= self.params.it_threshold {
                break Terminal::Threshold;
            }
            let k = select_action(&self.q[s], eps, &mut self.rng);
            let next = self.product.step(p, self.actions[s][k], &mut self.rng)?;
            let n = self.intern(next);
            self.counts.record_transition(s, k, n);
            let (r, f) = self.product.reward_and_update(next, &frontier, &rp);
            frontier = f;
            let next_max = self.q[n].iter().copied().fold(0.0, f64::max);
            let old = self.q[s][k];
            let new = q_update(old, r, next_max, &rp);
            self.q[s][k] = new;
            max_dq = max_dq.max((new - old).abs());
            self.log.q_min = self.log.q_min.min(new);
            self.log.q_max = self.log.q_max.max(new);
            self.psp.avi_update(&self.counts, s);
            if r > 0.0 && first.is_none() {
                first = Some(it + 1);
            }
            total += r;
            p = next;
            s = n;
            it += 1;
        };
        self.window.push_back(max_dq);
        if self.window.len() > CONVERGENCE_WINDOW {
            self.window.pop_front();
        }
        self.log.records.push(EpisodeRecord {
            episode: self.episode,
            iterations: it,
            reward: total,
            terminal,
            steps: first,
            psp0: self.psp.get(self.initial),
        });
        self.log.wall_times.push(start.elapsed());
        self.episode += 1;
        if self.log.converged_at.is_none() && self.converged() {
            self.log.converged_at = Some(self.episode);
        }
        Ok(self.log.records.last().unwrap())
    }

    /// Runs episodes until the budget is spent or, when enabled, Q converges.
    pub fn train(&mut self) -> Result<(), LearnError> {
        while self.episode < self.params.episodes {
            self.run_episode()?;
            if self.params.stop_on_convergence && self.converged() {
                break;
            }
        }
        Ok(())
    }

    pub fn greedy_policy(&self) -> Policy {
        Policy {
            map: self
                .keys
                .iter()
                .enumerate()
                .filter(|(i, _)| !self.actions[*i].is_empty())
                .map(|(i, &k)| (k, self.actions[i][argmax(&self.q[i])]))
                .collect(),
        }
    }

    pub fn q_value(&self, key: ProductKey, action: ProductAction) -> Option<f64> {
        let i = self.state_index(key)?;
        let k = self.actions[i].iter().position(|&a| a == action)?;
        Some(self.q[i][k])
    }

    pub fn psp_value(&self, key: ProductKey) -> Option<f64> {
        self.state_index(key).map(|i| self.psp.get(i))
    }

    /// Acceptance-set membership of every learner state.
    pub fn acceptance_bits(&self) -> Vec<u64> {
        let ldba = self.product.ldba();
        self.keys
            .iter()
            .map(|k| {
                (0..ldba.num_acceptance_sets())
                    .filter(|&j| k.aut < ldba.num_states() && ldba.in_set(j, k.aut))
                    .fold(0u64, |m, j| m | (1 << j))
            })
            .collect()
    }
}

/// Trains from scratch with the given seed.
pub fn train<'a, E: LabeledEnv + ?Sized>(
    env: &'a E,
    ldba: &'a Ldba,
    params: LearnParams,
    seed: u64,
) -> Result<Learner<'a, E>, LearnError> {
    let mut learner = Learner::new(env, ldba, params, seed)?;
    learner.train()?;
    Ok(learner)
}

/// Outcome of a Monte-Carlo policy evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionStats {
    pub runs: usize,
    pub satisfied: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// Follows `policy` on the product. Keys the policy does not cover take
/// their first available action.
pub fn policy_action<E: LabeledEnv + ?Sized>(policy: &Policy, product: &Product<'_, E>, p: ProductState) -> ProductAction {
    policy
        .action(product.key(p))
        .filter(|a| product.available_actions(p).contains(a))
        .unwrap_or_else(|| product.available_actions(p)[0])
}

/// A run counts as satisfying when it avoids SINKs and visits every
/// acceptance set during the second half of the horizon.
pub fn evaluate_policy<E: LabeledEnv + ?Sized>(
    policy: &Policy,
    env: &E,
    ldba: &Ldba,
    n_runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<SatisfactionStats, LearnError> {
    if n_runs == 0 {
        return Err(config("n_runs", "must be at least 1"));
    }
    let product = Product::new(env, ldba)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let f = ldba.num_acceptance_sets();
    let mut satisfied = 0;
    for _ in 0..n_runs {
        let mut p = product.initial();
        let mut seen = vec![false; f];
        let mut ok = true;
        for t in 0..horizon {
            if product.is_sink(p.aut) {
                ok = false;
                break;
            }
            p = product.step(p, policy_action(policy, &product, p), &mut rng)?;
            if t >= horizon / 2 && p.aut < ldba.num_states() {
                for (j, flag) in seen.iter_mut().enumerate() {
                    *flag |= ldba.in_set(j, p.aut);
                }
            }
        }
        if ok && !product.is_sink(p.aut) && seen.iter().all(|&b| b) {
            satisfied += 1;
        }
    }
    let est = satisfied as f64 / n_runs as f64;
    Ok(SatisfactionStats {
        runs: n_runs,
        satisfied,
        estimate: est,
        std_error: (est * (1.0 - est) / n_runs as f64).sqrt(),
    })
}

/// Plain Q-learning on environment observations with a caller-supplied
/// reward, for comparison with the automaton-guided learner.
pub struct FlatLearner<'a, E: LabeledEnv + ?Sized> {
    env: &'a E,
    params: LearnParams,
    rng: SimRng,
    pub q: HashMap<usize, Vec<f64>>,
    episode: usize,
    pub q_min: f64,
    pub q_max: f64,
}

impl<'a, E: LabeledEnv + ?Sized> FlatLearner<'a, E> {
    pub fn new(env: &'a E, params: LearnParams, seed: u64) -> Result<Self, LearnError> {
        params.validate()?;
        Ok(FlatLearner {
            env,
            params,
            rng: SimRng::seed_from_u64(seed),
            q: HashMap::new(),
            episode: 0,
            q_min: 0.0,
            q_max: 0.0,
        })
    }

    /// One episode; it ends at the first state where `terminal` holds or at
    /// the iteration threshold. Returns the accumulated reward.
    pub fn run_episode(&mut self, reward: impl Fn(usize) -> f64, terminal: impl Fn(usize) -> bool) -> Result<f64, LearnError> {
        let eps = self.params.epsilon(self.episode);
        let rp = self.params.reward();
        let mut s = self.env.initial();
        let mut total = 0.0;
        for _ in 0..self.params.it_threshold {
            if terminal(s) {
                break;
            }
            let acts = self.env.actions(s);
            let obs = self.env.observe(s);
            let values = self.q.entry(obs).or_insert_with(|| vec![0.0; acts.len()]).clone();
            let k = select_action(&values, eps, &mut self.rng);
            let next = self.env.step(s, acts[k], &mut self.rng)?;
            let r = reward(next);
            let next_max = if terminal(next) {
                0.0
            } else {
                self.q
                    .get(&self.env.observe(next))
                    .map_or(0.0, |v| v.iter().copied().fold(0.0, f64::max))
            };
            let entry = &mut self.q.get_mut(&obs).unwrap()[k];
            *entry = q_update(*entry, r, next_max, &rp);
            self.q_min = self.q_min.min(*entry);
            self.q_max = self.q_max.max(*entry);
            total += r;
            s = next;
        }
        self.episode += 1;
        Ok(total)
    }

    pub fn train(&mut self, reward: impl Fn(usize) -> f64, terminal: impl Fn(usize) -> bool) -> Result<(), LearnError> {
        while self.episode < self.params.episodes {
            self.run_episode(&reward, &terminal)?;
        }
        Ok(())
    }

    /// Greedy action in `s`; unseen observations take the first action.
    pub fn greedy(&self, s: usize) -> usize {
        let acts = self.env.actions(s);
        self.q
            .get(&self.env.observe(s))
            .map_or(acts[0], |v| acts[argmax(v)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::builtin_automaton;
    use crate::env::{load_grid, region3_fixture, GridEnv};

    #[test]
    fn update_arithmetic() {
        let rp = RewardParams::default();
        assert!((q_update(0.0, 1.0, 0.0, &rp) - 0.9).abs() < 1e-12);
        assert_eq!(q_update(0.4, 0.0, 0.0, &RewardParams { mu: 1.0, ..rp }), 0.0);
        let full = RewardParams { mu: 1.0, ..rp };
        assert!((q_update(0.3, 1.0, 2.0, &full) - 2.8).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(select_action(&[0.5, 0.5, 0.5], 0.0, &mut rng), 0);
        assert_eq!(select_action(&[0.1, 0.7, 0.7], 0.0, &mut rng), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = SimRng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[select_action(&[0.0, 5.0, 0.0, 0.0], 1.0, &mut rng)] += 1;
        }
        let expected = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 3 degrees of freedom, 0.1% critical value
        assert!(chi2 < 16.27, "{chi2}");
    }

    #[test]
    fn invalid_params_name_the_field() {
        let bad = LearnParams { mu: 1.5, ..Default::default() };
        match bad.validate() {
            Err(LearnError::Config { field, .. }) => assert_eq!(field, "mu"),
            other => panic!("{other:?}"),
        }
        let bad = LearnParams { gamma: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = LearnParams { it_threshold: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn same_seed_same_log() {
        let env = region3_fixture();
        let a = builtin_automaton("fig4_fg_t").unwrap();
        let params = LearnParams { episodes: 5, it_threshold: 200, ..Default::default() };
        let l1 = train(&env, &a, params.clone(), 7).unwrap();
        let l2 = train(&env, &a, params, 7).unwrap();
        assert_eq!(l1.log().records, l2.log().records);
        assert_eq!(l1.q, l2.q);
    }

    #[test]
    fn q_stays_bounded() {
        let env = region3_fixture();
        let a = builtin_automaton("fig3_reach_stay_safe").unwrap();
        let params = LearnParams { episodes: 30, it_threshold: 300, ..Default::default() };
        let l = train(&env, &a, params.clone(), 1).unwrap();
        assert!(l.log().q_min >= 0.0);
        assert!(l.log().q_max <= params.q_bound() + 1e-12);
        assert!(l.log().q_max > 0.0);
    }

    #[test]
    fn unsatisfiable_task_still_yields_policy() {
        // t is walled off
        let text = "slip: 1.0\nabsorbing: t\nstart: 0,0\ni#t\n";
        let env = GridEnv::new(load_grid(text).unwrap()).unwrap();
        let a = builtin_automaton("fig3_reach_stay_safe").unwrap();
        let params = LearnParams { episodes: 10, it_threshold: 50, ..Default::default() };
        let l = train(&env, &a, params, 0).unwrap();
        assert!(l.log().records.iter().all(|r| r.reward == 0.0));
        let pol = l.greedy_policy();
        assert!(pol.action(l.keys[l.initial_index()]).is_some());
    }

    #[test]
    fn myopic_learner_values_one_step_reward() {
        let text = "slip: 1.0\nabsorbing: t\nactions: t = stay\nstart: 0,0\nit\n";
        let env = GridEnv::new(load_grid(text).unwrap()).unwrap();
        let a = builtin_automaton("fig3_reach_stay_safe").unwrap();
        let params = LearnParams { gamma: 0.0, mu: 1.0, episodes: 20, it_threshold: 20, ..Default::default() };
        let l = train(&env, &a, params, 3).unwrap();
        let pol = l.greedy_policy();
        let s0 = l.keys[l.initial_index()];
        assert_eq!(pol.action(s0), Some(ProductAction::Env(1)));
        let right = l.q_value(s0, ProductAction::Env(1)).unwrap();
        assert_eq!(right, 1.0);
    }

    #[test]
    fn sink_policy_evaluates_to_zero() {
        let text = "slip: 1.0\nabsorbing: u\nactions: u = stay\nstart: 0,0\niut\n";
        let env = GridEnv::new(load_grid(text).unwrap()).unwrap();
        let a = builtin_automaton("fig3_reach_stay_safe").unwrap();
        let product = Product::new(&env, &a).unwrap();
        let mut pol = Policy::default();
        pol.map.insert(product.key(product.initial()), ProductAction::Env(1));
        let stats = evaluate_policy(&pol, &env, &a, 50, 20, 0).unwrap();
        assert_eq!(stats.estimate, 0.0);
    }
}
