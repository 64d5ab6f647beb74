//! Exact analysis of enumerable products: MEC decomposition, maximal
//! reachability of accepting MECs, optimal policies and induced chains.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::automata::Ldba;
use crate::env::{EnvError, ExplicitMdp, LabeledEnv};
use crate::graph::{backward_reachable, forward_reachable, tarjan};
use crate::product::{Product, ProductAction, ProductError, ProductKey, ProductState};

pub const MAX_PRODUCT_STATES: usize = 1_000_000;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("product has {states} states, more than the limit of {limit}")]
    TooLarge { states: usize, limit: usize },
    #[error("value iteration did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// A finite MDP with per-state acceptance-set membership (bit `j` of `acc[s]`).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMdp {
    pub rows: Vec<Vec<Vec<(usize, f64)>>>,
    pub acc: Vec<u64>,
    pub num_sets: usize,
}

impl SparseMdp {
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    fn all_sets(&self) -> u64 {
        if self.num_sets >= 64 {
            u64::MAX
        } else {
            (1u64 << self.num_sets) - 1
        }
    }

    fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[s].iter().flatten().map(|x| x.0)
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.num_states()];
        for s in 0..self.num_states() {
            for t in self.successors(s) {
                preds[t].push(s);
            }
        }
        preds
    }

    fn q_value(&self, s: usize, a: usize, v: &[f64]) -> f64 {
        self.rows[s][a].iter().map(|&(t, p)| p * v[t]).sum()
    }
}

/// A maximal end component: its states and, per state, the actions that
/// keep all probability inside it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Mec {
    pub states: Vec<usize>,
    pub actions: Vec<Vec<usize>>,
}

/// Iterative refinement: SCCs under the allowed actions, then drop actions
/// leaving their SCC and states left without actions, until stable.
pub fn mec_decomposition(m: &SparseMdp) -> Vec<Mec> {
    let n = m.num_states();
    let mut allowed: Vec<Vec<usize>> = (0..n).map(|s| (0..m.rows[s].len()).collect()).collect();
    let mut active: Vec<bool> = allowed.iter().map(|a| !a.is_empty()).collect();
    loop {
        let sccs = tarjan(n, Some(&active), |s| {
            allowed[s]
                .iter()
                .flat_map(|&a| m.rows[s][a].iter().map(|x| x.0))
                .collect::<Vec<_>>()
        });
        let mut changed = false;
        for s in 0..n {
            if !active[s] {
                continue;
            }
            let c = sccs.comp[s];
            let before = allowed[s].len();
            allowed[s].retain(|&a| m.rows[s][a].iter().all(|&(t, _)| active[t] && sccs.comp[t] == c));
            changed |= allowed[s].len() != before;
        }
        for s in 0..n {
            if active[s] && allowed[s].is_empty() {
                active[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for s in (0..n).filter(|&s| active[s]) {
                groups.entry(sccs.comp[s]).or_default().push(s);
            }
            let mut out: Vec<Mec> = groups
                .into_values()
                .map(|states| Mec {
                    actions: states.iter().map(|&s| allowed[s].clone()).collect(),
                    states,
                })
                .collect();
            out.sort();
            return out;
        }
    }
}

/// Exhaustive MEC search over all state subsets; for testing on tiny MDPs.
pub fn mec_brute_force(m: &SparseMdp) -> Vec<Mec> {
    let n = m.num_states();
    assert!(n <= 16, "brute force is limited to 16 states");
    let inside = |mask: u32, s: usize, a: usize| m.rows[s][a].iter().all(|&(t, _)| mask & (1 << t) != 0);
    let mut ecs: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&s| mask & (1 << s) != 0).collect();
        let acts: Vec<Vec<usize>> = members
            .iter()
            .map(|&s| (0..m.rows[s].len()).filter(|&a| inside(mask, s, a)).collect())
            .collect();
        if acts.iter().any(Vec::is_empty) {
            continue;
        }
        // strongly connected under the kept actions
        let connected = members.iter().all(|&src| {
            let seen = forward_reachable(n, &[src], |s| {
                let k = members.iter().position(|&x| x == s).unwrap();
                acts[k]
                    .iter()
                    .flat_map(|&a| m.rows[s][a].iter().map(|x| x.0))
                    .collect::<Vec<_>>()
            });
            members.iter().all(|&t| seen[t])
        });
        if connected {
            ecs.push(mask);
        }
    }
    let mut out: Vec<Mec> = ecs
        .iter()
        .filter(|&&e| !ecs.iter().any(|&o| o != e && o & e == e))
        .map(|&mask| {
            let states: Vec<usize> = (0..n).filter(|&s| mask & (1 << s) != 0).collect();
            Mec {
                actions: states
                    .iter()
                    .map(|&s| (0..m.rows[s].len()).filter(|&a| inside(mask, s, a)).collect())
                    .collect(),
                states,
            }
        })
        .collect();
    out.sort();
    out
}

/// MECs meeting every acceptance set.
pub fn accepting_mecs<'a>(mecs: &'a [Mec], m: &SparseMdp) -> Vec<&'a Mec> {
    mecs.iter()
        .filter(|mec| mec.states.iter().fold(0, |acc, &s| acc | m.acc[s]) == m.all_sets())
        .collect()
}

/// Union of the accepting MECs as a state mask.
pub fn amec_target(m: &SparseMdp) -> Vec<bool> {
    let mecs = mec_decomposition(m);
    let mut target = vec![false; m.num_states()];
    for mec in accepting_mecs(&mecs, m) {
        for &s in &mec.states {
            target[s] = true;
        }
    }
    target
}

// states that reach the target with probability 1 under some policy
fn prob1_max(m: &SparseMdp, target: &[bool], can_reach: &[bool]) -> Vec<bool> {
    let n = m.num_states();
    let mut u: Vec<bool> = can_reach.to_vec();
    loop {
        let mut r: Vec<bool> = target.to_vec();
        loop {
            let mut grew = false;
            for s in 0..n {
                if r[s] || !u[s] {
                    continue;
                }
                let ok = m.rows[s].iter().any(|row| {
                    row.iter().all(|&(t, _)| u[t]) && row.iter().any(|&(t, _)| r[t])
                });
                if ok {
                    r[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if r == u {
            return u;
        }
        u = r;
    }
}

/// Maximal probability of reaching `target` from every state. Qualitative
/// precomputation fixes the 0 and 1 states; the rest is solved by
/// Gauss-Seidel sweeps component by component, sinks first.
pub fn max_reach_probability(m: &SparseMdp, target: &[bool], tol: f64) -> Result<Vec<f64>, OracleError> {
    let n = m.num_states();
    let preds = m.predecessors();
    let can_reach = backward_reachable(n, &preds, target);
    let one = prob1_max(m, target, &can_reach);
    let mut v: Vec<f64> = one.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let open: Vec<bool> = (0..n).map(|s| can_reach[s] && !one[s]).collect();
    let one = one.clone();
    let sccs = tarjan(n, Some(&open), |s| m.successors(s).collect::<Vec<_>>());
    for comp in sccs.members() {
        let mut sweeps = 0;
        loop {
            let mut delta: f64 = 0.0;
            for &s in &comp {
                let best = (0..m.rows[s].len())
                    .map(|a| m.q_value(s, a, &v))
                    .fold(0.0, f64::max);
                delta = delta.max((best - v[s]).abs());
                v[s] = best;
            }
            sweeps += 1;
            if delta < tol || comp.len() == 1 && !comp_has_self_loop(m, comp[0]) {
                break;
            }
            if sweeps >= MAX_SWEEPS {
                return Err(OracleError::NonConvergence { sweeps });
            }
        }
    }
    let mut policy = vec![0; n];
    rank_policy(m, &v, one, &open, &mut policy);
    polish(m, &mut policy, &open, &mut v);
    Ok(v)
}

// Layered choice towards the `ranked` states: an open state picks, among the
// actions with positive probability of entering an already ranked state, the
// one with the best value under `v`. Every ranked open state then leaves the
// open region with positive probability, so the policy has no closed class
// inside it.
fn rank_policy(m: &SparseMdp, v: &[f64], mut ranked: Vec<bool>, open: &[bool], policy: &mut [usize]) {
    let n = m.num_states();
    loop {
        let mut newly = Vec::new();
        for s in (0..n).filter(|&s| open[s] && !ranked[s]) {
            let best = (0..m.rows[s].len())
                .filter(|&a| m.rows[s][a].iter().any(|&(t, _)| ranked[t]))
                .map(|a| (a, m.q_value(s, a, v)))
                .fold(None, |acc: Option<(usize, f64)>, (a, q)| match acc {
                    Some((_, bq)) if bq >= q => acc,
                    _ => Some((a, q)),
                });
            if let Some((a, _)) = best {
                policy[s] = a;
                newly.push(s);
            }
        }
        if newly.is_empty() {
            break;
        }
        for s in newly {
            ranked[s] = true;
        }
    }
}

// Exact value of `policy` on the open states, the others being fixed in `v`.
fn evaluate_policy(m: &SparseMdp, policy: &[usize], open: &[bool], v: &mut [f64]) {
    let n = m.num_states();
    let row = |s: usize| -> &[(usize, f64)] { m.rows[s].get(policy[s]).map_or(&[], Vec::as_slice) };
    let sccs = tarjan(n, Some(open), |s| row(s).iter().map(|x| x.0).collect::<Vec<_>>());
    solve_transient(&sccs.members(), &row, v);
}

// Policy iteration on the open states. A switch needs a strict gain, so a
// closed class of the new policy would contain no switched state, and the
// open region stays transient; values only go up.
fn polish(m: &SparseMdp, policy: &mut [usize], open: &[bool], v: &mut [f64]) {
    loop {
        evaluate_policy(m, policy, open, v);
        let mut changed = false;
        for s in (0..m.num_states()).filter(|&s| open[s]) {
            let (a, q) = (0..m.rows[s].len())
                .map(|a| (a, m.q_value(s, a, v)))
                .fold((policy[s], v[s]), |acc, x| if x.1 > acc.1 { x } else { acc });
            if q > v[s] + 1e-12 {
                policy[s] = a;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

// Solves the linear system of a chain on components listed sinks first,
// every state outside them already carrying its value.
fn solve_transient<'a>(members: &[Vec<usize>], row: &impl Fn(usize) -> &'a [(usize, f64)], v: &mut [f64]) {
    for states in members {
        if let [s] = states[..] {
            // a transient singleton may still loop on itself
            let (stay, out) = row(s).iter().fold((0.0, 0.0), |(stay, out), &(t, p)| {
                if t == s {
                    (stay + p, out)
                } else {
                    (stay, out + p * v[t])
                }
            });
            v[s] = if stay < 1.0 { out / (1.0 - stay) } else { 0.0 };
        } else if states.len() <= DENSE_LIMIT {
            solve_component(states, row, v);
        } else {
            for _ in 0..MAX_SWEEPS {
                let mut delta: f64 = 0.0;
                for &s in states {
                    let x: f64 = row(s).iter().map(|&(t, p)| p * v[t]).sum();
                    delta = delta.max((x - v[s]).abs());
                    v[s] = x;
                }
                if delta < 1e-15 {
                    break;
                }
            }
        }
    }
}

fn comp_has_self_loop(m: &SparseMdp, s: usize) -> bool {
    m.successors(s).any(|t| t == s)
}

/// Plain synchronous value iteration from zero, returning every iterate.
pub fn reach_iterates(m: &SparseMdp, target: &[bool], sweeps: usize) -> Vec<Vec<f64>> {
    let n = m.num_states();
    let mut v: Vec<f64> = (0..n).map(|s| if target[s] { 1.0 } else { 0.0 }).collect();
    let mut out = vec![v.clone()];
    for _ in 0..sweeps {
        v = (0..n)
            .map(|s| {
                if target[s] {
                    1.0
                } else {
                    (0..m.rows[s].len())
                        .map(|a| m.q_value(s, a, &v))
                        .fold(0.0, f64::max)
                }
            })
            .collect();
        out.push(v.clone());
    }
    out
}

// Attractor towards `goal` inside a MEC: for each member not in the goal, the
// first allowed action with positive probability of getting closer.
fn attractor(m: &SparseMdp, mec: &Mec, goal: &[bool], choice: &mut BTreeMap<usize, usize>) {
    let mut ranked: Vec<bool> = vec![false; m.num_states()];
    for &s in &mec.states {
        if goal[s] {
            ranked[s] = true;
        }
    }
    loop {
        let mut newly = Vec::new();
        for (k, &s) in mec.states.iter().enumerate() {
            if ranked[s] {
                continue;
            }
            if let Some(&a) = mec.actions[k]
                .iter()
                .find(|&&a| m.rows[s][a].iter().any(|&(t, _)| ranked[t]))
            {
                choice.insert(s, a);
                newly.push(s);
            }
        }
        if newly.is_empty() {
            break;
        }
        for s in newly {
            ranked[s] = true;
        }
    }
}

/// Optimal policy from maximal reachability values of the accepting MECs.
/// Outside accepting MECs an optimal action is chosen that moves closer to
/// them; inside, a state in set `F_j` heads for `F_{j+1}` and any other
/// state for `F_1`.
pub fn optimal_policy_from_values(m: &SparseMdp, v: &[f64]) -> Vec<usize> {
    let n = m.num_states();
    let mecs = mec_decomposition(m);
    let amecs = accepting_mecs(&mecs, m);
    let mut policy = vec![0usize; n];
    let mut in_target = vec![false; n];
    for mec in &amecs {
        let mut choice: BTreeMap<usize, usize> = BTreeMap::new();
        for j in 0..m.num_sets.max(1) {
            let goal: Vec<bool> = (0..n).map(|s| m.acc[s] & (1 << j) != 0).collect();
            let mut toward = BTreeMap::new();
            attractor(m, mec, &goal, &mut toward);
            for (k, &s) in mec.states.iter().enumerate() {
                let own = (0..m.num_sets).find(|&i| m.acc[s] & (1 << i) != 0);
                let wanted = own.map_or(0, |i| (i + 1) % m.num_sets.max(1));
                if wanted == j {
                    let a = toward.get(&s).copied().unwrap_or(mec.actions[k][0]);
                    choice.insert(s, a);
                }
            }
        }
        for (s, a) in choice {
            policy[s] = a;
            in_target[s] = true;
        }
    }
    // head for the accepting MECs, then repair near-ties exactly: choosing
    // any action within a tolerance of the best can leak a little mass on
    // every step and so lose it all
    let open: Vec<bool> = (0..n).map(|s| !in_target[s] && v[s] > 0.0).collect();
    rank_policy(m, v, in_target, &open, &mut policy);
    let mut w: Vec<f64> = (0..n).map(|s| if open[s] { v[s] } else { 0.0 }).collect();
    for (s, x) in w.iter_mut().enumerate() {
        if !open[s] && v[s] > 0.0 {
            *x = 1.0;
        }
    }
    polish(m, &mut policy, &open, &mut w);
    policy
}

// transient components up to this size are solved by elimination
const DENSE_LIMIT: usize = 2000;

// Solves v = P v + b on one transient component, b collecting the mass that
// leaves it.
fn solve_component<'a>(states: &[usize], row: &impl Fn(usize) -> &'a [(usize, f64)], v: &mut [f64]) {
    let k = states.len();
    let pos: BTreeMap<usize, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for (i, &s) in states.iter().enumerate() {
        for &(t, p) in row(s) {
            match pos.get(&t) {
                Some(&j) => a[(i, j)] -= p,
                None => b[i] += p * v[t],
            }
        }
    }
    // I - P is nonsingular on a transient component
    let x = a.lu().solve(&b).expect("transient component");
    for (i, &s) in states.iter().enumerate() {
        v[s] = x[i].clamp(0.0, 1.0);
    }
}

/// Decomposition of the chain a policy induces from `initial`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub recurrent: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
    pub transient: Vec<usize>,
    /// Probability of absorption into recurrent classes meeting every set.
    pub probability: f64,
    /// Largest number of acceptance sets met by one recurrent class.
    pub closeness: usize,
    /// Absorption probability from every state (0 outside the reachable part).
    pub values: Vec<f64>,
}

pub fn chain_analysis(policy: &[usize], m: &SparseMdp, initial: usize) -> ChainReport {
    let n = m.num_states();
    let row = |s: usize| -> &[(usize, f64)] { m.rows[s].get(policy[s]).map_or(&[], Vec::as_slice) };
    let reach = forward_reachable(n, &[initial], |s| row(s).iter().map(|x| x.0).collect::<Vec<_>>());
    let sccs = tarjan(n, Some(&reach), |s| row(s).iter().map(|x| x.0).collect::<Vec<_>>());
    let members = sccs.members();
    let mut recurrent = Vec::new();
    let mut accepting = Vec::new();
    let mut transient = Vec::new();
    let mut closeness = 0;
    let mut v = vec![0.0; n];
    let mut bottom = vec![false; sccs.count];
    for (c, states) in members.iter().enumerate() {
        let closed = states
            .iter()
            .all(|&s| !row(s).is_empty() && row(s).iter().all(|&(t, _)| sccs.comp[t] == c));
        if closed {
            bottom[c] = true;
            let sets = states.iter().fold(0u64, |acc, &s| acc | m.acc[s]);
            let ok = sets == m.all_sets();
            closeness = closeness.max(sets.count_ones() as usize);
            if ok {
                for &s in states {
                    v[s] = 1.0;
                }
            }
            recurrent.push(states.clone());
            accepting.push(ok);
        } else {
            transient.extend(states.iter().copied());
        }
    }
    // qualitative part: states that cannot reach a rejecting class are won
    // surely, states that cannot reach an accepting one are lost
    let mut preds = vec![Vec::new(); n];
    for s in (0..n).filter(|&s| reach[s]) {
        for &(t, _) in row(s) {
            preds[t].push(s);
        }
    }
    let mut good = vec![false; n];
    let mut bad = vec![false; n];
    for (class, &ok) in recurrent.iter().zip(&accepting) {
        for &s in class {
            if ok {
                good[s] = true;
            } else {
                bad[s] = true;
            }
        }
    }
    // a state without successors is lost as well
    for &s in &transient {
        bad[s] |= row(s).is_empty();
    }
    let can_win = backward_reachable(n, &preds, &good);
    let can_fail = backward_reachable(n, &preds, &bad);
    let mut open = vec![false; n];
    for &s in &transient {
        if !can_fail[s] && can_win[s] {
            v[s] = 1.0;
        } else if can_win[s] {
            open[s] = true;
        }
    }
    // components are numbered sinks first, so every successor component is
    // solved before its predecessors
    let open: Vec<Vec<usize>> = members.into_iter().filter(|c| open[c[0]]).collect();
    solve_transient(&open, &row, &mut v);
    transient.sort_unstable();
    recurrent.sort();
    ChainReport {
        probability: v[initial],
        recurrent,
        accepting,
        transient,
        closeness,
        values: v,
    }
}

/// Largest closeness score over all deterministic memoryless policies,
/// by enumeration. Only for tiny models.
pub fn max_closeness_by_enumeration(m: &SparseMdp, initial: usize) -> usize {
    let n = m.num_states();
    let total: f64 = m.rows.iter().map(|r| (r.len().max(1) as f64).log2()).sum();
    assert!(total <= 20.0, "too many policies to enumerate");
    let mut policy = vec![0usize; n];
    let mut best = 0;
    loop {
        best = best.max(chain_analysis(&policy, m, initial).closeness);
        // mixed-radix increment
        let mut s = 0;
        loop {
            if s == n {
                return best;
            }
            policy[s] += 1;
            if policy[s] < m.rows[s].len() {
                break;
            }
            policy[s] = 0;
            s += 1;
        }
    }
}

/// Fully enumerated product of an explicit MDP with an LDBA. Pair `(s, q)`
/// has index `s * |Q| + q`; a single reject state comes last.
#[derive(Debug, Clone)]
pub struct ExplicitProduct {
    pub mdp: SparseMdp,
    pub states: Vec<ProductState>,
    pub keys: Vec<ProductKey>,
    pub actions: Vec<Vec<ProductAction>>,
    pub initial: usize,
    pub reject: usize,
    num_aut: usize,
}

impl ExplicitProduct {
    /// Number of `(s, q)` pairs, the reject state excluded.
    pub fn product_states(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, p: ProductState) -> usize {
        if p.aut >= self.num_aut {
            self.reject
        } else {
            p.env * self.num_aut + p.aut
        }
    }

    /// Maps a policy over learner keys to product action indices; keys the
    /// learner never saw fall back to the first action.
    pub fn policy_from_keys(&self, lookup: impl Fn(ProductKey) -> Option<ProductAction>) -> Vec<usize> {
        (0..self.mdp.num_states())
            .map(|i| {
                if i == self.reject {
                    return 0;
                }
                lookup(self.keys[i])
                    .and_then(|a| self.actions[i].iter().position(|&x| x == a))
                    .unwrap_or(0)
            })
            .collect()
    }
}

pub fn build_product(mdp: &ExplicitMdp, ldba: &Ldba) -> Result<ExplicitProduct, OracleError> {
    let nq = ldba.num_states();
    let pairs = mdp.num_states() * nq;
    if pairs > MAX_PRODUCT_STATES {
        return Err(OracleError::TooLarge {
            states: pairs,
            limit: MAX_PRODUCT_STATES,
        });
    }
    let prod = Product::new(mdp, ldba)?;
    let reject = pairs;
    let index = |p: ProductState| if p.aut >= nq { reject } else { p.env * nq + p.aut };
    let mut states = Vec::with_capacity(pairs);
    let mut keys = Vec::with_capacity(pairs);
    let mut actions = Vec::with_capacity(pairs + 1);
    let mut rows = Vec::with_capacity(pairs + 1);
    let mut acc = Vec::with_capacity(pairs + 1);
    for s in 0..mdp.num_states() {
        for q in 0..nq {
            let p = ProductState { env: s, aut: q };
            let acts = prod.available_actions(p);
            let mut state_rows = Vec::with_capacity(acts.len());
            for &a in &acts {
                let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
                for (t, pr) in prod.law(p, a)? {
                    if pr > 0.0 {
                        *merged.entry(index(t)).or_default() += pr;
                    }
                }
                state_rows.push(merged.into_iter().collect());
            }
            states.push(p);
            keys.push(prod.key(p));
            actions.push(acts);
            rows.push(state_rows);
            acc.push(
                (0..ldba.num_acceptance_sets())
                    .filter(|&j| ldba.in_set(j, q))
                    .fold(0u64, |m, j| m | (1 << j)),
            );
        }
    }
    actions.push(vec![ProductAction::Stay]);
    rows.push(vec![vec![(reject, 1.0)]]);
    acc.push(0);
    Ok(ExplicitProduct {
        mdp: SparseMdp {
            rows,
            acc,
            num_sets: ldba.num_acceptance_sets(),
        },
        states,
        keys,
        actions,
        initial: index(prod.initial()),
        reject,
        num_aut: nq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateValue {
    pub env_state: usize,
    pub aut_state: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyEntry {
    pub env_state: usize,
    pub aut_state: String,
    pub action: String,
}

/// Everything the oracle computes for one fixture and property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub value_at_initial: f64,
    pub product_states: usize,
    pub mec_count: usize,
    pub amec_count: usize,
    pub mecs: Vec<Vec<usize>>,
    pub amecs: Vec<Vec<usize>>,
    pub policy: Vec<PolicyEntry>,
    pub values: Vec<StateValue>,
    /// Satisfaction probability of the extracted policy by chain analysis.
    pub policy_probability: f64,
}

/// Exact solution of a product: values, optimal policy and its chain.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub product: ExplicitProduct,
    pub mecs: Vec<Mec>,
    pub target: Vec<bool>,
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub chain: ChainReport,
}

pub fn solve(product: ExplicitProduct, tol: f64) -> Result<OracleSolution, OracleError> {
    let mecs = mec_decomposition(&product.mdp);
    let mut target = vec![false; product.mdp.num_states()];
    for mec in accepting_mecs(&mecs, &product.mdp) {
        for &s in &mec.states {
            target[s] = true;
        }
    }
    let values = max_reach_probability(&product.mdp, &target, tol)?;
    let policy = optimal_policy_from_values(&product.mdp, &values);
    let chain = chain_analysis(&policy, &product.mdp, product.initial);
    Ok(OracleSolution {
        product,
        mecs,
        target,
        values,
        policy,
        chain,
    })
}

impl OracleSolution {
    pub fn value_at_initial(&self) -> f64 {
        self.values[self.product.initial]
    }

    pub fn report(&self, mdp: &ExplicitMdp, ldba: &Ldba) -> OracleReport {
        let p = &self.product;
        let amecs = accepting_mecs(&self.mecs, &p.mdp);
        let reachable = forward_reachable(p.mdp.num_states(), &[p.initial], |s| p.mdp.successors(s).collect::<Vec<_>>());
        let mut policy = Vec::new();
        let mut values = Vec::new();
        for (i, ps) in p.states.iter().enumerate() {
            if !reachable[i] {
                continue;
            }
            let env_state = mdp.env_ids[ps.env];
            let aut_state = ldba.name(ps.aut).to_string();
            let action = match p.actions[i].get(self.policy[i]) {
                Some(ProductAction::Env(a)) => mdp.action_name(*a),
                Some(other) => other.to_string(),
                None => String::new(),
            };
            policy.push(PolicyEntry {
                env_state,
                aut_state: aut_state.clone(),
                action,
            });
            values.push(StateValue {
                env_state,
                aut_state,
                value: self.values[i],
            });
        }
        OracleReport {
            value_at_initial: self.value_at_initial(),
            product_states: p.product_states(),
            mec_count: self.mecs.len(),
            amec_count: amecs.len(),
            mecs: self.mecs.iter().map(|m| m.states.clone()).collect(),
            amecs: amecs.iter().map(|m| m.states.clone()).collect(),
            policy,
            values,
            policy_probability: self.chain.probability,
        }
    }
}
