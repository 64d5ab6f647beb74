//! Probability of satisfying the property: a maximum-likelihood model from
//! visit counts, asynchronous value iteration and a standalone fixpoint.

use thiserror::Error;

use crate::oracle::{amec_target, max_reach_probability, OracleError, SparseMdp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PspError {
    #[error("fixpoint iteration did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
    #[error("tolerance must be positive")]
    InvalidTolerance,
}

/// Visit counts over dense product-state indices. `visits[s][a]` starts at 1
/// and `successors[s][a]` lists `(s', count)` pairs in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountTables {
    pub visits: Vec<Vec<u64>>,
    pub successors: Vec<Vec<Vec<(usize, u64)>>>,
}

impl CountTables {
    pub fn add_state(&mut self, actions: usize) {
        self.visits.push(vec![1; actions]);
        self.successors.push(vec![Vec::new(); actions]);
    }

    pub fn num_states(&self) -> usize {
        self.visits.len()
    }

    /// Increments the pair count; the first real visit sets the successor
    /// count straight to 2.
    pub fn record_transition(&mut self, s: usize, a: usize, next: usize) {
        self.visits[s][a] += 1;
        let first = self.visits[s][a] == 2;
        let list = &mut self.successors[s][a];
        match list.iter_mut().find(|x| x.0 == next) {
            Some(entry) if first => entry.1 = 2,
            Some(entry) => entry.1 += 1,
            None => list.push((next, if first { 2 } else { 1 })),
        }
    }

    pub fn tried(&self, s: usize, a: usize) -> bool {
        self.visits[s][a] > 1
    }

    /// `P̄(s, a, ·) = ψ / Ψ` over observed successors.
    pub fn estimate(&self, s: usize, a: usize) -> Vec<(usize, f64)> {
        let total = self.visits[s][a] as f64;
        self.successors[s][a]
            .iter()
            .map(|&(t, c)| (t, c as f64 / total))
            .collect()
    }

    /// The estimated model as a sparse MDP. Untried actions are left out.
    pub fn estimated_model(&self, acc: Vec<u64>, num_sets: usize) -> SparseMdp {
        let rows = (0..self.num_states())
            .map(|s| {
                (0..self.visits[s].len())
                    .filter(|&a| self.tried(s, a))
                    .map(|a| self.estimate(s, a))
                    .collect()
            })
            .collect();
        SparseMdp { rows, acc, num_sets }
    }
}

/// PSP values per dense state. Pinned states (SINKs and reject) stay at 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PspTable {
    pub values: Vec<f64>,
    pub pinned: Vec<bool>,
}

impl PspTable {
    pub fn add_state(&mut self, sink: bool) {
        self.values.push(if sink { 0.0 } else { 1.0 });
        self.pinned.push(sink);
    }

    pub fn get(&self, s: usize) -> f64 {
        self.values[s]
    }

    /// One in-place Bellman backup at `s`. An action never tried counts with
    /// the current value of `s`.
    pub fn avi_update(&mut self, counts: &CountTables, s: usize) {
        if self.pinned[s] {
            return;
        }
        let current = self.values[s];
        let best = (0..counts.visits[s].len())
            .map(|a| {
                if counts.tried(s, a) {
                    let total = counts.visits[s][a] as f64;
                    counts.successors[s][a]
                        .iter()
                        .map(|&(t, c)| c as f64 / total * self.values[t])
                        .sum()
                } else {
                    current
                }
            })
            .fold(0.0, f64::max);
        self.values[s] = best.min(1.0);
    }
}

/// One synchronous application of the Bellman operator.
pub fn bellman(model: &SparseMdp, pinned: &[bool], v: &[f64]) -> Vec<f64> {
    (0..model.num_states())
        .map(|s| {
            if pinned[s] || model.rows[s].is_empty() {
                return if pinned[s] { 0.0 } else { v[s] };
            }
            model.rows[s]
                .iter()
                .map(|row| row.iter().map(|&(t, p)| p * v[t]).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// The PSP fixpoint of a model. Iteration runs upwards from 0 with the
/// accepting MECs fixed at 1; from the optimistic all-ones start the operator
/// also has spurious fixpoints on non-accepting end components. Unpinned
/// states without any action keep the optimistic value 1.
pub fn psp_fixed_point(model: &SparseMdp, pinned: &[bool], tol: f64) -> Result<Vec<f64>, PspError> {
    if tol.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(PspError::InvalidTolerance);
    }
    let mut m = model.clone();
    for (s, &p) in pinned.iter().enumerate() {
        if p {
            m.rows[s].clear();
        }
    }
    let mut target = amec_target(&m);
    for s in 0..m.num_states() {
        if m.rows[s].is_empty() && !pinned[s] {
            target[s] = true;
        }
    }
    max_reach_probability(&m, &target, tol).map_err(|e| match e {
        OracleError::NonConvergence { sweeps } => PspError::NonConvergence { sweeps },
        other => unreachable!("{other}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_visit_sets_two() {
        let mut c = CountTables::default();
        c.add_state(1);
        c.add_state(1);
        c.add_state(1);
        c.record_transition(0, 0, 1);
        assert_eq!(c.visits[0][0], 2);
        assert_eq!(c.estimate(0, 0), vec![(1, 1.0)]);
        c.record_transition(0, 0, 1);
        assert_eq!(c.visits[0][0], 3);
        assert_eq!(c.estimate(0, 0), vec![(1, 1.0)]);
        let mut d = CountTables::default();
        for _ in 0..3 {
            d.add_state(1);
        }
        d.record_transition(0, 0, 1);
        d.record_transition(0, 0, 2);
        let est = d.estimate(0, 0);
        assert!((est[1].1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((est.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toy_chain_backup() {
        // state 0 -> goal (1) with 0.85, sink (2) with 0.15
        let mut c = CountTables::default();
        let mut psp = PspTable::default();
        for sink in [false, false, true] {
            c.add_state(1);
            psp.add_state(sink);
        }
        c.visits[0][0] = 100;
        c.successors[0][0] = vec![(1, 85), (2, 15)];
        psp.avi_update(&c, 0);
        assert!((psp.get(0) - 0.85).abs() < 1e-12);
        // pinned states never move
        psp.avi_update(&c, 2);
        assert_eq!(psp.get(2), 0.0);
    }

    #[test]
    fn untried_actions_keep_value() {
        let mut c = CountTables::default();
        let mut psp = PspTable::default();
        c.add_state(2);
        c.add_state(1);
        psp.add_state(false);
        psp.add_state(true);
        c.record_transition(0, 0, 1);
        psp.avi_update(&c, 0);
        assert_eq!(psp.get(0), 1.0);
    }

    #[test]
    fn fixpoint_ignores_non_accepting_loops() {
        // 0 can loop on itself or go to 1 (accepting, absorbing) w.p. 0.5 and
        // to 2 (non-accepting, absorbing) otherwise
        let m = SparseMdp {
            rows: vec![
                vec![vec![(0, 1.0)], vec![(1, 0.5), (2, 0.5)]],
                vec![vec![(1, 1.0)]],
                vec![vec![(2, 1.0)]],
            ],
            acc: vec![0, 1, 0],
            num_sets: 1,
        };
        let v = psp_fixed_point(&m, &[false; 3], 1e-10).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-12);
        assert_eq!(v[2], 0.0);
        // the all-ones vector is also a fixpoint of the bare operator
        let ones = vec![1.0, 1.0, 1.0];
        assert_eq!(bellman(&m, &[false; 3], &ones), ones);
        assert_eq!(psp_fixed_point(&m, &[false; 3], 0.0), Err(PspError::InvalidTolerance));
    }

    #[test]
    fn unreachable_acceptance_gives_zero() {
        let m = SparseMdp {
            rows: vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]], vec![vec![(2, 1.0)]]],
            acc: vec![0, 0, 1],
            num_sets: 1,
        };
        let v = psp_fixed_point(&m, &[false; 3], 1e-10).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[2], 1.0);
    }
}
