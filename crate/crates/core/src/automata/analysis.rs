use super::Ldba;
use crate::graph::{forward_reachable, tarjan};
use crate::ltl::LassoWord;

/// States of non-accepting, strongly connected components that no run can
/// leave except towards the implicit reject state. The reject state itself is
/// not included.
pub fn find_sinks(a: &Ldba) -> Vec<usize> {
    let n = a.num_states();
    let reject = a.reject();
    let sccs = tarjan(n + 1, None, |q| a.successors(q));
    let mut sinks = Vec::new();
    for members in sccs.members() {
        if members.contains(&reject) {
            continue;
        }
        let comp = sccs.comp[members[0]];
        let closed = members.iter().all(|&q| {
            a.successors(q)
                .into_iter()
                .all(|t| t == reject || sccs.comp[t] == comp)
        });
        let accepting = (0..a.num_acceptance_sets())
            .all(|j| members.iter().any(|&q| a.in_set(j, q)));
        if closed && !accepting {
            sinks.extend(members);
        }
    }
    sinks.sort_unstable();
    sinks
}

/// The accepting frontier: acceptance-set states still owed a visit in the
/// current round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrontierSet {
    bits: Vec<u64>,
}

impl FrontierSet {
    pub fn from_states(states: &[usize], capacity: usize) -> Self {
        let mut bits = vec![0u64; capacity.div_ceil(64).max(1)];
        for &q in states {
            bits[q / 64] |= 1 << (q % 64);
        }
        FrontierSet { bits }
    }

    /// The initial frontier: the union of all acceptance sets.
    pub fn initial(a: &Ldba) -> Self {
        FrontierSet::from_states(&a.accepting_union(), a.num_states() + 1)
    }

    pub fn contains(&self, q: usize) -> bool {
        self.bits.get(q / 64).is_some_and(|w| w & (1 << (q % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn states(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &w) in self.bits.iter().enumerate() {
            for b in 0..64 {
                if w & (1 << b) != 0 {
                    out.push(i * 64 + b);
                }
            }
        }
        out
    }

    fn equals_set(&self, set: &[usize]) -> bool {
        *self == FrontierSet::from_states(set, self.bits.len() * 64)
    }

    fn remove_all(&mut self, set: &[usize]) {
        for &q in set {
            self.bits[q / 64] &= !(1 << (q % 64));
        }
    }
}

/// `Acc(q, 𝔸)`: for each acceptance set containing `q` (in index order),
/// drop it from the frontier, starting a new round from the union of all sets
/// when the frontier was exactly that set. An empty result is reset to the
/// union of all sets.
pub fn accepting_frontier(q: usize, frontier: &FrontierSet, acceptance: &[Vec<usize>]) -> FrontierSet {
    let mut out = frontier.clone();
    let cap = frontier.bits.len() * 64;
    let mut union: Vec<usize> = acceptance.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    for set in acceptance {
        if set.binary_search(&q).is_err() {
            continue;
        }
        if out.equals_set(set) {
            out = FrontierSet::from_states(&union, cap);
            out.remove_all(set);
        } else {
            out.remove_all(set);
        }
    }
    if out.is_empty() {
        out = FrontierSet::from_states(&union, cap);
    }
    out
}

/// Decides whether some run of `a` on the lasso visits every acceptance set
/// infinitely often.
pub fn accepts_lasso(a: &Ldba, w: &LassoWord) -> bool {
    let n = a.num_states();
    let positions = w.positions();
    let node = |i: usize, q: usize| i * n + q;
    let succ = |v: usize| -> Vec<usize> {
        let (i, q) = (v / n, v % n);
        let mut out: Vec<usize> = a.eps_successors(q).iter().map(|&t| node(i, t)).collect();
        if let Some(t) = a.transition(q, w.letter_at(i)) {
            out.push(node(w.next_position(i), t));
        }
        out
    };
    let total = positions * n;
    let reach = forward_reachable(total, &[node(0, a.initial())], succ);
    let sccs = tarjan(total, Some(&reach), succ);
    let mut members = vec![Vec::new(); sccs.count];
    for v in 0..total {
        if reach[v] {
            members[sccs.comp[v]].push(v);
        }
    }
    members.iter().any(|m| {
        let nontrivial = m.len() > 1 || succ(m[0]).contains(&m[0]);
        nontrivial
            && (0..a.num_acceptance_sets()).all(|j| m.iter().any(|&v| a.in_set(j, v % n)))
    })
}
