//! Limit-deterministic Büchi automata: representation, validation, file
//! format, hand-encoded fixtures, a fragment translator, and the analyses the
//! learner relies on (sinks, accepting frontier, lasso acceptance).

mod analysis;
mod builtin;
mod format;
mod translate;

use thiserror::Error;

use crate::label::{Alphabet, AlphabetError, Letter};

pub use analysis::{accepting_frontier, accepts_lasso, find_sinks, FrontierSet};
pub use builtin::{builtin_automaton, builtin_reference, BuiltinReference, BUILTIN_NAMES};
pub use format::{load_automaton, save_automaton};
pub use translate::translate_fragment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("not limit-deterministic at state `{state}` on letter {letter}: {reason}")]
    NotLimitDeterministic {
        state: String,
        letter: String,
        reason: String,
    },
    #[error("acceptance set F{set} contains `{state}`, which is not in partD")]
    AcceptanceOutsideQD { set: usize, state: String },
    #[error("state `{state}` is in partD but has an epsilon transition to `{target}`")]
    EpsilonInAccepting { state: String, target: String },
    #[error("automaton needs at least one acceptance set")]
    NoAcceptance,
    #[error("bad partition: {0}")]
    Partition(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported LTL fragment: `{0}`")]
    UnsupportedFragment(String),
    #[error("unknown builtin automaton `{0}`")]
    UnknownName(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

/// Generalized Büchi automaton with a `partN`/`partD` split. Missing reading
/// transitions lead to an implicit absorbing reject state whose index is
/// [`Ldba::reject`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ldba {
    alphabet: Alphabet,
    names: Vec<String>,
    initial: usize,
    delta: Vec<Vec<Option<usize>>>,
    eps: Vec<Vec<usize>>,
    acceptance: Vec<Vec<usize>>,
    in_d: Vec<bool>,
}

/// Outcome of [`validate_ldba`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionReport {
    pub q_n: Vec<usize>,
    pub q_d: Vec<usize>,
    /// States of `partD` reachable from the initial state.
    pub reachable_d: Vec<usize>,
}

impl Ldba {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of declared states (the implicit reject state is not counted).
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn reject(&self) -> usize {
        self.names.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn name(&self, q: usize) -> &str {
        self.names.get(q).map(String::as_str).unwrap_or("reject")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Successor on a letter; missing transitions and the reject state go to reject.
    pub fn step(&self, q: usize, letter: Letter) -> usize {
        if q >= self.names.len() {
            return self.reject();
        }
        self.delta[q][letter.index()].unwrap_or(self.reject())
    }

    pub fn transition(&self, q: usize, letter: Letter) -> Option<usize> {
        self.delta.get(q).and_then(|row| row[letter.index()])
    }

    pub fn eps_successors(&self, q: usize) -> &[usize] {
        self.eps.get(q).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn acceptance(&self) -> &[Vec<usize>] {
        &self.acceptance
    }

    pub fn num_acceptance_sets(&self) -> usize {
        self.acceptance.len()
    }

    pub fn in_set(&self, j: usize, q: usize) -> bool {
        self.acceptance[j].binary_search(&q).is_ok()
    }

    /// Union of all acceptance sets, sorted.
    pub fn accepting_union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.acceptance.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn in_d(&self, q: usize) -> bool {
        self.in_d.get(q).copied().unwrap_or(false)
    }

    /// All automaton successors of `q` (reading and epsilon), including reject.
    pub fn successors(&self, q: usize) -> Vec<usize> {
        if q >= self.names.len() {
            return vec![q];
        }
        let mut out: Vec<usize> = self.delta[q].iter().map(|t| t.unwrap_or(self.reject())).collect();
        out.extend(&self.eps[q]);
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Incremental constructor; [`LdbaBuilder::build`] enforces every invariant.
#[derive(Debug, Clone)]
pub struct LdbaBuilder {
    alphabet: Alphabet,
    names: Vec<String>,
    initial: usize,
    trans: Vec<(usize, Letter, usize)>,
    eps: Vec<(usize, usize)>,
    acceptance: Vec<Vec<usize>>,
    in_d: Vec<Option<bool>>,
}

impl LdbaBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        LdbaBuilder {
            alphabet,
            names: Vec::new(),
            initial: 0,
            trans: Vec::new(),
            eps: Vec::new(),
            acceptance: Vec::new(),
            in_d: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.in_d.push(None);
        self.names.len() - 1
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initial = q;
    }

    pub fn set_part(&mut self, q: usize, deterministic: bool) {
        self.in_d[q] = Some(deterministic);
    }

    pub fn part(&self, q: usize) -> Option<bool> {
        self.in_d[q]
    }

    pub fn add_transition(&mut self, from: usize, letter: Letter, to: usize) {
        self.trans.push((from, letter, to));
    }

    /// Adds a transition on every letter satisfying `pred`.
    pub fn add_transitions(&mut self, from: usize, to: usize, mut pred: impl FnMut(Letter) -> bool) {
        let letters: Vec<Letter> = self.alphabet.letters().filter(|&l| pred(l)).collect();
        for l in letters {
            self.trans.push((from, l, to));
        }
    }

    pub fn add_eps(&mut self, from: usize, to: usize) {
        self.eps.push((from, to));
    }

    pub fn add_acceptance_set(&mut self, states: Vec<usize>) {
        self.acceptance.push(states);
    }

    pub fn build(self) -> Result<Ldba, AutomatonError> {
        let n = self.names.len();
        if n == 0 {
            return Err(AutomatonError::Partition("automaton has no states".into()));
        }
        for (i, name) in self.names.iter().enumerate() {
            if self.names[..i].contains(name) {
                return Err(AutomatonError::Partition(format!("duplicate state `{name}`")));
            }
            if name == "reject" {
                return Err(AutomatonError::Partition("`reject` is a reserved state name".into()));
            }
        }
        if self.initial >= n {
            return Err(AutomatonError::Partition("initial state out of range".into()));
        }
        let mut in_d = Vec::with_capacity(n);
        for (q, part) in self.in_d.iter().enumerate() {
            match part {
                Some(d) => in_d.push(*d),
                None => {
                    return Err(AutomatonError::Partition(format!(
                        "state `{}` is in neither partN nor partD",
                        self.names[q]
                    )))
                }
            }
        }
        let letters = self.alphabet.letter_count();
        let mut delta = vec![vec![None; letters]; n];
        for &(from, letter, to) in &self.trans {
            let slot = &mut delta[from][letter.index()];
            match *slot {
                Some(prev) if prev != to => {
                    return Err(AutomatonError::NotLimitDeterministic {
                        state: self.names[from].clone(),
                        letter: self.alphabet.format(letter),
                        reason: format!(
                            "two successors `{}` and `{}`",
                            self.names[prev], self.names[to]
                        ),
                    })
                }
                _ => *slot = Some(to),
            }
        }
        let mut eps = vec![Vec::new(); n];
        for &(from, to) in &self.eps {
            eps[from].push(to);
        }
        for e in &mut eps {
            e.sort_unstable();
            e.dedup();
        }
        let mut acceptance = self.acceptance;
        for set in &mut acceptance {
            set.sort_unstable();
            set.dedup();
        }
        let a = Ldba {
            alphabet: self.alphabet,
            names: self.names,
            initial: self.initial,
            delta,
            eps,
            acceptance,
            in_d,
        };
        validate_ldba(&a)?;
        Ok(a)
    }
}

/// Checks the structural invariants and reports the partition.
pub fn validate_ldba(a: &Ldba) -> Result<PartitionReport, AutomatonError> {
    if a.acceptance.is_empty() {
        return Err(AutomatonError::NoAcceptance);
    }
    for (j, set) in a.acceptance.iter().enumerate() {
        for &q in set {
            if !a.in_d[q] {
                return Err(AutomatonError::AcceptanceOutsideQD {
                    set: j + 1,
                    state: a.names[q].clone(),
                });
            }
        }
    }
    for q in 0..a.num_states() {
        if !a.in_d[q] {
            continue;
        }
        if let Some(&t) = a.eps[q].first() {
            return Err(AutomatonError::EpsilonInAccepting {
                state: a.names[q].clone(),
                target: a.names[t].clone(),
            });
        }
        for l in a.alphabet.letters() {
            if let Some(t) = a.delta[q][l.index()] {
                if !a.in_d[t] {
                    return Err(AutomatonError::NotLimitDeterministic {
                        state: a.names[q].clone(),
                        letter: a.alphabet.format(l),
                        reason: format!("partD transition leaves partD to `{}`", a.names[t]),
                    });
                }
            }
        }
    }
    let reach = crate::graph::forward_reachable(a.num_states() + 1, &[a.initial], |q| a.successors(q));
    Ok(PartitionReport {
        q_n: (0..a.num_states()).filter(|&q| !a.in_d[q]).collect(),
        q_d: (0..a.num_states()).filter(|&q| a.in_d[q]).collect(),
        reachable_d: (0..a.num_states()).filter(|&q| a.in_d[q] && reach[q]).collect(),
    })
}
