use std::collections::{HashMap, VecDeque};

use super::{AutomatonError, Ldba, LdbaBuilder};
use crate::label::{Alphabet, Letter};
use crate::ltl::LtlFormula;

// Views of sugared operators inside the base grammar.

fn eventually_view(f: &LtlFormula) -> Option<&LtlFormula> {
    match f {
        LtlFormula::Until(a, b) if **a == LtlFormula::True => Some(b),
        _ => None,
    }
}

fn always_view(f: &LtlFormula) -> Option<&LtlFormula> {
    match f {
        LtlFormula::Neg(x) => match eventually_view(x)? {
            LtlFormula::Neg(inner) => Some(inner),
            _ => None,
        },
        _ => None,
    }
}

fn implies_view(f: &LtlFormula) -> Option<(&LtlFormula, &LtlFormula)> {
    match f {
        LtlFormula::Neg(x) => match &**x {
            LtlFormula::And(a, nb) => match &**nb {
                LtlFormula::Neg(b) => Some((a, b)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn or_view(f: &LtlFormula) -> Option<(&LtlFormula, &LtlFormula)> {
    match f {
        LtlFormula::Neg(x) => match &**x {
            LtlFormula::And(na, nb) => match (&**na, &**nb) {
                (LtlFormula::Neg(a), LtlFormula::Neg(b)) => Some((a, b)),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn conjuncts<'a>(f: &'a LtlFormula, out: &mut Vec<&'a LtlFormula>) {
    match f {
        LtlFormula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

enum ReachNode {
    Prop(LtlFormula),
    And(usize, usize),
    Or(usize, usize),
    Eventually(usize),
}

type Dnf = Vec<Vec<usize>>;

fn minimize(mut d: Dnf) -> Dnf {
    for c in &mut d {
        c.sort_unstable();
        c.dedup();
    }
    d.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    d.dedup();
    let mut out: Dnf = Vec::new();
    for c in d {
        if !out.iter().any(|o| o.iter().all(|x| c.binary_search(x).is_ok())) {
            out.push(c);
        }
    }
    out.sort();
    out
}

fn product(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let mut c = x.clone();
            c.extend(y);
            out.push(c);
        }
    }
    minimize(out)
}

struct Reach {
    nodes: Vec<ReachNode>,
}

impl Reach {
    fn compile(&mut self, f: &LtlFormula) -> Result<usize, AutomatonError> {
        let node = if f.is_propositional() {
            ReachNode::Prop(f.clone())
        } else if let Some(x) = eventually_view(f) {
            ReachNode::Eventually(self.compile(x)?)
        } else if let Some((a, b)) = or_view(f) {
            ReachNode::Or(self.compile(a)?, self.compile(b)?)
        } else if let LtlFormula::And(a, b) = f {
            ReachNode::And(self.compile(a)?, self.compile(b)?)
        } else {
            return Err(AutomatonError::UnsupportedFragment(f.to_string()));
        };
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    fn prog(&self, id: usize, alpha: &Alphabet, l: Letter) -> Dnf {
        match &self.nodes[id] {
            ReachNode::Prop(p) => {
                if p.holds_on(alpha, l) == Some(true) {
                    vec![vec![]]
                } else {
                    vec![]
                }
            }
            ReachNode::And(a, b) => product(&self.prog(*a, alpha, l), &self.prog(*b, alpha, l)),
            ReachNode::Or(a, b) => {
                let mut d = self.prog(*a, alpha, l);
                d.extend(self.prog(*b, alpha, l));
                minimize(d)
            }
            ReachNode::Eventually(x) => {
                let mut d = self.prog(*x, alpha, l);
                d.push(vec![id]);
                minimize(d)
            }
        }
    }

    fn step(&self, state: &Dnf, alpha: &Alphabet, l: Letter) -> Dnf {
        let mut out = Vec::new();
        for clause in state {
            let mut acc: Dnf = vec![vec![]];
            for &k in clause {
                acc = product(&acc, &self.prog(k, alpha, l));
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc);
        }
        minimize(out)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct AbstractState {
    // `None` once the reachability part is satisfied
    reach: Option<Dnf>,
    absorbed: Vec<bool>,
    counter: usize,
    round_done: bool,
    committed: bool,
}

struct Spec {
    reach: Reach,
    reach_init: Dnf,
    absorbing: Vec<LtlFormula>,
    safety: Vec<LtlFormula>,
    recurrent: Vec<LtlFormula>,
    persistent: Vec<LtlFormula>,
}

fn holds(p: &LtlFormula, alpha: &Alphabet, l: Letter) -> bool {
    p.holds_on(alpha, l) == Some(true)
}

impl Spec {
    fn classify(f: &LtlFormula) -> Result<Spec, AutomatonError> {
        let mut spec = Spec {
            reach: Reach { nodes: Vec::new() },
            reach_init: Vec::new(),
            absorbing: Vec::new(),
            safety: Vec::new(),
            recurrent: Vec::new(),
            persistent: Vec::new(),
        };
        let mut tops = Vec::new();
        let mut parts = Vec::new();
        conjuncts(f, &mut parts);
        for c in parts {
            if *c == LtlFormula::True {
                continue;
            }
            if let Some(x) = always_view(c) {
                if let Some(p) = eventually_view(x).filter(|p| p.is_propositional()) {
                    spec.recurrent.push(p.clone());
                    continue;
                }
                if let Some((a, b)) = implies_view(x) {
                    if a.is_propositional() && always_view(b) == Some(a) {
                        spec.absorbing.push(a.clone());
                        continue;
                    }
                }
                if x.is_propositional() {
                    spec.safety.push(x.clone());
                    continue;
                }
            }
            if let Some(x) = eventually_view(c) {
                if let Some(p) = always_view(x).filter(|p| p.is_propositional()) {
                    spec.persistent.push(p.clone());
                    continue;
                }
                tops.push(spec.reach.compile(c)?);
                continue;
            }
            return Err(AutomatonError::UnsupportedFragment(c.to_string()));
        }
        spec.reach_init = if tops.is_empty() { vec![vec![]] } else { vec![tops] };
        Ok(spec)
    }

    fn initial(&self) -> AbstractState {
        AbstractState {
            reach: if self.reach_init == vec![Vec::<usize>::new()] {
                None
            } else {
                Some(self.reach_init.clone())
            },
            absorbed: vec![false; self.absorbing.len()],
            counter: 0,
            round_done: false,
            committed: self.persistent.is_empty(),
        }
    }

    fn step(&self, s: &AbstractState, alpha: &Alphabet, l: Letter) -> Option<AbstractState> {
        if self.safety.iter().any(|p| !holds(p, alpha, l)) {
            return None;
        }
        if s.committed && !self.persistent.is_empty() && self.persistent.iter().any(|p| !holds(p, alpha, l)) {
            return None;
        }
        let mut absorbed = s.absorbed.clone();
        for (i, a) in self.absorbing.iter().enumerate() {
            let now = holds(a, alpha, l);
            if absorbed[i] && !now {
                return None;
            }
            absorbed[i] |= now;
        }
        let reach = match &s.reach {
            None => None,
            Some(d) => {
                let next = self.reach.step(d, alpha, l);
                if next.is_empty() {
                    return None;
                }
                if next.iter().any(Vec::is_empty) {
                    None
                } else {
                    Some(next)
                }
            }
        };
        let k = self.recurrent.len();
        let mut counter = s.counter;
        while counter < k && holds(&self.recurrent[counter], alpha, l) {
            counter += 1;
        }
        let round_done = k > 0 && counter == k;
        if round_done {
            counter = 0;
        }
        Some(AbstractState {
            reach,
            absorbed,
            counter,
            round_done,
            committed: s.committed,
        })
    }

    fn accepting(&self, s: &AbstractState) -> bool {
        s.reach.is_none() && (self.recurrent.is_empty() || s.round_done) && s.committed
    }
}

/// Builds an automaton for a conjunction of clauses of the forms `F φ` (φ a
/// boolean/`F` nesting over propositions), `G(a -> G a)`, `G F a`, `G a` and
/// `F G a`, with `a` propositional.
pub fn translate_fragment(f: &LtlFormula, alphabet: &Alphabet) -> Result<Ldba, AutomatonError> {
    let base = f.desugar();
    let spec = Spec::classify(&base)?;

    let mut states: Vec<AbstractState> = vec![spec.initial()];
    let mut index: HashMap<AbstractState, usize> = HashMap::new();
    index.insert(states[0].clone(), 0);
    let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
    let mut eps: Vec<Option<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut intern = |s: AbstractState, states: &mut Vec<AbstractState>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        let mut row = Vec::with_capacity(alphabet.letter_count());
        for l in alphabet.letters() {
            row.push(spec.step(&s, alphabet, l).map(|t| intern(t, &mut states, &mut queue)));
        }
        let e = if s.committed {
            None
        } else {
            let mut t = s.clone();
            t.committed = true;
            Some(intern(t, &mut states, &mut queue))
        };
        if trans.len() <= i {
            trans.resize(i + 1, Vec::new());
            eps.resize(i + 1, None);
        }
        trans[i] = row;
        eps[i] = e;
    }

    // keep only states that can still reach an accepting state
    let n = states.len();
    let mut preds = vec![Vec::new(); n];
    for i in 0..n {
        for t in trans[i].iter().flatten().chain(eps[i].iter()) {
            preds[*t].push(i);
        }
    }
    let accepting: Vec<bool> = states.iter().map(|s| spec.accepting(s)).collect();
    let live = crate::graph::backward_reachable(n, &preds, &accepting);

    let mut b = LdbaBuilder::new(alphabet.clone());
    if !live[0] {
        let q = b.add_state("q0");
        b.set_part(q, true);
        b.add_acceptance_set(vec![q]);
        return b.build();
    }
    let mut new_id = vec![usize::MAX; n];
    for (k, i) in (0..n).filter(|&i| live[i]).enumerate() {
        new_id[i] = b.add_state(format!("q{k}"));
    }
    // partD: committed copies when a persistence clause exists, otherwise
    // everything reachable from an accepting state
    let in_d: Vec<bool> = if !spec.persistent.is_empty() {
        states.iter().map(|s| s.committed).collect()
    } else {
        let start: Vec<usize> = (0..n).filter(|&i| accepting[i] && live[i]).collect();
        crate::graph::forward_reachable(n, &start, |i| {
            trans[i].iter().flatten().copied().filter(|&t| live[t]).collect::<Vec<_>>()
        })
    };
    let mut acc = Vec::new();
    for i in (0..n).filter(|&i| live[i]) {
        let q = new_id[i];
        b.set_part(q, in_d[i]);
        if accepting[i] {
            acc.push(q);
        }
        for (li, t) in trans[i].iter().enumerate() {
            if let Some(t) = t.filter(|&t| live[t]) {
                b.add_transition(q, Letter(li as u32), new_id[t]);
            }
        }
        if let Some(t) = eps[i].filter(|&t| live[t]) {
            b.add_eps(q, new_id[t]);
        }
    }
    b.add_acceptance_set(acc);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn tr(text: &str, atoms: &[&str]) -> Result<Ldba, AutomatonError> {
        let alpha = Alphabet::new(atoms.iter().copied()).unwrap();
        translate_fragment(&parse_ltl(text, &alpha).unwrap(), &alpha)
    }

    #[test]
    fn fg_has_two_states() {
        let a = tr("F G t", &["t"]).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(a.eps_successors(a.initial()), &[1]);
        assert!(a.in_set(0, 1));
    }

    #[test]
    fn gf_gf_safety_has_three_states() {
        let a = tr("G F A & G F B & G !C", &["A", "B", "C"]).unwrap();
        assert_eq!(a.num_states(), 3);
    }

    #[test]
    fn unsupported_nesting() {
        assert!(matches!(
            tr("t U (X u)", &["t", "u"]),
            Err(AutomatonError::UnsupportedFragment(_))
        ));
        assert!(matches!(
            tr("(t U (X u)) U t", &["t", "u"]),
            Err(AutomatonError::UnsupportedFragment(_))
        ));
    }

    #[test]
    fn unsatisfiable_gives_empty_language() {
        let a = tr("F false", &["t"]).unwrap();
        assert_eq!(a.num_states(), 1);
        assert!(a.alphabet().letters().all(|l| a.transition(0, l).is_none()));
    }
}
