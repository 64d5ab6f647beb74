use rand::{Rng, SeedableRng};

use super::{LtlError, LtlFormula};
use crate::label::{Alphabet, Letter};
use crate::SimRng;

/// The infinite word `prefix · cycle^ω` over the letters of `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub alphabet: Alphabet,
    pub prefix: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(alphabet: Alphabet, prefix: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self, LtlError> {
        if cycle.is_empty() {
            return Err(LtlError::InvalidLength);
        }
        Ok(LassoWord {
            alphabet,
            prefix,
            cycle,
        })
    }

    /// Builds a word from atom-name lists, e.g. `&[&[], &["u"]]`.
    pub fn from_names(alphabet: &Alphabet, prefix: &[&[&str]], cycle: &[&[&str]]) -> Result<Self, LtlError> {
        let conv = |sets: &[&[&str]]| -> Result<Vec<Letter>, LtlError> {
            sets.iter()
                .map(|s| {
                    alphabet.letter(s).map_err(|e| match e {
                        crate::label::AlphabetError::UnknownAtom(name) => {
                            LtlError::UnknownAtom { name, position: 0 }
                        }
                        other => LtlError::UnknownAtom {
                            name: other.to_string(),
                            position: 0,
                        },
                    })
                })
                .collect()
        };
        LassoWord::new(alphabet.clone(), conv(prefix)?, conv(cycle)?)
    }

    /// Number of distinct positions (prefix plus one copy of the cycle).
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Successor of position `i` in the lasso graph.
    pub fn next_position(&self, i: usize) -> usize {
        if i + 1 < self.positions() {
            i + 1
        } else {
            self.prefix.len()
        }
    }

    /// The word with its first letter consumed.
    pub fn suffix(&self) -> LassoWord {
        let mut w = self.clone();
        if w.prefix.is_empty() {
            w.cycle.rotate_left(1);
        } else {
            w.prefix.remove(0);
        }
        w
    }
}

fn eval_positions(f: &LtlFormula, w: &LassoWord) -> Vec<bool> {
    use LtlFormula as L;
    let n = w.positions();
    match f {
        L::True => vec![true; n],
        L::False => vec![false; n],
        L::Atom(a) => {
            let idx = w.alphabet.index_of(a);
            (0..n)
                .map(|i| idx.is_some_and(|k| w.letter_at(i).contains(k)))
                .collect()
        }
        L::Neg(x) => eval_positions(x, w).into_iter().map(|b| !b).collect(),
        L::And(a, b) => zip(eval_positions(a, w), eval_positions(b, w), |x, y| x && y),
        L::Or(a, b) => zip(eval_positions(a, w), eval_positions(b, w), |x, y| x || y),
        L::Implies(a, b) => zip(eval_positions(a, w), eval_positions(b, w), |x, y| !x || y),
        L::Next(x) => {
            let v = eval_positions(x, w);
            (0..n).map(|i| v[w.next_position(i)]).collect()
        }
        L::Until(a, b) => until(w, &eval_positions(a, w), &eval_positions(b, w)),
        L::Eventually(x) => until(w, &vec![true; n], &eval_positions(x, w)),
        L::Always(x) => {
            // greatest fixpoint of g = x ∧ X g
            let v = eval_positions(x, w);
            let mut g = vec![true; n];
            loop {
                let mut changed = false;
                for i in (0..n).rev() {
                    let nv = v[i] && g[w.next_position(i)];
                    if nv != g[i] {
                        g[i] = nv;
                        changed = true;
                    }
                }
                if !changed {
                    return g;
                }
            }
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

// least fixpoint of u = b ∨ (a ∧ X u), starting from all-false
fn until(w: &LassoWord, a: &[bool], b: &[bool]) -> Vec<bool> {
    let n = w.positions();
    let mut u = vec![false; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let nv = b[i] || (a[i] && u[w.next_position(i)]);
            if nv != u[i] {
                u[i] = nv;
                changed = true;
            }
        }
        if !changed {
            return u;
        }
    }
}

/// Decides `prefix · cycle^ω ⊨ f` exactly.
pub fn eval_lasso(f: &LtlFormula, w: &LassoWord) -> bool {
    eval_positions(f, w)[0]
}

/// Samples a lasso uniformly over all letters of `alphabet`.
pub fn random_lasso(
    alphabet: &Alphabet,
    prefix_len: usize,
    cycle_len: usize,
    seed: u64,
) -> Result<LassoWord, LtlError> {
    let letters: Vec<Letter> = alphabet.letters().collect();
    random_lasso_over(alphabet, &letters, prefix_len, cycle_len, seed)
}

/// Samples a lasso whose letters are drawn uniformly from `letters`.
pub fn random_lasso_over(
    alphabet: &Alphabet,
    letters: &[Letter],
    prefix_len: usize,
    cycle_len: usize,
    seed: u64,
) -> Result<LassoWord, LtlError> {
    if cycle_len == 0 || letters.is_empty() {
        return Err(LtlError::InvalidLength);
    }
    let mut rng = SimRng::seed_from_u64(seed);
    let mut draw = |k: usize| -> Vec<Letter> {
        (0..k)
            .map(|_| letters[rng.gen_range(0..letters.len())])
            .collect()
    };
    let prefix = draw(prefix_len);
    let cycle = draw(cycle_len);
    LassoWord::new(alphabet.clone(), prefix, cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn tu() -> Alphabet {
        Alphabet::new(["t", "u"]).unwrap()
    }

    #[test]
    fn basic_examples() {
        let a = tu();
        let any = random_lasso(&a, 3, 2, 1).unwrap();
        assert!(eval_lasso(&LtlFormula::True, &any));
        let w = LassoWord::from_names(&a, &[&[]], &[&["t"]]).unwrap();
        assert!(eval_lasso(&parse_ltl("F t", &a).unwrap(), &w));
        let p7 = parse_ltl("F t & G(t -> G t) & G(u -> G u)", &a).unwrap();
        let w = LassoWord::from_names(&a, &[&[], &["u"]], &[&["u"]]).unwrap();
        assert!(!eval_lasso(&p7, &w));
        let w = LassoWord::from_names(&a, &[&[], &["t"]], &[&["t"]]).unwrap();
        assert!(eval_lasso(&p7, &w));
    }

    #[test]
    fn fg_and_gf_on_cycles() {
        let a = tu();
        let w = LassoWord::from_names(&a, &[&["t"]], &[&[], &["t"]]).unwrap();
        assert!(!eval_lasso(&parse_ltl("F G t", &a).unwrap(), &w));
        assert!(eval_lasso(&parse_ltl("G F t", &a).unwrap(), &w));
        assert!(eval_lasso(&parse_ltl("X X t", &a).unwrap(), &w));
        assert!(!eval_lasso(&parse_ltl("X X X t", &a).unwrap(), &w));
    }

    #[test]
    fn random_lasso_contract() {
        let a = Alphabet::new(["t"]).unwrap();
        assert_eq!(random_lasso(&a, 0, 1, 7).unwrap(), random_lasso(&a, 0, 1, 7).unwrap());
        assert_eq!(random_lasso(&a, 0, 0, 7), Err(LtlError::InvalidLength));
        let empty = Alphabet::new(Vec::<String>::new()).unwrap();
        let w = random_lasso(&empty, 2, 2, 3).unwrap();
        assert!(w.prefix.iter().chain(&w.cycle).all(|l| *l == Letter::EMPTY));
    }

    #[test]
    fn random_lasso_is_uniform() {
        let a = tu();
        let mut counts = [0usize; 4];
        for seed in 0..10_000u64 {
            let w = random_lasso(&a, 0, 1, seed).unwrap();
            counts[w.cycle[0].index()] += 1;
        }
        for c in counts {
            let frac = c as f64 / 10_000.0;
            assert!((frac - 0.25).abs() < 0.03, "{counts:?}");
        }
    }

    #[test]
    fn suffix_rotates_cycle() {
        let a = tu();
        let w = LassoWord::from_names(&a, &[], &[&["t"], &["u"]]).unwrap();
        let s = w.suffix();
        assert_eq!(s.cycle, vec![Letter(2), Letter(1)]);
    }
}
