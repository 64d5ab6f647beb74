//! LTL formulas: abstract syntax, parsing, desugaring and exact evaluation on
//! ultimately periodic words.

mod lasso;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::label::{Alphabet, Letter};

pub use lasso::{eval_lasso, random_lasso, random_lasso_over, LassoWord};
pub use parse::{parse_ltl, parse_propositional};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("syntax error at offset {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown atom `{name}` at offset {position}")]
    UnknownAtom { name: String, position: usize },
    #[error("cycle length must be at least 1")]
    InvalidLength,
}

/// LTL abstract syntax tree. `True`, `Atom`, `Neg`, `And`, `Next` and `Until`
/// form the base grammar; the other variants are surface sugar removed by
/// [`LtlFormula::desugar`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlFormula {
    True,
    False,
    Atom(String),
    Neg(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
}

use LtlFormula as L;

impl LtlFormula {
    pub fn atom(name: &str) -> Self {
        L::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        L::Neg(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        L::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        L::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        L::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Self) -> Self {
        L::Next(Box::new(f))
    }

    pub fn until(a: Self, b: Self) -> Self {
        L::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Self) -> Self {
        L::Eventually(Box::new(f))
    }

    pub fn always(f: Self) -> Self {
        L::Always(Box::new(f))
    }

    /// Rewrites into the base grammar `{true, atom, !, &, X, U}`.
    pub fn desugar(&self) -> LtlFormula {
        match self {
            L::True => L::True,
            L::False => L::not(L::True),
            L::Atom(a) => L::Atom(a.clone()),
            L::Neg(f) => L::not(f.desugar()),
            L::And(a, b) => L::and(a.desugar(), b.desugar()),
            L::Or(a, b) => L::not(L::and(L::not(a.desugar()), L::not(b.desugar()))),
            L::Implies(a, b) => L::not(L::and(a.desugar(), L::not(b.desugar()))),
            L::Next(f) => L::next(f.desugar()),
            L::Until(a, b) => L::until(a.desugar(), b.desugar()),
            L::Eventually(f) => L::until(L::True, f.desugar()),
            L::Always(f) => L::not(L::until(L::True, L::not(f.desugar()))),
        }
    }

    pub fn is_base(&self) -> bool {
        match self {
            L::True | L::Atom(_) => true,
            L::Neg(f) | L::Next(f) => f.is_base(),
            L::And(a, b) | L::Until(a, b) => a.is_base() && b.is_base(),
            _ => false,
        }
    }

    /// True when the formula contains no temporal operator.
    pub fn is_propositional(&self) -> bool {
        match self {
            L::True | L::False | L::Atom(_) => true,
            L::Neg(f) => f.is_propositional(),
            L::And(a, b) | L::Or(a, b) | L::Implies(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            _ => false,
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            L::True | L::False => {}
            L::Atom(a) => {
                out.insert(a.clone());
            }
            L::Neg(f) | L::Next(f) | L::Eventually(f) | L::Always(f) => f.collect_atoms(out),
            L::And(a, b) | L::Or(a, b) | L::Implies(a, b) | L::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            L::True | L::False | L::Atom(_) => 1,
            L::Neg(f) | L::Next(f) | L::Eventually(f) | L::Always(f) => 1 + f.size(),
            L::And(a, b) | L::Or(a, b) | L::Implies(a, b) | L::Until(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Evaluates a propositional formula on a single letter. Temporal
    /// operators are rejected with `None`; unknown atoms read as false.
    pub fn holds_on(&self, alphabet: &Alphabet, letter: Letter) -> Option<bool> {
        Some(match self {
            L::True => true,
            L::False => false,
            L::Atom(a) => alphabet.index_of(a).is_some_and(|i| letter.contains(i)),
            L::Neg(f) => !f.holds_on(alphabet, letter)?,
            L::And(a, b) => a.holds_on(alphabet, letter)? && b.holds_on(alphabet, letter)?,
            L::Or(a, b) => a.holds_on(alphabet, letter)? || b.holds_on(alphabet, letter)?,
            L::Implies(a, b) => !a.holds_on(alphabet, letter)? || b.holds_on(alphabet, letter)?,
            _ => return None,
        })
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            L::True => write!(f, "true"),
            L::False => write!(f, "false"),
            L::Atom(a) => write!(f, "{a}"),
            L::Neg(x) => write!(f, "!{x}"),
            L::Next(x) => write!(f, "X {x}"),
            L::Eventually(x) => write!(f, "F {x}"),
            L::Always(x) => write!(f, "G {x}"),
            L::And(a, b) => write!(f, "({a} & {b})"),
            L::Or(a, b) => write!(f, "({a} | {b})"),
            L::Implies(a, b) => write!(f, "({a} -> {b})"),
            L::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["t", "u"]).unwrap()
    }

    #[test]
    fn desugar_eventually_and_always() {
        let a = ab();
        let f = parse_ltl("F t", &a).unwrap().desugar();
        assert_eq!(f, L::until(L::True, L::atom("t")));
        let g = parse_ltl("G t", &a).unwrap().desugar();
        assert_eq!(g, L::not(L::until(L::True, L::not(L::atom("t")))));
        assert_eq!(L::atom("t").desugar(), L::atom("t"));
        assert!(parse_ltl("G (t -> F u) | false", &a).unwrap().desugar().is_base());
    }

    #[test]
    fn display_reparses() {
        let a = ab();
        for text in ["F t & G(t -> G t) & G(u -> G u)", "!X t U u", "t -> u -> t", "false"] {
            let f = parse_ltl(text, &a).unwrap();
            assert_eq!(parse_ltl(&f.to_string(), &a).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn propositional_holds() {
        let a = ab();
        let f = parse_ltl("t & !u", &a).unwrap();
        assert_eq!(f.holds_on(&a, Letter(1)), Some(true));
        assert_eq!(f.holds_on(&a, Letter(3)), Some(false));
        assert_eq!(parse_ltl("F t", &a).unwrap().holds_on(&a, Letter(1)), None);
    }
}
