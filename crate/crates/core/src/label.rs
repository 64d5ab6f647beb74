//! Atomic propositions and letters (sets of propositions encoded as bit masks).

use std::fmt;

use thiserror::Error;

/// Maximum number of atomic propositions an alphabet may declare.
pub const MAX_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("invalid atom name `{0}`")]
    InvalidName(String),
    #[error("duplicate atom `{0}`")]
    Duplicate(String),
    #[error("alphabet has {0} atoms, at most {MAX_ATOMS} are supported")]
    TooLarge(usize),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
}

/// A subset of the atomic propositions of some [`Alphabet`], bit `i` standing
/// for the `i`-th declared atom.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

impl Letter {
    pub const EMPTY: Letter = Letter(0);

    pub fn contains(self, atom: usize) -> bool {
        self.0 & (1 << atom) != 0
    }

    pub fn with(self, atom: usize) -> Letter {
        Letter(self.0 | (1 << atom))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered, duplicate-free set of atomic proposition names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if !is_atom_name(&name) || matches!(name.as_str(), "true" | "false") {
                return Err(AlphabetError::InvalidName(name));
            }
            if out.contains(&name) {
                return Err(AlphabetError::Duplicate(name));
            }
            out.push(name);
        }
        if out.len() > MAX_ATOMS {
            return Err(AlphabetError::TooLarge(out.len()));
        }
        Ok(Alphabet { names: out })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Number of distinct letters, `2^|AP|`.
    pub fn letter_count(&self) -> usize {
        1 << self.names.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.letter_count() as u32).map(Letter)
    }

    pub fn letter<S: AsRef<str>>(&self, atoms: &[S]) -> Result<Letter, AlphabetError> {
        let mut letter = Letter::EMPTY;
        for atom in atoms {
            let idx = self
                .index_of(atom.as_ref())
                .ok_or_else(|| AlphabetError::UnknownAtom(atom.as_ref().to_string()))?;
            letter = letter.with(idx);
        }
        Ok(letter)
    }

    pub fn is_valid(&self, letter: Letter) -> bool {
        letter.index() < self.letter_count()
    }

    pub fn atoms_of(&self, letter: Letter) -> Vec<&str> {
        (0..self.names.len())
            .filter(|&i| letter.contains(i))
            .map(|i| self.names[i].as_str())
            .collect()
    }

    /// Renders a letter as `{a,b}`.
    pub fn format(&self, letter: Letter) -> String {
        format!("{{{}}}", self.atoms_of(letter).join(","))
    }

    /// Builds the map that restricts letters of `self` to the atoms shared with `target`.
    pub fn projection_to(&self, target: &Alphabet) -> LetterProjection {
        LetterProjection {
            bits: self.names.iter().map(|n| target.index_of(n)).collect(),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}

/// Restriction of letters from one alphabet onto another; atoms unknown to the
/// target are dropped.
#[derive(Clone, Debug)]
pub struct LetterProjection {
    bits: Vec<Option<usize>>,
}

impl LetterProjection {
    pub fn apply(&self, letter: Letter) -> Letter {
        let mut out = Letter::EMPTY;
        for (i, target) in self.bits.iter().enumerate() {
            if let Some(t) = target {
                if letter.contains(i) {
                    out = out.with(*t);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_names() {
        assert!(Alphabet::new(["1a"]).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(["true"]).is_err());
        assert!(Alphabet::new(["f1", "_x", "A"]).is_ok());
    }

    #[test]
    fn projection_drops_foreign_atoms() {
        let env = Alphabet::new(["i", "u", "t", "n"]).unwrap();
        let aut = Alphabet::new(["t", "u"]).unwrap();
        let proj = env.projection_to(&aut);
        let l = env.letter(&["u", "n"]).unwrap();
        assert_eq!(proj.apply(l), aut.letter(&["u"]).unwrap());
        assert_eq!(proj.apply(env.letter(&["i"]).unwrap()), Letter::EMPTY);
    }

    #[test]
    fn format_lists_atoms_in_order() {
        let a = Alphabet::new(["t", "u"]).unwrap();
        assert_eq!(a.format(Letter(3)), "{t,u}");
        assert_eq!(a.format(Letter::EMPTY), "{}");
    }
}
