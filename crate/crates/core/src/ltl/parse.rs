use super::{LtlError, LtlFormula};
use crate::label::Alphabet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Arrow,
    Next,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Always => "`G`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str, alphabet: &Alphabet) -> Result<Vec<(Tok, usize)>, LtlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < bytes.len()
                    && ((bytes[i + 1] as char).is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..=i];
                i += 1;
                match word {
                    "true" => out.push((Tok::True, start)),
                    "false" => out.push((Tok::False, start)),
                    "X" => out.push((Tok::Next, start)),
                    "U" => out.push((Tok::Until, start)),
                    "F" => out.push((Tok::Eventually, start)),
                    "G" => out.push((Tok::Always, start)),
                    // `GF`, `FG`, `XX` and similar runs of unary operators
                    w if !alphabet.contains(w) && w.chars().all(|c| "FGX".contains(c)) => {
                        for (k, ch) in w.chars().enumerate() {
                            let t = match ch {
                                'F' => Tok::Eventually,
                                'G' => Tok::Always,
                                _ => Tok::Next,
                            };
                            out.push((t, start + k));
                        }
                    }
                    w => out.push((Tok::Ident(w.to_string()), start)),
                }
                continue;
            }
            other => {
                return Err(LtlError::Syntax {
                    position: i,
                    expected: "a formula token".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    alphabet: &'a Alphabet,
    temporal: bool,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> LtlError {
        LtlError::Syntax {
            position: self.offset(),
            expected: expected.into(),
            found: self.peek().describe(),
        }
    }

    fn temporal_op(&self) -> Result<(), LtlError> {
        if self.temporal {
            Ok(())
        } else {
            Err(self.error("a propositional formula"))
        }
    }

    fn implies(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(LtlFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = LtlFormula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = LtlFormula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.temporal_op()?;
            self.bump();
            let rhs = self.until()?;
            return Ok(LtlFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula, LtlError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(LtlFormula::not(self.unary()?))
            }
            Tok::Next | Tok::Eventually | Tok::Always => {
                self.temporal_op()?;
                let op = self.bump();
                let inner = self.unary()?;
                Ok(match op {
                    Tok::Next => LtlFormula::next(inner),
                    Tok::Eventually => LtlFormula::eventually(inner),
                    _ => LtlFormula::always(inner),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<LtlFormula, LtlError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(LtlFormula::True)
            }
            Tok::False => {
                self.bump();
                Ok(LtlFormula::False)
            }
            Tok::Ident(name) => {
                if !self.alphabet.contains(&name) {
                    return Err(LtlError::UnknownAtom { name, position: at });
                }
                self.bump();
                Ok(LtlFormula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implies()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error("`true`, `false`, an atom, a unary operator or `(`")),
        }
    }
}

fn run(text: &str, alphabet: &Alphabet, temporal: bool) -> Result<LtlFormula, LtlError> {
    let toks = lex(text, alphabet)?;
    let mut p = Parser {
        toks,
        pos: 0,
        alphabet,
        temporal,
    };
    let f = p.implies()?;
    if *p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(f)
}

/// Parses an LTL formula whose atoms must belong to `alphabet`.
pub fn parse_ltl(text: &str, alphabet: &Alphabet) -> Result<LtlFormula, LtlError> {
    run(text, alphabet, true)
}

/// Parses a boolean formula (no temporal operators), as used for transition labels.
pub fn parse_propositional(text: &str, alphabet: &Alphabet) -> Result<LtlFormula, LtlError> {
    run(text, alphabet, false)
}
