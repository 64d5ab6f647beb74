use std::collections::BTreeMap;

use super::{AutomatonError, Ldba, LdbaBuilder};
use crate::label::{Alphabet, Letter};
use crate::ltl::parse_propositional;

fn format_err(line: usize, message: impl Into<String>) -> AutomatonError {
    AutomatonError::Format {
        line,
        message: message.into(),
    }
}

fn lookup(b: &LdbaBuilder, name: &str, line: usize) -> Result<usize, AutomatonError> {
    b.state(name)
        .ok_or_else(|| format_err(line, format!("undeclared state `{name}`")))
}

/// Parses the line-oriented automaton format.
pub fn load_automaton(text: &str) -> Result<Ldba, AutomatonError> {
    let mut builder: Option<LdbaBuilder> = None;
    let mut have_states = false;
    let mut have_initial = false;
    // letters already claimed per source state, with the line that claimed them
    let mut claimed: BTreeMap<usize, Vec<Option<usize>>> = BTreeMap::new();
    let mut next_acc = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| format_err(line_no, "expected `key: value`"))?;
        let key = key.trim();
        let rest = rest.trim();

        if key == "alphabet" {
            if builder.is_some() {
                return Err(format_err(line_no, "duplicate `alphabet:` line"));
            }
            let alpha = Alphabet::new(rest.split_whitespace())
                .map_err(|e| format_err(line_no, e.to_string()))?;
            builder = Some(LdbaBuilder::new(alpha));
            continue;
        }
        let b = builder
            .as_mut()
            .ok_or_else(|| format_err(line_no, "`alphabet:` must come first"))?;

        match key {
            "states" => {
                if have_states {
                    return Err(format_err(line_no, "duplicate `states:` line"));
                }
                for name in rest.split_whitespace() {
                    if b.state(name).is_some() {
                        return Err(format_err(line_no, format!("duplicate state `{name}`")));
                    }
                    b.add_state(name);
                }
                have_states = true;
            }
            "initial" => {
                if have_initial {
                    return Err(format_err(line_no, "duplicate `initial:` line"));
                }
                let q = lookup(b, rest, line_no)?;
                b.set_initial(q);
                have_initial = true;
            }
            "partN" | "partD" => {
                for name in rest.split_whitespace() {
                    let q = lookup(b, name, line_no)?;
                    if b.part(q).is_some() {
                        return Err(format_err(line_no, format!("state `{name}` listed twice in partitions")));
                    }
                    b.set_part(q, key == "partD");
                }
            }
            "acc" => {
                let (label, members) = rest
                    .split_once('=')
                    .ok_or_else(|| format_err(line_no, "expected `acc: Fk = states...`"))?;
                let expected = format!("F{next_acc}");
                if label.trim() != expected {
                    return Err(format_err(line_no, format!("expected acceptance set `{expected}`")));
                }
                let mut set = Vec::new();
                for name in members.split_whitespace() {
                    set.push(lookup(b, name, line_no)?);
                }
                if set.is_empty() {
                    return Err(format_err(line_no, "empty acceptance set"));
                }
                b.add_acceptance_set(set);
                next_acc += 1;
            }
            "trans" => {
                let (lhs, to) = rest
                    .rsplit_once("-->")
                    .ok_or_else(|| format_err(line_no, "expected `src -- label --> dst`"))?;
                let (from, label) = lhs
                    .split_once("--")
                    .ok_or_else(|| format_err(line_no, "expected `src -- label --> dst`"))?;
                let from = lookup(b, from.trim(), line_no)?;
                let to = lookup(b, to.trim(), line_no)?;
                let formula = parse_propositional(label.trim(), b.alphabet())
                    .map_err(|e| format_err(line_no, e.to_string()))?;
                let alpha = b.alphabet().clone();
                let owners = claimed
                    .entry(from)
                    .or_insert_with(|| vec![None; alpha.letter_count()]);
                for l in alpha.letters() {
                    if formula.holds_on(&alpha, l) == Some(true) {
                        if let Some(prev) = owners[l.index()] {
                            return Err(format_err(
                                line_no,
                                format!(
                                    "label overlaps the transition on line {prev} (letter {})",
                                    alpha.format(l)
                                ),
                            ));
                        }
                        owners[l.index()] = Some(line_no);
                        b.add_transition(from, l, to);
                    }
                }
            }
            "eps" => {
                let (from, to) = rest
                    .split_once("-->")
                    .ok_or_else(|| format_err(line_no, "expected `src --> dst`"))?;
                let from = lookup(b, from.trim(), line_no)?;
                let to = lookup(b, to.trim(), line_no)?;
                b.add_eps(from, to);
            }
            other => return Err(format_err(line_no, format!("unknown key `{other}`"))),
        }
    }
    let end = text.lines().count().max(1);
    let b = builder.ok_or_else(|| format_err(end, "missing `alphabet:` line"))?;
    if !have_states {
        return Err(format_err(end, "missing `states:` line"));
    }
    if !have_initial {
        return Err(format_err(end, "missing `initial:` line"));
    }
    b.build()
}

fn minterm(alpha: &Alphabet, l: Letter) -> String {
    alpha
        .names()
        .iter()
        .enumerate()
        .map(|(i, n)| if l.contains(i) { n.clone() } else { format!("!{n}") })
        .collect::<Vec<_>>()
        .join(" & ")
}

fn label_text(alpha: &Alphabet, letters: &[Letter]) -> String {
    if letters.len() == alpha.letter_count() {
        return "true".into();
    }
    if letters.len() == 1 {
        return minterm(alpha, letters[0]);
    }
    letters
        .iter()
        .map(|&l| {
            if alpha.len() > 1 {
                format!("({})", minterm(alpha, l))
            } else {
                minterm(alpha, l)
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Writes the canonical text form; transition labels become "true" or a
/// disjunction of full minterms.
pub fn save_automaton(a: &Ldba) -> String {
    let alpha = a.alphabet();
    let names = |qs: &mut dyn Iterator<Item = usize>| -> String {
        qs.map(|q| a.name(q).to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = String::new();
    out.push_str(&format!("alphabet: {alpha}\n"));
    out.push_str(&format!("states: {}\n", a.names().join(" ")));
    out.push_str(&format!("initial: {}\n", a.name(a.initial())));
    let n = a.num_states();
    out.push_str(&format!("partN: {}\n", names(&mut (0..n).filter(|&q| !a.in_d(q)))));
    out.push_str(&format!("partD: {}\n", names(&mut (0..n).filter(|&q| a.in_d(q)))));
    for (j, set) in a.acceptance().iter().enumerate() {
        out.push_str(&format!("acc: F{} = {}\n", j + 1, names(&mut set.iter().copied())));
    }
    for q in 0..n {
        let mut by_target: BTreeMap<usize, Vec<Letter>> = BTreeMap::new();
        for l in alpha.letters() {
            if let Some(t) = a.transition(q, l) {
                by_target.entry(t).or_default().push(l);
            }
        }
        for (t, letters) in by_target {
            out.push_str(&format!(
                "trans: {} -- {} --> {}\n",
                a.name(q),
                label_text(alpha, &letters),
                a.name(t)
            ));
        }
        for &t in a.eps_successors(q) {
            out.push_str(&format!("eps: {} --> {}\n", a.name(q), a.name(t)));
        }
    }
    out.trim_end().to_string() + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{builtin_automaton, BUILTIN_NAMES};

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let a = builtin_automaton(name).unwrap();
            let text = save_automaton(&a);
            let b = load_automaton(&text).unwrap();
            assert_eq!(a, b, "{name}");
            assert_eq!(save_automaton(&b), text, "{name}");
        }
    }

    #[test]
    fn missing_initial_is_format_error() {
        let text = "alphabet: t\nstates: q0\npartD: q0\nacc: F1 = q0\ntrans: q0 -- true --> q0\n";
        assert!(matches!(load_automaton(text), Err(AutomatonError::Format { .. })));
    }

    #[test]
    fn acceptance_in_qn_is_rejected() {
        let text = "alphabet: t\nstates: q0\ninitial: q0\npartN: q0\nacc: F1 = q0\n";
        assert!(matches!(
            load_automaton(text),
            Err(AutomatonError::AcceptanceOutsideQD { .. })
        ));
    }

    #[test]
    fn overlapping_labels_report_line() {
        let text = "alphabet: t u\nstates: q0 q1\ninitial: q0\npartD: q0 q1\nacc: F1 = q0\n\
                    trans: q0 -- t --> q0\ntrans: q0 -- t & u --> q1\n";
        match load_automaton(text) {
            Err(AutomatonError::Format { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn implication_inside_label() {
        let text = "alphabet: t u\nstates: q0\ninitial: q0\npartD: q0\nacc: F1 = q0\n\
                    trans: q0 -- t -> u --> q0   # comment\n";
        let a = load_automaton(text).unwrap();
        assert_eq!(a.transition(0, Letter(1)), None);
        assert_eq!(a.transition(0, Letter(3)), Some(0));
    }
}
