use super::{load_automaton, AutomatonError, Ldba};

pub const BUILTIN_NAMES: [&str; 5] = [
    "fig3_reach_stay_safe",
    "fig4_fg_t",
    "fig5_sequenced",
    "fig6_pacman",
    "fig10_gfa_gfb_gnc",
];

fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3_reach_stay_safe" => include_str!("../../fixtures/automata/fig3_reach_stay_safe.ldba"),
        "fig4_fg_t" => include_str!("../../fixtures/automata/fig4_fg_t.ldba"),
        "fig5_sequenced" => include_str!("../../fixtures/automata/fig5_sequenced.ldba"),
        "fig6_pacman" => include_str!("../../fixtures/automata/fig6_pacman.ldba"),
        "fig10_gfa_gfb_gnc" => include_str!("../../fixtures/automata/fig10_gfa_gfb_gnc.ldba"),
        _ => return None,
    })
}

/// Returns one of the hand-encoded automata.
pub fn builtin_automaton(name: &str) -> Result<Ldba, AutomatonError> {
    let text = source(name).ok_or_else(|| AutomatonError::UnknownName(name.to_string()))?;
    load_automaton(text)
}

/// The LTL formula a builtin automaton recognises, restricted to the letters
/// that the environments can actually produce.
#[derive(Debug, Clone)]
pub struct BuiltinReference {
    pub formula: &'static str,
    pub letters: Vec<Vec<&'static str>>,
}

pub fn builtin_reference(name: &str) -> Option<BuiltinReference> {
    let (formula, letters): (&str, Vec<Vec<&str>>) = match name {
        "fig3_reach_stay_safe" => (
            "F t & G(t -> G t) & G(u -> G u)",
            vec![vec![], vec!["t"], vec!["u"]],
        ),
        "fig4_fg_t" => ("F G t", vec![vec![], vec!["t"]]),
        "fig5_sequenced" => (
            "F(p & F t) & G(t -> G t) & G(u -> G u)",
            vec![vec![], vec!["p"], vec!["t"], vec!["u"]],
        ),
        // The drawn automaton keeps accepting after both foods are eaten
        // whatever follows, so it recognises the "win before any ghost" form.
        "fig6_pacman" => (
            "(!g U (f1 & (!g U f2))) | (!g U (f2 & (!g U f1)))",
            vec![vec!["f1"], vec!["f2"], vec!["g"], vec!["n"]],
        ),
        "fig10_gfa_gfb_gnc" => (
            "G F A & G F B & G !C",
            vec![vec![], vec!["A"], vec!["B"], vec!["C"]],
        ),
        _ => return None,
    };
    Some(BuiltinReference { formula, letters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::validate_ldba;

    #[test]
    fn all_builtins_validate() {
        for name in BUILTIN_NAMES {
            let a = builtin_automaton(name).unwrap();
            validate_ldba(&a).unwrap();
            assert!(builtin_reference(name).is_some());
        }
        assert!(matches!(
            builtin_automaton("fig99"),
            Err(AutomatonError::UnknownName(_))
        ));
    }

    #[test]
    fn shapes_match_drawings() {
        let a = builtin_automaton("fig3_reach_stay_safe").unwrap();
        assert_eq!(a.num_states(), 3);
        assert_eq!(a.acceptance(), &[vec![1]]);
        let a = builtin_automaton("fig6_pacman").unwrap();
        assert_eq!(a.num_states(), 5);
        assert_eq!(a.acceptance(), &[vec![3]]);
        let q4 = a.state_index("q4").unwrap();
        assert!(a.alphabet().letters().all(|l| a.step(q4, l) == q4));
        let a = builtin_automaton("fig10_gfa_gfb_gnc").unwrap();
        assert_eq!(a.num_states(), 3);
        assert!(a.in_set(0, a.initial()));
    }
}
