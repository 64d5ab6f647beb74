use lcrl::automata::{
    accepts_lasso, builtin_automaton, builtin_reference, translate_fragment, BUILTIN_NAMES,
};
use lcrl::label::{Alphabet, Letter};
use lcrl::ltl::{eval_lasso, parse_ltl, random_lasso, random_lasso_over};

const PROPERTIES: [(&str, &[&str]); 5] = [
    ("F t & G(t -> G t) & G(u -> G u)", &["t", "u"]),
    ("F G t", &["t"]),
    ("F(p & F t) & G(t -> G t) & G(u -> G u)", &["p", "t", "u"]),
    ("F((f1 & F f2) | (f2 & F f1)) & G(g -> G g)", &["f1", "f2", "g", "n"]),
    ("G F A & G F B & G !C", &["A", "B", "C"]),
];

#[test]
fn builtins_agree_with_reference_formulas() {
    for name in BUILTIN_NAMES {
        let a = builtin_automaton(name).unwrap();
        let reference = builtin_reference(name).unwrap();
        let alpha = a.alphabet().clone();
        let f = parse_ltl(reference.formula, &alpha).unwrap();
        let letters: Vec<Letter> = reference
            .letters
            .iter()
            .map(|s| alpha.letter(s).unwrap())
            .collect();
        for seed in 0..1000u64 {
            let w = random_lasso_over(&alpha, &letters, (seed % 5) as usize, 1 + (seed % 4) as usize, seed)
                .unwrap();
            assert_eq!(accepts_lasso(&a, &w), eval_lasso(&f, &w), "{name} {w:?}");
        }
    }
}

#[test]
fn translated_properties_agree_on_all_letters() {
    for (text, atoms) in PROPERTIES {
        let alpha = Alphabet::new(atoms.iter().copied()).unwrap();
        let f = parse_ltl(text, &alpha).unwrap();
        let a = translate_fragment(&f, &alpha).unwrap();
        let mut accepted = 0;
        for seed in 0..1000u64 {
            let w = random_lasso(&alpha, (seed % 5) as usize, 1 + (seed % 4) as usize, seed).unwrap();
            let expected = eval_lasso(&f, &w);
            accepted += expected as usize;
            assert_eq!(accepts_lasso(&a, &w), expected, "{text} {w:?}");
        }
        assert!(accepted > 0, "{text}: no accepted sample");
    }
}
