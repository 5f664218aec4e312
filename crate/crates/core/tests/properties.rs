mod common;

use braidforge::abelian::{
    abelian_invariants, invariants_by_minors, smith_normal_form, AbelianInvariants, IntMatrix, Matrix,
};
use braidforge::presentation::Presentation;
use braidforge::tietze::{DerivationHint, Factor, RelatorRef, TietzeMove, TietzeState};
use braidforge::words::{free_reduce, Generator, Word};
use common::{gen, random_tietze_sequences, stack_reduce};
use num_bigint::BigInt;
use proptest::prelude::*;

fn raw_letters(max_gen: usize, max_len: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0..max_gen, any::<bool>()), 0..max_len)
}

fn word_from(raw: &[(usize, bool)]) -> Word {
    free_reduce(raw.iter().map(|&(g, inv)| (gen(g), if inv { -1 } else { 1 })))
}

fn word() -> impl Strategy<Value = Word> {
    raw_letters(4, 16).prop_map(|raw| word_from(&raw))
}

fn matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-12i64..=12, c), r).prop_map(move |rows| Matrix::from_rows(rows, c))
    })
}

fn is_unit(d: &BigInt) -> bool {
    *d == BigInt::from(1) || *d == BigInt::from(-1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn free_reduction_laws(a in raw_letters(4, 24), b in raw_letters(4, 24), c in raw_letters(4, 24)) {
        let (u, v, w) = (word_from(&a), word_from(&b), word_from(&c));
        let letters: Vec<(Generator, i64)> = u.letters().collect();
        let expected: Vec<(Generator, i64)> = stack_reduce(&a)
            .into_iter()
            .map(|(g, inv)| (gen(g), if inv { -1 } else { 1 }))
            .collect();
        prop_assert_eq!(letters, expected);
        prop_assert_eq!(u.mul(&v).mul(&w), u.mul(&v.mul(&w)));
        prop_assert!(u.mul(&u.inverse()).is_identity());
        prop_assert_eq!(u.inverse().inverse(), u.clone());
        prop_assert_eq!(u.mul(&v).inverse(), v.inverse().mul(&u.inverse()));
        prop_assert!(u.mul(&v).len() <= u.len() + v.len());
        prop_assert_eq!(Word::parse(&u.to_string()).unwrap(), u.clone());
        let cr = u.cyclically_reduce();
        prop_assert!(cr.is_cyclically_reduced());
        prop_assert!(cr.cyclically_equivalent(&u.conjugate_by(&v).cyclically_reduce()));
        for i in 0..4 {
            prop_assert_eq!(u.mul(&v).exponent_sum(gen(i)), u.exponent_sum(gen(i)) + v.exponent_sum(gen(i)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn smith_form_is_unimodular(a in matrix()) {
        let form = smith_normal_form(&a);
        prop_assert!(form.verify(&a.to_big()));
        prop_assert!(is_unit(&form.u.determinant()));
        prop_assert!(is_unit(&form.v.determinant()));
        let by_snf = AbelianInvariants::from_smith(&form, a.cols());
        prop_assert_eq!(by_snf, invariants_by_minors(&a));
    }
}

#[test]
fn tietze_moves_preserve_invariants() {
    let checked = random_tietze_sequences(0x7e12e, 200).unwrap();
    assert!(checked > 600, "only {checked} moves exercised");
}

#[test]
fn invalid_moves_are_rejected() {
    let p = Presentation::from_words(
        "p",
        vec![gen(0), gen(1)],
        vec![Word::parse("x1 x2 x1^-1 x2^-1").unwrap()],
    )
    .unwrap();
    let mut state = TietzeState::new(&p);
    let bogus = TietzeMove::AddRelator {
        word: Word::parse("x1").unwrap(),
        hint: DerivationHint {
            factors: vec![Factor {
                relator: RelatorRef::Index(0),
                inverse: false,
                conjugator: Word::identity(),
            }],
        },
    };
    assert!(state.apply(1, &bogus).is_err());
    let not_solvable = TietzeMove::EliminateGenerator {
        generator: gen(0),
        via: RelatorRef::Index(0),
    };
    assert!(state.apply(2, &not_solvable).is_err());
    assert_eq!(
        abelian_invariants(&state.presentation()),
        AbelianInvariants::new(2, &[])
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn presentation_invariants_match_minors(words in prop::collection::vec(word(), 0..5)) {
        let p = Presentation::from_words("p", (0..4).map(gen).collect(), words).unwrap();
        let matrix = braidforge::abelian::relation_matrix(&p);
        prop_assert_eq!(abelian_invariants(&p), invariants_by_minors(&matrix));
    }

    #[test]
    fn text_round_trip(words in prop::collection::vec(word(), 0..5)) {
        let words: Vec<Word> = words.into_iter().filter(|w| !w.is_identity()).collect();
        let p = Presentation::from_words("p", (0..4).map(gen).collect(), words).unwrap();
        let back = Presentation::parse(&p.to_text()).unwrap();
        prop_assert_eq!(back.generators(), p.generators());
        let a: Vec<&Word> = back.relator_words().collect();
        let b: Vec<&Word> = p.relator_words().collect();
        prop_assert_eq!(a, b);
    }
}
