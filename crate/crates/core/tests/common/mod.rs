//! Random inputs shared by the property and acceptance targets.
#![allow(dead_code)]

use braidforge::abelian::abelian_invariants;
use braidforge::presentation::Presentation;
use braidforge::tietze::{DerivationHint, Factor, RelatorRef, TietzeMove, TietzeState};
use braidforge::words::{free_reduce, Generator, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gen(i: usize) -> Generator {
    Generator::new(&format!("x{}", i + 1))
}

/// Naive stack reduction on single letters.
pub fn stack_reduce(raw: &[(usize, bool)]) -> Vec<(usize, bool)> {
    let mut out: Vec<(usize, bool)> = Vec::new();
    for &(g, inv) in raw {
        if out.last() == Some(&(g, !inv)) {
            out.pop();
        } else {
            out.push((g, inv));
        }
    }
    out
}

/// Random presentation on `x1..x4`.
pub fn random_presentation(rng: &mut ChaCha8Rng) -> Presentation {
    let gens: Vec<Generator> = (0..4).map(gen).collect();
    let count = rng.gen_range(1..=4);
    let words: Vec<Word> = (0..count).map(|_| random_word(rng, &gens, 6)).collect();
    Presentation::from_words("random", gens, words).unwrap()
}

pub fn random_word(rng: &mut ChaCha8Rng, gens: &[Generator], max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    free_reduce((0..len).map(|_| (gens[rng.gen_range(0..gens.len())], if rng.gen() { 1 } else { -1 })))
}

pub fn random_hint(rng: &mut ChaCha8Rng, state: &TietzeState) -> (Word, DerivationHint) {
    let mut word = Word::identity();
    let mut factors = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let i = rng.gen_range(0..state.relator_count());
        let inverse = rng.gen();
        let conjugator = random_word(rng, state.generators(), 3);
        let mut r = state.relator(i).unwrap().clone();
        if inverse {
            r = r.inverse();
        }
        word = word.mul(&r.conjugate_by(&conjugator));
        factors.push(Factor {
            relator: RelatorRef::Index(i),
            inverse,
            conjugator,
        });
    }
    (word, DerivationHint { factors })
}

/// A random valid move sequence, empty when the chosen kind does not apply.
pub fn random_move(rng: &mut ChaCha8Rng, state: &TietzeState, fresh: &mut usize) -> Vec<TietzeMove> {
    match rng.gen_range(0..5) {
        0 => {
            let g = Generator::new(&format!("y{fresh}"));
            *fresh += 1;
            let word = random_word(rng, state.generators(), 4);
            vec![TietzeMove::IntroduceGenerator { generator: g, word }]
        }
        1 if state.relator_count() > 0 => {
            let (word, hint) = random_hint(rng, state);
            if word.cyclically_reduce().is_identity() {
                return Vec::new();
            }
            vec![TietzeMove::AddRelator { word, hint }]
        }
        2 if state.relator_count() > 0 => {
            // Add a consequence, then remove it again with the same derivation.
            let (word, hint) = random_hint(rng, state);
            if word.cyclically_reduce().is_identity() {
                return Vec::new();
            }
            let index = state.relator_count();
            vec![
                TietzeMove::AddRelator {
                    word,
                    hint: hint.clone(),
                },
                TietzeMove::RemoveRedundantRelator {
                    relator: RelatorRef::Index(index),
                    hint,
                },
            ]
        }
        3 => {
            let mut options = Vec::new();
            for i in 0..state.relator_count() {
                for &g in state.generators() {
                    if state.solve(g, i).is_ok() {
                        options.push((g, i));
                    }
                }
            }
            if options.is_empty() {
                return Vec::new();
            }
            let (generator, i) = options[rng.gen_range(0..options.len())];
            vec![TietzeMove::EliminateGenerator {
                generator,
                via: RelatorRef::Index(i),
            }]
        }
        _ => vec![TietzeMove::SimplifyRelators],
    }
}

/// Replay `cases` random move sequences from `seed`, checking the abelian
/// invariants after every move. Returns the number of moves checked.
pub fn random_tietze_sequences(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moves_checked = 0;
    for case in 0..cases {
        let p = random_presentation(&mut rng);
        let reference = abelian_invariants(&p);
        let mut state = TietzeState::new(&p);
        let mut fresh = 0;
        let mut step = 0;
        for _ in 0..8 {
            for m in random_move(&mut rng, &state, &mut fresh) {
                step += 1;
                // Removal indices refer to the state after the preceding add.
                match state.apply(step, &m) {
                    Ok(true) => {}
                    other => return Err(format!("case {case}: {m} on {}: {other:?}", state.presentation())),
                }
                let now = abelian_invariants(&state.presentation());
                if now != reference {
                    return Err(format!("case {case} step {step}: {m} changed {reference} to {now}"));
                }
                moves_checked += 1;
            }
        }
    }
    Ok(moves_checked)
}
