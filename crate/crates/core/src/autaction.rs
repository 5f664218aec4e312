//! Action of welded braid words on the free group `F_n = <x1, ..., xn>`.
//!
//! `s_i` sends `x_i ↦ x_i x_{i+1} x_i^-1`, `x_{i+1} ↦ x_i`; `r_i` swaps
//! `x_i` and `x_{i+1}`. The action is faithful on `WB_n`, so a word is trivial
//! in `WB_n` exactly when it fixes every basis element. A `true` answer leans
//! on faithfulness; a `false` answer is exact by construction.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::presentation::{catalog, sigma, Family, FamilySpec};
use crate::words::{Generator, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("letter {letter} is not s_i or r_i with 1 <= i < {rank}")]
    InvalidLetter { letter: Generator, rank: usize },
    #[error("basis mismatch: rank {0} vs {1}")]
    BasisMismatch(usize, usize),
    #[error("free basis needs rank >= 1")]
    ZeroRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreeBasis {
    rank: usize,
}

impl FreeBasis {
    pub fn new(rank: usize) -> Result<Self, ActionError> {
        if rank == 0 {
            return Err(ActionError::ZeroRank);
        }
        Ok(Self { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    /// `x_i`, 1-based.
    pub fn symbol(self, i: usize) -> Generator {
        Generator::new(&format!("x{i}"))
    }

    pub fn symbols(self) -> Vec<Generator> {
        (1..=self.rank).map(|i| self.symbol(i)).collect()
    }
}

/// An endomorphism of `F_n`, stored by the images of the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeGroupEndo {
    basis: FreeBasis,
    images: Vec<Word>,
}

impl FreeGroupEndo {
    pub fn identity(basis: FreeBasis) -> Self {
        Self {
            basis,
            images: basis.symbols().into_iter().map(Word::letter).collect(),
        }
    }

    /// Images must be words over the basis symbols.
    pub fn from_images(basis: FreeBasis, images: Vec<Word>) -> Result<Self, ActionError> {
        if images.len() != basis.rank {
            return Err(ActionError::BasisMismatch(basis.rank, images.len()));
        }
        Ok(Self { basis, images })
    }

    pub fn basis(&self) -> FreeBasis {
        self.basis
    }

    /// Image of `x_i`, 1-based.
    pub fn image(&self, i: usize) -> &Word {
        &self.images[i - 1]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| *w == Word::letter(self.basis.symbol(i + 1)))
    }

    /// Apply to a word over the basis.
    pub fn apply(&self, w: &Word) -> Word {
        let symbols = self.basis.symbols();
        w.expand(|g| symbols.iter().position(|&s| s == g).map(|i| self.images[i].clone()))
    }

    /// `f` then `g` in substitution order: each basis letter in `f(x)` is
    /// replaced by its image under `g`.
    pub fn compose(&self, g: &FreeGroupEndo) -> Result<FreeGroupEndo, ActionError> {
        if self.basis != g.basis {
            return Err(ActionError::BasisMismatch(self.basis.rank, g.basis.rank));
        }
        Ok(FreeGroupEndo {
            basis: self.basis,
            images: self.images.iter().map(|w| g.apply(w)).collect(),
        })
    }
}

impl fmt::Display for FreeGroupEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("x{} -> {}", i + 1, w))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// How the actions of successive letters are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositionOrder {
    /// `action(uv) = compose(action(u), action(v))`.
    LeftToRight,
    /// `action(uv) = compose(action(v), action(u))`.
    RightToLeft,
}

impl CompositionOrder {
    pub fn name(self) -> &'static str {
        match self {
            CompositionOrder::LeftToRight => "left-to-right",
            CompositionOrder::RightToLeft => "right-to-left",
        }
    }
}

fn letter_kind(g: Generator, rank: usize) -> Result<(bool, usize), ActionError> {
    let bad = ActionError::InvalidLetter { letter: g, rank };
    let i = g.strand_index().ok_or(bad.clone())?;
    let rho = match g.family_prefix() {
        Some("s") => false,
        Some("r") => true,
        _ => return Err(bad),
    };
    if i == 0 || i + 1 > rank {
        return Err(bad);
    }
    Ok((rho, i))
}

/// Action of a single letter `g^exp` with `exp = ±1`.
fn letter_action(g: Generator, inverse: bool, basis: FreeBasis) -> Result<FreeGroupEndo, ActionError> {
    let (rho, i) = letter_kind(g, basis.rank)?;
    let mut e = FreeGroupEndo::identity(basis);
    let xi = Word::letter(basis.symbol(i));
    let xj = Word::letter(basis.symbol(i + 1));
    if rho {
        e.images[i - 1] = xj;
        e.images[i] = xi;
    } else if !inverse {
        e.images[i - 1] = xi.mul(&xj).mul(&xi.inverse());
        e.images[i] = xi;
    } else {
        e.images[i - 1] = xj.clone();
        e.images[i] = xj.inverse().mul(&xi).mul(&xj);
    }
    Ok(e)
}

/// Action of a generator `s_i` or `r_i` on `F_n`.
pub fn generator_action(g: Generator, basis: FreeBasis) -> Result<FreeGroupEndo, ActionError> {
    letter_action(g, false, basis)
}

/// Action of a σ/ρ word, combining letters in the given order.
pub fn action_of_word_with(w: &Word, basis: FreeBasis, order: CompositionOrder) -> Result<FreeGroupEndo, ActionError> {
    let mut acc = FreeGroupEndo::identity(basis);
    for (g, e) in w.letters() {
        let a = letter_action(g, e < 0, basis)?;
        acc = match order {
            CompositionOrder::LeftToRight => acc.compose(&a)?,
            CompositionOrder::RightToLeft => a.compose(&acc)?,
        };
    }
    Ok(acc)
}

/// Action of a σ/ρ word under the validated composition order.
pub fn action_of_word(w: &Word, basis: FreeBasis) -> Result<FreeGroupEndo, ActionError> {
    action_of_word_with(w, basis, working_order().order)
}

/// Outcome of testing a composition order against the `WB_n` relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderCheck {
    pub order: CompositionOrder,
    /// Relators checked per order, and how many acted trivially.
    pub relators: usize,
    pub trivial: usize,
    pub square_nontrivial: bool,
}

impl OrderCheck {
    pub fn holds(&self) -> bool {
        self.trivial == self.relators && self.square_nontrivial
    }
}

/// Check an order on the catalog relators of `WB_2 .. WB_max_n` and on `s1^2`.
pub fn check_order(order: CompositionOrder, max_n: usize) -> OrderCheck {
    let mut relators = 0;
    let mut trivial = 0;
    for n in 2..=max_n {
        let p = catalog(FamilySpec::new(Family::WeldedBraid, n)).expect("catalog");
        let basis = FreeBasis::new(n).expect("rank");
        for w in p.relator_words() {
            relators += 1;
            if action_of_word_with(w, basis, order).is_ok_and(|a| a.is_identity()) {
                trivial += 1;
            }
        }
    }
    let basis = FreeBasis::new(3).expect("rank");
    let square = Word::power(sigma(1), 2);
    let square_nontrivial = !action_of_word_with(&square, basis, order)
        .expect("valid letters")
        .is_identity();
    OrderCheck {
        order,
        relators,
        trivial,
        square_nontrivial,
    }
}

/// The composition order under which every `WB_n` relator (n <= 6) acts
/// trivially, falling back to the other order if the first fails.
pub fn working_order() -> &'static OrderCheck {
    static CHOSEN: OnceLock<OrderCheck> = OnceLock::new();
    CHOSEN.get_or_init(|| {
        let first = check_order(CompositionOrder::LeftToRight, 6);
        if first.holds() {
            return first;
        }
        let second = check_order(CompositionOrder::RightToLeft, 6);
        if second.holds() {
            second
        } else {
            first
        }
    })
}

/// Smallest rank on which every letter of `w` acts (at least 2).
pub fn rank_for(w: &Word) -> usize {
    w.generators()
        .iter()
        .filter_map(|g| g.strand_index())
        .map(|i| i + 1)
        .max()
        .unwrap_or(2)
        .max(2)
}

/// Decide `w = 1` in `WB_n`. `n` defaults to the smallest rank `w` needs.
pub fn is_identity_in_wb(w: &Word, n: Option<usize>) -> Result<bool, ActionError> {
    let basis = FreeBasis::new(n.unwrap_or_else(|| rank_for(w)))?;
    Ok(action_of_word(w, basis)?.is_identity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::rho;

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn generator_formulas() {
        let b = FreeBasis::new(3).unwrap();
        let r = generator_action(rho(1), b).unwrap();
        assert_eq!(r.to_string(), "x1 -> x2, x2 -> x1, x3 -> x3");
        let s = generator_action(sigma(1), b).unwrap();
        assert_eq!(s.to_string(), "x1 -> x1 x2 x1^-1, x2 -> x1, x3 -> x3");
        assert!(generator_action(sigma(2), FreeBasis::new(2).unwrap()).is_err());
        assert!(FreeBasis::new(0).is_err());
    }

    #[test]
    fn compose_examples() {
        let b = FreeBasis::new(3).unwrap();
        let r = generator_action(rho(1), b).unwrap();
        assert!(r.compose(&r).unwrap().is_identity());
        let id = FreeGroupEndo::identity(b);
        assert_eq!(id.compose(&r).unwrap(), r);
        assert_eq!(
            action_of_word(&w("s1 s2 s1"), b).unwrap(),
            action_of_word(&w("s2 s1 s2"), b).unwrap()
        );
        assert!(id
            .compose(&FreeGroupEndo::identity(FreeBasis::new(2).unwrap()))
            .is_err());
    }

    #[test]
    fn order_is_pinned() {
        let chosen = working_order();
        assert!(chosen.holds(), "{chosen:?}");
        let other = match chosen.order {
            CompositionOrder::LeftToRight => CompositionOrder::RightToLeft,
            CompositionOrder::RightToLeft => CompositionOrder::LeftToRight,
        };
        assert!(!check_order(other, 6).holds());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(is_identity_in_wb(&w("r1 s2 s1 r2^-1 s1^-1 s2^-1"), Some(3)), Ok(true));
        let sq = action_of_word(&w("s1^2"), FreeBasis::new(3).unwrap()).unwrap();
        assert_eq!(sq.image(1), &w("x1 x2 x1 x2^-1 x1^-1"));
        assert_eq!(is_identity_in_wb(&Word::identity(), None), Ok(true));
        assert_eq!(is_identity_in_wb(&w("r1"), None), Ok(false));
        assert!(is_identity_in_wb(&w("t1"), None).is_err());
    }
}
