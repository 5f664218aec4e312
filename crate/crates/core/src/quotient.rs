//! Abelian quotient maps, their coset tables and Schreier transversals.
//!
//! Cosets of a kernel are identified with normalized target elements, so no
//! coset enumeration is needed: multiplying images is enough.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::abelian::{smith_normal_form, IntMatrix, Matrix};
use crate::presentation::Presentation;
use crate::words::{Generator, Word};

/// A target element, normalized: free coordinates first, then torsion
/// coordinates reduced into `[0, d)`.
pub type Coset = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error("torsion coefficients must be at least 2, got {0}")]
    BadTorsion(i64),
    #[error("generator {0} has no image")]
    MissingImage(String),
    #[error("image of {generator} has {got} coordinates, target needs {expected}")]
    WrongArity {
        generator: String,
        got: usize,
        expected: usize,
    },
    #[error("relators not killed: {}", .0.iter().map(|r| format!("#{} {} -> {:?}", r.index, r.word, r.image)).collect::<Vec<_>>().join("; "))]
    RelatorNotKilled(Vec<UnkilledRelator>),
    #[error("generator images do not generate the target")]
    NotSurjective,
    #[error("coset tables need a finite target; use a graded transversal")]
    InfiniteTarget,
    #[error("graded transversals need target Z x Z/2 with generators mapping to (1,0) and (0,1)")]
    TargetShape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnkilledRelator {
    pub index: usize,
    pub word: Word,
    pub image: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbelianTarget {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

impl AbelianTarget {
    pub fn new(free_rank: usize, torsion: Vec<i64>) -> Result<Self, QuotientError> {
        if let Some(&bad) = torsion.iter().find(|&&t| t < 2) {
            return Err(QuotientError::BadTorsion(bad));
        }
        Ok(Self { free_rank, torsion })
    }

    /// `Z x Z/2`, the abelianization of the welded braid groups.
    pub fn z_times_z2() -> Self {
        Self {
            free_rank: 1,
            torsion: vec![2],
        }
    }

    /// `Z/2 x Z/2`, the abelianization of the flat braid groups.
    pub fn z2_times_z2() -> Self {
        Self {
            free_rank: 0,
            torsion: vec![2, 2],
        }
    }

    pub fn arity(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<u64> {
        self.is_finite()
            .then(|| self.torsion.iter().map(|&t| t as u64).product())
    }

    pub fn zero(&self) -> Coset {
        vec![0; self.arity()]
    }

    pub fn normalize(&self, mut element: Vec<i64>) -> Coset {
        for (x, &d) in element[self.free_rank..].iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(d);
        }
        element
    }

    pub fn add_scaled(&self, a: &[i64], b: &[i64], k: i64) -> Coset {
        let sum = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                y.checked_mul(k)
                    .and_then(|t| x.checked_add(t))
                    .expect("coset coordinate overflow")
            })
            .collect();
        self.normalize(sum)
    }
}

impl fmt::Display for AbelianTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            parts.push("0".into());
        }
        f.write_str(&parts.join(" x "))
    }
}

/// A validated homomorphism from a presented group onto an abelian target.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: Presentation,
    target: AbelianTarget,
    images: HashMap<Generator, Coset>,
}

impl QuotientMap {
    pub fn new(
        source: Presentation,
        target: AbelianTarget,
        images: impl IntoIterator<Item = (Generator, Vec<i64>)>,
    ) -> Result<Self, QuotientError> {
        let mut table = HashMap::new();
        for (g, image) in images {
            if image.len() != target.arity() {
                return Err(QuotientError::WrongArity {
                    generator: g.name().to_owned(),
                    got: image.len(),
                    expected: target.arity(),
                });
            }
            table.insert(g, target.normalize(image));
        }
        if let Some(g) = source.generators().iter().find(|g| !table.contains_key(g)) {
            return Err(QuotientError::MissingImage(g.name().to_owned()));
        }
        let map = Self {
            source,
            target,
            images: table,
        };
        let unkilled: Vec<UnkilledRelator> = map
            .source
            .relator_words()
            .enumerate()
            .filter_map(|(index, w)| {
                let image = map.image(w);
                (image != map.target.zero()).then(|| UnkilledRelator {
                    index,
                    word: w.clone(),
                    image,
                })
            })
            .collect();
        if !unkilled.is_empty() {
            return Err(QuotientError::RelatorNotKilled(unkilled));
        }
        if !map.is_surjective() {
            return Err(QuotientError::NotSurjective);
        }
        Ok(map)
    }

    /// The standard map of the braid-like families: every `s_i` goes to the
    /// first target generator and every `r_i` to the second.
    pub fn sigma_rho(source: Presentation, target: AbelianTarget) -> Result<Self, QuotientError> {
        let arity = target.arity();
        let images: Vec<(Generator, Vec<i64>)> = source
            .generators()
            .iter()
            .map(|&g| {
                let mut image = vec![0; arity];
                match g.family_prefix() {
                    Some("s") if arity > 0 => image[0] = 1,
                    Some("r") if arity > 1 => image[1] = 1,
                    _ => {}
                }
                (g, image)
            })
            .collect();
        Self::new(source, target, images)
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> &AbelianTarget {
        &self.target
    }

    pub fn generator_image(&self, g: Generator) -> &[i64] {
        self.images
            .get(&g)
            .unwrap_or_else(|| panic!("generator {g} is not in the quotient source"))
    }

    /// Image of a word under the map, normalized.
    pub fn image(&self, w: &Word) -> Coset {
        let mut acc = self.target.zero();
        for s in w.syllables() {
            acc = self.target.add_scaled(&acc, self.generator_image(s.gen), s.exp);
        }
        acc
    }

    /// The coset obtained by multiplying `coset` on the right by `g^exp`.
    pub fn act(&self, coset: &[i64], g: Generator, exp: i64) -> Coset {
        self.target.add_scaled(coset, self.generator_image(g), exp)
    }

    fn is_surjective(&self) -> bool {
        let arity = self.target.arity();
        if arity == 0 {
            return true;
        }
        let mut rows: Vec<Vec<i64>> = self
            .source
            .generators()
            .iter()
            .map(|g| self.images[g].clone())
            .collect();
        for (k, &d) in self.target.torsion.iter().enumerate() {
            let mut row = vec![0; arity];
            row[self.target.free_rank + k] = d;
            rows.push(row);
        }
        let m: IntMatrix = Matrix::from_rows(rows, arity);
        let form = smith_normal_form(&m);
        form.rank == arity && form.diagonal().iter().all(|d| *d == 1.into())
    }
}

/// Right action of generators on the cosets of a finite-index kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    cosets: Vec<Coset>,
    generators: Vec<Generator>,
    /// `action[c][2k]` is `c·g_k`, `action[c][2k+1]` is `c·g_k^-1`.
    action: Vec<Vec<usize>>,
}

impl CosetTable {
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn cosets(&self) -> &[Coset] {
        &self.cosets
    }

    pub fn index_of(&self, coset: &[i64]) -> Option<usize> {
        self.cosets.iter().position(|c| c == coset)
    }

    pub fn act(&self, coset: usize, g: Generator, exp: i64) -> usize {
        let k = self
            .generators
            .iter()
            .position(|&x| x == g)
            .unwrap_or_else(|| panic!("generator {g} not in coset table"));
        let column = 2 * k + usize::from(exp < 0);
        let mut c = coset;
        for _ in 0..exp.unsigned_abs() {
            c = self.action[c][column];
        }
        c
    }

    /// Every column is a permutation of the cosets and `g`, `g^-1` columns are
    /// mutually inverse.
    pub fn is_consistent(&self) -> bool {
        let n = self.cosets.len();
        (0..self.generators.len()).all(|k| {
            let mut hit = vec![false; n];
            for c in 0..n {
                let image = self.action[c][2 * k];
                if hit[image] || self.action[image][2 * k + 1] != c {
                    return false;
                }
                hit[image] = true;
            }
            true
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("coset");
        for g in &self.generators {
            out.push_str(&format!(" {g} {g}^-1"));
        }
        out.push('\n');
        for (c, row) in self.action.iter().enumerate() {
            out.push_str(&c.to_string());
            for x in row {
                out.push_str(&format!(" {x}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransversalKind {
    Finite(CosetTable),
    /// Representatives `t^m u^e` for the class `(m, e)` of `Z x Z/2`. The window
    /// only bounds which conjugators get instantiated later on.
    Graded {
        window: i64,
        shift: Generator,
        flip: Generator,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    kind: TransversalKind,
    finite_reps: Vec<Word>,
}

impl Transversal {
    pub fn kind(&self) -> &TransversalKind {
        &self.kind
    }

    pub fn table(&self) -> Option<&CosetTable> {
        match &self.kind {
            TransversalKind::Finite(t) => Some(t),
            TransversalKind::Graded { .. } => None,
        }
    }

    pub fn window(&self) -> Option<i64> {
        match self.kind {
            TransversalKind::Graded { window, .. } => Some(window),
            TransversalKind::Finite(_) => None,
        }
    }

    /// Representative of a normalized coset.
    pub fn rep(&self, coset: &[i64]) -> Word {
        match &self.kind {
            TransversalKind::Finite(table) => {
                let index = table
                    .index_of(coset)
                    .unwrap_or_else(|| panic!("unknown coset {coset:?}"));
                self.finite_reps[index].clone()
            }
            TransversalKind::Graded { shift, flip, .. } => {
                Word::power(*shift, coset[0]).mul(&Word::power(*flip, coset[1]))
            }
        }
    }

    /// Finite representatives in coset-table order.
    pub fn finite_reps(&self) -> &[Word] {
        &self.finite_reps
    }

    /// Every prefix of every listed representative is itself a representative.
    pub fn is_prefix_closed(&self, q: &QuotientMap, extra: &[Coset]) -> bool {
        let reps: Vec<Word> = match &self.kind {
            TransversalKind::Finite(_) => self.finite_reps.clone(),
            TransversalKind::Graded { .. } => extra.iter().map(|c| self.rep(c)).collect(),
        };
        reps.iter().all(|w| {
            let letters: Vec<(Generator, i64)> = w.letters().collect();
            (0..=letters.len()).all(|cut| {
                let prefix = crate::words::free_reduce(letters[..cut].iter().copied());
                self.rep(&q.image(&prefix)) == prefix
            })
        })
    }
}

/// Cosets of the kernel of a finite quotient, with shortlex-minimal
/// representatives in the source generator order.
pub fn coset_table(q: &QuotientMap) -> Result<(CosetTable, Transversal), QuotientError> {
    if !q.target().is_finite() {
        return Err(QuotientError::InfiniteTarget);
    }
    let generators = q.source().generators().to_vec();
    let mut cosets: Vec<Coset> = vec![q.target().zero()];
    let mut reps: Vec<Word> = vec![Word::identity()];
    let mut index: HashMap<Coset, usize> = HashMap::from([(q.target().zero(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for &g in &generators {
            for exp in [1, -1] {
                let next = q.act(&cosets[c], g, exp);
                if !index.contains_key(&next) {
                    index.insert(next.clone(), cosets.len());
                    reps.push(reps[c].mul(&Word::power(g, exp)));
                    cosets.push(next);
                    queue.push_back(cosets.len() - 1);
                }
            }
        }
    }
    let action = cosets
        .iter()
        .map(|c| {
            generators
                .iter()
                .flat_map(|&g| [index[&q.act(c, g, 1)], index[&q.act(c, g, -1)]])
                .collect()
        })
        .collect();
    let table = CosetTable {
        cosets,
        generators,
        action,
    };
    let transversal = Transversal {
        kind: TransversalKind::Finite(table.clone()),
        finite_reps: reps,
    };
    Ok((table, transversal))
}

/// The transversal `{ t^m u^e }` for a quotient onto `Z x Z/2`, where `t` and
/// `u` are the first generators mapping to `(1,0)` and `(0,1)`.
pub fn graded_transversal(q: &QuotientMap, window: i64) -> Result<Transversal, QuotientError> {
    if *q.target() != AbelianTarget::z_times_z2() {
        return Err(QuotientError::TargetShape);
    }
    let find = |image: &[i64]| {
        q.source()
            .generators()
            .iter()
            .copied()
            .find(|&g| q.generator_image(g) == image)
            .ok_or(QuotientError::TargetShape)
    };
    Ok(Transversal {
        kind: TransversalKind::Graded {
            window,
            shift: find(&[1, 0])?,
            flip: find(&[0, 1])?,
        },
        finite_reps: Vec::new(),
    })
}

/// The coset of `w`, i.e. its normalized image.
pub fn coset_of(q: &QuotientMap, w: &Word) -> Coset {
    q.image(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{catalog, Family, FamilySpec};

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    fn wb(n: usize) -> Presentation {
        catalog(FamilySpec::new(Family::WeldedBraid, n)).unwrap()
    }

    #[test]
    fn welded_braid_quotient_is_valid() {
        assert!(QuotientMap::sigma_rho(wb(4), AbelianTarget::z_times_z2()).is_ok());
        let fvb = catalog(FamilySpec::new(Family::FlatVirtualBraid, 3)).unwrap();
        assert!(QuotientMap::sigma_rho(fvb, AbelianTarget::z2_times_z2()).is_ok());
    }

    #[test]
    fn rho_square_is_not_killed_by_z() {
        let p = wb(3);
        let images = p.generators().iter().map(|&g| (g, vec![1])).collect::<Vec<_>>();
        let err = QuotientMap::new(p, AbelianTarget::new(1, vec![]).unwrap(), images).unwrap_err();
        match err {
            QuotientError::RelatorNotKilled(list) => {
                assert!(list.iter().any(|r| r.word == w("r1^2") && r.image == [2]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_surjective_map_is_rejected() {
        let p = Presentation::parse("gens: a\nrels: a^2").unwrap();
        let a = p.generators()[0];
        let target = AbelianTarget::new(0, vec![4]).unwrap();
        assert_eq!(
            QuotientMap::new(p, target, [(a, vec![2])]).unwrap_err(),
            QuotientError::NotSurjective
        );
    }

    #[test]
    fn flat_coset_table() {
        for family in [Family::FlatVirtualBraid, Family::FlatWeldedBraid] {
            for n in [3, 6] {
                let p = catalog(FamilySpec::new(family, n)).unwrap();
                let q = QuotientMap::sigma_rho(p, AbelianTarget::z2_times_z2()).unwrap();
                let (table, t) = coset_table(&q).unwrap();
                assert_eq!(table.len(), 4);
                assert!(table.is_consistent());
                let reps: Vec<String> = t.finite_reps().iter().map(|r| r.to_string()).collect();
                assert_eq!(reps, ["1", "s1", "r1", "s1 r1"]);
                assert!(t.is_prefix_closed(&q, &[]));
            }
        }
    }

    #[test]
    fn trivial_target_has_one_coset() {
        let p = Presentation::parse("gens: a\nrels: a").unwrap();
        let a = p.generators()[0];
        let q = QuotientMap::new(p, AbelianTarget::new(0, vec![]).unwrap(), [(a, vec![])]).unwrap();
        let (table, t) = coset_table(&q).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(t.finite_reps(), [Word::identity()]);
    }

    #[test]
    fn graded_representatives() {
        let q = QuotientMap::sigma_rho(wb(5), AbelianTarget::z_times_z2()).unwrap();
        let t = graded_transversal(&q, 3).unwrap();
        assert_eq!(t.rep(&[2, 1]), w("s1^2 r1"));
        assert_eq!(t.rep(&[0, 0]), Word::identity());
        assert_eq!(t.rep(&[-1, 0]), w("s1^-1"));
        for m in -10..=10 {
            for e in 0..2 {
                assert_eq!(coset_of(&q, &t.rep(&[m, e])), vec![m, e]);
            }
        }
        assert!(coset_table(&q).is_err());
    }

    #[test]
    fn graded_rejects_finite_target() {
        let p = catalog(FamilySpec::new(Family::FlatVirtualBraid, 3)).unwrap();
        let q = QuotientMap::sigma_rho(p, AbelianTarget::z2_times_z2()).unwrap();
        assert_eq!(graded_transversal(&q, 3).unwrap_err(), QuotientError::TargetShape);
    }

    #[test]
    fn coset_of_examples() {
        let q = QuotientMap::sigma_rho(wb(4), AbelianTarget::z_times_z2()).unwrap();
        assert_eq!(coset_of(&q, &w("s2 r2")), [1, 1]);
        assert_eq!(coset_of(&q, &w("s1^5 r1^2")), [5, 0]);
        for r in q.source().relator_words() {
            assert_eq!(coset_of(&q, r), [0, 0]);
        }
    }
}
