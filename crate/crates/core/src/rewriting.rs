//! Reidemeister–Schreier rewriting: Schreier generators, the rewriting
//! process τ and presentations of kernels.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::RwLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::presentation::{Document, Presentation, PresentationError};
use crate::quotient::{Coset, QuotientMap, Transversal, TransversalKind};
use crate::words::{free_reduce, Generator, Lexer, ParseError, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("word {word} is not in the kernel (image {image:?})")]
    WordNotInKernel { word: Word, image: Coset },
    #[error("label {0} does not name a Schreier generator of this system")]
    UnknownLabel(Generator),
}

/// How Schreier generators are named.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelScheme {
    /// `alpha[m,e,i]` for `s_i` letters, `beta[m,e,i]` for `r_i` letters.
    Graded,
    /// One letter per (coset, letter kind) plus the strand index: `a2`, `h3`.
    Flat,
    /// `S[coords;letter]`.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchreierGenerator {
    pub label: Generator,
    pub coset: Coset,
    pub letter: Generator,
    /// `rep(coset) · letter · rep(coset · letter)^-1`, freely reduced.
    pub expansion: Word,
}

impl SchreierGenerator {
    pub fn is_trivial(&self) -> bool {
        self.expansion.is_identity()
    }
}

/// Parsed form of a graded label `alpha[m,e,i]` / `beta[m,e,i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradedLabel {
    /// `false` for alpha (sigma letters), `true` for beta (rho letters).
    pub rho: bool,
    pub shift: i64,
    pub flip: i64,
    pub strand: usize,
}

impl GradedLabel {
    pub fn alpha(shift: i64, flip: i64, strand: usize) -> Self {
        Self {
            rho: false,
            shift,
            flip,
            strand,
        }
    }

    pub fn beta(shift: i64, flip: i64, strand: usize) -> Self {
        Self {
            rho: true,
            shift,
            flip,
            strand,
        }
    }

    pub fn name(&self) -> String {
        let kind = if self.rho { "beta" } else { "alpha" };
        format!("{kind}[{},{},{}]", self.shift, self.flip, self.strand)
    }

    pub fn generator(&self) -> Generator {
        Generator::new(&self.name())
    }

    pub fn parse(g: Generator) -> Option<Self> {
        let name = g.name();
        let (rho, rest) = if let Some(r) = name.strip_prefix("alpha[") {
            (false, r)
        } else {
            (true, name.strip_prefix("beta[")?)
        };
        let inner = rest.strip_suffix(']')?;
        let mut parts = inner.split(',');
        let shift = parts.next()?.parse().ok()?;
        let flip = parts.next()?.parse().ok()?;
        let strand = parts.next()?.parse().ok()?;
        if parts.next().is_some() || !(0..=1).contains(&flip) {
            return None;
        }
        Some(Self {
            rho,
            shift,
            flip,
            strand,
        })
    }

    /// Sort key: kind, strand, then distance from the origin.
    fn order_key(&self) -> (bool, usize, u64, bool, i64) {
        (
            self.rho,
            self.strand,
            self.shift.unsigned_abs(),
            self.shift < 0,
            self.flip,
        )
    }
}

/// Flat label letter for a `(sigma, rho)` coset of `Z/2 x Z/2` and letter kind.
fn flat_letter(coset: &[i64], rho: bool) -> char {
    match (coset[0], coset[1], rho) {
        (0, 0, false) => 'a',
        (0, 0, true) => 'b',
        (0, 1, false) => 'c',
        (0, 1, true) => 'd',
        (1, 0, false) => 'e',
        (1, 0, true) => 'f',
        (1, 1, false) => 'g',
        _ => 'h',
    }
}

/// Schreier generators and τ for one quotient map and transversal.
pub struct Rewriter<'a> {
    q: &'a QuotientMap,
    t: &'a Transversal,
    scheme: LabelScheme,
    registry: RwLock<HashMap<Generator, (Coset, Generator)>>,
}

fn sigma_rho_letters(q: &QuotientMap) -> bool {
    q.source().generators().iter().all(|g| {
        matches!(g.family_prefix(), Some("s") | Some("r"))
            && q.generator_image(*g)
                == if g.family_prefix() == Some("s") {
                    &[1, 0][..]
                } else {
                    &[0, 1][..]
                }
    })
}

impl<'a> Rewriter<'a> {
    pub fn new(q: &'a QuotientMap, t: &'a Transversal) -> Self {
        let scheme = match t.kind() {
            TransversalKind::Graded { .. } if sigma_rho_letters(q) => LabelScheme::Graded,
            TransversalKind::Finite(_)
                if q.target().free_rank == 0 && q.target().torsion == [2, 2] && sigma_rho_letters(q) =>
            {
                LabelScheme::Flat
            }
            _ => LabelScheme::Generic,
        };
        Self {
            q,
            t,
            scheme,
            registry: RwLock::new(HashMap::new()),
        }
    }

    pub fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    pub fn quotient(&self) -> &QuotientMap {
        self.q
    }

    pub fn transversal(&self) -> &Transversal {
        self.t
    }

    fn label_for(&self, coset: &[i64], letter: Generator) -> Generator {
        let name = match self.scheme {
            LabelScheme::Graded => {
                let rho = letter.family_prefix() == Some("r");
                let strand = letter.strand_index().expect("strand-indexed letter");
                let label = if rho {
                    GradedLabel::beta(coset[0], coset[1], strand)
                } else {
                    GradedLabel::alpha(coset[0], coset[1], strand)
                };
                label.name()
            }
            LabelScheme::Flat => {
                let rho = letter.family_prefix() == Some("r");
                let strand = letter.strand_index().expect("strand-indexed letter");
                format!("{}{strand}", flat_letter(coset, rho))
            }
            LabelScheme::Generic => {
                let coords: Vec<String> = coset.iter().map(i64::to_string).collect();
                format!("S[{};{letter}]", coords.join(","))
            }
        };
        Generator::new(&name)
    }

    /// The Schreier generator `S_{coset, letter}`.
    pub fn schreier_generator(&self, coset: &[i64], letter: Generator) -> SchreierGenerator {
        let next = self.q.act(coset, letter, 1);
        let expansion = self
            .t
            .rep(coset)
            .mul(&Word::letter(letter))
            .mul(&self.t.rep(&next).inverse());
        let label = self.label_for(coset, letter);
        {
            let known = self.registry.read().unwrap().contains_key(&label);
            if !known {
                self.registry.write().unwrap().insert(label, (coset.to_vec(), letter));
            }
        }
        SchreierGenerator {
            label,
            coset: coset.to_vec(),
            letter,
            expansion,
        }
    }

    /// Largest `|m|` of a generator touched while rewriting a conjugate of a
    /// source relator from coset `(0, e)`. Zero for finite transversals.
    pub fn relator_reach(&self) -> i64 {
        if self.t.window().is_none() {
            return 0;
        }
        let mut reach = 0;
        for w in self.q.source().relator_words() {
            for flip in 0..2 {
                let mut coset = vec![0, flip];
                for (g, e) in w.letters() {
                    let next = self.q.act(&coset, g, e);
                    let used = if e > 0 { &coset } else { &next };
                    reach = reach.max(used[0].abs());
                    coset = next;
                }
            }
        }
        reach
    }

    /// `K + L` for graded transversals: the largest `|m|` of an instantiated
    /// generator.
    pub fn generator_radius(&self) -> Option<i64> {
        self.t.window().map(|k| k + self.relator_reach())
    }

    /// Conjugating cosets in instantiation order.
    pub fn conjugator_cosets(&self) -> Vec<Coset> {
        match self.t.kind() {
            TransversalKind::Finite(table) => table.cosets().to_vec(),
            TransversalKind::Graded { window, .. } => {
                (-window..=*window).flat_map(|m| [vec![m, 0], vec![m, 1]]).collect()
            }
        }
    }

    /// Every Schreier generator slot, in canonical label order. For graded
    /// transversals the slots cover `|m| <= K + L`.
    pub fn schreier_generators(&self) -> Vec<SchreierGenerator> {
        let cosets: Vec<Coset> = match self.t.kind() {
            TransversalKind::Finite(table) => table.cosets().to_vec(),
            TransversalKind::Graded { .. } => {
                let w = self.generator_radius().unwrap_or(0);
                (-w..=w).flat_map(|m| [vec![m, 0], vec![m, 1]]).collect()
            }
        };
        let letters = self.q.source().generators();
        let mut out: Vec<SchreierGenerator> = cosets
            .iter()
            .flat_map(|c| letters.iter().map(move |&a| (c, a)))
            .map(|(c, a)| self.schreier_generator(c, a))
            .collect();
        match self.scheme {
            LabelScheme::Graded => out.sort_by_key(|s| GradedLabel::parse(s.label).expect("graded label").order_key()),
            LabelScheme::Flat => out.sort_by_key(|s| {
                let name = s.label.name();
                (name.as_bytes()[0], s.letter.strand_index())
            }),
            LabelScheme::Generic => {}
        }
        out
    }

    fn tau(&self, w: &Word, keep_trivial: bool) -> Result<Word, RewriteError> {
        let image = self.q.image(w);
        if image != self.q.target().zero() {
            return Err(RewriteError::WordNotInKernel { word: w.clone(), image });
        }
        let mut coset = self.q.target().zero();
        let mut out = Vec::new();
        for (g, e) in w.letters() {
            let next = self.q.act(&coset, g, e);
            let s = if e > 0 {
                self.schreier_generator(&coset, g)
            } else {
                self.schreier_generator(&next, g)
            };
            if keep_trivial || !s.is_trivial() {
                out.push((s.label, e));
            }
            coset = next;
        }
        Ok(free_reduce(out))
    }

    /// τ with trivial Schreier generators erased.
    pub fn rewrite_tau(&self, w: &Word) -> Result<Word, RewriteError> {
        self.tau(w, false)
    }

    /// τ keeping every Schreier generator, trivial or not.
    pub fn rewrite_tau_raw(&self, w: &Word) -> Result<Word, RewriteError> {
        self.tau(w, true)
    }

    /// Expansion of a registered label.
    pub fn expansion_of(&self, label: Generator) -> Option<Word> {
        let entry = self.registry.read().unwrap().get(&label).cloned();
        let (coset, letter) = match entry {
            Some(e) => e,
            None => self.decode_label(label)?,
        };
        Some(self.schreier_generator(&coset, letter).expansion)
    }

    fn decode_label(&self, label: Generator) -> Option<(Coset, Generator)> {
        match self.scheme {
            LabelScheme::Graded => {
                let l = GradedLabel::parse(label)?;
                let prefix = if l.rho { "r" } else { "s" };
                let letter = Generator::new(&format!("{prefix}{}", l.strand));
                self.q.source().generator_position(letter)?;
                Some((vec![l.shift, l.flip], letter))
            }
            _ => None,
        }
    }

    /// Replace every label by its expansion and freely reduce.
    pub fn expand(&self, w: &Word) -> Result<Word, RewriteError> {
        let mut missing = None;
        let out = w.expand(|g| {
            let e = self.expansion_of(g);
            if e.is_none() {
                missing.get_or_insert(g);
            }
            Some(e.unwrap_or_default())
        });
        match missing {
            Some(g) => Err(RewriteError::UnknownLabel(g)),
            None => Ok(out),
        }
    }
}

/// Where a derived relator came from: the conjugate `λ r λ^-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    /// Index of `r` in the source presentation, when known.
    pub source: Option<usize>,
    /// Label of `r` (its family label, or `#index`).
    pub relator: String,
    pub coset: Coset,
    pub conjugator: Word,
}

impl Origin {
    pub fn describe(&self) -> String {
        let coords: Vec<String> = self.coset.iter().map(i64::to_string).collect();
        format!("{} @ ({}) via {}", self.relator, coords.join(","), self.conjugator)
    }
}

/// A kernel presentation with per-relator provenance.
#[derive(Debug, Clone)]
pub struct DerivedPresentation {
    pub base: Presentation,
    /// `origins[i]` lists every conjugate that rewrote to relator `i` (up to
    /// rotation and inversion); the first is the primary witness.
    pub origins: Vec<Vec<Origin>>,
    /// Conjugates whose rewrite is the identity.
    pub vacuous: Vec<Origin>,
    pub trivial: Vec<Generator>,
    /// Every Schreier generator slot including the trivial ones. Empty when the
    /// presentation was read back from text.
    pub schreier: Vec<SchreierGenerator>,
    /// Number of conjugates rewritten, before dedup.
    pub conjugates: usize,
    pub window: Option<i64>,
    pub radius: Option<i64>,
    /// Strand count of the source, when its generators are strand-indexed.
    pub strands: Option<usize>,
}

fn relator_name(p: &Presentation, index: usize) -> String {
    p.relators()[index].label.clone().unwrap_or_else(|| format!("#{index}"))
}

/// Rewrite `λ r λ^-1` for every source relator `r` and conjugating coset `λ`.
pub fn derived_presentation(rw: &Rewriter<'_>) -> DerivedPresentation {
    let source = rw.quotient().source();
    let cosets = rw.conjugator_cosets();
    let pairs: Vec<(usize, &Coset)> = (0..source.relators().len())
        .flat_map(|mu| cosets.iter().map(move |c| (mu, c)))
        .collect();
    let rewritten: Vec<(Origin, Word)> = pairs
        .par_iter()
        .map(|&(mu, coset)| {
            let lambda = rw.transversal().rep(coset);
            let conj = source.relators()[mu].word.conjugate_by(&lambda);
            let tau = rw.rewrite_tau(&conj).expect("conjugates of relators lie in the kernel");
            let origin = Origin {
                source: Some(mu),
                relator: relator_name(source, mu),
                coset: coset.clone(),
                conjugator: lambda,
            };
            (origin, tau.cyclically_reduce())
        })
        .collect();
    let conjugates = rewritten.len();

    let schreier = rw.schreier_generators();
    let trivial: Vec<Generator> = schreier.iter().filter(|s| s.is_trivial()).map(|s| s.label).collect();
    let generators: Vec<Generator> = schreier.iter().filter(|s| !s.is_trivial()).map(|s| s.label).collect();

    let mut words: Vec<Word> = Vec::new();
    let mut origins: Vec<Vec<Origin>> = Vec::new();
    let mut vacuous = Vec::new();
    let mut index: HashMap<Vec<crate::words::Syllable>, usize> = HashMap::new();
    for (origin, word) in rewritten {
        if word.is_identity() {
            vacuous.push(origin);
            continue;
        }
        let key = word.cyclic_key();
        match index.get(&key) {
            Some(&i) => origins[i].push(origin),
            None => {
                index.insert(key, words.len());
                words.push(word);
                origins.push(vec![origin]);
            }
        }
    }
    // Window truncation: a boundary conjugate can mention a label outside the
    // instantiated range only if the radius computation is wrong.
    let declared: std::collections::HashSet<Generator> = generators.iter().copied().collect();
    for w in &words {
        for s in w.syllables() {
            assert!(
                declared.contains(&s.gen),
                "derived relator uses undeclared label {}",
                s.gen
            );
        }
    }
    let base = Presentation::from_words(format!("{}'", source.name()), generators, words)
        .expect("derived relators use declared labels");
    DerivedPresentation {
        base,
        origins,
        vacuous,
        trivial,
        schreier,
        conjugates,
        window: rw.transversal().window(),
        radius: rw.generator_radius(),
        strands: source
            .generators()
            .iter()
            .map(|g| g.strand_index().map(|i| i + 1))
            .max()
            .flatten(),
    }
}

/// A single telescoping failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelescopingFailure {
    pub relator: usize,
    pub origin: String,
    pub reason: String,
}

impl DerivedPresentation {
    /// Re-derive every witness and check that expanding the raw rewrite
    /// reproduces `λ r λ^-1` exactly and that the erased rewrite is the stored
    /// relator up to rotation and inversion. Returns the number of witnesses
    /// checked.
    pub fn check_telescoping(&self, rw: &Rewriter<'_>) -> Result<usize, Vec<TelescopingFailure>> {
        let source = rw.quotient().source();
        let tasks: Vec<(usize, Option<&Word>, &Origin)> = self
            .origins
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |o| (i, Some(&self.base.relators()[i].word), o)))
            .chain(self.vacuous.iter().map(|o| (usize::MAX, None, o)))
            .collect();
        let failures: Vec<TelescopingFailure> = tasks
            .par_iter()
            .filter_map(|&(i, stored, origin)| {
                let fail = |reason: String| {
                    Some(TelescopingFailure {
                        relator: i,
                        origin: origin.describe(),
                        reason,
                    })
                };
                let Some(mu) = origin.source else {
                    return fail("origin has no source relator".into());
                };
                let conj = source.relators()[mu].word.conjugate_by(&origin.conjugator);
                let raw = match rw.rewrite_tau_raw(&conj) {
                    Ok(raw) => raw,
                    Err(e) => return fail(e.to_string()),
                };
                match rw.expand(&raw) {
                    Ok(expanded) if expanded == conj => {}
                    Ok(expanded) => return fail(format!("expansion {expanded} differs from {conj}")),
                    Err(e) => return fail(e.to_string()),
                }
                let erased = rw.rewrite_tau(&conj).expect("checked above");
                let ok = match stored {
                    Some(w) => erased.cyclically_equivalent(w),
                    None => erased.cyclically_reduce().is_identity(),
                };
                if ok {
                    None
                } else {
                    fail(format!("rewrite {erased} does not match stored relator"))
                }
            })
            .collect();
        if failures.is_empty() {
            Ok(tasks.len())
        } else {
            Err(failures)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = self.base.to_text();
        let mut params = Vec::new();
        if let Some(k) = self.window {
            params.push(format!("window={k}"));
        }
        if let Some(r) = self.radius {
            params.push(format!("radius={r}"));
        }
        if let Some(n) = self.strands {
            params.push(format!("strands={n}"));
        }
        params.push(format!("conjugates={}", self.conjugates));
        params.push(format!("generator_slots={}", self.generator_count_with_trivial()));
        let _ = writeln!(out, "params: {}", params.join(" "));
        out.push_str("trivial:");
        for g in &self.trivial {
            let _ = write!(out, " {g}");
        }
        out.push('\n');
        out.push_str("provenance:\n");
        for (i, list) in self.origins.iter().enumerate() {
            let items: Vec<String> = list.iter().map(Origin::describe).collect();
            let _ = writeln!(out, "  {i}: {}", items.join(" | "));
        }
        if !self.vacuous.is_empty() {
            let items: Vec<String> = self.vacuous.iter().map(Origin::describe).collect();
            let _ = writeln!(out, "  -: {}", items.join(" | "));
        }
        out
    }

    /// Read a derived presentation back. Schreier expansions are not part of
    /// the text format and come back empty.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        let doc = Document::parse(text)?;
        let base = Presentation::from_document(&doc)?;
        let mut window = None;
        let mut radius = None;
        let mut conjugates = None;
        let mut strands = None;
        if let Some(section) = doc.section("params") {
            for item in section.text.split_whitespace() {
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    ParseError::new(section.line, section.column, format!("malformed parameter {item:?}"))
                })?;
                let number: i64 = value.parse().map_err(|_| {
                    ParseError::new(section.line, section.column, format!("non-numeric parameter {item:?}"))
                })?;
                match key {
                    "window" => window = Some(number),
                    "radius" => radius = Some(number),
                    "conjugates" => conjugates = Some(number as usize),
                    "strands" => strands = Some(number as usize),
                    _ => {}
                }
            }
        }
        let mut trivial = Vec::new();
        if let Some(section) = doc.section("trivial") {
            let mut lexer = Lexer::new(&section.text, section.line, section.column);
            loop {
                lexer.skip_ws();
                if lexer.peek().is_none() {
                    break;
                }
                trivial.push(Generator::new(&lexer.name()?));
            }
        }
        let mut origins = vec![Vec::new(); base.relators().len()];
        let mut vacuous = Vec::new();
        if let Some(section) = doc.section("provenance") {
            for (offset, line) in section.text.lines().enumerate() {
                let line_no = section.line + offset;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let (head, body) = trimmed
                    .split_once(':')
                    .ok_or_else(|| ParseError::new(line_no, 1, "expected 'index: origins'"))?;
                let list = body
                    .split('|')
                    .map(|item| parse_origin(item.trim(), line_no))
                    .collect::<Result<Vec<_>, _>>()?;
                if head.trim() == "-" {
                    vacuous.extend(list);
                    continue;
                }
                let idx: usize = head
                    .trim()
                    .parse()
                    .map_err(|_| ParseError::new(line_no, 1, format!("bad relator index {head:?}")))?;
                if idx >= origins.len() {
                    return Err(ParseError::new(line_no, 1, format!("relator index {idx} out of range")).into());
                }
                origins[idx] = list;
            }
        }
        let conjugates = conjugates.unwrap_or_else(|| origins.iter().map(Vec::len).sum::<usize>() + vacuous.len());
        Ok(Self {
            base,
            origins,
            vacuous,
            trivial,
            schreier: Vec::new(),
            conjugates,
            window,
            radius,
            strands,
        })
    }

    pub fn generator_count_with_trivial(&self) -> usize {
        self.base.generators().len() + self.trivial.len()
    }
}

fn parse_origin(item: &str, line: usize) -> Result<Origin, ParseError> {
    let err = |m: &str| ParseError::new(line, 1, format!("{m} in origin {item:?}"));
    let (relator, rest) = item.split_once(" @ ").ok_or_else(|| err("missing '@'"))?;
    let rest = rest.trim();
    let open = rest.strip_prefix('(').ok_or_else(|| err("missing '('"))?;
    let (coords, tail) = open.split_once(')').ok_or_else(|| err("missing ')'"))?;
    let coset = coords
        .split(',')
        .map(|c| c.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| err("bad coset coordinates"))?;
    let conjugator = match tail.trim().strip_prefix("via") {
        Some(w) => Word::parse(w.trim()).map_err(|e| ParseError::new(line, 1, e.message))?,
        None => Word::identity(),
    };
    Ok(Origin {
        source: None,
        relator: relator.trim().to_owned(),
        coset,
        conjugator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::{catalog, Family, FamilySpec};
    use crate::quotient::{coset_table, graded_transversal, AbelianTarget};

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    fn flat(family: Family, n: usize) -> QuotientMap {
        let p = catalog(FamilySpec::new(family, n)).unwrap();
        QuotientMap::sigma_rho(p, AbelianTarget::z2_times_z2()).unwrap()
    }

    fn graded(n: usize) -> QuotientMap {
        let p = catalog(FamilySpec::new(Family::WeldedBraid, n)).unwrap();
        QuotientMap::sigma_rho(p, AbelianTarget::z_times_z2()).unwrap()
    }

    #[test]
    fn flat_generator_expansions() {
        let q = flat(Family::FlatVirtualBraid, 3);
        let (_, t) = coset_table(&q).unwrap();
        let rw = Rewriter::new(&q, &t);
        assert_eq!(rw.scheme(), LabelScheme::Flat);
        let c2 = rw.schreier_generator(&[0, 1], Generator::new("s2"));
        assert_eq!(c2.label.name(), "c2");
        assert_eq!(c2.expansion, w("r1 s2 r1^-1 s1^-1"));
        let gens = rw.schreier_generators();
        assert_eq!(gens.len(), 16);
        let labels: Vec<&str> = gens.iter().map(|s| s.label.name()).collect();
        assert_eq!(
            labels,
            ["a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2", "e1", "e2", "f1", "f2", "g1", "g2", "h1", "h2"]
        );
    }

    #[test]
    fn flat_tau_of_far_commutation() {
        let q = flat(Family::FlatVirtualBraid, 5);
        let (_, t) = coset_table(&q).unwrap();
        let rw = Rewriter::new(&q, &t);
        assert_eq!(rw.rewrite_tau(&w("s2 s4 s2 s4")).unwrap(), w("(a2 e4)^2"));
        assert!(rw.rewrite_tau(&Word::identity()).unwrap().is_identity());
        assert!(matches!(
            rw.rewrite_tau(&w("s1")),
            Err(RewriteError::WordNotInKernel { .. })
        ));
    }

    #[test]
    fn graded_generators_and_tau() {
        let q = graded(5);
        let t = graded_transversal(&q, 3).unwrap();
        let rw = Rewriter::new(&q, &t);
        assert_eq!(rw.scheme(), LabelScheme::Graded);
        assert_eq!(rw.relator_reach(), 2);
        let beta = rw.schreier_generator(&[2, 1], Generator::new("r3"));
        assert_eq!(beta.label.name(), "beta[2,1,3]");
        assert_eq!(beta.expansion, w("s1^2 r1 r3 s1^-2"));
        assert!(rw.schreier_generator(&[0, 0], Generator::new("s1")).is_trivial());
        let tau = rw.rewrite_tau(&w("s2 s4 s2^-1 s4^-1")).unwrap();
        assert_eq!(tau, w("alpha[0,0,2] alpha[1,0,4] alpha[1,0,2]^-1 alpha[0,0,4]^-1"));
    }

    #[test]
    fn derived_presentations_telescope() {
        let q = graded(4);
        let t = graded_transversal(&q, 2).unwrap();
        let rw = Rewriter::new(&q, &t);
        let d = derived_presentation(&rw);
        assert!(d.check_telescoping(&rw).is_ok());
        assert_eq!(d.conjugates, q.source().relators().len() * 10);

        let q = flat(Family::FlatWeldedBraid, 4);
        let (_, t) = coset_table(&q).unwrap();
        let rw = Rewriter::new(&q, &t);
        let d = derived_presentation(&rw);
        assert_eq!(d.conjugates, 4 * q.source().relators().len());
        assert_eq!(d.generator_count_with_trivial(), 8 * 3);
        assert!(d.check_telescoping(&rw).is_ok());
    }

    #[test]
    fn derived_text_round_trip() {
        let q = flat(Family::FlatVirtualBraid, 3);
        let (_, t) = coset_table(&q).unwrap();
        let rw = Rewriter::new(&q, &t);
        let d = derived_presentation(&rw);
        let text = d.to_text();
        let back = DerivedPresentation::parse(&text).unwrap();
        assert_eq!(back.base, d.base);
        assert_eq!(back.trivial, d.trivial);
        assert_eq!(back.origins.len(), d.origins.len());
        for (a, b) in back.origins.iter().zip(&d.origins) {
            let strip = |o: &Origin| (o.relator.clone(), o.coset.clone(), o.conjugator.clone());
            assert_eq!(
                a.iter().map(strip).collect::<Vec<_>>(),
                b.iter().map(strip).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn graded_label_round_trip() {
        let l = GradedLabel::beta(-3, 1, 4);
        assert_eq!(l.name(), "beta[-3,1,4]");
        assert_eq!(GradedLabel::parse(l.generator()), Some(l));
        assert_eq!(GradedLabel::parse(Generator::new("s1")), None);
    }
}
