//! Free-group words in syllable (run-length) form.
//!
//! A [`Word`] is a freely reduced sequence of syllables `g^e` with `e != 0`
//! and no two adjacent syllables on the same generator. Generators are
//! interned once per process, so equality and hashing never touch strings.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use thiserror::Error;

/// Position-tagged syntax error shared by every text format in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("generator {0} occurs in its own replacement; declare the substitution single-pass")]
    SelfReferentialSubstitution(Generator),
}

#[derive(Default)]
struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

/// An interned generator symbol such as `s1`, `r2` or `alpha[0,1,1]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u32);

impl Generator {
    pub fn new(name: &str) -> Self {
        if let Some(&id) = interner().read().unwrap().ids.get(name) {
            return Generator(id);
        }
        let mut table = interner().write().unwrap();
        if let Some(&id) = table.ids.get(name) {
            return Generator(id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = u32::try_from(table.names.len()).expect("generator table overflow");
        table.names.push(leaked);
        table.ids.insert(leaked, id);
        Generator(id)
    }

    pub fn name(self) -> &'static str {
        interner().read().unwrap().names[self.0 as usize]
    }

    /// Trailing strand index of names like `s3` or `r12`; `None` for anything else.
    pub fn strand_index(self) -> Option<usize> {
        let name = self.name();
        let split = name.find(|c: char| c.is_ascii_digit())?;
        let (head, digits) = name.split_at(split);
        if head.is_empty() || !head.chars().all(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    }

    /// Alphabetic prefix of a strand-indexed name (`s` for `s3`).
    pub fn family_prefix(self) -> Option<&'static str> {
        self.strand_index()?;
        let name = self.name();
        Some(&name[..name.find(|c: char| c.is_ascii_digit()).unwrap()])
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub gen: Generator,
    pub exp: i64,
}

impl Syllable {
    pub fn new(gen: Generator, exp: i64) -> Self {
        Self { gen, exp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionMode {
    /// Reject replacements that mention the generator being replaced.
    Strict,
    /// Replace every occurrence exactly once, even if the replacement mentions it.
    SinglePass,
}

/// A freely reduced word; the empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    syllables: Vec<Syllable>,
}

fn merged(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("word exponent overflow")
}

/// Freely reduce a raw list of `(generator, exponent)` pairs.
pub fn free_reduce<I>(raw: I) -> Word
where
    I: IntoIterator<Item = (Generator, i64)>,
{
    let mut out: Vec<Syllable> = Vec::new();
    for (gen, exp) in raw {
        push_syllable(&mut out, gen, exp);
    }
    Word { syllables: out }
}

fn push_syllable(out: &mut Vec<Syllable>, gen: Generator, exp: i64) {
    if exp == 0 {
        return;
    }
    match out.last_mut() {
        Some(top) if top.gen == gen => {
            top.exp = merged(top.exp, exp);
            if top.exp == 0 {
                out.pop();
            }
        }
        _ => out.push(Syllable { gen, exp }),
    }
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn letter(gen: Generator) -> Self {
        Word::power(gen, 1)
    }

    pub fn power(gen: Generator, exp: i64) -> Self {
        free_reduce([(gen, exp)])
    }

    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>) -> Self {
        free_reduce(syllables.into_iter().map(|s| (s.gen, s.exp)))
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters, i.e. the sum of absolute exponents.
    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|s| s.exp.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    /// Letters as `(generator, ±1)` pairs, left to right.
    pub fn letters(&self) -> impl Iterator<Item = (Generator, i64)> + '_ {
        self.syllables.iter().flat_map(|s| {
            let step = s.exp.signum();
            std::iter::repeat_n((s.gen, step), s.exp.unsigned_abs() as usize)
        })
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable::new(s.gen, -s.exp))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.syllables.clone();
        for s in &other.syllables {
            push_syllable(&mut out, s.gen, s.exp);
        }
        Word { syllables: out }
    }

    pub fn pow(&self, exp: i64) -> Word {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..exp.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `c · self · c⁻¹`.
    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.mul(self).mul(&c.inverse())
    }

    /// Cyclically reduced conjugate; matching end syllables are merged into the front.
    pub fn cyclically_reduce(&self) -> Word {
        let mut syl: std::collections::VecDeque<Syllable> = self.syllables.iter().copied().collect();
        while syl.len() >= 2 {
            let first = syl[0];
            let last = syl[syl.len() - 1];
            if first.gen != last.gen {
                break;
            }
            syl.pop_back();
            let exp = merged(first.exp, last.exp);
            if exp == 0 {
                syl.pop_front();
            } else {
                syl[0].exp = exp;
            }
        }
        Word {
            syllables: syl.into_iter().collect(),
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.syllables.first(), self.syllables.last()) {
            (Some(a), Some(b)) => self.syllables.len() == 1 || a.gen != b.gen,
            _ => true,
        }
    }

    pub fn contains(&self, gen: Generator) -> bool {
        self.syllables.iter().any(|s| s.gen == gen)
    }

    /// Total number of letters on `gen` (sum of |exponent|).
    pub fn occurrences(&self, gen: Generator) -> u64 {
        self.syllables
            .iter()
            .filter(|s| s.gen == gen)
            .map(|s| s.exp.unsigned_abs())
            .sum()
    }

    pub fn exponent_sum(&self, gen: Generator) -> i64 {
        self.syllables.iter().filter(|s| s.gen == gen).map(|s| s.exp).sum()
    }

    /// Distinct generators in order of first appearance.
    pub fn generators(&self) -> Vec<Generator> {
        let mut seen = Vec::new();
        for s in &self.syllables {
            if !seen.contains(&s.gen) {
                seen.push(s.gen);
            }
        }
        seen
    }

    /// Replace every `g^e` with `replacement^e`.
    pub fn substitute(&self, gen: Generator, replacement: &Word, mode: SubstitutionMode) -> Result<Word, WordError> {
        if mode == SubstitutionMode::Strict && replacement.contains(gen) {
            return Err(WordError::SelfReferentialSubstitution(gen));
        }
        Ok(self.expand(|g| (g == gen).then(|| replacement.clone())))
    }

    /// Single-pass homomorphic image: generators mapped to `Some(w)` become `w`,
    /// the rest stay put.
    pub fn expand<F>(&self, mut image: F) -> Word
    where
        F: FnMut(Generator) -> Option<Word>,
    {
        let mut out: Vec<Syllable> = Vec::new();
        for s in &self.syllables {
            match image(s.gen) {
                None => push_syllable(&mut out, s.gen, s.exp),
                Some(w) => {
                    let piece = if s.exp < 0 { w.inverse() } else { w };
                    for _ in 0..s.exp.unsigned_abs() {
                        for p in &piece.syllables {
                            push_syllable(&mut out, p.gen, p.exp);
                        }
                    }
                }
            }
        }
        Word { syllables: out }
    }

    /// Canonical representative of the cyclic class of `self` and its inverse.
    ///
    /// Two words receive the same key exactly when their cyclic reductions are
    /// rotations of each other, possibly after inverting one of them.
    pub fn cyclic_key(&self) -> Vec<Syllable> {
        let reduced = self.cyclically_reduce();
        let inverse = reduced.inverse();
        let mut best: Option<Vec<Syllable>> = None;
        for candidate in [&reduced, &inverse] {
            let syl = &candidate.syllables;
            for shift in 0..syl.len().max(1) {
                let rotated: Vec<Syllable> = syl[shift..].iter().chain(&syl[..shift]).copied().collect();
                if best.as_ref().is_none_or(|b| rotated < *b) {
                    best = Some(rotated);
                }
            }
        }
        best.unwrap_or_default()
    }

    pub fn cyclically_equivalent(&self, other: &Word) -> bool {
        self.cyclic_key() == other.cyclic_key()
    }

    pub fn parse(text: &str) -> Result<Word, ParseError> {
        let mut lexer = Lexer::new(text, 1, 1);
        let word = lexer.word_until(&[])?;
        lexer.skip_ws();
        if let Some(c) = lexer.peek() {
            return Err(lexer.error(format!("unexpected character {c:?}")));
        }
        Ok(word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if s.exp == 1 {
                write!(f, "{}", s.gen)?;
            } else {
                write!(f, "{}^{}", s.gen, s.exp)?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

/// Character cursor with line/column tracking, shared by the word, presentation
/// and script parsers.
pub(crate) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(text: &'a str, line: usize, column: usize) -> Self {
        Self {
            chars: text.chars().peekable(),
            line,
            column,
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }

    pub(crate) fn position(&self) -> (usize, usize) {
        (self.line, self.column)
    }

    fn is_name_start(c: char) -> bool {
        c.is_ascii_alphabetic() || c == '_'
    }

    fn is_name_char(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\''
    }

    /// Generator name: identifier with an optional `[...]` index block.
    pub(crate) fn name(&mut self) -> Result<String, ParseError> {
        let mut name = String::new();
        match self.peek() {
            Some(c) if Self::is_name_start(c) => {}
            Some(c) => return Err(self.error(format!("expected generator name, found {c:?}"))),
            None => return Err(self.error("expected generator name, found end of input")),
        }
        while let Some(c) = self.peek() {
            if !Self::is_name_char(c) {
                break;
            }
            name.push(c);
            self.bump();
        }
        if self.peek() == Some('[') {
            name.push('[');
            self.bump();
            loop {
                match self.bump() {
                    Some(']') => break,
                    Some('\n') | None => return Err(self.error("unterminated '[' in generator name")),
                    Some(c) if c.is_whitespace() => {}
                    Some(c) => name.push(c),
                }
            }
            name.push(']');
        }
        Ok(name)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.bump();
        let mut digits = String::new();
        if let Some(sign @ ('-' | '+')) = self.peek() {
            digits.push(sign);
            self.bump();
        }
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            digits.push(c);
            self.bump();
        }
        digits
            .parse::<i64>()
            .map_err(|_| self.error(format!("invalid exponent {digits:?}")))
    }

    /// Parse a word up to (not consuming) one of `stops` or end of input.
    /// Commas and closing parentheses always stop.
    pub(crate) fn word_until(&mut self, stops: &[char]) -> Result<Word, ParseError> {
        let mut acc = Word::identity();
        let mut saw_token = false;
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else { break };
            if stops.contains(&c) || c == ',' || c == ')' {
                break;
            }
            saw_token = true;
            if c == '(' {
                self.bump();
                let inner = self.word_until(&[])?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                let exp = self.exponent()?;
                acc = acc.mul(&inner.pow(exp));
            } else if c == '1' {
                self.bump();
                if matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric()) {
                    return Err(self.error("generator names must start with a letter"));
                }
                let _ = self.exponent()?;
            } else {
                let name = self.name()?;
                let exp = self.exponent()?;
                if exp == 0 {
                    continue;
                }
                acc = acc.mul(&Word::power(Generator::new(&name), exp));
            }
        }
        if !saw_token {
            return Err(self.error("expected a word"));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(name: &str) -> Generator {
        Generator::new(name)
    }

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        assert!(free_reduce([(g("s1"), 1), (g("s1"), -1)]).is_identity());
        assert_eq!(free_reduce([(g("s1"), 2), (g("s1"), -1), (g("r1"), 1)]), w("s1 r1"));
        // ρ₁² = 1 is a group relation, not a free one.
        assert_eq!(free_reduce([(g("r1"), 1), (g("r1"), 1)]), w("r1^2"));
    }

    #[test]
    fn invert_examples() {
        assert!(Word::identity().inverse().is_identity());
        assert_eq!(w("s1 r1").inverse(), w("r1^-1 s1^-1"));
        assert_eq!(w("s1^3").inverse(), w("s1^-3"));
    }

    #[test]
    fn cyclic_reduction_examples() {
        assert_eq!(w("s1 r1 s1^-1").cyclically_reduce(), w("r1"));
        assert_eq!(w("r1^2").cyclically_reduce(), w("r1^2"));
        assert_eq!(w("s1 s2 r1 s2^-1 s1^-1").cyclically_reduce(), w("r1"));
        assert_eq!(w("s1^2 r1 s1").cyclically_reduce(), w("s1^3 r1"));
    }

    #[test]
    fn substitute_examples() {
        let e1 = g("e1");
        assert!(w("e1 a1")
            .substitute(e1, &w("a1^-1"), SubstitutionMode::Strict)
            .unwrap()
            .is_identity());
        assert_eq!(
            w("g^2")
                .substitute(g("g"), &w("x y"), SubstitutionMode::Strict)
                .unwrap(),
            w("x y x y")
        );
        let ei = g("e3");
        assert_eq!(
            w("e3 a5 e3 a5")
                .substitute(ei, &w("a3^-1"), SubstitutionMode::Strict)
                .unwrap(),
            w("(a3^-1 a5)^2")
        );
    }

    #[test]
    fn self_referential_substitution_is_rejected() {
        let x = g("x");
        let err = w("x y").substitute(x, &w("x y"), SubstitutionMode::Strict);
        assert_eq!(err, Err(WordError::SelfReferentialSubstitution(x)));
        let ok = w("x y").substitute(x, &w("x y"), SubstitutionMode::SinglePass).unwrap();
        assert_eq!(ok, w("x y^2"));
    }

    #[test]
    fn text_round_trip() {
        for text in ["s1^2 r1 s2^-1", "1", "alpha[-1,0,2]^-1 beta[0,0,3]", "a b^7"] {
            assert_eq!(w(text).to_string(), text);
        }
        assert_eq!(w("(a b)^-2"), w("b^-1 a^-1 b^-1 a^-1"));
        assert_eq!(w("alpha[ 1, 0, 2 ]"), w("alpha[1,0,2]"));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Word::parse("a b^x").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(Word::parse("a (b").is_err());
        assert!(Word::parse("").is_err());
    }

    #[test]
    fn strand_indices() {
        assert_eq!(g("s12").strand_index(), Some(12));
        assert_eq!(g("r1").family_prefix(), Some("r"));
        assert_eq!(g("alpha[0,0,1]").strand_index(), None);
        assert_eq!(g("x").strand_index(), None);
    }

    #[test]
    fn cyclic_key_identifies_rotations_and_inverses() {
        let a = w("a b c^-1");
        assert!(a.cyclically_equivalent(&w("b c^-1 a")));
        assert!(a.cyclically_equivalent(&w("c b^-1 a^-1")));
        assert!(!a.cyclically_equivalent(&w("a c^-1 b")));
        assert!(w("x a x^-1").cyclically_equivalent(&w("a")));
    }
}
