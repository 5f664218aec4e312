//! Tietze transformations: validated moves, a replayable script language and a
//! greedy simplifier.
//!
//! Relators can be referenced by position (`#3`) or, for derived
//! presentations, by the conjugate they came from (`sbraid[1] @ (0,1)`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::abelian::abelian_invariants;
use crate::presentation::{Presentation, Relator};
use crate::rewriting::{DerivedPresentation, Origin};
use crate::words::{free_reduce, Generator, ParseError, SubstitutionMode, Syllable, Word};

pub const GRADED_ELIMINATION: &str = include_str!("../scripts/lemma-2.3.tz");
pub const GRADED_ALTERNATIVE: &str = include_str!("../scripts/lemma-2.4.tz");
pub const FLAT_VIRTUAL_ELIMINATION: &str = include_str!("../scripts/lemma-3.4-fvb.tz");
pub const FLAT_WELDED_ELIMINATION: &str = include_str!("../scripts/lemma-3.4-fwb.tz");

/// Scripts shipped with the crate, by file name.
pub fn builtin_script(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".tz") {
        "lemma-2.3" => Some(GRADED_ELIMINATION),
        "lemma-2.4" => Some(GRADED_ALTERNATIVE),
        "lemma-3.4-fvb" => Some(FLAT_VIRTUAL_ELIMINATION),
        "lemma-3.4-fwb" => Some(FLAT_WELDED_ELIMINATION),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TietzeError {
    #[error("generator {0} is not in the presentation")]
    UnknownGenerator(Generator),
    #[error("relator #{relator} does not contain {generator} exactly once with exponent ±1")]
    NotSolvable { generator: Generator, relator: usize },
    #[error("relator index {0} out of range")]
    RelatorOutOfRange(usize),
    #[error("step {step} (line {line}): {reason}")]
    MoveInvalid { step: usize, line: usize, reason: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A relator named by position or by the conjugate it was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelatorRef {
    Index(usize),
    Origin { relator: String, coset: Vec<i64> },
}

impl fmt::Display for RelatorRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelatorRef::Index(i) => write!(f, "#{i}"),
            RelatorRef::Origin { relator, coset } => {
                let coords: Vec<String> = coset.iter().map(i64::to_string).collect();
                write!(f, "{relator} @ ({})", coords.join(","))
            }
        }
    }
}

/// One factor `c · R^e · c^-1` of a consequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub relator: RelatorRef,
    pub inverse: bool,
    pub conjugator: Word,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.relator)?;
        if self.inverse {
            f.write_str("^-1")?;
        }
        if !self.conjugator.is_identity() {
            write!(f, " conj {}", self.conjugator)?;
        }
        Ok(())
    }
}

/// Product of conjugates of existing relators, proving a word is a consequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivationHint {
    pub factors: Vec<Factor>,
}

impl fmt::Display for DerivationHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(Factor::to_string).collect();
        f.write_str(&parts.join(" ; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TietzeMove {
    /// Solve the relator for the generator and substitute everywhere.
    EliminateGenerator {
        generator: Generator,
        via: RelatorRef,
    },
    AddRelator {
        word: Word,
        hint: DerivationHint,
    },
    RemoveRedundantRelator {
        relator: RelatorRef,
        hint: DerivationHint,
    },
    /// Add a generator `g` together with the relator `w g^-1`.
    IntroduceGenerator {
        generator: Generator,
        word: Word,
    },
    /// Cyclically reduce, drop identities and merge duplicate relators.
    SimplifyRelators,
}

impl fmt::Display for TietzeMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TietzeMove::EliminateGenerator { generator, via } => write!(f, "eliminate {generator} via {via}"),
            TietzeMove::AddRelator { word, hint } => write!(f, "add {word} by {hint}"),
            TietzeMove::RemoveRedundantRelator { relator, hint } => write!(f, "remove {relator} by {hint}"),
            TietzeMove::IntroduceGenerator { generator, word } => write!(f, "introduce {generator} = {word}"),
            TietzeMove::SimplifyRelators => f.write_str("simplify"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    /// Source line, 0 for generated steps.
    pub line: usize,
    pub action: TietzeMove,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TietzeScript {
    pub name: String,
    pub steps: Vec<ScriptStep>,
}

/// Values of the variables usable in script expressions.
#[derive(Debug, Clone, Default)]
pub struct ScriptContext {
    vars: BTreeMap<String, i64>,
}

impl ScriptContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` strands, window `K` and generator radius `W`.
    pub fn for_window(strands: usize, window: i64, radius: i64) -> Self {
        let mut c = Self::new();
        c.set("n", strands as i64);
        c.set("K", window);
        c.set("W", radius);
        c
    }

    pub fn set(&mut self, name: &str, value: i64) {
        self.vars.insert(name.to_owned(), value);
    }
}

struct ExprParser<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
    vars: &'a BTreeMap<String, i64>,
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(&text[start..i]);
        } else {
            out.push(&text[i..i + 1]);
            i += 1;
        }
    }
    out
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<i64, String> {
        let mut acc = self.term()?;
        while let Some(op @ ("+" | "-")) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == "+" {
                acc.checked_add(rhs)
            } else {
                acc.checked_sub(rhs)
            }
            .ok_or("overflow")?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<i64, String> {
        let mut acc = self.factor()?;
        while self.peek() == Some("*") {
            self.pos += 1;
            acc = acc.checked_mul(self.factor()?).ok_or("overflow")?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<i64, String> {
        let tok = self.peek().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            "-" => Ok(-self.factor()?),
            "(" => {
                let v = self.expr()?;
                if self.peek() != Some(")") {
                    return Err("expected ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            t if t.chars().all(|c| c.is_ascii_digit()) => t.parse().map_err(|_| format!("bad number {t}")),
            t => self.vars.get(t).copied().ok_or_else(|| format!("unknown variable {t}")),
        }
    }
}

fn eval(text: &str, vars: &BTreeMap<String, i64>) -> Result<i64, String> {
    let mut p = ExprParser {
        tokens: tokenize(text),
        pos: 0,
        vars,
    };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input in expression {text:?}"));
    }
    Ok(v)
}

fn interpolate(text: &str, vars: &BTreeMap<String, i64>) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').ok_or("unterminated '{'")? + open;
        out.push_str(&eval(&rest[open + 1..close], vars)?.to_string());
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn parse_ref(text: &str) -> Result<RelatorRef, String> {
    let text = text.trim();
    if let Some(num) = text.strip_prefix('#') {
        return num
            .trim()
            .parse()
            .map(RelatorRef::Index)
            .map_err(|_| format!("bad relator index {text:?}"));
    }
    let (label, coset) = text
        .split_once('@')
        .ok_or_else(|| format!("expected '#index' or 'label @ (coset)', got {text:?}"))?;
    let coords = coset
        .trim()
        .strip_prefix('(')
        .and_then(|c| c.strip_suffix(')'))
        .ok_or_else(|| format!("expected '(...)' after '@' in {text:?}"))?;
    let coset = coords
        .split(',')
        .map(|c| c.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("bad coset in {text:?}"))?;
    Ok(RelatorRef::Origin {
        relator: label.split_whitespace().collect(),
        coset,
    })
}

fn parse_word(text: &str) -> Result<Word, String> {
    Word::parse(text.trim()).map_err(|e| e.message)
}

fn parse_generator(text: &str) -> Result<Generator, String> {
    let w = parse_word(text)?;
    match w.syllables() {
        [s] if s.exp == 1 => Ok(s.gen),
        _ => Err(format!("expected a generator, got {text:?}")),
    }
}

fn parse_hint(text: &str) -> Result<DerivationHint, String> {
    let factors = text
        .split(';')
        .map(|f| {
            let (head, conj) = match f.split_once(" conj ") {
                Some((h, c)) => (h, parse_word(c)?),
                None => (f, Word::identity()),
            };
            let head = head.trim();
            let (head, inverse) = match head.strip_suffix("^-1") {
                Some(h) => (h, true),
                None => (head, false),
            };
            Ok(Factor {
                relator: parse_ref(head)?,
                inverse,
                conjugator: conj,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(DerivationHint { factors })
}

fn parse_move(text: &str) -> Result<TietzeMove, String> {
    let text = text.trim();
    let (verb, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    match verb {
        "simplify" if rest.trim().is_empty() => Ok(TietzeMove::SimplifyRelators),
        "eliminate" => {
            let (g, via) = rest.split_once(" via ").ok_or("expected 'eliminate GEN via REF'")?;
            Ok(TietzeMove::EliminateGenerator {
                generator: parse_generator(g)?,
                via: parse_ref(via)?,
            })
        }
        "remove" => {
            let (r, hint) = rest.split_once(" by ").ok_or("expected 'remove REF by HINT'")?;
            Ok(TietzeMove::RemoveRedundantRelator {
                relator: parse_ref(r)?,
                hint: parse_hint(hint)?,
            })
        }
        "add" => {
            let (w, hint) = rest.split_once(" by ").ok_or("expected 'add WORD by HINT'")?;
            Ok(TietzeMove::AddRelator {
                word: parse_word(w)?,
                hint: parse_hint(hint)?,
            })
        }
        "introduce" => {
            let (g, w) = rest.split_once('=').ok_or("expected 'introduce GEN = WORD'")?;
            Ok(TietzeMove::IntroduceGenerator {
                generator: parse_generator(g)?,
                word: parse_word(w)?,
            })
        }
        _ => Err(format!("unknown move {verb:?}")),
    }
}

struct Range {
    var: String,
    from: String,
    to: String,
    reverse: bool,
}

fn parse_loops(header: &str) -> Result<Vec<Range>, String> {
    header
        .split(',')
        .map(|part| {
            let (var, range) = part
                .split_once(" in ")
                .ok_or_else(|| format!("expected 'VAR in A..B', got {part:?}"))?;
            let range = range.trim();
            let (range, reverse) = match range.strip_suffix("rev") {
                Some(r) => (r.trim(), true),
                None => (range, false),
            };
            let (from, to) = range
                .split_once("..")
                .ok_or_else(|| format!("expected 'A..B', got {range:?}"))?;
            Ok(Range {
                var: var.trim().to_owned(),
                from: from.to_owned(),
                to: to.to_owned(),
                reverse,
            })
        })
        .collect()
}

fn expand_loops(
    ranges: &[Range],
    vars: &mut BTreeMap<String, i64>,
    body: &str,
    out: &mut Vec<String>,
) -> Result<(), String> {
    let Some((first, rest)) = ranges.split_first() else {
        out.push(interpolate(body, vars)?);
        return Ok(());
    };
    let from = eval(&first.from, vars)?;
    let to = eval(&first.to, vars)?;
    let mut values: Vec<i64> = (from..=to).collect();
    if first.reverse {
        values.reverse();
    }
    let saved = vars.get(&first.var).copied();
    for v in values {
        vars.insert(first.var.clone(), v);
        expand_loops(rest, vars, body, out)?;
    }
    match saved {
        Some(v) => vars.insert(first.var.clone(), v),
        None => vars.remove(&first.var),
    };
    Ok(())
}

impl TietzeScript {
    /// Parse and expand a script. Lines are `[for VAR in A..B[ rev], ...:] MOVE`
    /// with `{expr}` placeholders over the context variables; `#` starts a
    /// comment only at the beginning of a line or after whitespace.
    pub fn parse(text: &str, context: &ScriptContext) -> Result<Self, ParseError> {
        let mut name = String::new();
        let mut steps = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(n) = line.strip_prefix("name:") {
                name = n.trim().to_owned();
                continue;
            }
            let err = |m: String| ParseError::new(line_no, 1, m);
            let mut bodies = Vec::new();
            if let Some(rest) = line.strip_prefix("for ") {
                let (header, body) = rest
                    .split_once(':')
                    .ok_or_else(|| err("expected ':' after loop header".into()))?;
                let ranges = parse_loops(header).map_err(err)?;
                let mut vars = context.vars.clone();
                expand_loops(&ranges, &mut vars, body, &mut bodies).map_err(err)?;
            } else {
                bodies.push(interpolate(line, &context.vars).map_err(err)?);
            }
            for body in bodies {
                steps.push(ScriptStep {
                    line: line_no,
                    action: parse_move(&body).map_err(|m| err(format!("{m} in {:?}", body.trim())))?,
                });
            }
        }
        Ok(Self { name, steps })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            out.push_str(&format!("name: {}\n", self.name));
        }
        for s in &self.steps {
            out.push_str(&s.action.to_string());
            out.push('\n');
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            // `#12` and `#{i}` are relator references.
            if bytes.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'{') {
                continue;
            }
            return &line[..i];
        }
    }
    line
}

/// A move skipped because its relator lies outside the instantiated window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quarantined {
    pub step: usize,
    pub generator: Option<Generator>,
    pub reason: String,
}

type OriginKey = (String, Vec<i64>);

fn origin_key(o: &Origin) -> OriginKey {
    (o.relator.split_whitespace().collect(), o.coset.clone())
}

#[derive(Debug, Clone)]
struct Entry {
    word: Word,
    origins: Vec<Origin>,
}

/// A presentation being transformed, with relator provenance.
#[derive(Debug, Clone)]
pub struct TietzeState {
    name: String,
    generators: Vec<Generator>,
    relators: Vec<Entry>,
    known_origins: HashSet<OriginKey>,
    quarantined: Vec<Quarantined>,
    definitions: Vec<(Generator, Word)>,
}

enum Resolved {
    Index(usize),
    Quarantine(String),
}

impl TietzeState {
    pub fn new(p: &Presentation) -> Self {
        Self {
            name: p.name().to_owned(),
            generators: p.generators().to_vec(),
            relators: p
                .relators()
                .iter()
                .map(|r| Entry {
                    word: r.word.clone(),
                    origins: Vec::new(),
                })
                .collect(),
            known_origins: HashSet::new(),
            quarantined: Vec::new(),
            definitions: Vec::new(),
        }
    }

    pub fn from_derived(d: &DerivedPresentation) -> Self {
        let mut state = Self::new(&d.base);
        for (entry, origins) in state.relators.iter_mut().zip(&d.origins) {
            entry.origins = origins.clone();
        }
        state.known_origins = d.origins.iter().flatten().chain(&d.vacuous).map(origin_key).collect();
        state
    }

    pub fn presentation(&self) -> Presentation {
        Presentation::new(
            self.name.clone(),
            self.generators.clone(),
            self.relators.iter().map(|e| Relator {
                word: e.word.clone(),
                label: None,
            }),
        )
        .expect("Tietze moves keep relators over current generators")
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relator_count(&self) -> usize {
        self.relators.len()
    }

    pub fn relator(&self, index: usize) -> Option<&Word> {
        self.relators.get(index).map(|e| &e.word)
    }

    pub fn quarantined(&self) -> &[Quarantined] {
        &self.quarantined
    }

    /// Generators whose elimination was quarantined and which are still present.
    pub fn boundary(&self) -> Vec<Generator> {
        let mut out: Vec<Generator> = Vec::new();
        for q in &self.quarantined {
            if let Some(g) = q.generator {
                if self.generators.contains(&g) && !out.contains(&g) {
                    out.push(g);
                }
            }
        }
        out
    }

    /// Eliminated generators with the words they were replaced by, in order.
    pub fn definitions(&self) -> &[(Generator, Word)] {
        &self.definitions
    }

    pub fn total_length(&self) -> u64 {
        self.relators.iter().map(|e| e.word.len()).sum()
    }

    fn resolve(&self, r: &RelatorRef) -> Result<Resolved, String> {
        match r {
            RelatorRef::Index(i) => {
                if *i < self.relators.len() {
                    Ok(Resolved::Index(*i))
                } else {
                    Err(format!("relator index {i} out of range"))
                }
            }
            RelatorRef::Origin { relator, coset } => {
                let key = (relator.clone(), coset.clone());
                if let Some(i) = self
                    .relators
                    .iter()
                    .position(|e| e.origins.iter().any(|o| origin_key(o) == key))
                {
                    return Ok(Resolved::Index(i));
                }
                if self.known_origins.contains(&key) {
                    Err(format!("relator {r} was already consumed"))
                } else {
                    Ok(Resolved::Quarantine(format!(
                        "{r} lies outside the instantiated window"
                    )))
                }
            }
        }
    }

    fn resolve_index(&self, r: &RelatorRef) -> Result<usize, String> {
        match self.resolve(r)? {
            Resolved::Index(i) => Ok(i),
            Resolved::Quarantine(reason) => Err(reason),
        }
    }

    /// Solve relator `index` for `g`: returns the replacement word for `g`.
    pub fn solve(&self, g: Generator, index: usize) -> Result<Word, TietzeError> {
        if !self.generators.contains(&g) {
            return Err(TietzeError::UnknownGenerator(g));
        }
        let word = &self
            .relators
            .get(index)
            .ok_or(TietzeError::RelatorOutOfRange(index))?
            .word;
        solve_for(word, g).ok_or(TietzeError::NotSolvable {
            generator: g,
            relator: index,
        })
    }

    fn eliminate(&mut self, g: Generator, index: usize) -> Result<(), TietzeError> {
        let replacement = self.solve(g, index)?;
        self.relators.remove(index);
        let mut kept = Vec::with_capacity(self.relators.len());
        for entry in self.relators.drain(..) {
            let word = entry
                .word
                .substitute(g, &replacement, SubstitutionMode::Strict)
                .expect("solution does not mention the generator")
                .cyclically_reduce();
            if !word.is_identity() {
                kept.push(Entry {
                    word,
                    origins: entry.origins,
                });
            }
        }
        self.relators = kept;
        self.generators.retain(|&x| x != g);
        for (_, def) in &mut self.definitions {
            *def = def
                .substitute(g, &replacement, SubstitutionMode::Strict)
                .expect("solution does not mention the generator");
        }
        self.definitions.push((g, replacement));
        Ok(())
    }

    fn product(&self, hint: &DerivationHint, skip: Option<usize>) -> Result<Word, String> {
        let mut acc = Word::identity();
        for f in &hint.factors {
            let i = self.resolve_index(&f.relator)?;
            if Some(i) == skip {
                return Err("a relator cannot be derived from itself".into());
            }
            let mut r = self.relators[i].word.clone();
            if f.inverse {
                r = r.inverse();
            }
            acc = acc.mul(&r.conjugate_by(&f.conjugator));
        }
        Ok(acc)
    }

    fn simplify_relators(&mut self) -> bool {
        let before = self.relators.len();
        let mut index: HashMap<Vec<Syllable>, usize> = HashMap::new();
        let mut kept: Vec<Entry> = Vec::new();
        let mut changed = false;
        for entry in self.relators.drain(..) {
            let word = entry.word.cyclically_reduce();
            changed |= word != entry.word;
            if word.is_identity() {
                continue;
            }
            let key = word.cyclic_key();
            match index.get(&key) {
                Some(&i) => kept[i].origins.extend(entry.origins),
                None => {
                    index.insert(key, kept.len());
                    kept.push(Entry {
                        word,
                        origins: entry.origins,
                    });
                }
            }
        }
        self.relators = kept;
        changed || self.relators.len() != before
    }

    /// Apply one move. Returns `Ok(false)` when the move was quarantined.
    pub fn apply(&mut self, step: usize, action: &TietzeMove) -> Result<bool, String> {
        match action {
            TietzeMove::EliminateGenerator { generator, via } => {
                let index = match self.resolve(via)? {
                    Resolved::Index(i) => i,
                    Resolved::Quarantine(reason) => {
                        self.quarantined.push(Quarantined {
                            step,
                            generator: Some(*generator),
                            reason,
                        });
                        return Ok(false);
                    }
                };
                self.eliminate(*generator, index).map_err(|e| e.to_string())?;
            }
            TietzeMove::AddRelator { word, hint } => {
                if let Some(g) = word.generators().into_iter().find(|g| !self.generators.contains(g)) {
                    return Err(format!("word uses unknown generator {g}"));
                }
                let product = self.product(hint, None)?;
                if !product.cyclically_equivalent(word) {
                    return Err(format!("hint evaluates to {product}, not a conjugate of {word}"));
                }
                let word = word.cyclically_reduce();
                if !word.is_identity() {
                    self.relators.push(Entry {
                        word,
                        origins: Vec::new(),
                    });
                }
            }
            TietzeMove::RemoveRedundantRelator { relator, hint } => {
                let i = self.resolve_index(relator)?;
                let product = self.product(hint, Some(i))?;
                if !product.cyclically_equivalent(&self.relators[i].word) {
                    return Err(format!(
                        "hint evaluates to {product}, not a conjugate of {}",
                        self.relators[i].word
                    ));
                }
                self.relators.remove(i);
            }
            TietzeMove::IntroduceGenerator { generator, word } => {
                if self.generators.contains(generator) {
                    return Err(format!("generator {generator} already exists"));
                }
                if let Some(g) = word.generators().into_iter().find(|g| !self.generators.contains(g)) {
                    return Err(format!("word uses unknown generator {g}"));
                }
                self.generators.push(*generator);
                self.relators.push(Entry {
                    word: word.mul(&Word::power(*generator, -1)).cyclically_reduce(),
                    origins: Vec::new(),
                });
            }
            TietzeMove::SimplifyRelators => {
                self.simplify_relators();
            }
        }
        Ok(true)
    }
}

/// Solve `word = 1` for `g`, which must occur exactly once with exponent ±1.
pub fn solve_for(word: &Word, g: Generator) -> Option<Word> {
    if word.occurrences(g) != 1 {
        return None;
    }
    let syl = word.syllables();
    let pos = syl.iter().position(|s| s.gen == g)?;
    let exp = syl[pos].exp;
    // word = P g^e S, so g^e = P^-1 S^-1 = (S P)^-1 up to conjugation by P.
    let sp = free_reduce(syl[pos + 1..].iter().chain(&syl[..pos]).map(|s| (s.gen, s.exp)));
    Some(if exp == 1 { sp.inverse() } else { sp })
}

/// Eliminate `g` using relator `index`.
pub fn eliminate_generator(p: &Presentation, g: Generator, index: usize) -> Result<Presentation, TietzeError> {
    let mut state = TietzeState::new(p);
    state.eliminate(g, index)?;
    Ok(state.presentation())
}

/// Outcome of replaying a script.
#[derive(Debug, Clone)]
pub struct Replay {
    pub state: TietzeState,
    pub applied: usize,
}

impl Replay {
    pub fn presentation(&self) -> Presentation {
        self.state.presentation()
    }
}

/// Replay a script move by move. With `check_invariants` the abelian
/// invariants are recomputed after every move and must not change.
pub fn replay_script(
    mut state: TietzeState,
    script: &TietzeScript,
    check_invariants: bool,
) -> Result<Replay, TietzeError> {
    let reference = check_invariants.then(|| abelian_invariants(&state.presentation()));
    let mut applied = 0;
    for (i, s) in script.steps.iter().enumerate() {
        let step = i + 1;
        let invalid = |reason: String| TietzeError::MoveInvalid {
            step,
            line: s.line,
            reason,
        };
        if state.apply(step, &s.action).map_err(invalid)? {
            applied += 1;
        }
        if let Some(reference) = &reference {
            let now = abelian_invariants(&state.presentation());
            if &now != reference {
                return Err(invalid(format!("abelian invariants changed from {reference} to {now}")));
            }
        }
    }
    Ok(Replay { state, applied })
}

/// Greedy simplification: repeatedly eliminate a generator occurring once in
/// the shortest possible relator, as long as the total relator length does
/// not grow. Returns the result and the script that reproduces it.
pub fn simplify(p: &Presentation, budget: usize) -> (Presentation, TietzeScript) {
    let mut state = TietzeState::new(p);
    let (moves, _) = simplify_state(&mut state, budget);
    let script = TietzeScript {
        name: "auto".into(),
        steps: moves.into_iter().map(|action| ScriptStep { line: 0, action }).collect(),
    };
    (state.presentation(), script)
}

/// Run the greedy simplifier on a state in place. Returns the moves made and
/// whether the budget ran out.
pub fn simplify_state(state: &mut TietzeState, budget: usize) -> (Vec<TietzeMove>, bool) {
    let mut moves = Vec::new();
    loop {
        if moves.len() >= budget {
            return (moves, true);
        }
        if state.simplify_relators() {
            moves.push(TietzeMove::SimplifyRelators);
            continue;
        }
        let Some((g, index)) = pick_elimination(state) else {
            return (moves, false);
        };
        state.eliminate(g, index).expect("candidate was checked");
        moves.push(TietzeMove::EliminateGenerator {
            generator: g,
            via: RelatorRef::Index(index),
        });
    }
}

fn pick_elimination(state: &TietzeState) -> Option<(Generator, usize)> {
    let total = state.total_length();
    let mut order: Vec<usize> = (0..state.relators.len()).collect();
    order.sort_by_key(|&i| (state.relators[i].word.len(), i));
    for i in order {
        let word = &state.relators[i].word;
        for &g in &state.generators {
            let Some(replacement) = solve_for(word, g) else {
                continue;
            };
            let mut new_total: u64 = 0;
            let mut within = true;
            for (j, e) in state.relators.iter().enumerate() {
                if j == i {
                    continue;
                }
                new_total += e
                    .word
                    .substitute(g, &replacement, SubstitutionMode::Strict)
                    .expect("solution avoids g")
                    .cyclically_reduce()
                    .len();
                if new_total > total {
                    within = false;
                    break;
                }
            }
            if within {
                return Some((g, i));
            }
        }
    }
    None
}

/// Closure of a presentation under the elementary consequences used when
/// comparing relator lists: generators killed by length-one relators or
/// coprime powers, generators identified through length-two relators, and
/// exponents reduced modulo the order forced by single-generator relators.
///
/// Every rewrite it performs is a consequence of the relators, so two words
/// with equal normal forms are equal in the group.
#[derive(Debug, Clone)]
pub struct ConsequenceClosure {
    order: HashMap<Generator, usize>,
    parent: HashMap<Generator, (Generator, i64)>,
    killed: HashSet<Generator>,
    power: HashMap<Generator, i64>,
    relators: Vec<Word>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl ConsequenceClosure {
    pub fn new(p: &Presentation) -> Self {
        let mut c = Self {
            order: p.generators().iter().enumerate().map(|(i, &g)| (g, i)).collect(),
            parent: HashMap::new(),
            killed: HashSet::new(),
            power: HashMap::new(),
            relators: Vec::new(),
        };
        let words: Vec<Word> = p.relator_words().cloned().collect();
        loop {
            let normalized: Vec<Word> = words.iter().map(|w| c.normalize(w)).collect();
            let mut changed = false;
            for w in &normalized {
                changed |= c.learn(w);
            }
            if !changed {
                let mut seen = HashSet::new();
                c.relators = normalized
                    .into_iter()
                    .filter(|w| !w.is_identity() && seen.insert(w.cyclic_key()))
                    .collect();
                return c;
            }
        }
    }

    fn rank(&self, g: Generator) -> usize {
        self.order.get(&g).copied().unwrap_or(usize::MAX)
    }

    /// Root and sign with `g = root^sign`, or `None` if `g` is killed.
    fn find(&self, g: Generator) -> Option<(Generator, i64)> {
        let mut cur = g;
        let mut sign = 1;
        while let Some(&(p, s)) = self.parent.get(&cur) {
            cur = p;
            sign *= s;
        }
        (!self.killed.contains(&cur)).then_some((cur, sign))
    }

    fn kill(&mut self, root: Generator) -> bool {
        self.killed.insert(root)
    }

    fn add_power(&mut self, root: Generator, m: i64) -> bool {
        let old = self.power.get(&root).copied().unwrap_or(0);
        let new = gcd(old, m);
        if new == 1 {
            return self.kill(root);
        }
        if new != old {
            self.power.insert(root, new);
            return true;
        }
        false
    }

    fn learn(&mut self, w: &Word) -> bool {
        let syl = w.syllables();
        match syl {
            [] => false,
            [s] => {
                if s.exp.abs() == 1 {
                    self.kill(s.gen)
                } else {
                    self.add_power(s.gen, s.exp.abs())
                }
            }
            [a, b] if a.exp.abs() == 1 && b.exp.abs() == 1 => {
                // a^x b^y = 1 gives b = a^(-x*y).
                let (early, late, sign) = if self.rank(a.gen) <= self.rank(b.gen) {
                    (a.gen, b.gen, -a.exp * b.exp)
                } else {
                    (b.gen, a.gen, -a.exp * b.exp)
                };
                self.parent.insert(late, (early, sign));
                if let Some(m) = self.power.remove(&late) {
                    self.add_power(early, m);
                }
                if self.killed.remove(&late) {
                    self.kill(early);
                }
                if sign == -1 && self.power.get(&early).copied().unwrap_or(0) != 2 {
                    // late = early^-1 already holds; nothing forces an order.
                }
                true
            }
            _ => false,
        }
    }

    fn reduce_exponent(&self, g: Generator, e: i64) -> i64 {
        match self.power.get(&g) {
            Some(&m) => {
                let r = e.rem_euclid(m);
                if 2 * r > m {
                    r - m
                } else {
                    r
                }
            }
            None => e,
        }
    }

    /// Normal form of a word: killed generators erased, identified generators
    /// replaced by their representative, exponents reduced, cyclically reduced.
    pub fn normalize(&self, w: &Word) -> Word {
        let mut cur = w.expand(|g| {
            Some(match self.find(g) {
                None => Word::identity(),
                Some((root, sign)) => Word::power(root, sign),
            })
        });
        loop {
            let reduced = free_reduce(
                cur.syllables()
                    .iter()
                    .map(|s| (s.gen, self.reduce_exponent(s.gen, s.exp))),
            )
            .cyclically_reduce();
            if reduced == cur {
                return cur;
            }
            cur = reduced;
        }
    }

    /// Normalized relators, deduplicated.
    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn is_killed(&self, g: Generator) -> bool {
        self.find(g).is_none()
    }

    pub fn representative(&self, g: Generator) -> Option<(Generator, i64)> {
        self.find(g)
    }

    /// Whether `w = 1` is recognized: its normal form is trivial or a
    /// normalized relator up to rotation and inversion.
    pub fn recognizes(&self, w: &Word) -> bool {
        let n = self.normalize(w);
        n.is_identity() || self.relators.iter().any(|r| r.cyclically_equivalent(&n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres(text: &str) -> Presentation {
        Presentation::parse(text).unwrap()
    }

    fn g(name: &str) -> Generator {
        Generator::new(name)
    }

    #[test]
    fn eliminate_examples() {
        let p = pres("gens: g h\nrels: g h^-1, h^3");
        let out = eliminate_generator(&p, g("g"), 0).unwrap();
        assert_eq!(out, pres("gens: h\nrels: h^3"));

        let p = pres("gens: a b x y\nrels: a^3, b^3, (a b)^3, (x y)^3, y a x b");
        let out = eliminate_generator(&p, g("y"), 4).unwrap();
        assert_eq!(out.generators(), [g("a"), g("b"), g("x")]);
        assert_eq!(out.relators().len(), 4);

        assert!(matches!(
            eliminate_generator(&p, g("a"), 0),
            Err(TietzeError::NotSolvable { .. })
        ));
        assert!(matches!(
            eliminate_generator(&p, g("zz"), 0),
            Err(TietzeError::UnknownGenerator(_))
        ));
    }

    #[test]
    fn simplify_examples() {
        let (out, script) = simplify(&pres("gens: x y\nrels: x y^-1, y^5"), 500);
        assert_eq!(out, pres("gens: y\nrels: y^5"));
        assert_eq!(script.steps.len(), 1);

        let (out, _) = simplify(&pres("gens: g\nrels: g"), 500);
        assert!(out.generators().is_empty() && out.relators().is_empty());
    }

    #[test]
    fn simplify_script_replays() {
        let p = pres("gens: a b c d\nrels: a b^-1, b c d, c^2, d a d^-1 a^-1, c a c^-1 b^-1");
        let (out, script) = simplify(&p, 500);
        let text = script.to_text();
        let reparsed = TietzeScript::parse(&text, &ScriptContext::new()).unwrap();
        let replayed = replay_script(TietzeState::new(&p), &reparsed, true).unwrap();
        assert_eq!(replayed.presentation().relators().len(), out.relators().len());
        assert_eq!(replayed.presentation().generators(), out.generators());
    }

    #[test]
    fn script_loops_and_expressions() {
        let mut ctx = ScriptContext::for_window(5, 3, 5);
        ctx.set("x", 2);
        let text = "name: demo\n# comment\nfor k in -1..1 rev, r in 3..n-1: eliminate alpha[{k},0,{r}] via sfar[1,{r}] @ ({k}, 0)\nsimplify\neliminate a via #{x*2-1}\n";
        let script = TietzeScript::parse(text, &ctx).unwrap();
        assert_eq!(script.name, "demo");
        assert_eq!(script.steps.len(), 8);
        assert_eq!(
            script.steps[0].action.to_string(),
            "eliminate alpha[1,0,3] via sfar[1,3] @ (1,0)"
        );
        assert_eq!(script.steps[7].action.to_string(), "eliminate a via #3");
        assert_eq!(script.steps[7].line, 5);
        let err = TietzeScript::parse("frobnicate x", &ctx).unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn add_and_remove_with_hints() {
        let p = pres("gens: a b\nrels: a^2, b^3");
        let mut s = TietzeState::new(&p);
        let add = TietzeMove::AddRelator {
            word: Word::parse("b a^2 b^-1").unwrap(),
            hint: DerivationHint {
                factors: vec![Factor {
                    relator: RelatorRef::Index(0),
                    inverse: false,
                    conjugator: Word::parse("b").unwrap(),
                }],
            },
        };
        assert!(s.apply(1, &add).unwrap());
        // The added relator is a^2 again up to conjugation, so it can be removed.
        let remove = TietzeMove::RemoveRedundantRelator {
            relator: RelatorRef::Index(2),
            hint: DerivationHint {
                factors: vec![Factor {
                    relator: RelatorRef::Index(0),
                    inverse: false,
                    conjugator: Word::identity(),
                }],
            },
        };
        assert!(s.apply(2, &remove).unwrap());
        assert_eq!(s.relator_count(), 2);
        let bogus = TietzeMove::AddRelator {
            word: Word::parse("a").unwrap(),
            hint: DerivationHint {
                factors: vec![Factor {
                    relator: RelatorRef::Index(1),
                    inverse: false,
                    conjugator: Word::identity(),
                }],
            },
        };
        assert!(s.apply(3, &bogus).is_err());
    }

    #[test]
    fn empty_script_is_identity() {
        let p = pres("gens: a b\nrels: a^2, (a b)^3");
        let r = replay_script(TietzeState::new(&p), &TietzeScript::default(), true).unwrap();
        assert_eq!(r.presentation(), p);
    }

    #[test]
    fn consequence_closure() {
        let p = pres("gens: a b c d\nrels: a, b c, c^2, d^4, d^6");
        let n = ConsequenceClosure::new(&p);
        assert!(n.is_killed(g("a")));
        assert_eq!(n.representative(g("c")), Some((g("b"), -1)));
        assert_eq!(
            n.normalize(&Word::parse("a c^3 d^3").unwrap()),
            Word::parse("b d").unwrap()
        );
        assert!(n.recognizes(&Word::parse("c^-2").unwrap()));
        assert!(n.recognizes(&Word::parse("d^2").unwrap()));
        assert!(!n.recognizes(&Word::parse("d").unwrap()));
    }
}
