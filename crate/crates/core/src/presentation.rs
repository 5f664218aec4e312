//! Finite presentations, the built-in catalog of braid-like families and the
//! presentation text format.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{Generator, Lexer, ParseError, Word};

pub const PRESENTATION_SCHEMA: &str = "braidforge.presentation/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("presentations need at least 2 strands, got {0}")]
    TooFewStrands(usize),
    #[error("relator {relator} uses undeclared generator {generator}")]
    UndeclaredGenerator { relator: usize, generator: String },
    #[error("generator {0} declared twice")]
    DuplicateGenerator(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone)]
pub struct Relator {
    pub word: Word,
    /// Family label such as `sbraid[1]`; purely informational.
    pub label: Option<String>,
}

/// A finitely presented group `< generators | relators >`.
///
/// Relators are stored freely and cyclically reduced and identity relators are
/// dropped. Equality compares name, generator order and relator words; labels
/// are metadata and do not take part.
#[derive(Debug, Clone)]
pub struct Presentation {
    name: String,
    generators: Vec<Generator>,
    relators: Vec<Relator>,
}

impl PartialEq for Presentation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.generators == other.generators
            && self.relators.len() == other.relators.len()
            && self.relators.iter().zip(&other.relators).all(|(a, b)| a.word == b.word)
    }
}

impl Eq for Presentation {}

impl Presentation {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<Generator>,
        relators: impl IntoIterator<Item = Relator>,
    ) -> Result<Self, PresentationError> {
        let mut seen = HashSet::new();
        for g in &generators {
            if !seen.insert(*g) {
                return Err(PresentationError::DuplicateGenerator(g.name().to_owned()));
            }
        }
        let mut kept = Vec::new();
        for (index, rel) in relators.into_iter().enumerate() {
            if let Some(bad) = rel.word.syllables().iter().find(|s| !seen.contains(&s.gen)) {
                return Err(PresentationError::UndeclaredGenerator {
                    relator: index,
                    generator: bad.gen.name().to_owned(),
                });
            }
            let word = rel.word.cyclically_reduce();
            if !word.is_identity() {
                kept.push(Relator { word, label: rel.label });
            }
        }
        Ok(Self {
            name: name.into(),
            generators,
            relators: kept,
        })
    }

    pub fn from_words(
        name: impl Into<String>,
        generators: Vec<Generator>,
        words: impl IntoIterator<Item = Word>,
    ) -> Result<Self, PresentationError> {
        Self::new(
            name,
            generators,
            words.into_iter().map(|word| Relator { word, label: None }),
        )
    }

    pub fn trivial() -> Self {
        Self {
            name: "trivial".into(),
            generators: Vec::new(),
            relators: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relators(&self) -> &[Relator] {
        &self.relators
    }

    pub fn relator_words(&self) -> impl Iterator<Item = &Word> {
        self.relators.iter().map(|r| &r.word)
    }

    pub fn generator_position(&self, gen: Generator) -> Option<usize> {
        self.generators.iter().position(|&g| g == gen)
    }

    /// Total letter length of all relators.
    pub fn total_length(&self) -> u64 {
        self.relators.iter().map(|r| r.word.len()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name: {}\n", self.name));
        out.push_str("gens:");
        for g in &self.generators {
            out.push(' ');
            out.push_str(g.name());
        }
        out.push('\n');
        out.push_str("rels:");
        if self.relators.is_empty() {
            out.push('\n');
        } else {
            out.push('\n');
            let last = self.relators.len() - 1;
            for (i, r) in self.relators.iter().enumerate() {
                out.push_str("  ");
                out.push_str(&r.word.to_string());
                if i != last {
                    out.push(',');
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        let doc = Document::parse(text)?;
        Self::from_document(&doc)
    }

    pub(crate) fn from_document(doc: &Document) -> Result<Self, PresentationError> {
        let name = doc
            .section("name")
            .map(|s| s.text.trim().to_owned())
            .unwrap_or_else(|| "unnamed".to_owned());
        let mut generators = Vec::new();
        if let Some(section) = doc.section("gens") {
            let mut lexer = Lexer::new(&section.text, section.line, section.column);
            loop {
                lexer.skip_ws();
                if lexer.peek().is_none() {
                    break;
                }
                if lexer.peek() == Some(',') {
                    lexer.bump();
                    continue;
                }
                generators.push(Generator::new(&lexer.name()?));
            }
        }
        let declared: HashSet<Generator> = generators.iter().copied().collect();
        let mut relators = Vec::new();
        if let Some(section) = doc.section("rels") {
            let mut lexer = Lexer::new(&section.text, section.line, section.column);
            loop {
                lexer.skip_ws();
                if lexer.peek().is_none() {
                    break;
                }
                let (line, column) = lexer.position();
                let word = lexer.word_until(&[])?;
                if let Some(bad) = word.syllables().iter().find(|s| !declared.contains(&s.gen)) {
                    return Err(
                        ParseError::new(line, column, format!("undeclared generator {} in relator", bad.gen)).into(),
                    );
                }
                relators.push(Relator { word, label: None });
                lexer.skip_ws();
                match lexer.bump() {
                    None => break,
                    Some(',') => {}
                    Some(c) => {
                        return Err(lexer
                            .error(format!("expected ',' between relators, found {c:?}"))
                            .into())
                    }
                }
            }
        }
        Self::new(name, generators, relators)
    }

    pub fn to_structured(&self) -> StructuredPresentation {
        StructuredPresentation {
            schema: PRESENTATION_SCHEMA.to_owned(),
            name: self.name.clone(),
            generators: self.generators.iter().map(|g| g.name().to_owned()).collect(),
            relators: self
                .relators
                .iter()
                .map(|r| StructuredRelator {
                    word: r.word.to_string(),
                    label: r.label.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Key-value export mirroring the text format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredPresentation {
    pub schema: String,
    pub name: String,
    pub generators: Vec<String>,
    pub relators: Vec<StructuredRelator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredRelator {
    pub word: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<String>,
}

/// A `key:` section of a text document, with the position where its body starts.
#[derive(Debug, Clone)]
pub(crate) struct Section {
    pub key: String,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

/// Line-oriented `key: body` document. A key starts in column 1; any other
/// line continues the previous section. `#` starts a comment.
#[derive(Debug, Clone, Default)]
pub(crate) struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut sections: Vec<Section> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                if let Some(s) = sections.last_mut() {
                    s.text.push('\n');
                }
                continue;
            }
            let key_len = line
                .char_indices()
                .take_while(|(_, c)| c.is_ascii_lowercase() || *c == '_')
                .count();
            if key_len > 0 && line[key_len..].starts_with(':') {
                let key = &line[..key_len];
                if sections.iter().any(|s| s.key == key) {
                    return Err(ParseError::new(line_no, 1, format!("duplicate section {key:?}")));
                }
                sections.push(Section {
                    key: key.to_owned(),
                    text: line[key_len + 1..].to_owned(),
                    line: line_no,
                    column: key_len + 2,
                });
            } else {
                match sections.last_mut() {
                    Some(s) => {
                        // Keep line numbers aligned with the source for error reporting.
                        let consumed = s.text.matches('\n').count();
                        let missing = line_no - s.line - consumed;
                        for _ in 0..missing {
                            s.text.push('\n');
                        }
                        s.text.push_str(line);
                    }
                    None => {
                        return Err(ParseError::new(line_no, 1, "expected a 'key:' line"));
                    }
                }
            }
        }
        Ok(Self { sections })
    }

    pub fn section(&self, key: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.key == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Braid,
    Symmetric,
    WeldedBraid,
    FlatVirtualBraid,
    FlatWeldedBraid,
    /// Explicit presentation of the commutator subgroup of FVB_3.
    Fvb3Commutator,
    /// Explicit presentation of the commutator subgroup of FWB_3.
    Fwb3Commutator,
}

impl Family {
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Braid => "braid",
            Family::Symmetric => "sym",
            Family::WeldedBraid => "wb",
            Family::FlatVirtualBraid => "fvb",
            Family::FlatWeldedBraid => "fwb",
            Family::Fvb3Commutator => "fvb3p",
            Family::Fwb3Commutator => "fwb3p",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        [
            Family::Braid,
            Family::Symmetric,
            Family::WeldedBraid,
            Family::FlatVirtualBraid,
            Family::FlatWeldedBraid,
            Family::Fvb3Commutator,
            Family::Fwb3Commutator,
        ]
        .into_iter()
        .find(|f| f.short_name() == name)
    }

    /// Families whose strand count is fixed by construction.
    pub fn fixed_strands(self) -> Option<usize> {
        match self {
            Family::Fvb3Commutator | Family::Fwb3Commutator => Some(3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub family: Family,
    pub strands: usize,
}

impl FamilySpec {
    pub fn new(family: Family, strands: usize) -> Self {
        Self { family, strands }
    }
}

/// Relation families of the braid-like groups, in canonical catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationFamily {
    /// `s_i s_j s_i^-1 s_j^-1`, `|i-j| > 1`, `i < j`.
    SigmaFar,
    /// `s_i s_i+1 s_i s_i+1^-1 s_i^-1 s_i+1^-1`.
    SigmaBraid,
    /// `s_i^2`.
    Flat,
    /// `r_i^2`.
    RhoSquare,
    /// `r_i r_j r_i r_j`, `|i-j| > 1`, `i < j`.
    RhoFar,
    /// `(r_i r_i+1)^3`.
    RhoBraid,
    /// `s_i r_j s_i^-1 r_j^-1`, `|i-j| > 1`, both orders.
    MixedFar,
    /// `r_i r_i+1 s_i r_i+1 r_i s_i+1^-1`.
    Mixed,
    /// `r_i s_i+1 s_i r_i+1 s_i^-1 s_i+1^-1`.
    Forbidden,
}

impl RelationFamily {
    pub fn tag(self) -> &'static str {
        match self {
            RelationFamily::SigmaFar => "sfar",
            RelationFamily::SigmaBraid => "sbraid",
            RelationFamily::Flat => "flat",
            RelationFamily::RhoSquare => "rsq",
            RelationFamily::RhoFar => "rfar",
            RelationFamily::RhoBraid => "rbraid",
            RelationFamily::MixedFar => "mixfar",
            RelationFamily::Mixed => "mixed",
            RelationFamily::Forbidden => "forbidden",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogRelator {
    pub family: RelationFamily,
    pub indices: Vec<usize>,
    pub word: Word,
}

impl CatalogRelator {
    pub fn label(&self) -> String {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        format!("{}[{}]", self.family.tag(), idx.join(","))
    }
}

pub fn sigma(i: usize) -> Generator {
    Generator::new(&format!("s{i}"))
}

pub fn rho(i: usize) -> Generator {
    Generator::new(&format!("r{i}"))
}

fn word_of(letters: &[(Generator, i64)]) -> Word {
    crate::words::free_reduce(letters.iter().copied())
}

fn families_for(family: Family) -> &'static [RelationFamily] {
    use RelationFamily::*;
    match family {
        Family::Braid => &[SigmaFar, SigmaBraid],
        Family::Symmetric => &[RhoSquare, RhoFar, RhoBraid],
        Family::WeldedBraid => &[
            SigmaFar, SigmaBraid, RhoSquare, RhoFar, RhoBraid, MixedFar, Mixed, Forbidden,
        ],
        Family::FlatWeldedBraid => &[
            SigmaFar, SigmaBraid, Flat, RhoSquare, RhoFar, RhoBraid, MixedFar, Mixed, Forbidden,
        ],
        Family::FlatVirtualBraid => &[SigmaFar, SigmaBraid, Flat, RhoSquare, RhoFar, RhoBraid, MixedFar, Mixed],
        Family::Fvb3Commutator | Family::Fwb3Commutator => &[],
    }
}

fn instantiate(family: RelationFamily, n: usize) -> Vec<CatalogRelator> {
    use RelationFamily::*;
    let m = n - 1;
    let mut out = Vec::new();
    let mut push = |indices: Vec<usize>, letters: Vec<(Generator, i64)>| {
        out.push(CatalogRelator {
            family,
            indices,
            word: word_of(&letters),
        })
    };
    match family {
        SigmaFar | RhoFar => {
            for i in 1..=m {
                for j in (i + 2)..=m {
                    if family == SigmaFar {
                        push(
                            vec![i, j],
                            vec![(sigma(i), 1), (sigma(j), 1), (sigma(i), -1), (sigma(j), -1)],
                        );
                    } else {
                        push(vec![i, j], vec![(rho(i), 1), (rho(j), 1), (rho(i), 1), (rho(j), 1)]);
                    }
                }
            }
        }
        SigmaBraid => {
            for i in 1..m {
                let (a, b) = (sigma(i), sigma(i + 1));
                push(vec![i], vec![(a, 1), (b, 1), (a, 1), (b, -1), (a, -1), (b, -1)]);
            }
        }
        Flat => {
            for i in 1..=m {
                push(vec![i], vec![(sigma(i), 2)]);
            }
        }
        RhoSquare => {
            for i in 1..=m {
                push(vec![i], vec![(rho(i), 2)]);
            }
        }
        RhoBraid => {
            for i in 1..m {
                let (a, b) = (rho(i), rho(i + 1));
                push(vec![i], vec![(a, 1), (b, 1), (a, 1), (b, 1), (a, 1), (b, 1)]);
            }
        }
        MixedFar => {
            for i in 1..=m {
                for j in 1..=m {
                    if i.abs_diff(j) > 1 {
                        push(
                            vec![i, j],
                            vec![(sigma(i), 1), (rho(j), 1), (sigma(i), -1), (rho(j), -1)],
                        );
                    }
                }
            }
        }
        Mixed => {
            for i in 1..m {
                push(
                    vec![i],
                    vec![
                        (rho(i), 1),
                        (rho(i + 1), 1),
                        (sigma(i), 1),
                        (rho(i + 1), 1),
                        (rho(i), 1),
                        (sigma(i + 1), -1),
                    ],
                );
            }
        }
        Forbidden => {
            for i in 1..m {
                push(
                    vec![i],
                    vec![
                        (rho(i), 1),
                        (sigma(i + 1), 1),
                        (sigma(i), 1),
                        (rho(i + 1), 1),
                        (sigma(i), -1),
                        (sigma(i + 1), -1),
                    ],
                );
            }
        }
    }
    out
}

/// All relators of a catalog family, tagged with their relation family.
pub fn catalog_relators(spec: FamilySpec) -> Result<Vec<CatalogRelator>, PresentationError> {
    if spec.strands < 2 {
        return Err(PresentationError::TooFewStrands(spec.strands));
    }
    Ok(families_for(spec.family)
        .iter()
        .flat_map(|&f| instantiate(f, spec.strands))
        .collect())
}

fn parsed(text: &str) -> Word {
    Word::parse(text).expect("built-in word")
}

/// The presentation of a catalog family on `spec.strands` strands.
pub fn catalog(spec: FamilySpec) -> Result<Presentation, PresentationError> {
    if spec.strands < 2 {
        return Err(PresentationError::TooFewStrands(spec.strands));
    }
    let n = spec.strands;
    let sigmas = || (1..n).map(sigma);
    let rhos = || (1..n).map(rho);
    let (name, generators): (String, Vec<Generator>) = match spec.family {
        Family::Braid => (format!("B_{n}"), sigmas().collect()),
        Family::Symmetric => (format!("S_{n}"), rhos().collect()),
        Family::WeldedBraid => (format!("WB_{n}"), sigmas().chain(rhos()).collect()),
        Family::FlatVirtualBraid => (format!("FVB_{n}"), sigmas().chain(rhos()).collect()),
        Family::FlatWeldedBraid => (format!("FWB_{n}"), sigmas().chain(rhos()).collect()),
        Family::Fvb3Commutator => {
            let gens = ["a", "b", "x", "y"].map(Generator::new).to_vec();
            let rels = ["a^3", "b^3", "(a b)^3", "(x y)^3", "y a x b"].map(parsed);
            return Presentation::from_words("FVB_3'", gens, rels);
        }
        Family::Fwb3Commutator => {
            let gens = ["a", "b", "c", "x"].map(Generator::new).to_vec();
            let rels = ["a^3", "b^3", "c^3", "a b c", "a x c (b a x)^-1", "b a x (x c b)^-1"].map(parsed);
            return Presentation::from_words("FWB_3'", gens, rels);
        }
    };
    let relators = catalog_relators(spec)?.into_iter().map(|r| Relator {
        label: Some(r.label()),
        word: r.word,
    });
    Presentation::new(name, generators, relators)
}
