//! Two-stage text preprocessing.
//!
//! Conventional cleanup first (lowercasing, punctuation and numerals dropped,
//! standard English stopwords removed), then Snowball-English stemming, then
//! removal of a domain-specific stopword list whose entries are stem-form
//! tokens. The bundled lists live in `data/smart_stopwords.txt` and
//! `data/appendix_a_stopwords.txt`; both can be swapped out per run.

use std::collections::HashSet;
use std::path::Path;

use once_cell::sync::Lazy;
use rayon::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

static STEMMER: Lazy<Stemmer> = Lazy::new(|| Stemmer::create(Algorithm::English));

const BUILTIN_STANDARD: &str = include_str!("../../../data/smart_stopwords.txt");
const BUILTIN_DOMAIN: &str = include_str!("../../../data/appendix_a_stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopwordKind {
    Standard,
    Custom,
}

/// A set of lowercase stopword tokens.
///
/// Custom sets are matched against stemmed tokens, so on load every entry is
/// also inserted in stem form; list entries that are not themselves stems
/// (e.g. `analysis`, whose stem is `analysi`) still match.
#[derive(Debug, Clone)]
pub struct StopwordSet {
    kind: StopwordKind,
    terms: HashSet<String>,
}

impl StopwordSet {
    pub fn new(kind: StopwordKind, terms: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut set = StopwordSet {
            kind,
            terms: HashSet::new(),
        };
        for term in terms {
            set.add(&term)?;
        }
        Ok(set)
    }

    fn add(&mut self, term: &str) -> Result<()> {
        let term = term.trim().to_lowercase();
        if term.is_empty() {
            return Ok(());
        }
        if term.chars().any(char::is_whitespace) {
            return Err(Error::InvalidStopword(term));
        }
        if self.kind == StopwordKind::Custom {
            self.terms.insert(stem(&term));
        }
        self.terms.insert(term);
        Ok(())
    }

    /// Parses `# `-commented, one-term-per-line content.
    pub fn from_content(kind: StopwordKind, content: &str) -> Result<Self> {
        let mut set = StopwordSet {
            kind,
            terms: HashSet::new(),
        };
        for line in content.lines() {
            let line = line.split('#').next().unwrap_or("");
            set.add(line)?;
        }
        Ok(set)
    }

    pub fn from_file(kind: StopwordKind, path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        Self::from_content(kind, &content)
    }

    /// The bundled standard English (SMART) list.
    pub fn builtin_standard() -> Self {
        Self::from_content(StopwordKind::Standard, BUILTIN_STANDARD)
            .expect("bundled standard stopword list is well-formed")
    }

    /// The bundled domain-specific stem list.
    pub fn builtin_domain() -> Self {
        Self::from_content(StopwordKind::Custom, BUILTIN_DOMAIN)
            .expect("bundled domain stopword list is well-formed")
    }

    pub fn kind(&self) -> StopwordKind {
        self.kind
    }

    pub fn contains(&self, token: &str) -> bool {
        self.terms.contains(token)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A document reduced to its ordered sequence of stemmed, filtered tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// Lowercases, treats every non-letter character as a separator, and drops
/// empty fragments. Numerals and punctuation cannot survive.
pub fn normalize_text(raw: &str) -> Vec<String> {
    raw.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Order-preserving stopword filter.
pub fn remove_stopwords(tokens: Vec<String>, set: &StopwordSet) -> Vec<String> {
    tokens.into_iter().filter(|t| !set.contains(t)).collect()
}

/// Snowball English (Porter) stem of a lowercase token.
pub fn stem(token: &str) -> String {
    STEMMER.stem(token).into_owned()
}

/// Full pipeline: normalize, drop standard stopwords, stem, drop custom
/// stopwords. May produce an empty token list; such documents are later
/// excluded from the document-term matrix.
pub fn preprocess_text(raw: &str, standard: &StopwordSet, custom: &StopwordSet) -> Vec<String> {
    let tokens = normalize_text(raw);
    let tokens = remove_stopwords(tokens, standard);
    let tokens = tokens.iter().map(|t| stem(t)).collect();
    remove_stopwords(tokens, custom)
}

/// Applies [`preprocess_text`] to one document's abstract.
pub fn preprocess(
    doc: &crate::corpus::Document,
    standard: &StopwordSet,
    custom: &StopwordSet,
) -> TokenizedDoc {
    TokenizedDoc {
        id: doc.id.clone(),
        tokens: preprocess_text(&doc.abstract_text, standard, custom),
    }
}

/// Preprocesses every document in parallel; output order matches the corpus.
pub fn preprocess_corpus(
    corpus: &Corpus,
    standard: &StopwordSet,
    custom: &StopwordSet,
) -> Vec<TokenizedDoc> {
    corpus
        .documents
        .par_iter()
        .map(|doc| preprocess(doc, standard, custom))
        .collect()
}
