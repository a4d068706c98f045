//! Vocabulary freezing and sparse document-term matrix construction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenizedDoc;

/// Frozen token-to-index bijection with dense indices in `[0, len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    term_to_index: HashMap<String, usize>,
    index_to_term: Vec<String>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>) -> Self {
        let term_to_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            term_to_index,
            index_to_term: terms,
        }
    }

    pub fn len(&self) -> usize {
        self.index_to_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_term.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.index_to_term[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.index_to_term
    }
}

/// Sparse bag-of-words counts over a frozen vocabulary.
///
/// `rows[d]` holds `(term_index, count)` pairs with counts >= 1, sorted by
/// term index; `lengths[d]` is the document's total token count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub vocab_size: usize,
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<(u32, u32)>>,
    pub lengths: Vec<u32>,
}

impl DocTermMatrix {
    pub fn doc_count(&self) -> usize {
        self.rows.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.lengths.iter().map(|&n| n as u64).sum()
    }

    /// Expands one row back into a term-index sequence (sparse-row order).
    pub fn expand_doc(&self, doc: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.lengths[doc] as usize);
        for &(term, count) in &self.rows[doc] {
            for _ in 0..count {
                out.push(term);
            }
        }
        out
    }
}

/// Result of [`build_matrix`]: documents with zero in-vocabulary tokens are
/// excluded and listed in `skipped_doc_ids`.
#[derive(Debug, Clone)]
pub struct MatrixBuild {
    pub matrix: DocTermMatrix,
    pub skipped_doc_ids: Vec<String>,
    pub oov_tokens_dropped: u64,
}

/// Keeps exactly the tokens with corpus frequency >= `min_count`, indexed by
/// descending frequency then ascending lexicographic order.
pub fn build_vocabulary(docs: &[TokenizedDoc], min_count: usize) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *freq.entry(token).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<(&str, usize)> = freq.into_iter().filter(|&(_, n)| n >= min_count).collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary(min_count));
    }
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_terms(
        terms.into_iter().map(|(t, _)| t.to_string()).collect(),
    ))
}

/// Counts each document's in-vocabulary token multiplicities.
pub fn build_matrix(docs: &[TokenizedDoc], vocab: &Vocabulary) -> MatrixBuild {
    let mut doc_ids = Vec::new();
    let mut rows = Vec::new();
    let mut lengths = Vec::new();
    let mut skipped = Vec::new();
    let mut oov: u64 = 0;
    for doc in docs {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for token in &doc.tokens {
            match vocab.index_of(token) {
                Some(idx) => *counts.entry(idx as u32).or_insert(0) += 1,
                None => oov += 1,
            }
        }
        if counts.is_empty() {
            skipped.push(doc.id.clone());
            continue;
        }
        let length: u32 = counts.values().sum();
        doc_ids.push(doc.id.clone());
        rows.push(counts.into_iter().collect());
        lengths.push(length);
    }
    MatrixBuild {
        matrix: DocTermMatrix {
            vocab_size: vocab.len(),
            doc_ids,
            rows,
            lengths,
        },
        skipped_doc_ids: skipped,
        oov_tokens_dropped: oov,
    }
}
