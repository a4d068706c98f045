//! Bibliographic corpus ingestion and descriptive bibliometrics.
//!
//! Reads RFC-4180 CSV exports (Scopus column names by default), filters out
//! records without an abstract, merges venue-level subject areas, and
//! computes the per-year and per-area paper/citation tallies.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One bibliographic record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    /// Raw abstract text. Non-empty once the missing-abstract filter has run.
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    /// `None` when the year field was absent, unparseable, or implausible;
    /// such documents stay in the corpus but are excluded from yearly series.
    pub year: Option<i32>,
    pub citations: u64,
    pub source: String,
    pub subject_areas: BTreeSet<String>,
}

/// Ingestion record attached to a [`Corpus`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_path: String,
    pub input_sha256: String,
    /// RFC 3339. Honors `SOURCE_DATE_EPOCH` for reproducible runs.
    pub ingested_at: String,
    pub rows_parsed: usize,
    pub docs_before_abstract_filter: Option<usize>,
    pub docs_after_abstract_filter: Option<usize>,
    pub docs_without_area: Option<usize>,
    pub warnings: Vec<String>,
}

/// An ordered, immutable collection of documents plus its ingestion record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub provenance: Provenance,
}

/// Which CSV header names map onto document fields, plus the plausible year
/// range. Defaults match a Scopus export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMap {
    pub title: String,
    pub abstract_col: String,
    pub year: String,
    pub citations: String,
    pub source: String,
    pub year_min: i32,
    pub year_max: i32,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            title: "Title".into(),
            abstract_col: "Abstract".into(),
            year: "Year".into(),
            citations: "Cited by".into(),
            source: "Source title".into(),
            year_min: 1990,
            year_max: 2035,
        }
    }
}

/// Venue name (normalized) to subject-area codes.
#[derive(Debug, Clone, Default)]
pub struct AreaMapping {
    entries: HashMap<String, BTreeSet<String>>,
}

impl AreaMapping {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one `(source, area_code)` pair; the source name is normalized.
    pub fn insert(&mut self, source: &str, area_code: &str) {
        self.entries
            .entry(normalize_source(source))
            .or_default()
            .insert(area_code.trim().to_uppercase());
    }

    pub fn lookup(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(&normalize_source(source))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads a mapping from a CSV file with `source` and `area_code` columns,
    /// one row per pair.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let source_idx = find_column(&headers, "source")?;
        let area_idx = find_column(&headers, "area_code")?;
        let mut mapping = AreaMapping::new();
        for record in reader.records() {
            let record = record?;
            let source = record.get(source_idx).unwrap_or("");
            let area = record.get(area_idx).unwrap_or("");
            if !source.trim().is_empty() && !area.trim().is_empty() {
                mapping.insert(source, area);
            }
        }
        Ok(mapping)
    }
}

/// Case-folds and collapses internal whitespace so venue names from
/// different exports compare equal.
pub fn normalize_source(source: &str) -> String {
    source
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Stable document id: row index plus a content hash of (title, year).
fn document_id(row: usize, title: &str, year: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(title.as_bytes());
    hasher.update([0x1f]);
    hasher.update(year.as_bytes());
    let digest = hex::encode(hasher.finalize());
    format!("r{row:06}-{}", &digest[..8])
}

/// Current UTC time as RFC 3339. Honors `SOURCE_DATE_EPOCH` so pipelines
/// can be re-run to byte-identical artifacts.
pub fn timestamp_rfc3339() -> String {
    let epoch = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok());
    let time = match epoch {
        Some(secs) => chrono::DateTime::from_timestamp(secs, 0).unwrap_or_else(chrono::Utc::now),
        None => chrono::Utc::now(),
    };
    time.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Parses a bibliographic CSV export into a [`Corpus`].
///
/// Rows with an unparseable citation count get `citations = 0` and a
/// provenance warning; rows with a missing or implausible year get
/// `year = None` and a warning. A header-only file yields an empty corpus.
pub fn parse_bib_csv(path: &Path, columns: &ColumnMap) -> Result<Corpus> {
    let bytes = std::fs::read(path)?;
    let input_sha256 = hex::encode(Sha256::digest(&bytes));

    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers()?.clone();
    let title_idx = find_column(&headers, &columns.title)?;
    let abstract_idx = find_column(&headers, &columns.abstract_col)?;
    let year_idx = find_column(&headers, &columns.year)?;
    let citations_idx = find_column(&headers, &columns.citations)?;
    let source_idx = find_column(&headers, &columns.source)?;

    let mut documents = Vec::new();
    let mut warnings = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let title = record.get(title_idx).unwrap_or("").trim().to_string();
        let abstract_text = record.get(abstract_idx).unwrap_or("").to_string();
        let year_field = record.get(year_idx).unwrap_or("").trim().to_string();
        let year = match year_field.parse::<i32>() {
            Ok(y) if (columns.year_min..=columns.year_max).contains(&y) => Some(y),
            Ok(y) => {
                warnings.push(format!(
                    "row {row}: year {y} outside plausible range, ignored"
                ));
                None
            }
            Err(_) => {
                warnings.push(format!(
                    "row {row}: unparseable year `{year_field}`, ignored"
                ));
                None
            }
        };
        let citations_field = record.get(citations_idx).unwrap_or("").trim();
        let citations = match citations_field.parse::<u64>() {
            Ok(c) => c,
            Err(_) => {
                warnings.push(format!(
                    "row {row}: unparseable citation count `{citations_field}`, defaulting to 0"
                ));
                0
            }
        };
        let source = record.get(source_idx).unwrap_or("").trim().to_string();
        documents.push(Document {
            id: document_id(row, &title, &year_field),
            title,
            abstract_text,
            year,
            citations,
            source,
            subject_areas: BTreeSet::new(),
        });
    }

    let rows_parsed = documents.len();
    Ok(Corpus {
        documents,
        provenance: Provenance {
            input_path: path.display().to_string(),
            input_sha256,
            ingested_at: timestamp_rfc3339(),
            rows_parsed,
            warnings,
            ..Provenance::default()
        },
    })
}

/// Keeps exactly the documents whose abstract is non-blank after trimming;
/// before/after counts are recorded in provenance.
pub fn drop_missing_abstracts(corpus: Corpus) -> Corpus {
    let before = corpus.documents.len();
    let mut provenance = corpus.provenance;
    let documents: Vec<Document> = corpus
        .documents
        .into_iter()
        .filter(|d| !d.abstract_text.trim().is_empty())
        .collect();
    provenance.docs_before_abstract_filter = Some(before);
    provenance.docs_after_abstract_filter = Some(documents.len());
    Corpus {
        documents,
        provenance,
    }
}

/// Assigns each document its source's area set. Documents whose source is
/// not in the mapping keep an empty set; their count goes to provenance.
pub fn merge_subject_areas(corpus: Corpus, mapping: &AreaMapping) -> Corpus {
    let mut provenance = corpus.provenance;
    let mut unmatched = 0usize;
    let documents: Vec<Document> = corpus
        .documents
        .into_iter()
        .map(|mut doc| {
            match mapping.lookup(&doc.source) {
                Some(areas) => doc.subject_areas = areas.clone(),
                None => {
                    doc.subject_areas = BTreeSet::new();
                    unmatched += 1;
                }
            }
            doc
        })
        .collect();
    provenance.docs_without_area = Some(unmatched);
    if unmatched > 0 {
        provenance.warnings.push(format!(
            "{unmatched} document(s) have no subject-area mapping"
        ));
    }
    Corpus {
        documents,
        provenance,
    }
}

/// Per-year (paper count, citation sum) over documents with a valid year.
pub fn yearly_series(corpus: &Corpus) -> BTreeMap<i32, (u64, u64)> {
    let mut series: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
    for doc in &corpus.documents {
        if let Some(year) = doc.year {
            let entry = series.entry(year).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += doc.citations;
        }
    }
    series
}

/// Per-area (paper count, citation sum). A document with k areas contributes
/// to k tallies. Sorted by paper count descending, then area code ascending.
pub fn subject_area_tally(corpus: &Corpus) -> Vec<(String, u64, u64)> {
    let mut tally: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for doc in &corpus.documents {
        for area in &doc.subject_areas {
            let entry = tally.entry(area).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += doc.citations;
        }
    }
    let mut rows: Vec<(String, u64, u64)> = tally
        .into_iter()
        .map(|(area, (papers, citations))| (area.to_string(), papers, citations))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}
