//! On-disk artifact formats.
//!
//! Every stage writes exactly one JSON artifact (plus CSV twins where
//! useful). Writers are hand-rolled so output bytes are deterministic:
//! floats carry 17 significant digits, map keys are sorted, newlines are
//! LF. Readers go through serde and verify the schema tag first.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::dtm::{DocTermMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::lda::{LdaConfig, LdaModel, RNG_ALGORITHM};
use crate::modelselect::MetricSeries;
use crate::scimap::{Boundaries, FractionalTotals, ScienceMap, TopicProfile};

pub const CORPUS_SCHEMA: &str = "litmap/corpus/v1";
pub const DTM_SCHEMA: &str = "litmap/dtm/v1";
pub const MODEL_SCHEMA: &str = "litmap/model/v1";
pub const SELECTION_SCHEMA: &str = "litmap/selection/v1";
pub const SCIENCEMAP_SCHEMA: &str = "litmap/sciencemap/v1";

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number rendering; non-finite values become null.
pub fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".to_string()
    }
}

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_str_array(items: &[String]) -> String {
    let parts: Vec<String> = items.iter().map(|s| json_escape(s)).collect();
    format!("[{}]", parts.join(","))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

fn read_artifact_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.display().to_string())
        } else {
            Error::Io(e)
        }
    })
}

#[derive(Deserialize)]
struct SchemaProbe {
    #[serde(default)]
    schema: String,
}

/// Reads an artifact and verifies its schema tag before anything else, so a
/// wrong-stage file reports a mismatch rather than a parse error.
fn read_checked(path: &Path, expected: &str) -> Result<Vec<u8>> {
    let bytes = read_artifact_bytes(path)?;
    let probe: SchemaProbe = serde_json::from_slice(&bytes)?;
    if probe.schema != expected {
        return Err(Error::SchemaMismatch {
            path: path.display().to_string(),
            expected: expected.to_string(),
            found: probe.schema,
        });
    }
    Ok(bytes)
}

// ---------------------------------------------------------------- corpus

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(CORPUS_SCHEMA));
    out.push_str("  \"documents\": [\n");
    for (i, doc) in corpus.documents.iter().enumerate() {
        let areas: Vec<String> = doc.subject_areas.iter().cloned().collect();
        let year = doc.year.map_or("null".to_string(), |y| y.to_string());
        let _ = write!(
            out,
            "    {{\"id\":{},\"title\":{},\"abstract\":{},\"year\":{},\"citations\":{},\"source\":{},\"subject_areas\":{}}}",
            json_escape(&doc.id),
            json_escape(&doc.title),
            json_escape(&doc.abstract_text),
            year,
            doc.citations,
            json_escape(&doc.source),
            json_str_array(&areas)
        );
        out.push_str(if i + 1 < corpus.documents.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("  ],\n");
    let p = &corpus.provenance;
    let opt = |v: Option<usize>| v.map_or("null".to_string(), |n| n.to_string());
    let _ = writeln!(
        out,
        "  \"provenance\": {{\"input_path\":{},\"input_sha256\":{},\"ingested_at\":{},\"rows_parsed\":{},\"docs_before_abstract_filter\":{},\"docs_after_abstract_filter\":{},\"docs_without_area\":{},\"warnings\":{}}}",
        json_escape(&p.input_path),
        json_escape(&p.input_sha256),
        json_escape(&p.ingested_at),
        p.rows_parsed,
        opt(p.docs_before_abstract_filter),
        opt(p.docs_after_abstract_filter),
        opt(p.docs_without_area),
        json_str_array(&p.warnings)
    );
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct CorpusFile {
    documents: Vec<crate::corpus::Document>,
    provenance: crate::corpus::Provenance,
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let bytes = read_checked(path, CORPUS_SCHEMA)?;
    let file: CorpusFile = serde_json::from_slice(&bytes)?;
    Ok(Corpus {
        documents: file.documents,
        provenance: file.provenance,
    })
}

// ------------------------------------------------------------------- dtm

pub fn write_dtm(path: &Path, dtm: &DocTermMatrix, vocab: &Vocabulary) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(DTM_SCHEMA));
    let _ = writeln!(out, "  \"doc_ids\": {},", json_str_array(&dtm.doc_ids));
    let _ = writeln!(out, "  \"vocabulary\": {},", json_str_array(vocab.terms()));
    out.push_str("  \"rows\": [\n");
    for (i, row) in dtm.rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&(t, c)| format!("[{t},{c}]")).collect();
        let _ = write!(out, "    [{}]", cells.join(","));
        out.push_str(if i + 1 < dtm.rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    let lengths: Vec<String> = dtm.lengths.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "  \"lengths\": [{}]", lengths.join(","));
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct DtmFile {
    doc_ids: Vec<String>,
    vocabulary: Vec<String>,
    rows: Vec<Vec<(u32, u32)>>,
    lengths: Vec<u32>,
}

fn invalid(path: &Path, reason: impl Into<String>) -> Error {
    Error::InvalidArtifact {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

pub fn read_dtm(path: &Path) -> Result<(DocTermMatrix, Vocabulary)> {
    let bytes = read_checked(path, DTM_SCHEMA)?;
    let file: DtmFile = serde_json::from_slice(&bytes)?;
    let vocab = Vocabulary::from_terms(file.vocabulary);
    if file.rows.len() != file.doc_ids.len() || file.rows.len() != file.lengths.len() {
        return Err(invalid(
            path,
            "doc_ids, rows and lengths disagree in length",
        ));
    }
    for (d, (row, &length)) in file.rows.iter().zip(&file.lengths).enumerate() {
        let mut total = 0u64;
        for &(term, count) in row {
            if term as usize >= vocab.len() {
                return Err(invalid(
                    path,
                    format!("row {d}: term index {term} out of range"),
                ));
            }
            if count == 0 {
                return Err(invalid(path, format!("row {d}: zero count entry")));
            }
            total += count as u64;
        }
        if total != length as u64 || length == 0 {
            return Err(invalid(
                path,
                format!("row {d}: counts sum to {total}, length says {length}"),
            ));
        }
    }
    Ok((
        DocTermMatrix {
            vocab_size: vocab.len(),
            doc_ids: file.doc_ids,
            rows: file.rows,
            lengths: file.lengths,
        },
        vocab,
    ))
}

/// Plain (doc, term, count) triplet dump for interoperability.
pub fn write_dtm_csv(path: &Path, dtm: &DocTermMatrix, vocab: &Vocabulary) -> Result<()> {
    let mut out = String::from("doc,term,count\n");
    for (doc_id, row) in dtm.doc_ids.iter().zip(&dtm.rows) {
        for &(term, count) in row {
            let _ = writeln!(
                out,
                "{},{},{}",
                csv_field(doc_id),
                csv_field(vocab.term(term as usize)),
                count
            );
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ----------------------------------------------------------------- model

fn json_f64_array(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| json_f64(v)).collect();
    format!("[{}]", parts.join(","))
}

fn json_matrix(rows: &[Vec<f64>], indent: &str) -> String {
    let mut out = String::from("[\n");
    for (i, row) in rows.iter().enumerate() {
        out.push_str(indent);
        out.push_str("  ");
        out.push_str(&json_f64_array(row));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str(indent);
    out.push(']');
    out
}

fn json_config(cfg: &LdaConfig) -> String {
    let seeds: Vec<String> = cfg.seeds.iter().map(|s| s.to_string()).collect();
    let posterior = match cfg.posterior {
        crate::lda::PosteriorEstimate::Mean => "mean",
        crate::lda::PosteriorEstimate::Last => "last",
    };
    format!(
        "{{\"topics\":{},\"alpha\":{},\"beta\":{},\"iterations\":{},\"thin\":{},\"runs\":{},\"seeds\":[{}],\"posterior\":{}}}",
        cfg.topics,
        json_f64(cfg.alpha),
        json_f64(cfg.beta),
        cfg.iterations,
        cfg.thin,
        cfg.runs,
        seeds.join(","),
        json_escape(posterior)
    )
}

pub fn write_model(path: &Path, model: &LdaModel, dtm_ref: &str) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(MODEL_SCHEMA));
    let _ = writeln!(out, "  \"config\": {},", json_config(&model.config));
    let _ = writeln!(out, "  \"seed_used\": {},", model.seed_used);
    let _ = writeln!(out, "  \"rng\": {},", json_escape(RNG_ALGORITHM));
    let _ = writeln!(
        out,
        "  \"selection_criterion\": {},",
        json_escape("max retained log p(w|z)")
    );
    let _ = writeln!(out, "  \"retained_samples\": {},", model.retained_samples);
    let _ = writeln!(
        out,
        "  \"loglik_trace\": {},",
        json_f64_array(&model.loglik_trace)
    );
    let _ = writeln!(out, "  \"phi\": {},", json_matrix(&model.phi, "  "));
    let _ = writeln!(out, "  \"theta\": {},", json_matrix(&model.theta, "  "));
    let _ = writeln!(out, "  \"vocabulary_ref\": {},", json_escape(dtm_ref));
    let _ = writeln!(out, "  \"doc_ids_ref\": {}", json_escape(dtm_ref));
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct ModelFile {
    config: LdaConfig,
    seed_used: u64,
    retained_samples: usize,
    loglik_trace: Vec<f64>,
    phi: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
}

pub fn read_model(path: &Path) -> Result<LdaModel> {
    let bytes = read_checked(path, MODEL_SCHEMA)?;
    let file: ModelFile = serde_json::from_slice(&bytes)?;
    let topics = file.config.topics;
    if file.phi.len() != topics {
        return Err(invalid(
            path,
            format!(
                "phi has {} rows, config says {topics} topics",
                file.phi.len()
            ),
        ));
    }
    let vocab_size = file.phi.first().map_or(0, Vec::len);
    if file.phi.iter().any(|row| row.len() != vocab_size) {
        return Err(invalid(path, "ragged phi rows"));
    }
    if file.theta.iter().any(|row| row.len() != topics) {
        return Err(invalid(path, "theta rows do not match the topic count"));
    }
    if file.loglik_trace.len() != file.retained_samples {
        return Err(invalid(
            path,
            "log-likelihood trace does not match the retained sample count",
        ));
    }
    Ok(LdaModel {
        phi: file.phi,
        theta: file.theta,
        loglik_trace: file.loglik_trace,
        retained_samples: file.retained_samples,
        config: file.config,
        seed_used: file.seed_used,
    })
}

// ------------------------------------------------------------- selection

pub fn write_selection_json(path: &Path, series: &MetricSeries) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(SELECTION_SCHEMA));
    let candidates: Vec<String> = series.candidates.iter().map(|k| k.to_string()).collect();
    let _ = writeln!(out, "  \"candidates\": [{}],", candidates.join(","));
    out.push_str("  \"metrics\": [\n");
    for (i, column) in series.columns.iter().enumerate() {
        let direction = match column.direction {
            crate::modelselect::Direction::Maximize => "maximize",
            crate::modelselect::Direction::Minimize => "minimize",
        };
        let _ = write!(
            out,
            "    {{\"metric\":{},\"direction\":{},\"raw\":{},\"normalized\":{}}}",
            json_escape(column.metric.name()),
            json_escape(direction),
            json_f64_array(&column.raw),
            json_f64_array(&column.normalized)
        );
        out.push_str(if i + 1 < series.columns.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("  ],\n");
    let _ = writeln!(
        out,
        "  \"composite\": {},",
        json_f64_array(&series.composite)
    );
    let _ = writeln!(out, "  \"chosen_k\": {},", series.chosen_k);
    let _ = writeln!(
        out,
        "  \"normalization\": {},",
        json_escape(
            "min-max per metric; minimize-directed series inverted; constant series map to 0.5"
        )
    );
    let _ = writeln!(out, "  \"warnings\": {}", json_str_array(&series.warnings));
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_selection_csv(path: &Path, series: &MetricSeries) -> Result<()> {
    let mut out = String::from(
        "k,griffiths_raw,cao_raw,arun_raw,deveaud_raw,griffiths_norm,cao_norm,arun_norm,deveaud_norm,composite,chosen\n",
    );
    let csv_num = |v: f64| {
        if v.is_nan() {
            "NaN".to_string()
        } else {
            fmt_f64(v)
        }
    };
    for (i, &k) in series.candidates.iter().enumerate() {
        let raws: Vec<String> = series.columns.iter().map(|c| csv_num(c.raw[i])).collect();
        let norms: Vec<String> = series
            .columns
            .iter()
            .map(|c| csv_num(c.normalized[i]))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            k,
            raws.join(","),
            norms.join(","),
            csv_num(series.composite[i]),
            if k == series.chosen_k { 1 } else { 0 }
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct SelectionSummary {
    chosen_k: usize,
}

pub fn read_selection_chosen_k(path: &Path) -> Result<usize> {
    let bytes = read_checked(path, SELECTION_SCHEMA)?;
    let file: SelectionSummary = serde_json::from_slice(&bytes)?;
    Ok(file.chosen_k)
}

// ------------------------------------------------------------ sciencemap

fn json_boundaries(b: &Boundaries) -> String {
    let axis = match b.axis {
        crate::scimap::Axis::Interest => "interest",
        crate::scimap::Axis::Impact => "impact",
    };
    format!(
        "{{\"axis\":{},\"median\":{},\"q3\":{},\"p90\":{}}}",
        json_escape(axis),
        json_f64(b.median),
        json_f64(b.q3),
        json_f64(b.p90)
    )
}

fn json_profile(p: &TopicProfile) -> String {
    let top_terms: Vec<String> = p
        .top_terms
        .iter()
        .map(|(term, weight)| format!("[{},{}]", json_escape(term), json_f64(*weight)))
        .collect();
    let yearly: Vec<String> = p
        .yearly
        .iter()
        .map(|(year, (papers, citations))| {
            format!(
                "{}:[{},{}]",
                json_escape(&year.to_string()),
                papers,
                citations
            )
        })
        .collect();
    let bars: Vec<String> = p
        .subject_area_bars
        .iter()
        .map(|(area, count)| format!("{}:{}", json_escape(area), count))
        .collect();
    format!(
        "{{\"topic_id\":{},\"paper_count\":{},\"citation_sum\":{},\"cpp\":{},\"top_terms\":[{}],\"yearly\":{{{}}},\"growth_pct\":{},\"grid_cell\":{},\"subject_area_bars\":{{{}}}}}",
        p.topic_id,
        p.paper_count,
        p.citation_sum,
        json_f64(p.cpp),
        top_terms.join(","),
        yearly.join(","),
        json_f64(p.growth_pct),
        json_escape(&p.grid_cell.to_string()),
        bars.join(",")
    )
}

pub fn write_sciencemap(path: &Path, map: &ScienceMap) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"schema\": {},", json_escape(SCIENCEMAP_SCHEMA));
    out.push_str("  \"profiles\": [\n");
    for (i, profile) in map.profiles.iter().enumerate() {
        let _ = write!(out, "    {}", json_profile(profile));
        out.push_str(if i + 1 < map.profiles.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("  ],\n");
    let _ = writeln!(
        out,
        "  \"boundaries\": {{\"interest\":{},\"impact\":{}}},",
        json_boundaries(&map.interest_bounds),
        json_boundaries(&map.impact_bounds)
    );
    let _ = writeln!(
        out,
        "  \"correlation\": {},",
        json_matrix(&map.correlation, "  ")
    );
    let coords: Vec<Vec<f64>> = map.coords2d.iter().map(|c| c.to_vec()).collect();
    let _ = writeln!(out, "  \"coords2d\": {},", json_matrix(&coords, "  "));
    let _ = writeln!(
        out,
        "  \"embedding_stress\": {},",
        json_f64(map.embedding_stress)
    );
    let salient: Vec<String> = map
        .salient_terms
        .iter()
        .map(|(term, count)| format!("[{},{}]", json_escape(term), count))
        .collect();
    let _ = writeln!(out, "  \"salient_terms\": [{}],", salient.join(","));
    match &map.fractional {
        Some(f) => {
            let _ = writeln!(
                out,
                "  \"fractional\": {{\"interest\":{},\"impact\":{}}},",
                json_f64_array(&f.interest),
                json_f64_array(&f.impact)
            );
        }
        None => out.push_str("  \"fractional\": null,\n"),
    }
    let decisions: Vec<String> = map
        .decisions
        .iter()
        .map(|(key, value)| format!("{}:{}", json_escape(key), json_escape(value)))
        .collect();
    let _ = writeln!(out, "  \"decisions\": {{{}}},", decisions.join(","));
    let _ = writeln!(out, "  \"warnings\": {}", json_str_array(&map.warnings));
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Deserialize)]
struct BoundariesFile {
    interest: Boundaries,
    impact: Boundaries,
}

#[derive(Deserialize)]
struct SciencemapFile {
    profiles: Vec<TopicProfile>,
    boundaries: BoundariesFile,
    correlation: Vec<Vec<f64>>,
    coords2d: Vec<[f64; 2]>,
    embedding_stress: f64,
    salient_terms: Vec<(String, u64)>,
    fractional: Option<FractionalTotals>,
    decisions: BTreeMap<String, String>,
    warnings: Vec<String>,
}

pub fn read_sciencemap(path: &Path) -> Result<ScienceMap> {
    let bytes = read_checked(path, SCIENCEMAP_SCHEMA)?;
    let file: SciencemapFile = serde_json::from_slice(&bytes)?;
    Ok(ScienceMap {
        profiles: file.profiles,
        interest_bounds: file.boundaries.interest,
        impact_bounds: file.boundaries.impact,
        correlation: file.correlation,
        coords2d: file.coords2d,
        embedding_stress: file.embedding_stress,
        salient_terms: file.salient_terms,
        fractional: file.fractional,
        decisions: file.decisions,
        warnings: file.warnings,
    })
}

/// Profiles table in the shape of the significant-topics report.
pub fn write_profiles_csv(path: &Path, map: &ScienceMap) -> Result<()> {
    let mut out =
        String::from("topic,paper_count,citation_sum,cpp,growth_pct,grid_cell,top_terms\n");
    for p in &map.profiles {
        let terms: Vec<&str> = p.top_terms.iter().map(|(t, _)| t.as_str()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.topic_id,
            p.paper_count,
            p.citation_sum,
            fmt_f64(p.cpp),
            fmt_f64(p.growth_pct),
            p.grid_cell,
            csv_field(&terms.join("; "))
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Long-format (topic, year, papers, citations) table.
pub fn write_evolution_csv(path: &Path, rows: &[crate::scimap::EvolutionRow]) -> Result<()> {
    let mut out = String::from("topic,year,papers,citations\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.topic, row.year, row.papers, row.citations
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}
