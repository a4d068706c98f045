//! The six pipeline stages. Each consumes the previous stage's artifact,
//! writes exactly one primary artifact plus a manifest entry, and prints a
//! short summary.

use std::path::{Path, PathBuf};

use litmap_core::artifact::{self, sha256_hex};
use litmap_core::corpus::{self, AreaMapping};
use litmap_core::dtm::{build_matrix, build_vocabulary, DocTermMatrix};
use litmap_core::lda::{self, LdaConfig, LdaModel, PosteriorEstimate};
use litmap_core::modelselect::{self, CandidateEval, ScoreOptions};
use litmap_core::scimap::{self, MapOptions};
use litmap_core::textprep::{self, StopwordKind, StopwordSet};
use rayon::prelude::*;

use crate::config::{Assignment, RunConfig};
use crate::manifest::{self, ManifestEntry};
use crate::{svg, CliError};

pub struct Paths {
    pub out_dir: PathBuf,
}

impl Paths {
    pub fn new(out_dir: &Path) -> Self {
        Paths {
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn corpus(&self) -> PathBuf {
        self.out_dir.join("corpus.json")
    }
    pub fn dtm(&self) -> PathBuf {
        self.out_dir.join("dtm.json")
    }
    pub fn dtm_csv(&self) -> PathBuf {
        self.out_dir.join("dtm.csv")
    }
    pub fn selection_json(&self) -> PathBuf {
        self.out_dir.join("selection.json")
    }
    pub fn selection_csv(&self) -> PathBuf {
        self.out_dir.join("selection.csv")
    }
    pub fn model(&self) -> PathBuf {
        self.out_dir.join("model.json")
    }
    pub fn sciencemap(&self) -> PathBuf {
        self.out_dir.join("sciencemap.json")
    }
    pub fn profiles_csv(&self) -> PathBuf {
        self.out_dir.join("profiles.csv")
    }
    pub fn evolution_csv(&self) -> PathBuf {
        self.out_dir.join("evolution.csv")
    }
    pub fn scatter_svg(&self) -> PathBuf {
        self.out_dir.join("scatter.svg")
    }
    pub fn evolution_svg(&self) -> PathBuf {
        self.out_dir.join("evolution.svg")
    }
    pub fn chains_dir(&self) -> PathBuf {
        self.out_dir.join("chains")
    }
}

fn ensure_out_dir(paths: &Paths) -> Result<(), CliError> {
    std::fs::create_dir_all(&paths.out_dir).map_err(litmap_core::Error::from)?;
    Ok(())
}

// ---------------------------------------------------------------- ingest

pub fn cmd_ingest(cfg: &RunConfig, paths: &Paths) -> Result<(), CliError> {
    let input = cfg.input.as_ref().ok_or_else(|| {
        CliError::config("ingest requires --input (or `input` in the config file)".into())
    })?;
    ensure_out_dir(paths)?;

    let corpus = corpus::parse_bib_csv(input, &cfg.columns)?;
    let rows = corpus.provenance.rows_parsed;
    let corpus = corpus::drop_missing_abstracts(corpus);
    let kept = corpus.documents.len();

    let mapping = match &cfg.areas {
        Some(path) => AreaMapping::from_csv_path(path)?,
        None => AreaMapping::new(),
    };
    let corpus = corpus::merge_subject_areas(corpus, &mapping);

    artifact::write_corpus(&paths.corpus(), &corpus)?;
    let mut entry = ManifestEntry::new("ingest")
        .input(input)?
        .param("rows_parsed", rows)
        .param("docs_after_abstract_filter", kept)
        .param("area_sources", mapping.len())
        .output(&paths.corpus());
    if let Some(areas) = &cfg.areas {
        entry = entry.input(areas)?;
    }
    manifest::append(&paths.out_dir, entry)?;

    println!("ingest: {rows} rows parsed, {kept} documents with abstracts");
    for warning in &corpus.provenance.warnings {
        eprintln!("  warning: {warning}");
    }
    Ok(())
}

// ------------------------------------------------------------------ prep

pub fn cmd_prep(cfg: &RunConfig, paths: &Paths) -> Result<(), CliError> {
    ensure_out_dir(paths)?;
    let corpus = artifact::read_corpus(&paths.corpus())?;

    let standard = match &cfg.stopwords {
        Some(path) => StopwordSet::from_file(StopwordKind::Standard, path)?,
        None => StopwordSet::builtin_standard(),
    };
    let custom = match &cfg.custom_stopwords {
        Some(path) => StopwordSet::from_file(StopwordKind::Custom, path)?,
        None => StopwordSet::builtin_domain(),
    };

    let tokenized = textprep::preprocess_corpus(&corpus, &standard, &custom);
    let vocabulary = build_vocabulary(&tokenized, cfg.min_count)?;
    let build = build_matrix(&tokenized, &vocabulary);

    artifact::write_dtm(&paths.dtm(), &build.matrix, &vocabulary)?;
    if cfg.csv {
        artifact::write_dtm_csv(&paths.dtm_csv(), &build.matrix, &vocabulary)?;
    }

    let mut entry = ManifestEntry::new("prep")
        .input(&paths.corpus())?
        .param("min_count", cfg.min_count)
        .param("standard_stopwords", standard.len())
        .param("custom_stopwords", custom.len())
        .param("documents", build.matrix.doc_count())
        .param("vocabulary", vocabulary.len())
        .param("skipped_empty_docs", build.skipped_doc_ids.len())
        .param("oov_tokens_dropped", build.oov_tokens_dropped)
        .output(&paths.dtm());
    if cfg.csv {
        entry = entry.output(&paths.dtm_csv());
    }
    manifest::append(&paths.out_dir, entry)?;

    println!(
        "prep: {} documents, {} terms, {} tokens ({} empty documents excluded)",
        build.matrix.doc_count(),
        vocabulary.len(),
        build.matrix.total_tokens(),
        build.skipped_doc_ids.len()
    );
    Ok(())
}

// ------------------------------------------------------- chain fitting

fn base_config(cfg: &RunConfig) -> LdaConfig {
    LdaConfig {
        topics: 2, // overwritten per candidate
        alpha: cfg.alpha.unwrap_or(1.0),
        beta: cfg.beta,
        iterations: cfg.iterations,
        thin: cfg.thin,
        runs: cfg.runs,
        seeds: cfg.seeds.clone(),
        posterior: cfg.posterior,
    }
}

fn chain_fingerprint(dtm_sha: &str, cfg: &LdaConfig, seed: u64) -> String {
    let posterior = match cfg.posterior {
        PosteriorEstimate::Mean => "mean",
        PosteriorEstimate::Last => "last",
    };
    let key = format!(
        "{dtm_sha}|k={}|seed={seed}|alpha={:.17e}|beta={:.17e}|iterations={}|thin={}|posterior={posterior}",
        cfg.topics, cfg.alpha, cfg.beta, cfg.iterations, cfg.thin
    );
    sha256_hex(key.as_bytes())[..12].to_string()
}

fn chain_cache_path(paths: &Paths, cfg: &LdaConfig, seed: u64, fingerprint: &str) -> PathBuf {
    paths.chains_dir().join(format!(
        "chain_k{}_s{}_{}.json",
        cfg.topics, seed, fingerprint
    ))
}

/// Runs (or reloads) one chain; the cache file is keyed by a fingerprint of
/// the matrix hash and every sampler parameter, so resume is per chain.
fn run_or_load_chain(
    paths: &Paths,
    dtm: &DocTermMatrix,
    dtm_sha: &str,
    cfg: &LdaConfig,
    seed: u64,
) -> Result<LdaModel, litmap_core::Error> {
    let fingerprint = chain_fingerprint(dtm_sha, cfg, seed);
    let cache = chain_cache_path(paths, cfg, seed, &fingerprint);
    if cache.exists() {
        if let Ok(model) = artifact::read_model(&cache) {
            return Ok(model);
        }
    }
    let model = lda::run_chain(dtm, cfg, seed)?;
    std::fs::create_dir_all(paths.chains_dir())?;
    artifact::write_model(&cache, &model, "../dtm.json")?;
    Ok(model)
}

fn fit_candidate(
    paths: &Paths,
    dtm: &DocTermMatrix,
    dtm_sha: &str,
    cfg: &LdaConfig,
) -> Result<(LdaModel, Vec<Vec<f64>>), litmap_core::Error> {
    cfg.validate()?;
    let models: Vec<LdaModel> = cfg.seeds[..cfg.runs]
        .par_iter()
        .map(|&seed| run_or_load_chain(paths, dtm, dtm_sha, cfg, seed))
        .collect::<Result<_, _>>()?;
    let traces: Vec<Vec<f64>> = models.iter().map(|m| m.loglik_trace.clone()).collect();
    let best = lda::pick_best(&models);
    Ok((models.into_iter().nth(best).expect("runs >= 1"), traces))
}

// -------------------------------------------------------------- select-k

pub fn cmd_select_k(cfg: &RunConfig, paths: &Paths) -> Result<(), CliError> {
    ensure_out_dir(paths)?;
    let (dtm, _vocab) = artifact::read_dtm(&paths.dtm())?;
    let dtm_sha = artifact::sha256_file(&paths.dtm())?;
    let base = base_config(cfg);

    let evals: Vec<CandidateEval> = cfg
        .k_grid
        .par_iter()
        .map(|&k| {
            let candidate_cfg = modelselect::config_for_candidate(&base, k, cfg.alpha);
            let (best, all_traces) = fit_candidate(paths, &dtm, &dtm_sha, &candidate_cfg)?;
            Ok(CandidateEval {
                k,
                best,
                all_traces,
            })
        })
        .collect::<Result<_, litmap_core::Error>>()?;

    let options = ScoreOptions {
        pool_all_runs: cfg.pool_griffiths,
        arun_asymmetric: cfg.arun_asymmetric,
    };
    let series = modelselect::score_candidates(&dtm.lengths, &evals, &options);

    artifact::write_selection_json(&paths.selection_json(), &series)?;
    if cfg.csv {
        artifact::write_selection_csv(&paths.selection_csv(), &series)?;
    }

    let grid: Vec<String> = cfg.k_grid.iter().map(|k| k.to_string()).collect();
    let seeds: Vec<String> = cfg.seeds.iter().map(|s| s.to_string()).collect();
    let mut entry = ManifestEntry::new("select-k")
        .input(&paths.dtm())?
        .param("k_grid", grid.join(","))
        .param("iterations", cfg.iterations)
        .param("thin", cfg.thin)
        .param("runs", cfg.runs)
        .param("seeds", seeds.join(","))
        .param("beta", cfg.beta)
        .param(
            "alpha",
            cfg.alpha.map_or("50/k".to_string(), |a| a.to_string()),
        )
        .param("pool_griffiths", cfg.pool_griffiths)
        .param("arun_asymmetric", cfg.arun_asymmetric)
        .param("chosen_k", series.chosen_k)
        .output(&paths.selection_json());
    if cfg.csv {
        entry = entry.output(&paths.selection_csv());
    }
    manifest::append(&paths.out_dir, entry)?;

    for warning in &series.warnings {
        eprintln!("  warning: {warning}");
    }
    println!(
        "select-k: chosen k = {} over grid of {}",
        series.chosen_k,
        cfg.k_grid.len()
    );
    Ok(())
}

// ------------------------------------------------------------------- fit

pub fn cmd_fit(cfg: &RunConfig, paths: &Paths) -> Result<(), CliError> {
    ensure_out_dir(paths)?;
    let (dtm, _vocab) = artifact::read_dtm(&paths.dtm())?;
    let dtm_sha = artifact::sha256_file(&paths.dtm())?;

    let k = match cfg.k {
        Some(k) => k,
        None => {
            artifact::read_selection_chosen_k(&paths.selection_json()).map_err(|e| match e {
                litmap_core::Error::MissingArtifact(p) => litmap_core::Error::MissingArtifact(
                    format!("{p} (run select-k first or pass --k)"),
                )
                .into(),
                other => CliError::from(other),
            })?
        }
    };

    let mut chain_cfg = base_config(cfg);
    chain_cfg.topics = k;
    chain_cfg.alpha = cfg.alpha.unwrap_or(50.0 / k as f64);
    let (model, _) = fit_candidate(paths, &dtm, &dtm_sha, &chain_cfg)?;

    artifact::write_model(&paths.model(), &model, "dtm.json")?;
    let seeds: Vec<String> = chain_cfg.seeds.iter().map(|s| s.to_string()).collect();
    manifest::append(
        &paths.out_dir,
        ManifestEntry::new("fit")
            .input(&paths.dtm())?
            .param("k", k)
            .param("alpha", chain_cfg.alpha)
            .param("beta", chain_cfg.beta)
            .param("iterations", chain_cfg.iterations)
            .param("thin", chain_cfg.thin)
            .param("runs", chain_cfg.runs)
            .param("seeds", seeds.join(","))
            .param("seed_used", model.seed_used)
            .output(&paths.model()),
    )?;

    println!(
        "fit: k = {k}, best seed = {}, retained samples: {}",
        model.seed_used, model.retained_samples
    );
    println!("  max log p(w|z) = {:.4}", model.max_loglik());
    Ok(())
}

// ------------------------------------------------------------------- map

pub fn cmd_map(cfg: &RunConfig, paths: &Paths) -> Result<(), CliError> {
    ensure_out_dir(paths)?;
    let corpus = artifact::read_corpus(&paths.corpus())?;
    let (dtm, vocab) = artifact::read_dtm(&paths.dtm())?;
    let model = artifact::read_model(&paths.model())?;

    if model.theta.len() != dtm.doc_count() {
        return Err(CliError::artifact(format!(
            "model has {} documents but the matrix has {}; refit against this dtm.json",
            model.theta.len(),
            dtm.doc_count()
        )));
    }
    if model.phi.first().map_or(0, Vec::len) != vocab.len() {
        return Err(CliError::artifact(format!(
            "model vocabulary has {} terms but the matrix has {}; refit against this dtm.json",
            model.phi.first().map_or(0, Vec::len),
            vocab.len()
        )));
    }

    let options = MapOptions {
        reference_year: cfg.reference_year,
        top_terms: cfg.top_terms,
        salient_terms: cfg.salient_terms,
        fractional: cfg.assignment == Assignment::Fractional,
    };
    let map = scimap::build_science_map(&model, &dtm, &corpus, &vocab, &options);

    artifact::write_sciencemap(&paths.sciencemap(), &map)?;
    if cfg.csv {
        artifact::write_profiles_csv(&paths.profiles_csv(), &map)?;
        artifact::write_evolution_csv(
            &paths.evolution_csv(),
            &scimap::evolution_series(&map.profiles),
        )?;
    }

    let mut entry = ManifestEntry::new("map")
        .input(&paths.corpus())?
        .input(&paths.dtm())?
        .input(&paths.model())?
        .param("reference_year", cfg.reference_year)
        .param("top_terms", cfg.top_terms)
        .param("salient_terms", cfg.salient_terms)
        .param(
            "assignment",
            match cfg.assignment {
                Assignment::Dominant => "dominant",
                Assignment::Fractional => "fractional",
            },
        )
        .output(&paths.sciencemap());
    if cfg.csv {
        entry = entry
            .output(&paths.profiles_csv())
            .output(&paths.evolution_csv());
    }
    manifest::append(&paths.out_dir, entry)?;

    let significant =
        scimap::significant_topics(&map.profiles, &map.interest_bounds, &map.impact_bounds);
    println!(
        "map: {} topics profiled, {} significant (above Q3 on both axes)",
        map.profiles.len(),
        significant.len()
    );
    for warning in &map.warnings {
        eprintln!("  warning: {warning}");
    }
    Ok(())
}

// ---------------------------------------------------------------- report

pub fn cmd_report(
    cfg: &RunConfig,
    paths: &Paths,
    topics: Option<Vec<usize>>,
) -> Result<(), CliError> {
    ensure_out_dir(paths)?;
    let map = artifact::read_sciencemap(&paths.sciencemap())?;

    if !cfg.svg {
        println!("report: svg emission disabled");
        return Ok(());
    }

    let topic_ids: Vec<usize> = match topics {
        Some(ids) => ids,
        None => scimap::significant_topics(&map.profiles, &map.interest_bounds, &map.impact_bounds)
            .iter()
            .map(|p| p.topic_id)
            .collect(),
    };

    std::fs::write(paths.scatter_svg(), svg::emit_scatter_svg(&map))
        .map_err(litmap_core::Error::from)?;
    std::fs::write(
        paths.evolution_svg(),
        svg::emit_evolution_svg(&map, &topic_ids),
    )
    .map_err(litmap_core::Error::from)?;

    let ids: Vec<String> = topic_ids.iter().map(|t| t.to_string()).collect();
    manifest::append(
        &paths.out_dir,
        ManifestEntry::new("report")
            .input(&paths.sciencemap())?
            .param("topics", ids.join(","))
            .output(&paths.scatter_svg())
            .output(&paths.evolution_svg()),
    )?;

    println!(
        "report: wrote {} and {} ({} topics in the evolution panels)",
        paths.scatter_svg().display(),
        paths.evolution_svg().display(),
        topic_ids.len()
    );
    Ok(())
}
