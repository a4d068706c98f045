//! `litmap`: a reproducible, file-based pipeline for LDA literature mapping.
//!
//! Stages: ingest -> prep -> select-k -> fit -> map -> report. Each stage
//! reads the previous stage's artifact from the output directory and writes
//! exactly one new artifact plus a manifest entry.

mod config;
mod manifest;
mod stages;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use stages::Paths;

/// Exit codes: 0 success, 1 I/O or internal failure, 2 bad configuration,
/// 3 missing or mismatched artifact, 4 numerical failure.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { code: 2, message }
    }

    pub fn artifact(message: String) -> Self {
        CliError { code: 3, message }
    }
}

impl From<litmap_core::Error> for CliError {
    fn from(err: litmap_core::Error) -> Self {
        use litmap_core::Error as E;
        let code = match &err {
            E::Config(_) | E::InvalidStopword(_) => 2,
            E::MissingArtifact(_) | E::SchemaMismatch { .. } | E::InvalidArtifact { .. } => 3,
            E::Domain(_) | E::Numerical(_) | E::SvdFailure => 4,
            E::MissingColumn(_) | E::MalformedCsv(_) | E::EmptyVocabulary(_) => 1,
            E::Io(_) | E::Json(_) => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

const EXIT_CODE_HELP: &str = "Exit codes:
  0  success
  1  input or I/O failure
  2  bad configuration
  3  missing or mismatched artifact (wrong stage order or schema)
  4  numerical failure";

#[derive(Parser)]
#[command(
    name = "litmap",
    version,
    about = "Bibliographic topic modelling and science mapping",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    /// INI-style key=value configuration file (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Artifact directory shared by all stages
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for chain fitting (default: logical cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Comma-separated chain seeds
    #[arg(long, global = true)]
    seed_list: Option<String>,

    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    show_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct SamplerArgs {
    /// Gibbs sweeps per chain
    #[arg(long)]
    iterations: Option<usize>,

    /// Retain every thin-th sweep
    #[arg(long)]
    thin: Option<usize>,

    /// Independent chains per topic count
    #[arg(long)]
    runs: Option<usize>,

    /// Document-topic smoothing (default 50/k)
    #[arg(long)]
    alpha: Option<f64>,

    /// Topic-word smoothing
    #[arg(long)]
    beta: Option<f64>,
}

impl SamplerArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.thin {
            cfg.thin = v;
        }
        if let Some(v) = self.runs {
            cfg.runs = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = Some(v);
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a bibliographic CSV export into corpus.json
    Ingest {
        /// Bibliographic CSV (RFC 4180, Scopus-style headers by default)
        #[arg(long)]
        input: Option<PathBuf>,

        /// Source-to-subject-area CSV with columns (source, area_code)
        #[arg(long)]
        areas: Option<PathBuf>,
    },
    /// Preprocess abstracts and build dtm.json
    Prep {
        /// Standard stopword list (default: bundled SMART list)
        #[arg(long)]
        stopwords: Option<PathBuf>,

        /// Domain stopword list of stem-form terms (default: bundled list)
        #[arg(long)]
        custom_stopwords: Option<PathBuf>,

        /// Minimum corpus frequency for a vocabulary term
        #[arg(long)]
        min_count: Option<usize>,
    },
    /// Score a topic-count grid and write selection.json
    #[command(name = "select-k")]
    SelectK {
        /// Candidate grid, either start:end:step or a comma list
        #[arg(long)]
        k_grid: Option<String>,

        #[command(flatten)]
        sampler: SamplerArgs,

        /// Pool all runs' retained samples into the harmonic-mean criterion
        #[arg(long)]
        pool_griffiths: bool,

        /// One-sided divergence for the spectrum criterion
        #[arg(long)]
        arun_asymmetric: bool,
    },
    /// Fit the final model at a fixed topic count and write model.json
    Fit {
        /// Topic count (default: chosen_k from selection.json)
        #[arg(long)]
        k: Option<usize>,

        #[command(flatten)]
        sampler: SamplerArgs,

        /// Retained-sample summary: mean or last
        #[arg(long)]
        posterior: Option<String>,
    },
    /// Build sciencemap.json from the model and corpus
    Map {
        /// Reference year for the growth window
        #[arg(long)]
        reference_year: Option<i32>,

        /// Top terms kept per topic profile
        #[arg(long)]
        top_terms: Option<usize>,

        /// Corpus-wide salient terms kept
        #[arg(long)]
        salient: Option<usize>,

        /// Aggregation: dominant or fractional
        #[arg(long)]
        assignment: Option<String>,
    },
    /// Emit SVG plots from sciencemap.json
    Report {
        /// Topic ids for the evolution panels (default: significant topics)
        #[arg(long, value_delimiter = ',')]
        topics: Option<Vec<usize>>,

        /// Force SVG emission on
        #[arg(long)]
        svg: bool,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(list) = &cli.seed_list {
        cfg.seeds = config::parse_seed_list(list)?;
    }
    Ok(cfg)
}

fn dispatch(command: &Command, cfg: &mut RunConfig) -> Result<(), CliError> {
    let paths = Paths::new(&cfg.out_dir);
    match command {
        Command::Ingest { input, areas } => {
            if let Some(path) = input {
                cfg.input = Some(path.clone());
            }
            if let Some(path) = areas {
                cfg.areas = Some(path.clone());
            }
            stages::cmd_ingest(cfg, &paths)
        }
        Command::Prep {
            stopwords,
            custom_stopwords,
            min_count,
        } => {
            if let Some(path) = stopwords {
                cfg.stopwords = Some(path.clone());
            }
            if let Some(path) = custom_stopwords {
                cfg.custom_stopwords = Some(path.clone());
            }
            if let Some(n) = min_count {
                cfg.min_count = *n;
            }
            stages::cmd_prep(cfg, &paths)
        }
        Command::SelectK {
            k_grid,
            sampler,
            pool_griffiths,
            arun_asymmetric,
        } => {
            if let Some(spec) = k_grid {
                cfg.k_grid = config::parse_k_grid(spec)?;
            }
            sampler.apply(cfg);
            if *pool_griffiths {
                cfg.pool_griffiths = true;
            }
            if *arun_asymmetric {
                cfg.arun_asymmetric = true;
            }
            stages::cmd_select_k(cfg, &paths)
        }
        Command::Fit {
            k,
            sampler,
            posterior,
        } => {
            if let Some(k) = k {
                cfg.k = Some(*k);
            }
            sampler.apply(cfg);
            if let Some(p) = posterior {
                cfg.posterior = config::parse_posterior(p)?;
            }
            stages::cmd_fit(cfg, &paths)
        }
        Command::Map {
            reference_year,
            top_terms,
            salient,
            assignment,
        } => {
            if let Some(year) = reference_year {
                cfg.reference_year = *year;
            }
            if let Some(n) = top_terms {
                cfg.top_terms = *n;
            }
            if let Some(n) = salient {
                cfg.salient_terms = *n;
            }
            if let Some(a) = assignment {
                cfg.assignment = config::parse_assignment(a)?;
            }
            stages::cmd_map(cfg, &paths)
        }
        Command::Report { topics, svg } => {
            if *svg {
                cfg.svg = true;
            }
            stages::cmd_report(cfg, &paths, topics.clone())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = build_config(&cli)?;

    if cli.show_config {
        print!("{}", cfg.show());
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::config(
            "missing subcommand; try `litmap --help`".into(),
        ));
    };

    match cfg.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))?;
            pool.install(|| dispatch(command, &mut cfg))
        }
        None => dispatch(command, &mut cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
