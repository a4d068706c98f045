//! Effective run configuration: defaults, then an INI-style key=value file,
//! then command-line flags, in that order of precedence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use litmap_core::corpus::ColumnMap;
use litmap_core::lda::{PosteriorEstimate, DEFAULT_SEEDS};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    Dominant,
    Fractional,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub areas: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub custom_stopwords: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    pub columns: ColumnMap,
    pub min_count: usize,
    pub k: Option<usize>,
    pub k_grid: Vec<usize>,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub thin: usize,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub posterior: PosteriorEstimate,
    pub pool_griffiths: bool,
    pub arun_asymmetric: bool,
    pub reference_year: i32,
    pub top_terms: usize,
    pub salient_terms: usize,
    pub assignment: Assignment,
    pub csv: bool,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            areas: None,
            stopwords: None,
            custom_stopwords: None,
            out_dir: PathBuf::from("out"),
            jobs: None,
            columns: ColumnMap::default(),
            min_count: 1,
            k: None,
            k_grid: (1..=30).map(|i| i * 10).collect(),
            alpha: None,
            beta: 0.1,
            iterations: 2000,
            thin: 200,
            runs: 5,
            seeds: DEFAULT_SEEDS.to_vec(),
            posterior: PosteriorEstimate::Mean,
            pool_griffiths: false,
            arun_asymmetric: false,
            reference_year: 2019,
            top_terms: 5,
            salient_terms: 30,
            assignment: Assignment::Dominant,
            csv: true,
            svg: true,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::config(format!("invalid value `{value}` for config key `{key}`"))
}

pub fn parse_seed_list(value: &str) -> Result<Vec<u64>, CliError> {
    let seeds: Result<Vec<u64>, _> = value.split(',').map(|s| s.trim().parse::<u64>()).collect();
    let seeds = seeds.map_err(|_| CliError::config(format!("invalid seed list `{value}`")))?;
    if seeds.is_empty() {
        return Err(CliError::config("seed list must not be empty".into()));
    }
    Ok(seeds)
}

/// Grid spec: either `start:end:step` or a comma-separated list. Must be
/// ascending and positive.
pub fn parse_k_grid(value: &str) -> Result<Vec<usize>, CliError> {
    let grid: Vec<usize> = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::config(format!(
                "grid spec `{value}` must be start:end:step"
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("invalid grid spec `{value}`")))
        };
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step == 0 {
            return Err(CliError::config("grid step must be positive".into()));
        }
        (start..=end).step_by(step).collect()
    } else {
        value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::config(format!("invalid grid entry in `{value}`")))
            })
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(CliError::config("candidate grid must not be empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 2 {
        return Err(CliError::config(
            "candidate grid must be ascending with every k >= 2".into(),
        ));
    }
    Ok(grid)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

pub fn parse_posterior(value: &str) -> Result<PosteriorEstimate, CliError> {
    match value {
        "mean" => Ok(PosteriorEstimate::Mean),
        "last" => Ok(PosteriorEstimate::Last),
        _ => Err(CliError::config(format!(
            "posterior must be `mean` or `last`, got `{value}`"
        ))),
    }
}

pub fn parse_assignment(value: &str) -> Result<Assignment, CliError> {
    match value {
        "dominant" => Ok(Assignment::Dominant),
        "fractional" => Ok(Assignment::Fractional),
        _ => Err(CliError::config(format!(
            "assignment must be `dominant` or `fractional`, got `{value}`"
        ))),
    }
}

impl RunConfig {
    /// Applies one key=value pair from the configuration file.
    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "input" => self.input = Some(PathBuf::from(value)),
            "areas" => self.areas = Some(PathBuf::from(value)),
            "stopwords" => self.stopwords = Some(PathBuf::from(value)),
            "custom_stopwords" => self.custom_stopwords = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "jobs" => self.jobs = Some(value.parse().map_err(|_| bad(key, value))?),
            "col_title" => self.columns.title = value.to_string(),
            "col_abstract" => self.columns.abstract_col = value.to_string(),
            "col_year" => self.columns.year = value.to_string(),
            "col_citations" => self.columns.citations = value.to_string(),
            "col_source" => self.columns.source = value.to_string(),
            "year_min" => self.columns.year_min = value.parse().map_err(|_| bad(key, value))?,
            "year_max" => self.columns.year_max = value.parse().map_err(|_| bad(key, value))?,
            "min_count" => self.min_count = value.parse().map_err(|_| bad(key, value))?,
            "k" => self.k = Some(value.parse().map_err(|_| bad(key, value))?),
            "k_grid" => self.k_grid = parse_k_grid(value)?,
            "alpha" => self.alpha = Some(value.parse().map_err(|_| bad(key, value))?),
            "beta" => self.beta = value.parse().map_err(|_| bad(key, value))?,
            "iterations" => self.iterations = value.parse().map_err(|_| bad(key, value))?,
            "thin" => self.thin = value.parse().map_err(|_| bad(key, value))?,
            "runs" => self.runs = value.parse().map_err(|_| bad(key, value))?,
            "seeds" => self.seeds = parse_seed_list(value)?,
            "posterior" => self.posterior = parse_posterior(value)?,
            "pool_griffiths" => self.pool_griffiths = parse_bool(key, value)?,
            "arun_asymmetric" => self.arun_asymmetric = parse_bool(key, value)?,
            "reference_year" => self.reference_year = value.parse().map_err(|_| bad(key, value))?,
            "top_terms" => self.top_terms = value.parse().map_err(|_| bad(key, value))?,
            "salient_terms" => self.salient_terms = value.parse().map_err(|_| bad(key, value))?,
            "assignment" => self.assignment = parse_assignment(value)?,
            "csv" => self.csv = parse_bool(key, value)?,
            "svg" => self.svg = parse_bool(key, value)?,
            _ => return Err(CliError::config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Loads `key = value` lines; `#` and `;` start comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let content = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Rendered as a config file that reproduces the effective settings.
    pub fn show(&self) -> String {
        let mut out = String::new();
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or("(unset)".to_string(), |v| v.display().to_string())
        };
        let _ = writeln!(out, "input = {}", path(&self.input));
        let _ = writeln!(out, "areas = {}", path(&self.areas));
        let _ = writeln!(out, "stopwords = {}", path(&self.stopwords));
        let _ = writeln!(out, "custom_stopwords = {}", path(&self.custom_stopwords));
        let _ = writeln!(out, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(
            out,
            "jobs = {}",
            self.jobs.map_or("(auto)".to_string(), |j| j.to_string())
        );
        let _ = writeln!(out, "col_title = {}", self.columns.title);
        let _ = writeln!(out, "col_abstract = {}", self.columns.abstract_col);
        let _ = writeln!(out, "col_year = {}", self.columns.year);
        let _ = writeln!(out, "col_citations = {}", self.columns.citations);
        let _ = writeln!(out, "col_source = {}", self.columns.source);
        let _ = writeln!(out, "year_min = {}", self.columns.year_min);
        let _ = writeln!(out, "year_max = {}", self.columns.year_max);
        let _ = writeln!(out, "min_count = {}", self.min_count);
        let _ = writeln!(
            out,
            "k = {}",
            self.k
                .map_or("(from select-k)".to_string(), |k| k.to_string())
        );
        let grid: Vec<String> = self.k_grid.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "k_grid = {}", grid.join(","));
        let _ = writeln!(
            out,
            "alpha = {}",
            self.alpha.map_or("(50/k)".to_string(), |a| a.to_string())
        );
        let _ = writeln!(out, "beta = {}", self.beta);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "thin = {}", self.thin);
        let _ = writeln!(out, "runs = {}", self.runs);
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "seeds = {}", seeds.join(","));
        let _ = writeln!(
            out,
            "posterior = {}",
            match self.posterior {
                PosteriorEstimate::Mean => "mean",
                PosteriorEstimate::Last => "last",
            }
        );
        let _ = writeln!(out, "pool_griffiths = {}", self.pool_griffiths);
        let _ = writeln!(out, "arun_asymmetric = {}", self.arun_asymmetric);
        let _ = writeln!(out, "reference_year = {}", self.reference_year);
        let _ = writeln!(out, "top_terms = {}", self.top_terms);
        let _ = writeln!(out, "salient_terms = {}", self.salient_terms);
        let _ = writeln!(
            out,
            "assignment = {}",
            match self.assignment {
                Assignment::Dominant => "dominant",
                Assignment::Fractional => "fractional",
            }
        );
        let _ = writeln!(out, "csv = {}", self.csv);
        let _ = writeln!(out, "svg = {}", self.svg);
        out
    }
}
