//! Topic-count selection: four criteria scored over a candidate grid,
//! min-max normalized (minimize-directed criteria inverted), summed, and
//! the argmax picked.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtm::DocTermMatrix;
use crate::error::{Error, Result};
use crate::lda::{self, LdaConfig, LdaModel};

/// Floor applied inside logarithms of the divergence-style criteria.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// The four selection criteria, named after their originating methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Griffiths2004,
    Cao2009,
    Arun2010,
    Deveaud2014,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Griffiths2004,
        Metric::Cao2009,
        Metric::Arun2010,
        Metric::Deveaud2014,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Griffiths2004 => "griffiths2004",
            Metric::Cao2009 => "cao2009",
            Metric::Arun2010 => "arun2010",
            Metric::Deveaud2014 => "deveaud2014",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Griffiths2004 | Metric::Deveaud2014 => Direction::Maximize,
            Metric::Cao2009 | Metric::Arun2010 => Direction::Minimize,
        }
    }
}

/// Harmonic-mean estimator of the marginal log-likelihood, computed in log
/// space: `log S - logsumexp(-l_1, ..., -l_S)`.
pub fn metric_griffiths(retained_logliks: &[f64]) -> f64 {
    assert!(
        !retained_logliks.is_empty(),
        "need at least one retained sample"
    );
    let negated: Vec<f64> = retained_logliks.iter().map(|&l| -l).collect();
    (retained_logliks.len() as f64).ln() - log_sum_exp(&negated)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb).sqrt()
}

/// Mean cosine similarity over all unordered topic pairs (minimize).
pub fn metric_cao(phi: &[Vec<f64>]) -> f64 {
    let k = phi.len();
    assert!(k >= 2, "need at least two topics");
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            total += cosine(&phi[i], &phi[j]);
            pairs += 1;
        }
    }
    total / pairs as f64
}

fn kl_floored(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            total += pi * (pi.max(LOG_FLOOR).ln() - qi.max(LOG_FLOOR).ln());
        }
    }
    total
}

/// Jensen-Shannon divergence (natural log) between two distributions.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| (a + b) / 2.0).collect();
    0.5 * kl_floored(p, &m) + 0.5 * kl_floored(q, &m)
}

/// Mean Jensen-Shannon divergence over all unordered topic pairs (maximize).
pub fn metric_deveaud(phi: &[Vec<f64>]) -> f64 {
    let k = phi.len();
    assert!(k >= 2, "need at least two topics");
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            total += jensen_shannon(&phi[i], &phi[j]);
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Divergence between the topic-word singular-value spectrum and the
/// length-weighted document-topic totals (minimize).
///
/// `c1` is the singular values of phi normalized to sum 1 (descending), `c2`
/// is `lengths . theta` normalized and sorted descending. By default the
/// symmetric KL sum is used; `asymmetric` keeps only the `c1`-side term.
pub fn metric_arun(
    phi: &[Vec<f64>],
    theta: &[Vec<f64>],
    lengths: &[u32],
    asymmetric: bool,
) -> Result<f64> {
    debug_assert_eq!(theta.len(), lengths.len());
    let k = phi.len();
    let v = phi.first().map_or(0, Vec::len);
    let flat: Vec<f64> = phi.iter().flatten().copied().collect();
    let matrix = DMatrix::from_row_slice(k, v, &flat);
    let svd = matrix
        .try_svd(false, false, f64::EPSILON, 1000)
        .ok_or(Error::SvdFailure)?;
    let mut c1: Vec<f64> = svd.singular_values.iter().copied().collect();
    c1.resize(k, 0.0); // rank-deficient shapes (V < K) pad with zeros
    c1.sort_by(|a, b| b.partial_cmp(a).unwrap());
    normalize_to_sum_one(&mut c1);

    let mut c2 = vec![0.0; k];
    for (row, &len) in theta.iter().zip(lengths) {
        for (j, &t) in row.iter().enumerate() {
            c2[j] += len as f64 * t;
        }
    }
    c2.sort_by(|a, b| b.partial_cmp(a).unwrap());
    normalize_to_sum_one(&mut c2);

    let forward = kl_floored(&c1, &c2);
    Ok(if asymmetric {
        forward
    } else {
        forward + kl_floored(&c2, &c1)
    })
}

fn normalize_to_sum_one(values: &mut [f64]) {
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        for v in values {
            *v /= sum;
        }
    }
}

/// Min-max rescale into [0, 1], flipping minimize-directed series. NaN
/// entries are excluded from the min/max and stay NaN; a constant series
/// maps to all 0.5.
pub fn normalize_series(raw: &[f64], direction: Direction) -> Vec<f64> {
    let finite: Vec<f64> = raw.iter().copied().filter(|v| !v.is_nan()).collect();
    if finite.is_empty() {
        return raw.to_vec();
    }
    let min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    raw.iter()
        .map(|&v| {
            if v.is_nan() {
                f64::NAN
            } else if max == min {
                0.5
            } else {
                let scaled = (v - min) / (max - min);
                match direction {
                    Direction::Maximize => scaled,
                    Direction::Minimize => 1.0 - scaled,
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricColumn {
    pub metric: Metric,
    pub direction: Direction,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Raw and normalized criterion values over the candidate grid, the
/// composite (sum of normalized values), and the selected topic count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSeries {
    pub candidates: Vec<usize>,
    pub columns: Vec<MetricColumn>,
    pub composite: Vec<f64>,
    pub chosen_k: usize,
    pub warnings: Vec<String>,
}

impl MetricSeries {
    /// Normalizes each raw column, sums into the composite (NaN contributes
    /// 0 with a warning), and picks the argmax; ties go to the smaller k.
    pub fn from_raw(candidates: Vec<usize>, raw: Vec<(Metric, Vec<f64>)>) -> Self {
        assert!(!candidates.is_empty());
        let mut warnings = Vec::new();
        let columns: Vec<MetricColumn> = raw
            .into_iter()
            .map(|(metric, values)| {
                assert_eq!(values.len(), candidates.len());
                let normalized = normalize_series(&values, metric.direction());
                MetricColumn {
                    metric,
                    direction: metric.direction(),
                    raw: values,
                    normalized,
                }
            })
            .collect();

        let mut composite = vec![0.0; candidates.len()];
        for column in &columns {
            for (i, &n) in column.normalized.iter().enumerate() {
                if n.is_nan() {
                    warnings.push(format!(
                        "{} is undefined at k={}, treated as 0 in the composite",
                        column.metric.name(),
                        candidates[i]
                    ));
                } else {
                    composite[i] += n;
                }
            }
        }

        let mut chosen_idx = 0;
        for (i, &value) in composite.iter().enumerate() {
            if value > composite[chosen_idx] {
                chosen_idx = i;
            }
        }
        MetricSeries {
            chosen_k: candidates[chosen_idx],
            candidates,
            columns,
            composite,
            warnings,
        }
    }
}

/// The fitted evidence for one candidate k that the criteria consume.
#[derive(Debug, Clone)]
pub struct CandidateEval {
    pub k: usize,
    /// Best-of-runs model for this k.
    pub best: LdaModel,
    /// Retained log-likelihood traces of all runs, seed order.
    pub all_traces: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    /// Pool every run's retained samples into the harmonic-mean estimator
    /// instead of only the best run's.
    pub pool_all_runs: bool,
    /// Use the one-sided divergence for the spectrum criterion.
    pub arun_asymmetric: bool,
}

/// Scores fitted candidates into a [`MetricSeries`]. An SVD failure aborts
/// the whole candidate: all four criteria record NaN for that k, so the
/// candidate drops out of every normalization and cannot win.
pub fn score_candidates(
    lengths: &[u32],
    evals: &[CandidateEval],
    options: &ScoreOptions,
) -> MetricSeries {
    let candidates: Vec<usize> = evals.iter().map(|e| e.k).collect();
    let mut griffiths = Vec::new();
    let mut cao = Vec::new();
    let mut arun = Vec::new();
    let mut deveaud = Vec::new();
    let mut svd_warnings = Vec::new();

    for eval in evals {
        match metric_arun(
            &eval.best.phi,
            &eval.best.theta,
            lengths,
            options.arun_asymmetric,
        ) {
            Ok(value) => {
                arun.push(value);
                if options.pool_all_runs {
                    let pooled: Vec<f64> = eval.all_traces.iter().flatten().copied().collect();
                    griffiths.push(metric_griffiths(&pooled));
                } else {
                    griffiths.push(metric_griffiths(&eval.best.loglik_trace));
                }
                cao.push(metric_cao(&eval.best.phi));
                deveaud.push(metric_deveaud(&eval.best.phi));
            }
            Err(_) => {
                svd_warnings.push(format!("svd failed at k={}, candidate aborted", eval.k));
                for column in [&mut griffiths, &mut cao, &mut arun, &mut deveaud] {
                    column.push(f64::NAN);
                }
            }
        }
    }

    let mut series = MetricSeries::from_raw(
        candidates,
        vec![
            (Metric::Griffiths2004, griffiths),
            (Metric::Cao2009, cao),
            (Metric::Arun2010, arun),
            (Metric::Deveaud2014, deveaud),
        ],
    );
    series.warnings.extend(svd_warnings);
    series
}

/// Builds a per-k config from a base schedule, recomputing alpha = 50/k
/// unless overridden.
pub fn config_for_candidate(base: &LdaConfig, k: usize, alpha_override: Option<f64>) -> LdaConfig {
    let mut cfg = base.clone();
    cfg.topics = k;
    cfg.alpha = alpha_override.unwrap_or(50.0 / k as f64);
    cfg
}

/// Fits every candidate (chains parallel via rayon) and scores the grid.
pub fn evaluate_grid(
    dtm: &DocTermMatrix,
    candidates: &[usize],
    base: &LdaConfig,
    alpha_override: Option<f64>,
    options: &ScoreOptions,
) -> Result<MetricSeries> {
    if candidates.is_empty() {
        return Err(Error::Config("empty candidate grid".into()));
    }
    let evals: Vec<CandidateEval> = candidates
        .par_iter()
        .map(|&k| {
            let cfg = config_for_candidate(base, k, alpha_override);
            let models = lda::fit_all_runs(dtm, &cfg)?;
            let all_traces = models.iter().map(|m| m.loglik_trace.clone()).collect();
            let best = lda::pick_best(&models);
            Ok(CandidateEval {
                k,
                best: models.into_iter().nth(best).expect("runs >= 1"),
                all_traces,
            })
        })
        .collect::<Result<_>>()?;
    Ok(score_candidates(&dtm.lengths, &evals, options))
}
