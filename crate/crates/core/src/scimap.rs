//! Science-map analytics over a fitted model and its corpus metadata.
//!
//! Each modeled document is hard-assigned to its dominant topic; per-topic
//! profiles aggregate papers, citations, years and subject areas. Topics are
//! placed on a 4x4 significance grid cut at the median, third quartile and
//! 90th percentile of both axes, correlated pairwise over the document-topic
//! columns, and embedded in 2D by classical multidimensional scaling of
//! Jensen-Shannon distances.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dtm::{DocTermMatrix, Vocabulary};
use crate::lda::LdaModel;
use crate::modelselect::jensen_shannon;

/// Aggregated description of one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicProfile {
    pub topic_id: usize,
    /// Research interest: number of papers whose dominant topic this is.
    pub paper_count: u64,
    /// Research impact: total citations of those papers.
    pub citation_sum: u64,
    /// Citations per paper; paper_count floored at 1 in the denominator.
    pub cpp: f64,
    /// Highest-weight terms of the topic-word row, weight descending.
    pub top_terms: Vec<(String, f64)>,
    /// year -> (papers, citations) over this topic's year-valid papers.
    pub yearly: BTreeMap<i32, (u64, u64)>,
    pub growth_pct: f64,
    /// Significance-grid cell, `A`..`P`.
    pub grid_cell: char,
    pub subject_area_bars: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Interest,
    Impact,
}

/// Quantile cuts of one axis (type-7 linear interpolation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub axis: Axis,
    pub median: f64,
    pub q3: f64,
    pub p90: f64,
}

/// One row of the long-format evolution table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionRow {
    pub topic: usize,
    pub year: i32,
    pub papers: u64,
    pub citations: u64,
}

/// Probability-weighted per-topic totals, reported when fractional
/// aggregation is requested alongside the hard assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalTotals {
    pub interest: Vec<f64>,
    pub impact: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScienceMap {
    pub profiles: Vec<TopicProfile>,
    pub interest_bounds: Boundaries,
    pub impact_bounds: Boundaries,
    /// K x K Pearson correlation of document-topic columns.
    pub correlation: Vec<Vec<f64>>,
    /// K x 2 intertopic coordinates from classical MDS.
    pub coords2d: Vec<[f64; 2]>,
    /// Residual of the 2D embedding: sum (d - delta)^2 / sum delta^2.
    pub embedding_stress: f64,
    pub salient_terms: Vec<(String, u64)>,
    pub fractional: Option<FractionalTotals>,
    /// Declared methodology choices, recorded with the output.
    pub decisions: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct MapOptions {
    pub reference_year: i32,
    pub top_terms: usize,
    pub salient_terms: usize,
    /// Additionally report probability-weighted per-topic totals.
    pub fractional: bool,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            reference_year: 2019,
            top_terms: 5,
            salient_terms: 30,
            fractional: false,
        }
    }
}

/// Argmax of a document-topic row; ties go to the lowest index.
pub fn dominant_topic(theta_row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &value) in theta_row.iter().enumerate() {
        if value > theta_row[best] {
            best = k;
        }
    }
    best
}

/// Type-7 quantile: linear interpolation between order statistics.
fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n >= 1, "quantile of an empty sequence");
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Median, third quartile and 90th percentile of one axis.
pub fn quantile_boundaries(values: &[f64], axis: Axis) -> Boundaries {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Boundaries {
        axis,
        median: quantile_type7(&sorted, 0.5),
        q3: quantile_type7(&sorted, 0.75),
        p90: quantile_type7(&sorted, 0.9),
    }
}

fn tier(value: f64, bounds: &Boundaries) -> usize {
    // closed-right intervals: a value equal to a cut stays in the lower tier
    if value > bounds.p90 {
        3
    } else if value > bounds.q3 {
        2
    } else if value > bounds.median {
        1
    } else {
        0
    }
}

/// Grid cell letter. Rows run top-down by impact (row 0 above P90), columns
/// left-right by interest, so the top row is A-D, the rightmost column is
/// D/H/L/P, and the both-above-Q3 block is C, D, G, H.
pub fn grid_classify(
    interest: f64,
    impact: f64,
    interest_bounds: &Boundaries,
    impact_bounds: &Boundaries,
) -> char {
    let col = tier(interest, interest_bounds);
    let row = 3 - tier(impact, impact_bounds);
    (b'A' + (row * 4 + col) as u8) as char
}

/// Topics strictly above the third quartile on both axes (cells C, D, G, H).
pub fn significant_topics<'a>(
    profiles: &'a [TopicProfile],
    interest_bounds: &Boundaries,
    impact_bounds: &Boundaries,
) -> Vec<&'a TopicProfile> {
    profiles
        .iter()
        .filter(|p| {
            (p.paper_count as f64) > interest_bounds.q3
                && (p.citation_sum as f64) > impact_bounds.q3
        })
        .collect()
}

/// Percentage growth of yearly paper counts across `reference_year`:
/// `100 * (after - before) / max(before, 1)` where `after` covers the four
/// years following the reference year.
pub fn growth_pct(yearly: &BTreeMap<i32, (u64, u64)>, reference_year: i32) -> f64 {
    let mut before = 0u64;
    let mut after = 0u64;
    for (&year, &(papers, _)) in yearly {
        if year <= reference_year {
            before += papers;
        } else if year <= reference_year + 4 {
            after += papers;
        }
    }
    100.0 * (after as f64 - before as f64) / (before.max(1) as f64)
}

/// Re-projects profile yearly fields into a long-format table sorted by
/// (topic, year).
pub fn evolution_series(profiles: &[TopicProfile]) -> Vec<EvolutionRow> {
    let mut rows = Vec::new();
    for profile in profiles {
        for (&year, &(papers, citations)) in &profile.yearly {
            rows.push(EvolutionRow {
                topic: profile.topic_id,
                year,
                papers,
                citations,
            });
        }
    }
    rows
}

/// Pearson correlation between document-topic columns. A zero-variance
/// column correlates 0 with everything; the diagonal stays 1.
pub fn topic_correlation(theta: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = theta.len();
    let k = theta.first().map_or(0, Vec::len);
    let mut means = vec![0.0; k];
    for row in theta {
        for (j, &v) in row.iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= d as f64;
    }
    let mut centered: Vec<Vec<f64>> = vec![Vec::with_capacity(d); k];
    for row in theta {
        for (j, &v) in row.iter().enumerate() {
            centered[j].push(v - means[j]);
        }
    }
    // squared norms, multiplied before the single square root: this keeps
    // exactly anti-correlated columns at exactly -1
    let norms_sq: Vec<f64> = centered
        .iter()
        .map(|col| col.iter().map(|&x| x * x).sum::<f64>())
        .collect();

    let mut matrix = vec![vec![0.0; k]; k];
    for i in 0..k {
        matrix[i][i] = 1.0;
        for j in (i + 1)..k {
            let r = if norms_sq[i] == 0.0 || norms_sq[j] == 0.0 {
                0.0
            } else {
                let dot: f64 = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(&a, &b)| a * b)
                    .sum();
                dot / (norms_sq[i] * norms_sq[j]).sqrt()
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    matrix
}

/// Jensen-Shannon distance (square root of the divergence) between rows.
pub fn js_distance_matrix(phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = phi.len();
    let mut dist = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = jensen_shannon(&phi[i], &phi[j]).max(0.0).sqrt();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    dist
}

/// Classical metric MDS of the Jensen-Shannon distances onto 2D.
///
/// Squared distances are double-centered, the top two eigenpairs give the
/// coordinates, and each axis is sign-fixed so its first nonzero loading is
/// positive. All-zero distances yield the all-origin embedding. Returns the
/// coordinates and the embedding stress.
pub fn intertopic_coords(phi: &[Vec<f64>]) -> (Vec<[f64; 2]>, f64) {
    let k = phi.len();
    let dist = js_distance_matrix(phi);
    let mut coords = vec![[0.0f64; 2]; k];

    let total: f64 = dist.iter().flatten().sum();
    if total == 0.0 {
        return (coords, 0.0);
    }

    // B = -1/2 * C * D^2 * C with C the centering matrix
    let mut squared = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            squared[(i, j)] = dist[i][j] * dist[i][j];
        }
    }
    let row_means: Vec<f64> = (0..k).map(|i| squared.row(i).sum() / k as f64).collect();
    let grand_mean: f64 = row_means.iter().sum::<f64>() / k as f64;
    let mut b = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            b[(i, j)] = -0.5 * (squared[(i, j)] - row_means[i] - row_means[j] + grand_mean);
        }
    }

    let eigen = nalgebra::SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b_| {
        eigen.eigenvalues[b_]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
    });

    for (axis, &idx) in order.iter().take(2).enumerate() {
        let lambda = eigen.eigenvalues[idx].max(0.0);
        let scale = lambda.sqrt();
        let column = eigen.eigenvectors.column(idx);
        let sign =
            column
                .iter()
                .find(|&&v| v.abs() > 1e-12)
                .map_or(1.0, |&v| if v < 0.0 { -1.0 } else { 1.0 });
        for (i, coord) in coords.iter_mut().enumerate() {
            coord[axis] = sign * scale * column[i];
        }
    }

    // stress: sum (d_ij - delta_ij)^2 / sum delta_ij^2 over i < j
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let dx = coords[i][0] - coords[j][0];
            let dy = coords[i][1] - coords[j][1];
            let embedded = (dx * dx + dy * dy).sqrt();
            num += (embedded - dist[i][j]).powi(2);
            den += dist[i][j] * dist[i][j];
        }
    }
    let stress = if den > 0.0 { num / den } else { 0.0 };
    (coords, stress)
}

/// Corpus-wide term frequencies, top n by count, ties lexicographic.
pub fn salient_terms(dtm: &DocTermMatrix, vocab: &Vocabulary, n: usize) -> Vec<(String, u64)> {
    let mut freq = vec![0u64; vocab.len()];
    for row in &dtm.rows {
        for &(term, count) in row {
            freq[term as usize] += count as u64;
        }
    }
    let mut pairs: Vec<(String, u64)> = freq
        .into_iter()
        .enumerate()
        .filter(|&(_, count)| count > 0)
        .map(|(idx, count)| (vocab.term(idx).to_string(), count))
        .collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    pairs.truncate(n);
    pairs
}

/// Builds complete topic profiles: every modeled document contributes its
/// citations, year and subject areas to exactly its dominant topic.
pub fn build_profiles(
    model: &LdaModel,
    dtm: &DocTermMatrix,
    corpus: &Corpus,
    vocab: &Vocabulary,
    options: &MapOptions,
) -> Vec<TopicProfile> {
    let k = model.config.topics;
    let by_id: HashMap<&str, &crate::corpus::Document> = corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d))
        .collect();

    let mut profiles: Vec<TopicProfile> = (0..k)
        .map(|topic_id| TopicProfile {
            topic_id,
            paper_count: 0,
            citation_sum: 0,
            cpp: 0.0,
            top_terms: Vec::new(),
            yearly: BTreeMap::new(),
            growth_pct: 0.0,
            grid_cell: 'A',
            subject_area_bars: BTreeMap::new(),
        })
        .collect();

    for (row, doc_id) in model.theta.iter().zip(&dtm.doc_ids) {
        let Some(doc) = by_id.get(doc_id.as_str()) else {
            continue;
        };
        let topic = dominant_topic(row);
        let profile = &mut profiles[topic];
        profile.paper_count += 1;
        profile.citation_sum += doc.citations;
        if let Some(year) = doc.year {
            let entry = profile.yearly.entry(year).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += doc.citations;
        }
        for area in &doc.subject_areas {
            *profile.subject_area_bars.entry(area.clone()).or_insert(0) += 1;
        }
    }

    for profile in &mut profiles {
        profile.cpp = profile.citation_sum as f64 / profile.paper_count.max(1) as f64;
        profile.growth_pct = growth_pct(&profile.yearly, options.reference_year);
        let mut weighted: Vec<(usize, f64)> = model.phi[profile.topic_id]
            .iter()
            .copied()
            .enumerate()
            .collect();
        weighted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        profile.top_terms = weighted
            .into_iter()
            .take(options.top_terms)
            .map(|(idx, weight)| (vocab.term(idx).to_string(), weight))
            .collect();
    }

    let interest: Vec<f64> = profiles.iter().map(|p| p.paper_count as f64).collect();
    let impact: Vec<f64> = profiles.iter().map(|p| p.citation_sum as f64).collect();
    let interest_bounds = quantile_boundaries(&interest, Axis::Interest);
    let impact_bounds = quantile_boundaries(&impact, Axis::Impact);
    for profile in &mut profiles {
        profile.grid_cell = grid_classify(
            profile.paper_count as f64,
            profile.citation_sum as f64,
            &interest_bounds,
            &impact_bounds,
        );
    }
    profiles
}

/// Assembles the full science map.
pub fn build_science_map(
    model: &LdaModel,
    dtm: &DocTermMatrix,
    corpus: &Corpus,
    vocab: &Vocabulary,
    options: &MapOptions,
) -> ScienceMap {
    let profiles = build_profiles(model, dtm, corpus, vocab, options);
    let interest: Vec<f64> = profiles.iter().map(|p| p.paper_count as f64).collect();
    let impact: Vec<f64> = profiles.iter().map(|p| p.citation_sum as f64).collect();
    let interest_bounds = quantile_boundaries(&interest, Axis::Interest);
    let impact_bounds = quantile_boundaries(&impact, Axis::Impact);

    let correlation = topic_correlation(&model.theta);
    let mut warnings = Vec::new();
    for (k, profile) in profiles.iter().enumerate() {
        let variance_zero = model.theta.iter().all(|row| row[k] == model.theta[0][k]);
        if variance_zero && model.theta.len() > 1 {
            warnings.push(format!(
                "topic {} has a constant document-topic column; correlations set to 0",
                profile.topic_id
            ));
        }
    }

    let (coords2d, embedding_stress) = intertopic_coords(&model.phi);

    let fractional = if options.fractional {
        let k = model.config.topics;
        let by_id: HashMap<&str, &crate::corpus::Document> = corpus
            .documents
            .iter()
            .map(|d| (d.id.as_str(), d))
            .collect();
        let mut interest_frac = vec![0.0; k];
        let mut impact_frac = vec![0.0; k];
        for (row, doc_id) in model.theta.iter().zip(&dtm.doc_ids) {
            let Some(doc) = by_id.get(doc_id.as_str()) else {
                continue;
            };
            for (j, &t) in row.iter().enumerate() {
                interest_frac[j] += t;
                impact_frac[j] += t * doc.citations as f64;
            }
        }
        Some(FractionalTotals {
            interest: interest_frac,
            impact: impact_frac,
        })
    } else {
        None
    };

    let mut decisions = BTreeMap::new();
    decisions.insert(
        "assignment".into(),
        "dominant-topic argmax, ties to lowest index".into(),
    );
    decisions.insert(
        "quantile_method".into(),
        "type-7 linear interpolation".into(),
    );
    decisions.insert(
        "grid_layout".into(),
        "rows top-down by impact tier, columns left-right by interest tier, cells A..P".into(),
    );
    decisions.insert(
        "growth_formula".into(),
        format!(
            "100*(papers in ({y}, {}) - papers in (..={y}])/max(papers in (..={y}]), 1), reference year {y}",
            options.reference_year + 4,
            y = options.reference_year
        ),
    );
    decisions.insert(
        "intertopic_map".into(),
        "Jensen-Shannon distance, classical MDS, top-2 eigenpairs, sign-fixed axes".into(),
    );

    ScienceMap {
        profiles,
        interest_bounds,
        impact_bounds,
        correlation,
        coords2d,
        embedding_stress,
        salient_terms: salient_terms(dtm, vocab, options.salient_terms),
        fractional,
        decisions,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_topic_argmax_and_ties() {
        assert_eq!(dominant_topic(&[0.7, 0.2, 0.1]), 0);
        assert_eq!(dominant_topic(&[0.5, 0.5]), 0);
        assert_eq!(dominant_topic(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn dominant_topic_matches_bruteforce_argmax() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let row: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let brute = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .unwrap()
                .0;
            assert_eq!(dominant_topic(&row), brute);
        }
    }

    #[test]
    fn quantiles_type7() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let b = quantile_boundaries(&values, Axis::Interest);
        assert!((b.median - 5.5).abs() < 1e-12);
        assert!((b.q3 - 7.75).abs() < 1e-12);
        assert!((b.p90 - 9.1).abs() < 1e-12);
    }

    #[test]
    fn quantiles_degenerate_inputs() {
        let b = quantile_boundaries(&[4.0, 4.0, 4.0], Axis::Impact);
        assert_eq!((b.median, b.q3, b.p90), (4.0, 4.0, 4.0));
        let single = quantile_boundaries(&[7.0], Axis::Impact);
        assert_eq!((single.median, single.q3, single.p90), (7.0, 7.0, 7.0));
    }

    fn bounds(median: f64, q3: f64, p90: f64, axis: Axis) -> Boundaries {
        Boundaries {
            axis,
            median,
            q3,
            p90,
        }
    }

    #[test]
    fn grid_corners_and_boundary_rule() {
        let bi = bounds(10.0, 20.0, 30.0, Axis::Interest);
        let bp = bounds(100.0, 200.0, 300.0, Axis::Impact);
        // both above the 90th percentile -> top-right
        assert_eq!(grid_classify(31.0, 301.0, &bi, &bp), 'D');
        // both at or below the median -> bottom-left
        assert_eq!(grid_classify(10.0, 100.0, &bi, &bp), 'M');
        // boundary-equal interest stays in the lower tier
        assert_eq!(grid_classify(20.0, 301.0, &bi, &bp), 'B');
        assert_eq!(grid_classify(20.000001, 301.0, &bi, &bp), 'C');
    }

    #[test]
    fn grid_is_monotone() {
        let bi = bounds(10.0, 20.0, 30.0, Axis::Interest);
        let bp = bounds(10.0, 20.0, 30.0, Axis::Impact);
        let col = |c: char| (c as u8 - b'A') % 4;
        let row = |c: char| (c as u8 - b'A') / 4;
        let points = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];
        for &interest in &points {
            for &impact in &points {
                let cell = grid_classify(interest, impact, &bi, &bp);
                let right = grid_classify(interest + 1.0, impact, &bi, &bp);
                let up = grid_classify(interest, impact + 1.0, &bi, &bp);
                assert!(col(right) >= col(cell));
                assert!(row(up) <= row(cell));
            }
        }
    }

    #[test]
    fn significant_topics_match_grid_block() {
        let mut profiles = Vec::new();
        for (i, (papers, citations)) in [
            (5u64, 10u64),
            (10, 40),
            (20, 80),
            (30, 160),
            (40, 320),
            (50, 640),
            (60, 1280),
            (70, 2560),
        ]
        .iter()
        .enumerate()
        {
            profiles.push(TopicProfile {
                topic_id: i,
                paper_count: *papers,
                citation_sum: *citations,
                cpp: 0.0,
                top_terms: Vec::new(),
                yearly: BTreeMap::new(),
                growth_pct: 0.0,
                grid_cell: 'A',
                subject_area_bars: BTreeMap::new(),
            });
        }
        let interest: Vec<f64> = profiles.iter().map(|p| p.paper_count as f64).collect();
        let impact: Vec<f64> = profiles.iter().map(|p| p.citation_sum as f64).collect();
        let bi = quantile_boundaries(&interest, Axis::Interest);
        let bp = quantile_boundaries(&impact, Axis::Impact);
        let significant = significant_topics(&profiles, &bi, &bp);
        let brute: Vec<usize> = profiles
            .iter()
            .filter(|p| (p.paper_count as f64) > bi.q3 && (p.citation_sum as f64) > bp.q3)
            .map(|p| p.topic_id)
            .collect();
        assert_eq!(
            significant.iter().map(|p| p.topic_id).collect::<Vec<_>>(),
            brute
        );
        for p in &profiles {
            let cell = grid_classify(p.paper_count as f64, p.citation_sum as f64, &bi, &bp);
            assert_eq!(
                brute.contains(&p.topic_id),
                matches!(cell, 'C' | 'D' | 'G' | 'H'),
                "cell {cell} disagrees with quartile rule for topic {}",
                p.topic_id
            );
        }
    }

    #[test]
    fn significant_topics_empty_when_all_equal() {
        let profiles: Vec<TopicProfile> = (0..4)
            .map(|i| TopicProfile {
                topic_id: i,
                paper_count: 10,
                citation_sum: 100,
                cpp: 10.0,
                top_terms: Vec::new(),
                yearly: BTreeMap::new(),
                growth_pct: 0.0,
                grid_cell: 'A',
                subject_area_bars: BTreeMap::new(),
            })
            .collect();
        let bi = quantile_boundaries(&[10.0; 4], Axis::Interest);
        let bp = quantile_boundaries(&[100.0; 4], Axis::Impact);
        assert!(significant_topics(&profiles, &bi, &bp).is_empty());
    }

    #[test]
    fn growth_formula() {
        let mut yearly = BTreeMap::new();
        yearly.insert(2020, (5u64, 0u64));
        assert_eq!(growth_pct(&yearly, 2019), 500.0);

        let mut equal = BTreeMap::new();
        equal.insert(2018, (3, 0));
        equal.insert(2021, (3, 0));
        assert_eq!(growth_pct(&equal, 2019), 0.0);

        let mut hand = BTreeMap::new();
        hand.insert(2018, (2, 0));
        hand.insert(2021, (3, 0));
        hand.insert(2022, (3, 0));
        assert_eq!(growth_pct(&hand, 2019), 200.0);

        // years beyond the four-year window do not count
        let mut windowed = BTreeMap::new();
        windowed.insert(2019, (2, 0));
        windowed.insert(2023, (4, 0));
        windowed.insert(2024, (100, 0));
        assert_eq!(growth_pct(&windowed, 2019), 100.0);
    }

    #[test]
    fn evolution_rows_pivot_and_reconcile() {
        let mut yearly = BTreeMap::new();
        yearly.insert(2020, (1u64, 5u64));
        yearly.insert(2021, (2, 7));
        yearly.insert(2022, (3, 9));
        let profile = TopicProfile {
            topic_id: 4,
            paper_count: 6,
            citation_sum: 21,
            cpp: 3.5,
            top_terms: Vec::new(),
            yearly,
            growth_pct: 0.0,
            grid_cell: 'A',
            subject_area_bars: BTreeMap::new(),
        };
        let rows = evolution_series(&[profile]);
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows[0],
            EvolutionRow {
                topic: 4,
                year: 2020,
                papers: 1,
                citations: 5
            }
        );
        let papers: u64 = rows.iter().map(|r| r.papers).sum();
        let citations: u64 = rows.iter().map(|r| r.citations).sum();
        assert_eq!((papers, citations), (6, 21));
    }

    #[test]
    fn correlation_of_complementary_columns_is_minus_one() {
        // dyadic values keep the arithmetic exact
        let theta = vec![
            vec![0.25, 0.75],
            vec![0.5, 0.5],
            vec![0.75, 0.25],
            vec![0.125, 0.875],
        ];
        let corr = topic_correlation(&theta);
        assert_eq!(corr[0][1], -1.0);
        assert_eq!(corr[1][0], -1.0);
        assert_eq!(corr[0][0], 1.0);
    }

    #[test]
    fn correlation_matches_textbook_formula() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let theta: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let mut row: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 0.01).collect();
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= sum);
                row
            })
            .collect();
        let corr = topic_correlation(&theta);
        for i in 0..4 {
            assert!((corr[i][i] - 1.0).abs() < 1e-15);
            for j in 0..4 {
                assert!((corr[i][j] - corr[j][i]).abs() < 1e-15);
                assert!(corr[i][j] <= 1.0 + 1e-12 && corr[i][j] >= -1.0 - 1e-12);
                // direct formula
                let n = theta.len() as f64;
                let mi: f64 = theta.iter().map(|r| r[i]).sum::<f64>() / n;
                let mj: f64 = theta.iter().map(|r| r[j]).sum::<f64>() / n;
                let cov: f64 = theta.iter().map(|r| (r[i] - mi) * (r[j] - mj)).sum();
                let si: f64 = theta
                    .iter()
                    .map(|r| (r[i] - mi).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let sj: f64 = theta
                    .iter()
                    .map(|r| (r[j] - mj).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let expected = if si == 0.0 || sj == 0.0 {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    cov / (si * sj)
                };
                assert!((corr[i][j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_variance_column_correlates_zero() {
        let theta = vec![vec![0.5, 0.2, 0.3], vec![0.5, 0.3, 0.2]];
        let corr = topic_correlation(&theta);
        assert_eq!(corr[0][1], 0.0);
        assert_eq!(corr[0][2], 0.0);
        assert_eq!(corr[0][0], 1.0);
    }

    #[test]
    fn mds_identical_rows_collapse_to_origin() {
        let phi = vec![vec![0.25, 0.25, 0.25, 0.25]; 3];
        let (coords, stress) = intertopic_coords(&phi);
        assert!(coords.iter().all(|c| c == &[0.0, 0.0]));
        assert_eq!(stress, 0.0);
    }

    #[test]
    fn mds_two_points_split_symmetrically() {
        let phi = vec![vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.5]];
        let d = js_distance_matrix(&phi)[0][1];
        assert!((d - std::f64::consts::LN_2.sqrt()).abs() < 1e-12);
        let (coords, stress) = intertopic_coords(&phi);
        assert!((coords[0][0] - d / 2.0).abs() < 1e-9 || (coords[0][0] + d / 2.0).abs() < 1e-9);
        let embedded =
            ((coords[0][0] - coords[1][0]).powi(2) + (coords[0][1] - coords[1][1]).powi(2)).sqrt();
        assert!((embedded - d).abs() < 1e-9);
        assert!(stress < 1e-12);
    }

    #[test]
    fn mds_three_equidistant_rows_form_equilateral_triangle() {
        let phi = vec![
            vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5],
        ];
        let dist = js_distance_matrix(&phi);
        let (coords, stress) = intertopic_coords(&phi);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let embedded = ((coords[i][0] - coords[j][0]).powi(2)
                    + (coords[i][1] - coords[j][1]).powi(2))
                .sqrt();
                assert!(
                    (embedded - dist[i][j]).abs() < 1e-9,
                    "pair ({i},{j}): {embedded} vs {}",
                    dist[i][j]
                );
            }
        }
        assert!(stress < 1e-12);
    }

    #[test]
    fn mds_is_sign_deterministic() {
        let phi = vec![
            vec![0.6, 0.2, 0.1, 0.1],
            vec![0.1, 0.7, 0.1, 0.1],
            vec![0.1, 0.1, 0.6, 0.2],
            vec![0.2, 0.1, 0.1, 0.6],
        ];
        let (a, _) = intertopic_coords(&phi);
        let (b, _) = intertopic_coords(&phi);
        assert_eq!(a, b);
    }

    fn model_for(theta: Vec<Vec<f64>>, phi: Vec<Vec<f64>>) -> crate::lda::LdaModel {
        let k = phi.len();
        crate::lda::LdaModel {
            phi,
            theta,
            loglik_trace: vec![-1.0],
            retained_samples: 1,
            config: crate::lda::LdaConfig::for_topics(k.max(2)),
            seed_used: 1,
        }
    }

    fn corpus_from_rows(rows: &[(&str, &str, u64)]) -> crate::corpus::Corpus {
        // (id stand-in title, year, citations); source fixed
        let mut csv = String::from("Title,Abstract,Year,Cited by,Source title\n");
        for (title, year, citations) in rows {
            csv.push_str(&format!(
                "{title},abstract text,{year},{citations},Venue A\n"
            ));
        }
        let mut file = tempfile::NamedTempFile::new().unwrap();
        use std::io::Write as _;
        file.write_all(csv.as_bytes()).unwrap();
        let corpus =
            crate::corpus::parse_bib_csv(file.path(), &crate::corpus::ColumnMap::default())
                .unwrap();
        let mut mapping = crate::corpus::AreaMapping::new();
        mapping.insert("Venue A", "COMP");
        crate::corpus::merge_subject_areas(corpus, &mapping)
    }

    #[test]
    fn profiles_conserve_papers_and_citations() {
        // 12 documents with hand-assigned dominant topics
        let rows: Vec<(String, &str, u64)> = (0..12)
            .map(|i| (format!("Doc {i}"), "2020", (i as u64) * 3))
            .collect();
        let rows_ref: Vec<(&str, &str, u64)> =
            rows.iter().map(|(t, y, c)| (t.as_str(), *y, *c)).collect();
        let corpus = corpus_from_rows(&rows_ref);
        let doc_ids: Vec<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
        let theta: Vec<Vec<f64>> = (0..12)
            .map(|i| match i % 3 {
                0 => vec![0.8, 0.1, 0.1],
                1 => vec![0.1, 0.8, 0.1],
                _ => vec![0.1, 0.1, 0.8],
            })
            .collect();
        let phi = vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.7, 0.2],
            vec![0.2, 0.1, 0.7],
        ];
        let model = model_for(theta.clone(), phi);
        let vocab =
            crate::dtm::Vocabulary::from_terms(vec!["ant".into(), "bee".into(), "cat".into()]);
        let dtm = crate::dtm::DocTermMatrix {
            vocab_size: 3,
            doc_ids,
            rows: vec![vec![(0, 1)]; 12],
            lengths: vec![1; 12],
        };
        let profiles = build_profiles(&model, &dtm, &corpus, &vocab, &MapOptions::default());

        // manual tally oracle
        let mut expected = vec![(0u64, 0u64); 3];
        for (i, doc) in corpus.documents.iter().enumerate() {
            let topic = dominant_topic(&theta[i]);
            expected[topic].0 += 1;
            expected[topic].1 += doc.citations;
        }
        for (profile, &(papers, citations)) in profiles.iter().zip(&expected) {
            assert_eq!(profile.paper_count, papers);
            assert_eq!(profile.citation_sum, citations);
            assert_eq!(
                profile.subject_area_bars.get("COMP").copied().unwrap_or(0),
                papers
            );
        }
        let total_papers: u64 = profiles.iter().map(|p| p.paper_count).sum();
        let total_citations: u64 = profiles.iter().map(|p| p.citation_sum).sum();
        assert_eq!(total_papers as usize, corpus.documents.len());
        assert_eq!(
            total_citations,
            corpus.documents.iter().map(|d| d.citations).sum::<u64>()
        );
        // top terms follow the phi rows, weight descending
        assert_eq!(profiles[0].top_terms[0].0, "ant");
        assert_eq!(profiles[1].top_terms[0].0, "bee");
    }

    #[test]
    fn single_doc_corpus_concentrates_on_one_topic() {
        let corpus = corpus_from_rows(&[("Only doc", "2021", 9)]);
        let doc_ids: Vec<String> = corpus.documents.iter().map(|d| d.id.clone()).collect();
        let model = model_for(vec![vec![0.9, 0.1]], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let vocab = crate::dtm::Vocabulary::from_terms(vec!["ant".into(), "bee".into()]);
        let dtm = crate::dtm::DocTermMatrix {
            vocab_size: 2,
            doc_ids,
            rows: vec![vec![(0, 1)]],
            lengths: vec![1],
        };
        let profiles = build_profiles(&model, &dtm, &corpus, &vocab, &MapOptions::default());
        assert_eq!((profiles[0].paper_count, profiles[0].citation_sum), (1, 9));
        assert_eq!((profiles[1].paper_count, profiles[1].citation_sum), (0, 0));
        assert_eq!(profiles[0].yearly.get(&2021), Some(&(1, 9)));
    }

    #[test]
    fn salient_terms_sort_and_truncate() {
        use crate::dtm::{build_matrix, build_vocabulary};
        use crate::textprep::TokenizedDoc;
        let docs: Vec<TokenizedDoc> = vec![
            TokenizedDoc {
                id: "d0".into(),
                tokens: ["ant", "ant", "bee", "cat"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            },
            TokenizedDoc {
                id: "d1".into(),
                tokens: ["bee", "ant", "dog"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            },
        ];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let build = build_matrix(&docs, &vocab);
        let top = salient_terms(&build.matrix, &vocab, 2);
        assert_eq!(top, vec![("ant".to_string(), 3), ("bee".to_string(), 2)]);
        // n larger than the vocabulary returns everything, ties lexicographic
        let all = salient_terms(&build.matrix, &vocab, 100);
        assert_eq!(all.len(), 4);
        assert_eq!(all[2], ("cat".to_string(), 1));
        assert_eq!(all[3], ("dog".to_string(), 1));

        // brute-force count oracle
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for d in &docs {
            for t in &d.tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        for (term, count) in &all {
            assert_eq!(counts[term.as_str()], *count);
        }
    }
}
