//! Scoring of damage localization against a known damage set.
//!
//! Given per-element damage indices and the set of elements that were
//! actually damaged, this ranks elements, checks whether the damaged ones
//! surface at the top, and correlates the index against a reference
//! dissipation measure.  It is the measuring stick for controlled
//! experiments where the damaged elements are known by construction.

use serde::Serialize;

use crate::error::{invalid, Result};

/// One element's damage score and its reference dissipation.
#[derive(Debug, Clone)]
pub struct ElementScore {
    /// Element id (position in model element order).
    pub id: usize,
    /// Story the element belongs to, when known.
    pub story: Option<usize>,
    /// Damage index assigned by the assessment under test.
    pub di: f64,
    /// Reference hysteretic energy from the ground-truth run [J].
    pub reference_energy: f64,
}

/// Damage-index totals of one story.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoryAggregate {
    /// Story number.
    pub story: usize,
    /// Largest element index in the story.
    pub di_max: f64,
    /// Sum of element indices in the story.
    pub di_sum: f64,
    /// Number of scored elements in the story.
    pub elements: usize,
}

/// How well a set of damage indices localizes the known damage.
#[derive(Debug, Clone)]
pub struct LocalizationReport {
    /// Element ids ordered by decreasing damage index (ties by id).
    pub ranking: Vec<usize>,
    /// Fraction of the truly damaged elements found in the top `k` ranks,
    /// with `k` the damaged-set size.
    pub top_k_hit_rate: f64,
    /// Spearman rank correlation between the damage index and the
    /// reference energy.
    pub spearman: f64,
    /// Per-story damage-index totals, ascending by story; unassigned
    /// elements are skipped.
    pub stories: Vec<StoryAggregate>,
}

/// Fractional ranks of the values, averaging over ties.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; a tie block shares the mean of its span.
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; zero when either
/// side has no rank variance.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        var_a += (x - mean) * (x - mean);
        var_b += (y - mean) * (y - mean);
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    cov / (var_a * var_b).sqrt()
}

/// Scores a damage-index assignment against the known damaged elements.
///
/// # Errors
/// Both the score list and the damaged set must be nonempty, and every
/// damaged id must be scored.
pub fn localization_report(
    scores: &[ElementScore],
    damaged: &[usize],
) -> Result<LocalizationReport> {
    if scores.is_empty() {
        return Err(invalid("no element scores supplied"));
    }
    if damaged.is_empty() {
        return Err(invalid("the damaged-element set is empty"));
    }
    for id in damaged {
        if !scores.iter().any(|s| s.id == *id) {
            return Err(invalid(format!("damaged element {id} is not among the scores")));
        }
    }

    let mut ranking: Vec<&ElementScore> = scores.iter().collect();
    ranking.sort_by(|a, b| b.di.total_cmp(&a.di).then(a.id.cmp(&b.id)));
    let ranking: Vec<usize> = ranking.iter().map(|s| s.id).collect();

    let k = damaged.len().min(ranking.len());
    let hits = ranking[..k].iter().filter(|id| damaged.contains(id)).count();
    let top_k_hit_rate = hits as f64 / damaged.len() as f64;

    let di: Vec<f64> = scores.iter().map(|s| s.di).collect();
    let reference: Vec<f64> = scores.iter().map(|s| s.reference_energy).collect();
    let spearman = spearman(&di, &reference);

    let mut stories: Vec<StoryAggregate> = Vec::new();
    for score in scores {
        let Some(story) = score.story else { continue };
        match stories.iter_mut().find(|s| s.story == story) {
            Some(agg) => {
                agg.di_max = agg.di_max.max(score.di);
                agg.di_sum += score.di;
                agg.elements += 1;
            }
            None => stories.push(StoryAggregate {
                story,
                di_max: score.di,
                di_sum: score.di,
                elements: 1,
            }),
        }
    }
    stories.sort_by_key(|s| s.story);

    Ok(LocalizationReport { ranking, top_k_hit_rate, spearman, stories })
}
