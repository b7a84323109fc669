//! Empirical ROC machinery and the multi-armed group reduction.
//!
//! A group of simultaneous attacks counts as detected only when every
//! attack in the group is detected. At the score level that rule is the
//! minimum over per-attack scores: thresholding the minimum reproduces
//! the all-detected verdict at every threshold.
//!
//! ```
//! use multiarm::metrics::{auroc, group_score};
//!
//! let g = group_score(&[0.8, 0.3]).unwrap();
//! assert_eq!(g, 0.3);
//!
//! // 8 of 9 (adversarial, natural) pairs are correctly ordered.
//! let a = auroc(&[0.5, 0.3, 0.1], &[0.9, 0.6, 0.4]).unwrap();
//! assert!((a - 8.0 / 9.0).abs() < 1e-12);
//! ```

use serde::Serialize;

use crate::capacity::DetectorBank;
use crate::error::{Error, Result};
use crate::ingest::ScoreTable;

/// One labeled detection score.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreSample {
    pub sample_id: String,
    pub score: f64,
    /// 0 = natural, 1 = adversarial group.
    pub label: u8,
}

/// Empirical ROC curve; thresholds strictly decreasing, rates
/// nondecreasing, endpoints (0,0) and (1,1) always present.
#[derive(Debug, Clone)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

#[derive(Debug, Clone, Copy)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }
}

/// Per-group evaluation result.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub group_id: String,
    pub auroc: f64,
    pub fpr_at_95_tpr: f64,
    pub n_natural: usize,
    pub n_groups: usize,
}

/// Reduces per-attack scores for one sample to the group score: the
/// minimum. For every threshold γ, group_score > γ iff every per-attack
/// score > γ.
///
/// ```
/// use multiarm::metrics::group_score;
///
/// let scores = [0.8, 0.3];
/// let g = group_score(&scores).unwrap();
/// assert_eq!(g, 0.3);
/// for gamma in [0.1, 0.3, 0.5, 0.9] {
///     assert_eq!(g > gamma, scores.iter().all(|&s| s > gamma));
/// }
/// ```
pub fn group_score(per_attack_scores: &[f64]) -> Result<f64> {
    if per_attack_scores.is_empty() {
        return Err(Error::Validation(
            "group has no valid attacks for this sample".into(),
        ));
    }
    Ok(per_attack_scores
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min))
}

/// Builds the empirical ROC from the two score populations. Rates use
/// the strict exceedance rule (score > threshold), matching the
/// thresholded detector.
pub fn roc_curve(natural_scores: &[f64], group_scores: &[f64]) -> Result<RocCurve> {
    if natural_scores.is_empty() || group_scores.is_empty() {
        return Err(Error::Validation(
            "both score populations must be nonempty".into(),
        ));
    }
    let mut thresholds: Vec<f64> = natural_scores.iter().chain(group_scores).cloned().collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    // sentinels guarantee the (0,0) and (1,1) endpoints
    thresholds.insert(0, f64::INFINITY);
    thresholds.push(f64::NEG_INFINITY);

    let frac_above = |scores: &[f64], t: f64| -> f64 {
        scores.iter().filter(|&&s| s > t).count() as f64 / scores.len() as f64
    };
    let points = thresholds
        .into_iter()
        .map(|t| RocPoint {
            threshold: t,
            fpr: frac_above(natural_scores, t),
            tpr: frac_above(group_scores, t),
        })
        .collect();
    Ok(RocCurve { points })
}

/// AUROC as the Mann-Whitney statistic: the fraction of (adversarial,
/// natural) pairs in which the adversarial score is higher, ties
/// counting one half. Computed by rank summation in O(n log n).
pub fn auroc(natural_scores: &[f64], group_scores: &[f64]) -> Result<f64> {
    if natural_scores.is_empty() || group_scores.is_empty() {
        return Err(Error::Validation(
            "both score populations must be nonempty".into(),
        ));
    }
    let mut all: Vec<(f64, bool)> = natural_scores
        .iter()
        .map(|&s| (s, false))
        .chain(group_scores.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // midrank sum over the positive population
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1..j
        rank_sum += midrank * all[i..j].iter().filter(|(_, pos)| *pos).count() as f64;
        i = j;
    }
    let n_pos = group_scores.len() as f64;
    let n_neg = natural_scores.len() as f64;
    let u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg))
}

/// Smallest empirical false-positive rate among operating points whose
/// true-positive rate reaches `level`. No interpolation.
///
/// ```
/// use multiarm::metrics::{fpr_at_tpr, roc_curve};
///
/// let natural = [0.5, 0.3, 0.1];
/// let group = [0.9, 0.6, 0.4];
/// let curve = roc_curve(&natural, &group).unwrap();
/// assert_eq!(fpr_at_tpr(&curve, 0.95).unwrap(), 1.0 / 3.0);
/// ```
pub fn fpr_at_tpr(curve: &RocCurve, level: f64) -> Result<f64> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::Validation(format!("tpr level {level} out of (0,1]")));
    }
    Ok(curve
        .points
        .iter()
        .filter(|p| p.tpr >= level)
        .map(|p| p.fpr)
        .fold(1.0, f64::min))
}

/// Evaluates one multi-armed group over a score table. `aggregator`
/// maps a per-sample detector bank to a single adversarial score.
///
/// Natural samples form the negative population; each sample's group
/// score (min over its valid attacks) forms the positive population.
/// Samples whose group has no valid attack are dropped from the
/// positives.
pub fn evaluate_group<F>(
    table: &ScoreTable,
    group_id: &str,
    attack_ids: &[String],
    aggregator: F,
) -> Result<MetricsReport>
where
    F: Fn(&DetectorBank) -> f64,
{
    for attack in attack_ids {
        if !table.has_source(attack) {
            return Err(Error::Manifest(format!(
                "attack id '{attack}' not present in score table"
            )));
        }
    }

    let mut natural_scores = Vec::new();
    let mut group_scores = Vec::new();
    for sample_id in table.sample_ids() {
        if let Ok(bank) = table.bank_for(sample_id, "natural") {
            natural_scores.push(aggregator(&bank));
        }
        let per_attack: Vec<f64> = attack_ids
            .iter()
            .filter(|attack| table.is_valid(sample_id, attack))
            .filter_map(|attack| table.bank_for(sample_id, attack).ok())
            .map(|bank| aggregator(&bank))
            .collect();
        if !per_attack.is_empty() {
            group_scores.push(group_score(&per_attack)?);
        }
    }

    if natural_scores.is_empty() {
        return Err(Error::Validation("no natural samples in table".into()));
    }
    if group_scores.is_empty() {
        return Err(Error::Validation(format!(
            "group '{group_id}' has no samples with valid attacks"
        )));
    }

    let curve = roc_curve(&natural_scores, &group_scores)?;
    Ok(MetricsReport {
        group_id: group_id.to_string(),
        auroc: auroc(&natural_scores, &group_scores)?,
        fpr_at_95_tpr: fpr_at_tpr(&curve, 0.95)?,
        n_natural: natural_scores.len(),
        n_groups: group_scores.len(),
    })
}
