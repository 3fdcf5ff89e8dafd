use serde::{Deserialize, Serialize};

use super::{ParticipationError, ParticipationRow, Relatedness, RelatednessLabels};
use crate::percent::{ratio_percent, round_half_up};

/// Published 17-band cut-off table (threshold, publications, errors, error%,
/// average PP), used for replay checks.
pub const REFERENCE_BANDS: &str = include_str!("../../data/reference_bands.csv");

/// One row of the cut-off analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub band_index: usize,
    pub threshold_percent: f64,
    pub included: u64,
    pub errors: u64,
    pub error_percent: u32,
    pub avg_pp: u32,
}

impl BandRow {
    /// Builds a row from band aggregates, deriving the rounded error share.
    pub fn from_aggregates(
        band_index: usize,
        threshold_percent: f64,
        included: u64,
        errors: u64,
        mean_pp: f64,
    ) -> Self {
        assert!(errors <= included);
        BandRow {
            band_index,
            threshold_percent,
            included,
            errors,
            error_percent: ratio_percent(errors, included),
            avg_pp: if included == 0 { 0 } else { round_half_up(mean_pp) },
        }
    }

    /// Sources kept at this band once unrelated ones are dropped.
    pub fn selected(&self) -> u64 {
        self.included - self.errors
    }
}

/// 100, 95, ..., 20.
pub fn default_thresholds() -> Vec<f64> {
    (4..=20).rev().map(|k| f64::from(k * 5)).collect()
}

/// Band membership: `pp > threshold`, except a threshold of 100 (or more)
/// which admits exactly PP = 100.
pub fn in_band(pp: f64, threshold: f64) -> bool {
    if threshold >= 100.0 {
        pp >= 100.0
    } else {
        pp > threshold
    }
}

pub fn band_table(
    rows: &[ParticipationRow],
    labels: &RelatednessLabels,
    thresholds: &[f64],
) -> Result<Vec<BandRow>, ParticipationError> {
    if thresholds.is_empty() || thresholds.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(ParticipationError::UnsortedThresholds);
    }
    let mut table = Vec::with_capacity(thresholds.len());
    for (k, &t) in thresholds.iter().enumerate() {
        let mut included = 0u64;
        let mut errors = 0u64;
        let mut pp_sum = 0.0;
        for r in rows.iter().filter(|r| in_band(r.pp, t)) {
            match labels.get(&r.source_id) {
                Relatedness::Unlabeled => {
                    return Err(ParticipationError::UnlabeledSource(r.source_id.clone()))
                }
                Relatedness::Unrelated => errors += 1,
                Relatedness::Related => {}
            }
            included += 1;
            pp_sum += r.pp;
        }
        let mean = if included == 0 { 0.0 } else { pp_sum / included as f64 };
        table.push(BandRow::from_aggregates(k + 1, t, included, errors, mean));
    }
    Ok(table)
}

/// The smallest threshold whose band averages at least `min_avg_pp`.
pub fn select_cutoff(table: &[BandRow], min_avg_pp: f64) -> Result<f64, ParticipationError> {
    table
        .iter()
        .filter(|b| f64::from(b.avg_pp) >= min_avg_pp)
        .map(|b| b.threshold_percent)
        .min_by(f64::total_cmp)
        .ok_or(ParticipationError::NoBandQualifies(min_avg_pp))
}

/// Sources inside the cut-off band that are not labeled unrelated, sorted.
pub fn selected_publications(
    rows: &[ParticipationRow],
    labels: &RelatednessLabels,
    cutoff: f64,
) -> Vec<String> {
    let mut out: Vec<String> = rows
        .iter()
        .filter(|r| in_band(r.pp, cutoff) && labels.get(&r.source_id) != Relatedness::Unrelated)
        .map(|r| r.source_id.clone())
        .collect();
    out.sort();
    out
}

/// Band rows recomputed from published aggregates, with any cells that
/// disagree with the published error% column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReplay {
    pub rows: Vec<BandRow>,
    /// `(band_index, published, recomputed)` error% disagreements.
    pub mismatches: Vec<(usize, u32, u32)>,
}

/// Recomputes error% (and re-rounds the average) for published band rows.
/// `published` is `(row, published error%)` as read by
/// [`super::read_bands_csv`].
pub fn replay_bands(published: &[(BandRow, Option<u32>, f64)]) -> BandReplay {
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for (row, printed, mean) in published {
        let r = BandRow::from_aggregates(
            row.band_index,
            row.threshold_percent,
            row.included,
            row.errors,
            *mean,
        );
        if let Some(p) = printed {
            if *p != r.error_percent {
                mismatches.push((r.band_index, *p, r.error_percent));
            }
        }
        rows.push(r);
    }
    BandReplay { rows, mismatches }
}
