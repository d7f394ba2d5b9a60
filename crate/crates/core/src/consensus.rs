//! Delphi round statistics: positivity, authority (Ca, Cs, Cr), per-indicator descriptives,
//! Kendall's W, and indicator screening.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ExpertProfile, Familiarity, Impact, JudgmentBasis, RatingRound, ScreeningThresholds,
};
use crate::numeric::{mean, sample_sd};

/// Judgment-basis lookup for Ca. Each row is `[large, medium, small]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgmentTable {
    pub theory: [f64; 3],
    pub practice: [f64; 3],
    pub peer: [f64; 3],
    pub intuition: [f64; 3],
}

impl Default for JudgmentTable {
    fn default() -> Self {
        JudgmentTable {
            theory: [0.3, 0.2, 0.1],
            practice: [0.5, 0.4, 0.3],
            peer: [0.1, 0.1, 0.1],
            intuition: [0.1, 0.1, 0.1],
        }
    }
}

impl JudgmentTable {
    pub fn value(&self, basis: JudgmentBasis, impact: Impact) -> f64 {
        let row = match basis {
            JudgmentBasis::TheoreticalAnalysis => &self.theory,
            JudgmentBasis::PracticalExperience => &self.practice,
            JudgmentBasis::PeerReference => &self.peer,
            JudgmentBasis::Intuition => &self.intuition,
        };
        match impact {
            Impact::Large => row[0],
            Impact::Medium => row[1],
            Impact::Small => row[2],
        }
    }

    /// Judgment coefficient of a single expert.
    pub fn expert_value(&self, profile: &ExpertProfile) -> f64 {
        JudgmentBasis::ALL
            .iter()
            .map(|&b| self.value(b, profile.basis.get(b)))
            .sum()
    }
}

/// Familiarity lookup for Cs, ordered from very familiar to very unfamiliar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamiliarityTable {
    pub values: [f64; 5],
}

impl Default for FamiliarityTable {
    fn default() -> Self {
        FamiliarityTable {
            values: [1.0, 0.8, 0.6, 0.4, 0.2],
        }
    }
}

impl FamiliarityTable {
    pub fn value(&self, level: Familiarity) -> f64 {
        let i = match level {
            Familiarity::VeryFamiliar => 0,
            Familiarity::Familiar => 1,
            Familiarity::Moderate => 2,
            Familiarity::Unfamiliar => 3,
            Familiarity::VeryUnfamiliar => 4,
        };
        self.values[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    /// `sd / mean`.
    pub cv: f64,
    /// Share of ratings at the scale ceiling.
    pub full_score_freq: f64,
    pub n: usize,
}

/// Everything computed for one Delphi round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundConsensus {
    pub round_no: u32,
    pub scale_max: u32,
    pub distributed: usize,
    pub returned: usize,
    pub positivity: f64,
    pub ca: f64,
    pub cs: f64,
    pub cr: f64,
    pub kendall_w: f64,
    pub tie_corrected: bool,
    pub indicators: BTreeMap<String, IndicatorStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConsensusOptions {
    pub judgment: JudgmentTable,
    pub familiarity: FamiliarityTable,
    /// Skip the tie correction in Kendall's W. Off by default, so ties are corrected.
    pub uncorrected_ties: bool,
}

pub fn positivity_coefficient(distributed: usize, returned: usize) -> Result<f64> {
    if distributed == 0 {
        return Err(Error::InvalidInput(
            "no questionnaires were distributed".into(),
        ));
    }
    if returned > distributed {
        return Err(Error::InvalidInput(format!(
            "{returned} questionnaires returned but only {distributed} distributed"
        )));
    }
    Ok(returned as f64 / distributed as f64)
}

/// Panel judgment coefficient Ca: the mean over experts of their summed basis values.
pub fn judgment_coefficient(profiles: &[ExpertProfile], table: &JudgmentTable) -> Result<f64> {
    if profiles.is_empty() {
        return Err(Error::InvalidInput("empty expert panel".into()));
    }
    let values: Vec<f64> = profiles.iter().map(|p| table.expert_value(p)).collect();
    Ok(mean(&values))
}

/// Panel familiarity coefficient Cs.
pub fn familiarity_coefficient(
    profiles: &[ExpertProfile],
    table: &FamiliarityTable,
) -> Result<f64> {
    if profiles.is_empty() {
        return Err(Error::InvalidInput("empty expert panel".into()));
    }
    let values: Vec<f64> = profiles
        .iter()
        .map(|p| table.value(p.familiarity))
        .collect();
    Ok(mean(&values))
}

/// Authority coefficient Cr = (Ca + Cs) / 2.
pub fn authority_coefficient(ca: f64, cs: f64) -> Result<f64> {
    for (name, v) in [("Ca", ca), ("Cs", cs)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok((ca + cs) / 2.0)
}

pub fn indicator_stats(ratings: &[u32], scale_max: u32) -> Result<IndicatorStats> {
    if ratings.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "indicator statistics need at least 2 ratings, got {}",
            ratings.len()
        )));
    }
    if let Some(v) = ratings.iter().find(|v| !(1..=scale_max).contains(*v)) {
        return Err(Error::InvalidInput(format!(
            "rating {v} outside 1..={scale_max}"
        )));
    }
    let xs: Vec<f64> = ratings.iter().map(|&v| f64::from(v)).collect();
    let m = mean(&xs);
    let sd = sample_sd(&xs);
    let full = ratings.iter().filter(|&&v| v == scale_max).count();
    Ok(IndicatorStats {
        mean: m,
        sd,
        cv: sd / m,
        full_score_freq: full as f64 / ratings.len() as f64,
        n: ratings.len(),
    })
}

/// Mid-ranks of `row` (1-based) and the tie term Σ(t³ - t) over its tie groups.
pub(crate) fn mid_ranks(row: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut ties = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        start = end;
    }
    (ranks, ties)
}

/// Kendall's coefficient of concordance for `m` raters (rows) over `n` indicators (columns).
///
/// Ratings are converted to within-rater mid-ranks. With `correct_ties`, the denominator is
/// `m²(n³ - n) - m·ΣT`, where each rater's `T` is Σ(t³ - t) over its tie groups.
pub fn kendalls_w(ratings: &[Vec<f64>], correct_ties: bool) -> Result<f64> {
    let m = ratings.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "Kendall's W needs at least 2 raters, got {m}"
        )));
    }
    let n = ratings[0].len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "Kendall's W needs at least 2 indicators, got {n}"
        )));
    }
    if let Some((i, _)) = ratings
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != n || r.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "rating matrix is incomplete at rater {i}"
        )));
    }

    let mut rank_sums = vec![0.0; n];
    let mut tie_total = 0.0;
    for row in ratings {
        let (ranks, ties) = mid_ranks(row);
        for (sum, r) in rank_sums.iter_mut().zip(&ranks) {
            *sum += r;
        }
        tie_total += ties;
    }

    let (mf, nf) = (m as f64, n as f64);
    let expected = mf * (nf + 1.0) / 2.0;
    let s: f64 = rank_sums
        .iter()
        .map(|r| (r - expected) * (r - expected))
        .sum();
    let mut denominator = mf * mf * (nf * nf * nf - nf);
    if correct_ties {
        denominator -= mf * tie_total;
    }
    if denominator <= 0.0 {
        return Err(Error::Degenerate(
            "every rater tied every indicator; Kendall's W is undefined".into(),
        ));
    }
    Ok(12.0 * s / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Mean,
    Fsf,
    Cv,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Mean => "mean",
            Criterion::Fsf => "fsf",
            Criterion::Cv => "cv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedIndicator {
    pub id: String,
    pub reasons: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScreeningOutcome {
    pub retained: Vec<String>,
    pub dropped: Vec<DroppedIndicator>,
}

/// Screening verdicts for one round, with the thresholds that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundScreening {
    pub round_no: u32,
    pub thresholds: ScreeningThresholds,
    pub retained: Vec<String>,
    pub dropped: Vec<DroppedIndicator>,
}

/// Keeps an indicator iff mean ≥ floor, full-score frequency ≥ floor and cv ≤ ceiling.
/// A NaN statistic fails its criterion.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn screen_indicators(
    stats: &BTreeMap<String, IndicatorStats>,
    thresholds: &ScreeningThresholds,
) -> ScreeningOutcome {
    let mut outcome = ScreeningOutcome::default();
    for (id, s) in stats {
        let mut reasons = Vec::new();
        if !(s.mean >= thresholds.mean_floor) {
            reasons.push(Criterion::Mean);
        }
        if !(s.full_score_freq >= thresholds.fsf_floor) {
            reasons.push(Criterion::Fsf);
        }
        if !(s.cv <= thresholds.cv_ceiling) {
            reasons.push(Criterion::Cv);
        }
        if reasons.is_empty() {
            outcome.retained.push(id.clone());
        } else {
            outcome.dropped.push(DroppedIndicator {
                id: id.clone(),
                reasons,
            });
        }
    }
    outcome
}

/// Floors and ceiling two sample standard deviations from the across-indicator averages of
/// the mean, full-score frequency and cv. The frequency floor is clipped to [0, 1].
pub fn derive_thresholds(stats: &BTreeMap<String, IndicatorStats>) -> Result<ScreeningThresholds> {
    if stats.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "threshold derivation needs at least 2 indicators, got {}",
            stats.len()
        )));
    }
    let means: Vec<f64> = stats.values().map(|s| s.mean).collect();
    let fsfs: Vec<f64> = stats.values().map(|s| s.full_score_freq).collect();
    let cvs: Vec<f64> = stats.values().map(|s| s.cv).collect();
    ScreeningThresholds::new(
        mean(&means) - 2.0 * sample_sd(&means),
        (mean(&fsfs) - 2.0 * sample_sd(&fsfs)).clamp(0.0, 1.0),
        (mean(&cvs) + 2.0 * sample_sd(&cvs)).max(0.0),
    )
}

/// All round statistics. Ca and Cs are computed over the experts who returned the form.
pub fn round_consensus(
    round: &RatingRound,
    profiles: &[ExpertProfile],
    options: &ConsensusOptions,
) -> Result<RoundConsensus> {
    let by_id: BTreeMap<&str, &ExpertProfile> =
        profiles.iter().map(|p| (p.id.as_str(), p)).collect();
    let responders = round
        .responses()
        .map(|(id, _)| {
            by_id.get(id).map(|p| (*p).clone()).ok_or_else(|| {
                Error::InvalidInput(format!("expert {id} has ratings but no profile"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let positivity = positivity_coefficient(round.distributed(), round.returned())?;
    let ca = judgment_coefficient(&responders, &options.judgment)?;
    let cs = familiarity_coefficient(&responders, &options.familiarity)?;
    let cr = authority_coefficient(ca, cs)?;
    let kendall_w = kendalls_w(&round.matrix(), !options.uncorrected_ties)?;

    let mut indicators = BTreeMap::new();
    for (j, id) in round.indicator_ids().iter().enumerate() {
        let stats = indicator_stats(&round.column(j), round.scale_max())
            .map_err(|e| Error::InvalidInput(format!("indicator {id}: {e}")))?;
        indicators.insert(id.clone(), stats);
    }

    Ok(RoundConsensus {
        round_no: round.round_no(),
        scale_max: round.scale_max(),
        distributed: round.distributed(),
        returned: round.returned(),
        positivity,
        ca,
        cs,
        cr,
        kendall_w,
        tie_corrected: !options.uncorrected_ties,
        indicators,
    })
}

/// Screens a round, deriving thresholds from the round itself unless `custom` is given.
pub fn screen_round(
    consensus: &RoundConsensus,
    custom: Option<&ScreeningThresholds>,
) -> Result<RoundScreening> {
    let thresholds = match custom {
        Some(t) => {
            t.check()?;
            *t
        }
        None => derive_thresholds(&consensus.indicators)?,
    };
    let outcome = screen_indicators(&consensus.indicators, &thresholds);
    Ok(RoundScreening {
        round_no: consensus.round_no,
        thresholds,
        retained: outcome.retained,
        dropped: outcome.dropped,
    })
}
