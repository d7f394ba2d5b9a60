//! Reliability (Cronbach's α, corrected item-total correlation, α if item deleted) and content
//! validity (I-CVI, S-CVI).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instrument, ResponseSet};
use crate::numeric::{mean, pearson, sample_variance};

/// α at or above this is acceptable internal consistency.
pub const ALPHA_ACCEPTABLE: f64 = 0.7;
/// Questions whose corrected item-total correlation falls below this are flagged for deletion.
pub const CITC_FLOOR: f64 = 0.3;
pub const I_CVI_FLOOR: f64 = 0.78;
pub const S_CVI_FLOOR: f64 = 0.90;
/// Importance ratings at or above this count as relevant.
pub const DEFAULT_RELEVANCE_FLOOR: u32 = 5;
pub const IMPORTANCE_MAX: u32 = 7;

fn check_matrix(scores: &[Vec<f64>]) -> Result<usize> {
    let k = scores.first().map_or(0, Vec::len);
    if let Some(i) = scores
        .iter()
        .position(|r| r.len() != k || r.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "score matrix is incomplete at respondent {i}"
        )));
    }
    Ok(k)
}

fn column(scores: &[Vec<f64>], j: usize) -> Vec<f64> {
    scores.iter().map(|r| r[j]).collect()
}

fn without_column(scores: &[Vec<f64>], j: usize) -> Vec<Vec<f64>> {
    scores
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// Cronbach's α over a complete respondent × item matrix, using sample variances. Not clamped,
/// so it can be negative.
pub fn cronbach_alpha(scores: &[Vec<f64>]) -> Result<f64> {
    let k = check_matrix(scores)?;
    if scores.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "α needs at least 2 respondents, got {}",
            scores.len()
        )));
    }
    if k < 2 {
        return Err(Error::InsufficientData(format!(
            "α needs at least 2 items, got {k}"
        )));
    }
    let item_var: f64 = (0..k).map(|j| sample_variance(&column(scores, j))).sum();
    let totals: Vec<f64> = scores.iter().map(|r| r.iter().sum()).collect();
    let total_var = sample_variance(&totals);
    if total_var == 0.0 {
        return Err(Error::Degenerate("total score has zero variance".into()));
    }
    let kf = k as f64;
    Ok(kf / (kf - 1.0) * (1.0 - item_var / total_var))
}

/// Pearson correlation between item `item` and the sum of all other items.
pub fn corrected_item_total(scores: &[Vec<f64>], item: usize) -> Result<f64> {
    let k = check_matrix(scores)?;
    if item >= k {
        return Err(Error::InvalidInput(format!(
            "item {item} out of range (k = {k})"
        )));
    }
    if k < 2 || scores.len() < 2 {
        return Err(Error::InsufficientData(
            "corrected item-total correlation needs 2 items and 2 respondents".into(),
        ));
    }
    let x = column(scores, item);
    let rest: Vec<f64> = scores
        .iter()
        .map(|r| r.iter().sum::<f64>() - r[item])
        .collect();
    pearson(&x, &rest).ok_or_else(|| {
        Error::UndefinedCorrelation(format!("item {item} or its rest score is constant"))
    })
}

/// Cronbach's α with item `item` removed.
pub fn alpha_if_deleted(scores: &[Vec<f64>], item: usize) -> Result<f64> {
    let k = check_matrix(scores)?;
    if k < 3 {
        return Err(Error::InsufficientData(format!(
            "α if deleted needs at least 3 items, got {k}"
        )));
    }
    if item >= k {
        return Err(Error::InvalidInput(format!(
            "item {item} out of range (k = {k})"
        )));
    }
    cronbach_alpha(&without_column(scores, item))
}

/// Share of raters giving the item a rating of at least `relevance_floor`.
pub fn i_cvi(ratings: &[u32], relevance_floor: u32) -> Result<f64> {
    if ratings.is_empty() {
        return Err(Error::InvalidInput(
            "I-CVI needs at least one rating".into(),
        ));
    }
    if let Some(r) = ratings.iter().find(|r| !(1..=IMPORTANCE_MAX).contains(*r)) {
        return Err(Error::InvalidInput(format!(
            "importance rating {r} outside 1..={IMPORTANCE_MAX}"
        )));
    }
    let relevant = ratings.iter().filter(|&&r| r >= relevance_floor).count();
    Ok(relevant as f64 / ratings.len() as f64)
}

/// Scale-level CVI by averaging the item-level values.
pub fn s_cvi(i_cvis: &[f64]) -> Result<f64> {
    if i_cvis.is_empty() {
        return Err(Error::InvalidInput("S-CVI needs at least one item".into()));
    }
    Ok(mean(i_cvis))
}

/// A statistic that may be unavailable for structural reasons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Statistic {
    Value { value: f64 },
    NotApplicable,
    Undefined { reason: String },
}

impl Statistic {
    pub fn value(&self) -> Option<f64> {
        match self {
            Statistic::Value { value } => Some(*value),
            _ => None,
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(value) => Statistic::Value { value },
            Err(e) => Statistic::Undefined {
                reason: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionReliability {
    pub question_id: String,
    pub citc: Statistic,
    pub alpha_if_deleted: Statistic,
    /// Corrected item-total correlation below the deletion floor.
    pub flagged: bool,
    /// The correlation could not be computed; the question needs a manual look.
    pub needs_review: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReliability {
    pub index_id: String,
    pub name: String,
    pub alpha: Statistic,
    pub acceptable: bool,
    pub questions: Vec<QuestionReliability>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityTable {
    pub respondents_used: usize,
    pub respondents_excluded: usize,
    pub indices: Vec<IndexReliability>,
    pub total_alpha: Statistic,
    pub total_acceptable: bool,
    pub flagged_questions: Vec<String>,
    /// Total α recomputed without the flagged questions; not applicable when none are flagged.
    pub total_alpha_after_deletion: Statistic,
}

/// Per-index and total reliability of the consumer questionnaire.
///
/// Respondents with any missing answer are excluded. Failures inside one index are recorded in
/// the table rather than aborting it.
pub fn reliability_report(
    responses: &ResponseSet,
    instrument: &Instrument,
) -> Result<ReliabilityTable> {
    instrument.validate()?;
    let positions: Vec<usize> = instrument
        .questions
        .iter()
        .map(|q| {
            responses
                .question_ids
                .iter()
                .position(|id| *id == q.id)
                .ok_or_else(|| Error::InvalidInput(format!("responses lack question {}", q.id)))
        })
        .collect::<Result<_>>()?;

    let complete = responses.complete_matrix();
    if complete.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "reliability needs at least 2 complete respondents, got {}",
            complete.len()
        )));
    }
    // columns in instrument order
    let scores: Vec<Vec<f64>> = complete
        .iter()
        .map(|row| positions.iter().map(|&p| row[p]).collect())
        .collect();

    let mut indices = Vec::new();
    let mut flagged_questions = Vec::new();
    let mut flagged_positions = Vec::new();
    for index in &instrument.indices {
        let cols = instrument.question_positions(index);
        let sub: Vec<Vec<f64>> = scores
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect();
        let k = cols.len();
        let alpha = if k < 2 {
            Statistic::NotApplicable
        } else {
            Statistic::from_result(cronbach_alpha(&sub))
        };
        let mut questions = Vec::new();
        for (j, qid) in index.question_ids.iter().enumerate() {
            let citc = if k < 2 {
                Statistic::NotApplicable
            } else {
                Statistic::from_result(corrected_item_total(&sub, j))
            };
            let aid = if k < 3 {
                Statistic::NotApplicable
            } else {
                Statistic::from_result(alpha_if_deleted(&sub, j))
            };
            let flagged = citc.value().is_some_and(|r| r < CITC_FLOOR);
            if flagged {
                flagged_questions.push(qid.clone());
                flagged_positions.push(cols[j]);
            }
            questions.push(QuestionReliability {
                question_id: qid.clone(),
                needs_review: matches!(citc, Statistic::Undefined { .. }),
                citc,
                alpha_if_deleted: aid,
                flagged,
            });
        }
        indices.push(IndexReliability {
            index_id: index.id.clone(),
            name: index.name.clone(),
            acceptable: alpha.value().is_some_and(|a| a >= ALPHA_ACCEPTABLE),
            alpha,
            questions,
        });
    }

    let total_alpha = Statistic::from_result(cronbach_alpha(&scores));
    let total_alpha_after_deletion = if flagged_positions.is_empty() {
        Statistic::NotApplicable
    } else {
        let kept: Vec<Vec<f64>> = scores
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(i, _)| !flagged_positions.contains(i))
                    .map(|(_, v)| *v)
                    .collect()
            })
            .collect();
        Statistic::from_result(cronbach_alpha(&kept))
    };

    Ok(ReliabilityTable {
        respondents_used: complete.len(),
        respondents_excluded: responses.incomplete_count(),
        indices,
        total_acceptable: total_alpha.value().is_some_and(|a| a >= ALPHA_ACCEPTABLE),
        total_alpha,
        flagged_questions,
        total_alpha_after_deletion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemValidity {
    pub item_id: String,
    pub mean_importance: f64,
    pub i_cvi: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityTable {
    pub raters: usize,
    pub relevance_floor: u32,
    pub items: Vec<ItemValidity>,
    pub s_cvi: f64,
    pub s_cvi_passes: bool,
}

/// Content validity from a rater × item matrix of 1–7 importance ratings.
pub fn validity_report(
    item_ids: &[String],
    importance: &[Vec<u32>],
    relevance_floor: u32,
) -> Result<ValidityTable> {
    if importance.is_empty() {
        return Err(Error::InvalidInput(
            "validity needs at least one rater".into(),
        ));
    }
    if item_ids.is_empty() {
        return Err(Error::InvalidInput(
            "validity needs at least one item".into(),
        ));
    }
    if let Some(i) = importance.iter().position(|r| r.len() != item_ids.len()) {
        return Err(Error::InvalidInput(format!(
            "importance matrix is incomplete at rater {i}"
        )));
    }
    let mut items = Vec::new();
    for (j, id) in item_ids.iter().enumerate() {
        let col: Vec<u32> = importance.iter().map(|r| r[j]).collect();
        let value = i_cvi(&col, relevance_floor)
            .map_err(|e| Error::InvalidInput(format!("item {id}: {e}")))?;
        let as_f64: Vec<f64> = col.iter().map(|&v| f64::from(v)).collect();
        items.push(ItemValidity {
            item_id: id.clone(),
            mean_importance: mean(&as_f64),
            i_cvi: value,
            passes: value >= I_CVI_FLOOR,
        });
    }
    let scale = s_cvi(&items.iter().map(|i| i.i_cvi).collect::<Vec<_>>())?;
    Ok(ValidityTable {
        raters: importance.len(),
        relevance_floor,
        items,
        s_cvi: scale,
        s_cvi_passes: scale >= S_CVI_FLOOR,
    })
}
