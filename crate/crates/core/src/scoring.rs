//! Scores a piece of software: consumer answers produce weighted dimension scores on 0–100,
//! expert ratings of the bonus indicators add up to a capped bonus on top.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ahp::WeightTable;
use crate::error::{Error, Result};
use crate::model::{Instrument, ResponseSet, ANSWER_MAX, WEIGHT_SUM_TOLERANCE};
use crate::numeric::mean;

pub const DEFAULT_BONUS_CAP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RespondentScore {
    pub respondent_id: String,
    /// At least one missing answer was replaced by the question mean.
    pub imputed: bool,
    pub dimension_scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerScores {
    pub respondents: Vec<RespondentScore>,
    /// Mean of each index score over respondents, on 0–100.
    pub pooled_indices: BTreeMap<String, f64>,
    /// Mean of each dimension score over respondents, on 0–100.
    pub pooled_dimensions: BTreeMap<String, f64>,
    pub imputed_respondents: usize,
}

/// Final scores. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub dimension_scores: BTreeMap<String, f64>,
    pub dimension_weights: BTreeMap<String, f64>,
    /// Weighted composite of the dimension scores, 0–100.
    pub core_score: f64,
    pub bonus: f64,
    pub bonus_cap: f64,
    /// `core_score + bonus`, 0–(100 + cap).
    pub final_score: f64,
    /// `final_score` rescaled onto 0–100.
    pub final_renormalized: f64,
    pub respondent_count: usize,
    pub imputed_respondents: usize,
    pub expert_count: usize,
}

/// Local weight of every index, grouped by dimension, checked to sum to one per dimension.
fn index_weights(
    instrument: &Instrument,
    weights: &WeightTable,
) -> Result<BTreeMap<String, Vec<(usize, f64)>>> {
    let mut out: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for (i, index) in instrument.indices.iter().enumerate() {
        let w = weights
            .local(&index.id)
            .ok_or_else(|| Error::IncompleteWeights(format!("no weight for index {}", index.id)))?;
        out.entry(index.dimension_id.clone())
            .or_default()
            .push((i, w));
    }
    for dim in &instrument.dimensions {
        let Some(members) = out.get(&dim.id) else {
            return Err(Error::InvalidInput(format!(
                "dimension {} has no indices",
                dim.id
            )));
        };
        let sum: f64 = members.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "index weights under {} sum to {sum}",
                dim.id
            )));
        }
    }
    Ok(out)
}

/// Dimension weights of the instrument's core dimensions.
pub fn dimension_weights(
    instrument: &Instrument,
    weights: &WeightTable,
) -> Result<BTreeMap<String, f64>> {
    instrument
        .dimensions
        .iter()
        .map(|d| {
            weights
                .local(&d.id)
                .map(|w| (d.id.clone(), w))
                .ok_or_else(|| {
                    Error::IncompleteWeights(format!("no weight for dimension {}", d.id))
                })
        })
        .collect()
}

/// Per-respondent and pooled dimension scores.
///
/// Answers map linearly onto [0, 1] (`value / 4`); an index scores the plain mean of its
/// questions and a dimension the weighted sum of its indices, times 100. Missing answers are
/// filled with the question mean and the respondent is flagged.
pub fn score_consumer(
    responses: &ResponseSet,
    instrument: &Instrument,
    weights: &WeightTable,
) -> Result<ConsumerScores> {
    if responses.consumers.is_empty() {
        return Err(Error::InvalidInput("no consumer responses".into()));
    }
    instrument.validate()?;
    let grouped = index_weights(instrument, weights)?;

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

    let mut question_means = Vec::with_capacity(positions.len());
    for (q, &p) in instrument.questions.iter().zip(&positions) {
        let present: Vec<f64> = responses
            .consumers
            .iter()
            .filter_map(|c| c.answers[p].map(f64::from))
            .collect();
        if present.is_empty() {
            return Err(Error::InsufficientData(format!(
                "question {} has no answers to impute from",
                q.id
            )));
        }
        question_means.push(mean(&present));
    }

    let max = f64::from(ANSWER_MAX);
    let index_cols: Vec<Vec<usize>> = instrument
        .indices
        .iter()
        .map(|idx| instrument.question_positions(idx))
        .collect();

    let mut respondents = Vec::with_capacity(responses.consumers.len());
    let mut index_totals = vec![0.0; instrument.indices.len()];
    for consumer in &responses.consumers {
        let normalized: Vec<f64> = positions
            .iter()
            .zip(&question_means)
            .map(|(&p, &m)| consumer.answers[p].map_or(m, f64::from) / max)
            .collect();
        let index_scores: Vec<f64> = index_cols
            .iter()
            .map(|cols| cols.iter().map(|&c| normalized[c]).sum::<f64>() / cols.len() as f64)
            .collect();
        for (total, s) in index_totals.iter_mut().zip(&index_scores) {
            *total += s;
        }
        let dimension_scores = grouped
            .iter()
            .map(|(dim, members)| {
                let s: f64 = members.iter().map(|(i, w)| w * index_scores[*i]).sum();
                (dim.clone(), 100.0 * s)
            })
            .collect();
        respondents.push(RespondentScore {
            respondent_id: consumer.respondent_id.clone(),
            imputed: !consumer.is_complete(),
            dimension_scores,
        });
    }

    let n = respondents.len() as f64;
    let pooled_indices = instrument
        .indices
        .iter()
        .zip(&index_totals)
        .map(|(idx, t)| (idx.id.clone(), 100.0 * t / n))
        .collect();
    let mut pooled_dimensions = BTreeMap::new();
    for dim in grouped.keys() {
        let values: Vec<f64> = respondents
            .iter()
            .map(|r| r.dimension_scores[dim])
            .collect();
        pooled_dimensions.insert(dim.clone(), mean(&values));
    }

    Ok(ConsumerScores {
        imputed_respondents: respondents.iter().filter(|r| r.imputed).count(),
        respondents,
        pooled_indices,
        pooled_dimensions,
    })
}

/// Mean expert rating over all bonus indicators, normalized to [0, 1] and scaled by `cap`.
pub fn score_expert_bonus(ratings: &[Vec<u8>], cap: f64) -> Result<f64> {
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bonus cap {cap} must be positive"
        )));
    }
    let values: Vec<f64> = ratings.iter().flatten().map(|&v| f64::from(v)).collect();
    if values.is_empty() {
        return Err(Error::InvalidInput("no expert bonus ratings".into()));
    }
    if let Some(v) = ratings.iter().flatten().find(|v| **v > ANSWER_MAX) {
        return Err(Error::InvalidInput(format!(
            "bonus rating {v} outside 0..={ANSWER_MAX}"
        )));
    }
    Ok(mean(&values) / f64::from(ANSWER_MAX) * cap)
}

/// Combines dimension scores and the bonus into a score card.
pub fn composite(
    core: &BTreeMap<String, f64>,
    dim_weights: &BTreeMap<String, f64>,
    bonus: f64,
    cap: f64,
) -> Result<ScoreCard> {
    if core.keys().ne(dim_weights.keys()) {
        return Err(Error::InvalidInput(
            "dimension scores and weights name different dimensions".into(),
        ));
    }
    let sum: f64 = dim_weights.values().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "dimension weights sum to {sum}"
        )));
    }
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bonus cap {cap} must be positive"
        )));
    }
    if !(0.0..=cap).contains(&bonus) {
        return Err(Error::InvalidInput(format!(
            "bonus {bonus} outside [0, {cap}]"
        )));
    }
    let core_score: f64 = core.iter().map(|(d, s)| dim_weights[d] * s).sum();
    let final_score = core_score + bonus;
    Ok(ScoreCard {
        dimension_scores: core.clone(),
        dimension_weights: dim_weights.clone(),
        core_score,
        bonus,
        bonus_cap: cap,
        final_score,
        final_renormalized: 100.0 * final_score / (100.0 + cap),
        respondent_count: 0,
        imputed_respondents: 0,
        expert_count: 0,
    })
}

/// Full scoring: consumer dimension scores, optional expert bonus (zero when there are no
/// expert ratings), and the composite.
pub fn score_software(
    responses: &ResponseSet,
    instrument: &Instrument,
    weights: &WeightTable,
    cap: f64,
) -> Result<ScoreCard> {
    let consumer = score_consumer(responses, instrument, weights)?;
    let dims = dimension_weights(instrument, weights)?;
    let bonus = if responses.expert_bonus.is_empty() {
        0.0
    } else {
        score_expert_bonus(&responses.bonus_matrix(), cap)?
    };
    let mut card = composite(&consumer.pooled_dimensions, &dims, bonus, cap)?;
    card.respondent_count = consumer.respondents.len();
    card.imputed_respondents = consumer.imputed_respondents;
    card.expert_count = responses.expert_bonus.len();
    Ok(card)
}
