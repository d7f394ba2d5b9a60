use serde::{Deserialize, Serialize};

use super::instrument::ANSWER_MAX;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsumerResponse {
    pub respondent_id: String,
    /// One entry per question; `None` marks a missing answer.
    pub answers: Vec<Option<u8>>,
}

impl ConsumerResponse {
    pub fn is_complete(&self) -> bool {
        self.answers.iter().all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertBonusRating {
    pub expert_id: String,
    /// One 0..=4 rating per bonus indicator.
    pub ratings: Vec<u8>,
}

/// Collected answers: consumers on the questionnaire, experts on the bonus indicators.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub question_ids: Vec<String>,
    pub consumers: Vec<ConsumerResponse>,
    pub bonus_ids: Vec<String>,
    pub expert_bonus: Vec<ExpertBonusRating>,
}

impl ResponseSet {
    pub fn new(
        question_ids: Vec<String>,
        consumers: Vec<ConsumerResponse>,
        bonus_ids: Vec<String>,
        expert_bonus: Vec<ExpertBonusRating>,
    ) -> Result<Self> {
        for c in &consumers {
            if c.answers.len() != question_ids.len() {
                return Err(Error::InvalidInput(format!(
                    "respondent {} answered {} questions, expected {}",
                    c.respondent_id,
                    c.answers.len(),
                    question_ids.len()
                )));
            }
            for (a, q) in c.answers.iter().zip(&question_ids) {
                if let Some(v) = a {
                    if *v > ANSWER_MAX {
                        return Err(Error::InvalidInput(format!(
                            "respondent {} answered {q} with {v}, outside 0..={ANSWER_MAX}",
                            c.respondent_id
                        )));
                    }
                }
            }
        }
        for e in &expert_bonus {
            if e.ratings.len() != bonus_ids.len() {
                return Err(Error::InvalidInput(format!(
                    "expert {} rated {} bonus indicators, expected {}",
                    e.expert_id,
                    e.ratings.len(),
                    bonus_ids.len()
                )));
            }
            if let Some(v) = e.ratings.iter().find(|v| **v > ANSWER_MAX) {
                return Err(Error::InvalidInput(format!(
                    "expert {} gave bonus rating {v}, outside 0..={ANSWER_MAX}",
                    e.expert_id
                )));
            }
        }
        Ok(ResponseSet {
            question_ids,
            consumers,
            bonus_ids,
            expert_bonus,
        })
    }

    /// Respondents with every question answered, as a respondent × question matrix.
    pub fn complete_matrix(&self) -> Vec<Vec<f64>> {
        self.consumers
            .iter()
            .filter(|c| c.is_complete())
            .map(|c| {
                c.answers
                    .iter()
                    .map(|a| f64::from(a.unwrap_or(0)))
                    .collect()
            })
            .collect()
    }

    pub fn incomplete_count(&self) -> usize {
        self.consumers.iter().filter(|c| !c.is_complete()).count()
    }

    pub fn bonus_matrix(&self) -> Vec<Vec<u8>> {
        self.expert_bonus
            .iter()
            .map(|e| e.ratings.clone())
            .collect()
    }
}
