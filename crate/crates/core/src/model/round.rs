use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Delphi importance scale ceiling.
pub const DEFAULT_SCALE_MAX: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertRatings {
    pub expert_id: String,
    /// `None` when the expert did not return the form.
    pub ratings: Option<Vec<u32>>,
}

/// One Delphi round: importance ratings of each indicator by each consulted expert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRound {
    round_no: u32,
    scale_max: u32,
    distributed: usize,
    indicator_ids: Vec<String>,
    rows: Vec<ExpertRatings>,
}

impl RatingRound {
    pub fn new(
        round_no: u32,
        scale_max: u32,
        distributed: usize,
        indicator_ids: Vec<String>,
        rows: Vec<ExpertRatings>,
    ) -> Result<Self> {
        if round_no == 0 {
            return Err(Error::InvalidInput("round numbers start at 1".into()));
        }
        if scale_max == 0 {
            return Err(Error::InvalidInput("scale_max must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for id in &indicator_ids {
            if !seen.insert(id) {
                return Err(Error::InvalidInput(format!("duplicate indicator id {id}")));
            }
        }
        let mut experts = BTreeSet::new();
        for row in &rows {
            if !experts.insert(&row.expert_id) {
                return Err(Error::InvalidInput(format!(
                    "expert {} appears twice",
                    row.expert_id
                )));
            }
            if let Some(r) = &row.ratings {
                if r.len() != indicator_ids.len() {
                    return Err(Error::InvalidInput(format!(
                        "expert {} rated {} indicators, expected {}",
                        row.expert_id,
                        r.len(),
                        indicator_ids.len()
                    )));
                }
                for (v, id) in r.iter().zip(&indicator_ids) {
                    if !(1..=scale_max).contains(v) {
                        return Err(Error::InvalidInput(format!(
                            "expert {} rated {id} as {v}, outside 1..={scale_max}",
                            row.expert_id
                        )));
                    }
                }
            }
        }
        let round = RatingRound {
            round_no,
            scale_max,
            distributed,
            indicator_ids,
            rows,
        };
        if round.returned() > distributed {
            return Err(Error::InvalidInput(format!(
                "{} experts responded but only {distributed} forms were distributed",
                round.returned()
            )));
        }
        Ok(round)
    }

    pub fn round_no(&self) -> u32 {
        self.round_no
    }

    pub fn scale_max(&self) -> u32 {
        self.scale_max
    }

    pub fn distributed(&self) -> usize {
        self.distributed
    }

    pub fn indicator_ids(&self) -> &[String] {
        &self.indicator_ids
    }

    pub fn rows(&self) -> &[ExpertRatings] {
        &self.rows
    }

    /// Number of experts who returned a complete form.
    pub fn returned(&self) -> usize {
        self.rows.iter().filter(|r| r.ratings.is_some()).count()
    }

    /// Responding experts with their ratings, in file order.
    pub fn responses(&self) -> impl Iterator<Item = (&str, &[u32])> {
        self.rows
            .iter()
            .filter_map(|r| r.ratings.as_deref().map(|v| (r.expert_id.as_str(), v)))
    }

    /// Ratings of indicator `j` across responding experts.
    pub fn column(&self, j: usize) -> Vec<u32> {
        self.responses().map(|(_, r)| r[j]).collect()
    }

    /// Responding experts × indicators, as reals.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.responses()
            .map(|(_, r)| r.iter().map(|&v| f64::from(v)).collect())
            .collect()
    }
}

/// Retention thresholds for indicator screening. Boundary equality passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningThresholds {
    pub mean_floor: f64,
    pub fsf_floor: f64,
    pub cv_ceiling: f64,
}

impl ScreeningThresholds {
    pub fn new(mean_floor: f64, fsf_floor: f64, cv_ceiling: f64) -> Result<Self> {
        let t = ScreeningThresholds {
            mean_floor,
            fsf_floor,
            cv_ceiling,
        };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.mean_floor.is_finite()
            && self.fsf_floor.is_finite()
            && self.cv_ceiling.is_finite())
        {
            return Err(Error::InvalidInput("thresholds must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.fsf_floor) {
            return Err(Error::InvalidInput(format!(
                "full-score frequency floor {} outside [0, 1]",
                self.fsf_floor
            )));
        }
        if self.cv_ceiling < 0.0 {
            return Err(Error::InvalidInput(format!(
                "cv ceiling {} is negative",
                self.cv_ceiling
            )));
        }
        Ok(())
    }
}
