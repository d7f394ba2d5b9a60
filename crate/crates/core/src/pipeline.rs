//! Config-driven run of every stage.
//!
//! Stages run in a fixed order: round statistics, screening, weights, reliability, validity,
//! score. A stage runs when its table is present in the config. Relative paths resolve against
//! the config file's directory; nothing is read from the environment.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ahp::{compute_weights, WeightMethod, WeightTable};
use crate::consensus::{round_consensus, screen_round, ConsensusOptions};
use crate::error::{Error, Result};
use crate::io::{
    load_response_set, parse_ratings, read_experts, read_importance, read_indicators, read_json,
    read_pairwise, RatingsOptions,
};
use crate::model::{load_default_instrument, ScreeningThresholds, DEFAULT_SCALE_MAX};
use crate::psychometrics::{reliability_report, validity_report, DEFAULT_RELEVANCE_FLOOR};
use crate::report::{parse_report_json, ReportBundle};
use crate::scoring::{score_software, DEFAULT_BONUS_CAP};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Indicator hierarchy; required by the weights stage.
    pub indicators: Option<PathBuf>,
    pub consensus: Option<ConsensusConfig>,
    pub weights: Option<WeightsConfig>,
    pub reliability: Option<ReliabilityConfig>,
    pub validity: Option<ValidityConfig>,
    pub score: Option<ScoreConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusConfig {
    pub experts: Option<PathBuf>,
    #[serde(default = "default_scale")]
    pub scale_max: u32,
    #[serde(default)]
    pub uncorrected_ties: bool,
    #[serde(default)]
    pub rounds: Vec<RoundConfig>,
}

fn default_scale() -> u32 {
    DEFAULT_SCALE_MAX
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundConfig {
    pub round_no: u32,
    pub ratings: Option<PathBuf>,
    /// Questionnaires sent out; defaults to the rows in the ratings file.
    pub distributed: Option<usize>,
    /// The indicator list in force for this round; ratings columns must come from it.
    pub indicators: Option<PathBuf>,
    #[serde(default = "yes")]
    pub screen: bool,
    /// Fixed thresholds; derived from the round when absent.
    pub thresholds: Option<ScreeningThresholds>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default)]
    pub method: WeightMethod,
    #[serde(default)]
    pub matrices: Vec<PathBuf>,
    /// Round whose indicator means feed the importance weights; defaults to the last round.
    pub importance_round: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityConfig {
    pub responses: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidityConfig {
    pub importance: Option<PathBuf>,
    #[serde(default = "default_floor")]
    pub relevance_floor: u32,
}

fn default_floor() -> u32 {
    DEFAULT_RELEVANCE_FLOOR
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreConfig {
    /// Defaults to the reliability responses.
    pub responses: Option<PathBuf>,
    pub expert_bonus: Option<PathBuf>,
    /// Weight table (or a report holding one) used when the weights stage is not configured.
    pub weights: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub bonus_cap: f64,
}

fn default_cap() -> f64 {
    DEFAULT_BONUS_CAP
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<(PipelineConfig, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, base))
    }
}

/// Resolves a declared input, failing with a missing-input error when it is not declared or
/// does not exist.
fn input(base: &Path, declared: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    let rel = declared.ok_or_else(|| Error::MissingInput(name.to_string()))?;
    let path = base.join(rel);
    if !path.is_file() {
        return Err(Error::MissingInput(format!("{name} ({})", path.display())));
    }
    Ok(path)
}

/// Reads a weight table from either a bare table or a report holding one.
pub fn read_weight_table(path: &Path) -> Result<WeightTable> {
    if let Ok(table) = read_json::<WeightTable>(path) {
        if !table.nodes.is_empty() {
            return Ok(table);
        }
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bundle = parse_report_json(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bundle
        .weights
        .ok_or_else(|| Error::schema(path, "no weight table in file"))
}

pub fn run_pipeline(config_path: &Path) -> Result<ReportBundle> {
    let (config, base) = PipelineConfig::load(config_path)?;
    run_config(&config, &base)
}

pub fn run_config(config: &PipelineConfig, base: &Path) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::default();
    let instrument = load_default_instrument();

    if let Some(c) = &config.consensus {
        let stage = |e: Error| e.in_stage("round-stats");
        let experts = read_experts(&input(base, c.experts.as_ref(), "experts").map_err(stage)?)
            .map_err(stage)?;
        let options = ConsensusOptions {
            uncorrected_ties: c.uncorrected_ties,
            ..Default::default()
        };
        for r in &c.rounds {
            let known_ids = match &r.indicators {
                Some(p) => {
                    let tree = read_indicators(&base.join(p)).map_err(stage)?;
                    Some(
                        tree.nodes()
                            .iter()
                            .map(|n| n.id.clone())
                            .collect::<BTreeSet<_>>(),
                    )
                }
                None => None,
            };
            let name = format!("ratings for round {}", r.round_no);
            let ratings = parse_ratings(
                &input(base, r.ratings.as_ref(), &name).map_err(stage)?,
                &RatingsOptions {
                    round_no: r.round_no,
                    scale_max: c.scale_max,
                    distributed: r.distributed,
                    known_ids,
                },
            )
            .map_err(stage)?;
            bundle
                .rounds
                .push(round_consensus(&ratings, &experts, &options).map_err(stage)?);
        }
        for (r, stats) in c.rounds.iter().zip(&bundle.rounds) {
            if r.screen {
                bundle.screening.push(
                    screen_round(stats, r.thresholds.as_ref()).map_err(|e| e.in_stage("screen"))?,
                );
            }
        }
    }

    if let Some(w) = &config.weights {
        let stage = |e: Error| e.in_stage("weights");
        let tree =
            read_indicators(&input(base, config.indicators.as_ref(), "indicators").map_err(stage)?)
                .map_err(stage)?;
        let matrices = w
            .matrices
            .iter()
            .map(|m| read_pairwise(&base.join(m)))
            .collect::<Result<Vec<_>>>()
            .map_err(stage)?;
        let importance: BTreeMap<String, f64> = if w.method == WeightMethod::Ahp {
            BTreeMap::new()
        } else {
            let round = match w.importance_round {
                Some(k) => bundle.rounds.iter().find(|r| r.round_no == k),
                None => bundle.rounds.last(),
            }
            .ok_or_else(|| {
                stage(Error::MissingInput(
                    "round statistics for importance".into(),
                ))
            })?;
            round
                .indicators
                .iter()
                .map(|(id, s)| (id.clone(), s.mean))
                .collect()
        };
        bundle.weights =
            Some(compute_weights(&tree, &matrices, &importance, w.method).map_err(stage)?);
    }

    if let Some(r) = &config.reliability {
        let stage = |e: Error| e.in_stage("reliability");
        let path = input(base, r.responses.as_ref(), "responses").map_err(stage)?;
        let set = load_response_set(&path, None, &instrument).map_err(stage)?;
        bundle.reliability = Some(reliability_report(&set, &instrument).map_err(stage)?);
    }

    if let Some(v) = &config.validity {
        let stage = |e: Error| e.in_stage("validity");
        let path = input(base, v.importance.as_ref(), "importance").map_err(stage)?;
        let (items, matrix) = read_importance(&path).map_err(stage)?;
        bundle.validity = Some(validity_report(&items, &matrix, v.relevance_floor).map_err(stage)?);
    }

    if let Some(s) = &config.score {
        let stage = |e: Error| e.in_stage("score");
        let declared = s.responses.as_ref().or_else(|| {
            config
                .reliability
                .as_ref()
                .and_then(|r| r.responses.as_ref())
        });
        let responses = input(base, declared, "responses").map_err(stage)?;
        let bonus = match &s.expert_bonus {
            Some(_) => Some(input(base, s.expert_bonus.as_ref(), "expert_bonus").map_err(stage)?),
            None => None,
        };
        let set = load_response_set(&responses, bonus.as_deref(), &instrument).map_err(stage)?;
        let weights = match (&bundle.weights, &s.weights) {
            (_, Some(p)) => read_weight_table(&input(base, Some(p), "weights").map_err(stage)?)
                .map_err(stage)?,
            (Some(w), None) => w.clone(),
            (None, None) => return Err(stage(Error::MissingInput("weights".into()))),
        };
        bundle.scorecard =
            Some(score_software(&set, &instrument, &weights, s.bonus_cap).map_err(stage)?);
    }

    Ok(bundle)
}
