//! Report bundle and its JSON / Markdown renderings.
//!
//! The bundle itself serializes at full precision. [`emit_report`] turns every floating-point
//! figure into a `{"value", "display"}` pair in JSON, or a rounded table cell in Markdown. Both
//! go through [`Precision::show`], so the two formats never disagree on a displayed digit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ahp::WeightTable;
use crate::consensus::{RoundConsensus, RoundScreening};
use crate::error::{Error, Result};
use crate::numeric::format_half_even;
use crate::psychometrics::{ReliabilityTable, Statistic, ValidityTable};
use crate::scoring::ScoreCard;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportBundle {
    #[serde(default)]
    pub rounds: Vec<RoundConsensus>,
    #[serde(default)]
    pub screening: Vec<RoundScreening>,
    #[serde(default)]
    pub weights: Option<WeightTable>,
    #[serde(default)]
    pub reliability: Option<ReliabilityTable>,
    #[serde(default)]
    pub validity: Option<ValidityTable>,
    #[serde(default)]
    pub scorecard: Option<ScoreCard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidInput(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

/// How a figure is displayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Coefficients, weights and other unit-interval statistics.
    Coefficient,
    /// Means, CVI values and scores.
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub coefficient: usize,
    pub short: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            coefficient: 4,
            short: 2,
        }
    }
}

impl Precision {
    /// Same number of decimals for every figure.
    pub fn uniform(digits: usize) -> Self {
        Precision {
            coefficient: digits,
            short: digits,
        }
    }

    pub fn show(&self, kind: Kind, value: f64) -> String {
        match kind {
            Kind::Coefficient => format_half_even(value, self.coefficient),
            Kind::Short => format_half_even(value, self.short),
        }
    }
}

const SHORT_SECTIONS: [&str; 2] = ["validity", "scorecard"];
const SHORT_KEYS: [&str; 5] = ["mean", "sd", "full_score_freq", "mean_floor", "fsf_floor"];

/// Display kind of a JSON figure from its location in the bundle.
fn kind_at(path: &[&str]) -> Kind {
    let in_short_section = path.first().is_some_and(|s| SHORT_SECTIONS.contains(s));
    let short_key = path
        .iter()
        .rev()
        .find(|k| k.parse::<usize>().is_err() && **k != "value")
        .is_some_and(|k| SHORT_KEYS.contains(k));
    if in_short_section || short_key {
        Kind::Short
    } else {
        Kind::Coefficient
    }
}

fn annotate(value: &mut Value, path: &mut Vec<String>, precision: &Precision) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let keys: Vec<&str> = path.iter().map(String::as_str).collect();
            let mut pair = Map::new();
            pair.insert("value".into(), Value::Number(n.clone()));
            pair.insert(
                "display".into(),
                Value::String(precision.show(kind_at(&keys), x)),
            );
            *value = Value::Object(pair);
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                path.push(i.to_string());
                annotate(item, path, precision);
                path.pop();
            }
        }
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                path.push(k.clone());
                annotate(v, path, precision);
                path.pop();
            }
        }
        _ => {}
    }
}

/// Inverse of the JSON annotation: collapses `{"value", "display"}` pairs back to numbers.
fn strip(value: &mut Value) {
    match value {
        Value::Object(map) => {
            let is_pair = map.len() == 2
                && map.get("display").is_some_and(Value::is_string)
                && map.get("value").is_some_and(Value::is_number);
            if is_pair {
                *value = map.remove("value").expect("checked");
            } else {
                map.values_mut().for_each(strip);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}

/// Annotated JSON value of a bundle.
pub fn report_json(bundle: &ReportBundle, precision: &Precision) -> Value {
    let mut value = serde_json::to_value(bundle).expect("bundle serializes");
    annotate(&mut value, &mut Vec::new(), precision);
    value
}

/// Reads either a plain bundle or an emitted JSON report. Missing sections stay empty.
pub fn parse_report_json(text: &str) -> std::result::Result<ReportBundle, serde_json::Error> {
    let mut value: Value = serde_json::from_str(text)?;
    strip(&mut value);
    serde_json::from_value(value)
}

pub fn emit_report(bundle: &ReportBundle, format: ReportFormat, precision: &Precision) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report_json(bundle, precision))
                .expect("value serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(bundle, precision),
    }
}

struct Md<'a> {
    out: String,
    p: &'a Precision,
}

impl Md<'_> {
    fn heading(&mut self, level: usize, text: &str) {
        if !self.out.is_empty() && !self.out.ends_with("\n\n") {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "{} {text}\n", "#".repeat(level));
    }

    fn line(&mut self, text: &str) {
        let _ = writeln!(self.out, "{text}");
    }

    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) {
        let _ = writeln!(self.out, "| {} |", header.join(" | "));
        let _ = writeln!(
            self.out,
            "|{}|",
            header.iter().map(|_| "---").collect::<Vec<_>>().join("|")
        );
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
            let _ = writeln!(self.out, "| {} |", cells.join(" | "));
        }
    }

    fn c(&self, x: f64) -> String {
        self.p.show(Kind::Coefficient, x)
    }

    fn s(&self, x: f64) -> String {
        self.p.show(Kind::Short, x)
    }

    fn stat(&self, s: &Statistic, kind: Kind) -> String {
        match s {
            Statistic::Value { value } => self.p.show(kind, *value),
            Statistic::NotApplicable => "-".into(),
            Statistic::Undefined { .. } => "undefined".into(),
        }
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn markdown(bundle: &ReportBundle, precision: &Precision) -> String {
    let mut md = Md {
        out: String::new(),
        p: precision,
    };

    if !bundle.rounds.is_empty() || !bundle.screening.is_empty() {
        md.heading(2, "Consultation rounds");
        let rows: Vec<Vec<String>> = bundle
            .rounds
            .iter()
            .map(|r| {
                vec![
                    r.round_no.to_string(),
                    format!("{}/{}", r.returned, r.distributed),
                    md.c(r.positivity),
                    md.c(r.ca),
                    md.c(r.cs),
                    md.c(r.cr),
                    md.c(r.kendall_w),
                ]
            })
            .collect();
        md.table(
            &[
                "Round",
                "Returned",
                "Positivity",
                "Ca",
                "Cs",
                "Cr",
                "Kendall's W",
            ],
            &rows,
        );

        for r in &bundle.rounds {
            md.heading(3, &format!("Round {} indicators", r.round_no));
            let rows: Vec<Vec<String>> = r
                .indicators
                .iter()
                .map(|(id, s)| {
                    vec![
                        id.clone(),
                        md.s(s.mean),
                        md.s(s.sd),
                        md.c(s.cv),
                        md.s(s.full_score_freq),
                    ]
                })
                .collect();
            md.table(
                &["Indicator", "Mean", "SD", "CV", "Full-score freq."],
                &rows,
            );
        }

        md.heading(2, "Screening");
        if bundle.screening.is_empty() {
            md.line("No screening verdicts.");
        }
        for s in &bundle.screening {
            md.heading(3, &format!("Round {} screening", s.round_no));
            md.line(&format!(
                "Thresholds: mean >= {}, full-score freq. >= {}, CV <= {}",
                md.s(s.thresholds.mean_floor),
                md.s(s.thresholds.fsf_floor),
                md.c(s.thresholds.cv_ceiling)
            ));
            md.line("");
            md.line(&format!(
                "Retained ({}): {}",
                s.retained.len(),
                s.retained.join(", ")
            ));
            md.line("");
            let rows: Vec<Vec<String>> = s
                .dropped
                .iter()
                .map(|d| {
                    let reasons: Vec<&str> = d.reasons.iter().map(|c| c.as_str()).collect();
                    vec![d.id.clone(), reasons.join(", ")]
                })
                .collect();
            md.table(&["Dropped", "Failed criteria"], &rows);
        }
    }

    if let Some(w) = &bundle.weights {
        md.heading(2, "Weights");
        if let Some(m) = w.method {
            md.line(&format!("Method: {m}"));
            md.line("");
        }
        let rows: Vec<Vec<String>> = w
            .nodes
            .iter()
            .map(|(id, n)| {
                vec![
                    id.clone(),
                    n.level.as_str().to_string(),
                    yes_no(n.bonus),
                    md.c(n.local),
                    md.c(n.global),
                ]
            })
            .collect();
        md.table(
            &[
                "Indicator",
                "Level",
                "Bonus",
                "Local weight",
                "Global weight",
            ],
            &rows,
        );
        if !w.matrices.is_empty() {
            md.heading(3, "Pairwise consistency");
            let rows: Vec<Vec<String>> = w
                .matrices
                .iter()
                .map(|(group, m)| {
                    vec![
                        group.clone(),
                        m.ids.len().to_string(),
                        md.c(m.lambda_max),
                        md.c(m.ci),
                        md.c(m.cr),
                        yes_no(m.acceptable),
                    ]
                })
                .collect();
            md.table(
                &["Group", "n", "lambda max", "CI", "CR", "Acceptable"],
                &rows,
            );
        }
    }

    if let Some(r) = &bundle.reliability {
        md.heading(2, "Internal reliability");
        md.line(&format!(
            "Respondents used: {}, excluded for missing answers: {}",
            r.respondents_used, r.respondents_excluded
        ));
        md.line("");
        let mut rows = Vec::new();
        for index in &r.indices {
            for (k, q) in index.questions.iter().enumerate() {
                let (name, alpha) = if k == 0 {
                    (index.name.clone(), md.stat(&index.alpha, Kind::Coefficient))
                } else {
                    (String::new(), String::new())
                };
                let mut id = q.question_id.clone();
                if q.flagged {
                    id.push_str(" *");
                }
                rows.push(vec![
                    name,
                    alpha,
                    id,
                    md.stat(&q.citc, Kind::Coefficient),
                    md.stat(&q.alpha_if_deleted, Kind::Coefficient),
                ]);
            }
        }
        rows.push(vec![
            "Total".into(),
            md.stat(&r.total_alpha, Kind::Coefficient),
            String::new(),
            "Alpha after deleting flagged questions".into(),
            md.stat(&r.total_alpha_after_deletion, Kind::Coefficient),
        ]);
        md.table(
            &[
                "Index",
                "Alpha",
                "Question",
                "Corrected item-total r",
                "Alpha if deleted",
            ],
            &rows,
        );
        if !r.flagged_questions.is_empty() {
            md.line("");
            md.line(&format!("* flagged: {}", r.flagged_questions.join(", ")));
        }
    }

    if let Some(v) = &bundle.validity {
        md.heading(2, "Content validity");
        md.line(&format!(
            "Raters: {}, relevance floor: {}",
            v.raters, v.relevance_floor
        ));
        md.line("");
        let mut rows: Vec<Vec<String>> = v
            .items
            .iter()
            .map(|i| {
                vec![
                    i.item_id.clone(),
                    md.s(i.mean_importance),
                    md.s(i.i_cvi),
                    yes_no(i.passes),
                ]
            })
            .collect();
        rows.push(vec![
            "Total".into(),
            "S-CVI".into(),
            md.s(v.s_cvi),
            yes_no(v.s_cvi_passes),
        ]);
        md.table(&["Item", "Importance", "I-CVI", "Passes"], &rows);
    }

    if let Some(s) = &bundle.scorecard {
        md.heading(2, "Scores");
        let rows: Vec<Vec<String>> = s
            .dimension_scores
            .iter()
            .map(|(id, score)| {
                let w = s.dimension_weights.get(id).copied().unwrap_or(f64::NAN);
                vec![id.clone(), md.s(w), md.s(*score)]
            })
            .collect();
        md.table(&["Dimension", "Weight", "Score"], &rows);
        md.line("");
        md.table(
            &["Core", "Bonus", "Bonus cap", "Final", "Final (0-100)"],
            &[vec![
                md.s(s.core_score),
                md.s(s.bonus),
                md.s(s.bonus_cap),
                md.s(s.final_score),
                md.s(s.final_renormalized),
            ]],
        );
        md.line("");
        md.line(&format!(
            "Respondents: {} ({} with imputed answers), experts: {}",
            s.respondent_count, s.imputed_respondents, s.expert_count
        ));
    }
    md.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::IndicatorStats;

    fn round(cr: f64) -> RoundConsensus {
        RoundConsensus {
            round_no: 1,
            scale_max: 5,
            distributed: 25,
            returned: 25,
            positivity: 1.0,
            ca: 0.8864,
            cs: 0.8651,
            cr,
            kendall_w: 0.135,
            tie_corrected: true,
            indicators: [(
                "ux".to_string(),
                IndicatorStats {
                    mean: 4.125,
                    sd: 0.5,
                    cv: 0.12121,
                    full_score_freq: 0.4,
                    n: 25,
                },
            )]
            .into(),
        }
    }

    #[test]
    fn json_pairs_value_and_display() {
        let bundle = ReportBundle {
            rounds: vec![round(0.87575)],
            ..Default::default()
        };
        let v = report_json(&bundle, &Precision::default());
        let cr = &v["rounds"][0]["cr"];
        assert_eq!(cr["value"].as_f64(), Some(0.87575));
        assert_eq!(cr["display"], format_half_even(0.87575, 4));
        assert_eq!(
            v["rounds"][0]["indicators"]["ux"]["mean"]["display"],
            "4.12"
        );
        assert_eq!(
            v["rounds"][0]["indicators"]["ux"]["cv"]["display"],
            "0.1212"
        );
        assert_eq!(v["rounds"][0]["returned"], 25);
    }

    #[test]
    fn empty_sections_keep_their_shape() {
        let v = report_json(&ReportBundle::default(), &Precision::default());
        assert_eq!(v["screening"], Value::Array(vec![]));
        assert_eq!(v["rounds"], Value::Array(vec![]));
        assert!(v["reliability"].is_null());
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "rounds",
                "screening",
                "weights",
                "reliability",
                "validity",
                "scorecard"
            ]
        );
    }

    #[test]
    fn json_report_parses_back() {
        let bundle = ReportBundle {
            rounds: vec![round(0.87575), round(0.884)],
            ..Default::default()
        };
        let text = emit_report(&bundle, ReportFormat::Json, &Precision::default());
        assert_eq!(parse_report_json(&text).unwrap(), bundle);
        let plain = serde_json::to_string(&bundle).unwrap();
        assert_eq!(parse_report_json(&plain).unwrap(), bundle);
    }

    #[test]
    fn markdown_shows_the_json_display_strings() {
        let bundle = ReportBundle {
            rounds: vec![round(0.87575)],
            ..Default::default()
        };
        let p = Precision::default();
        let md = emit_report(&bundle, ReportFormat::Markdown, &p);
        let json = report_json(&bundle, &p);
        let r = &json["rounds"][0];
        for key in ["positivity", "ca", "cs", "cr", "kendall_w"] {
            let shown = r[key]["display"].as_str().unwrap();
            assert!(md.contains(&format!("| {shown} |")), "{key} {shown}\n{md}");
        }
        assert!(md.contains("| ux | 4.12 | 0.50 | 0.1212 | 0.40 |"), "{md}");
        assert!(md.contains("No screening verdicts."));
    }

    #[test]
    fn precision_override() {
        let bundle = ReportBundle {
            rounds: vec![round(0.87575)],
            ..Default::default()
        };
        let v = report_json(&bundle, &Precision::uniform(3));
        assert_eq!(v["rounds"][0]["cr"]["display"], "0.876");
        assert_eq!(
            v["rounds"][0]["indicators"]["ux"]["mean"]["display"],
            "4.125"
        );
    }
}
