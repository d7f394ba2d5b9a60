//! Next-round consultation sheets.
//!
//! A form lists the indicators kept after screening, each with the previous round's mean and an
//! empty `rating` cell. Experts fill in the rating and the filled sheets are read back as a
//! [`RatingRound`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::consensus::RoundConsensus;
use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{ExpertRatings, RatingRound};
use crate::numeric::format_half_even;

pub const FORM_COLUMNS: [&str; 4] = ["indicator_id", "name", "prev_mean", "rating"];

/// Digits used for the carried-forward mean.
pub const PREV_MEAN_DIGITS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormRow {
    pub indicator_id: String,
    pub name: String,
    pub prev_mean: f64,
    pub rating: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundForm {
    pub round_no: u32,
    pub scale_max: u32,
    pub rows: Vec<FormRow>,
    pub instructions: String,
}

fn instructions(round_no: u32, scale_max: u32) -> String {
    format!(
        "Round {round_no}: rate the importance of each indicator from 1 (least) to {scale_max} \
         (most). prev_mean is the panel mean from round {}.",
        round_no - 1
    )
}

/// Builds the form for `round_no` from the previous round's statistics.
///
/// `names` supplies display names; ids without one fall back to the id itself.
pub fn build_round_form(
    prev: &RoundConsensus,
    names: &BTreeMap<String, String>,
    retained: &[String],
    round_no: u32,
) -> Result<RoundForm> {
    if round_no < 2 {
        return Err(Error::InvalidInput(format!(
            "round forms start at round 2, got {round_no}"
        )));
    }
    if retained.is_empty() {
        return Err(Error::InvalidInput(
            "no indicators retained for the next round".into(),
        ));
    }
    let mut ids: Vec<&String> = retained.iter().collect();
    ids.sort();
    ids.dedup();
    let mut rows = Vec::with_capacity(ids.len());
    for id in ids {
        let stats = prev.indicators.get(id).ok_or_else(|| {
            Error::InvalidInput(format!(
                "retained indicator {id:?} is not in round {}",
                prev.round_no
            ))
        })?;
        rows.push(FormRow {
            indicator_id: id.clone(),
            name: names.get(id).cloned().unwrap_or_else(|| id.clone()),
            prev_mean: stats.mean,
            rating: None,
        });
    }
    Ok(RoundForm {
        round_no,
        scale_max: prev.scale_max,
        rows,
        instructions: instructions(round_no, prev.scale_max),
    })
}

/// CSV text of the form. The instructions are not part of the CSV; they are printed separately.
pub fn form_to_csv(form: &RoundForm) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(FORM_COLUMNS).expect("in-memory write");
    for row in &form.rows {
        let rating = row.rating.map(|r| r.to_string()).unwrap_or_default();
        writer
            .write_record([
                row.indicator_id.as_str(),
                row.name.as_str(),
                &format_half_even(row.prev_mean, PREV_MEAN_DIGITS),
                &rating,
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Builds and renders the form in one step.
pub fn emit_round_form(
    prev: &RoundConsensus,
    names: &BTreeMap<String, String>,
    retained: &[String],
    round_no: u32,
) -> Result<String> {
    build_round_form(prev, names, retained, round_no).map(|f| form_to_csv(&f))
}

/// Reads one filled form per expert into a rating round.
///
/// Every form must list the same indicators. A form with any blank rating counts as a
/// non-response, the same rule the ratings matrix uses.
pub fn parse_filled_forms(
    forms: &[(String, PathBuf)],
    round_no: u32,
    scale_max: u32,
) -> Result<RatingRound> {
    let mut indicator_ids: Option<(Vec<String>, &Path)> = None;
    let mut rows = Vec::with_capacity(forms.len());
    for (expert_id, path) in forms {
        let table = Table::read(path)?;
        if table.headers != FORM_COLUMNS {
            return Err(Error::schema(
                path,
                format!("expected columns {}", FORM_COLUMNS.join(",")),
            ));
        }
        let ids: Vec<String> = table.rows.iter().map(|r| r[0].clone()).collect();
        match &indicator_ids {
            None => indicator_ids = Some((ids.clone(), path)),
            Some((first, first_path)) if *first != ids => {
                return Err(Error::schema(
                    path,
                    format!("indicator list differs from {}", first_path.display()),
                ));
            }
            Some(_) => {}
        }
        let mut ratings = Vec::with_capacity(ids.len());
        let mut complete = true;
        for (r, row) in table.rows.iter().enumerate() {
            let raw = &row[3];
            if raw.is_empty() {
                complete = false;
                continue;
            }
            let cell = |message: String| Error::Cell {
                file: path.clone(),
                row: table.rows[r][0].clone(),
                column: "rating".into(),
                message,
            };
            let v: u32 = raw
                .parse()
                .map_err(|e| cell(format!("cannot parse {raw:?}: {e}")))?;
            if !(1..=scale_max).contains(&v) {
                return Err(cell(format!("rating {v} outside 1..={scale_max}")));
            }
            ratings.push(v);
        }
        rows.push(ExpertRatings {
            expert_id: expert_id.clone(),
            ratings: complete.then_some(ratings),
        });
    }
    let (ids, _) = indicator_ids.ok_or_else(|| Error::InvalidInput("no forms supplied".into()))?;
    let distributed = rows.len();
    RatingRound::new(round_no, scale_max, distributed, ids, rows)
}
