//! CSV and JSON file formats.
//!
//! Every CSV is UTF-8 with a mandatory header row. Errors name the file and, for cell-level
//! problems, the row key (first column) and column header.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::ahp::PairwiseMatrix;
use crate::error::{Error, Result};
use crate::model::{
    BasisImpacts, ConsumerResponse, ExpertBonusRating, ExpertProfile, ExpertRatings, IndicatorNode,
    IndicatorTree, Instrument, RatingRound, ResponseSet, ANSWER_MAX,
};
use crate::psychometrics::IMPORTANCE_MAX;

pub const INDICATOR_COLUMNS: [&str; 5] = ["id", "name", "level", "parent_id", "bonus"];
pub const EXPERT_COLUMNS: [&str; 7] = [
    "id",
    "group",
    "familiarity",
    "basis_theory",
    "basis_practice",
    "basis_peer",
    "basis_intuition",
];

pub(crate) struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Table::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::schema(path, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.iter().all(String::is_empty) {
            return Err(Error::schema(path, "missing header row"));
        }
        let mut seen = BTreeSet::new();
        for h in &headers {
            if !seen.insert(h) {
                return Err(Error::schema(path, format!("duplicate column {h:?}")));
            }
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::schema(path, e.to_string()))?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::schema(&self.path, format!("missing column {name:?}")))
    }

    fn require_exact(&self, expected: &[&str]) -> Result<()> {
        for h in &self.headers {
            if !expected.contains(&h.as_str()) {
                return Err(Error::schema(&self.path, format!("unknown column {h:?}")));
            }
        }
        for e in expected {
            self.column(e)?;
        }
        Ok(())
    }

    fn cell_error(&self, row: usize, col: usize, message: impl Into<String>) -> Error {
        Error::Cell {
            file: self.path.clone(),
            row: self.rows[row]
                .first()
                .cloned()
                .unwrap_or_else(|| format!("#{}", row + 1)),
            column: self.headers[col].clone(),
            message: message.into(),
        }
    }

    fn parse_cell<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = &self.rows[row][col];
        raw.parse::<T>()
            .map_err(|e| self.cell_error(row, col, format!("cannot parse {raw:?}: {e}")))
    }

    fn row_keys_unique(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            if !seen.insert(&row[0]) {
                return Err(Error::schema(
                    &self.path,
                    format!("duplicate row id {:?}", row[0]),
                ));
            }
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Ok(true),
        "false" | "0" | "no" | "n" | "" => Ok(false),
        other => Err(format!("not a boolean: {other:?}")),
    }
}

/// `indicators.csv`: `id,name,level,parent_id,bonus`, with an optional `local_weight` column.
pub fn read_indicators(path: &Path) -> Result<IndicatorTree> {
    let table = Table::read(path)?;
    let weight_col = table.headers.iter().position(|h| h == "local_weight");
    let mut expected: Vec<&str> = INDICATOR_COLUMNS.to_vec();
    if weight_col.is_some() {
        expected.push("local_weight");
    }
    table.require_exact(&expected)?;
    let [id, name, level, parent, bonus] = INDICATOR_COLUMNS.map(|c| table.column(c).unwrap());
    table.row_keys_unique()?;
    let mut nodes = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let parent_id = Some(row[parent].clone()).filter(|p| !p.is_empty());
        let mut node = IndicatorNode::new(
            &row[id],
            &row[name],
            table.parse_cell(r, level)?,
            parent_id.as_deref(),
        );
        node.bonus = parse_bool(&row[bonus]).map_err(|e| table.cell_error(r, bonus, e))?;
        if let Some(c) = weight_col {
            if !row[c].is_empty() {
                node.local_weight = Some(table.parse_cell(r, c)?);
            }
        }
        nodes.push(node);
    }
    Ok(IndicatorTree::new(nodes))
}

/// `experts.csv`: `id,group,familiarity,basis_theory,basis_practice,basis_peer,basis_intuition`.
pub fn read_experts(path: &Path) -> Result<Vec<ExpertProfile>> {
    let table = Table::read(path)?;
    table.require_exact(&EXPERT_COLUMNS)?;
    let cols = EXPERT_COLUMNS.map(|c| table.column(c).unwrap());
    table.row_keys_unique()?;
    let mut out = Vec::new();
    for r in 0..table.rows.len() {
        out.push(ExpertProfile {
            id: table.rows[r][cols[0]].clone(),
            group: table.parse_cell(r, cols[1])?,
            familiarity: table.parse_cell(r, cols[2])?,
            basis: BasisImpacts {
                theory: table.parse_cell(r, cols[3])?,
                practice: table.parse_cell(r, cols[4])?,
                peer: table.parse_cell(r, cols[5])?,
                intuition: table.parse_cell(r, cols[6])?,
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct RatingsOptions {
    pub round_no: u32,
    pub scale_max: u32,
    /// Questionnaires sent out; defaults to the number of rows in the file.
    pub distributed: Option<usize>,
    /// When set, every indicator column must be one of these ids.
    pub known_ids: Option<BTreeSet<String>>,
}

/// `ratings_roundK.csv`: `expert_id` then one column per indicator id. A row with any blank cell
/// is a non-response.
pub fn parse_ratings(path: &Path, options: &RatingsOptions) -> Result<RatingRound> {
    let table = Table::read(path)?;
    parse_ratings_table(&table, options)
}

fn parse_ratings_table(table: &Table, options: &RatingsOptions) -> Result<RatingRound> {
    if table.headers.first().map(String::as_str) != Some("expert_id") {
        return Err(Error::schema(
            &table.path,
            "first column must be \"expert_id\"",
        ));
    }
    let indicator_ids: Vec<String> = table.headers[1..].to_vec();
    if indicator_ids.is_empty() {
        return Err(Error::schema(&table.path, "no indicator columns"));
    }
    if let Some(known) = &options.known_ids {
        if let Some(unknown) = indicator_ids.iter().find(|id| !known.contains(*id)) {
            return Err(Error::schema(
                &table.path,
                format!("unknown indicator column {unknown:?}"),
            ));
        }
    }
    table.row_keys_unique()?;

    let mut rows = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let ratings = if row[1..].iter().any(String::is_empty) {
            None
        } else {
            let mut values = Vec::with_capacity(indicator_ids.len());
            for c in 1..row.len() {
                let v: u32 = table.parse_cell(r, c)?;
                if !(1..=options.scale_max).contains(&v) {
                    return Err(table.cell_error(
                        r,
                        c,
                        format!("rating {v} outside 1..={}", options.scale_max),
                    ));
                }
                values.push(v);
            }
            Some(values)
        };
        rows.push(ExpertRatings {
            expert_id: row[0].clone(),
            ratings,
        });
    }
    let distributed = options.distributed.unwrap_or(rows.len());
    RatingRound::new(
        options.round_no,
        options.scale_max,
        distributed,
        indicator_ids,
        rows,
    )
    .map_err(|e| Error::schema(&table.path, e.to_string()))
}

/// Fills `set.consumers` from `responses.csv`: `respondent_id` then one column per question id.
/// Blank cells are missing answers.
pub fn read_responses(path: &Path, instrument: &Instrument) -> Result<ResponseSet> {
    let table = Table::read(path)?;
    let mut expected = vec!["respondent_id"];
    expected.extend(instrument.question_ids());
    if table.headers.first().map(String::as_str) != Some("respondent_id") {
        return Err(Error::schema(
            path,
            "first column must be \"respondent_id\"",
        ));
    }
    table.require_exact(&expected)?;
    table.row_keys_unique()?;
    let cols: Vec<usize> = instrument
        .question_ids()
        .iter()
        .map(|q| table.column(q))
        .collect::<Result<_>>()?;
    let mut consumers = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let mut answers = Vec::with_capacity(cols.len());
        for &c in &cols {
            if row[c].is_empty() {
                answers.push(None);
                continue;
            }
            let v: u8 = table.parse_cell(r, c)?;
            if v > ANSWER_MAX {
                return Err(table.cell_error(r, c, format!("answer {v} outside 0..={ANSWER_MAX}")));
            }
            answers.push(Some(v));
        }
        consumers.push(ConsumerResponse {
            respondent_id: row[0].clone(),
            answers,
        });
    }
    ResponseSet::new(
        instrument
            .question_ids()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        consumers,
        instrument
            .bonus_indicators
            .iter()
            .map(|b| b.id.clone())
            .collect(),
        Vec::new(),
    )
}

/// `expert_bonus.csv`: `expert_id` then one column per bonus indicator. Columns may use the
/// full id (`bonus.compliance`), its last segment (`compliance`) or the indicator name.
pub fn read_expert_bonus(path: &Path, instrument: &Instrument) -> Result<Vec<ExpertBonusRating>> {
    let table = Table::read(path)?;
    if table.headers.first().map(String::as_str) != Some("expert_id") {
        return Err(Error::schema(path, "first column must be \"expert_id\""));
    }
    let matches = |header: &str, id: &str, name: &str| {
        let h = header.to_ascii_lowercase();
        h == id || Some(h.as_str()) == id.rsplit('.').next() || h == name.to_ascii_lowercase()
    };
    for h in &table.headers[1..] {
        if !instrument
            .bonus_indicators
            .iter()
            .any(|b| matches(h, &b.id, &b.name))
        {
            return Err(Error::schema(path, format!("unknown bonus column {h:?}")));
        }
    }
    let cols: Vec<usize> = instrument
        .bonus_indicators
        .iter()
        .map(|b| {
            table
                .headers
                .iter()
                .position(|h| matches(h, &b.id, &b.name))
                .ok_or_else(|| Error::schema(path, format!("missing column for {}", b.id)))
        })
        .collect::<Result<_>>()?;
    table.row_keys_unique()?;
    let mut out = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let mut ratings = Vec::with_capacity(cols.len());
        for &c in &cols {
            let v: u8 = table.parse_cell(r, c)?;
            if v > ANSWER_MAX {
                return Err(table.cell_error(r, c, format!("rating {v} outside 0..={ANSWER_MAX}")));
            }
            ratings.push(v);
        }
        out.push(ExpertBonusRating {
            expert_id: row[0].clone(),
            ratings,
        });
    }
    Ok(out)
}

/// Consumer answers plus optional expert bonus ratings.
pub fn load_response_set(
    responses: &Path,
    bonus: Option<&Path>,
    instrument: &Instrument,
) -> Result<ResponseSet> {
    let mut set = read_responses(responses, instrument)?;
    if let Some(b) = bonus {
        set.expert_bonus = read_expert_bonus(b, instrument)?;
    }
    Ok(set)
}

/// Parses a judgment such as `3`, `0.5` or `1/3`.
pub fn parse_judgment(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            num / den
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    Ok(value)
}

/// Square pairwise table: a header row of ids (first cell is a label and ignored), then one row
/// per id in the same order.
pub fn read_pairwise(path: &Path) -> Result<PairwiseMatrix> {
    let table = Table::read(path)?;
    let ids: Vec<String> = table.headers[1..].to_vec();
    if ids.is_empty() {
        return Err(Error::schema(path, "no indicator columns"));
    }
    if table.rows.len() != ids.len() {
        return Err(Error::schema(
            path,
            format!("{} rows for {} columns", table.rows.len(), ids.len()),
        ));
    }
    let mut entries = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row[0] != ids[r] {
            return Err(Error::schema(
                path,
                format!("row {} is {:?}, expected {:?}", r + 1, row[0], ids[r]),
            ));
        }
        let mut values = Vec::new();
        for (c, cell) in row.iter().enumerate().skip(1) {
            values.push(parse_judgment(cell).map_err(|e| table.cell_error(r, c, e))?);
        }
        entries.push(values);
    }
    PairwiseMatrix::new(ids, entries).map_err(|e| Error::schema(path, e.to_string()))
}

/// Importance ratings for content validity: `rater_id` then one column per item, values 1–7.
pub fn read_importance(path: &Path) -> Result<(Vec<String>, Vec<Vec<u32>>)> {
    let table = Table::read(path)?;
    if table.headers.first().map(String::as_str) != Some("rater_id") {
        return Err(Error::schema(path, "first column must be \"rater_id\""));
    }
    table.row_keys_unique()?;
    let items = table.headers[1..].to_vec();
    let mut matrix = Vec::new();
    for (r, row) in table.rows.iter().enumerate() {
        let mut values = Vec::new();
        for (c, cell) in row.iter().enumerate().skip(1) {
            if cell.is_empty() {
                return Err(table.cell_error(r, c, "missing rating"));
            }
            let v: u32 = table.parse_cell(r, c)?;
            if !(1..=IMPORTANCE_MAX).contains(&v) {
                return Err(table.cell_error(
                    r,
                    c,
                    format!("rating {v} outside 1..={IMPORTANCE_MAX}"),
                ));
            }
            values.push(v);
        }
        matrix.push(values);
    }
    Ok((items, matrix))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Names by id, for labelling forms and reports.
pub fn names_by_id(tree: &IndicatorTree) -> BTreeMap<String, String> {
    tree.nodes()
        .iter()
        .map(|n| (n.id.clone(), n.name.clone()))
        .collect()
}
