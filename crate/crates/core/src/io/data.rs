//! Historical trial tables.
//!
//! Header: `trial_id,n,y,<covariate columns...>[,is_new]`. Lines starting
//! with `#` are comments. A row with `is_new=1` carries the new trial's
//! covariates; its `n` and `y` may be left empty when the outcome is unknown.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, NewTrial, Outcome, Standardization, TrialSummary};

/// The bundled adalimumab case-study table.
pub const CASE_STUDY_CSV: &str = include_str!("../../fixtures/case_study.csv");
pub const CASE_STUDY_NAME: &str = "case_study.csv";

/// Parsed table on the raw covariate scale; covariate vectors carry a leading intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalTable {
    pub covariate_names: Vec<String>,
    pub trials: Vec<TrialSummary>,
    pub new_trial: Option<NewTrial>,
}

impl HistoricalTable {
    /// Standardized data set with `new_trial` (raw scale) as the trial being analysed.
    ///
    /// Falls back to the table's own `is_new` row when `new_trial` is `None`.
    pub fn dataset(&self, new_trial: Option<NewTrial>) -> Result<(Dataset, Standardization)> {
        let new_trial = new_trial
            .or_else(|| self.new_trial.clone())
            .ok_or_else(|| Error::InvalidDataset("no new trial given and the table has no is_new row".into()))?;
        let raw = Dataset::new(self.trials.clone(), new_trial)?;
        Ok(raw.standardized())
    }

    /// Raw new-trial covariates (with intercept) from values keyed by column name.
    pub fn covariates_from(&self, values: &[(String, f64)]) -> Result<Vec<f64>> {
        let mut x = vec![1.0];
        for name in &self.covariate_names {
            let v = values
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::InvalidConfig(format!("new trial is missing covariate '{name}'")))?;
            x.push(v);
        }
        if let Some((k, _)) = values.iter().find(|(k, _)| !self.covariate_names.contains(k)) {
            return Err(Error::InvalidConfig(format!("unknown covariate '{k}' for the new trial")));
        }
        Ok(x)
    }
}

pub fn load_historical_csv(path: &Path) -> Result<HistoricalTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_historical_csv(&text, &path.display().to_string())
}

pub fn case_study() -> HistoricalTable {
    parse_historical_csv(CASE_STUDY_CSV, CASE_STUDY_NAME).expect("bundled fixture parses")
}

pub fn parse_historical_csv(text: &str, source: &str) -> Result<HistoricalTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header_err = |m: String| Error::DataRow {
        path: source.to_string(),
        row: 1,
        message: m,
    };
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| header_err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 3 || headers[0] != "trial_id" || headers[1] != "n" || headers[2] != "y" {
        return Err(header_err(format!(
            "header must start with trial_id,n,y, got {}",
            headers.join(",")
        )));
    }
    let has_flag = headers.last().map(String::as_str) == Some("is_new");
    let cov_end = if has_flag { headers.len() - 1 } else { headers.len() };
    let covariate_names = headers[3..cov_end].to_vec();
    if let Some(dup) = covariate_names
        .iter()
        .enumerate()
        .find(|(i, c)| covariate_names[..*i].contains(c))
    {
        return Err(header_err(format!("duplicate column '{}'", dup.1)));
    }

    let mut trials = Vec::new();
    let mut new_trial = None;
    for record in reader.records() {
        let record = record.map_err(|e| header_err(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |m: String| Error::DataRow {
            path: source.to_string(),
            row: line,
            message: m,
        };
        if record.len() != headers.len() {
            return Err(fail(format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(fail("missing trial_id".into()));
        }
        let is_new = has_flag
            && match &record[headers.len() - 1] {
                "" | "0" => false,
                "1" => true,
                other => return Err(fail(format!("is_new must be 0 or 1, got '{other}'"))),
            };
        let mut x = vec![1.0];
        for (j, name) in covariate_names.iter().enumerate() {
            let raw = &record[3 + j];
            if raw.is_empty() {
                return Err(fail(format!("missing value for '{name}'")));
            }
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| fail(format!("non-numeric value '{raw}' for '{name}'")))?;
            x.push(v);
        }
        let count = |k: usize, name: &str| -> Result<Option<u32>> {
            let raw = &record[k];
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse()
                .map(Some)
                .map_err(|_| fail(format!("'{name}' must be a non-negative integer, got '{raw}'")))
        };
        let n = count(1, "n")?;
        let y = count(2, "y")?;
        if is_new {
            if new_trial.is_some() {
                return Err(fail("more than one row flagged is_new".into()));
            }
            let outcome = match (y, n) {
                (Some(y), Some(n)) => Some(Outcome::new(y, n).map_err(|_| fail(bounds(y, n)))?),
                (None, None) => None,
                _ => return Err(fail("new trial needs both n and y, or neither".into())),
            };
            new_trial = Some(NewTrial { id, x, outcome });
            continue;
        }
        let (n, y) = match (n, y) {
            (Some(n), Some(y)) => (n, y),
            (None, _) => return Err(fail("missing value for 'n'".into())),
            (_, None) => return Err(fail("missing value for 'y'".into())),
        };
        if n == 0 || y > n {
            return Err(fail(bounds(y, n)));
        }
        trials.push(TrialSummary::new(id, n, y, x).map_err(|e| fail(e.to_string()))?);
    }
    if trials.is_empty() {
        return Err(header_err("no historical trials".into()));
    }
    Ok(HistoricalTable {
        covariate_names,
        trials,
        new_trial,
    })
}

fn bounds(y: u32, n: u32) -> String {
    format!("responders out of bounds: need 0 <= y <= n and n >= 1, got y = {y}, n = {n}")
}
