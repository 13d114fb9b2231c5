use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which CSV columns play which role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSchema {
    pub treatment_col: String,
    pub outcome_col: String,
    #[serde(default)]
    pub id_col: Option<String>,
    /// Columns one-hot encoded instead of parsed as numbers.
    #[serde(default)]
    pub categorical: Vec<String>,
    /// Columns dropped entirely.
    #[serde(default)]
    pub ignore: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl CampaignSchema {
    pub fn new(treatment_col: impl Into<String>, outcome_col: impl Into<String>) -> Self {
        CampaignSchema {
            treatment_col: treatment_col.into(),
            outcome_col: outcome_col.into(),
            id_col: None,
            categorical: Vec::new(),
            ignore: Vec::new(),
            delimiter: ',',
        }
    }
}

/// Rows of `(features, treatment, outcome)` with stable row ids.
///
/// Features are stored row-major; a missing numeric value is `NaN` and is
/// imputed later from the training portion only.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignDataset {
    ids: Vec<String>,
    features: Vec<f64>,
    width: usize,
    treatment: Vec<bool>,
    outcome: Vec<bool>,
    feature_names: Vec<String>,
    categorical_levels: BTreeMap<String, Vec<String>>,
}

/// Number of rows in each `(treatment, outcome)` cell, indexed `[t][y]`.
pub type CellCounts = [[usize; 2]; 2];

impl CampaignDataset {
    pub fn new(
        ids: Vec<String>,
        features: Vec<f64>,
        feature_names: Vec<String>,
        treatment: Vec<bool>,
        outcome: Vec<bool>,
    ) -> Result<Self> {
        let n = ids.len();
        let width = feature_names.len();
        if treatment.len() != n || outcome.len() != n || features.len() != n * width {
            return Err(Error::InvalidParameter(format!(
                "inconsistent dataset shape: {n} ids, {} treatments, {} outcomes, {} feature values for width {width}",
                treatment.len(),
                outcome.len(),
                features.len()
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::data(format!("row id '{id}'"), "duplicate row id"));
            }
        }
        Ok(CampaignDataset {
            ids,
            features,
            width,
            treatment,
            outcome,
            feature_names,
            categorical_levels: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.width..(i + 1) * self.width]
    }

    pub fn treatment(&self, i: usize) -> bool {
        self.treatment[i]
    }

    pub fn outcome(&self, i: usize) -> bool {
        self.outcome[i]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn categorical_levels(&self) -> &BTreeMap<String, Vec<String>> {
        &self.categorical_levels
    }

    pub fn control_fraction(&self) -> f64 {
        self.treatment.iter().filter(|t| !**t).count() as f64 / self.len() as f64
    }

    pub fn cell_counts(&self, rows: &[usize]) -> CellCounts {
        let mut c = [[0usize; 2]; 2];
        for &i in rows {
            c[self.treatment[i] as usize][self.outcome[i] as usize] += 1;
        }
        c
    }

    /// Fails unless every `(treatment, outcome)` cell has at least one row.
    pub fn check_occupancy(&self, rows: &[usize], context: &str) -> Result<()> {
        let c = self.cell_counts(rows);
        for (t, row) in c.iter().enumerate() {
            for (y, &count) in row.iter().enumerate() {
                if count == 0 {
                    return Err(Error::Occupancy {
                        context: context.to_string(),
                        treatment: t as u8,
                        outcome: y as u8,
                    });
                }
            }
        }
        Ok(())
    }

    /// New dataset with rows in the order given by `rows`.
    pub fn select(&self, rows: &[usize]) -> CampaignDataset {
        let mut features = Vec::with_capacity(rows.len() * self.width);
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        CampaignDataset {
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            features,
            width: self.width,
            treatment: rows.iter().map(|&i| self.treatment[i]).collect(),
            outcome: rows.iter().map(|&i| self.outcome[i]).collect(),
            feature_names: self.feature_names.clone(),
            categorical_levels: self.categorical_levels.clone(),
        }
    }
}

fn parse_binary(raw: &str) -> Option<bool> {
    match raw.trim() {
        "0" | "0.0" | "false" | "FALSE" | "False" => Some(false),
        "1" | "1.0" | "true" | "TRUE" | "True" => Some(true),
        _ => None,
    }
}

fn is_missing(raw: &str) -> bool {
    matches!(raw.trim(), "" | "NA" | "NaN" | "nan" | "null" | "NULL")
}

const MISSING_LEVEL: &str = "(missing)";

enum Role {
    Id,
    Treatment,
    Outcome,
    Numeric,
    Categorical,
    Ignored,
}

/// Parses a campaign CSV from any reader.
pub fn read_campaign_csv<R: Read>(reader: R, schema: &CampaignSchema) -> Result<CampaignDataset> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::InvalidParameter(format!(
            "delimiter '{}' is not a single byte",
            schema.delimiter
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let position = |name: &str| header.iter().position(|h| h == name);
    let mut named: Vec<&str> = vec![&schema.treatment_col, &schema.outcome_col];
    named.extend(schema.id_col.as_deref());
    named.extend(schema.categorical.iter().map(String::as_str));
    named.extend(schema.ignore.iter().map(String::as_str));
    for name in named {
        if position(name).is_none() {
            return Err(Error::data(
                format!("column '{name}'"),
                format!("unknown column; header has {}", header.join(", ")),
            ));
        }
    }
    let roles: Vec<Role> = header
        .iter()
        .map(|h| {
            if Some(h.as_str()) == schema.id_col.as_deref() {
                Role::Id
            } else if *h == schema.treatment_col {
                Role::Treatment
            } else if *h == schema.outcome_col {
                Role::Outcome
            } else if schema.ignore.contains(h) {
                Role::Ignored
            } else if schema.categorical.contains(h) {
                Role::Categorical
            } else {
                Role::Numeric
            }
        })
        .collect();

    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(Error::data("campaign csv", "no data rows"));
    }

    let mut levels: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (c, role) in roles.iter().enumerate() {
        if matches!(role, Role::Categorical) {
            let set = records
                .iter()
                .map(|r| {
                    let v = r.get(c).unwrap_or("").trim();
                    if is_missing(v) {
                        MISSING_LEVEL.to_string()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            levels.insert(c, set);
        }
    }

    let mut feature_names = Vec::new();
    for (c, role) in roles.iter().enumerate() {
        match role {
            Role::Numeric => feature_names.push(header[c].clone()),
            Role::Categorical => {
                for level in &levels[&c] {
                    feature_names.push(format!("{}={}", header[c], level));
                }
            }
            _ => {}
        }
    }

    let n = records.len();
    let mut ids = Vec::with_capacity(n);
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n * feature_names.len());
    for (r, rec) in records.iter().enumerate() {
        let line = r + 2;
        if rec.len() != header.len() {
            return Err(Error::data(
                format!("line {line}"),
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let mut id = None;
        for (c, role) in roles.iter().enumerate() {
            let raw = &rec[c];
            let loc = || format!("line {line}, column '{}'", header[c]);
            match role {
                Role::Id => id = Some(raw.trim().to_string()),
                Role::Treatment | Role::Outcome => {
                    let v = parse_binary(raw).ok_or_else(|| {
                        Error::data(loc(), format!("value '{}' is not binary (0/1)", raw.trim()))
                    })?;
                    if matches!(role, Role::Treatment) {
                        treatment.push(v);
                    } else {
                        outcome.push(v);
                    }
                }
                Role::Numeric => {
                    if is_missing(raw) {
                        features.push(f64::NAN);
                    } else {
                        let v: f64 = raw.trim().parse().map_err(|_| {
                            Error::data(loc(), format!("cannot parse '{}' as a number", raw.trim()))
                        })?;
                        if !v.is_finite() {
                            return Err(Error::data(loc(), "non-finite value"));
                        }
                        features.push(v);
                    }
                }
                Role::Categorical => {
                    let v = if is_missing(raw) {
                        MISSING_LEVEL
                    } else {
                        raw.trim()
                    };
                    features.extend(levels[&c].iter().map(|l| if l == v { 1.0 } else { 0.0 }));
                }
                Role::Ignored => {}
            }
        }
        ids.push(id.unwrap_or_else(|| (r + 1).to_string()));
    }

    let mut ds = CampaignDataset::new(ids, features, feature_names, treatment, outcome)?;
    ds.categorical_levels = levels
        .into_iter()
        .map(|(c, set)| (header[c].clone(), set.into_iter().collect()))
        .collect();
    Ok(ds)
}

/// Loads a campaign CSV; categorical columns are one-hot encoded and row
/// order is preserved.
pub fn load_campaign_csv(
    path: impl AsRef<Path>,
    schema: &CampaignSchema,
) -> Result<CampaignDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_campaign_csv(file, schema)
}

/// Writes the encoded dataset with columns `id, t, y, <features...>`.
pub fn write_campaign_csv<W: Write>(writer: W, ds: &CampaignDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "t".to_string(), "y".to_string()];
    header.extend(ds.feature_names.iter().cloned());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![
            ds.ids[i].clone(),
            u8::from(ds.treatment[i]).to_string(),
            u8::from(ds.outcome[i]).to_string(),
        ];
        rec.extend(ds.row(i).iter().map(|x| {
            if x.is_nan() {
                String::new()
            } else {
                format!("{x:.16e}")
            }
        }));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "campaign csv".into(),
        source,
    })?;
    Ok(())
}
