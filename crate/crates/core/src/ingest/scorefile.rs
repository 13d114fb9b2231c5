//! Score files: `id,s0_hat,s1_hat[,t,y]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{ScorePair, ScoreSet};
use crate::{Error, Result};

pub const REQUIRED_COLUMNS: [&str; 3] = ["id", "s0_hat", "s1_hat"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub s0_hat: f64,
    pub s1_hat: f64,
    pub t: Option<bool>,
    pub y: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreFile {
    pub rows: Vec<ScoreRow>,
}

impl ScoreFile {
    pub fn score_set(&self) -> Result<ScoreSet<f64>> {
        ScoreSet::from_tuples(self.rows.iter().map(|r| (r.s0_hat, r.s1_hat)))
    }

    pub fn get(&self, id: &str) -> Option<&ScoreRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_flag(raw: &str, loc: &dyn Fn() -> String) -> Result<Option<bool>> {
    match raw.trim() {
        "" => Ok(None),
        "0" => Ok(Some(false)),
        "1" => Ok(Some(true)),
        other => Err(Error::data(loc(), format!("'{other}' is not 0 or 1"))),
    }
}

pub fn read_scores<R: Read>(reader: R) -> Result<ScoreFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(ci), Some(c0), Some(c1)) = (col("id"), col("s0_hat"), col("s1_hat")) else {
        return Err(Error::data(
            "score file header",
            format!(
                "required columns are {}; found [{}]",
                REQUIRED_COLUMNS.join(", "),
                header.join(", ")
            ),
        ));
    };
    let (ct, cy) = (col("t"), col("y"));
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| Error::data(format!("line {line}"), e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let score = |c: usize| -> Result<f64> {
            let loc = format!("line {line}, column '{}'", header[c]);
            let raw = field(c).trim();
            let v: f64 = raw.parse().map_err(|_| {
                Error::data(loc.clone(), format!("cannot parse '{raw}' as a number"))
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::data(loc, format!("score {v} outside [0, 1]")));
            }
            Ok(v)
        };
        let flag = |c: Option<usize>| -> Result<Option<bool>> {
            match c {
                Some(c) => parse_flag(field(c), &|| format!("line {line}, column '{}'", header[c])),
                None => Ok(None),
            }
        };
        rows.push(ScoreRow {
            id: field(ci).trim().to_string(),
            s0_hat: score(c0)?,
            s1_hat: score(c1)?,
            t: flag(ct)?,
            y: flag(cy)?,
        });
    }
    Ok(ScoreFile { rows })
}

pub fn read_score_file(path: impl AsRef<Path>) -> Result<ScoreFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_scores(file)
}

/// Writes scores with 17 significant digits. The `t,y` columns are written
/// when every row carries them.
pub fn write_scores<W: Write>(writer: W, scores: &ScoreFile) -> Result<()> {
    let echo =
        !scores.rows.is_empty() && scores.rows.iter().all(|r| r.t.is_some() && r.y.is_some());
    let mut w = csv::Writer::from_writer(writer);
    if echo {
        w.write_record(["id", "s0_hat", "s1_hat", "t", "y"])?;
    } else {
        w.write_record(REQUIRED_COLUMNS)?;
    }
    for r in &scores.rows {
        let mut rec = vec![r.id.clone(), format_float(r.s0_hat), format_float(r.s1_hat)];
        if echo {
            rec.push(u8::from(r.t.unwrap_or(false)).to_string());
            rec.push(u8::from(r.y.unwrap_or(false)).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "score file".into(),
        source,
    })?;
    Ok(())
}

pub fn write_score_file(path: impl AsRef<Path>, scores: &ScoreFile) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_scores(file, scores)
}

impl From<&ScoreSet<f64>> for ScoreFile {
    fn from(set: &ScoreSet<f64>) -> Self {
        ScoreFile {
            rows: set
                .iter()
                .enumerate()
                .map(|(i, p): (usize, &ScorePair<f64>)| ScoreRow {
                    id: (i + 1).to_string(),
                    s0_hat: p.s0,
                    s1_hat: p.s1,
                    t: None,
                    y: None,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_score() {
        let err = read_scores("id,s0_hat,s1_hat\n1,0.2,1.2\n".as_bytes())
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2, column 's1_hat'"), "{err}");
    }

    #[test]
    fn missing_columns_listed() {
        let err = read_scores("id,s0_hat\n1,0.2\n".as_bytes())
            .unwrap_err()
            .to_string();
        assert!(err.contains("id, s0_hat, s1_hat"), "{err}");
    }

    #[test]
    fn empty_file_has_no_scores() {
        let f = read_scores("id,s0_hat,s1_hat\n".as_bytes()).unwrap();
        assert!(f.score_set().is_err());
        assert!(read_scores("".as_bytes()).is_err());
    }

    #[test]
    fn echo_columns() {
        let f = read_scores("id,s0_hat,s1_hat,t,y\na,0.1,0.2,1,0\n".as_bytes()).unwrap();
        assert_eq!(f.rows[0].t, Some(true));
        assert_eq!(f.rows[0].y, Some(false));
        let mut buf = Vec::new();
        write_scores(&mut buf, &f).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("id,s0_hat,s1_hat,t,y\n"));
        assert!(read_scores("id,s0_hat,s1_hat,t\na,0.1,0.2,7\n".as_bytes()).is_err());
    }
}
