//! Score-table and group-manifest loading.
//!
//! Score files are CSV with header
//! `sample_id,source,valid,<detector_1>,...,<detector_K>`; `source` is
//! the literal `natural` or an attack id, `valid` is 0/1 (the column may
//! be omitted entirely, defaulting to 1), and each detector column holds
//! that detector's adversarial probability. Manifests are JSON lists of
//! named attack groups.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::capacity::{DetectorBank, SoftDecision};
use crate::error::{Error, Result};

const NATURAL: &str = "natural";

#[derive(Debug, Clone)]
pub struct ScoreRecord {
    pub sample_id: String,
    pub source: String,
    pub valid: bool,
    /// One adversarial probability per declared detector, in order.
    pub scores: Vec<f64>,
}

/// Per-sample, per-source, per-detector adversarial probabilities.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    detectors: Vec<String>,
    records: Vec<ScoreRecord>,
    index: HashMap<(String, String), usize>,
    sample_order: Vec<String>,
}

impl ScoreTable {
    pub fn new(detectors: Vec<String>, records: Vec<ScoreRecord>) -> Result<Self> {
        if detectors.is_empty() {
            return Err(Error::Validation(
                "at least one detector column required".into(),
            ));
        }
        for (i, d) in detectors.iter().enumerate() {
            if detectors[..i].contains(d) {
                return Err(Error::Validation(format!("duplicate detector id '{d}'")));
            }
        }
        let mut index = HashMap::new();
        let mut sample_order = Vec::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.scores.len() != detectors.len() {
                return Err(Error::Dimension {
                    expected: detectors.len(),
                    got: rec.scores.len(),
                });
            }
            if rec.source == NATURAL && !rec.valid {
                return Err(Error::Validation(format!(
                    "natural record for sample '{}' marked invalid",
                    rec.sample_id
                )));
            }
            let key = (rec.sample_id.clone(), rec.source.clone());
            if index.insert(key, i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate record for sample '{}' source '{}'",
                    rec.sample_id, rec.source
                )));
            }
            if !sample_order.contains(&rec.sample_id) {
                sample_order.push(rec.sample_id.clone());
            }
        }
        Ok(Self {
            detectors,
            records,
            index,
            sample_order,
        })
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    /// Sample ids in first-appearance order.
    pub fn sample_ids(&self) -> &[String] {
        &self.sample_order
    }

    pub fn has_source(&self, source: &str) -> bool {
        self.records.iter().any(|r| r.source == source)
    }

    /// True when the (sample, source) record exists and passed the
    /// fooling filter. Missing records count as invalid.
    pub fn is_valid(&self, sample_id: &str, source: &str) -> bool {
        self.index
            .get(&(sample_id.to_string(), source.to_string()))
            .map(|&i| self.records[i].valid)
            .unwrap_or(false)
    }

    /// The detector bank for one record; row k is
    /// (1 − score_k, score_k) in declared detector order.
    pub fn bank_for(&self, sample_id: &str, source: &str) -> Result<DetectorBank> {
        let &i = self
            .index
            .get(&(sample_id.to_string(), source.to_string()))
            .ok_or_else(|| Error::Lookup {
                sample_id: sample_id.to_string(),
                source_label: source.to_string(),
            })?;
        let rows = self.records[i]
            .scores
            .iter()
            .map(|&s| SoftDecision::from_adversarial_score(s))
            .collect::<Result<Vec<_>>>()?;
        DetectorBank::new(self.detectors.clone(), rows)
    }
}

/// Named groups of simultaneously mounted attacks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupManifest {
    pub groups: Vec<AttackGroup>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackGroup {
    pub name: String,
    pub attacks: Vec<String>,
    pub algorithm: String,
    pub loss: String,
    pub norm: String,
    pub epsilon: Option<f64>,
}

impl GroupManifest {
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.groups.iter().enumerate() {
            if self.groups[..i].iter().any(|o| o.name == g.name) {
                return Err(Error::Validation(format!(
                    "duplicate group name '{}'",
                    g.name
                )));
            }
            if g.attacks.is_empty() {
                return Err(Error::Validation(format!(
                    "group '{}' lists no attacks",
                    g.name
                )));
            }
            for (j, a) in g.attacks.iter().enumerate() {
                if g.attacks[..j].contains(a) {
                    return Err(Error::Validation(format!(
                        "group '{}' lists attack '{a}' twice",
                        g.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses a manifest from JSON and validates it.
pub fn load_manifest<R: Read>(stream: R) -> Result<GroupManifest> {
    let manifest: GroupManifest = serde_json::from_reader(stream)?;
    manifest.validate()?;
    Ok(manifest)
}

fn parse_score(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("non-numeric score '{field}'"),
    })?;
    // tolerate float-formatting spill just past the boundary
    if !(-1e-9..=1.0 + 1e-9).contains(&v) {
        return Err(Error::Parse {
            line,
            msg: format!("score {v} out of [0,1]"),
        });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Parses a score table from CSV, reporting the offending line on error.
pub fn load_scores<R: Read>(stream: R) -> Result<ScoreTable> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(stream);
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[0] != "sample_id" || cols[1] != "source" {
        return Err(Error::Parse {
            line: 1,
            msg: "header must start with sample_id,source[,valid],<detector ids>".into(),
        });
    }
    let has_valid = cols[2] == "valid";
    let first_detector = if has_valid { 3 } else { 2 };
    let detectors: Vec<String> = cols[first_detector..]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if detectors.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no detector columns declared".into(),
        });
    }

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if row.len() != cols.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, got {}", cols.len(), row.len()),
            });
        }
        let valid = if has_valid {
            match &row[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("valid must be 0 or 1, got '{other}'"),
                    })
                }
            }
        } else {
            true
        };
        let scores = (first_detector..row.len())
            .map(|i| parse_score(&row[i], line))
            .collect::<Result<Vec<_>>>()?;
        records.push(ScoreRecord {
            sample_id: row[0].to_string(),
            source: row[1].to_string(),
            valid,
            scores,
        });
    }
    ScoreTable::new(detectors, records).map_err(|e| match e {
        Error::Validation(msg) => Error::Parse { line: 0, msg },
        other => other,
    })
}

/// Writes a table back to the CSV format accepted by [`load_scores`].
pub fn write_scores<W: Write>(table: &ScoreTable, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![
        "sample_id".to_string(),
        "source".to_string(),
        "valid".to_string(),
    ];
    header.extend(table.detectors().iter().cloned());
    writer
        .write_record(&header)
        .map_err(|e| Error::Validation(e.to_string()))?;
    for rec in table.records() {
        let mut row = vec![
            rec.sample_id.clone(),
            rec.source.clone(),
            if rec.valid { "1".into() } else { "0".into() },
        ];
        row.extend(rec.scores.iter().map(|s| format!("{s}")));
        writer
            .write_record(&row)
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
