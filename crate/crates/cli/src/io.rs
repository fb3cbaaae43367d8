//! Input digests, report envelopes and the CSV formats the commands share.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use newsframe_core::newscycle::AnnualFeatureSeries;
use newsframe_core::{Corpus, Label};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Hashes of every input file; directories contribute their sorted `.csv` files.
#[derive(Debug, Default)]
pub struct Inputs {
    records: Vec<InputRecord>,
}

impl Inputs {
    pub fn add(&mut self, role: &str, path: &Path) -> Result<(), CliError> {
        if path.is_dir() {
            for file in csv_files(path)? {
                let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                self.add(&format!("{role}/{name}"), &file)?;
            }
            return Ok(());
        }
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.records.push(InputRecord {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    /// One digest over every `role:sha256` line, in insertion order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            h.update(format!("{}:{}\n", r.role, r.sha256).as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub input_digest: String,
    pub inputs: &'a [InputRecord],
    pub result: T,
}

pub fn write_report<T: Serialize>(
    path: &Path,
    command: &str,
    config: &RunConfig,
    inputs: &Inputs,
    result: T,
) -> Result<(), CliError> {
    let report = Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        input_digest: inputs.digest(),
        inputs: &inputs.records,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    newsframe_ingest::cache::write_atomic(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(path, &bytes)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| CliError::Input(format!("{} row {}: {e}", path.display(), i + 1))))
        .collect()
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    newsframe_ingest::load_corpus(path).map_err(|e| CliError::io(path, e))
}

pub fn csv_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// One row of the annual feature CSV. Empty cells are missing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRow {
    pub year: i32,
    pub volume: u64,
    pub mean_sentiment: Option<f64>,
    pub mnc: Option<f64>,
    pub legislative: Option<u8>,
}

pub fn cycle_rows(series: &AnnualFeatureSeries) -> Vec<CycleRow> {
    (0..series.len())
        .map(|i| CycleRow {
            year: series.years[i],
            volume: series.volume[i],
            mean_sentiment: series.mean_sentiment[i],
            mnc: series.mnc[i],
            legislative: series.legislative.as_ref().map(|l| u8::from(l[i])),
        })
        .collect()
}

pub fn read_series(path: &Path, topic: &str) -> Result<AnnualFeatureSeries, CliError> {
    let mut rows: Vec<CycleRow> = read_csv(path)?;
    rows.sort_by_key(|r| r.year);
    if rows.windows(2).any(|w| w[1].year != w[0].year + 1) {
        return Err(CliError::Input(format!("{}: years must be contiguous and unique", path.display())));
    }
    let labelled = rows.iter().all(|r| r.legislative.is_some());
    Ok(AnnualFeatureSeries {
        topic: topic.to_string(),
        years: rows.iter().map(|r| r.year).collect(),
        volume: rows.iter().map(|r| r.volume).collect(),
        mean_sentiment: rows.iter().map(|r| r.mean_sentiment).collect(),
        mnc: rows.iter().map(|r| r.mnc).collect(),
        legislative: labelled.then(|| rows.iter().map(|r| r.legislative == Some(1)).collect()),
    })
}

#[derive(Debug, Deserialize)]
struct LawRow {
    topic: String,
    year: i32,
    count: u32,
}

/// Years with at least one law, per topic.
pub fn read_laws(path: &Path) -> Result<BTreeMap<String, BTreeSet<i32>>, CliError> {
    let mut laws: BTreeMap<String, BTreeSet<i32>> = BTreeMap::new();
    for row in read_csv::<LawRow>(path)? {
        let years = laws.entry(row.topic).or_default();
        if row.count > 0 {
            years.insert(row.year);
        }
    }
    Ok(laws)
}

#[derive(Debug, Deserialize)]
struct SeedRow {
    article_id: String,
    label: String,
}

pub fn read_seeds(path: &Path) -> Result<BTreeMap<String, Label>, CliError> {
    let mut seeds = BTreeMap::new();
    for (i, row) in read_csv::<SeedRow>(path)?.into_iter().enumerate() {
        let label = match row.label.trim().to_ascii_lowercase().as_str() {
            "1" | "positive" | "pos" | "true" => Label::Positive,
            "0" | "negative" | "neg" | "false" => Label::Negative,
            other => {
                return Err(CliError::Input(format!("{} row {}: unknown label {other:?}", path.display(), i + 1)))
            }
        };
        if seeds.insert(row.article_id.clone(), label).is_some() {
            return Err(CliError::Input(format!("{}: duplicate seed {:?}", path.display(), row.article_id)));
        }
    }
    Ok(seeds)
}

/// One article id per line; blank lines are skipped.
pub fn read_id_list(path: &Path) -> Result<BTreeSet<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}
