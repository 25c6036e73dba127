//! Trajectory files, session files and LASA-style corpus ingestion.
//!
//! The canonical trajectory file is JSON:
//! `{"name", "dims", "duration", "samples": [[x, y, ...], ...], "provenance"}`.
//! CSV files (one header row, one sample per line) are accepted wherever a
//! trajectory is loaded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::Session;
use crate::error::{Error, Result};
use crate::trajectory::{Preprocess, Trajectory, DEFAULT_DURATION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    #[serde(default)]
    pub name: String,
    pub dims: usize,
    #[serde(default = "default_duration")]
    pub duration: f64,
    pub samples: Vec<Vec<f64>>,
    #[serde(default)]
    pub provenance: String,
}

fn default_duration() -> f64 {
    DEFAULT_DURATION
}

impl TrajectoryFile {
    pub fn new(name: &str, traj: &Trajectory, provenance: &str) -> Self {
        TrajectoryFile {
            name: name.to_string(),
            dims: traj.dims(),
            duration: traj.duration(),
            samples: traj.rows(),
            provenance: provenance.to_string(),
        }
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        if let Some(row) = self.samples.iter().find(|r| r.len() != self.dims) {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: row.len(),
            });
        }
        Trajectory::from_rows(&self.samples)?.with_duration(self.duration)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load_trajectory_file(path: &Path) -> Result<TrajectoryFile> {
    if is_csv(path) {
        let traj = read_csv_trajectory(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        return Ok(TrajectoryFile::new(name, &traj, "csv"));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

/// Loads a JSON or CSV trajectory and validates it.
pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    if is_csv(path) {
        return read_csv_trajectory(path);
    }
    load_trajectory_file(path)?.to_trajectory()
}

pub fn save_trajectory(path: &Path, traj: &Trajectory, name: &str, provenance: &str) -> Result<()> {
    let file = TrajectoryFile::new(name, traj, provenance);
    let text = serde_json::to_string_pretty(&file).expect("finite trajectory serializes");
    fs::write(path, text).map_err(io_err(path))
}

fn read_csv_trajectory(path: &Path) -> Result<Trajectory> {
    let (_, rows) = read_csv_rows(path)?;
    Trajectory::from_rows(&rows)
}

/// Header names and numeric rows of a CSV file.
fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, format!("row {}: {field:?}: {e}", line + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn save_session(path: &Path, session: &Session) -> Result<()> {
    fs::write(path, session.to_json()).map_err(io_err(path))
}

pub fn load_session(path: &Path) -> Result<Session> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub demos: Vec<(String, Trajectory)>,
    pub warnings: Vec<String>,
}

/// Reads every `*.csv` in `dir` (lexicographic order) as one shape.
///
/// A file may hold several demonstrations when its first column is named
/// `demo`; only the rows of the first demonstration id are used. Each
/// demonstration goes through `preprocess`. Unreadable or too-short files are
/// skipped with a warning.
pub fn ingest_lasa_csv(dir: &Path, preprocess: &Preprocess) -> Result<Corpus> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_csv(p))
        .collect();
    files.sort();
    let mut corpus = Corpus::default();
    if files.is_empty() {
        let msg = format!("no CSV files found in {}", dir.display());
        log::warn!("{msg}");
        corpus.warnings.push(msg);
    }
    for path in files {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        match read_first_demo(&path).and_then(|t| preprocess.apply(&t)) {
            Ok(t) => corpus.demos.push((name, t)),
            Err(e) => {
                let msg = format!("skipping {}: {e}", path.display());
                log::warn!("{msg}");
                corpus.warnings.push(msg);
            }
        }
    }
    Ok(corpus)
}

fn read_first_demo(path: &Path) -> Result<Trajectory> {
    let (header, rows) = read_csv_rows(path)?;
    let has_id = header.first().is_some_and(|h| h.eq_ignore_ascii_case("demo"));
    if !has_id {
        return Trajectory::from_rows(&rows);
    }
    let first_id = rows.first().map(|r| r[0]);
    let demo: Vec<Vec<f64>> = rows
        .iter()
        .take_while(|r| Some(r[0]) == first_id)
        .map(|r| r[1..].to_vec())
        .collect();
    Trajectory::from_rows(&demo)
}
