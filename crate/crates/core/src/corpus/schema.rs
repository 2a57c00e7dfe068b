use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChartType {
    #[serde(rename = "simple-bar")]
    SimpleBar,
    #[serde(rename = "complex-bar")]
    ComplexBar,
    #[serde(rename = "simple-line")]
    SimpleLine,
    #[serde(rename = "complex-line")]
    ComplexLine,
}

impl ChartType {
    pub const ALL: [ChartType; 4] = [
        ChartType::SimpleBar,
        ChartType::ComplexBar,
        ChartType::SimpleLine,
        ChartType::ComplexLine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartType::SimpleBar => "simple-bar",
            ChartType::ComplexBar => "complex-bar",
            ChartType::SimpleLine => "simple-line",
            ChartType::ComplexLine => "complex-line",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_line(self) -> bool {
        matches!(self, ChartType::SimpleLine | ChartType::ComplexLine)
    }

    pub fn is_complex(self) -> bool {
        matches!(self, ChartType::ComplexBar | ChartType::ComplexLine)
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One table cell: the raw text plus, for numeric cells, the parsed value and
/// any unit stripped from the text ("%", or a leading currency symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub raw: String,
    pub value: Option<f64>,
    pub unit: Option<String>,
}

impl Cell {
    pub fn parse(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let trimmed = raw.trim();
        let (body, unit) = if let Some(b) = trimmed.strip_suffix('%') {
            (b.trim_end(), Some("%".to_string()))
        } else if let Some(c) = trimmed.chars().next().filter(|c| matches!(c, '$' | '€' | '£')) {
            (trimmed[c.len_utf8()..].trim_start(), Some(c.to_string()))
        } else {
            (trimmed, None)
        };
        match normalize_number(body).and_then(|n| n.parse::<f64>().ok()) {
            Some(v) => Cell {
                raw,
                value: Some(v),
                unit,
            },
            None => Cell {
                raw,
                value: None,
                unit: None,
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.value.is_some()
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum RawCell {
            Text(String),
            Number(serde_json::Number),
        }
        Ok(match RawCell::deserialize(d)? {
            RawCell::Text(s) => Cell::parse(s),
            RawCell::Number(n) => Cell::parse(n.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        DataTable {
            headers,
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(Cell::parse).collect())
                .collect(),
        }
    }

    pub fn n_columns(&self) -> usize {
        self.headers.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of data cells (header row excluded).
    pub fn n_cells(&self) -> usize {
        self.n_columns() * self.n_rows()
    }

    /// Text at table coordinates where row 0 is the header row and row `r >= 1`
    /// is data row `r - 1`.
    pub fn text_at(&self, column: usize, row: usize) -> Option<&str> {
        if row == 0 {
            self.headers.get(column).map(String::as_str)
        } else {
            self.rows
                .get(row - 1)
                .and_then(|r| r.get(column))
                .map(|c| c.raw.as_str())
        }
    }

    pub fn cell(&self, column: usize, data_row: usize) -> Option<&Cell> {
        self.rows.get(data_row).and_then(|r| r.get(column))
    }

    pub fn column(&self, column: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().filter_map(move |r| r.get(column))
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.headers.len() < 2 {
            return Err(format!(
                "table needs at least 2 columns, found {}",
                self.headers.len()
            ));
        }
        if self.rows.is_empty() {
            return Err("table has no data rows".into());
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.headers.len() {
                return Err(format!(
                    "ragged table: row {} has {} cells under {} headers",
                    i,
                    row.len(),
                    self.headers.len()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSample {
    pub id: String,
    #[serde(default)]
    pub image_ref: Option<String>,
    pub title: String,
    #[serde(default)]
    pub x_label: String,
    #[serde(default)]
    pub y_label: String,
    pub chart_type: ChartType,
    pub table: DataTable,
    pub summary: String,
}

impl ChartSample {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::InvalidSample {
            id: self.id.clone(),
            message,
        };
        if self.id.trim().is_empty() {
            return Err(fail("field `id` is empty".into()));
        }
        if self.title.trim().is_empty() {
            return Err(fail("field `title` is empty".into()));
        }
        if self.summary.trim().is_empty() {
            return Err(fail("field `summary` is empty".into()));
        }
        self.table.validate().map_err(fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub samples: Vec<ChartSample>,
    pub split_tag: Option<SplitTag>,
}

impl Corpus {
    pub fn new(samples: Vec<ChartSample>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &samples {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
        }
        Ok(Corpus {
            samples,
            split_tag: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ChartSample> {
        self.samples.iter().find(|s| s.id == id)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// A problem found while validating a dataset file. Parsing continues past
/// each violation so a report can list all of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: PathBuf,
    pub line: usize,
    pub id: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.id {
            Some(id) => write!(
                f,
                "{}:{}: sample `{}`: {}",
                self.path.display(),
                self.line,
                id,
                self.message
            ),
            None => write!(f, "{}:{}: {}", self.path.display(), self.line, self.message),
        }
    }
}

fn dataset_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        Ok(files)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

/// Parses every record, collecting the valid samples and every violation.
pub fn scan_corpus(path: impl AsRef<Path>) -> Result<(Vec<ChartSample>, Vec<Violation>)> {
    let mut samples = Vec::new();
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for file in dataset_files(path.as_ref())? {
        let f = fs::File::open(&file).map_err(|e| Error::io(&file, e))?;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&file, e))?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let violation = |id: Option<String>, message: String| Violation {
                path: file.clone(),
                line: lineno,
                id,
                message,
            };
            let sample: ChartSample = match serde_json::from_str(&line) {
                Ok(s) => s,
                Err(e) => {
                    violations.push(violation(None, e.to_string()));
                    continue;
                }
            };
            if let Err(e) = sample.validate() {
                let message = match e {
                    Error::InvalidSample { message, .. } => message,
                    other => other.to_string(),
                };
                violations.push(violation(Some(sample.id.clone()), message));
                continue;
            }
            if !seen.insert(sample.id.clone()) {
                violations.push(violation(Some(sample.id.clone()), "duplicate sample id".into()));
                continue;
            }
            samples.push(sample);
        }
    }
    Ok((samples, violations))
}

/// Loads a JSON Lines dataset file, or every `*.jsonl` file of a directory in
/// name order. The first violation aborts the load.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let (samples, violations) = scan_corpus(path)?;
    if let Some(v) = violations.into_iter().next() {
        return Err(match v.id {
            Some(id) => Error::Schema {
                path: v.path,
                line: v.line,
                message: format!("sample `{id}`: {}", v.message),
            },
            None => Error::Schema {
                path: v.path,
                line: v.line,
                message: v.message,
            },
        });
    }
    Ok(Corpus {
        samples,
        split_tag: None,
    })
}
