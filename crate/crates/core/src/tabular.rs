//! Column-typed tabular data: CSV ingestion, log transforms, train/test
//! splitting.
//!
//! Tables are immutable after construction and cheap to share between
//! threads. Rows containing missing cells (empty CSV fields) are dropped at
//! ingestion and counted, so every downstream kernel can assume fully
//! populated, finite data.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng;
use crate::Result;

/// Column type tag, used for schema overrides at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    /// Finite 64-bit floats.
    Numeric(Vec<f64>),
    /// Level indices into `levels`; levels are listed in order of first
    /// appearance in the source data.
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column { name: name.into(), data: ColumnData::Numeric(values) }
    }

    pub fn categorical(name: impl Into<String>, codes: Vec<u32>, levels: Vec<String>) -> Self {
        Column { name: name.into(), data: ColumnData::Categorical { codes, levels } }
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            ColumnData::Categorical { .. } => None,
        }
    }

    pub fn as_categorical(&self) -> Option<(&[u32], &[String])> {
        match &self.data {
            ColumnData::Numeric(_) => None,
            ColumnData::Categorical { codes, levels } => Some((codes, levels)),
        }
    }

    /// Cell rendered as text: round-trip float formatting for numerics, the
    /// level label for categoricals.
    pub fn cell_string(&self, row: usize) -> String {
        match &self.data {
            ColumnData::Numeric(v) => format_float(v[row]),
            ColumnData::Categorical { codes, levels } => levels[codes[row] as usize].clone(),
        }
    }

    fn take_rows(&self, keep: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(keep.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: keep.iter().map(|&i| codes[i]).collect(),
                levels: levels.clone(),
            },
        };
        Column { name: self.name.clone(), data }
    }
}

/// Shortest decimal representation that parses back to the same f64.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    columns: Vec<Column>,
    response: Option<String>,
    n: usize,
    /// Rows dropped at ingestion because of missing cells.
    pub dropped_rows: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::data("a table needs at least one column"));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::data("a table needs at least one row"));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.len() != n {
                return Err(Error::data(format!(
                    "column '{}' has {} rows, expected {n}",
                    c.name,
                    c.len()
                )));
            }
            if !seen.insert(c.name.clone()) {
                return Err(Error::data(format!("duplicate column name '{}'", c.name)));
            }
            match &c.data {
                ColumnData::Numeric(v) => {
                    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                        return Err(Error::data(format!(
                            "column '{}' contains non-finite value {bad}",
                            c.name
                        )));
                    }
                }
                ColumnData::Categorical { codes, levels } => {
                    if levels.is_empty() {
                        return Err(Error::data(format!("column '{}' has no levels", c.name)));
                    }
                    if codes.iter().any(|&k| k as usize >= levels.len()) {
                        return Err(Error::data(format!(
                            "column '{}' has a level index out of range",
                            c.name
                        )));
                    }
                }
            }
        }
        Ok(Table { columns, response: None, n, dropped_rows: 0 })
    }

    /// Designates the response column.
    pub fn with_response(mut self, name: &str) -> Result<Self> {
        if self.column(name).is_none() {
            return Err(Error::data(format!("response column '{name}' not found")));
        }
        self.response = Some(name.to_string());
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn response_name(&self) -> Option<&str> {
        self.response.as_deref()
    }

    pub fn response_column(&self) -> Option<&Column> {
        let name = self.response.as_deref()?;
        Some(&self.columns[self.column(name).unwrap()])
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Indices of all non-response columns, in table order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| Some(self.columns[i].name.as_str()) != self.response.as_deref())
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices().iter().map(|&i| self.columns[i].name.clone()).collect()
    }

    /// New table containing the given rows (indices may repeat).
    pub fn take_rows(&self, keep: &[usize]) -> Table {
        Table {
            columns: self.columns.iter().map(|c| c.take_rows(keep)).collect(),
            response: self.response.clone(),
            n: keep.len(),
            dropped_rows: 0,
        }
    }

    /// New table with one column's data replaced (same length required).
    pub fn with_column_data(&self, col: usize, data: ColumnData) -> Table {
        let mut columns = self.columns.clone();
        debug_assert_eq!(
            match &data {
                ColumnData::Numeric(v) => v.len(),
                ColumnData::Categorical { codes, .. } => codes.len(),
            },
            self.n
        );
        columns[col] = Column { name: columns[col].name.clone(), data };
        Table { columns, response: self.response.clone(), n: self.n, dropped_rows: 0 }
    }

    /// Natural-log transform of the named numeric columns: `v -> ln(v + offset)`.
    ///
    /// `offset` must be 0 or 1; every `v + offset` must be positive.
    pub fn log_transform(&self, names: &[String], offset: f64) -> Result<Table> {
        if offset != 0.0 && offset != 1.0 {
            return Err(Error::arg(format!("log offset must be 0 or 1, got {offset}")));
        }
        let mut out = self.clone();
        for name in names {
            let idx = out
                .column(name)
                .ok_or_else(|| Error::arg(format!("unknown column '{name}'")))?;
            let values = match &out.columns[idx].data {
                ColumnData::Numeric(v) => v,
                ColumnData::Categorical { .. } => {
                    return Err(Error::arg(format!(
                        "cannot log-transform categorical column '{name}'"
                    )))
                }
            };
            let mut transformed = Vec::with_capacity(values.len());
            for &v in values {
                if v + offset <= 0.0 {
                    return Err(Error::arg(format!(
                        "log({v} + {offset}) is undefined in column '{name}'"
                    )));
                }
                transformed.push((v + offset).ln());
            }
            out.columns[idx].data = ColumnData::Numeric(transformed);
        }
        Ok(out)
    }

    /// Seeded train/test split: shuffle rows, first `ceil(fraction * n)` go to
    /// the training table.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Table, Table)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::arg(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        if self.n < 2 {
            return Err(Error::arg("need at least 2 rows to split"));
        }
        let mut rng = rng::stream(seed, "split", 0);
        let order = rng::permutation(&mut rng, self.n);
        let n_train = (train_fraction * self.n as f64).ceil() as usize;
        let train = self.take_rows(&order[..n_train]);
        let test = self.take_rows(&order[n_train..]);
        Ok((train, test))
    }

    /// Writes the table as CSV (header row, round-trip float formatting).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n {
            w.write_record(self.columns.iter().map(|c| c.cell_string(row)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in 0..self.n {
            w.write_record(self.columns.iter().map(|c| c.cell_string(row)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a CSV file (RFC-4180 subset: comma delimiter, `.` decimal point,
/// UTF-8, mandatory header row).
///
/// A column is numeric when every non-missing cell parses as a finite float,
/// unless `schema` overrides the kind. Rows with any missing (empty) cell are
/// dropped; the count lands in [`Table::dropped_rows`].
pub fn read_csv(path: &Path, schema: &[(String, ColumnKind)]) -> Result<Table> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    read_csv_from(file, schema, &path.display().to_string())
}

/// As [`read_csv`], from any reader. `source` labels error messages.
pub fn read_csv_from<R: std::io::Read>(
    reader: R,
    schema: &[(String, ColumnKind)],
    source: &str,
) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if names.is_empty() {
        return Err(Error::data(format!("{source}: empty header row")));
    }
    {
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name) {
                return Err(Error::data(format!("{source}: duplicate header name '{name}'")));
            }
        }
    }
    for (name, _) in schema {
        if !names.contains(name) {
            return Err(Error::data(format!("{source}: schema names unknown column '{name}'")));
        }
    }

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    let mut dropped = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != names.len() {
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            return Err(Error::data(format!(
                "{source}:{line}: expected {} fields, found {}",
                names.len(),
                rec.len()
            )));
        }
        if rec.iter().any(|cell| cell.is_empty()) {
            dropped += 1;
        } else {
            rows.push(rec);
        }
    }
    if rows.is_empty() {
        return Err(Error::data(format!(
            "{source}: no complete rows ({dropped} dropped for missing cells)"
        )));
    }

    let mut columns = Vec::with_capacity(names.len());
    for (ci, name) in names.iter().enumerate() {
        let kind = schema.iter().find(|(n, _)| n == name).map(|(_, k)| *k).unwrap_or_else(|| {
            let numeric = rows.iter().all(|r| {
                r[ci].parse::<f64>().map(|v| v.is_finite()).unwrap_or(false)
            });
            if numeric {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            }
        });
        let data = match kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(rows.len());
                for r in &rows {
                    let cell = &r[ci];
                    let v: f64 = cell.parse().map_err(|_| {
                        let line = r.position().map(|p| p.line()).unwrap_or(0);
                        Error::data(format!(
                            "{source}:{line}: cannot parse '{cell}' in numeric column '{name}'"
                        ))
                    })?;
                    if !v.is_finite() {
                        let line = r.position().map(|p| p.line()).unwrap_or(0);
                        return Err(Error::data(format!(
                            "{source}:{line}: non-finite value '{cell}' in numeric column '{name}'"
                        )));
                    }
                    values.push(v);
                }
                ColumnData::Numeric(values)
            }
            ColumnKind::Categorical => {
                let mut levels: Vec<String> = Vec::new();
                let mut codes = Vec::with_capacity(rows.len());
                for r in &rows {
                    let cell = &r[ci];
                    let code = match levels.iter().position(|l| l == cell) {
                        Some(k) => k,
                        None => {
                            levels.push(cell.to_string());
                            levels.len() - 1
                        }
                    };
                    codes.push(code as u32);
                }
                ColumnData::Categorical { codes, levels }
            }
        };
        columns.push(Column { name: name.clone(), data });
    }

    let mut table = Table::new(columns)?;
    table.dropped_rows = dropped;
    Ok(table)
}
