use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// One column of a freshly loaded table. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing_count(&self) -> usize {
        match self {
            Column::Numeric(v) => v.iter().filter(|c| c.is_none()).count(),
            Column::Categorical(v) => v.iter().filter(|c| c.is_none()).count(),
        }
    }
}

/// A table as read from disk, before any imputation or encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    column_names: Vec<String>,
    columns: Vec<Column>,
    n_rows: usize,
}

impl RawTable {
    pub fn new(column_names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if column_names.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} names for {} columns",
                column_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for (i, name) in column_names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidValue(format!("column {i} has an empty name")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidValue(format!(
                    "duplicate column name {name:?}"
                )));
            }
        }
        let n_rows = columns.first().map_or(0, Column::len);
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n_rows) {
            return Err(Error::Shape(format!(
                "column {:?} has {} rows, expected {n_rows}",
                column_names[i],
                c.len()
            )));
        }
        Ok(Self {
            column_names,
            columns,
            n_rows,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.column_index(name).map(|i| &self.columns[i])
    }
}

/// Reads a comma-separated file with a header row.
///
/// Cells are trimmed; a cell equal to one of `missing_markers` becomes
/// missing. A column whose present cells all parse as finite numbers is
/// numeric, anything else is categorical.
pub fn load_csv(path: impl AsRef<Path>, missing_markers: &[&str]) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));

    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };

    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut seen = HashSet::new();
    for (column, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::EmptyHeader {
                path: path.to_path_buf(),
                column,
            });
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateHeader {
                path: path.to_path_buf(),
                name: name.clone(),
                column,
            });
        }
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            let row = record.position().map_or(0, |p| p.line() as usize);
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        for (col, cell) in cells.iter_mut().zip(record.iter()) {
            if missing_markers.contains(&cell) {
                col.push(None);
            } else {
                col.push(Some(cell.to_owned()));
            }
        }
    }

    let columns = cells.into_iter().map(infer_column).collect();
    RawTable::new(header, columns)
}

fn infer_column(cells: Vec<Option<String>>) -> Column {
    let parsed: Option<Vec<Option<f64>>> = cells
        .iter()
        .map(|c| match c {
            None => Some(None),
            Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
        })
        .collect();
    match parsed {
        Some(values) if values.iter().any(Option::is_some) => Column::Numeric(values),
        _ => Column::Categorical(cells),
    }
}
