//! Binary document × variable matrices and their CSV / manifest files.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::VariableKind;

/// Rows are documents, columns are word features and concept tags.
/// Stored column-major; every cell is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<String>,
    cells: Vec<Vec<u8>>,
    rows: usize,
}

impl Dataset {
    /// Builds a dataset from row vectors.
    pub fn new(columns: Vec<String>, rows: Vec<Vec<u8>>) -> Result<Self> {
        let mut cells = vec![Vec::with_capacity(rows.len()); columns.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {r} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            for (c, &cell) in row.iter().enumerate() {
                cells[c].push(cell);
            }
        }
        Self::from_columns(columns, cells)
    }

    pub fn from_columns(columns: Vec<String>, cells: Vec<Vec<u8>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in &columns {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if cells.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} columns named but {} given",
                columns.len(),
                cells.len()
            )));
        }
        let rows = cells.first().map_or(0, Vec::len);
        for (name, column) in columns.iter().zip(&cells) {
            if column.len() != rows {
                return Err(Error::InvalidDataset(format!(
                    "column {name} has {} cells, expected {rows}",
                    column.len()
                )));
            }
            if let Some(bad) = column.iter().find(|&&c| c > 1) {
                return Err(Error::InvalidDataset(format!("column {name} has cell {bad}")));
            }
        }
        Ok(Dataset {
            columns,
            cells,
            rows,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[u8]> {
        Ok(&self.cells[self.column_index(name)?])
    }

    pub fn column_at(&self, index: usize) -> &[u8] {
        &self.cells[index]
    }

    pub fn row(&self, index: usize) -> Vec<u8> {
        self.cells.iter().map(|c| c[index]).collect()
    }

    /// True when the column holds a single value (or no rows).
    pub fn is_constant(&self, index: usize) -> bool {
        let col = &self.cells[index];
        col.iter().all(|&c| c == col.first().copied().unwrap_or(0))
    }

    /// Dataset restricted to the given row indices, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            cells: self
                .cells
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            rows: rows.len(),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut cells = vec![Vec::new(); columns.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != columns.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    record.len(),
                    columns.len()
                )));
            }
            for (c, field) in record.iter().enumerate() {
                let bit = match field {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::InvalidDataset(format!(
                            "row {}, column {}: cell {other:?} is not 0 or 1",
                            r + 1,
                            columns[c]
                        )))
                    }
                };
                cells[c].push(bit);
            }
        }
        Self::from_columns(columns, cells)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.columns)?;
        let mut record = Vec::with_capacity(self.columns.len());
        for r in 0..self.rows {
            record.clear();
            record.extend(self.cells.iter().map(|c| if c[r] == 1 { "1" } else { "0" }));
            wtr.write_record(&record)?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Sidecar describing which dataset columns are concepts and which are
/// word features. `assignments` optionally pins each word to one concept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub roles: BTreeMap<String, VariableKind>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assignments: BTreeMap<String, String>,
}

impl Manifest {
    pub fn concepts(&self) -> Vec<String> {
        self.with_role(VariableKind::Concept)
    }

    pub fn features(&self) -> Vec<String> {
        self.with_role(VariableKind::Feature)
    }

    fn with_role(&self, kind: VariableKind) -> Vec<String> {
        self.roles
            .iter()
            .filter(|(_, &k)| k == kind)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Every role names a dataset column and every assignment maps a
    /// feature to a concept.
    pub fn check(&self, data: &Dataset) -> Result<()> {
        for name in self.roles.keys() {
            data.column_index(name)?;
        }
        for (word, concept) in &self.assignments {
            if self.roles.get(word) != Some(&VariableKind::Feature) {
                return Err(Error::InvalidInput(format!(
                    "assignment for {word}, which is not a feature column"
                )));
            }
            if self.roles.get(concept) != Some(&VariableKind::Concept) {
                return Err(Error::InvalidInput(format!(
                    "word {word} assigned to {concept}, which is not a concept column"
                )));
            }
        }
        Ok(())
    }
}
