//! Reference datasets and the metrics used to score models against them.
//!
//! Files are plain CSV preceded by one comment line recording the format
//! version, each column's kind and where the data came from:
//!
//! ```text
//! # igss-dataset v1 | kinds=i,n,l | provenance=external
//! runId,grievance,activeLabel
//! 0,0.3125,1
//! ```
//!
//! Values are stored at 9 significant digits, so saving and reloading a
//! dataset gives back exactly the same numbers.

mod metrics;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use metrics::{balanced_accuracy, gini, mse, Confusion};

use crate::error::{Error, Result};

const SCHEMA_TAG: &str = "igss-dataset v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Identifier,
    Numeric,
    Label,
}

impl ColumnKind {
    fn code(self) -> char {
        match self {
            ColumnKind::Identifier => 'i',
            ColumnKind::Numeric => 'n',
            ColumnKind::Label => 'l',
        }
    }

    fn from_code(c: &str) -> Option<Self> {
        Some(match c {
            "i" => ColumnKind::Identifier,
            "n" => ColumnKind::Numeric,
            "l" => ColumnKind::Label,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Column { name: name.into(), kind }
    }
}

/// Rounds to 9 significant digits, the precision at which datasets are
/// written.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Rectangular numeric table with a typed schema, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceDataset {
    columns: Vec<Column>,
    data: Vec<Vec<f64>>,
    rows: usize,
    provenance: String,
}

impl ReferenceDataset {
    /// Builds a dataset from row-major values; every value is quantized.
    pub fn from_rows(columns: Vec<Column>, rows: &[Vec<f64>], provenance: impl Into<String>) -> Result<Self> {
        let mut data = vec![Vec::with_capacity(rows.len()); columns.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Table {
                    row: r + 1,
                    message: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
            for (col, &v) in data.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(columns, data, provenance)
    }

    pub fn from_columns(columns: Vec<Column>, mut data: Vec<Vec<f64>>, provenance: impl Into<String>) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: columns.len(),
                right: data.len(),
            });
        }
        let rows = data.first().map_or(0, Vec::len);
        for (c, values) in columns.iter().zip(&data) {
            if values.len() != rows {
                return Err(Error::Data(format!(
                    "column `{}` has {} values, expected {rows}",
                    c.name,
                    values.len()
                )));
            }
        }
        check_unique(&columns)?;
        for (j, (c, values)) in columns.iter().zip(&mut data).enumerate() {
            for (r, v) in values.iter_mut().enumerate() {
                *v = quantize(*v);
                if c.kind == ColumnKind::Label && *v != 0.0 && *v != 1.0 {
                    return Err(Error::Table {
                        row: r + 1,
                        message: format!("column {} (`{}`) is a label but holds {v}", j + 1, c.name),
                    });
                }
            }
        }
        let provenance = provenance.into().replace(['\n', '\r'], " ");
        Ok(ReferenceDataset {
            columns,
            data,
            rows,
            provenance,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|i| self.data[i].as_slice())
    }

    pub fn column_at(&self, index: usize) -> &[f64] {
        &self.data[index]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.data.iter().map(|c| c[r]).collect()
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Parses CSV text with an optional schema comment line. Without one,
    /// every column is numeric and provenance is `external`.
    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let (kinds, provenance, body): (Option<Vec<ColumnKind>>, String, Box<dyn Read>) =
            if let Some(comment) = first.strip_prefix('#') {
                let (kinds, provenance) = parse_schema_line(comment)?;
                (Some(kinds), provenance, Box::new(reader))
            } else {
                let replay = std::io::Cursor::new(first.into_bytes());
                (None, "external".to_string(), Box::new(replay.chain(reader)))
            };

        let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(body);
        let header: Vec<String> = csv.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Table {
                row: 0,
                message: "missing header".into(),
            });
        }
        let kinds = match kinds {
            Some(k) if k.len() != header.len() => {
                return Err(Error::Table {
                    row: 0,
                    message: format!("schema lists {} kinds for {} columns", k.len(), header.len()),
                })
            }
            Some(k) => k,
            None => vec![ColumnKind::Numeric; header.len()],
        };
        let columns: Vec<Column> = header.into_iter().zip(kinds).map(|(n, k)| Column::new(n, k)).collect();
        check_unique(&columns)?;

        let mut data = vec![Vec::new(); columns.len()];
        for (r, record) in csv.records().enumerate() {
            let record = record?;
            let row = r + 1;
            if record.len() != columns.len() {
                return Err(Error::Table {
                    row,
                    message: format!("expected {} fields, found {}", columns.len(), record.len()),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Table {
                    row,
                    message: format!("column {} (`{}`): `{cell}` is not a number", j + 1, columns[j].name),
                })?;
                data[j].push(v);
            }
        }
        Self::from_columns(columns, data, provenance)
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        let kinds: Vec<String> = self.columns.iter().map(|c| c.kind.code().to_string()).collect();
        writeln!(out, "# {SCHEMA_TAG} | kinds={} | provenance={}", kinds.join(","), self.provenance)?;
        let mut w = csv::WriterBuilder::new().from_writer(out);
        w.write_record(self.names())?;
        let mut cells = Vec::with_capacity(self.columns.len());
        for r in 0..self.rows {
            cells.clear();
            cells.extend(self.data.iter().map(|c| c[r].to_string()));
            w.write_record(&cells)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_unique(columns: &[Column]) -> Result<()> {
    for (j, c) in columns.iter().enumerate() {
        if let Some(k) = columns[..j].iter().position(|o| o.name == c.name) {
            return Err(Error::Table {
                row: 0,
                message: format!("duplicate column `{}` at columns {} and {}", c.name, k + 1, j + 1),
            });
        }
    }
    Ok(())
}

fn parse_schema_line(comment: &str) -> Result<(Vec<ColumnKind>, String)> {
    let bad = |m: String| Error::Table { row: 0, message: m };
    let mut parts = comment.trim().splitn(3, " | ");
    let tag = parts.next().unwrap_or("");
    if tag != SCHEMA_TAG {
        return Err(bad(format!("unsupported schema line `{}`", comment.trim())));
    }
    let kinds = parts
        .next()
        .and_then(|p| p.strip_prefix("kinds="))
        .ok_or_else(|| bad("schema line lacks kinds".into()))?;
    let kinds = kinds
        .split(',')
        .map(|k| ColumnKind::from_code(k.trim()).ok_or_else(|| bad(format!("unknown column kind `{k}`"))))
        .collect::<Result<Vec<_>>>()?;
    let provenance = parts
        .next()
        .and_then(|p| p.strip_prefix("provenance="))
        .unwrap_or("external")
        .to_string();
    Ok((kinds, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReferenceDataset {
        ReferenceDataset::from_rows(
            vec![
                Column::new("id", ColumnKind::Identifier),
                Column::new("x", ColumnKind::Numeric),
                Column::new("y", ColumnKind::Label),
            ],
            &[vec![0.0, 1.5, 1.0], vec![1.0, -0.1, 0.0], vec![2.0, 1.0 / 3.0, 1.0]],
            "unit test",
        )
        .unwrap()
    }

    fn round_trip(d: &ReferenceDataset) -> ReferenceDataset {
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        ReferenceDataset::read_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn save_load_round_trip() {
        let d = sample();
        assert_eq!(round_trip(&d), d);
        assert_eq!(d.column("x").unwrap()[2], 0.333333333);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        d.save_csv(&path).unwrap();
        assert_eq!(ReferenceDataset::load_csv(&path).unwrap(), d);
    }

    #[test]
    fn quantization_keeps_nine_digits() {
        assert_eq!(quantize(0.1234567891234), 0.123456789);
        assert_eq!(quantize(123456.7891), 123456.789);
        assert_eq!(quantize(-2.0), -2.0);
        let x = 0.987654321987;
        assert_eq!(quantize(quantize(x)), quantize(x));
    }

    #[test]
    fn plain_csv_without_schema() {
        let d = ReferenceDataset::read_from("a,b\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.provenance(), "external");
        assert_eq!(d.column("b").unwrap(), &[2.0, 4.0]);
    }

    #[test]
    fn ragged_row_reports_row() {
        let err = ReferenceDataset::read_from("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Table { row: 2, .. }), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let err = ReferenceDataset::read_from("a,b\n1,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Table { row: 1, ref message } if message.contains("column 2")), "{err}");
    }

    #[test]
    fn duplicate_columns_rejected() {
        let err = ReferenceDataset::read_from("a,b,a\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate column `a`"), "{err}");
    }

    #[test]
    fn labels_must_be_binary() {
        let text = "# igss-dataset v1 | kinds=l | provenance=x\nlab\n2\n";
        assert!(ReferenceDataset::read_from(text.as_bytes()).is_err());
    }
}
