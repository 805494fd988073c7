use std::path::Path;

use crate::error::{Error, Result};

/// Real-valued samples, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    names: Vec<String>,
    rows: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = names.len();
        if p == 0 {
            return Err(Error::EmptyNodeSet);
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::Invalid(format!("duplicate column name {n:?}")));
            }
        }
        if rows.is_empty() {
            return Err(Error::Invalid("data has no samples".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Invalid(format!(
                    "sample {} has {} values, expected {}",
                    r + 1,
                    row.len(),
                    p
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("sample {} contains {x}", r + 1)));
            }
            values.extend_from_slice(row);
        }
        Ok(DataMatrix {
            names,
            rows: rows.len(),
            values,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    /// Number of samples.
    pub fn m(&self) -> usize {
        self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.p() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.p()..(row + 1) * self.p()]
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(r + 2, format!("not a number: {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(names, rows)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.names)?;
        for r in 0..self.rows {
            w.write_record(self.row(r).iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parses() {
        let d = DataMatrix::from_csv_reader("a,b\n1,2\n3.5,-1\n".as_bytes()).unwrap();
        assert_eq!(d.m(), 2);
        assert_eq!(d.get(1, 0), 3.5);
    }

    #[test]
    fn bad_cell_reports_line() {
        let err = DataMatrix::from_csv_reader("a,b\n1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
