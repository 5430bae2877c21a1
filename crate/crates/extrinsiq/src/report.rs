//! Tables written as CSV, with a JSON mirror.

use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::to_json;
use crate::io;

/// A rectangular table of already formatted cells. Empty cells mean "no
/// value".
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Format(e.to_string());
        w.write_record(&self.header).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Format(e.to_string()))
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let fail = |e: csv::Error| CliError::Format(e.to_string());
        let header = r
            .headers()
            .map_err(fail)?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|x| x.iter().map(String::from).collect())
                    .map_err(fail)
            })
            .collect::<CliResult<_>>()?;
        Ok(Self { header, rows })
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Writes `<dir>/<stem>.csv`, and `<dir>/<stem>.json` when `json` is set.
/// The JSON holds the table plus any `extra` breakdown.
pub fn write_table<E: Serialize>(
    dir: &Path,
    stem: &str,
    table: &Table,
    extra: Option<&E>,
    json: bool,
) -> CliResult<()> {
    io::write(&dir.join(format!("{stem}.csv")), &table.to_csv()?)?;
    if json {
        #[derive(Serialize)]
        struct Mirror<'a, E> {
            table: &'a Table,
            #[serde(skip_serializing_if = "Option::is_none")]
            details: Option<&'a E>,
        }
        io::write(
            &dir.join(format!("{stem}.json")),
            &to_json(&Mirror {
                table,
                details: extra,
            })?,
        )?;
    }
    Ok(())
}

pub fn cell(x: f64) -> String {
    format!("{x}")
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

/// Sample standard deviation (divisor n - 1); `None` below two values.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        t.push(vec!["".into(), "0.1".into()]);
        let text = t.to_csv().unwrap();
        assert_eq!(text, "a,b\n1,\"x,y\"\n,0.1\n");
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }

    #[test]
    fn sample_std_of_small_sets() {
        assert_eq!(sample_std(&[1.0]), None);
        assert_eq!(sample_std(&[2.0, 4.0]), Some(2f64.sqrt()));
    }
}
