//! CSV reading and writing. Comma separated, `.` decimal, UTF-8, header row
//! mandatory; floats are written in Rust's shortest round-trip form so equal
//! runs produce byte-identical files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use distboost_core::baselearner::Dataset;

/// The parsed input: covariate columns in file order with the response
/// column split out.
#[derive(Debug)]
pub struct CsvData {
    pub dataset: Dataset,
    pub response_column: String,
}

pub fn read_dataset(bytes: &[u8], response: &str) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .context("reading the CSV header row")?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let Some(response_idx) = headers.iter().position(|h| h == response) else {
        bail!(
            "response column '{response}' not found; available columns: {}",
            headers.join(", ")
        );
    };

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading CSV row {}", row_idx + 2))?;
        if record.len() != headers.len() {
            bail!(
                "row {} has {} fields, expected {}",
                row_idx + 2,
                record.len(),
                headers.len()
            );
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().with_context(|| {
                format!(
                    "column '{}', row {}: cannot parse '{}' as a number",
                    headers[col],
                    row_idx + 2,
                    field
                )
            })?;
            columns[col].push(value);
        }
    }

    let response_values = columns.remove(response_idx);
    let mut names = headers;
    names.remove(response_idx);
    let dataset = Dataset::new(columns, names, response_values)
        .context("validating the parsed dataset")?;
    Ok(CsvData {
        dataset,
        response_column: response.to_string(),
    })
}

/// Writes one CSV with the given header and stringified rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Shortest round-trip decimal form; what all result CSVs use for floats.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_splits_the_response() {
        let csv = "x1,y,x2\n1.0,3,0.5\n2.0,4,-0.25\n";
        let data = read_dataset(csv.as_bytes(), "y").unwrap();
        assert_eq!(data.dataset.column_names(), &["x1", "x2"]);
        assert_eq!(data.dataset.response(), &[3.0, 4.0]);
        assert_eq!(data.dataset.column(1), &[0.5, -0.25]);
    }

    #[test]
    fn helpful_errors() {
        let csv = "x1,y\n1.0,2.0\n";
        let err = read_dataset(csv.as_bytes(), "z").unwrap_err();
        assert!(err.to_string().contains("'z' not found"));

        let csv = "x1,y\noops,2.0\n1.0,3.0\n";
        let err = format!("{:#}", read_dataset(csv.as_bytes(), "y").unwrap_err());
        assert!(err.contains("column 'x1'"), "{err}");
        assert!(err.contains("row 2"), "{err}");
    }
}
