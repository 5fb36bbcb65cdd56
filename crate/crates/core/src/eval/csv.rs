//! CSV dataset format.
//!
//! First line is the header `# m=<m> C=<C>`; every following line holds `m`
//! feature values in [0, 1] and one integer label. Errors carry the line
//! number (1-based).

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

fn header_error(detail: impl Into<String>) -> Error {
    Error::CsvFormat {
        line: 1,
        detail: detail.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| header_error("expected header '# m=<m> C=<C>'"))?;
    let mut m = None;
    let mut c = None;
    for field in body.split_whitespace() {
        if let Some(v) = field.strip_prefix("m=") {
            m = Some(v.parse::<usize>().map_err(|_| header_error(format!("invalid m '{v}'")))?);
        } else if let Some(v) = field.strip_prefix("C=") {
            c = Some(v.parse::<usize>().map_err(|_| header_error(format!("invalid C '{v}'")))?);
        } else {
            return Err(header_error(format!("unexpected header field '{field}'")));
        }
    }
    match (m, c) {
        (Some(m), Some(c)) if m > 0 && c > 0 => Ok((m, c)),
        _ => Err(header_error("header must declare positive m and C")),
    }
}

/// Loads a CSV dataset. Out-of-range values are rejected, not clamped.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| header_error("empty file, expected header '# m=<m> C=<C>'"))?;
    let (m, class_count) = parse_header(header)?;

    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != m + 1 {
            return Err(Error::CsvFormat {
                line: line_no,
                detail: format!("expected {} fields ({} features + label), found {}", m + 1, m, fields.len()),
            });
        }
        for field in &fields[..m] {
            let v: f32 = field.parse().map_err(|_| Error::CsvFormat {
                line: line_no,
                detail: format!("non-numeric feature '{field}'"),
            })?;
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::CsvFormat {
                    line: line_no,
                    detail: format!("feature value {v} outside [0, 1]"),
                });
            }
            inputs.push(v);
        }
        let label: usize = fields[m].parse().map_err(|_| Error::CsvFormat {
            line: line_no,
            detail: format!("non-integer label '{}'", fields[m]),
        })?;
        if label >= class_count {
            return Err(Error::CsvFormat {
                line: line_no,
                detail: format!("label {label} out of range for C={class_count}"),
            });
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} holds a header but no data rows",
            path.as_ref().display()
        )));
    }
    Dataset::new(inputs, labels, m, class_count)
}

/// Writes a dataset in the same CSV format.
pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# m={} C={}\n", data.input_dim(), data.class_count()));
    for i in 0..data.len() {
        let mut fields: Vec<String> = data.sample(i).iter().map(|v| format!("{v:.8e}")).collect();
        fields.push(data.label(i).to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
