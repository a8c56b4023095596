//! CSV ingestion: numeric features, a named label column mapped to dense
//! integer codes. Whole-number label sets that already form 0..C-1 keep
//! their own codes so generator output round-trips unchanged; anything else
//! is coded in first-appearance order.

use std::path::Path;

use tpot_core::dataset::Dataset;

use crate::error::CliError;

#[derive(Debug)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// code -> original label string
    pub label_mapping: Vec<String>,
}

pub fn load_csv(path: &Path, label_column: &str) -> Result<LoadedCsv, CliError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::ReadData { path: display.clone(), source })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::CsvSchema { path: display.clone(), message: "empty file".into() })?;
    let columns_in: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_idx = columns_in.iter().position(|&c| c == label_column).ok_or_else(|| {
        CliError::CsvSchema {
            path: display.clone(),
            message: format!("label column `{label_column}` not found in header"),
        }
    })?;
    let feature_names: Vec<String> = columns_in
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_idx)
        .map(|(_, c)| c.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(CliError::CsvSchema {
            path: display.clone(),
            message: "no feature columns besides the label".into(),
        });
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_names.len()];
    let mut raw_labels: Vec<String> = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns_in.len() {
            return Err(CliError::CsvParse {
                path: display.clone(),
                line: line_no + 1,
                column: 0,
                message: format!(
                    "expected {} cells, found {}",
                    columns_in.len(),
                    cells.len()
                ),
            });
        }
        let mut feature_slot = 0;
        for (j, cell) in cells.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(cell.to_string());
            } else {
                let value: f64 = cell.parse().map_err(|_| CliError::CsvParse {
                    path: display.clone(),
                    line: line_no + 1,
                    column: j + 1,
                    message: format!("non-numeric feature cell `{cell}`"),
                })?;
                columns[feature_slot].push(value);
                feature_slot += 1;
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(CliError::CsvSchema { path: display, message: "no data rows".into() });
    }

    let (labels, label_mapping) = encode_labels(&raw_labels);
    let class_count = label_mapping.len();
    let dataset = Dataset::new(feature_names, columns, labels, None, class_count)
        .map_err(|e| CliError::Data(format!("{display}: {e}")))?;
    Ok(LoadedCsv { dataset, label_mapping })
}

fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    // identity mapping when the labels are already dense 0..C-1 integers
    if let Some(parsed) = raw
        .iter()
        .map(|s| s.parse::<usize>().ok())
        .collect::<Option<Vec<usize>>>()
    {
        let distinct: std::collections::BTreeSet<usize> = parsed.iter().copied().collect();
        let dense = distinct.len() >= 2
            && *distinct.iter().next_back().unwrap() == distinct.len() - 1;
        if dense {
            let mapping = (0..distinct.len()).map(|c| c.to_string()).collect();
            return (parsed, mapping);
        }
    }
    // otherwise first-appearance order
    let mut mapping: Vec<String> = Vec::new();
    let labels = raw
        .iter()
        .map(|s| match mapping.iter().position(|m| m == s) {
            Some(code) => code,
            None => {
                mapping.push(s.clone());
                mapping.len() - 1
            }
        })
        .collect();
    (labels, mapping)
}
