//! CSV export: header of feature names plus a final integer "class" column.

use std::io::Write;
use std::path::Path;

use super::DatagenError;
use crate::dataset::Dataset;

pub fn write_csv(ds: &Dataset, path: &Path) -> Result<(), DatagenError> {
    let io_err = |source: std::io::Error| DatagenError::Io {
        path: path.display().to_string(),
        source,
    };
    if ds.n_features() == 0 {
        return Err(DatagenError::InvalidSpec("refusing to write a dataset with no features".into()));
    }
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    let mut header = ds.feature_names().join(",");
    header.push_str(",class");
    writeln!(out, "{header}").map_err(io_err)?;
    for i in 0..ds.n_rows() {
        let mut line = String::new();
        for col in ds.columns() {
            line.push_str(&format!("{}", col[i]));
            line.push(',');
        }
        line.push_str(&ds.labels()[i].to_string());
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{simulate_epistatic_dataset, EpistasisSpec};
    use crate::rng::seeded_rng;

    #[test]
    fn line_count_is_rows_plus_header() {
        let spec = EpistasisSpec::new(0.2, 60);
        let mut rng = seeded_rng(4);
        let (ds, _) = simulate_epistatic_dataset(&spec, &mut rng).unwrap();
        let dir = std::env::temp_dir().join("tpot-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("epi.csv");
        write_csv(&ds, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 61);
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("snp_0,"));
        assert!(header.ends_with(",class"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn unwritable_path_reports_context() {
        let ds = {
            let spec = EpistasisSpec::new(0.2, 10);
            let mut rng = seeded_rng(5);
            simulate_epistatic_dataset(&spec, &mut rng).unwrap().0
        };
        let path = std::path::PathBuf::from("/nonexistent-dir-xyz/file.csv");
        match write_csv(&ds, &path) {
            Err(DatagenError::Io { path: p, .. }) => assert!(p.contains("nonexistent")),
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
