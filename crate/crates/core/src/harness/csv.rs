use std::path::Path;

use super::HarnessError;

pub const IMPULSES_HEADER: [&str; 8] = ["n", "t_n", "delta_n", "beta_n", "A_n", "B_n", "norm_before", "norm_after"];
pub const CASES_HEADER: [&str; 8] = ["t_days", "cumulative_cases", "new_cases_per_day", "S", "V", "E", "I", "R"];

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => HarnessError::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes a header and rows of pre-formatted cells, LF line endings.
pub(crate) fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let err = |e| csv_err(path, e);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.as_ref()).map_err(err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Reads a numeric CSV written by this crate.
pub fn read_csv(path: &Path) -> Result<CsvTable, HarnessError> {
    let err = |e| csv_err(path, e);
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let header = r.headers().map_err(err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(err)?;
        let row = rec
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| HarnessError::Format {
                    path: path.to_path_buf(),
                    message: format!("row {}: bad number `{c}`", k + 1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 11.827499073502] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![vec![fmt_num(1.0), fmt_num(f64::NEG_INFINITY)], vec!["2".to_string(), fmt_num(0.5)]];
        write_rows(&path, &["a", "b"], &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("a,b\n") && text.ends_with('\n') && !text.contains('\r'));
        let t = read_csv(&path).unwrap();
        assert_eq!(t.column("a").unwrap(), vec![1.0, 2.0]);
        assert_eq!(t.rows[0][1], f64::NEG_INFINITY);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n3\n").unwrap();
        assert!(matches!(read_csv(&path), Err(HarnessError::Format { .. })));
    }
}
