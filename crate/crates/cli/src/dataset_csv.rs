//! `value,epsilon` files: one row per user, `inf` for a public user.

use std::io::Write;
use std::path::Path;

use hetdp::{Dataset, PrivacyDemand, Task};

use crate::error::{io_error, CliError, Result};

pub fn parse_epsilon(field: &str) -> std::result::Result<f64, String> {
    let field = field.trim();
    let eps = if field.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        field
            .parse::<f64>()
            .map_err(|_| format!("epsilon `{field}` is not a number"))?
    };
    if eps > 0.0 {
        Ok(eps)
    } else {
        Err(format!("epsilon must be positive, got `{field}`"))
    }
}

pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_owned()
    } else {
        x.to_string()
    }
}

/// Reads users in row order. Bin values are 1-indexed and must not exceed
/// `k`; scalar values must lie in `[0, 1]`.
pub fn ingest_csv(path: &Path, task: Task) -> Result<(Dataset, PrivacyDemand)> {
    let file = std::fs::File::open(path).map_err(io_error(path))?;
    read_dataset(file, path, task)
}

pub fn read_dataset(
    reader: impl std::io::Read,
    path: &Path,
    task: Task,
) -> Result<(Dataset, PrivacyDemand)> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let row_error = |row: usize, message: String| CliError::Row {
        path: path.to_owned(),
        row,
        message,
    };
    let headers = csv.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "epsilon" {
        return Err(row_error(0, "header must be `value,epsilon`".into()));
    }

    let mut bins = Vec::new();
    let mut values = Vec::new();
    let mut eps = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| row_error(row, e.to_string()))?;
        if record.len() != 2 {
            return Err(row_error(row, format!("expected 2 fields, got {}", record.len())));
        }
        match task {
            Task::Frequency { k } => {
                let bin: usize = record[0]
                    .parse()
                    .map_err(|_| row_error(row, format!("bin `{}` is not an integer", &record[0])))?;
                if !(1..=k).contains(&bin) {
                    return Err(row_error(row, format!("bin {bin} outside 1..={k}")));
                }
                bins.push(bin);
            }
            Task::Mean => {
                let x: f64 = record[0]
                    .parse()
                    .map_err(|_| row_error(row, format!("value `{}` is not a number", &record[0])))?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(row_error(row, format!("value {x} outside [0, 1]")));
                }
                values.push(x);
            }
        }
        eps.push(parse_epsilon(&record[1]).map_err(|m| row_error(row, m))?);
    }
    if eps.is_empty() {
        return Err(row_error(0, "no users".into()));
    }
    let data = match task {
        Task::Frequency { k } => Dataset::categorical(k, bins)?,
        Task::Mean => Dataset::scalar(values)?,
    };
    Ok((data, PrivacyDemand::new(eps)?))
}

pub fn write_dataset(out: impl Write, data: &Dataset, eps: &PrivacyDemand) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["value", "epsilon"])?;
    let values: Vec<String> = match data {
        Dataset::Categorical { records, .. } => records.iter().map(|r| r.to_string()).collect(),
        Dataset::Scalar { records } => records.iter().map(|x| format_real(*x)).collect(),
    };
    for (v, &e) in values.iter().zip(eps.as_slice()) {
        csv.write_record([v.as_str(), &format_real(e)])?;
    }
    csv.flush().map_err(io_error("<csv output>"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, task: Task) -> Result<(Dataset, PrivacyDemand)> {
        read_dataset(text.as_bytes(), Path::new("mem.csv"), task)
    }

    #[test]
    fn parses_bins_and_inf() {
        let (d, e) = read("value,epsilon\n1,0.5\n2,inf\n", Task::Frequency { k: 2 }).unwrap();
        assert_eq!(d, Dataset::categorical(2, vec![1, 2]).unwrap());
        assert_eq!(e.as_slice(), &[0.5, f64::INFINITY]);
    }

    #[test]
    fn range_errors_name_the_row() {
        let err = read("value,epsilon\n1,1\n0,0.5\n", Task::Frequency { k: 2 }).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(read("value,epsilon\n1.5,1\n", Task::Mean).is_err());
        assert!(read("value,epsilon\n0.5,-1\n", Task::Mean).is_err());
        assert!(read("value,epsilon\n0.5,abc\n", Task::Mean).is_err());
        assert!(read("x,y\n0.5,1\n", Task::Mean).is_err());
        let err = read("value,epsilon\n0.5,1\n0.2\n", Task::Mean).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn write_then_read_round_trips() {
        let data = Dataset::scalar(vec![0.1, 1.0 / 3.0, 1.0]).unwrap();
        let eps = PrivacyDemand::new(vec![0.25, f64::INFINITY, 1e-7]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data, &eps).unwrap();
        let (d, e) = read(std::str::from_utf8(&buf).unwrap(), Task::Mean).unwrap();
        assert_eq!((d, e), (data, eps));
    }
}
