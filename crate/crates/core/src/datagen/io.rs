//! LIBSVM-style sparse text and CSV readers and writers.
//!
//! Reals are written with Rust's shortest round-trip formatting, so a dataset
//! written and read back compares equal.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    Libsvm,
    Csv,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads `<label> <index>:<value> ...` lines with 1-based, strictly ascending
/// indices. Missing indices are zero; the dimension is the largest index seen.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad label {label_tok:?}")))?;
        let mut entries = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index in {tok:?}")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value in {tok:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(lineno, format!("index {idx} is not ascending")));
            }
            if !val.is_finite() || !label.is_finite() {
                return Err(parse_err(lineno, "non-finite value"));
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        dim = dim.max(last);
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no samples"));
    }
    let mut x = Array2::zeros((rows.len(), dim));
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            x[[i, j]] = v;
        }
    }
    Dataset::new(x, Array1::from(labels))
}

/// Writes nonzero entries of each row. The last column is always written so
/// the dimension survives a round trip.
pub fn write_libsvm<W: Write>(data: &Dataset, mut w: W) -> std::io::Result<()> {
    let d = data.dim();
    for i in 0..data.len() {
        write!(w, "{}", data.labels()[i])?;
        for (j, &v) in data.row(i).iter().enumerate() {
            if v != 0.0 || j + 1 == d {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a comma-separated numeric table. The first row is treated as a header
/// when any of its cells is not a number. `label_column = None` selects the
/// last column.
pub fn parse_csv<R: Read>(reader: R, label_column: Option<usize>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    let mut width = None;
    let mut label_col = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(r + 1, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(r + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = rec.iter().map(|c| c.parse().ok()).collect();
        if r == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        let w = *width.get_or_insert_with(|| rec.len());
        if rec.len() != w {
            return Err(parse_err(line, format!("expected {w} columns, found {}", rec.len())));
        }
        if labels.is_empty() {
            label_col = label_column.unwrap_or(w.saturating_sub(1));
            if label_col >= w {
                return Err(parse_err(line, format!("label column {label_col} out of range")));
            }
        }
        for (c, v) in parsed.iter().enumerate() {
            let v = v.ok_or_else(|| {
                parse_err(line, format!("column {}: non-numeric cell {:?}", c + 1, &rec[c]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value", c + 1)));
            }
            if c == label_col {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = labels.len();
    if n == 0 {
        return Err(parse_err(0, "no samples"));
    }
    let d = values.len() / n;
    let x = Array2::from_shape_vec((n, d), values).map_err(|e| Error::invalid(e.to_string()))?;
    Dataset::new(x, Array1::from(labels))
}

/// Writes `x1,...,xd,y` with a header row and the label last.
pub fn write_csv<W: Write>(data: &Dataset, w: W) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    wr.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.labels()[i].to_string());
        wr.write_record(&rec)?;
    }
    wr.flush()
}

pub fn read_dataset(path: &Path, format: FileFormat, label_column: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        FileFormat::Libsvm => parse_libsvm(reader),
        FileFormat::Csv => parse_csv(reader, label_column),
    }
}

pub fn write_dataset(path: &Path, data: &Dataset, format: FileFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        FileFormat::Libsvm => write_libsvm(data, &mut w),
        FileFormat::Csv => write_csv(data, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn libsvm_basic_line() {
        let d = parse_libsvm("1.5 1:2.0 3:-1\n".as_bytes()).unwrap();
        assert_eq!(d.labels().to_vec(), vec![1.5]);
        assert_eq!(d.row(0).to_vec(), vec![2.0, 0.0, -1.0]);
    }

    #[test]
    fn libsvm_empty_feature_list() {
        let d = parse_libsvm("3\n1 2:4\n".as_bytes()).unwrap();
        assert_eq!(d.row(0).to_vec(), vec![0.0, 0.0]);
        assert_eq!(d.row(1).to_vec(), vec![0.0, 4.0]);
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        for (text, line) in [
            ("1 1:2\n2 1:x\n", 2),
            ("1 2:1 1:3\n", 1),
            ("1 0:1\n", 1),
            ("\nfoo 1:1\n", 2),
            ("1 1-2\n", 1),
        ] {
            match parse_libsvm(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(parse_libsvm("".as_bytes()).is_err());
    }

    #[test]
    fn libsvm_two_line_round_trip() {
        let text = "1.5 1:2 3:-1\n-0.25 2:0.1\n";
        let d = parse_libsvm(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_libsvm(&d, &mut out).unwrap();
        let back = parse_libsvm(out.as_slice()).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn csv_with_header() {
        let d = parse_csv("x,y\n1,2\n3,4".as_bytes(), None).unwrap();
        assert_eq!(d.features().column(0).to_vec(), vec![1.0, 3.0]);
        assert_eq!(d.labels().to_vec(), vec![2.0, 4.0]);
        let d = parse_csv("1,2,3\n4,5,6\n".as_bytes(), Some(0)).unwrap();
        assert_eq!(d.labels().to_vec(), vec![1.0, 4.0]);
        assert_eq!(d.row(1).to_vec(), vec![5.0, 6.0]);
    }

    #[test]
    fn csv_errors() {
        match parse_csv("1,2\n3,4,5\n".as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_csv("a,b\n1,2\n3,x\n".as_bytes(), None) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("column 2"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_csv("a,b\n".as_bytes(), None).is_err());
        assert!(parse_csv("1,2\n".as_bytes(), Some(5)).is_err());
    }

    fn dataset() -> impl Strategy<Value = Dataset> {
        (1usize..6, 0usize..4).prop_flat_map(|(n, d)| {
            (
                prop::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6], n * d),
                prop::collection::vec(-1e6f64..1e6, n),
            )
                .prop_map(move |(x, y)| {
                    Dataset::new(
                        Array2::from_shape_vec((n, d), x).unwrap(),
                        Array1::from(y),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(d in dataset()) {
            let mut out = Vec::new();
            write_csv(&d, &mut out).unwrap();
            prop_assert_eq!(parse_csv(out.as_slice(), None).unwrap(), d);
        }

        #[test]
        fn libsvm_round_trip(d in dataset()) {
            let mut out = Vec::new();
            write_libsvm(&d, &mut out).unwrap();
            prop_assert_eq!(parse_libsvm(out.as_slice()).unwrap(), d);
        }
    }
}
