//! Sample and grid files: headerless CSV, one point per row, one column per
//! coordinate. Floats are written in shortest round-trip form, so a sample
//! read back is bitwise equal to the one written.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use swinfer_core::Sample;

use crate::error::{CliError, CliResult};

fn reader<R: Read>(src: R, header: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(src)
}

fn parse_rows<R: Read>(src: R, header: bool, what: &str) -> CliResult<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, rec) in reader(src, header).records().enumerate() {
        let rec = rec.map_err(|e| CliError::input(format!("{what}: {e}")))?;
        let row = rec
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| CliError::input(format!("{what}: row {}: not a number: {field:?}", i + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(CliError::input(format!(
                    "{what}: row {} has {} columns, expected {first}",
                    i + 1,
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_sample<R: Read>(src: R, header: bool, what: &str) -> CliResult<Sample> {
    let rows = parse_rows(src, header, what)?;
    if rows.is_empty() {
        return Err(CliError::input(format!("{what}: no data rows")));
    }
    Sample::from_rows(&rows).map_err(|e| CliError::input(format!("{what}: {e}")))
}

pub fn read_sample(path: &Path, header: bool) -> CliResult<Sample> {
    let file = File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_sample(file, header, &path.display().to_string())
}

pub fn write_sample<W: Write>(out: W, s: &Sample) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for p in s.points() {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// A parameter grid, optionally with a first row of column names.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub names: Option<Vec<String>>,
    pub points: Vec<Vec<f64>>,
}

pub fn read_grid(path: &Path) -> CliResult<GridFile> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let what = path.display().to_string();
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    let named = first.is_some_and(|l| l.split(',').any(|f| f.trim().parse::<f64>().is_err()));
    let names = if named {
        let line = first.expect("checked above");
        Some(line.split(',').map(|f| f.trim().to_string()).collect::<Vec<_>>())
    } else {
        None
    };
    let points = parse_rows(text.as_bytes(), named, &what)?;
    if points.is_empty() {
        return Err(CliError::input(format!("{what}: grid has no points")));
    }
    if let Some(n) = &names {
        if n.len() != points[0].len() {
            return Err(CliError::input(format!("{what}: {} names for {} columns", n.len(), points[0].len())));
        }
    }
    Ok(GridFile { names, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::f64::consts::PI, 5e-324];
        let s = Sample::from_flat(vals.iter().flat_map(|&v| [v, -v]).collect(), 2).unwrap();
        let mut buf = Vec::new();
        write_sample(&mut buf, &s).unwrap();
        let back = parse_sample(buf.as_slice(), false, "buf").unwrap();
        assert_eq!(back.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), s.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(parse_sample("1,2\n3\n".as_bytes(), false, "t").is_err());
        assert!(parse_sample("1\nfoo\n".as_bytes(), false, "t").is_err());
        assert!(parse_sample("".as_bytes(), false, "t").is_err());
        assert!(parse_sample("x\n1\n2\n".as_bytes(), false, "t").is_err());
        assert_eq!(parse_sample("x\n1\n2\n".as_bytes(), true, "t").unwrap().n(), 2);
    }
}
