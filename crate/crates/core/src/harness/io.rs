//! Trace CSV files.

use std::path::Path;

use crate::driver::IterationRecord;
use crate::error::Result;

/// Fixed column order of trace files.
pub const TRACE_COLUMNS: [&str; 10] = [
    "iter",
    "f_true",
    "f_noisy",
    "gnorm_true",
    "gnorm_noisy",
    "delta",
    "rho",
    "accepted",
    "step_norm",
    "dist",
];

pub fn write_trace_csv<W: std::io::Write>(out: W, records: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(TRACE_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_trace_file(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trace_csv(std::io::BufWriter::new(file), records)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<IterationRecord>> {
    read_trace_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize, rho: f64, dist: Option<f64>) -> IterationRecord {
        IterationRecord {
            k,
            f_true: 0.1 + k as f64 / 3.0,
            f_noisy: -1.0e-300,
            grad_norm_true: std::f64::consts::PI * 1e17,
            grad_norm_noisy: 5e-324,
            delta: 1.0 / 7.0,
            rho,
            accepted: rho > 0.1,
            step_norm: 0.0,
            dist_to_solution: dist,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let records = vec![
            rec(0, f64::NEG_INFINITY, Some(2.5)),
            rec(1, 0.1 + 0.2, None),
            rec(2, -7.3e12, Some(0.0)),
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn empty_trace_has_header() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), TRACE_COLUMNS.join(","));
    }
}
