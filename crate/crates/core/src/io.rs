//! Line-oriented JSON and CSV emission with every float written at 17
//! significant digits, so files parse back to the exact bits.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};

/// `{:.16e}`: one leading digit plus sixteen decimals.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Copy, Default)]
struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(fmt_f64(value as f64).as_bytes())
    }
}

/// Compact single-line JSON with full-precision floats.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `lines` joined by newlines, creating parent directories.
pub fn write_lines<I, S>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        w.write_all(line.as_ref().as_bytes()).map_err(|e| Error::io(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

/// Rectangular CSV with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return Err(Error::DimensionMismatch(format!(
                "CSV row {i} has {} fields, header has {}",
                r.len(),
                header.len()
            )));
        }
    }
    let lines = std::iter::once(header.join(",")).chain(rows.iter().map(|r| r.join(",")));
    write_lines(path, lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(to_json_line(&vec![0.25, 1.0]).unwrap(), "[2.5000000000000000e-1,1.0000000000000000e0]");
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let line = to_json_line(&vec![x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&line).unwrap();
            prop_assert_eq!(back[0].to_bits(), x.to_bits());
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
