//! Number formatting and writers for CSV and JSON outputs.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Number, Value};

/// 17 significant digits; round-trips every finite `f64`.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// JSON number at 17 significant digits, `null` when not finite.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt(x)).expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

/// `path`, or standard output for `-`.
pub fn sink(path: &Path) -> io::Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdout()))
    } else {
        Ok(Box::new(io::BufWriter::new(File::create(path)?)))
    }
}

pub fn csv_writer(path: &Path) -> io::Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(path)?))
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [40.5128219950085, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = fmt(x);
            assert_eq!(f64::from_str(&s).unwrap(), x);
            let v = num(x);
            assert_eq!(v.as_f64().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
