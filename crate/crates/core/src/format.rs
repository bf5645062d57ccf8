//! JSON emission with fixed 17-significant-digit floats.
//!
//! Every file the toolkit writes goes through [`to_json`], so the textual
//! form of a given value is identical across runs and platforms.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};

struct SigFigFormatter;

impl Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value == 0.0 {
            // normalise -0.0
            return writer.write_all(b"0.0000000000000000e0");
        }
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize `value` to a single-line JSON document terminated by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter);
        value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    }
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Parse JSON text, mapping syntax errors to [`Error::Parse`] with line/column.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json(&vec![0.1_f64, -2.5, 0.0, -0.0]).unwrap();
        assert_eq!(
            s.trim(),
            "[1.0000000000000001e-1,-2.5000000000000000e0,0.0000000000000000e0,0.0000000000000000e0]"
        );
        let back: Vec<f64> = from_json(&s).unwrap();
        assert_eq!(back[0], 0.1);
    }

    #[test]
    fn syntax_errors_report_line() {
        let err = from_json::<Vec<f64>>("[1.0,\n 2.0,,]").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
