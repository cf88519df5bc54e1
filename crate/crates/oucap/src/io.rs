//! Deterministic serialization helpers. All floating-point output is written
//! with 17 significant digits so records round-trip losslessly and repeated
//! runs compare byte-for-byte.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};

/// JSON formatter printing every float as `{:.16e}` (17 significant digits).
#[derive(Default)]
pub struct SigDigitFormatter;

impl Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            // JSON has no infinities; the experiments never emit them, but a
            // readable token beats a panic
            write!(writer, "\"{value}\"")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize with the 17-digit float convention.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let bytes = to_json_bytes(value)?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(format!("non-utf8 JSON: {e}")))
}

/// Write bytes atomically: a temp file in the same directory, then a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Format one float for CSV cells with the same 17-digit convention.
pub fn csv_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// Assemble a CSV document (header plus rows, comma-separated, UTF-8).
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
