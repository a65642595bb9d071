//! Trace files (CSV, one row per iteration) and JSON summaries.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::varqite::TraceRow;

pub fn write_trace<W: std::io::Write>(writer: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: std::io::Read>(reader: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_trace_file(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    write_trace(std::fs::File::create(path)?, rows)
}

pub fn read_trace_file(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    read_trace(std::fs::File::open(path)?)
}

pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
