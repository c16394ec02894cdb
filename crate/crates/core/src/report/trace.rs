use std::io::{Read, Write};

use super::ReportError;
use crate::domain::TracePoint;

/// Writes `query_index,d_min,accepted` rows with a header.
pub fn write_trace_csv<W: Write>(out: W, points: &[TracePoint]) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_writer(out);
    for p in points {
        writer.serialize(p)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TracePoint>, ReportError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers != vec!["query_index", "d_min", "accepted"] {
        return Err(ReportError::SchemaMismatch(format!(
            "trace header is `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(reader
        .deserialize()
        .collect::<Result<Vec<TracePoint>, _>>()?)
}
