//! Electrode recordings as CSV: one column per channel, one row per sample,
//! with an optional header row of channel labels.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::signal::SignalMatrix;

pub fn load_csv(path: impl AsRef<Path>) -> Result<SignalMatrix> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file)
}

/// Row and column numbers in errors are 1-based and count the header line.
pub fn read_csv(reader: impl Read) -> Result<SignalMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut labels: Option<Vec<String>> = None;
    let mut samples: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse { row, column: 0, message: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(Error::Parse {
                    row,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} columns, found {}", record.len()),
                });
            }
        }
        width = Some(record.len());

        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse::<f64>().ok()).collect();
        if labels.is_none() && samples.is_empty() && parsed.iter().all(Option::is_none) {
            labels = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, (cell, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match cell {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: col + 1,
                        message: format!("not a finite number: {raw:?}"),
                    })
                }
            }
        }
        samples.push(values);
    }

    let Some(channels) = width else {
        return Err(Error::Parse { row: 0, column: 0, message: "empty file".into() });
    };
    if samples.is_empty() {
        return Err(Error::TooFewSamples { got: 0, min: 2 });
    }
    let m = DMatrix::from_fn(channels, samples.len(), |i, t| samples[t][i]);
    let s = SignalMatrix::new(m)?;
    match labels {
        Some(l) => s.with_labels(l),
        None => Ok(s),
    }
}

pub fn write_csv(signal: &SignalMatrix, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    if let Some(labels) = signal.labels() {
        w.write_record(labels).map_err(io)?;
    }
    for t in 0..signal.samples() {
        w.write_record((0..signal.channels()).map(|i| signal.get(i, t).to_string()))
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(signal: &SignalMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    write_csv(signal, file)
}
