//! Row emission: CSV (single header row, LF line endings) or JSON-lines,
//! to stdout or a file, plus the dB conversions that stay out of the library.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use mimo_uplink::{Error, Result};

// One emitter exists per process; the size gap between variants is moot.
#[allow(clippy::large_enum_variant)]
enum Format {
    Csv(csv::Writer<Box<dyn Write>>),
    JsonLines(Box<dyn Write>),
}

pub struct Emitter {
    format: Format,
}

impl Emitter {
    pub fn new(out: Option<&Path>, json: bool) -> Result<Self> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(
                File::create(path)
                    .map_err(|e| Error::domain(format!("cannot create {}: {e}", path.display())))?,
            ),
            None => Box::new(io::stdout()),
        };
        let format = if json {
            Format::JsonLines(sink)
        } else {
            Format::Csv(
                csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(sink),
            )
        };
        Ok(Emitter { format })
    }

    pub fn emit<T: Serialize>(&mut self, row: &T) -> Result<()> {
        match &mut self.format {
            Format::Csv(w) => w.serialize(row).map_err(write_error),
            Format::JsonLines(w) => {
                serde_json::to_writer(&mut *w, row).map_err(write_error)?;
                w.write_all(b"\n").map_err(write_error)
            }
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.format {
            Format::Csv(mut w) => w.flush().map_err(write_error),
            Format::JsonLines(mut w) => w.flush().map_err(write_error),
        }
    }
}

fn write_error(e: impl std::fmt::Display) -> Error {
    Error::domain(format!("cannot write output: {e}"))
}

/// Interprets a power argument: dB in, linear out when `db` is set.
pub fn power_in(x: f64, db: bool) -> f64 {
    if db {
        10f64.powf(x / 10.0)
    } else {
        x
    }
}

/// Renders a power output; in dB mode nonpositive powers have no finite
/// representation and come out as an empty cell.
pub fn power_out(x: f64, db: bool) -> Option<f64> {
    if !db {
        return Some(x);
    }
    (x.is_finite() && x > 0.0).then(|| 10.0 * x.log10())
}

pub fn power_out_opt(x: Option<f64>, db: bool) -> Option<f64> {
    x.and_then(|v| power_out(v, db))
}
