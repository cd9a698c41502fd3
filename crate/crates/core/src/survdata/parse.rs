use std::io::Read;

use super::{Dataset, Observation, Time};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    /// Header `z1,d1,z2,d2`, one observation per record.
    #[default]
    Csv,
}

const HEADER: [&str; 4] = ["z1", "d1", "z2", "d2"];

pub fn parse_dataset<R: Read>(input: R, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => parse_csv(input),
    }
}

fn parse_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Parse {
            line: header.position().map_or(1, |p| p.line()),
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }
    let mut observations = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let fail = |message: String| Error::Parse { line, message };
        if record.len() != 4 {
            return Err(fail(format!("expected 4 fields, found {}", record.len())));
        }
        let time = |i: usize| -> Result<Time> {
            let t: Time = record[i].parse().map_err(|_| {
                fail(format!(
                    "malformed number `{}` in {}",
                    &record[i], HEADER[i]
                ))
            })?;
            if t.is_negative() {
                return Err(fail(format!("negative time {t} in {}", HEADER[i])));
            }
            Ok(t)
        };
        let flag = |i: usize| -> Result<bool> {
            match &record[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(fail(format!(
                    "flag {} must be 0 or 1, got `{other}`",
                    HEADER[i]
                ))),
            }
        };
        observations.push(Observation::new(time(0)?, flag(1)?, time(2)?, flag(3)?)?);
    }
    if observations.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no observations".into(),
        });
    }
    Ok(Dataset::new(observations))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
