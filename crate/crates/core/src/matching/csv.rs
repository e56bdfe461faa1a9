//! `query_idx,train_idx,distance` CSV with a header row.

use std::io::{BufRead, Write};

use super::{Match, MatchError};

pub const HEADER: &str = "query_idx,train_idx,distance";

pub fn write_matches(mut w: impl Write, matches: &[Match]) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for m in matches {
        writeln!(w, "{},{},{}", m.query_idx, m.train_idx, m.distance)?;
    }
    Ok(())
}

pub fn read_matches(r: impl BufRead) -> Result<Vec<Match>, MatchError> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| MatchError::Csv(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| MatchError::Csv(format!("line {}: bad field {s:?}", lineno + 1)))
        };
        if fields.len() != 3 {
            return Err(MatchError::Csv(format!("line {}: expected 3 fields", lineno + 1)));
        }
        out.push(Match {
            query_idx: parse(fields[0])? as usize,
            train_idx: parse(fields[1])? as usize,
            distance: parse(fields[2])? as u32,
        });
    }
    Ok(out)
}
