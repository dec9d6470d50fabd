//! Multiplier rasters as whitespace-separated text grids.
//!
//! Each non-empty line is one row of the node lattice; the first line is
//! `y = 0` and the first value of a line is `x = 0`. Lines starting with `#`
//! are comments.

use std::path::Path;

use shalegas_core::physics::Raster;

use crate::error::{Error, Result};

pub fn parse_raster(text: &str, context: &str) -> Result<Raster> {
    let fail = |message: String| Error::Format {
        context: context.to_string(),
        message,
    };
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fail(format!("line {}: bad value '{t}'", k + 1))))
            .collect::<Result<_>>()?;
        match nx {
            None => nx = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(fail(format!("line {}: expected {n} values, found {}", k + 1, row.len())));
            }
            _ => {}
        }
        values.extend(row);
        ny += 1;
    }
    let nx = nx.ok_or_else(|| fail("no data".into()))?;
    Raster::new(nx, ny, values).map_err(|e| fail(e.to_string()))
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_raster(&text, &path.display().to_string())
}

pub fn raster_to_text(r: &Raster) -> String {
    let mut out = String::new();
    for row in r.values().chunks(r.nx()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
