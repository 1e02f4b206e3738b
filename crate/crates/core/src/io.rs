//! Plain CSV for single paths: a `t,value` header then one row per grid point.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::path::SampledPath;

pub fn write_path_csv(path: &SampledPath) -> String {
    let mut out = String::from("t,value\n");
    for (k, v) in path.values().iter().enumerate() {
        let _ = writeln!(out, "{:.15e},{}", path.grid().time(k), v);
    }
    out
}

/// Reads a path written by [`write_path_csv`]. The step is taken from the
/// first two times; later times must agree with it to 1e-9 relative.
pub fn read_path_csv(text: &str) -> Result<SampledPath> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("t,value") => {}
        other => return Err(Error::Parse(format!("expected header `t,value`, got {other:?}"))),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("row {}: expected two fields", i + 1)))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}: {s:?}", i + 1)))
        };
        times.push(num(t)?);
        values.push(num(v)?);
    }
    if times.len() < 2 {
        return Err(Error::Parse("a path needs at least two rows".into()));
    }
    let dt = times[1] - times[0];
    for (k, &t) in times.iter().enumerate() {
        let expect = k as f64 * dt;
        if (t - expect).abs() > 1e-9 * expect.abs().max(dt) {
            return Err(Error::Parse(format!("row {}: time {t} is off the uniform grid", k + 1)));
        }
    }
    SampledPath::from_values(dt, values)
}
