//! Particle-number grids.

use crate::error::{CliError, CliResult};

/// Parses a non-negative integer, also accepting forms like `1e4`.
pub fn parse_count(s: &str) -> CliResult<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 => Ok(v as u64),
        _ => Err(CliError::parse(format!("expected a non-negative integer, got {s:?}"))),
    }
}

fn three_fields(spec: &str, what: &str) -> CliResult<(u64, u64, u64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::parse(format!("{what} must look like lo:hi:step, got {spec:?}")));
    }
    let (lo, hi, step) = (parse_count(parts[0])?, parse_count(parts[1])?, parse_count(parts[2])?);
    if lo > hi {
        return Err(CliError::parse(format!("{what} needs lo <= hi, got {spec:?}")));
    }
    if step == 0 {
        return Err(CliError::parse(format!("{what} needs a positive step, got {spec:?}")));
    }
    Ok((lo, hi, step))
}

/// `lo:hi:points_per_decade`, logarithmically spaced, rounded and deduplicated.
pub fn parse_log_grid(spec: &str) -> CliResult<Vec<u64>> {
    let (lo, hi, per_decade) = three_fields(spec, "--n-grid")?;
    if lo == 0 {
        return Err(CliError::parse("--n-grid needs lo >= 1"));
    }
    Ok(log_grid(lo, hi, per_decade))
}

pub fn log_grid(lo: u64, hi: u64, per_decade: u64) -> Vec<u64> {
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let steps = ((b - a) * per_decade as f64 + 1e-9).floor() as u64;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| 10f64.powf(a + k as f64 / per_decade as f64).round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.push(hi);
    out.dedup();
    out
}

/// `lo:hi:step`, linearly spaced.
pub fn parse_lin_grid(spec: &str) -> CliResult<Vec<u64>> {
    let (lo, hi, step) = three_fields(spec, "--n-lin")?;
    Ok((lo..=hi).step_by(step as usize).collect())
}
