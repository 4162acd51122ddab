//! Grid and list argument parsing.
//!
//! A grid spec is either a single number or `start:stop:points`. Sweep
//! grids over photon numbers are log-spaced (every figure uses log axes);
//! the detection-window grid is linear since it starts at zero.

use crate::CliError;

pub fn parse_log_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(spec, true)
}

pub fn parse_linear_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(spec, false)
}

fn parse_grid(spec: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::invalid(format!("malformed grid '{spec}' (want x or start:stop:points)"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [one] => {
            let x: f64 = one.trim().parse().map_err(|_| bad())?;
            check_point(x, log, spec)?;
            Ok(vec![x])
        }
        [start, stop, points] => {
            let a: f64 = start.trim().parse().map_err(|_| bad())?;
            let b: f64 = stop.trim().parse().map_err(|_| bad())?;
            let n: usize = points.trim().parse().map_err(|_| bad())?;
            check_point(a, log, spec)?;
            check_point(b, log, spec)?;
            if n < 1 {
                return Err(CliError::invalid(format!(
                    "grid '{spec}' needs at least 1 point"
                )));
            }
            if n == 1 {
                return Ok(vec![a]);
            }
            if a >= b {
                return Err(CliError::invalid(format!(
                    "grid '{spec}' needs start < stop"
                )));
            }
            let pts = (0..n)
                .map(|i| {
                    let f = i as f64 / (n - 1) as f64;
                    if log {
                        a * (b / a).powf(f)
                    } else {
                        a + (b - a) * f
                    }
                })
                .collect();
            Ok(pts)
        }
        _ => Err(bad()),
    }
}

fn check_point(x: f64, log: bool, spec: &str) -> Result<(), CliError> {
    if !x.is_finite() || x < 0.0 || (log && x == 0.0) {
        return Err(CliError::invalid(format!(
            "grid '{spec}' values must be {} and finite",
            if log { "strictly positive" } else { "nonnegative" }
        )));
    }
    Ok(())
}

/// Comma-separated list of numbers.
pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid(format!("malformed number '{s}' in list '{spec}'")))
        })
        .collect()
}

/// Comma-separated list of integers.
pub fn parse_int_list(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::invalid(format!("malformed integer '{s}' in list '{spec}'")))
        })
        .collect()
}
