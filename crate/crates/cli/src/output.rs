//! Deterministic numeric formatting and shared parsing helpers.

use crate::CliError;
use ml_floquet_core::floquet::Diffusivities;
use ml_floquet_core::orbit::PeriodicOrbit;

/// 17 significant digits in scientific notation: enough to round-trip f64
/// exactly, so golden CSV files diff cleanly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `du,dv,dw`.
pub fn parse_diffusivities(s: &str) -> Result<Diffusivities, CliError> {
    let parts = parse_triple(s)?;
    Ok(Diffusivities::new(parts[0], parts[1], parts[2])?)
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], CliError> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Domain(format!("cannot parse triple '{s}': {e}")))?;
    if vals.len() != 3 {
        return Err(CliError::Domain(format!(
            "expected three comma-separated values, got '{s}'"
        )));
    }
    Ok([vals[0], vals[1], vals[2]])
}

/// Builds the orbit from either `--A` or `--T`.
pub fn orbit_from_args(a: Option<f64>, t_period: Option<f64>) -> Result<PeriodicOrbit, CliError> {
    match (a, t_period) {
        (Some(a), None) => Ok(PeriodicOrbit::new(a)?),
        (None, Some(t)) => Ok(PeriodicOrbit::from_period(t)?),
        _ => Err(CliError::Domain(
            "exactly one of --A and --T must be given".into(),
        )),
    }
}
