use crate::commands::scan::{k2_grid, scan_csv};
use crate::manifest::{write_sidecar, ManifestBuilder};
use crate::output::{parse_diffusivities, parse_triple};
use crate::{CliError, GeneralArgs};
use ml_floquet_core::floquet::ScanPoint;
use ml_floquet_core::general::{
    check_continuum, find_orbit_with_period, find_periodic_orbit, general_monodromy, seed_on_ray,
    GeneralParams,
};
use rayon::prelude::*;
use std::io::Write;

pub fn run(args: GeneralArgs) -> Result<(), CliError> {
    let alphas = parse_triple(&args.alphas)?;
    let betas = parse_triple(&args.betas)?;
    let params = GeneralParams::new(alphas, betas)?;
    let residual = check_continuum(&params);
    let d = parse_diffusivities(&args.d)?;

    let orbit = match (args.seed_ray, args.period_target) {
        (Some(ray), None) => {
            find_periodic_orbit(&params, seed_on_ray(&params, ray)?, args.closure_tol)?
        }
        (None, Some(t)) => find_orbit_with_period(&params, t, 0.05, args.closure_tol)?,
        _ => {
            return Err(CliError::Domain(
                "give exactly one of --seed-ray and --period-target".into(),
            ))
        }
    };

    let manifest = ManifestBuilder::new(
        "general",
        serde_json::json!({
            "alphas": alphas,
            "betas": betas,
            "continuum_residual": residual,
            "D": [d.du, d.dv, d.dw],
            "T": orbit.period(),
            "closure_gap": orbit.closure_gap(),
            "k2_max": args.k2_max,
            "steps": args.steps,
        }),
    )
    .tolerances(serde_json::json!({
        "integration": args.tol,
        "closure": args.closure_tol,
    }));

    let grid = k2_grid(args.k2_max, args.steps)?;
    let points: Result<Vec<ScanPoint>, CliError> = grid
        .par_iter()
        .map(|&k2| {
            general_monodromy(&orbit, k2, &d, args.tol)
                .map(|r| ScanPoint::from_result(&r))
                .map_err(CliError::from)
        })
        .collect();
    let points = points?;

    let mut f = std::fs::File::create(&args.out)?;
    f.write_all(scan_csv(&points).as_bytes())?;
    write_sidecar(&args.out, &manifest.finish(&[&args.out]))?;
    let max = points.iter().map(|p| p.abs_mu1).fold(0.0_f64, f64::max);
    println!(
        "{}",
        serde_json::json!({
            "out": args.out,
            "T": orbit.period(),
            "closure_gap": orbit.closure_gap(),
            "continuum_residual": residual,
            "max_abs_mu1": max,
        })
    );
    Ok(())
}
