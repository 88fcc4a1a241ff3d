use crate::manifest::{write_sidecar, ManifestBuilder};
use crate::output::{fmt17, orbit_from_args, parse_diffusivities};
use crate::{CliError, ScanArgs};
use ml_floquet_core::floquet::{monodromy, ScanPoint};
use rayon::prelude::*;
use std::io::Write;

/// Renders the shared scan CSV schema.
pub fn scan_csv(points: &[ScanPoint]) -> String {
    let mut body = String::from("k2,abs_mu1,re_mu1,im_mu1,abs_mu2,mu3\n");
    for p in points {
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(p.k2),
            fmt17(p.abs_mu1),
            fmt17(p.re_mu1),
            fmt17(p.im_mu1),
            fmt17(p.abs_mu2),
            fmt17(p.mu3)
        ));
    }
    body
}

pub fn k2_grid(k2_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(k2_max > 0.0) || steps == 0 {
        return Err(CliError::Domain(
            "need positive --k2-max and at least one step".into(),
        ));
    }
    Ok((1..=steps).map(|i| k2_max * i as f64 / steps as f64).collect())
}

pub fn run(args: ScanArgs) -> Result<(), CliError> {
    let orbit = orbit_from_args(args.a, args.t_period)?;
    let d = parse_diffusivities(&args.d)?;
    let grid = k2_grid(args.k2_max, args.steps)?;
    let manifest = ManifestBuilder::new(
        "scan",
        serde_json::json!({
            "A": orbit.amplitude(),
            "T": orbit.period(),
            "D": [d.du, d.dv, d.dw],
            "k2_max": args.k2_max,
            "steps": args.steps,
        }),
    )
    .tolerances(serde_json::json!({ "integration": args.tol }));

    // Grid points are independent; collect preserves grid order.
    let points: Result<Vec<ScanPoint>, CliError> = grid
        .par_iter()
        .map(|&k2| {
            monodromy(&orbit, k2, &d, args.tol)
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
            "points": points.len(),
            "max_abs_mu1": max,
        })
    );
    Ok(())
}
