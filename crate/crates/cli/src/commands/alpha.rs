use crate::manifest::{write_sidecar, ManifestBuilder};
use crate::output::fmt17;
use crate::{AlphaArgs, CliError};
use ml_floquet_core::floquet::Diffusivities;
use ml_floquet_core::longwave::{alpha_fourier, alpha_numeric, default_k2_samples};
use ml_floquet_core::orbit::PeriodicOrbit;
use rayon::prelude::*;
use std::io::Write;

/// The probe triple used for reporting: the largest splitting.
fn probe() -> Diffusivities {
    Diffusivities::new(1.0, 0.0, 0.0).unwrap()
}

fn alpha_pair(a: f64, route: &str, tol: f64) -> Result<(Option<f64>, Option<f64>), CliError> {
    let orbit = PeriodicOrbit::new(a)?;
    let fourier = match route {
        "fourier" | "both" => Some(alpha_fourier(&orbit, &probe(), tol)?.alpha_stab),
        _ => None,
    };
    let numeric = match route {
        "numeric" | "both" => {
            Some(alpha_numeric(&orbit, &default_k2_samples(&orbit), tol)?.alpha_stab)
        }
        _ => None,
    };
    Ok((fourier, numeric))
}

pub fn run(args: AlphaArgs) -> Result<(), CliError> {
    if !matches!(args.route.as_str(), "fourier" | "numeric" | "both") {
        return Err(CliError::Domain(format!(
            "unknown route '{}' (fourier|numeric|both)",
            args.route
        )));
    }

    if let Some(sweep) = &args.sweep {
        let parts = crate::output::parse_triple(sweep)?;
        let (a_min, a_max, n) = (parts[0], parts[1], parts[2] as usize);
        if n < 2 || !(a_min < a_max) {
            return Err(CliError::Domain("sweep needs A_min < A_max and n >= 2".into()));
        }
        let out = args
            .out
            .as_deref()
            .ok_or_else(|| CliError::Domain("--sweep needs --out".into()))?;
        let manifest = ManifestBuilder::new(
            "alpha",
            serde_json::json!({ "sweep": [a_min, a_max, n], "route": args.route }),
        )
        .tolerances(serde_json::json!({ "integration": args.tol }));

        let grid: Vec<f64> = (0..n)
            .map(|i| a_min + (a_max - a_min) * i as f64 / (n - 1) as f64)
            .collect();
        let rows: Result<Vec<String>, CliError> = grid
            .par_iter()
            .map(|&a| {
                let (f, nu) = alpha_pair(a, &args.route, args.tol)?;
                let x = ml_floquet_core::orbit::A_COEXISTENCE - a;
                Ok(format!(
                    "{},{},{},{}\n",
                    fmt17(a),
                    fmt17(x),
                    f.map(fmt17).unwrap_or_default(),
                    nu.map(fmt17).unwrap_or_default()
                ))
            })
            .collect();
        let mut body = String::from("A,x,alpha_fourier,alpha_numeric\n");
        for row in rows? {
            body.push_str(&row);
        }
        let mut file = std::fs::File::create(out)?;
        file.write_all(body.as_bytes())?;
        write_sidecar(out, &manifest.finish(&[out]))?;
        println!("{}", serde_json::json!({ "out": out, "points": n }));
        return Ok(());
    }

    let a = args.a.expect("clap enforces --A without --sweep");
    let manifest = ManifestBuilder::new(
        "alpha",
        serde_json::json!({ "A": a, "route": args.route }),
    )
    .tolerances(serde_json::json!({ "integration": args.tol }));
    let (fourier, numeric) = alpha_pair(a, &args.route, args.tol)?;
    let result = serde_json::json!({
        "A": a,
        "x": ml_floquet_core::orbit::A_COEXISTENCE - a,
        "alpha_fourier": fourier,
        "alpha_numeric": numeric,
    });
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&result).unwrap() + "\n")?;
        write_sidecar(out, &manifest.finish(&[out]))?;
    }
    println!("{result}");
    Ok(())
}
