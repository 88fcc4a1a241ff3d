use crate::output::{orbit_from_args, parse_diffusivities};
use crate::{CliError, MonodromyArgs};
use ml_floquet_core::linalg::cabs;

pub fn run(args: MonodromyArgs) -> Result<(), CliError> {
    let orbit = orbit_from_args(args.a, args.t_period)?;
    let d = parse_diffusivities(&args.d)?;
    let r = ml_floquet_core::monodromy(&orbit, args.k2, &d, args.tol)?;
    let mus: Vec<serde_json::Value> = r
        .multipliers
        .iter()
        .map(|m| serde_json::json!({ "re": m.re, "im": m.im, "abs": cabs(*m) }))
        .collect();
    println!(
        "{}",
        serde_json::json!({
            "A": r.a,
            "T": r.t_period,
            "k2": r.k2,
            "D": [d.du, d.dv, d.dw],
            "matrix": r.m.0,
            "multipliers": mus,
            "det_rel_err": r.det_rel_err,
            "tol": r.integ_tol,
        })
    );
    Ok(())
}
