use crate::{CliError, PeriodArgs};
use ml_floquet_core::orbit::{amplitude_from_period, quartic_roots, PeriodicOrbit};

pub fn run(args: PeriodArgs) -> Result<(), CliError> {
    if args.invert {
        let t = args
            .t_period
            .ok_or_else(|| CliError::Domain("--invert needs --T".into()))?;
        let a = amplitude_from_period(t)?;
        println!("{}", serde_json::json!({ "T": t, "A": a }));
        return Ok(());
    }
    let a = args
        .a
        .ok_or_else(|| CliError::Domain("give --A, or --invert with --T".into()))?;
    let orbit = PeriodicOrbit::new(a)?;
    let (u1, u2, u3) = quartic_roots(a)?;
    println!(
        "{}",
        serde_json::json!({
            "A": a,
            "T": orbit.period(),
            "roots": [u1, u2, u3],
            "elliptic_parameter": orbit.elliptic_parameter().m(),
        })
    );
    Ok(())
}
