use crate::output::parse_diffusivities;
use crate::{CliError, CriticalArgs};
use ml_floquet_core::floquet::{critical_period, CriticalOutcome};

pub fn run(args: CriticalArgs) -> Result<(), CliError> {
    let d = parse_diffusivities(&args.d)?;
    let outcome = critical_period(&d, args.t_max, args.tol)?;
    let tolerances = serde_json::json!({
        "integration": args.tol,
        "multiplier_excess": 1e-3,
        "k2_refinement": 1e-4,
    });
    match outcome {
        CriticalOutcome::Critical {
            t_star,
            k_star2,
            a_star,
            mu_at_kstar,
        } => println!(
            "{}",
            serde_json::json!({
                "T_star": t_star,
                "k_star2": k_star2,
                "A_star": a_star,
                "mu_at_kstar": { "re": mu_at_kstar.re, "im": mu_at_kstar.im },
                "tolerances": tolerances,
            })
        ),
        CriticalOutcome::StableUpTo { t_max, max_abs_mu1 } => println!(
            "{}",
            serde_json::json!({
                "stable_up_to": t_max,
                "max_abs_mu1": max_abs_mu1,
                "tolerances": tolerances,
            })
        ),
    }
    Ok(())
}
