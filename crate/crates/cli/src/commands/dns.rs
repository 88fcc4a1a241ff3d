use crate::manifest::{write_sidecar, ManifestBuilder};
use crate::output::fmt17;
use crate::{CliError, DnsArgs};
use ml_floquet_core::dns::{simulate, DnsConfig};
use ml_floquet_core::floquet::Diffusivities;
use serde::Deserialize;
use std::io::Write;

/// JSON configuration: the orbit (by `A` or `T`) plus the grid and
/// disturbance parameters.
#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct DnsFileConfig {
    #[serde(rename = "A")]
    a: Option<f64>,
    #[serde(rename = "T")]
    t_period: Option<f64>,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    n: usize,
    dt: f64,
    t_end: f64,
    eps0: f64,
    k_pert: f64,
    #[serde(rename = "D")]
    d: [f64; 3],
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    noise_amp: f64,
}

pub fn run(args: DnsArgs) -> Result<(), CliError> {
    let raw = std::fs::read_to_string(&args.config)?;
    let file_cfg: DnsFileConfig = serde_json::from_str(&raw)
        .map_err(|e| CliError::Domain(format!("config {}: {e}", args.config)))?;
    let orbit = crate::output::orbit_from_args(file_cfg.a, file_cfg.t_period)?;
    let cfg = DnsConfig {
        l: file_cfg.l,
        n: file_cfg.n,
        dt: file_cfg.dt,
        t_end: file_cfg.t_end,
        eps0: file_cfg.eps0,
        k_pert: file_cfg.k_pert,
        d: Diffusivities::new(file_cfg.d[0], file_cfg.d[1], file_cfg.d[2])?,
        seed: file_cfg.seed,
        noise_amp: file_cfg.noise_amp,
    };
    let manifest = ManifestBuilder::new(
        "dns",
        serde_json::json!({
            "config": args.config,
            "A": orbit.amplitude(),
            "T": orbit.period(),
            "L": cfg.l, "N": cfg.n, "dt": cfg.dt, "t_end": cfg.t_end,
            "eps0": cfg.eps0, "k_pert": cfg.k_pert,
            "D": [cfg.d.du, cfg.d.dv, cfg.d.dw],
            "seed": cfg.seed, "noise_amp": cfg.noise_amp,
        }),
    );

    let out = simulate(&orbit, &cfg)?;
    let mut body = String::from("t,amp_u_re,amp_u_im,amp_v_re,amp_v_im,amp_w_re,amp_w_im\n");
    for s in &out.strobes {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt17(s.t),
            fmt17(s.amp[0].re),
            fmt17(s.amp[0].im),
            fmt17(s.amp[1].re),
            fmt17(s.amp[1].im),
            fmt17(s.amp[2].re),
            fmt17(s.amp[2].im)
        ));
    }
    let mut f = std::fs::File::create(&args.out)?;
    f.write_all(body.as_bytes())?;
    write_sidecar(&args.out, &manifest.finish(&[&args.out]))?;
    println!(
        "{}",
        serde_json::json!({
            "out": args.out,
            "strobes": out.strobes.len(),
            "steps_per_period": out.steps_per_period,
            "dt": out.dt,
        })
    );
    Ok(())
}
