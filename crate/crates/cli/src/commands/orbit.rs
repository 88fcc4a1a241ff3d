use crate::manifest::{write_sidecar, ManifestBuilder};
use crate::output::{fmt17, orbit_from_args};
use crate::{CliError, OrbitArgs};
use std::io::Write;

pub fn run(args: OrbitArgs) -> Result<(), CliError> {
    if args.samples < 2 {
        return Err(CliError::Domain("need at least 2 samples".into()));
    }
    let orbit = orbit_from_args(args.a, args.t_period)?;
    let manifest = ManifestBuilder::new(
        "orbit",
        serde_json::json!({
            "A": orbit.amplitude(),
            "T": orbit.period(),
            "samples": args.samples,
        }),
    );

    let mut body = String::from("t,u,v,w\n");
    let t_period = orbit.period();
    for i in 0..args.samples {
        let t = t_period * i as f64 / args.samples as f64;
        let [u, v, w] = orbit.point(t);
        body.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(t),
            fmt17(u),
            fmt17(v),
            fmt17(w)
        ));
    }
    let mut f = std::fs::File::create(&args.out)?;
    f.write_all(body.as_bytes())?;
    write_sidecar(&args.out, &manifest.finish(&[&args.out]))?;
    println!(
        "{}",
        serde_json::json!({
            "A": orbit.amplitude(),
            "T": orbit.period(),
            "out": args.out,
        })
    );
    Ok(())
}
